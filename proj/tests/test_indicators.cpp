#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "monolod/coefficients.hpp"
#include "monolod/indicators.hpp"
#include "monolod/solver.hpp"
#include "oracles.hpp"

using namespace monolod;

namespace {

MatrixField periodic_field(const TriMesh& fine, double epsilon) {
  return linearize(LinearizationKind::newton, periodic_coefficient(epsilon), fine, {}).field;
}

}  // namespace

TEST_CASE("error records: trivial identities and the dense-norm oracle") {
  const NestedPair pair(build_mesh(8), build_mesh(32));
  const InterpolationOperator interp = compose_interpolation(pair);
  const SparseOperator mass = assemble_mass(pair.fine());
  const SparseOperator h1 = assemble_identity_stiffness(pair.fine());

  std::mt19937_64 gen = oracles::rng(4);
  Eigen::VectorXd u_ref = Eigen::VectorXd::Zero(pair.fine().node_count());
  for (int i : pair.fine().interior_nodes()) u_ref[i] = oracles::unit(gen) - 0.25;

  const ErrorRecord same =
      compute_errors(u_ref, u_ref, interp, pair, mass, h1, MacroscopicPart::interpolate);
  CHECK(same.e_LOD == 0.0);
  // e_H of the exact solution is its own interpolation gap, not zero; the
  // direct variant vanishes identically
  const ErrorRecord direct =
      compute_errors(u_ref, u_ref, interp, pair, mass, h1, MacroscopicPart::direct);
  CHECK(direct.e_H == 0.0);

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(pair.fine().node_count());
  const ErrorRecord null_ms =
      compute_errors(u_ref, zero, interp, pair, mass, h1, MacroscopicPart::interpolate);
  CHECK(null_ms.e_LOD == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(null_ms.e_H == doctest::Approx(1.0).epsilon(1e-12));

  // dense-norm oracle for a nontrivial pair
  Eigen::VectorXd u_ms = u_ref;
  for (int i : pair.fine().interior_nodes()) u_ms[i] += 0.1 * (oracles::unit(gen) - 0.5);
  const ErrorRecord rec =
      compute_errors(u_ref, u_ms, interp, pair, mass, h1, MacroscopicPart::interpolate);
  const double e_lod_oracle = std::sqrt(oracles::p1_h1_seminorm_sq(pair.fine(), u_ref - u_ms) /
                                        oracles::p1_h1_seminorm_sq(pair.fine(), u_ref));
  CHECK(rec.e_LOD == doctest::Approx(e_lod_oracle).epsilon(1e-12));
  const Eigen::VectorXd macro = pair.embed(interp.apply_full(u_ms));
  const double e_h_oracle = std::sqrt(oracles::p1_l2_norm_sq(pair.fine(), u_ref - macro) /
                                      oracles::p1_l2_norm_sq(pair.fine(), u_ref));
  CHECK(rec.e_H == doctest::Approx(e_h_oracle).epsilon(1e-12));

  CHECK_THROWS_AS(
      compute_errors(zero, u_ms, interp, pair, mass, h1, MacroscopicPart::interpolate),
      std::invalid_argument);
}

TEST_CASE("best L2 approximation: exactness in the space and the dense oracle") {
  const NestedPair pair(build_mesh(4), build_mesh(16));
  const SparseOperator mass = assemble_mass(pair.fine());

  // a function already in the embedded coarse space projects onto itself
  std::mt19937_64 gen = oracles::rng(6);
  Eigen::VectorXd coarse = Eigen::VectorXd::Zero(pair.coarse().node_count());
  for (int i : pair.coarse().interior_nodes()) coarse[i] = oracles::unit(gen);
  const Eigen::VectorXd embedded = pair.embed(coarse);
  const BestApproximation in_space = best_l2_approximation(embedded, pair, mass);
  CHECK(in_space.relative_error <= 1e-12);
  CHECK((in_space.projection - embedded).cwiseAbs().maxCoeff() < 1e-12);

  // a fine hat at a non-coarse node, against a dense normal-equations oracle
  int fine_only = -1;
  for (int i : pair.fine().interior_nodes()) {
    bool is_coarse = false;
    for (int cn = 0; cn < pair.coarse().node_count(); ++cn)
      if (pair.fine_node_of_coarse_node(cn) == i) is_coarse = true;
    if (!is_coarse) {
      fine_only = i;
      break;
    }
  }
  REQUIRE(fine_only >= 0);
  Eigen::VectorXd hat = Eigen::VectorXd::Zero(pair.fine().node_count());
  hat[fine_only] = 1.0;
  const BestApproximation got = best_l2_approximation(hat, pair, mass);

  const std::vector<int> interior = pair.coarse().interior_nodes();
  Eigen::MatrixXd embedding(pair.fine().node_count(), interior.size());
  for (std::size_t c = 0; c < interior.size(); ++c) {
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(pair.coarse().node_count());
    unit[interior[c]] = 1.0;
    embedding.col(c) = pair.embed(unit);
  }
  const Eigen::MatrixXd mass_dense(mass.matrix());
  const Eigen::MatrixXd gram = embedding.transpose() * mass_dense * embedding;
  const Eigen::VectorXd rhs = embedding.transpose() * mass_dense * hat;
  const Eigen::VectorXd coeff = oracles::dense_solve(gram, rhs);
  const Eigen::VectorXd projection = embedding * coeff;
  CHECK((got.projection - projection).cwiseAbs().maxCoeff() < 1e-10);
  const double err_oracle = std::sqrt(oracles::p1_l2_norm_sq(pair.fine(), hat - projection) /
                                      oracles::p1_l2_norm_sq(pair.fine(), hat));
  CHECK(got.relative_error == doctest::Approx(err_oracle).epsilon(1e-10));
}

TEST_CASE("coefficient scaling by the patch trace average") {
  // two-element patch at h = H = 1: averages computed by hand
  const NestedPair pair(build_mesh(1), build_mesh(1));
  const Patch patch = build_patch(pair, 0, 1);
  REQUIRE(patch.fine_elements.size() == 2);

  MatrixField field(2);
  field[0] = Eigen::Vector2d(1.0, 2.0).asDiagonal();  // trace 3
  field[1] = Eigen::Vector2d(3.0, 5.0).asDiagonal();  // trace 8
  const MatrixField scaled = scale_coefficient(field, patch, pair.fine());
  const double avg = (3.0 + 8.0) / 2.0;  // equal element areas
  CHECK((scaled[0] - field[0] / avg).cwiseAbs().maxCoeff() == 0.0);
  CHECK((scaled[1] - field[1] / avg).cwiseAbs().maxCoeff() == 0.0);

  // constant c Id scales to Id/2 (trace of the 2x2 identity is 2)
  MatrixField constant(2, 3.25 * Eigen::Matrix2d::Identity());
  const MatrixField unit_trace = scale_coefficient(constant, patch, pair.fine());
  CHECK((unit_trace[0] - 0.5 * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() == 0.0);

  // scaling invariance: field and 5 * field give the same result
  MatrixField five = field;
  for (int e = 0; e < five.size(); ++e) five[e] *= 5.0;
  const MatrixField scaled5 = scale_coefficient(five, patch, pair.fine());
  for (int e = 0; e < 2; ++e)
    CHECK((scaled5[e] - scaled[e]).cwiseAbs().maxCoeff() < 1e-15);

  MatrixField negative(2, -Eigen::Matrix2d::Identity());
  CHECK_THROWS_AS(scale_coefficient(negative, patch, pair.fine()), std::invalid_argument);
}

TEST_CASE("indicator vanishes for scalar multiples of the coefficient") {
  const NestedPair pair(build_mesh(8), build_mesh(32));
  const InterpolationOperator interp = compose_interpolation(pair);
  const MatrixField field = periodic_field(pair.fine(), 1.0 / 8.0);
  const CorrectorSet set = build_corrector_set(pair, field, interp, 2);

  // power-of-two rescaling is exact in floating point: the indicator is zero
  MatrixField doubled = field;
  for (int e = 0; e < doubled.size(); ++e) doubled[e] *= 2.0;
  for (int T : {0, 17, 63, 127})
    CHECK(compute_indicator(field, doubled, set.corrector(T), pair) == 0.0);

  // identical fields as well
  for (int T : {5, 99})
    CHECK(compute_indicator(field, field, set.corrector(T), pair) == 0.0);

  // a generic scalar multiple is zero up to roundoff in the scaling
  MatrixField generic = field;
  for (int e = 0; e < generic.size(); ++e) generic[e] *= 3.7;
  for (int T : {11, 64}) {
    CHECK(compute_indicator(field, generic, set.corrector(T), pair) <= 1e-12);
  }
}

TEST_CASE("indicator bounds the corrector recomputation gap") {
  const NestedPair pair(build_mesh(8), build_mesh(32));
  const InterpolationOperator interp = compose_interpolation(pair);
  const MatrixField field = periodic_field(pair.fine(), 1.0 / 8.0);
  const int m = 2;
  const CorrectorSet set = build_corrector_set(pair, field, interp, m);
  const SparseOperator h1 = assemble_identity_stiffness(pair.fine());

  std::mt19937_64 gen = oracles::rng(55);
  double worst_ratio = 0.0;
  int checked = 0;
  for (int trial = 0; trial < 5; ++trial) {
    MatrixField perturbed = field;
    const int element = static_cast<int>(oracles::unit(gen) * perturbed.size());
    perturbed[element] *= 2.0;

    Eigen::VectorXd v = Eigen::VectorXd::Zero(pair.coarse().node_count());
    for (int i : pair.coarse().interior_nodes()) v[i] = oracles::unit(gen) - 0.5;

    for (int T = 0; T < pair.coarse().element_count(); ++T) {
      const ElementCorrector& ec = set.corrector(T);
      const double indicator = compute_indicator(field, perturbed, ec, pair);
      // gradient of v on T for the right-hand side scale
      const auto g = pair.coarse().hat_gradients(T);
      const auto& t = pair.coarse().element(T);
      const Eigen::Vector2d grad =
          v[t[0]] * g.col(0) + v[t[1]] * g.col(1) + v[t[2]] * g.col(2);
      const double v_T = std::sqrt(pair.coarse().element_area(T)) * grad.norm();

      const ElementCorrector other =
          solve_element_corrector(pair, ec.patch, perturbed, interp);
      Eigen::VectorXd gap = Eigen::VectorXd::Zero(pair.fine().node_count());
      for (int j = 0; j < 2; ++j)
        gap += grad[j] * (ec.expand(j, pair.fine().node_count()) -
                          other.expand(j, pair.fine().node_count()));
      const double lhs = h1_seminorm(h1, gap);

      if (indicator * v_T <= 1e-14) {
        CHECK(lhs <= 1e-10);
        continue;
      }
      worst_ratio = std::max(worst_ratio, lhs / (indicator * v_T));
      ++checked;
    }
  }
  CHECK(checked > 0);
  CHECK(worst_ratio <= 10.0);
  CHECK(worst_ratio > 0.0);
}

TEST_CASE("indicator table is deterministic and parallel-safe") {
  const NestedPair pair(build_mesh(4), build_mesh(16));
  const InterpolationOperator interp = compose_interpolation(pair);
  const MatrixField field = periodic_field(pair.fine(), 1.0 / 4.0);
  const CorrectorSet set = build_corrector_set(pair, field, interp, 1);
  MatrixField perturbed = field;
  perturbed[7] *= 1.5;
  const std::vector<double> a = compute_indicator_table(field, perturbed, set, pair);
  const std::vector<double> b = compute_indicator_table(field, perturbed, set, pair);
  CHECK(a == b);
  CHECK(static_cast<int>(a.size()) == pair.coarse().element_count());
}
