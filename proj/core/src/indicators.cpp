#include "monolod/indicators.hpp"

#include <Eigen/LU>

#include <cmath>
#include <stdexcept>

#include "monolod/parallel.hpp"

namespace monolod {

ErrorRecord compute_errors(const Eigen::VectorXd& u_ref, const Eigen::VectorXd& u_ms,
                           const InterpolationOperator& interp, const NestedPair& pair,
                           const SparseOperator& mass, const SparseOperator& h1,
                           MacroscopicPart part) {
  if (u_ref.size() != u_ms.size())
    throw std::invalid_argument("compute_errors: vectors live on different meshes");
  const double ref_l2 = l2_norm(mass, u_ref);
  const double ref_h1 = h1_seminorm(h1, u_ref);
  if (ref_l2 <= 0.0 || ref_h1 <= 0.0)
    throw std::invalid_argument("compute_errors: zero reference norm");

  ErrorRecord rec;
  rec.H = pair.coarse().mesh_size();
  rec.h = pair.fine().mesh_size();
  rec.e_LOD = h1_seminorm(h1, u_ref - u_ms) / ref_h1;

  Eigen::VectorXd macro;
  if (part == MacroscopicPart::interpolate) {
    macro = pair.embed(interp.apply_full(u_ms));
  } else {
    macro = u_ms;  // Petrov-Galerkin solutions already lie in V_H
  }
  rec.e_H = l2_norm(mass, u_ref - macro) / ref_l2;
  return rec;
}

BestApproximation best_l2_approximation(const Eigen::VectorXd& u_ref, const NestedPair& pair,
                                        const SparseOperator& fine_mass) {
  const std::vector<int> interior = pair.coarse().interior_nodes();
  std::vector<int> all_fine(pair.fine().node_count());
  for (int i = 0; i < static_cast<int>(all_fine.size()); ++i) all_fine[i] = i;
  const Eigen::SparseMatrix<double> embedding =
      restrict_matrix(pair.prolongation(), all_fine, interior);

  const Eigen::SparseMatrix<double> gram =
      (embedding.transpose() * (fine_mass.matrix() * embedding).eval()).pruned();
  SparseOperator gram_op(gram, true);
  const Eigen::VectorXd rhs = embedding.transpose() * fine_mass.apply(u_ref);
  const Eigen::VectorXd coeff = gram_op.solve(rhs);

  BestApproximation out;
  out.projection = embedding * coeff;
  const double ref = l2_norm(fine_mass, u_ref);
  if (ref <= 0.0) throw std::invalid_argument("best_l2_approximation: zero reference norm");
  out.relative_error = l2_norm(fine_mass, u_ref - out.projection) / ref;
  return out;
}

namespace {

double patch_trace_average(const MatrixField& field, const Patch& patch, const TriMesh& fine) {
  double weighted = 0.0;
  double total = 0.0;
  for (int fe : patch.fine_elements) {
    weighted += fine.element_area(fe) * field[fe].trace();
    total += fine.element_area(fe);
  }
  return weighted / total;
}

}  // namespace

MatrixField scale_coefficient(const MatrixField& field, const Patch& patch,
                              const TriMesh& fine) {
  const double avg = patch_trace_average(field, patch, fine);
  if (!(avg > 0.0))
    throw std::invalid_argument("scale_coefficient: nonpositive trace average violates ellipticity");
  MatrixField scaled(static_cast<int>(patch.fine_elements.size()));
  for (int i = 0; i < static_cast<int>(patch.fine_elements.size()); ++i)
    scaled[i] = field[patch.fine_elements[i]] / avg;
  return scaled;
}

double compute_indicator(const MatrixField& field, const MatrixField& other_field,
                         const ElementCorrector& corrector, const NestedPair& pair) {
  const Patch& patch = corrector.patch;
  const TriMesh& fine = pair.fine();
  const TriMesh& coarse = pair.coarse();
  const int T = corrector.element;

  const MatrixField scaled = scale_coefficient(field, patch, fine);
  const MatrixField scaled_other = scale_coefficient(other_field, patch, fine);

  // patch-local index of each fine element
  std::unordered_map<int, int> patch_pos;
  patch_pos.reserve(patch.fine_elements.size());
  for (int i = 0; i < static_cast<int>(patch.fine_elements.size()); ++i)
    patch_pos.emplace(patch.fine_elements[i], i);

  std::vector<int> dof_of_local(patch.patch_nodes.size(), -1);
  for (int d = 0; d < static_cast<int>(patch.interior_fine_nodes.size()); ++d)
    dof_of_local[patch.interior_fine_nodes[d]] = d;

  double indicator_sq = 0.0;
  for (int ce : patch.coarse_elements) {
    double linf_sq = 0.0;
    Eigen::Matrix2d gram = Eigen::Matrix2d::Zero();
    for (int fe : pair.fine_elements_of(ce)) {
      const int pos = patch_pos.at(fe);
      linf_sq = std::max(linf_sq,
                         std::pow(spectral_norm_2x2(scaled_other[pos] - scaled[pos]), 2));

      // columns of (chi_T e_j - grad q^(j)) on this fine element
      const auto grads = fine.hat_gradients(fe);
      const auto& t = fine.element(fe);
      Eigen::Matrix2d cols = Eigen::Matrix2d::Zero();
      if (ce == T) cols.setIdentity();
      for (int j = 0; j < 2; ++j) {
        Eigen::Vector2d gq = Eigen::Vector2d::Zero();
        for (int i = 0; i < 3; ++i) {
          const int l = patch.local_index(t[i]);
          const int dof = l >= 0 ? dof_of_local[l] : -1;
          if (dof >= 0) gq += corrector.vectors[j][dof] * grads.col(i);
        }
        cols.col(j) -= gq;
      }
      gram += fine.element_area(fe) * cols.transpose() * cols;
    }
    // largest eigenvalue of the symmetric 2x2 Gram, scaled by 1/|T|
    const double mean = 0.5 * gram.trace();
    const double det = gram.determinant();
    const double disc = std::sqrt(std::max(mean * mean - det, 0.0));
    const double mu_max = (mean + disc) / coarse.element_area(T);
    indicator_sq += linf_sq * mu_max;
  }
  return std::sqrt(indicator_sq);
}

std::vector<double> compute_indicator_table(const MatrixField& field,
                                            const MatrixField& other_field,
                                            const CorrectorSet& correctors,
                                            const NestedPair& pair) {
  std::vector<double> table(correctors.correctors().size(), 0.0);
  parallel_for(static_cast<int>(table.size()), [&](int T) {
    table[T] = compute_indicator(field, other_field, correctors.corrector(T), pair);
  });
  return table;
}

}  // namespace monolod
