#include "monolod/solver.hpp"

#include <cmath>
#include <chrono>
#include <cstdio>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SparseLU>

namespace monolod {

namespace {

/// Residual of the nonlinear form without the load: r_i = sum_K |K| F . grad phi_i.
Eigen::VectorXd nonlinear_residual(const TriMesh& mesh, const ProblemCoefficient& coef,
                                   const Eigen::VectorXd& u) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(mesh.node_count());
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto grads = mesh.hat_gradients(e);
    const auto& t = mesh.element(e);
    const Eigen::Vector2d g =
        u[t[0]] * grads.col(0) + u[t[1]] * grads.col(1) + u[t[2]] * grads.col(2);
    const double ubar = (u[t[0]] + u[t[1]] + u[t[2]]) / 3.0;
    const Eigen::Vector2d flux = coef.flux(mesh.element_barycenter(e), ubar, g);
    const double area = mesh.element_area(e);
    for (int i = 0; i < 3; ++i) r[t[i]] += area * flux.dot(grads.col(i));
  }
  return r;
}

/// Newton Jacobian of the nonlinear form. The value-dependent term enters via
/// the barycenter average u(x_K) = (u_a + u_b + u_c)/3.
Eigen::SparseMatrix<double> nonlinear_jacobian(const TriMesh& mesh,
                                               const ProblemCoefficient& coef,
                                               const Eigen::VectorXd& u) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(9 * mesh.element_count());
  const bool with_value = coef.value_dependent();
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto grads = mesh.hat_gradients(e);
    const auto& t = mesh.element(e);
    const Eigen::Vector2d g =
        u[t[0]] * grads.col(0) + u[t[1]] * grads.col(1) + u[t[2]] * grads.col(2);
    const double ubar = (u[t[0]] + u[t[1]] + u[t[2]]) / 3.0;
    const Eigen::Vector2d x = mesh.element_barycenter(e);
    const Eigen::Matrix2d dgrad = coef.flux_dgrad(x, ubar, g);
    const double area = mesh.element_area(e);
    Eigen::Matrix3d local = area * grads.transpose() * dgrad * grads;
    if (with_value) {
      const Eigen::Vector2d du = coef.flux_du(x, ubar, g);
      for (int i = 0; i < 3; ++i) {
        const double row = area * du.dot(grads.col(i)) / 3.0;
        for (int j = 0; j < 3; ++j) local(i, j) += row;
      }
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trips.emplace_back(t[i], t[j], local(i, j));
  }
  Eigen::SparseMatrix<double> jac(mesh.node_count(), mesh.node_count());
  jac.setFromTriplets(trips.begin(), trips.end());
  jac.makeCompressed();
  return jac;
}

void check_finite(const Eigen::VectorXd& v, const char* where) {
  if (!v.allFinite())
    throw NewtonFailure(std::string("NaN/Inf detected in ") + where, -1,
                        std::numeric_limits<double>::quiet_NaN());
}

}  // namespace

SolveResult solve_fem(const TriMesh& mesh, const ProblemCoefficient& coef,
                      const ScalarField& f, const NewtonConfig& cfg) {
  const Eigen::VectorXd load = assemble_load(mesh, f);
  const std::vector<int> interior = mesh.interior_nodes();
  const int n = static_cast<int>(interior.size());

  Eigen::VectorXd u = Eigen::VectorXd::Zero(mesh.node_count());
  if (cfg.initial_guess.size() > 0) {
    if (cfg.initial_guess.size() != mesh.node_count())
      throw std::invalid_argument("solve_fem: initial guess has the wrong dimension");
    for (int i : interior) u[i] = cfg.initial_guess[i];
  }
  SolveResult out;
  out.strategy_label = "fem";

  for (int it = 0;; ++it) {
    const Eigen::VectorXd full_residual = nonlinear_residual(mesh, coef, u) - load;
    check_finite(full_residual, "residual");
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) r[i] = full_residual[interior[i]];
    const double rnorm = r.norm();
    out.residual_history.push_back(rnorm);
    if (rnorm <= cfg.residual_tolerance) {
      out.iterations = it;
      break;
    }
    if (it >= cfg.max_iterations)
      throw NewtonFailure("Newton did not converge on the FEM problem", it, rnorm);

    const Eigen::SparseMatrix<double> jac_full = nonlinear_jacobian(mesh, coef, u);
    const Eigen::SparseMatrix<double> jac = restrict_matrix(jac_full, interior, interior);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(jac);
    if (lu.info() != Eigen::Success)
      throw SingularMatrixError("Newton Jacobian is singular: " + std::string(lu.lastErrorMessage()), -1);
    const Eigen::VectorXd step = lu.solve(-r);
    check_finite(step, "Newton step");
    for (int i = 0; i < n; ++i) u[interior[i]] += step[i];
  }
  out.solution = std::move(u);
  return out;
}

SolveResult solve_fine_reference(const TriMesh& fine, const ProblemCoefficient& coef,
                                 const ScalarField& f, const NewtonConfig& cfg) {
  SolveResult out = solve_fem(fine, coef, f, cfg);
  out.strategy_label = "fine_reference";
  return out;
}

SolveResult solve_coarse_fem(const TriMesh& coarse, const ProblemCoefficient& coef,
                             const ScalarField& f, const NewtonConfig& cfg) {
  SolveResult out = solve_fem(coarse, coef, f, cfg);
  out.strategy_label = "coarse_fem";
  return out;
}

SolveResult solve_lod_galerkin(const NestedPair& pair, const ProblemCoefficient& coef,
                               const ScalarField& f, const CorrectorSet& correctors,
                               const NewtonConfig& cfg) {
  const TriMesh& fine = pair.fine();
  const Eigen::VectorXd load = assemble_load(fine, f);
  const Eigen::SparseMatrix<double>& basis = correctors.basis();
  const int n = static_cast<int>(basis.cols());

  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  if (cfg.initial_guess.size() > 0) {
    if (cfg.initial_guess.size() != n)
      throw std::invalid_argument("solve_lod_galerkin: initial guess has the wrong dimension");
    c = cfg.initial_guess;
  }
  SolveResult out;
  out.strategy_label = "lod_galerkin";

  for (int it = 0;; ++it) {
    const Eigen::VectorXd u = basis * c;
    const Eigen::VectorXd r = basis.transpose() * (nonlinear_residual(fine, coef, u) - load);
    check_finite(r, "residual");
    const double rnorm = r.norm();
    out.residual_history.push_back(rnorm);
    if (rnorm <= cfg.residual_tolerance) {
      out.iterations = it;
      out.solution = u;
      break;
    }
    if (it >= cfg.max_iterations)
      throw NewtonFailure("Newton did not converge on the LOD Galerkin problem", it, rnorm);

    const Eigen::SparseMatrix<double> jac_fine = nonlinear_jacobian(fine, coef, u);
    const Eigen::MatrixXd jac =
        Eigen::MatrixXd(basis.transpose() * (jac_fine * basis).eval());
    Eigen::VectorXd step;
    if (coef.value_dependent()) {
      step = jac.partialPivLu().solve(-r);
    } else {
      step = jac.ldlt().solve(-r);  // symmetric positive definite coarse system
    }
    check_finite(step, "Newton step");
    c += step;
  }
  return out;
}

SolveResult solve_lod_petrov_galerkin(const NestedPair& pair, const ProblemCoefficient& coef,
                                      const ScalarField& f, const CorrectorSet& correctors,
                                      const NewtonConfig& cfg) {
  const TriMesh& fine = pair.fine();
  const Eigen::VectorXd load = assemble_load(fine, f);
  const Eigen::SparseMatrix<double>& basis = correctors.basis();
  const std::vector<int>& coarse_interior = correctors.coarse_interior();
  const int n = static_cast<int>(basis.cols());
  if (cfg.initial_guess.size() > 0 && cfg.initial_guess.size() != n)
    throw std::invalid_argument(
        "solve_lod_petrov_galerkin: initial guess has the wrong dimension");

  // trial functions: embedded coarse hats of the interior nodes
  std::vector<int> all_fine(pair.fine().node_count());
  for (int i = 0; i < static_cast<int>(all_fine.size()); ++i) all_fine[i] = i;
  const Eigen::SparseMatrix<double> trial =
      restrict_matrix(pair.prolongation(), all_fine, coarse_interior);

  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  if (cfg.initial_guess.size() > 0) c = cfg.initial_guess;
  SolveResult out;
  out.strategy_label = "lod_petrov_galerkin";

  for (int it = 0;; ++it) {
    const Eigen::VectorXd u = trial * c;
    const Eigen::VectorXd r = basis.transpose() * (nonlinear_residual(fine, coef, u) - load);
    check_finite(r, "residual");
    const double rnorm = r.norm();
    out.residual_history.push_back(rnorm);
    if (rnorm <= cfg.residual_tolerance) {
      out.iterations = it;
      out.solution = u;
      break;
    }
    if (it >= cfg.max_iterations)
      throw NewtonFailure("Newton did not converge on the Petrov-Galerkin LOD problem", it,
                          rnorm);

    const Eigen::SparseMatrix<double> jac_fine = nonlinear_jacobian(fine, coef, u);
    const Eigen::MatrixXd jac =
        Eigen::MatrixXd(basis.transpose() * (jac_fine * trial).eval());
    const Eigen::VectorXd step = jac.partialPivLu().solve(-r);  // nonsymmetric coarse system
    check_finite(step, "Newton step");
    c += step;
  }
  return out;
}

LinearizationStrategy LinearizationStrategy::zero(LinearizationKind model) {
  LinearizationStrategy s;
  s.kind = Kind::zero;
  s.model = model;
  return s;
}

LinearizationStrategy LinearizationStrategy::coarse_fem(LinearizationKind model) {
  LinearizationStrategy s;
  s.kind = Kind::coarse_fem;
  s.model = model;
  return s;
}

LinearizationStrategy LinearizationStrategy::given_vector(Eigen::VectorXd u_star,
                                                          LinearizationKind model) {
  LinearizationStrategy s;
  s.kind = Kind::given_vector;
  s.given = std::move(u_star);
  s.model = model;
  return s;
}

LinearizationStrategy LinearizationStrategy::cascade(int steps, LinearizationKind model) {
  if (steps < 1) throw std::invalid_argument("cascade: steps must be >= 1");
  LinearizationStrategy s;
  s.kind = Kind::cascade;
  s.steps = steps;
  s.model = model;
  return s;
}

std::string LinearizationStrategy::label() const {
  switch (kind) {
    case Kind::zero:
      return "zero";
    case Kind::coarse_fem:
      return "coarse_fem";
    case Kind::given_vector:
      return "given_vector";
    case Kind::cascade:
      return "cascade:" + std::to_string(steps);
  }
  return "?";
}

MatrixField linearization_field(const ProblemCoefficient& coef, LinearizationKind model,
                                const TriMesh& fine, const Eigen::VectorXd* u_star) {
  if (const auto* quasi = coef.quasilinear_part())
    return linearize_quasilinear(*quasi, fine, u_star);
  const auto* grad = coef.gradient_part();
  std::vector<Eigen::Vector2d> gradients;
  if (u_star) gradients = element_gradients(fine, *u_star);
  return linearize(model, *grad, fine, gradients).field;
}

StrategyRun run_strategy(const LinearizationStrategy& strategy, const NestedPair& pair,
                         const InterpolationOperator& interp, const ProblemCoefficient& coef,
                         const ScalarField& f, LodMethod method, int layers,
                         const NewtonConfig& cfg) {
  StrategyRun run;

  auto seconds = [] {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
  };
  auto solve_with = [&](const CorrectorSet& set) {
    const double t0 = seconds();
    SolveResult result = method == LodMethod::galerkin
                             ? solve_lod_galerkin(pair, coef, f, set, cfg)
                             : solve_lod_petrov_galerkin(pair, coef, f, set, cfg);
    run.solve_seconds += seconds() - t0;
    return result;
  };
  auto build_set = [&](const MatrixField& field, int* solves) {
    const double t0 = seconds();
    CorrectorSet set = build_corrector_set(pair, field, interp, layers, solves);
    run.corrector_seconds += seconds() - t0;
    return set;
  };
  auto note = [&](const std::string& ustar_label, const CorrectorSet& set, int solves) {
    char line[160];
    std::snprintf(line, sizeof(line), "u*=%s correctors=%zu solves=%d hash=%016llx",
                  ustar_label.c_str(), set.correctors().size(), solves,
                  static_cast<unsigned long long>(set.coefficient_hash()));
    run.provenance.emplace_back(line);
  };

  switch (strategy.kind) {
    case LinearizationStrategy::Kind::zero: {
      int solves = 0;
      const MatrixField field = linearization_field(coef, strategy.model, pair.fine(), nullptr);
      run.correctors = build_set(field, &solves);
      run.corrector_solves = solves;
      note("zero", run.correctors, solves);
      run.result = solve_with(run.correctors);
      break;
    }
    case LinearizationStrategy::Kind::coarse_fem: {
      const SolveResult coarse = solve_coarse_fem(pair.coarse(), coef, f, cfg);
      run.coarse_newton_iterations += coarse.iterations;
      const Eigen::VectorXd u_star = pair.embed(coarse.solution);
      int solves = 0;
      const MatrixField field = linearization_field(coef, strategy.model, pair.fine(), &u_star);
      run.correctors = build_set(field, &solves);
      run.corrector_solves = solves;
      note("coarse_fem", run.correctors, solves);
      run.result = solve_with(run.correctors);
      break;
    }
    case LinearizationStrategy::Kind::given_vector: {
      if (!strategy.given) throw std::invalid_argument("given_vector strategy without a vector");
      int solves = 0;
      const MatrixField field =
          linearization_field(coef, strategy.model, pair.fine(), &*strategy.given);
      run.correctors = build_set(field, &solves);
      run.corrector_solves = solves;
      note("given_vector", run.correctors, solves);
      run.result = solve_with(run.correctors);
      break;
    }
    case LinearizationStrategy::Kind::cascade: {
      Eigen::VectorXd u_star;
      std::vector<ElementCorrector> previous;
      for (int round = 0; round < strategy.steps; ++round) {
        int solves = 0;
        const MatrixField field = linearization_field(coef, strategy.model, pair.fine(),
                                                      round == 0 ? nullptr : &u_star);
        const double t0 = seconds();
        std::vector<ElementCorrector> correctors = build_element_correctors(
            pair, field, interp, layers, round == 0 ? nullptr : &previous, &solves);
        run.corrector_seconds += seconds() - t0;
        previous = correctors;
        run.correctors = assemble_basis(pair, interp, std::move(correctors));
        run.corrector_solves += solves;
        note(round == 0 ? "zero" : "lod_round_" + std::to_string(round), run.correctors,
             solves);
        run.result = solve_with(run.correctors);
        run.coarse_newton_iterations += run.result.iterations;
        // next linearization point: the current LOD solution (fine representation)
        u_star = run.result.solution;
      }
      break;
    }
  }
  if (strategy.kind != LinearizationStrategy::Kind::cascade)
    run.coarse_newton_iterations += run.result.iterations;
  run.result.strategy_label = strategy.label();
  return run;
}

StabilityReport stability_check(const SolveResult& result, const ProbeReport& probe,
                                const TriMesh& fine, const ScalarField& f) {
  StabilityReport report;
  const SparseOperator h1 = assemble_identity_stiffness(fine);
  report.seminorm = h1_seminorm(h1, result.solution);
  double f_sq = 0.0;
  for (int e = 0; e < fine.element_count(); ++e) {
    const double v = f(fine.element_barycenter(e));
    f_sq += fine.element_area(e) * v * v;
  }
  const double ratio = probe.lambda_hat > 0 ? probe.Lambda_hat / probe.lambda_hat
                                            : std::numeric_limits<double>::infinity();
  report.bound = ratio * std::sqrt(f_sq);
  report.within = report.seminorm <= report.bound + 1e-12;
  return report;
}

}  // namespace monolod
