#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "monolod/coefficients.hpp"
#include "monolod/corrector.hpp"
#include "monolod/fem.hpp"
#include "monolod/interpolation.hpp"
#include "monolod/mesh.hpp"

namespace monolod {

struct NewtonConfig {
  double residual_tolerance = 1e-11;
  int max_iterations = 100;
  // empty = zero start; full nodal vector for the FEM solvers, interior
  // coarse coefficients for the LOD solvers
  Eigen::VectorXd initial_guess;
};

class NewtonFailure : public std::runtime_error {
public:
  NewtonFailure(std::string what, int iterations, double residual)
      : std::runtime_error(std::move(what)), iterations(iterations), residual(residual) {}
  int iterations;
  double residual;
};

struct SolveResult {
  Eigen::VectorXd solution;  // fine-space nodal values
  int iterations = 0;
  std::vector<double> residual_history;
  std::string strategy_label;
};

/// Standard P1 Newton solve of the nonlinear problem on one mesh.
SolveResult solve_fem(const TriMesh& mesh, const ProblemCoefficient& coef,
                      const ScalarField& f, const NewtonConfig& cfg);

SolveResult solve_fine_reference(const TriMesh& fine, const ProblemCoefficient& coef,
                                 const ScalarField& f, const NewtonConfig& cfg);
SolveResult solve_coarse_fem(const TriMesh& coarse, const ProblemCoefficient& coef,
                             const ScalarField& f, const NewtonConfig& cfg);

/// Galerkin solve in the multiscale space; the solution is returned in its
/// fine-space representation.
SolveResult solve_lod_galerkin(const NestedPair& pair, const ProblemCoefficient& coef,
                               const ScalarField& f, const CorrectorSet& correctors,
                               const NewtonConfig& cfg);

/// Petrov-Galerkin variant: trial space V_H, test space V_{H,m}. The returned
/// solution is the embedded coarse function.
SolveResult solve_lod_petrov_galerkin(const NestedPair& pair, const ProblemCoefficient& coef,
                                      const ScalarField& f, const CorrectorSet& correctors,
                                      const NewtonConfig& cfg);

enum class LodMethod { galerkin, petrov_galerkin };

struct LinearizationStrategy {
  enum class Kind { zero, coarse_fem, given_vector, cascade };
  Kind kind = Kind::zero;
  int steps = 1;                       // cascade rounds
  std::optional<Eigen::VectorXd> given;  // fine-space u* for given_vector
  LinearizationKind model = LinearizationKind::newton;

  static LinearizationStrategy zero(LinearizationKind model = LinearizationKind::newton);
  static LinearizationStrategy coarse_fem(LinearizationKind model = LinearizationKind::newton);
  static LinearizationStrategy given_vector(Eigen::VectorXd u_star,
                                            LinearizationKind model = LinearizationKind::newton);
  static LinearizationStrategy cascade(int steps,
                                       LinearizationKind model = LinearizationKind::newton);
  std::string label() const;
};

struct StrategyRun {
  SolveResult result;
  CorrectorSet correctors;
  std::vector<std::string> provenance;  // one line per linearization point used
  int corrector_solves = 0;
  int coarse_newton_iterations = 0;  // summed over cascade rounds (plus the FE presolve)
  double corrector_seconds = 0.0;
  double solve_seconds = 0.0;
};

StrategyRun run_strategy(const LinearizationStrategy& strategy, const NestedPair& pair,
                         const InterpolationOperator& interp, const ProblemCoefficient& coef,
                         const ScalarField& f, LodMethod method, int layers,
                         const NewtonConfig& cfg);

/// Linearization coefficient field for a fine-space u* under the strategy's
/// model; handles both coefficient families.
MatrixField linearization_field(const ProblemCoefficient& coef, LinearizationKind model,
                                const TriMesh& fine, const Eigen::VectorXd* u_star);

struct StabilityReport {
  double seminorm = 0.0;
  double bound = 0.0;
  bool within = false;
};

/// Checks |u|_1 <= (Lambda/lambda) ||f||_0 with the sampled constants.
StabilityReport stability_check(const SolveResult& result, const ProbeReport& probe,
                                const TriMesh& fine, const ScalarField& f);

}  // namespace monolod
