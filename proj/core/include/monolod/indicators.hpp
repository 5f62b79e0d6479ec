#pragma once

#include <vector>

#include <Eigen/Core>

#include "monolod/corrector.hpp"
#include "monolod/fem.hpp"
#include "monolod/interpolation.hpp"
#include "monolod/mesh.hpp"

namespace monolod {

struct ErrorRecord {
  double H = 0.0;
  double h = 0.0;
  int m = 0;
  double e_H = 0.0;      // relative L2 macroscopic error
  double e_LOD = 0.0;    // relative H1-semi upscaled error
  double best_l2 = 0.0;  // relative L2 best-approximation error in V_H
};

/// How the macroscopic part of the multiscale solution is extracted for e_H:
/// Galerkin solutions are interpolated, Petrov-Galerkin ones already live in
/// the coarse space.
enum class MacroscopicPart { interpolate, direct };

ErrorRecord compute_errors(const Eigen::VectorXd& u_ref, const Eigen::VectorXd& u_ms,
                           const InterpolationOperator& interp, const NestedPair& pair,
                           const SparseOperator& mass, const SparseOperator& h1,
                           MacroscopicPart part);

/// L2-orthogonal projection of a fine function onto the embedded coarse space,
/// with its relative error.
struct BestApproximation {
  Eigen::VectorXd projection;  // fine representation
  double relative_error = 0.0;
};
BestApproximation best_l2_approximation(const Eigen::VectorXd& u_ref, const NestedPair& pair,
                                        const SparseOperator& fine_mass);

/// Patch-local coefficient values divided by the patch average of the trace.
/// Entries follow patch.fine_elements order.
MatrixField scale_coefficient(const MatrixField& field, const Patch& patch,
                              const TriMesh& fine);

/// Corrector-perturbation indicator E_{Q,T} between the corrector's field and
/// a second coefficient field on the same fine mesh.
double compute_indicator(const MatrixField& field, const MatrixField& other_field,
                         const ElementCorrector& corrector, const NestedPair& pair);

std::vector<double> compute_indicator_table(const MatrixField& field,
                                            const MatrixField& other_field,
                                            const CorrectorSet& correctors,
                                            const NestedPair& pair);

}  // namespace monolod
