#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "monolod/mesh.hpp"

namespace monolod {

/// Elementwise L2 projection onto per-coarse-element affine functions.
/// Row 3*T+l carries the projected trace value at local corner l of coarse
/// element T; columns are fine nodes.
Eigen::SparseMatrix<double> build_l2_projection(const NestedPair& pair);

/// Node averaging of elementwise-affine traces: free vertices get the
/// arithmetic mean over adjacent elements, boundary vertices map to zero.
/// Rows are coarse nodes, columns are the 3*T+l trace slots.
Eigen::SparseMatrix<double> build_averaging(const TriMesh& coarse);

/// Quasi-interpolation from the fine P1 space onto the coarse P1 space,
/// materialized as the sparse product of averaging and projection.
class InterpolationOperator {
public:
  InterpolationOperator(const NestedPair& pair, Eigen::SparseMatrix<double> full);

  /// Interior coarse rows x all fine node columns.
  const Eigen::SparseMatrix<double>& matrix() const { return rows_; }
  /// Coarse node behind each row of matrix().
  const std::vector<int>& coarse_interior() const { return coarse_interior_; }
  int coarse_node_count() const { return coarse_nodes_; }

  /// Interior coarse values of the interpolant of a fine nodal vector.
  Eigen::VectorXd apply(const Eigen::VectorXd& fine_nodal) const { return rows_ * fine_nodal; }
  /// Same, expanded to all coarse nodes (zeros on the boundary).
  Eigen::VectorXd apply_full(const Eigen::VectorXd& fine_nodal) const;

  struct ConstraintRows {
    Eigen::SparseMatrix<double> rows;  // kept rows x patch interior local dofs
    std::vector<int> coarse_nodes;     // coarse node behind each kept row
  };
  /// Rows touching the patch's interior fine dofs, restricted to them.
  ConstraintRows kernel_constraints(const Patch& patch) const;

private:
  Eigen::SparseMatrix<double> rows_;       // row-restricted operator
  std::vector<int> coarse_interior_;
  int coarse_nodes_ = 0;
};

InterpolationOperator compose_interpolation(const NestedPair& pair);

}  // namespace monolod
