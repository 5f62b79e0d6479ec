#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "monolod/mesh.hpp"

namespace monolod {

class SingularMatrixError : public std::runtime_error {
public:
  SingularMatrixError(std::string what, int pivot) : std::runtime_error(std::move(what)), pivot_(pivot) {}
  /// Column reported by the factorization, -1 if unknown.
  int pivot() const { return pivot_; }

private:
  int pivot_;
};

/// Per-fine-element symmetric 2x2 coefficient values.
class MatrixField {
public:
  MatrixField() = default;
  explicit MatrixField(int element_count,
                       const Eigen::Matrix2d& value = Eigen::Matrix2d::Identity())
      : values_(element_count, value) {}

  int size() const { return static_cast<int>(values_.size()); }
  Eigen::Matrix2d& operator[](int e) { return values_[e]; }
  const Eigen::Matrix2d& operator[](int e) const { return values_[e]; }

  /// Exact per-element eigenvalue range (values are symmetric 2x2).
  std::pair<double, double> eigenvalue_range() const;
  bool is_symmetric(double tol = 1e-12) const;
  bool all_finite() const;

  /// FNV-1a digest over the value bytes of the listed elements, in order.
  std::uint64_t hash_over(std::span<const int> elements) const;
  std::uint64_t hash_all() const;

private:
  std::vector<Eigen::Matrix2d> values_;
};

double spectral_norm_2x2(const Eigen::Matrix2d& m);

/// Sparse matrix with an associated direct factorization, factored once on
/// first solve and reused afterwards. Move-only.
class SparseOperator {
public:
  SparseOperator();
  SparseOperator(Eigen::SparseMatrix<double> matrix, bool symmetric);

  SparseOperator(SparseOperator&&) noexcept = default;
  SparseOperator& operator=(SparseOperator&&) noexcept = default;
  SparseOperator(const SparseOperator&) = delete;
  SparseOperator& operator=(const SparseOperator&) = delete;

  int dimension() const { return static_cast<int>(matrix_.rows()); }
  bool symmetric() const { return symmetric_; }
  const Eigen::SparseMatrix<double>& matrix() const { return matrix_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return matrix_ * x; }
  /// Direct solve; throws SingularMatrixError when the factorization breaks down.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  /// Smallest diagonal pivot of an LDL^T factorization (symmetric operators).
  double smallest_ldlt_pivot() const;

private:
  struct Factorization;
  void ensure_factored() const;

  Eigen::SparseMatrix<double> matrix_;
  bool symmetric_ = false;
  mutable std::unique_ptr<std::once_flag> factor_once_;
  mutable std::shared_ptr<Factorization> factorization_;
};

Eigen::VectorXd factor_and_solve(const SparseOperator& op, const Eigen::VectorXd& rhs);

using ScalarField = std::function<double(const Eigen::Vector2d&)>;

/// A_ij = sum_K |K| (field_K grad phi_j) . grad phi_i over all mesh nodes.
SparseOperator assemble_stiffness(const TriMesh& mesh, const MatrixField& field);
SparseOperator assemble_identity_stiffness(const TriMesh& mesh);
SparseOperator assemble_mass(const TriMesh& mesh);
/// One-point (barycenter) quadrature load vector.
Eigen::VectorXd assemble_load(const TriMesh& mesh, const ScalarField& f);

/// Homogeneous Dirichlet system obtained by dropping flagged rows/columns.
struct ReducedSystem {
  SparseOperator op;
  Eigen::VectorXd rhs;
  std::vector<int> kept;  // global index of each reduced dof
  int full_dimension = 0;

  Eigen::VectorXd expand(const Eigen::VectorXd& reduced) const;
  Eigen::VectorXd restrict_vector(const Eigen::VectorXd& full) const;
};

ReducedSystem eliminate_dirichlet(const SparseOperator& op, const Eigen::VectorXd& rhs,
                                  const std::vector<std::uint8_t>& boundary_flags);

/// Row/column restriction of a sparse matrix to the given index subsets.
Eigen::SparseMatrix<double> restrict_matrix(const Eigen::SparseMatrix<double>& m,
                                            std::span<const int> rows,
                                            std::span<const int> cols);

/// Constant P1 gradient of a nodal vector on every element.
std::vector<Eigen::Vector2d> element_gradients(const TriMesh& mesh,
                                               const Eigen::VectorXd& nodal);

double l2_norm(const SparseOperator& mass, const Eigen::VectorXd& v);
double h1_seminorm(const SparseOperator& identity_stiffness, const Eigen::VectorXd& v);

}  // namespace monolod
