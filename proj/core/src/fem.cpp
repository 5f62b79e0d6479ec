#include "monolod/fem.hpp"

#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace monolod {

std::pair<double, double> MatrixField::eigenvalue_range() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& m : values_) {
    const double mean = 0.5 * (m(0, 0) + m(1, 1));
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const double disc = std::sqrt(std::max(mean * mean - det, 0.0));
    lo = std::min(lo, mean - disc);
    hi = std::max(hi, mean + disc);
  }
  return {lo, hi};
}

bool MatrixField::is_symmetric(double tol) const {
  for (const auto& m : values_)
    if (std::abs(m(0, 1) - m(1, 0)) > tol * std::max(1.0, m.cwiseAbs().maxCoeff()))
      return false;
  return true;
}

bool MatrixField::all_finite() const {
  for (const auto& m : values_)
    if (!m.allFinite()) return false;
  return true;
}

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

void fnv_mix(std::uint64_t& h, const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

}  // namespace

std::uint64_t MatrixField::hash_over(std::span<const int> elements) const {
  std::uint64_t h = kFnvOffset;
  for (int e : elements) {
    const double vals[4] = {values_[e](0, 0), values_[e](0, 1), values_[e](1, 0),
                            values_[e](1, 1)};
    fnv_mix(h, vals, sizeof(vals));
  }
  return h;
}

std::uint64_t MatrixField::hash_all() const {
  std::uint64_t h = kFnvOffset;
  for (const auto& m : values_) {
    const double vals[4] = {m(0, 0), m(0, 1), m(1, 0), m(1, 1)};
    fnv_mix(h, vals, sizeof(vals));
  }
  return h;
}

double spectral_norm_2x2(const Eigen::Matrix2d& m) {
  const Eigen::Matrix2d g = m.transpose() * m;
  const double mean = 0.5 * (g(0, 0) + g(1, 1));
  const double det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
  const double disc = std::sqrt(std::max(mean * mean - det, 0.0));
  return std::sqrt(std::max(mean + disc, 0.0));
}

struct SparseOperator::Factorization {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool ok = false;
  std::string error;
  int pivot = -1;
};

SparseOperator::SparseOperator()
    : factor_once_(std::make_unique<std::once_flag>()) {}

SparseOperator::SparseOperator(Eigen::SparseMatrix<double> matrix, bool symmetric)
    : matrix_(std::move(matrix)),
      symmetric_(symmetric),
      factor_once_(std::make_unique<std::once_flag>()) {
  matrix_.makeCompressed();
  if (symmetric_) {
    // cheap audit of the declared symmetry
    Eigen::SparseMatrix<double> diff = Eigen::SparseMatrix<double>(matrix_.transpose()) - matrix_;
    const double scale = matrix_.coeffs().size() > 0 ? matrix_.coeffs().cwiseAbs().maxCoeff() : 0.0;
    double worst = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it)
        worst = std::max(worst, std::abs(it.value()));
    if (worst > 1e-12 * std::max(1.0, scale))
      throw std::invalid_argument("SparseOperator: matrix declared symmetric is not");
  }
}

void SparseOperator::ensure_factored() const {
  std::call_once(*factor_once_, [this] {
    auto f = std::make_shared<Factorization>();
    f->lu.compute(matrix_);
    if (f->lu.info() == Eigen::Success) {
      f->ok = true;
    } else {
      f->error = f->lu.lastErrorMessage();
      // Eigen reports the offending column at the end of the message.
      const auto pos = f->error.find_last_not_of("0123456789");
      if (pos != std::string::npos && pos + 1 < f->error.size())
        f->pivot = std::stoi(f->error.substr(pos + 1));
    }
    factorization_ = std::move(f);
  });
}

Eigen::VectorXd SparseOperator::solve(const Eigen::VectorXd& rhs) const {
  if (dimension() == 0) return Eigen::VectorXd(0);
  ensure_factored();
  if (!factorization_->ok)
    throw SingularMatrixError("sparse factorization failed: " + factorization_->error,
                              factorization_->pivot);
  return factorization_->lu.solve(rhs);
}

double SparseOperator::smallest_ldlt_pivot() const {
  if (!symmetric_) throw std::logic_error("smallest_ldlt_pivot: operator not symmetric");
  if (dimension() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(matrix_);
  if (ldlt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  return ldlt.vectorD().minCoeff();
}

Eigen::VectorXd factor_and_solve(const SparseOperator& op, const Eigen::VectorXd& rhs) {
  return op.solve(rhs);
}

SparseOperator assemble_stiffness(const TriMesh& mesh, const MatrixField& field) {
  if (field.size() != mesh.element_count())
    throw std::invalid_argument("assemble_stiffness: field size mismatch");
  if (!field.all_finite())
    throw std::invalid_argument("assemble_stiffness: non-finite coefficient value");
  if (!field.is_symmetric())
    throw std::invalid_argument("assemble_stiffness: non-symmetric coefficient value");

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(9 * mesh.element_count());
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto grads = mesh.hat_gradients(e);
    const Eigen::Matrix3d local =
        mesh.element_area(e) * grads.transpose() * field[e] * grads;
    const auto& t = mesh.element(e);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trips.emplace_back(t[i], t[j], local(i, j));
  }
  Eigen::SparseMatrix<double> m(mesh.node_count(), mesh.node_count());
  m.setFromTriplets(trips.begin(), trips.end());
  return SparseOperator(std::move(m), true);
}

SparseOperator assemble_identity_stiffness(const TriMesh& mesh) {
  return assemble_stiffness(mesh, MatrixField(mesh.element_count()));
}

SparseOperator assemble_mass(const TriMesh& mesh) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(9 * mesh.element_count());
  for (int e = 0; e < mesh.element_count(); ++e) {
    const double a = mesh.element_area(e) / 12.0;
    const auto& t = mesh.element(e);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trips.emplace_back(t[i], t[j], a * (i == j ? 2.0 : 1.0));
  }
  Eigen::SparseMatrix<double> m(mesh.node_count(), mesh.node_count());
  m.setFromTriplets(trips.begin(), trips.end());
  return SparseOperator(std::move(m), true);
}

Eigen::VectorXd assemble_load(const TriMesh& mesh, const ScalarField& f) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.node_count());
  for (int e = 0; e < mesh.element_count(); ++e) {
    const double fv = f(mesh.element_barycenter(e));
    if (!std::isfinite(fv))
      throw std::invalid_argument("assemble_load: non-finite source value");
    const double w = mesh.element_area(e) * fv / 3.0;
    for (int v : mesh.element(e)) b[v] += w;
  }
  return b;
}

Eigen::SparseMatrix<double> restrict_matrix(const Eigen::SparseMatrix<double>& m,
                                            std::span<const int> rows,
                                            std::span<const int> cols) {
  std::vector<int> row_of(m.rows(), -1);
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) row_of[rows[i]] = i;
  std::vector<Eigen::Triplet<double>> trips;
  for (int j = 0; j < static_cast<int>(cols.size()); ++j) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, cols[j]); it; ++it) {
      const int r = row_of[it.row()];
      if (r >= 0) trips.emplace_back(r, j, it.value());
    }
  }
  Eigen::SparseMatrix<double> out(rows.size(), cols.size());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

Eigen::VectorXd ReducedSystem::expand(const Eigen::VectorXd& reduced) const {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(full_dimension);
  for (int i = 0; i < static_cast<int>(kept.size()); ++i) full[kept[i]] = reduced[i];
  return full;
}

Eigen::VectorXd ReducedSystem::restrict_vector(const Eigen::VectorXd& full) const {
  Eigen::VectorXd r(kept.size());
  for (int i = 0; i < static_cast<int>(kept.size()); ++i) r[i] = full[kept[i]];
  return r;
}

ReducedSystem eliminate_dirichlet(const SparseOperator& op, const Eigen::VectorXd& rhs,
                                  const std::vector<std::uint8_t>& boundary_flags) {
  ReducedSystem sys;
  sys.full_dimension = op.dimension();
  for (int i = 0; i < op.dimension(); ++i)
    if (!boundary_flags[i]) sys.kept.push_back(i);
  sys.op = SparseOperator(restrict_matrix(op.matrix(), sys.kept, sys.kept), op.symmetric());
  sys.rhs = Eigen::VectorXd(sys.kept.size());
  for (int i = 0; i < static_cast<int>(sys.kept.size()); ++i) sys.rhs[i] = rhs[sys.kept[i]];
  return sys;
}

std::vector<Eigen::Vector2d> element_gradients(const TriMesh& mesh,
                                               const Eigen::VectorXd& nodal) {
  std::vector<Eigen::Vector2d> grads(mesh.element_count());
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto g = mesh.hat_gradients(e);
    const auto& t = mesh.element(e);
    grads[e] = nodal[t[0]] * g.col(0) + nodal[t[1]] * g.col(1) + nodal[t[2]] * g.col(2);
  }
  return grads;
}

double l2_norm(const SparseOperator& mass, const Eigen::VectorXd& v) {
  return std::sqrt(std::max(0.0, v.dot(mass.apply(v))));
}

double h1_seminorm(const SparseOperator& identity_stiffness, const Eigen::VectorXd& v) {
  return std::sqrt(std::max(0.0, v.dot(identity_stiffness.apply(v))));
}

}  // namespace monolod
