#include "monolod/interpolation.hpp"

#include <Eigen/LU>

#include <array>
#include <map>

namespace monolod {

Eigen::SparseMatrix<double> build_l2_projection(const NestedPair& pair) {
  const TriMesh& coarse = pair.coarse();
  const TriMesh& fine = pair.fine();

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(12 * fine.element_count());

  for (int ce = 0; ce < coarse.element_count(); ++ce) {
    const auto& ct = coarse.element(ce);
    const Eigen::Vector2d a = coarse.node(ct[0]);
    const Eigen::Vector2d b = coarse.node(ct[1]);
    const Eigen::Vector2d c = coarse.node(ct[2]);
    const double area = coarse.element_area(ce);

    // Barycentric coordinates of a point with respect to the coarse element.
    Eigen::Matrix2d edges;
    edges.col(0) = b - a;
    edges.col(1) = c - a;
    const Eigen::Matrix2d inv = edges.inverse();
    auto barycentric = [&](const Eigen::Vector2d& p) {
      const Eigen::Vector2d lc = inv * (p - a);
      return std::array<double, 3>{1.0 - lc[0] - lc[1], lc[0], lc[1]};
    };

    // inverse of the local affine mass matrix (area/12) [[2,1,1],[1,2,1],[1,1,2]]
    Eigen::Matrix3d minv;
    minv << 3, -1, -1, -1, 3, -1, -1, -1, 3;
    minv *= 3.0 / area;

    // Moment rows b_T[i] = int_T v_h mu_i, exact via edge-midpoint quadrature
    // on each fine element (the integrand is quadratic there).
    std::map<int, Eigen::Vector3d> moments;  // fine node -> d b_T / d v[node]
    auto accumulate = [&moments](int node, const Eigen::Vector3d& v) {
      moments.try_emplace(node, Eigen::Vector3d::Zero()).first->second += v;
    };
    for (int fe : pair.fine_elements_of(ce)) {
      const auto& ft = fine.element(fe);
      const double w = fine.element_area(fe) / 3.0;
      for (int m = 0; m < 3; ++m) {
        const int g1 = ft[m];
        const int g2 = ft[(m + 1) % 3];
        const Eigen::Vector2d mid = 0.5 * (fine.node(g1) + fine.node(g2));
        const auto mu = barycentric(mid);
        const Eigen::Vector3d row(mu[0], mu[1], mu[2]);
        accumulate(g1, 0.5 * w * row);
        accumulate(g2, 0.5 * w * row);
      }
    }
    for (const auto& [node, m] : moments) {
      const Eigen::Vector3d coeff = minv * m;
      for (int i = 0; i < 3; ++i)
        if (coeff[i] != 0.0) trips.emplace_back(3 * ce + i, node, coeff[i]);
    }
  }

  Eigen::SparseMatrix<double> proj(3 * coarse.element_count(), fine.node_count());
  proj.setFromTriplets(trips.begin(), trips.end());
  proj.makeCompressed();
  return proj;
}

Eigen::SparseMatrix<double> build_averaging(const TriMesh& coarse) {
  std::vector<Eigen::Triplet<double>> trips;
  for (int z = 0; z < coarse.node_count(); ++z) {
    if (coarse.is_boundary_node(z)) continue;
    const auto& elems = coarse.elements_of_node(z);
    const double w = 1.0 / static_cast<double>(elems.size());
    for (int e : elems) {
      const auto& t = coarse.element(e);
      for (int l = 0; l < 3; ++l)
        if (t[l] == z) trips.emplace_back(z, 3 * e + l, w);
    }
  }
  Eigen::SparseMatrix<double> avg(coarse.node_count(), 3 * coarse.element_count());
  avg.setFromTriplets(trips.begin(), trips.end());
  avg.makeCompressed();
  return avg;
}

namespace {

Eigen::SparseMatrix<double> restrict_rows(const Eigen::SparseMatrix<double>& full,
                                          const std::vector<int>& rows) {
  std::vector<int> row_of(full.rows(), -1);
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) row_of[rows[i]] = i;
  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < full.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(full, k); it; ++it)
      if (row_of[it.row()] >= 0) trips.emplace_back(row_of[it.row()], it.col(), it.value());
  Eigen::SparseMatrix<double> out(rows.size(), full.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  out.makeCompressed();
  return out;
}

}  // namespace

InterpolationOperator::InterpolationOperator(const NestedPair& pair,
                                             Eigen::SparseMatrix<double> full)
    : coarse_nodes_(pair.coarse().node_count()) {
  coarse_interior_ = pair.coarse().interior_nodes();
  rows_ = restrict_rows(full, coarse_interior_);
}

Eigen::VectorXd InterpolationOperator::apply_full(const Eigen::VectorXd& fine_nodal) const {
  const Eigen::VectorXd interior = rows_ * fine_nodal;
  Eigen::VectorXd full = Eigen::VectorXd::Zero(coarse_nodes_);
  for (int i = 0; i < static_cast<int>(coarse_interior_.size()); ++i)
    full[coarse_interior_[i]] = interior[i];
  return full;
}

InterpolationOperator::ConstraintRows InterpolationOperator::kernel_constraints(
    const Patch& patch) const {
  const int local_count = static_cast<int>(patch.interior_fine_nodes.size());
  // Collect entries column by column; rows_ is column-major over fine nodes.
  std::vector<Eigen::Triplet<double>> entries;
  std::vector<char> row_used(rows_.rows(), 0);
  for (int local = 0; local < local_count; ++local) {
    const int g = patch.patch_nodes[patch.interior_fine_nodes[local]];
    for (Eigen::SparseMatrix<double>::InnerIterator it(rows_, g); it; ++it) {
      if (it.value() == 0.0) continue;
      entries.emplace_back(static_cast<int>(it.row()), local, it.value());
      row_used[it.row()] = 1;
    }
  }
  std::vector<int> kept_rows;
  std::vector<int> new_row_of(rows_.rows(), -1);
  for (int r = 0; r < static_cast<int>(row_used.size()); ++r) {
    if (row_used[r]) {
      new_row_of[r] = static_cast<int>(kept_rows.size());
      kept_rows.push_back(r);
    }
  }
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(entries.size());
  for (const auto& t : entries)
    trips.emplace_back(new_row_of[t.row()], t.col(), t.value());

  ConstraintRows out;
  out.rows.resize(kept_rows.size(), local_count);
  out.rows.setFromTriplets(trips.begin(), trips.end());
  out.rows.makeCompressed();
  out.coarse_nodes.reserve(kept_rows.size());
  for (int r : kept_rows) out.coarse_nodes.push_back(coarse_interior_[r]);
  return out;
}

InterpolationOperator compose_interpolation(const NestedPair& pair) {
  const Eigen::SparseMatrix<double> proj = build_l2_projection(pair);
  const Eigen::SparseMatrix<double> avg = build_averaging(pair.coarse());
  Eigen::SparseMatrix<double> full = avg * proj;
  full.prune(0.0);
  return InterpolationOperator(pair, std::move(full));
}

}  // namespace monolod
