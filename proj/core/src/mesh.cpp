#include "monolod/mesh.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <stdexcept>

namespace monolod {

namespace {

bool is_power_of_two(int n) { return n >= 1 && (n & (n - 1)) == 0; }

}  // namespace

TriMesh::TriMesh(int divisions_per_side) : n_(divisions_per_side) {
  if (n_ < 1) throw std::invalid_argument("TriMesh: divisions_per_side must be >= 1");
  if (!is_power_of_two(n_))
    throw std::invalid_argument("TriMesh: divisions_per_side must be a power of two");

  const double h = 1.0 / n_;
  area_ = 0.5 * h * h;

  nodes_.reserve((n_ + 1) * (n_ + 1));
  boundary_.reserve((n_ + 1) * (n_ + 1));
  for (int iy = 0; iy <= n_; ++iy) {
    for (int ix = 0; ix <= n_; ++ix) {
      nodes_.emplace_back(static_cast<double>(ix) / n_, static_cast<double>(iy) / n_);
      boundary_.push_back(ix == 0 || iy == 0 || ix == n_ || iy == n_ ? 1 : 0);
    }
  }

  elements_.reserve(2 * n_ * n_);
  for (int iy = 0; iy < n_; ++iy) {
    for (int ix = 0; ix < n_; ++ix) {
      const int v00 = node_index(ix, iy);
      const int v10 = node_index(ix + 1, iy);
      const int v01 = node_index(ix, iy + 1);
      const int v11 = node_index(ix + 1, iy + 1);
      elements_.push_back({v00, v10, v11});  // below the diagonal
      elements_.push_back({v00, v11, v01});  // above the diagonal
    }
  }

  node_elements_.resize(nodes_.size());
  for (int e = 0; e < element_count(); ++e)
    for (int v : elements_[e]) node_elements_[v].push_back(e);
}

Eigen::Vector2d TriMesh::element_barycenter(int e) const {
  const auto& t = elements_[e];
  return (nodes_[t[0]] + nodes_[t[1]] + nodes_[t[2]]) / 3.0;
}

Eigen::Matrix<double, 2, 3> TriMesh::hat_gradients(int e) const {
  const auto& t = elements_[e];
  const Eigen::Vector2d& p0 = nodes_[t[0]];
  Eigen::Matrix2d edges;
  edges.col(0) = nodes_[t[1]] - p0;
  edges.col(1) = nodes_[t[2]] - p0;
  const Eigen::Matrix2d grads12 = edges.inverse().transpose();
  Eigen::Matrix<double, 2, 3> g;
  g.col(1) = grads12.col(0);
  g.col(2) = grads12.col(1);
  g.col(0) = -g.col(1) - g.col(2);
  return g;
}

std::vector<int> TriMesh::interior_nodes() const {
  std::vector<int> out;
  out.reserve(nodes_.size());
  for (int i = 0; i < node_count(); ++i)
    if (!boundary_[i]) out.push_back(i);
  return out;
}

void TriMesh::write_listing(std::ostream& out) const {
  out << "trimesh " << n_ << "\n";
  out.precision(17);
  for (int i = 0; i < node_count(); ++i)
    out << "node " << i << " " << nodes_[i].x() << " " << nodes_[i].y() << " "
        << (boundary_[i] ? 1 : 0) << "\n";
  for (int e = 0; e < element_count(); ++e)
    out << "element " << e << " " << elements_[e][0] << " " << elements_[e][1] << " "
        << elements_[e][2] << "\n";
}

TriMesh build_mesh(int divisions_per_side) { return TriMesh(divisions_per_side); }

NestedPair::NestedPair(TriMesh coarse, TriMesh fine)
    : coarse_(std::move(coarse)), fine_(std::move(fine)) {
  if (fine_.divisions() % coarse_.divisions() != 0)
    throw std::invalid_argument("NestedPair: fine divisions must be a multiple of coarse");
  ratio_ = fine_.divisions() / coarse_.divisions();

  const int nc = coarse_.divisions();
  fine_of_coarse_.resize(coarse_.element_count());
  coarse_of_fine_.resize(fine_.element_count());
  for (int e = 0; e < fine_.element_count(); ++e) {
    const Eigen::Vector2d b = fine_.element_barycenter(e);
    int ix = std::min(static_cast<int>(b.x() * nc), nc - 1);
    int iy = std::min(static_cast<int>(b.y() * nc), nc - 1);
    // local coordinates in the coarse square decide the sub-triangle; fine
    // barycenters never land on the coarse diagonal
    const double lx = b.x() * nc - ix;
    const double ly = b.y() * nc - iy;
    const int ce = coarse_.element_index(ix, iy, ly > lx);
    coarse_of_fine_[e] = ce;
    fine_of_coarse_[ce].push_back(e);
  }

  // Exact barycentric prolongation; all coordinates are dyadic rationals.
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(3 * fine_.node_count());
  for (int i = 0; i < fine_.node_count(); ++i) {
    const Eigen::Vector2d& p = fine_.node(i);
    int ix = std::min(static_cast<int>(p.x() * nc), nc - 1);
    int iy = std::min(static_cast<int>(p.y() * nc), nc - 1);
    const double lx = p.x() * nc - ix;
    const double ly = p.y() * nc - iy;
    const int v00 = coarse_.node_index(ix, iy);
    const int v10 = coarse_.node_index(ix + 1, iy);
    const int v01 = coarse_.node_index(ix, iy + 1);
    const int v11 = coarse_.node_index(ix + 1, iy + 1);
    double w00, wa, wb;
    if (ly <= lx) {  // below-diagonal triangle (v00, v10, v11)
      w00 = 1.0 - lx;
      wa = lx - ly;  // v10
      wb = ly;       // v11
      if (w00 != 0.0) trips.emplace_back(i, v00, w00);
      if (wa != 0.0) trips.emplace_back(i, v10, wa);
      if (wb != 0.0) trips.emplace_back(i, v11, wb);
    } else {  // above-diagonal triangle (v00, v11, v01)
      w00 = 1.0 - ly;
      wa = lx;       // v11
      wb = ly - lx;  // v01
      if (w00 != 0.0) trips.emplace_back(i, v00, w00);
      if (wa != 0.0) trips.emplace_back(i, v11, wa);
      if (wb != 0.0) trips.emplace_back(i, v01, wb);
    }
  }
  prolongation_.resize(fine_.node_count(), coarse_.node_count());
  prolongation_.setFromTriplets(trips.begin(), trips.end());
  prolongation_.makeCompressed();
}

int NestedPair::fine_node_of_coarse_node(int coarse_node) const {
  const int ncp1 = coarse_.divisions() + 1;
  const int ix = coarse_node % ncp1;
  const int iy = coarse_node / ncp1;
  return fine_.node_index(ix * ratio_, iy * ratio_);
}

Eigen::VectorXd NestedPair::embed(const Eigen::VectorXd& coarse_nodal) const {
  return prolongation_ * coarse_nodal;
}

std::vector<int> patch_coarse_elements(const TriMesh& mesh, int center_element, int layers) {
  if (center_element < 0 || center_element >= mesh.element_count())
    throw std::out_of_range("patch_coarse_elements: invalid center element");
  if (layers < 0) throw std::invalid_argument("patch_coarse_elements: layers must be >= 0");

  std::set<int> current{center_element};
  for (int level = 0; level < layers; ++level) {
    std::set<int> next = current;
    for (int e : current)
      for (int v : mesh.element(e))
        for (int k : mesh.elements_of_node(v)) next.insert(k);
    if (next.size() == current.size()) break;  // saturated
    current.swap(next);
  }
  return {current.begin(), current.end()};
}

int overlap_constant(const TriMesh& mesh, int layers) {
  int best = 0;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const int count = static_cast<int>(patch_coarse_elements(mesh, e, layers).size());
    best = std::max(best, count);
  }
  return best;
}

namespace {

Patch make_patch(const NestedPair& pair, int center_element, int layers,
                 std::vector<int> coarse_elements) {
  Patch patch;
  patch.center_element = center_element;
  patch.layers = layers;
  patch.coarse_elements = std::move(coarse_elements);
  patch.saturated =
      static_cast<int>(patch.coarse_elements.size()) == pair.coarse().element_count();

  for (int ce : patch.coarse_elements) {
    const auto& fes = pair.fine_elements_of(ce);
    patch.fine_elements.insert(patch.fine_elements.end(), fes.begin(), fes.end());
  }
  std::sort(patch.fine_elements.begin(), patch.fine_elements.end());

  std::set<int> nodes;
  std::set<int> in_patch(patch.fine_elements.begin(), patch.fine_elements.end());
  for (int fe : patch.fine_elements)
    for (int v : pair.fine().element(fe)) nodes.insert(v);
  patch.patch_nodes.assign(nodes.begin(), nodes.end());

  patch.fine_node_index_map.reserve(patch.patch_nodes.size());
  for (int local = 0; local < static_cast<int>(patch.patch_nodes.size()); ++local)
    patch.fine_node_index_map.emplace(patch.patch_nodes[local], local);

  // Interior: off the domain boundary and with every adjacent fine element
  // inside the patch (so functions vanishing there extend by zero).
  for (int local = 0; local < static_cast<int>(patch.patch_nodes.size()); ++local) {
    const int g = patch.patch_nodes[local];
    if (pair.fine().is_boundary_node(g)) continue;
    bool inside = true;
    for (int fe : pair.fine().elements_of_node(g)) {
      if (!in_patch.count(fe)) {
        inside = false;
        break;
      }
    }
    if (inside) patch.interior_fine_nodes.push_back(local);
  }
  return patch;
}

}  // namespace

Patch build_patch(const NestedPair& pair, int center_element, int layers) {
  return make_patch(pair, center_element, layers,
                    patch_coarse_elements(pair.coarse(), center_element, layers));
}

Patch full_domain_patch(const NestedPair& pair) {
  std::vector<int> all(pair.coarse().element_count());
  for (int e = 0; e < pair.coarse().element_count(); ++e) all[e] = e;
  const int n = pair.coarse().divisions();
  return make_patch(pair, 0, 2 * n, std::move(all));
}

}  // namespace monolod
