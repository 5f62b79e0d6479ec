#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace monolod {

/// Structured Friedrichs-Keller triangulation of the unit square: every grid
/// square is split by the diagonal from its lower-left to its upper-right
/// corner. Nodes and elements are enumerated lexicographically by grid
/// position, so two builds with the same division count are byte-identical.
class TriMesh {
public:
  /// divisions_per_side must be a power of two (>= 1).
  explicit TriMesh(int divisions_per_side);

  int divisions() const { return n_; }
  double mesh_size() const { return 1.0 / n_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int element_count() const { return static_cast<int>(elements_.size()); }

  const Eigen::Vector2d& node(int i) const { return nodes_[i]; }
  const std::array<int, 3>& element(int e) const { return elements_[e]; }
  bool is_boundary_node(int i) const { return boundary_[i] != 0; }
  const std::vector<std::uint8_t>& boundary_flags() const { return boundary_; }
  double element_area(int) const { return area_; }
  Eigen::Vector2d element_barycenter(int e) const;

  /// Constant P1 hat gradients on element e, one column per local vertex.
  Eigen::Matrix<double, 2, 3> hat_gradients(int e) const;

  int node_index(int ix, int iy) const { return iy * (n_ + 1) + ix; }
  /// Grid square (ix, iy); the below-diagonal triangle comes first.
  int element_index(int ix, int iy, bool upper) const {
    return 2 * (iy * n_ + ix) + (upper ? 1 : 0);
  }

  const std::vector<int>& elements_of_node(int i) const { return node_elements_[i]; }
  std::vector<int> interior_nodes() const;

  /// Plain-text node/element listing, one record per line.
  void write_listing(std::ostream& out) const;

private:
  int n_ = 0;
  double area_ = 0.0;
  std::vector<Eigen::Vector2d> nodes_;
  std::vector<std::array<int, 3>> elements_;
  std::vector<std::uint8_t> boundary_;
  std::vector<std::vector<int>> node_elements_;
};

TriMesh build_mesh(int divisions_per_side);

/// Coarse/fine mesh pair with exact nesting (both division counts are powers
/// of two, so every coarse element is tiled by fine elements).
class NestedPair {
public:
  NestedPair(TriMesh coarse, TriMesh fine);

  const TriMesh& coarse() const { return coarse_; }
  const TriMesh& fine() const { return fine_; }
  int ratio() const { return ratio_; }

  const std::vector<int>& fine_elements_of(int coarse_element) const {
    return fine_of_coarse_[coarse_element];
  }
  int coarse_element_of_fine(int fine_element) const {
    return coarse_of_fine_[fine_element];
  }
  int fine_node_of_coarse_node(int coarse_node) const;

  /// Exact P1 prolongation, fine nodes x coarse nodes.
  const Eigen::SparseMatrix<double>& prolongation() const { return prolongation_; }
  /// Fine representation of a coarse nodal vector.
  Eigen::VectorXd embed(const Eigen::VectorXd& coarse_nodal) const;

private:
  TriMesh coarse_;
  TriMesh fine_;
  int ratio_ = 1;
  std::vector<std::vector<int>> fine_of_coarse_;
  std::vector<int> coarse_of_fine_;
  Eigen::SparseMatrix<double> prolongation_;
};

/// m-layer element patch built by vertex-neighborhood closure.
struct Patch {
  int center_element = -1;
  int layers = 0;
  std::vector<int> coarse_elements;  // sorted
  std::vector<int> fine_elements;    // sorted union over coarse_elements
  std::vector<int> patch_nodes;      // sorted global fine nodes of the closure
  std::unordered_map<int, int> fine_node_index_map;  // global fine node -> local
  std::vector<int> interior_fine_nodes;  // local indices, off the patch boundary and off the domain boundary
  bool saturated = false;

  int local_index(int global_fine_node) const {
    auto it = fine_node_index_map.find(global_fine_node);
    return it == fine_node_index_map.end() ? -1 : it->second;
  }
};

Patch build_patch(const NestedPair& pair, int center_element, int layers);

/// Patch covering the whole domain (the saturated limit of build_patch).
Patch full_domain_patch(const NestedPair& pair);

/// Vertex-adjacency closure on a single mesh: the element set of N^m(T).
std::vector<int> patch_coarse_elements(const TriMesh& mesh, int center_element, int layers);

/// max_T card{K : K in N^m(T)}
int overlap_constant(const TriMesh& mesh, int layers);

}  // namespace monolod
