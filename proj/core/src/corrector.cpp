#include "monolod/corrector.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <Eigen/SparseLU>

#include "monolod/parallel.hpp"

namespace monolod {

Eigen::VectorXd ElementCorrector::expand(int j, int fine_node_count) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(fine_node_count);
  for (int local = 0; local < static_cast<int>(patch.interior_fine_nodes.size()); ++local)
    out[patch.patch_nodes[patch.interior_fine_nodes[local]]] = vectors[j][local];
  return out;
}

ElementCorrector solve_element_corrector(const NestedPair& pair, const Patch& patch,
                                         const MatrixField& field,
                                         const InterpolationOperator& interp) {
  const TriMesh& fine = pair.fine();
  const int n_interior = static_cast<int>(patch.interior_fine_nodes.size());

  ElementCorrector out;
  out.element = patch.center_element;
  out.layers = patch.layers;
  out.patch = patch;
  out.coefficient_hash = field.hash_over(patch.fine_elements);

  if (n_interior == 0) {
    out.vectors[0] = Eigen::VectorXd(0);
    out.vectors[1] = Eigen::VectorXd(0);
    return out;
  }

  // local index of every patch node among the interior dofs, -1 for boundary
  std::vector<int> dof_of_local(patch.patch_nodes.size(), -1);
  for (int d = 0; d < n_interior; ++d) dof_of_local[patch.interior_fine_nodes[d]] = d;

  const auto constraints = interp.kernel_constraints(patch);
  const int n_constraints = static_cast<int>(constraints.rows.rows());
  const int dim = n_interior + n_constraints;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(9 * patch.fine_elements.size() + 2 * constraints.rows.nonZeros());
  for (int fe : patch.fine_elements) {
    const auto grads = fine.hat_gradients(fe);
    const Eigen::Matrix3d local =
        fine.element_area(fe) * grads.transpose() * field[fe] * grads;
    const auto& t = fine.element(fe);
    std::array<int, 3> dofs;
    for (int i = 0; i < 3; ++i) {
      const int l = patch.local_index(t[i]);
      dofs[i] = l >= 0 ? dof_of_local[l] : -1;
    }
    for (int i = 0; i < 3; ++i) {
      if (dofs[i] < 0) continue;
      for (int j = 0; j < 3; ++j)
        if (dofs[j] >= 0) trips.emplace_back(dofs[i], dofs[j], local(i, j));
    }
  }
  for (int k = 0; k < constraints.rows.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(constraints.rows, k); it; ++it) {
      trips.emplace_back(n_interior + static_cast<int>(it.row()),
                         static_cast<int>(it.col()), it.value());
      trips.emplace_back(static_cast<int>(it.col()),
                         n_interior + static_cast<int>(it.row()), it.value());
    }
  }

  Eigen::SparseMatrix<double> saddle(dim, dim);
  saddle.setFromTriplets(trips.begin(), trips.end());
  saddle.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(saddle);
  if (lu.info() != Eigen::Success)
    throw SingularMatrixError("element corrector saddle point is singular (element " +
                                  std::to_string(patch.center_element) + ", m=" +
                                  std::to_string(patch.layers) + "): " + lu.lastErrorMessage(),
                              -1);

  for (int j = 0; j < 2; ++j) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    const Eigen::Vector2d ej = Eigen::Vector2d::Unit(j);
    for (int fe : pair.fine_elements_of(patch.center_element)) {
      const auto grads = fine.hat_gradients(fe);
      const Eigen::Vector2d flux = field[fe] * ej;
      const auto& t = fine.element(fe);
      for (int i = 0; i < 3; ++i) {
        const int l = patch.local_index(t[i]);
        const int dof = l >= 0 ? dof_of_local[l] : -1;
        if (dof >= 0) rhs[dof] += fine.element_area(fe) * flux.dot(grads.col(i));
      }
    }
    const Eigen::VectorXd sol = lu.solve(rhs);
    out.vectors[j] = sol.head(n_interior);
  }
  return out;
}

std::vector<ElementCorrector> build_element_correctors(
    const NestedPair& pair, const MatrixField& field, const InterpolationOperator& interp,
    int layers, const std::vector<ElementCorrector>* previous, int* solve_count) {
  const int count = pair.coarse().element_count();
  std::vector<ElementCorrector> out(count);
  std::atomic<int> solves{0};
  parallel_for(count, [&](int element) {
    Patch patch = build_patch(pair, element, layers);
    if (previous && element < static_cast<int>(previous->size())) {
      const ElementCorrector& old = (*previous)[element];
      if (old.layers == layers &&
          old.coefficient_hash == field.hash_over(patch.fine_elements)) {
        out[element] = old;
        return;
      }
    }
    out[element] = solve_element_corrector(pair, patch, field, interp);
    solves.fetch_add(1, std::memory_order_relaxed);
  });
  if (solve_count) *solve_count = solves.load();
  return out;
}

CorrectorSet assemble_basis(const NestedPair& pair, const InterpolationOperator& interp,
                            std::vector<ElementCorrector> correctors) {
  if (static_cast<int>(correctors.size()) != pair.coarse().element_count())
    throw std::invalid_argument("assemble_basis: one corrector per coarse element required");

  CorrectorSet set;
  set.layers_ = correctors.empty() ? 0 : correctors.front().layers;
  set.fine_nodes_ = pair.fine().node_count();
  set.coarse_interior_ = interp.coarse_interior();
  set.correctors_ = std::move(correctors);

  std::uint64_t h = 1469598103934665603ull;
  for (const auto& c : set.correctors_) {
    h ^= c.coefficient_hash;
    h *= 1099511628211ull;
  }
  set.set_hash_ = h;

  std::vector<int> column_of(pair.coarse().node_count(), -1);
  for (int i = 0; i < static_cast<int>(set.coarse_interior_.size()); ++i)
    column_of[set.coarse_interior_[i]] = i;

  // hat part
  std::vector<Eigen::Triplet<double>> trips;
  const auto& prolongation = pair.prolongation();
  for (int k = 0; k < prolongation.outerSize(); ++k) {
    const int col = column_of[k];
    if (col < 0) continue;
    for (Eigen::SparseMatrix<double>::InnerIterator it(prolongation, k); it; ++it)
      trips.emplace_back(static_cast<int>(it.row()), col, it.value());
  }

  // minus the element corrections weighted by the constant hat gradients
  const TriMesh& coarse = pair.coarse();
  for (const auto& ec : set.correctors_) {
    const auto grads = coarse.hat_gradients(ec.element);
    const auto& t = coarse.element(ec.element);
    for (int l = 0; l < 3; ++l) {
      const int col = column_of[t[l]];
      if (col < 0) continue;
      for (int j = 0; j < 2; ++j) {
        const double weight = grads(j, l);
        if (weight == 0.0) continue;
        const auto& q = ec.vectors[j];
        for (int local = 0; local < static_cast<int>(ec.patch.interior_fine_nodes.size());
             ++local) {
          const int g = ec.patch.patch_nodes[ec.patch.interior_fine_nodes[local]];
          if (q[local] != 0.0) trips.emplace_back(g, col, -weight * q[local]);
        }
      }
    }
  }

  set.basis_.resize(set.fine_nodes_, static_cast<int>(set.coarse_interior_.size()));
  set.basis_.setFromTriplets(trips.begin(), trips.end());
  set.basis_.makeCompressed();
  return set;
}

CorrectorSet build_corrector_set(const NestedPair& pair, const MatrixField& field,
                                 const InterpolationOperator& interp, int layers,
                                 int* solve_count) {
  return assemble_basis(pair, interp,
                        build_element_correctors(pair, field, interp, layers, nullptr,
                                                 solve_count));
}

Eigen::VectorXd CorrectorSet::apply_corrector(const NestedPair& pair,
                                              const Eigen::VectorXd& coarse_nodal) const {
  const TriMesh& coarse = pair.coarse();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(fine_nodes_);
  for (const auto& ec : correctors_) {
    const auto grads = coarse.hat_gradients(ec.element);
    const auto& t = coarse.element(ec.element);
    const Eigen::Vector2d g = coarse_nodal[t[0]] * grads.col(0) +
                              coarse_nodal[t[1]] * grads.col(1) +
                              coarse_nodal[t[2]] * grads.col(2);
    for (int j = 0; j < 2; ++j) {
      if (g[j] == 0.0) continue;
      const auto& q = ec.vectors[j];
      for (int local = 0; local < static_cast<int>(ec.patch.interior_fine_nodes.size());
           ++local)
        out[ec.patch.patch_nodes[ec.patch.interior_fine_nodes[local]]] += g[j] * q[local];
    }
  }
  return out;
}

Eigen::VectorXd apply_global_corrector(const CorrectorSet& set, const NestedPair& pair,
                                       const Eigen::VectorXd& coarse_nodal) {
  return set.apply_corrector(pair, coarse_nodal);
}

std::vector<double> decay_study(const NestedPair& pair, const MatrixField& field,
                                const InterpolationOperator& interp,
                                const Eigen::VectorXd& coarse_nodal, int m_max) {
  const SparseOperator h1 = assemble_identity_stiffness(pair.fine());
  CorrectorSet reference = build_corrector_set(pair, field, interp, m_max);
  const Eigen::VectorXd q_ref = reference.apply_corrector(pair, coarse_nodal);

  std::vector<double> gaps;
  gaps.reserve(m_max - 1);
  for (int m = 1; m < m_max; ++m) {
    CorrectorSet set = build_corrector_set(pair, field, interp, m);
    const Eigen::VectorXd q = set.apply_corrector(pair, coarse_nodal);
    gaps.push_back(h1_seminorm(h1, q_ref - q));
  }
  return gaps;
}

double fit_decay_rate(const std::vector<double>& gaps) {
  // slope of log(gap) against m by least squares; exact-zero gaps are skipped
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int i = 0; i < static_cast<int>(gaps.size()); ++i) {
    if (gaps[i] <= 0.0) continue;
    const double x = static_cast<double>(i + 1);
    const double y = std::log(gaps[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return 0.0;
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return std::exp(slope);
}

namespace {

constexpr char kCacheMagic[8] = {'M', 'L', 'C', 'O', 'R', '0', '0', '1'};

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

}  // namespace

void save_corrector_cache(const CorrectorSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open corrector cache for writing: " + path.string());
  out.write(kCacheMagic, sizeof(kCacheMagic));
  write_pod<std::uint32_t>(out, 0);  // reserved
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(set.layers()));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(set.correctors().size()));
  write_pod<std::uint64_t>(out, set.coefficient_hash());
  for (const auto& ec : set.correctors()) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ec.element));
    write_pod<std::uint64_t>(out, ec.coefficient_hash);
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ec.vectors[0].size()));
    for (int j = 0; j < 2; ++j)
      out.write(reinterpret_cast<const char*>(ec.vectors[j].data()),
                static_cast<std::streamsize>(sizeof(double) * ec.vectors[j].size()));
  }
  if (!out) throw std::runtime_error("corrector cache write failed: " + path.string());
}

CorrectorSet load_corrector_cache(const std::filesystem::path& path, const NestedPair& pair,
                                  const InterpolationOperator& interp,
                                  const MatrixField& field) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corrector cache: " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0)
    throw std::runtime_error("corrector cache has wrong magic: " + path.string());
  read_pod<std::uint32_t>(in);
  const int layers = static_cast<int>(read_pod<std::uint32_t>(in));
  const int count = static_cast<int>(read_pod<std::uint32_t>(in));
  read_pod<std::uint64_t>(in);
  if (count != pair.coarse().element_count())
    throw std::runtime_error("corrector cache does not match the coarse mesh");

  std::vector<ElementCorrector> correctors(count);
  for (int i = 0; i < count; ++i) {
    ElementCorrector ec;
    ec.element = static_cast<int>(read_pod<std::uint32_t>(in));
    ec.layers = layers;
    ec.coefficient_hash = read_pod<std::uint64_t>(in);
    const int n = static_cast<int>(read_pod<std::uint32_t>(in));
    ec.patch = build_patch(pair, ec.element, layers);
    if (static_cast<int>(ec.patch.interior_fine_nodes.size()) != n)
      throw std::runtime_error("corrector cache does not match the fine mesh");
    if (field.hash_over(ec.patch.fine_elements) != ec.coefficient_hash)
      throw std::runtime_error("corrector cache was built for a different coefficient");
    for (int j = 0; j < 2; ++j) {
      ec.vectors[j].resize(n);
      in.read(reinterpret_cast<char*>(ec.vectors[j].data()),
              static_cast<std::streamsize>(sizeof(double) * n));
    }
    if (!in) throw std::runtime_error("corrector cache truncated: " + path.string());
    correctors[ec.element] = std::move(ec);
  }
  return assemble_basis(pair, interp, std::move(correctors));
}

}  // namespace monolod
