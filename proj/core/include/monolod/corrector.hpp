#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "monolod/fem.hpp"
#include "monolod/interpolation.hpp"
#include "monolod/mesh.hpp"

namespace monolod {

/// Fine-scale cell-problem solutions q^(1), q^(2) of one coarse element,
/// stored on the patch's interior dofs.
struct ElementCorrector {
  int element = -1;
  int layers = 0;
  Patch patch;
  std::array<Eigen::VectorXd, 2> vectors;  // patch interior dofs
  std::uint64_t coefficient_hash = 0;

  /// Global fine vector of q^(j); zero outside the patch interior.
  Eigen::VectorXd expand(int j, int fine_node_count) const;
};

ElementCorrector solve_element_corrector(const NestedPair& pair, const Patch& patch,
                                         const MatrixField& field,
                                         const InterpolationOperator& interp);

/// All element correctors plus the multiscale basis they induce.
class CorrectorSet {
public:
  CorrectorSet() = default;

  int layers() const { return layers_; }
  int fine_node_count() const { return fine_nodes_; }
  const std::vector<ElementCorrector>& correctors() const { return correctors_; }
  const ElementCorrector& corrector(int element) const { return correctors_[element]; }

  /// Fine nodes x interior coarse nodes; column z is hat_z - sum q-corrections.
  const Eigen::SparseMatrix<double>& basis() const { return basis_; }
  const std::vector<int>& coarse_interior() const { return coarse_interior_; }

  /// Q_m v for a full coarse nodal vector.
  Eigen::VectorXd apply_corrector(const NestedPair& pair, const Eigen::VectorXd& coarse_nodal) const;
  /// Fine representation of interior coarse coefficients: basis() * c.
  Eigen::VectorXd combine(const Eigen::VectorXd& coefficients) const { return basis_ * coefficients; }

  std::uint64_t coefficient_hash() const { return set_hash_; }

  friend CorrectorSet assemble_basis(const NestedPair& pair, const InterpolationOperator& interp,
                                     std::vector<ElementCorrector> correctors);

private:
  int layers_ = 0;
  int fine_nodes_ = 0;
  std::vector<ElementCorrector> correctors_;
  Eigen::SparseMatrix<double> basis_;
  std::vector<int> coarse_interior_;
  std::uint64_t set_hash_ = 0;
};

/// Solves every cell problem (in parallel over elements). When `previous` is
/// given, correctors whose patch-restricted coefficient digest is unchanged
/// are reused instead of re-solved; `solve_count` reports the actual solves.
std::vector<ElementCorrector> build_element_correctors(
    const NestedPair& pair, const MatrixField& field, const InterpolationOperator& interp,
    int layers, const std::vector<ElementCorrector>* previous = nullptr,
    int* solve_count = nullptr);

CorrectorSet assemble_basis(const NestedPair& pair, const InterpolationOperator& interp,
                            std::vector<ElementCorrector> correctors);

CorrectorSet build_corrector_set(const NestedPair& pair, const MatrixField& field,
                                 const InterpolationOperator& interp, int layers,
                                 int* solve_count = nullptr);

Eigen::VectorXd apply_global_corrector(const CorrectorSet& set, const NestedPair& pair,
                                       const Eigen::VectorXd& coarse_nodal);

/// Energy-seminorm truncation gaps |(Q_{m_max} - Q_m) v|_1 for m = 1..m_max-1.
std::vector<double> decay_study(const NestedPair& pair, const MatrixField& field,
                                const InterpolationOperator& interp,
                                const Eigen::VectorXd& coarse_nodal, int m_max);

/// Least-squares geometric decay rate fitted to positive gaps at m = 1,2,...
double fit_decay_rate(const std::vector<double>& gaps);

/// Binary corrector cache: self-describing header plus per-element dense
/// patch vectors. Loading re-derives patches from the pair and refuses a
/// cache whose stored digests do not match `field`.
void save_corrector_cache(const CorrectorSet& set, const std::filesystem::path& path);
CorrectorSet load_corrector_cache(const std::filesystem::path& path, const NestedPair& pair,
                                  const InterpolationOperator& interp,
                                  const MatrixField& field);

}  // namespace monolod
