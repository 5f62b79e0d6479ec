#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "monolod/fem.hpp"
#include "monolod/mesh.hpp"

namespace monolod {

/// Sampled estimates of the monotonicity/Lipschitz constants.
struct ProbeReport {
  double lambda_hat = 0.0;   // min monotonicity quotient
  double Lambda_hat = 0.0;   // max Lipschitz quotient
  double C0_hat = 0.0;       // max |A(x,0)|
  double LA_hat = 0.0;       // max Jacobian-Lipschitz quotient
  bool pass = false;
};

/// Gradient nonlinearity A(x, xi) with its Jacobian in xi. Coefficients of the
/// scalar form A = alpha(x,|xi|^2) xi additionally expose alpha.
class NonlinearCoefficient {
public:
  using Flux = std::function<Eigen::Vector2d(const Eigen::Vector2d&, const Eigen::Vector2d&)>;
  using Jacobian = std::function<Eigen::Matrix2d(const Eigen::Vector2d&, const Eigen::Vector2d&)>;
  using ScalarFactor = std::function<double(const Eigen::Vector2d&, double)>;

  NonlinearCoefficient(std::string name, Flux eval, Jacobian jac, ScalarFactor alpha = nullptr);

  Eigen::Vector2d eval(const Eigen::Vector2d& x, const Eigen::Vector2d& xi) const {
    return eval_(x, xi);
  }
  Eigen::Matrix2d jacobian(const Eigen::Vector2d& x, const Eigen::Vector2d& xi) const {
    return jac_(x, xi);
  }
  bool has_scalar_form() const { return static_cast<bool>(alpha_); }
  double alpha(const Eigen::Vector2d& x, double xi_norm_sq) const;

  const std::string& name() const { return name_; }
  const std::optional<ProbeReport>& metadata() const { return metadata_; }
  void set_metadata(ProbeReport report) { metadata_ = report; }

private:
  std::string name_;
  Flux eval_;
  Jacobian jac_;
  ScalarFactor alpha_;
  std::optional<ProbeReport> metadata_;
};

NonlinearCoefficient linear_identity();
NonlinearCoefficient periodic_coefficient(double epsilon);
NonlinearCoefficient random_checkerboard(double epsilon, std::uint64_t seed);

/// Quasilinear form A(x, u, grad u) = c(x) k(u) grad u.
struct QuasilinearCoefficient {
  std::function<double(const Eigen::Vector2d&)> c;
  std::function<double(double)> k;
  std::function<double(double)> dk;
};

/// Geometry and material parameters of the channel model; the paper-style
/// defaults live in the experiment config, not here.
struct ChannelConfig {
  double epsilon = 1.0 / 16.0;
  std::uint64_t seed = 1;
  double channel_center_y = 0.5;
  double channel_half_width = 1.0 / 16.0;
  double contrast = 100.0;
  double van_genuchten_alpha = 0.005;
};

QuasilinearCoefficient richards_coefficient(const ChannelConfig& cfg);
double van_genuchten_k(double s, double alpha);

ProbeReport monotonicity_probe(const NonlinearCoefficient& coef, int samples,
                               double gradient_cap, std::uint64_t seed);
/// Max relative gap between jacobian() and central differences of eval().
double max_jacobian_fd_error(const NonlinearCoefficient& coef, int samples,
                             double gradient_cap, std::uint64_t seed);

enum class LinearizationKind { newton, kacanov };

const char* to_string(LinearizationKind kind);

/// Frozen coefficient 𝔄 and offset b_L of an affine-in-gradient model built at
/// the linearization point, both stored per fine element.
struct Linearization {
  MatrixField field;
  std::vector<Eigen::Vector2d> offset;
};

/// gradients may be empty (zero linearization point).
Linearization linearize(LinearizationKind kind, const NonlinearCoefficient& coef,
                        const TriMesh& fine, const std::vector<Eigen::Vector2d>& gradients);

/// c(x) k(u*) Id per fine element; null u* means u* = 0.
MatrixField linearize_quasilinear(const QuasilinearCoefficient& coef, const TriMesh& fine,
                                  const Eigen::VectorXd* u_star);

/// Uniform facade over the two nonlinearity families used by the solvers.
class ProblemCoefficient {
public:
  static ProblemCoefficient gradient_flux(NonlinearCoefficient coef);
  static ProblemCoefficient quasilinear(QuasilinearCoefficient coef);

  Eigen::Vector2d flux(const Eigen::Vector2d& x, double u, const Eigen::Vector2d& g) const;
  Eigen::Matrix2d flux_dgrad(const Eigen::Vector2d& x, double u, const Eigen::Vector2d& g) const;
  Eigen::Vector2d flux_du(const Eigen::Vector2d& x, double u, const Eigen::Vector2d& g) const;
  bool value_dependent() const { return quasi_.has_value(); }

  const NonlinearCoefficient* gradient_part() const {
    return gradient_ ? &*gradient_ : nullptr;
  }
  const QuasilinearCoefficient* quasilinear_part() const {
    return quasi_ ? &*quasi_ : nullptr;
  }

private:
  ProblemCoefficient() = default;
  std::optional<NonlinearCoefficient> gradient_;
  std::optional<QuasilinearCoefficient> quasi_;
};

/// Platform-stable uniform double in [0, 1).
inline double canonical_unit(std::uint64_t raw) {
  return static_cast<double>(raw >> 11) * 0x1.0p-53;
}

}  // namespace monolod
