#include "monolod/coefficients.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace monolod {

NonlinearCoefficient::NonlinearCoefficient(std::string name, Flux eval, Jacobian jac,
                                           ScalarFactor alpha)
    : name_(std::move(name)), eval_(std::move(eval)), jac_(std::move(jac)),
      alpha_(std::move(alpha)) {}

double NonlinearCoefficient::alpha(const Eigen::Vector2d& x, double xi_norm_sq) const {
  if (!alpha_) throw std::logic_error("coefficient has no scalar form: " + name_);
  return alpha_(x, xi_norm_sq);
}

NonlinearCoefficient linear_identity() {
  return NonlinearCoefficient(
      "linear_identity",
      [](const Eigen::Vector2d&, const Eigen::Vector2d& xi) { return xi; },
      [](const Eigen::Vector2d&, const Eigen::Vector2d&) {
        return Eigen::Matrix2d::Identity().eval();
      },
      [](const Eigen::Vector2d&, double) { return 1.0; });
}

NonlinearCoefficient periodic_coefficient(double epsilon) {
  auto spatial = [epsilon](const Eigen::Vector2d& x) {
    const double s = std::sin(2.0 * M_PI * x.x() / epsilon);
    return 1.0 + x.x() * x.y() + (1.1 + M_PI / 3.0 + s) / (1.1 + s);
  };
  // xi scaling g(t) = 1 + (1+t)^(-1/2) with t = |xi|^2
  auto g = [](double t) { return 1.0 + 1.0 / std::sqrt(1.0 + t); };
  auto dg = [](double t) { return -0.5 * std::pow(1.0 + t, -1.5); };

  return NonlinearCoefficient(
      "periodic",
      [spatial, g](const Eigen::Vector2d& x, const Eigen::Vector2d& xi) {
        return (spatial(x) * g(xi.squaredNorm()) * xi).eval();
      },
      [spatial, g, dg](const Eigen::Vector2d& x, const Eigen::Vector2d& xi) {
        const double t = xi.squaredNorm();
        Eigen::Matrix2d jac = g(t) * Eigen::Matrix2d::Identity();
        jac += 2.0 * dg(t) * xi * xi.transpose();
        return (spatial(x) * jac).eval();
      },
      [spatial, g](const Eigen::Vector2d& x, double t) { return spatial(x) * g(t); });
}

namespace {

/// Piecewise-constant cell values on the epsilon grid, row-major bottom-up,
/// drawn from the raw mt19937_64 stream to stay platform independent.
std::vector<double> checkerboard_values(int cells_per_side, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> values(static_cast<std::size_t>(cells_per_side) * cells_per_side);
  for (auto& v : values) v = 0.1 + 0.9 * canonical_unit(rng());
  return values;
}

int cell_index(const Eigen::Vector2d& x, int cells_per_side) {
  const int ix = std::min(static_cast<int>(x.x() * cells_per_side), cells_per_side - 1);
  const int iy = std::min(static_cast<int>(x.y() * cells_per_side), cells_per_side - 1);
  return iy * cells_per_side + ix;
}

}  // namespace

NonlinearCoefficient random_checkerboard(double epsilon, std::uint64_t seed) {
  const int cells = static_cast<int>(std::lround(1.0 / epsilon));
  if (cells < 1 || std::abs(cells * epsilon - 1.0) > 1e-12)
    throw std::invalid_argument("random_checkerboard: epsilon must divide 1 exactly");
  auto values = std::make_shared<std::vector<double>>(checkerboard_values(cells, seed));
  auto c = [values, cells](const Eigen::Vector2d& x) {
    return (*values)[cell_index(x, cells)];
  };
  return NonlinearCoefficient(
      "random_checkerboard",
      [c](const Eigen::Vector2d& x, const Eigen::Vector2d& xi) {
        const double cv = c(x);
        return Eigen::Vector2d(cv * (xi.x() + xi.x() * xi.x() * xi.x() / 3.0),
                               cv * (xi.y() + xi.y() * xi.y() * xi.y() / 3.0));
      },
      [c](const Eigen::Vector2d& x, const Eigen::Vector2d& xi) {
        const double cv = c(x);
        Eigen::Matrix2d jac = Eigen::Matrix2d::Zero();
        jac(0, 0) = cv * (1.0 + xi.x() * xi.x());
        jac(1, 1) = cv * (1.0 + xi.y() * xi.y());
        return jac;
      });
}

double van_genuchten_k(double s, double alpha) {
  const double as = alpha * std::abs(s);
  const double root = std::sqrt(1.0 + as * as);
  const double num = 1.0 - as / root;
  return num * num / (1.0 + as * as);
}

QuasilinearCoefficient richards_coefficient(const ChannelConfig& cfg) {
  const int cells = static_cast<int>(std::lround(1.0 / cfg.epsilon));
  if (cells < 1 || std::abs(cells * cfg.epsilon - 1.0) > 1e-12)
    throw std::invalid_argument("richards_coefficient: epsilon must divide 1 exactly");
  auto values = std::make_shared<std::vector<double>>(checkerboard_values(cells, cfg.seed));
  const double y0 = cfg.channel_center_y;
  const double hw = cfg.channel_half_width;
  const double contrast = cfg.contrast;

  QuasilinearCoefficient out;
  out.c = [values, cells, y0, hw, contrast](const Eigen::Vector2d& x) {
    if (std::abs(x.y() - y0) < hw) return contrast;
    return (*values)[cell_index(x, cells)];
  };
  const double a = cfg.van_genuchten_alpha;
  out.k = [a](double s) { return van_genuchten_k(s, a); };
  out.dk = [a](double s) {
    // central difference of the closed form; the model is smooth away from 0
    const double step = 1e-6 * std::max(1.0, std::abs(s));
    return (van_genuchten_k(s + step, a) - van_genuchten_k(s - step, a)) / (2.0 * step);
  };
  return out;
}

namespace {

Eigen::Vector2d sample_point(std::mt19937_64& rng) {
  const double x = canonical_unit(rng());
  const double y = canonical_unit(rng());
  return {x, y};
}

Eigen::Vector2d sample_gradient(std::mt19937_64& rng, double cap) {
  const double x = (2.0 * canonical_unit(rng()) - 1.0) * cap;
  const double y = (2.0 * canonical_unit(rng()) - 1.0) * cap;
  return {x, y};
}

}  // namespace

ProbeReport monotonicity_probe(const NonlinearCoefficient& coef, int samples,
                               double gradient_cap, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("monotonicity_probe: samples must be >= 1");
  std::mt19937_64 rng(seed);
  ProbeReport report;
  report.lambda_hat = std::numeric_limits<double>::infinity();
  report.Lambda_hat = 0.0;
  report.C0_hat = 0.0;
  report.LA_hat = 0.0;

  for (int s = 0; s < samples; ++s) {
    const Eigen::Vector2d x = sample_point(rng);
    const Eigen::Vector2d xi1 = sample_gradient(rng, gradient_cap);
    const Eigen::Vector2d xi2 = sample_gradient(rng, gradient_cap);
    const Eigen::Vector2d diff = xi1 - xi2;
    const double dn = diff.norm();
    if (dn < 1e-12) continue;

    const Eigen::Vector2d a1 = coef.eval(x, xi1);
    const Eigen::Vector2d a2 = coef.eval(x, xi2);
    report.lambda_hat = std::min(report.lambda_hat, (a1 - a2).dot(diff) / (dn * dn));
    report.Lambda_hat = std::max(report.Lambda_hat, (a1 - a2).norm() / dn);
    report.C0_hat = std::max(report.C0_hat, coef.eval(x, Eigen::Vector2d::Zero()).norm());
    report.LA_hat = std::max(
        report.LA_hat, spectral_norm_2x2(coef.jacobian(x, xi1) - coef.jacobian(x, xi2)) / dn);
  }
  report.pass = report.lambda_hat > 0.0 && std::isfinite(report.lambda_hat) &&
                std::isfinite(report.Lambda_hat) && std::isfinite(report.C0_hat) &&
                std::isfinite(report.LA_hat);
  return report;
}

double max_jacobian_fd_error(const NonlinearCoefficient& coef, int samples,
                             double gradient_cap, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double step = 1e-5;
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Eigen::Vector2d x = sample_point(rng);
    const Eigen::Vector2d xi = sample_gradient(rng, gradient_cap);
    const Eigen::Matrix2d jac = coef.jacobian(x, xi);
    Eigen::Matrix2d fd;
    for (int j = 0; j < 2; ++j) {
      Eigen::Vector2d dp = xi, dm = xi;
      dp[j] += step;
      dm[j] -= step;
      fd.col(j) = (coef.eval(x, dp) - coef.eval(x, dm)) / (2.0 * step);
    }
    const double scale = std::max(1.0, spectral_norm_2x2(jac));
    worst = std::max(worst, spectral_norm_2x2(jac - fd) / scale);
  }
  return worst;
}

const char* to_string(LinearizationKind kind) {
  return kind == LinearizationKind::newton ? "newton" : "kacanov";
}

Linearization linearize(LinearizationKind kind, const NonlinearCoefficient& coef,
                        const TriMesh& fine, const std::vector<Eigen::Vector2d>& gradients) {
  if (!gradients.empty() && static_cast<int>(gradients.size()) != fine.element_count())
    throw std::invalid_argument("linearize: gradient field size mismatch");
  if (kind == LinearizationKind::kacanov && !coef.has_scalar_form())
    throw std::invalid_argument("linearize: kacanov model needs a coefficient of the form alpha(x,|xi|^2) xi");

  Linearization out;
  out.field = MatrixField(fine.element_count());
  out.offset.assign(fine.element_count(), Eigen::Vector2d::Zero());
  for (int e = 0; e < fine.element_count(); ++e) {
    const Eigen::Vector2d x = fine.element_barycenter(e);
    const Eigen::Vector2d g = gradients.empty() ? Eigen::Vector2d::Zero() : gradients[e];
    if (kind == LinearizationKind::newton) {
      const Eigen::Matrix2d jac = coef.jacobian(x, g);
      out.field[e] = 0.5 * (jac + jac.transpose());
      out.offset[e] = coef.eval(x, g) - out.field[e] * g;
    } else {
      out.field[e] = coef.alpha(x, g.squaredNorm()) * Eigen::Matrix2d::Identity();
    }
  }
  return out;
}

MatrixField linearize_quasilinear(const QuasilinearCoefficient& coef, const TriMesh& fine,
                                  const Eigen::VectorXd* u_star) {
  MatrixField field(fine.element_count());
  for (int e = 0; e < fine.element_count(); ++e) {
    const Eigen::Vector2d x = fine.element_barycenter(e);
    double u = 0.0;
    if (u_star) {
      const auto& t = fine.element(e);
      u = ((*u_star)[t[0]] + (*u_star)[t[1]] + (*u_star)[t[2]]) / 3.0;
    }
    field[e] = coef.c(x) * coef.k(u) * Eigen::Matrix2d::Identity();
  }
  return field;
}

ProblemCoefficient ProblemCoefficient::gradient_flux(NonlinearCoefficient coef) {
  ProblemCoefficient out;
  out.gradient_ = std::move(coef);
  return out;
}

ProblemCoefficient ProblemCoefficient::quasilinear(QuasilinearCoefficient coef) {
  ProblemCoefficient out;
  out.quasi_ = std::move(coef);
  return out;
}

Eigen::Vector2d ProblemCoefficient::flux(const Eigen::Vector2d& x, double u,
                                         const Eigen::Vector2d& g) const {
  if (gradient_) return gradient_->eval(x, g);
  return quasi_->c(x) * quasi_->k(u) * g;
}

Eigen::Matrix2d ProblemCoefficient::flux_dgrad(const Eigen::Vector2d& x, double u,
                                               const Eigen::Vector2d& g) const {
  if (gradient_) return gradient_->jacobian(x, g);
  return quasi_->c(x) * quasi_->k(u) * Eigen::Matrix2d::Identity();
}

Eigen::Vector2d ProblemCoefficient::flux_du(const Eigen::Vector2d& x, double u,
                                            const Eigen::Vector2d& g) const {
  if (gradient_) return Eigen::Vector2d::Zero();
  return quasi_->c(x) * quasi_->dk(u) * g;
}

}  // namespace monolod
