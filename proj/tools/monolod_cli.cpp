// Experiment driver: reproduces the convergence studies from declarative
// configs and exposes the coefficient probe, the corrector decay study, and
// the corrector-perturbation indicator table.

#include <cstdio>
#include <random>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "monolod/experiment.hpp"
#include "monolod/indicators.hpp"

using namespace monolod;

namespace {

struct Overrides {
  std::optional<int> h_exponent;
  std::vector<int> H_exponents;
  std::vector<int> m_values;
  std::optional<std::string> method;
  std::optional<std::string> strategy;
  std::optional<std::string> model;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  std::optional<std::string> timings;
  std::optional<int> epsilon_exponent;
  std::optional<std::string> problem;
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--problem", o.problem,
                  "problem name (periodic_f1|periodic_f2|random|richards|linear_sanity)");
  cmd->add_option("--h-exponent", o.h_exponent, "fine mesh exponent (h = 2^-k)");
  cmd->add_option("--H", o.H_exponents, "coarse mesh exponents (H = 2^-k)");
  cmd->add_option("--m", o.m_values, "oversampling layers");
  cmd->add_option("--method", o.method, "galerkin|petrov_galerkin");
  cmd->add_option("--strategy", o.strategy, "zero|coarse_fem|cascade:<k>|interp_lod");
  cmd->add_option("--model", o.model, "newton|kacanov");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--epsilon", o.epsilon_exponent, "coefficient scale exponent (eps = 2^-k)");
  cmd->add_option("--output", o.output, "report path");
  cmd->add_option("--timings", o.timings, "wall|none");
}

void apply(const Overrides& o, ExperimentConfig& cfg) {
  if (o.problem) cfg.problem = *o.problem;
  if (o.h_exponent) cfg.h_exponent = *o.h_exponent;
  if (!o.H_exponents.empty()) cfg.H_exponents = o.H_exponents;
  if (!o.m_values.empty()) cfg.m_values = o.m_values;
  if (o.method) cfg.method = *o.method;
  if (o.strategy) cfg.strategy = *o.strategy;
  if (o.model) cfg.model = *o.model;
  if (o.seed) cfg.seed = *o.seed;
  if (o.epsilon_exponent) cfg.epsilon_exponent = *o.epsilon_exponent;
  if (o.output) cfg.output_path = *o.output;
  if (o.timings) cfg.timings = *o.timings;
  cfg.validate();
}

int cmd_run(const std::string& config_path, const Overrides& overrides) {
  ExperimentConfig cfg =
      config_path.empty() ? ExperimentConfig{} : load_config_file(config_path);
  apply(overrides, cfg);

  const ExperimentReport report = run_experiment(cfg);
  write_csv_atomic(report, cfg.output_path);
  std::printf("wrote %s (%zu rows)\n\n", cfg.output_path.c_str(), report.rows.size());

  std::printf("%-12s %8s %2s %-12s %12s %12s %12s %s\n", "problem", "H", "m", "strategy",
              "e_H", "e_LOD", "best_l2", "status");
  for (const auto& r : report.rows)
    std::printf("%-12s %8.5f %2d %-12s %12.4e %12.4e %12.4e %s\n", r.problem.c_str(), r.H,
                r.m, r.strategy.c_str(), r.e_H, r.e_LOD, r.best_l2, r.status.c_str());

  const auto eoc = fit_eoc(report);
  if (!eoc.empty()) {
    std::printf("\nexperimental orders between consecutive H:\n");
    for (const auto& e : eoc)
      std::printf("  m=%d %-12s H %.5f -> %.5f   eoc(e_H)=%6.3f  eoc(e_LOD)=%6.3f\n", e.m,
                  e.strategy.c_str(), e.H_coarse, e.H_fine, e.eoc_e_H, e.eoc_e_LOD);
  }
  return report.any_error ? 2 : 0;
}

int cmd_probe(const ExperimentConfig& cfg, int samples, double cap) {
  const ProblemSetup setup = make_problem(cfg);
  const NonlinearCoefficient* coef = setup.probe_target();
  if (!coef) {
    std::fprintf(stderr, "probe: problem '%s' has no gradient nonlinearity A(x, xi)\n",
                 cfg.problem.c_str());
    return 1;
  }
  const ProbeReport report = monotonicity_probe(*coef, samples, cap, cfg.seed);
  const double fd = max_jacobian_fd_error(*coef, std::min(samples, 1000), cap, cfg.seed);
  std::printf("coefficient      %s\n", coef->name().c_str());
  std::printf("samples          %d (|xi| cap %g, seed %llu)\n", samples, cap,
              static_cast<unsigned long long>(cfg.seed));
  std::printf("lambda_hat       %.6g\n", report.lambda_hat);
  std::printf("Lambda_hat       %.6g\n", report.Lambda_hat);
  std::printf("C0_hat           %.6g\n", report.C0_hat);
  std::printf("L_A_hat          %.6g\n", report.LA_hat);
  std::printf("jacobian_fd_gap  %.3g\n", fd);
  std::printf("pass             %s\n", report.pass ? "true" : "false");
  return 0;
}

int cmd_decay(const ExperimentConfig& cfg, int m_max, int vectors,
              const std::string& output) {
  const TriMesh fine = build_mesh(1 << cfg.h_exponent);
  const TriMesh coarse = build_mesh(1 << cfg.H_exponents.front());
  const NestedPair pair(coarse, fine);
  const InterpolationOperator interp = compose_interpolation(pair);
  const ProblemSetup setup = make_problem(cfg);
  const LinearizationKind model =
      cfg.model == "kacanov" ? LinearizationKind::kacanov : LinearizationKind::newton;
  const MatrixField field = linearization_field(setup.coefficient, model, fine, nullptr);
  if (m_max <= 1) m_max = 2 * coarse.divisions();

  std::mt19937_64 gen(cfg.seed);
  std::ofstream csv;
  if (!output.empty()) {
    csv.open(output, std::ios::trunc);
    csv << "vector,m,gap\n";
  }
  for (int v = 0; v < vectors; ++v) {
    Eigen::VectorXd coarse_vec = Eigen::VectorXd::Zero(coarse.node_count());
    for (int i : coarse.interior_nodes())
      coarse_vec[i] = 2.0 * canonical_unit(gen()) - 1.0;
    const std::vector<double> gaps = decay_study(pair, field, interp, coarse_vec, m_max);
    std::printf("vector %d:\n", v);
    for (std::size_t i = 0; i < gaps.size(); ++i) {
      const double ratio = i > 0 && gaps[i - 1] > 0 ? gaps[i] / gaps[i - 1] : 0.0;
      std::printf("  m=%2zu  gap=%.6e  ratio=%.3f\n", i + 1, gaps[i], ratio);
      if (csv.is_open()) csv << v << ',' << (i + 1) << ',' << gaps[i] << "\n";
    }
    std::printf("  fitted beta = %.4f\n", fit_decay_rate(gaps));
  }
  return 0;
}

int cmd_indicator(const ExperimentConfig& cfg, int m, const std::string& output) {
  const TriMesh fine = build_mesh(1 << cfg.h_exponent);
  const TriMesh coarse = build_mesh(1 << cfg.H_exponents.front());
  const NestedPair pair(coarse, fine);
  const InterpolationOperator interp = compose_interpolation(pair);
  const ProblemSetup setup = make_problem(cfg);
  const LinearizationKind model =
      cfg.model == "kacanov" ? LinearizationKind::kacanov : LinearizationKind::newton;

  // reference field at u* = 0 against the field linearized at u_h
  const MatrixField field = linearization_field(setup.coefficient, model, fine, nullptr);
  const SolveResult reference =
      solve_fine_reference(fine, setup.coefficient, setup.source, cfg.newton);
  const MatrixField field_ref =
      linearization_field(setup.coefficient, model, fine, &reference.solution);

  const CorrectorSet set = build_corrector_set(pair, field, interp, m);
  const std::vector<double> table = compute_indicator_table(field, field_ref, set, pair);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!output.empty()) {
    file.open(output, std::ios::trunc);
    out = &file;
  }
  (*out) << "element,E_Q\n";
  for (std::size_t t = 0; t < table.size(); ++t) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%zu,%.12g\n", t, table[t]);
    (*out) << buf;
  }
  if (!output.empty())
    std::printf("wrote %s (%zu elements, m=%d)\n", output.c_str(), table.size(), m);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"localized orthogonal decomposition solver for nonlinear monotone problems"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  auto* run = app.add_subcommand("run", "run a config-driven convergence experiment");
  run->add_option("config", config_path, "experiment config file (key=value sections)")
      ->check(CLI::ExistingFile);
  add_override_flags(run, overrides);

  Overrides probe_overrides;
  int probe_samples = 10000;
  double probe_cap = 10.0;
  auto* probe = app.add_subcommand("probe", "sampled monotonicity/Lipschitz assumption report");
  add_override_flags(probe, probe_overrides);
  probe->add_option("--samples", probe_samples, "sample count");
  probe->add_option("--cap", probe_cap, "gradient cap");

  Overrides decay_overrides;
  int decay_m_max = 0;
  int decay_vectors = 5;
  std::string decay_output;
  auto* decay = app.add_subcommand("decay", "corrector truncation decay study");
  add_override_flags(decay, decay_overrides);
  decay->add_option("--m-max", decay_m_max, "largest oversampling value (default: saturating)");
  decay->add_option("--vectors", decay_vectors, "number of random coarse vectors");
  decay->add_option("--decay-output", decay_output, "optional gap CSV path");

  Overrides ind_overrides;
  int ind_m = 2;
  std::string ind_output;
  auto* indicator = app.add_subcommand("indicator", "per-element corrector-perturbation table");
  add_override_flags(indicator, ind_overrides);
  indicator->add_option("--layers", ind_m, "oversampling m for the correctors");
  indicator->add_option("--indicator-output", ind_output, "CSV path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, overrides);

    ExperimentConfig cfg;
    cfg.h_exponent = 6;
    cfg.H_exponents = {3};
    if (probe->parsed()) {
      apply(probe_overrides, cfg);
      return cmd_probe(cfg, probe_samples, probe_cap);
    }
    if (decay->parsed()) {
      cfg.h_exponent = 5;
      apply(decay_overrides, cfg);
      return cmd_decay(cfg, decay_m_max, decay_vectors, decay_output);
    }
    if (indicator->parsed()) {
      cfg.h_exponent = 5;
      apply(ind_overrides, cfg);
      return cmd_indicator(cfg, ind_m, ind_output);
    }
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  }
  return 0;
}
