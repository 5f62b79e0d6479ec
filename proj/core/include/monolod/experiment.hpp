#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "monolod/coefficients.hpp"
#include "monolod/solver.hpp"

namespace monolod {

inline constexpr const char* kVersion = "0.1.0";

/// Declarative experiment description; see docs/config.md for the schema.
struct ExperimentConfig {
  // [problem]
  std::string problem = "periodic_f1";  // periodic_f1|periodic_f2|random|richards|linear_sanity
  int epsilon_exponent = 4;
  std::uint64_t seed = 1;
  double contrast = 100.0;              // richards channel
  double channel_center_y = 0.5;        // richards channel
  double channel_half_width = -1.0;     // richards; negative means epsilon
  // [mesh]
  int h_exponent = 6;
  std::vector<int> H_exponents{2, 3, 4, 5};
  // [lod]
  std::vector<int> m_values{1, 2, 3};
  std::string method = "galerkin";      // galerkin|petrov_galerkin
  std::string strategy = "zero";        // zero|coarse_fem|cascade:<k>|interp_lod
  std::string model = "newton";         // newton|kacanov
  // [newton]
  NewtonConfig newton;
  // [output]
  std::string output_path = "report.csv";
  std::string timings = "wall";         // wall|none (none keeps reruns byte-identical)

  void validate() const;
};

ExperimentConfig load_config(std::istream& in);
ExperimentConfig load_config_file(const std::filesystem::path& path);
/// Applies a "section.key=value" override on top of a parsed config.
void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value);

struct ExperimentRow {
  std::string problem;
  double H = 0.0;
  int m = 0;
  std::string method;
  std::string strategy;
  double e_H = 0.0;
  double e_LOD = 0.0;
  double best_l2 = 0.0;
  int newton_iterations_fine = 0;
  int newton_iterations_coarse = 0;
  int corrector_solve_count = 0;
  double wall_time_correctors_s = 0.0;
  double wall_time_solve_s = 0.0;
  double wall_time_total_s = 0.0;
  std::string status = "ok";  // ok | error:<tag>
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<std::string> header;  // config echo emitted as '#' comment lines
  std::vector<ExperimentRow> rows;
  bool any_error = false;
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);

void write_csv(const ExperimentReport& report, std::ostream& out);
/// Writes to a temporary file first and renames into place.
void write_csv_atomic(const ExperimentReport& report, const std::filesystem::path& path);

struct EocEntry {
  int m = 0;
  std::string strategy;
  double H_coarse = 0.0;
  double H_fine = 0.0;
  double eoc_e_H = 0.0;
  double eoc_e_LOD = 0.0;
};
/// Experimental orders between consecutive H of rows sharing (m, strategy).
std::vector<EocEntry> fit_eoc(const ExperimentReport& report);

/// Problem bundle resolved from a config: coefficient + source + probe input.
struct ProblemSetup {
  ProblemCoefficient coefficient;
  ScalarField source;
  /// Gradient-type part used for probes and linearization, if any.
  const NonlinearCoefficient* probe_target() const {
    return coefficient.gradient_part();
  }
};
ProblemSetup make_problem(const ExperimentConfig& cfg);

LinearizationStrategy parse_strategy(const std::string& name, LinearizationKind model);

}  // namespace monolod
