#include "monolod/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "monolod/indicators.hpp"

namespace monolod {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<int> parse_int_list(const std::string& value) {
  std::vector<int> out;
  std::string item;
  std::istringstream in(value);
  while (in >> item) {
    if (!item.empty() && item.back() == ',') item.pop_back();
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  static const std::vector<std::string> problems = {"periodic_f1", "periodic_f2", "random",
                                                    "richards", "linear_sanity"};
  if (std::find(problems.begin(), problems.end(), problem) == problems.end())
    throw std::invalid_argument("config: unknown problem '" + problem + "'");
  if (method != "galerkin" && method != "petrov_galerkin")
    throw std::invalid_argument("config: unknown method '" + method + "'");
  if (model != "newton" && model != "kacanov")
    throw std::invalid_argument("config: unknown model '" + model + "'");
  if (timings != "wall" && timings != "none")
    throw std::invalid_argument("config: timings must be 'wall' or 'none'");
  if (h_exponent < 1) throw std::invalid_argument("config: h_exponent must be >= 1");
  if (H_exponents.empty()) throw std::invalid_argument("config: H_exponents is empty");
  for (int e : H_exponents)
    if (e < 1 || e >= h_exponent)
      throw std::invalid_argument("config: H exponents must satisfy 1 <= e < h_exponent");
  if (m_values.empty()) throw std::invalid_argument("config: m_values is empty");
  for (int m : m_values)
    if (m < 0) throw std::invalid_argument("config: m must be >= 0");
  if (epsilon_exponent < 1)
    throw std::invalid_argument("config: epsilon_exponent must be >= 1");
  if (newton.residual_tolerance <= 0 || newton.max_iterations < 1)
    throw std::invalid_argument("config: invalid newton section");
}

ExperimentConfig load_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) + ": bad section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    apply_override(cfg, section.empty() ? key : section + "." + key, value);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  return load_config(in);
}

void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "problem.name") cfg.problem = value;
  else if (key == "problem.epsilon_exponent") cfg.epsilon_exponent = std::stoi(value);
  else if (key == "problem.seed") cfg.seed = std::stoull(value);
  else if (key == "problem.contrast") cfg.contrast = std::stod(value);
  else if (key == "problem.channel_center_y") cfg.channel_center_y = std::stod(value);
  else if (key == "problem.channel_half_width") cfg.channel_half_width = std::stod(value);
  else if (key == "mesh.h_exponent") cfg.h_exponent = std::stoi(value);
  else if (key == "mesh.H_exponents") cfg.H_exponents = parse_int_list(value);
  else if (key == "lod.m_values") cfg.m_values = parse_int_list(value);
  else if (key == "lod.method") cfg.method = value;
  else if (key == "lod.strategy") cfg.strategy = value;
  else if (key == "lod.model") cfg.model = value;
  else if (key == "newton.residual_tolerance") cfg.newton.residual_tolerance = std::stod(value);
  else if (key == "newton.max_iterations") cfg.newton.max_iterations = std::stoi(value);
  else if (key == "output.path") cfg.output_path = value;
  else if (key == "output.timings") cfg.timings = value;
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

ProblemSetup make_problem(const ExperimentConfig& cfg) {
  const double epsilon = std::ldexp(1.0, -cfg.epsilon_exponent);
  ProblemSetup setup{ProblemCoefficient::gradient_flux(linear_identity()),
                     [](const Eigen::Vector2d&) { return 1.0; }};

  const Eigen::Vector2d x0(0.45, 0.5);
  auto gaussian = [x0](double scale) {
    return [x0, scale](const Eigen::Vector2d& x) {
      return scale * std::exp(-0.1 * (x - x0).squaredNorm());
    };
  };

  if (cfg.problem == "periodic_f1") {
    setup.coefficient = ProblemCoefficient::gradient_flux(periodic_coefficient(epsilon));
    setup.source = gaussian(10.0);
  } else if (cfg.problem == "periodic_f2") {
    setup.coefficient = ProblemCoefficient::gradient_flux(periodic_coefficient(epsilon));
    setup.source = gaussian(100.0);
  } else if (cfg.problem == "random") {
    setup.coefficient =
        ProblemCoefficient::gradient_flux(random_checkerboard(epsilon, cfg.seed));
    setup.source = [](const Eigen::Vector2d& x) { return x.y() <= 0.1 ? 5.0 : 50.0; };
  } else if (cfg.problem == "richards") {
    ChannelConfig channel;
    channel.epsilon = epsilon;
    channel.seed = cfg.seed;
    channel.contrast = cfg.contrast;
    channel.channel_center_y = cfg.channel_center_y;
    channel.channel_half_width =
        cfg.channel_half_width > 0 ? cfg.channel_half_width : epsilon;
    setup.coefficient = ProblemCoefficient::quasilinear(richards_coefficient(channel));
    setup.source = [](const Eigen::Vector2d& x) { return x.y() <= 0.1 ? 0.1 : 1.0; };
  } else if (cfg.problem == "linear_sanity") {
    setup.coefficient = ProblemCoefficient::gradient_flux(linear_identity());
    setup.source = [](const Eigen::Vector2d&) { return 1.0; };
  } else {
    throw std::invalid_argument("make_problem: unknown problem '" + cfg.problem + "'");
  }
  return setup;
}

LinearizationStrategy parse_strategy(const std::string& name, LinearizationKind model) {
  if (name == "zero") return LinearizationStrategy::zero(model);
  if (name == "coarse_fem") return LinearizationStrategy::coarse_fem(model);
  if (name.rfind("cascade:", 0) == 0)
    return LinearizationStrategy::cascade(std::stoi(name.substr(8)), model);
  throw std::invalid_argument("unknown strategy '" + name + "'");
}

namespace {

std::vector<std::string> config_echo(const ExperimentConfig& cfg) {
  std::vector<std::string> lines;
  auto add = [&](const std::string& k, const std::string& v) {
    lines.push_back(k + "=" + v);
  };
  add("version", kVersion);
  add("problem.name", cfg.problem);
  add("problem.epsilon_exponent", std::to_string(cfg.epsilon_exponent));
  add("problem.seed", std::to_string(cfg.seed));
  if (cfg.problem == "richards") {
    add("problem.contrast", format_double(cfg.contrast));
    add("problem.channel_center_y", format_double(cfg.channel_center_y));
    add("problem.channel_half_width",
        format_double(cfg.channel_half_width > 0
                          ? cfg.channel_half_width
                          : std::ldexp(1.0, -cfg.epsilon_exponent)));
  }
  add("mesh.h_exponent", std::to_string(cfg.h_exponent));
  {
    std::string v;
    for (int e : cfg.H_exponents) v += (v.empty() ? "" : " ") + std::to_string(e);
    add("mesh.H_exponents", v);
  }
  {
    std::string v;
    for (int m : cfg.m_values) v += (v.empty() ? "" : " ") + std::to_string(m);
    add("lod.m_values", v);
  }
  add("lod.method", cfg.method);
  add("lod.strategy", cfg.strategy);
  add("lod.model", cfg.model);
  add("newton.residual_tolerance", format_double(cfg.newton.residual_tolerance));
  add("newton.max_iterations", std::to_string(cfg.newton.max_iterations));
  add("output.timings", cfg.timings);
  return lines;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentReport report;
  report.config = cfg;
  report.header = config_echo(cfg);

  const ProblemSetup problem = make_problem(cfg);
  const LinearizationKind model =
      cfg.model == "newton" ? LinearizationKind::newton : LinearizationKind::kacanov;
  const LodMethod method =
      cfg.method == "galerkin" ? LodMethod::galerkin : LodMethod::petrov_galerkin;
  const MacroscopicPart macroscopic = method == LodMethod::galerkin
                                          ? MacroscopicPart::interpolate
                                          : MacroscopicPart::direct;

  const TriMesh fine = build_mesh(1 << cfg.h_exponent);
  const SparseOperator mass = assemble_mass(fine);
  const SparseOperator h1 = assemble_identity_stiffness(fine);
  const SolveResult reference =
      solve_fine_reference(fine, problem.coefficient, problem.source, cfg.newton);

  for (int H_exp : cfg.H_exponents) {
    const TriMesh coarse = build_mesh(1 << H_exp);
    const NestedPair pair(coarse, fine);
    const InterpolationOperator interp = compose_interpolation(pair);
    const BestApproximation best = best_l2_approximation(reference.solution, pair, mass);

    for (int m : cfg.m_values) {
      ExperimentRow row;
      row.problem = cfg.problem;
      row.H = coarse.mesh_size();
      row.m = m;
      row.method = cfg.method;
      row.strategy = cfg.strategy;
      row.newton_iterations_fine = reference.iterations;
      row.best_l2 = best.relative_error;

      const double t0 = now_seconds();
      try {
        StrategyRun run;
        if (cfg.strategy == "interp_lod") {
          // u* = I_H u_{H,m} of the zero-linearized solution, embedded on the fine mesh
          StrategyRun presolve =
              run_strategy(LinearizationStrategy::zero(model), pair, interp,
                           problem.coefficient, problem.source, method, m, cfg.newton);
          const Eigen::VectorXd u_star =
              pair.embed(interp.apply_full(presolve.result.solution));
          run = run_strategy(LinearizationStrategy::given_vector(u_star, model), pair, interp,
                             problem.coefficient, problem.source, method, m, cfg.newton);
          run.corrector_solves += presolve.corrector_solves;
          run.coarse_newton_iterations += presolve.coarse_newton_iterations;
          run.corrector_seconds += presolve.corrector_seconds;
          run.solve_seconds += presolve.solve_seconds;
          run.result.strategy_label = "interp_lod";
        } else {
          run = run_strategy(parse_strategy(cfg.strategy, model), pair, interp,
                             problem.coefficient, problem.source, method, m, cfg.newton);
        }
        const double t1 = now_seconds();
        const ErrorRecord errors = compute_errors(reference.solution, run.result.solution,
                                                  interp, pair, mass, h1, macroscopic);
        row.e_H = errors.e_H;
        row.e_LOD = errors.e_LOD;
        row.newton_iterations_coarse = run.coarse_newton_iterations;
        row.corrector_solve_count = run.corrector_solves;
        row.wall_time_correctors_s = run.corrector_seconds;
        row.wall_time_solve_s = run.solve_seconds;
        row.wall_time_total_s = t1 - t0;
      } catch (const std::exception& err) {
        std::string tag = err.what();
        std::replace(tag.begin(), tag.end(), ',', ';');
        std::replace(tag.begin(), tag.end(), '\n', ' ');
        row.status = "error:" + tag;
        row.e_H = row.e_LOD = std::numeric_limits<double>::quiet_NaN();
        report.any_error = true;
      }
      if (cfg.timings == "none") {
        row.wall_time_correctors_s = 0.0;
        row.wall_time_solve_s = 0.0;
        row.wall_time_total_s = 0.0;
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

void write_csv(const ExperimentReport& report, std::ostream& out) {
  for (const auto& line : report.header) out << "# " << line << "\n";
  out << "problem,H,m,method,strategy,e_H,e_LOD,best_l2,newton_iterations_fine,"
         "newton_iterations_coarse,corrector_solve_count,wall_time_correctors_s,"
         "wall_time_solve_s,wall_time_total_s,status\n";
  for (const auto& r : report.rows) {
    out << r.problem << ',' << format_double(r.H) << ',' << r.m << ',' << r.method << ','
        << r.strategy << ',' << format_double(r.e_H) << ',' << format_double(r.e_LOD) << ','
        << format_double(r.best_l2) << ',' << r.newton_iterations_fine << ','
        << r.newton_iterations_coarse << ',' << r.corrector_solve_count << ','
        << format_double(r.wall_time_correctors_s) << ','
        << format_double(r.wall_time_solve_s) << ',' << format_double(r.wall_time_total_s)
        << ',' << r.status << "\n";
  }
}

void write_csv_atomic(const ExperimentReport& report, const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open report for writing: " + tmp.string());
    write_csv(report, out);
    if (!out) throw std::runtime_error("report write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<EocEntry> fit_eoc(const ExperimentReport& report) {
  // group rows by (m, strategy), keep config order of H
  std::vector<EocEntry> out;
  std::map<std::pair<int, std::string>, std::vector<const ExperimentRow*>> groups;
  for (const auto& r : report.rows)
    if (r.status == "ok") groups[{r.m, r.strategy}].push_back(&r);
  for (auto& [key, rows] : groups) {
    std::sort(rows.begin(), rows.end(),
              [](const ExperimentRow* a, const ExperimentRow* b) { return a->H > b->H; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const double ratio = std::log(rows[i - 1]->H / rows[i]->H);
      if (ratio <= 0) continue;
      EocEntry entry;
      entry.m = key.first;
      entry.strategy = key.second;
      entry.H_coarse = rows[i - 1]->H;
      entry.H_fine = rows[i]->H;
      entry.eoc_e_H = std::log(rows[i - 1]->e_H / rows[i]->e_H) / ratio;
      entry.eoc_e_LOD = std::log(rows[i - 1]->e_LOD / rows[i]->e_LOD) / ratio;
      out.push_back(entry);
    }
  }
  return out;
}

}  // namespace monolod
