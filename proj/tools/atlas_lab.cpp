// atlas-lab: command line front end for simulations, Stefan profiles,
// finite-difference solves and the verification experiments.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "atlas/dynamics.hpp"
#include "atlas/errors.hpp"
#include "atlas/experiments.hpp"
#include "atlas/measure.hpp"
#include "atlas/model.hpp"
#include "atlas/stefan_analytic.hpp"
#include "atlas/stefan_fd.hpp"

namespace fs = std::filesystem;
using namespace atlas;

namespace {

constexpr const char* kOutputEnv = "ATLAS_LAB_OUT";

std::ofstream open_output(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  const auto path = fs::path(dir) / name;
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot open " + path.string());
  std::cerr << "wrote " << path.string() << '\n';
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct SimulateArgs {
  double lambda = 1.0;
  std::size_t n = 10000;
  double dt = 1e-3;
  double horizon = 1.0;
  std::uint64_t seed = 1;
  std::string engine = "localized";
  std::vector<double> sample_times;
  std::vector<std::size_t> ranks{1};
  std::string format = "csv";
  bool occupation = false;
};

int cmd_simulate(const SimulateArgs& a, const std::string& out_dir) {
  auto state = sample_ppp_half_line(a.lambda, a.n, a.seed);
  StepConfig sc;
  sc.dt = a.dt;
  sc.validate();
  TrajectoryRecorder rec;
  rec.sample_times = a.sample_times;
  if (rec.sample_times.empty()) rec.sample_times = {0.0, a.horizon};
  for (auto k : a.ranks) {
    if (k < 1) throw ParameterError("ranks are 1-based");
    rec.tracked_ranks.push_back(static_cast<Rank>(k - 1));
  }
  rec.track_leftmost_names = a.occupation;
  if (a.occupation && a.engine != "full") throw ConfigurationError("--occupation requires --engine full");

  if (a.engine == "full") {
    run(state, DriftSpec::atlas(1.0), sc, a.horizon, &rec, ParticleStreams(a.seed));
  } else if (a.engine == "localized") {
    LocalizedEngine engine(state, DriftSpec::atlas(1.0), sc, a.seed);
    engine.advance_to(a.horizon, &rec);
    state = engine.snapshot();
  } else {
    throw ConfigurationError("unknown engine '" + a.engine + "'");
  }

  {
    auto out = open_output(out_dir, "trajectory.csv");
    out << "# schema=atlas-trajectory/1\n# lambda=" << num(a.lambda) << "\n# n=" << a.n << "\n# dt=" << num(a.dt)
        << "\n# seed=" << a.seed << "\n# engine=" << a.engine << "\n# sample times snap to the nearest step\n";
    out << "requested_t,t,step,leftmost";
    for (auto k : a.ranks) out << ",rank_" << k;
    out << '\n';
    for (const auto& s : rec.recorded) {
      out << num(s.requested_time) << ',' << num(s.time) << ',' << s.step_index << ',' << num(s.leftmost);
      for (double x : s.tracked) out << ',' << num(x);
      out << '\n';
    }
  }
  if (a.format == "csv") {
    auto out = open_output(out_dir, "configuration.csv");
    write_configuration_csv(out, state);
  } else if (a.format == "json") {
    auto out = open_output(out_dir, "configuration.json");
    out << configuration_to_json(state) << '\n';
  } else {
    throw ConfigurationError("unknown format '" + a.format + "'");
  }
  if (a.occupation) {
    auto out = open_output(out_dir, "occupation.csv");
    out << "# schema=atlas-occupation/1\nname,steps,time\n";
    for (const auto& o : leftmost_occupation_histogram(rec)) {
      out << (o.name + 1) << ',' << o.steps << ',' << num(o.time) << '\n';
    }
  }
  std::cout << "t=" << num(state.sim_time) << " leftmost=" << num(state.leftmost())
            << " total_drift=" << num(state.total_accumulated_drift()) << '\n';
  return 0;
}

struct StefanArgs {
  std::vector<double> lambdas{0.25, 0.5, 1.0, 1.5, 1.9, 2.0, 2.5, 4.0, 8.0};
  double profile_t = 0.0;
  double x_lo = -2.0;
  double x_hi = 5.0;
  double dx = 0.01;
};

int cmd_stefan(const StefanArgs& a, const std::string& out_dir) {
  std::cout << "lambda,kappa,c1,c2\n";
  std::ostringstream table;
  table << "# schema=atlas-stefan-table/1\nlambda,kappa,c1,c2\n";
  for (double lambda : a.lambdas) {
    const auto s = stefan::solve_kappa(lambda);
    const std::string row = num(lambda) + ',' + num(s.kappa) + ',' + num(s.c1) + ',' + num(s.c2);
    std::cout << row << '\n';
    table << row << '\n';
  }
  open_output(out_dir, "stefan_table.csv") << table.str();
  if (a.profile_t > 0.0) {
    if (!(a.dx > 0.0) || !(a.x_hi > a.x_lo)) throw ParameterError("invalid profile grid");
    for (double lambda : a.lambdas) {
      const auto s = stefan::solve_kappa(lambda);
      DensityProfile p;
      for (double x = a.x_lo; x <= a.x_hi + 1e-12; x += a.dx) p.bin_edges.push_back(x);
      for (std::size_t j = 0; j + 1 < p.bin_edges.size(); ++j) {
        const double mid = 0.5 * (p.bin_edges[j] + p.bin_edges[j + 1]);
        p.bin_density.push_back(stefan::u_star(s, a.profile_t, mid));
      }
      auto out = open_output(out_dir, "u_star_lambda_" + num(lambda) + ".csv");
      write_density_csv(out, p, {{"schema", "atlas-density/1"}, {"lambda", num(lambda)}, {"t", num(a.profile_t)},
                                  {"source", "closed form"}});
    }
  }
  return 0;
}

struct FdArgs {
  double lambda = 1.0;
  double dxi = 0.02;
  double length = 50.0;
  double cfl = 0.4;
  double t_end = 1.0;
  std::string scheme = "explicit";
};

int cmd_fd(const FdArgs& a, const std::string& out_dir) {
  stefan_fd::FdConfig cfg;
  cfg.dxi = a.dxi;
  cfg.length = a.length;
  cfg.cfl = a.cfl;
  if (a.scheme == "explicit") {
    cfg.scheme = stefan_fd::TimeScheme::kExplicit;
  } else if (a.scheme == "cn" || a.scheme == "crank-nicolson") {
    cfg.scheme = stefan_fd::TimeScheme::kCrankNicolson;
  } else {
    throw ConfigurationError("unknown scheme '" + a.scheme + "'");
  }
  auto state = stefan_fd::fd_init(a.lambda, cfg);
  stefan_fd::fd_advance(state, a.t_end);
  const double ratio = state.y / std::sqrt(state.t);
  std::cout << "t=" << num(state.t) << " y=" << num(state.y) << " y/sqrt(t)=" << num(ratio) << " steps=" << state.steps
            << '\n';
  auto out = open_output(out_dir, "fd_profile_lambda_" + num(a.lambda) + ".csv");
  write_density_csv(out, stefan_fd::fd_profile(state),
                    {{"schema", "atlas-density/1"}, {"lambda", num(a.lambda)}, {"t", num(state.t)},
                     {"y", num(state.y)}, {"dxi", num(a.dxi)}, {"scheme", a.scheme}, {"source", "finite difference"}});
  return 0;
}

struct VerifyArgs {
  std::string tag;
  std::string config_json;
  std::string format = "markdown";
  std::optional<double> lambda;
  std::optional<std::size_t> n;
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<std::size_t> replicas;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::vector<double> times;
  std::optional<std::size_t> spacings;
  bool dt_check = false;
};

int cmd_verify(const VerifyArgs& a, const std::string& out_dir) {
  auto cfg = experiments::defaults_for(experiments::parse_experiment_tag(a.tag));
  if (!a.config_json.empty()) {
    std::ifstream in(a.config_json);
    if (!in) throw ConfigurationError("cannot read " + a.config_json);
    std::stringstream ss;
    ss << in.rdbuf();
    const auto tag = cfg.tag;
    cfg = experiments::config_from_json(ss.str(), cfg);
    cfg.tag = tag;
  }
  if (a.lambda) cfg.lambda = *a.lambda;
  if (a.n) cfg.n = *a.n;
  if (a.dt) cfg.dt = *a.dt;
  if (a.horizon) cfg.horizon = *a.horizon;
  if (a.replicas) cfg.replicas = *a.replicas;
  if (a.seed) cfg.seed = *a.seed;
  if (a.threads) cfg.threads = *a.threads;
  if (!a.times.empty()) cfg.times = a.times;
  if (a.spacings) cfg.spacings = *a.spacings;
  cfg.output_dir = out_dir;

  const auto format = experiments::parse_report_format(a.format);
  auto report = a.dt_check ? experiments::run_step_refinement(cfg) : experiments::run_experiment(cfg);
  experiments::emit_report(std::cout, report, experiments::ReportFormat::kMarkdown);
  const std::string stem = std::string(experiments::to_string(cfg.tag)) + (a.dt_check ? "_dt" : "");
  const char* ext = format == experiments::ReportFormat::kJson ? ".json"
                    : format == experiments::ReportFormat::kCsv ? ".csv"
                                                                : ".md";
  auto out = open_output(out_dir, stem + ext);
  experiments::emit_report(out, report, format);
  if (format != experiments::ReportFormat::kJson) {
    auto js = open_output(out_dir, stem + ".json");
    experiments::emit_report(js, report, experiments::ReportFormat::kJson);
  }
  return report.passed() ? 0 : 1;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& format_name, const std::string& out_dir) {
  const auto format = experiments::parse_report_format(format_name);
  bool all = true;
  std::vector<std::string> files = inputs;
  if (files.empty()) {
    if (!fs::is_directory(out_dir)) throw ConfigurationError("no report files given and " + out_dir + " is not a directory");
    for (const auto& e : fs::directory_iterator(out_dir)) {
      if (e.path().extension() == ".json") files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
  }
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw ConfigurationError("cannot read " + f);
    std::stringstream ss;
    ss << in.rdbuf();
    const auto r = experiments::report_from_json(ss.str());
    all = all && r.passed();
    experiments::emit_report(std::cout, r, format);
    std::cout << '\n';
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Atlas model laboratory: particle simulations, Stefan profiles and verification experiments"};
  app.set_config("--config", "", "TOML/INI configuration file; command line flags override it");
  app.require_subcommand(1);
  std::string out_dir = "atlas-out";
  app.add_option("-o,--out", out_dir, "Output directory")->envname(kOutputEnv)->capture_default_str();

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate the Atlas model from a Poisson start");
  simulate->add_option("--lambda", sim.lambda, "Initial intensity")->capture_default_str();
  simulate->add_option("-n,--particles", sim.n, "Number of particles")->capture_default_str();
  simulate->add_option("--dt", sim.dt, "Time step")->capture_default_str();
  simulate->add_option("-T,--horizon", sim.horizon, "Final time")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  simulate->add_option("--engine", sim.engine, "localized or full")->capture_default_str();
  simulate->add_option("--sample-times", sim.sample_times, "Recording times (default: 0 and T)");
  simulate->add_option("--ranks", sim.ranks, "1-based ranks to record")->capture_default_str();
  simulate->add_option("--format", sim.format, "Final configuration format: csv or json")->capture_default_str();
  simulate->add_flag("--occupation", sim.occupation, "Emit leftmost occupation times (full engine)");

  StefanArgs st;
  auto* stefan_cmd = app.add_subcommand("stefan", "Closed-form front coefficients and profiles");
  stefan_cmd->add_option("--lambda", st.lambdas, "Intensities")->capture_default_str();
  stefan_cmd->add_option("--profile-t", st.profile_t, "Write u(t, x) profiles at this time");
  stefan_cmd->add_option("--x-lo", st.x_lo)->capture_default_str();
  stefan_cmd->add_option("--x-hi", st.x_hi)->capture_default_str();
  stefan_cmd->add_option("--dx", st.dx)->capture_default_str();

  FdArgs fd;
  auto* fd_cmd = app.add_subcommand("fd-solve", "Finite-difference Stefan solve in front-attached coordinates");
  fd_cmd->add_option("--lambda", fd.lambda)->capture_default_str();
  fd_cmd->add_option("--dxi", fd.dxi, "Grid spacing")->capture_default_str();
  fd_cmd->add_option("--length", fd.length, "Domain length (>= 50)")->capture_default_str();
  fd_cmd->add_option("--cfl", fd.cfl, "dt / dxi^2")->capture_default_str();
  fd_cmd->add_option("--t-end", fd.t_end)->capture_default_str();
  fd_cmd->add_option("--scheme", fd.scheme, "explicit or cn")->capture_default_str();

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "Run a verification experiment");
  verify->add_option("tag", ver.tag,
                     "LeftmostScaling, DensityProfile, ParticleCount, SpacingsEquilibrium, Domination, QuantileLaw")
      ->required();
  verify->add_option("--experiment-config", ver.config_json, "JSON experiment config (schema atlas-experiment-config/1)");
  verify->add_option("--format", ver.format, "Report format: markdown, csv or json")->capture_default_str();
  verify->add_option("--lambda", ver.lambda);
  verify->add_option("-n,--particles", ver.n);
  verify->add_option("--dt", ver.dt);
  verify->add_option("--horizon", ver.horizon, "Unscaled horizon s = b^-2");
  verify->add_option("-R,--replicas", ver.replicas);
  verify->add_option("--seed", ver.seed);
  verify->add_option("--threads", ver.threads);
  verify->add_option("--times", ver.times);
  verify->add_option("--spacings", ver.spacings);
  verify->add_flag("--dt-check", ver.dt_check, "Compare the leftmost statistic at dt and dt/2");

  std::vector<std::string> report_inputs;
  std::string report_format = "markdown";
  auto* report = app.add_subcommand("report", "Re-emit JSON reports (default: all in the output directory)");
  report->add_option("files", report_inputs);
  report->add_option("--format", report_format)->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*simulate) return cmd_simulate(sim, out_dir);
    if (*stefan_cmd) return cmd_stefan(st, out_dir);
    if (*fd_cmd) return cmd_fd(fd, out_dir);
    if (*verify) return cmd_verify(ver, out_dir);
    if (*report) return cmd_report(report_inputs, report_format, out_dir);
  } catch (const atlas::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
