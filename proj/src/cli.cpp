#include "flockmeter/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "flockmeter/config.hpp"
#include "flockmeter/error.hpp"
#include "flockmeter/experiments.hpp"
#include "flockmeter/measures.hpp"
#include "flockmeter/report_io.hpp"
#include "flockmeter/rng.hpp"
#include "flockmeter/svg_plot.hpp"
#include "flockmeter/theory.hpp"

namespace flockmeter::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::size_t threads = 0;
  bool continue_on_failure = false;
  bool lenient = false;
};

void add_common(CLI::App* sub, CommonOptions& o) {
  sub->add_option("--config", o.config_path, "JSON experiment config (defaults when omitted)");
  sub->add_option("--out", o.out_dir, "output directory")->capture_default_str();
  sub->add_option("--threads", o.threads, "replicate worker threads (0 = auto, capped by FLOCKMETER_THREADS)");
  sub->add_flag("--continue-on-failure", o.continue_on_failure, "exclude failed replicates instead of aborting");
  sub->add_flag("--lenient", o.lenient, "ignore unknown config keys");
}

ExperimentConfig resolve_config(const CommonOptions& o) {
  if (o.config_path.empty()) {
    ExperimentConfig c;
    c.validate();
    return c;
  }
  return config::load(o.config_path, !o.lenient);
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

// RunManifest: what ran, with which config, and every file written.
void write_manifest(const fs::path& dir, const std::string& subcommand, const ExperimentConfig& c,
                    std::vector<std::string> files, const ExperimentReport* report) {
  json m;
  m["subcommand"] = subcommand;
  m["config"] = json::parse(config::to_json_text(c));
  m["output_dir"] = dir.string();
  m["timestamp"] = timestamp();
  files.push_back("manifest.json");
  m["files"] = files;
  if (report) {
    json scalars = json::object();
    for (const auto& [k, v] : report->scalars) scalars[k] = std::isfinite(v) ? json(v) : json(report_io::format_double(v));
    m["scalars"] = scalars;
    m["replicate_seeds"] = report->replicate_seeds;
    m["generator"] = report->generator;
    m["code_version"] = report->code_version;
    m["wall_seconds"] = report->wall_seconds;
    m["notes"] = report->notes;
    json failures = json::array();
    for (const auto& f : report->failures) failures.push_back({{"replicate", f.replicate}, {"message", f.message}});
    m["failures"] = failures;
  }
  report_io::write_text(dir / "manifest.json", m.dump(2) + "\n");
}

void print_table(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& rows) {
  std::size_t w = 0;
  for (const auto& [k, v] : rows) w = std::max(w, k.size());
  for (const auto& [k, v] : rows) out << std::left << std::setw(static_cast<int>(w + 2)) << k << v << '\n';
}

void print_warnings(std::ostream& err, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

std::string write_plot(const fs::path& csv, const std::string& kind, const fs::path& out_path, std::ostream& err) {
  const auto rendered = svg::plot_csv(csv, kind);
  print_warnings(err, rendered.warnings);
  report_io::write_text(out_path, rendered.svg);
  return out_path.filename().string();
}

int run_experiment(const std::string& kind, const CommonOptions& o, double perturbation, std::ostream& out,
                   std::ostream& err) {
  const ExperimentConfig c = resolve_config(o);
  const fs::path dir = o.out_dir;
  fs::create_directories(dir);
  MonteCarloOptions mc{o.threads, o.continue_on_failure};

  ExperimentReport report;
  if (kind == "coupling") {
    report = experiments::run_coupling(c, mc);
  } else if (kind == "w2rate") {
    report = experiments::run_w2_rate(c, mc);
  } else if (kind == "stability") {
    report = experiments::run_stability(c, perturbation, mc);
  } else {
    report = experiments::run_telescope(c, mc);
  }
  for (const auto& note : report.notes) err << note << '\n';

  std::vector<std::string> files;
  const fs::path csv = dir / (kind + ".csv");
  report_io::emit_csv(report, csv);
  files.push_back(csv.filename().string());
  if (kind == "coupling") {
    files.push_back(write_plot(csv, "errx", dir / "errX.svg", err));
    files.push_back(write_plot(csv, "errv", dir / "errV.svg", err));
  } else {
    files.push_back(write_plot(csv, kind, dir / (kind + ".svg"), err));
  }
  write_manifest(dir, kind, c, files, &report);

  std::vector<std::pair<std::string, std::string>> rows;
  for (const auto& [k, v] : report.scalars) rows.emplace_back(k, report_io::format_double(v));
  rows.emplace_back("wall_seconds", report_io::format_double(report.wall_seconds));
  print_table(out, rows);
  for (const auto& f : files) out << "wrote " << (dir / f).string() << '\n';
  out << "wrote " << (dir / "manifest.json").string() << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"flockmeter: Cucker-Smale flocking simulations, mean-field constants and propagation-of-chaos experiments"};
  app.name("flockmeter");
  app.require_subcommand(1);

  // simulate
  CommonOptions sim_opts;
  std::size_t sim_J = 0;
  auto* sim = app.add_subcommand("simulate", "integrate one particle system and write simulate.csv");
  add_common(sim, sim_opts);
  sim->add_option("--J", sim_J, "number of particles (default: first entry of J_list)");

  // constants
  double K = 5.0;
  double gamma = 0.5;
  double dx0 = 0.0;
  double dv0 = 0.0;
  std::optional<double> dtv0;
  std::optional<double> dbarv0;
  std::string variant = "paper-explicit";
  auto* cons = app.add_subcommand("constants", "print x_inf, alpha, C_MF, C_Stab and the flocking verdict");
  cons->add_option("--K", K, "communication strength")->capture_default_str();
  cons->add_option("--gamma", gamma, "rate exponent, psi(r) = (1 + r^2)^-gamma")->capture_default_str();
  cons->add_option("--dx0", dx0, "initial position diameter")->required();
  cons->add_option("--dv0", dv0, "initial velocity diameter")->required();
  cons->add_option("--dtv0", dtv0, "velocity diameter of the second system (default: dv0)");
  cons->add_option("--dbarv0", dbarv0, "velocity diameter of the initial law (default: dv0)");
  cons->add_option("--variant", variant, "C_Stab variant")
      ->check(CLI::IsMember({"paper-explicit", "tight"}))
      ->capture_default_str();

  std::map<std::string, CommonOptions> exp_opts;
  double perturbation = 0.01;
  for (const std::string name : {"coupling", "w2rate", "stability", "telescope"}) {
    const char* help = name == "coupling"    ? "synchronous-coupling experiment (errX, errV)"
                       : name == "w2rate"    ? "empirical W2 rate against a reference sample"
                       : name == "stability" ? "stability of two perturbed systems against C_Stab"
                                             : "telescoping decomposition of the mean-field error";
    auto* sub = app.add_subcommand(name, help);
    add_common(sub, exp_opts[name]);
    if (name == "stability") {
      sub->add_option("--perturbation", perturbation, "uniform perturbation half-width")->capture_default_str();
    }
  }

  std::string plot_csv;
  std::string plot_kind;
  std::string plot_out;
  auto* plot = app.add_subcommand("plot", "render an SVG chart from an emitted CSV");
  plot->add_option("--csv", plot_csv, "input CSV")->required();
  plot->add_option("--kind", plot_kind, "chart kind")->required()->check(CLI::IsMember(svg::plot_kinds()));
  plot->add_option("--out", plot_out, "output SVG path")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (!args.empty()) err << "error: " << e.what() << '\n';
    err << app.help();
    return kExitUsage;
  }

  try {
    if (sim->parsed()) {
      const ExperimentConfig c = resolve_config(sim_opts);
      const std::size_t J = sim_J ? sim_J : c.J_list.front();
      auto g = rng::make_stream(c.seed, 0, rng::Stream::Initial);
      const auto init = dynamics::sample_initial(c.initial_law(), J, c.dim, g);
      const auto traj = dynamics::simulate(init, c.model(), c.dt, c.n_steps(), c.record_every);
      print_warnings(err, traj.warnings);
      const fs::path dir = sim_opts.out_dir;
      fs::create_directories(dir);
      report_io::write_text(dir / "simulate.csv", report_io::trajectory_csv(traj));
      write_manifest(dir, "simulate", c, {"simulate.csv"}, nullptr);
      const auto& last = traj.diameters.back();
      print_table(out, {{"J", std::to_string(J)},
                        {"steps", std::to_string(c.n_steps())},
                        {"D_X(T)", report_io::format_double(last.x)},
                        {"D_V(T)", report_io::format_double(last.v)}});
      out << "wrote " << (dir / "simulate.csv").string() << '\n';
      return kExitOk;
    }
    if (cons->parsed()) {
      if (!(K > 0.0) || dx0 < 0.0 || dv0 < 0.0) {
        err << "error: --K must be positive and diameters nonnegative\n";
        return kExitUsage;
      }
      const auto rate = validate_rate(RateSpec::gamma_family(gamma));
      const auto v = variant == "tight" ? theory::StabVariant::Tight : theory::StabVariant::PaperExplicit;
      const auto k = theory::compute_constants(K, rate, dx0, dv0, dtv0.value_or(dv0), dbarv0.value_or(dv0), v);
      const auto f = report_io::format_double;
      print_table(out, {{"K", f(K)},
                        {"gamma", f(gamma)},
                        {"L_psi", f(rate.lipschitz())},
                        {"flocking", k.flocking_holds ? "true" : "false"},
                        {"x_inf", f(k.x_inf)},
                        {"alpha", f(k.alpha)},
                        {"C_MF", f(k.c_mf)},
                        {"C_Stab", f(k.c_stab)},
                        {"C_Stab_variant", variant},
                        {"decay_rate", f(k.decay_rate)}});
      return kExitOk;
    }
    if (plot->parsed()) {
      write_plot(plot_csv, plot_kind, plot_out, err);
      out << "wrote " << plot_out << '\n';
      return kExitOk;
    }
    for (auto& [name, opts] : exp_opts) {
      if (app.got_subcommand(name)) return run_experiment(name, opts, perturbation, out, err);
    }
  } catch (const NumericalBlowUp& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const FlockingViolated& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ReplicateError& e) {
    err << (e.failure().numerical ? "numerical failure: " : "error: ") << e.what() << '\n';
    return e.failure().numerical ? kExitNumerical : kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  err << app.help();
  return kExitUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace flockmeter::cli
