#include "flockmeter/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "flockmeter/error.hpp"
#include "flockmeter/measures.hpp"
#include "flockmeter/rng.hpp"

#ifndef FLOCKMETER_VERSION
#define FLOCKMETER_VERSION "dev"
#endif

namespace flockmeter {

void ExperimentConfig::validate() const {
  if (dim == 0) throw ConfigError("dim", "must be a positive integer");
  if (!(K > 0.0) || !std::isfinite(K)) throw ConfigError("K", "must be positive and finite");
  try {
    validate_rate(rate);
  } catch (const Error& e) {
    throw ConfigError(rate.kind == RateSpec::Kind::GammaFamily ? "gamma" : "rate_table", e.what());
  }
  auto check_halfwidths = [this](const std::vector<double>& h, const char* key) {
    if (h.size() != dim) throw ConfigError(key, "needs one entry per dimension");
    for (double w : h) {
      if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError(key, "entries must be positive");
    }
  };
  check_halfwidths(x_halfwidths, "x_halfwidths");
  check_halfwidths(v_halfwidths, "v_halfwidths");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt", "must be positive");
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("T", "must be positive");
  const double steps = std::round(T / dt);
  if (steps < 1.0 || std::abs(steps * dt - T) > 1e-9 * std::max(1.0, T)) {
    throw ConfigError("T", "must be a positive whole multiple of dt");
  }
  if (J_list.empty()) throw ConfigError("J_list", "must not be empty");
  for (std::size_t J : J_list) {
    if (J == 0) throw ConfigError("J_list", "sizes must be >= 1");
  }
  if (J_inf < *std::ranges::max_element(J_list)) throw ConfigError("J_inf", "must be >= max(J_list)");
  if (M == 0) throw ConfigError("M", "must be >= 1");
  if (record_every == 0) throw ConfigError("record_every", "must be >= 1");
}

std::size_t ExperimentConfig::n_steps() const { return static_cast<std::size_t>(std::llround(T / dt)); }

ModelParams ExperimentConfig::model() const { return ModelParams(K, validate_rate(rate)); }

InitialLaw ExperimentConfig::initial_law() const { return InitialLaw(x_halfwidths, v_halfwidths); }

const SeriesSummary& ExperimentReport::find(const std::string& name, std::size_t J) const {
  for (const auto& s : series) {
    if (s.name == name && s.J == J) return s;
  }
  throw InvalidArgument("report has no series '" + name + "' for J = " + std::to_string(J));
}

namespace experiments {
namespace {

using Clock = std::chrono::steady_clock;

ExperimentReport start_report(const std::string& kind, const ExperimentConfig& config) {
  ExperimentReport r;
  r.kind = kind;
  r.config = config;
  r.code_version = FLOCKMETER_VERSION;
  r.generator = std::string(rng::kGeneratorFamily);
  for (std::size_t i = 0; i < config.M; ++i) r.replicate_seeds.push_back(rng::derive_seed(config.seed, i, rng::Stream::Initial));
  return r;
}

// Record times shared by every trajectory of the config.
std::vector<double> recorded_times(const ExperimentConfig& c) {
  std::vector<double> t;
  const std::size_t n = c.n_steps();
  for (std::size_t k = 0; k <= n; ++k) {
    if (k == 0 || k % c.record_every == 0 || k == n) t.push_back(static_cast<double>(k) * c.dt);
  }
  return t;
}

// Runs the task, tagging numerical failures with the replicate and size.
template <typename F>
auto tagged(std::size_t replicate, std::size_t J, F&& f) {
  try {
    return f();
  } catch (const NumericalBlowUp& e) {
    std::ostringstream ctx;
    ctx << "replicate " << replicate << ", J = " << J;
    throw NumericalBlowUp(e.step(), ctx.str());
  }
}

void population_notes(ExperimentReport& report, const ExperimentConfig& c) {
  const auto law = c.initial_law();
  const auto rate = validate_rate(c.rate);
  const double dx = law.support_diameter_x();
  const double dv = law.support_diameter_v();
  const auto k = theory::compute_constants(c.K, rate, dx, dv, dv, dv);
  report.scalars["flocking_holds"] = k.flocking_holds ? 1.0 : 0.0;
  report.scalars["x_inf"] = k.x_inf;
  report.scalars["alpha"] = k.alpha;
  report.scalars["c_mf"] = k.c_mf;
  report.scalars["c_stab"] = k.c_stab;
  if (!k.flocking_holds) report.notes.push_back("warning: flocking condition fails for the initial support");
  if (dynamics::step_size_exceeds_hull_bound(c.dt, c.model())) {
    report.notes.push_back("warning: dt*K > 1, velocity diameter is not guaranteed to contract");
  }
}

void finish(ExperimentReport& report, const MonteCarloResult& mc, Clock::time_point t0) {
  report.failures = mc.failures;
  for (const auto& f : mc.failures) report.notes.push_back("replicate " + std::to_string(f.replicate) + " excluded: " + f.message);
  report.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
}

// sum_j |(a_j - mean a) - (b_j - mean b)|^2 over the first n particles of
// each, a and b flattened with stride d.
double recentred_error(const std::vector<double>& a, const std::vector<double>& b, std::size_t n, std::size_t d) {
  std::vector<double> ma(d, 0.0);
  std::vector<double> mb(d, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t c = 0; c < d; ++c) {
      ma[c] += a[j * d + c];
      mb[c] += b[j * d + c];
    }
  }
  for (std::size_t c = 0; c < d; ++c) {
    ma[c] /= static_cast<double>(n);
    mb[c] /= static_cast<double>(n);
  }
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t c = 0; c < d; ++c) {
      const double e = (a[j * d + c] - ma[c]) - (b[j * d + c] - mb[c]);
      s += e * e;
    }
  }
  return s;
}

// Per-particle phase-space points (x_j, v_j) for rms distances.
std::vector<double> phase_points(const ParticleEnsemble& s) { return measures::empirical(s).points(); }

}  // namespace

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw InvalidArgument("fit_slope: need >= 2 paired points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx == 0.0) throw InvalidArgument("fit_slope: abscissae are all equal");
  return sxy / sxx;
}

ExperimentReport run_coupling(const ExperimentConfig& config, const MonteCarloOptions& options) {
  config.validate();
  const auto t0 = Clock::now();
  ExperimentReport report = start_report("coupling", config);
  population_notes(report, config);
  report.times = recorded_times(config);

  const auto params = config.model();
  const auto law = config.initial_law();
  const std::size_t d = config.dim;
  const std::size_t n_steps = config.n_steps();
  const std::size_t j_max = *std::ranges::max_element(config.J_list);
  const std::size_t n_times = report.times.size();

  auto task = [&](std::size_t r, std::uint64_t master) {
    auto g = rng::make_stream(master, r, rng::Stream::Initial);
    const auto proxy0 = dynamics::sample_initial(law, config.J_inf, d, g);
    std::vector<ParticleEnsemble> proxy_heads;
    proxy_heads.reserve(n_times);
    tagged(r, config.J_inf, [&] {
      dynamics::integrate(proxy0, params, config.dt, n_steps, config.record_every,
                          [&](const ParticleEnsemble& s, std::size_t) { proxy_heads.push_back(s.head(j_max)); });
      return 0;
    });

    ReplicateSample sample;
    for (std::size_t J : config.J_list) {
      std::vector<double> err_x;
      std::vector<double> err_v;
      err_x.reserve(n_times);
      err_v.reserve(n_times);
      tagged(r, J, [&] {
        dynamics::integrate(proxy0.head(J), params, config.dt, n_steps, config.record_every,
                            [&](const ParticleEnsemble& s, std::size_t) {
                              const auto& ref = proxy_heads[err_x.size()];
                              err_x.push_back(recentred_error(s.positions(), ref.positions(), J, d));
                              err_v.push_back(recentred_error(s.velocities(), ref.velocities(), J, d));
                            });
        return 0;
      });
      sample.series.push_back(std::move(err_x));
      sample.series.push_back(std::move(err_v));
    }
    return sample;
  };

  const auto mc = monte_carlo(task, config.M, config.seed, options);
  for (std::size_t i = 0; i < config.J_list.size(); ++i) {
    const std::size_t J = config.J_list[i];
    report.series.push_back({"errX", J, mc.series[2 * i].mean, mc.series[2 * i].stderr_});
    report.series.push_back({"errV", J, mc.series[2 * i + 1].mean, mc.series[2 * i + 1].stderr_});
  }
  finish(report, mc, t0);
  return report;
}

ExperimentReport run_w2_rate(const ExperimentConfig& config, const MonteCarloOptions& options) {
  config.validate();
  const auto t0 = Clock::now();
  ExperimentReport report = start_report("w2rate", config);
  population_notes(report, config);
  report.times = recorded_times(config);
  for (std::size_t J : config.J_list) {
    if (config.J_inf % J != 0) {
      report.notes.push_back("J = " + std::to_string(J) + " does not divide J_inf; exact transport uses lcm cloning");
    }
  }
  if (config.J_inf < 8 * *std::ranges::max_element(config.J_list)) {
    report.notes.push_back("reference sample is smaller than 8 x max(J_list); W2 estimates carry a visible upward bias");
  }

  const auto params = config.model();
  const auto law = config.initial_law();
  const std::size_t d = config.dim;
  const std::size_t n_steps = config.n_steps();
  const std::size_t j_max = *std::ranges::max_element(config.J_list);

  auto task = [&](std::size_t r, std::uint64_t master) {
    auto g_ref = rng::make_stream(master, r, rng::Stream::Reference);
    auto g = rng::make_stream(master, r, rng::Stream::Initial);
    const auto ref0 = dynamics::sample_initial(law, config.J_inf, d, g_ref);
    const auto particles0 = dynamics::sample_initial(law, j_max, d, g);

    std::vector<EmpiricalMeasure> ref_measures;
    tagged(r, config.J_inf, [&] {
      dynamics::integrate(ref0, params, config.dt, n_steps, config.record_every, [&](const ParticleEnsemble& s, std::size_t) {
        ref_measures.push_back(measures::recenter_measure(measures::empirical(s)));
      });
      return 0;
    });

    ReplicateSample sample;
    for (std::size_t J : config.J_list) {
      std::vector<double> w2sq;
      tagged(r, J, [&] {
        dynamics::integrate(particles0.head(J), params, config.dt, n_steps, config.record_every,
                            [&](const ParticleEnsemble& s, std::size_t) {
                              const auto mu = measures::recenter_measure(measures::empirical(s));
                              w2sq.push_back(measures::w2(mu, ref_measures[w2sq.size()], std::max(config.J_inf, measures::kDefaultSizeCap)).cost);
                            });
        return 0;
      });
      sample.series.push_back(std::move(w2sq));
    }
    return sample;
  };

  const auto mc = monte_carlo(task, config.M, config.seed, options);
  std::vector<double> log_j;
  std::vector<double> log_w2;
  double worst_envelope_ratio = 0.0;
  const double c_stab = report.scalars["c_stab"];
  for (std::size_t i = 0; i < config.J_list.size(); ++i) {
    const auto& s = mc.series[i];
    report.series.push_back({"w2sq", config.J_list[i], s.mean, s.stderr_});
    log_j.push_back(std::log(static_cast<double>(config.J_list[i])));
    log_w2.push_back(std::log(s.mean.front()));
    const double sup = *std::ranges::max_element(s.mean);
    worst_envelope_ratio = std::max(worst_envelope_ratio, sup / s.mean.front());
  }
  if (config.J_list.size() >= 2) report.scalars["slope_t0"] = fit_slope(log_j, log_w2);
  // sup_t E W2^2 relative to its t = 0 value, and the stability envelope c_stab^2.
  report.scalars["sup_over_initial"] = worst_envelope_ratio;
  report.scalars["envelope_factor"] = c_stab * c_stab * 1.5;
  report.scalars["envelope_holds"] = worst_envelope_ratio <= c_stab * c_stab * 1.5 ? 1.0 : 0.0;
  finish(report, mc, t0);
  return report;
}

ExperimentReport run_stability(const ExperimentConfig& config, double perturbation_scale,
                               const MonteCarloOptions& options) {
  config.validate();
  if (!(perturbation_scale >= 0.0) || !std::isfinite(perturbation_scale)) {
    throw InvalidArgument("run_stability: perturbation scale must be >= 0");
  }
  const auto t0 = Clock::now();
  ExperimentReport report = start_report("stability", config);
  population_notes(report, config);
  report.times = recorded_times(config);
  report.scalars["perturbation_scale"] = perturbation_scale;

  const auto params = config.model();
  const auto law = config.initial_law();
  const std::size_t d = config.dim;
  const std::size_t J = config.J_list.front();
  const std::size_t n_steps = config.n_steps();

  auto task = [&](std::size_t r, std::uint64_t master) {
    auto g = rng::make_stream(master, r, rng::Stream::Initial);
    auto g_pert = rng::make_stream(master, r, rng::Stream::Perturbation);
    const auto a0 = measures::recenter_velocities(dynamics::sample_initial(law, J, d, g));
    ParticleEnsemble b0 = a0;
    if (perturbation_scale > 0.0) {
      for (double& c : b0.positions()) c += rng::symmetric(g_pert, perturbation_scale);
      for (double& c : b0.velocities()) c += rng::symmetric(g_pert, perturbation_scale);
      b0 = measures::recenter_velocities(b0);
    }

    // Larger diameter pair of the two systems; symmetric in (a, b).
    const auto da = dynamics::diameters(a0);
    const auto db = dynamics::diameters(b0);
    const double dx0 = std::max(da.x, db.x);
    const double dv0 = std::max(da.v, db.v);
    const double bound = theory::c_stab(params.K, dx0, dv0, dv0, params.rate);

    std::vector<ParticleEnsemble> b_states;
    tagged(r, J, [&] {
      dynamics::integrate(b0, params, config.dt, n_steps, config.record_every,
                          [&](const ParticleEnsemble& s, std::size_t) { b_states.push_back(s); });
      return 0;
    });
    std::vector<double> dist;
    std::vector<double> lx;
    std::vector<double> lv;
    tagged(r, J, [&] {
      dynamics::integrate(a0, params, config.dt, n_steps, config.record_every, [&](const ParticleEnsemble& s, std::size_t) {
        const auto& other = b_states[dist.size()];
        const double sx = measures::squared_config_distance(s.positions(), other.positions());
        const double sv = measures::squared_config_distance(s.velocities(), other.velocities());
        dist.push_back(std::sqrt(sx + sv));
        lx.push_back(sx / (2.0 * static_cast<double>(J)));
        lv.push_back(sv / (2.0 * static_cast<double>(J)));
      });
      return 0;
    });
    const double sup = *std::ranges::max_element(dist);
    // 0/0 (no perturbation) counts as no amplification.
    const double ratio = dist.front() > 0.0 ? sup / dist.front() : (sup > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    std::vector<double> envelope(dist.size(), bound * dist.front());

    ReplicateSample sample;
    sample.series = {std::move(dist), std::move(lx), std::move(lv), std::move(envelope)};
    sample.scalars = {ratio, bound, ratio <= bound ? 1.0 : 0.0};
    return sample;
  };

  const auto mc = monte_carlo(task, config.M, config.seed, options);
  report.series.push_back({"dist", J, mc.series[0].mean, mc.series[0].stderr_});
  report.series.push_back({"LX", J, mc.series[1].mean, mc.series[1].stderr_});
  report.series.push_back({"LV", J, mc.series[2].mean, mc.series[2].stderr_});
  report.series.push_back({"cstab_bound", J, mc.series[3].mean, mc.series[3].stderr_});

  auto& ratios = report.replicate_values["ratio"];
  auto& bounds = report.replicate_values["c_stab"];
  double within = 0.0;
  for (const auto& s : mc.samples) {
    ratios.push_back(s.scalars[0]);
    bounds.push_back(s.scalars[1]);
    within += s.scalars[2];
  }
  report.scalars["fraction_within_bound"] = within / static_cast<double>(mc.samples.size());
  report.scalars["max_ratio"] = *std::ranges::max_element(ratios);
  report.scalars["min_c_stab"] = *std::ranges::min_element(bounds);
  finish(report, mc, t0);
  return report;
}

ExperimentReport run_telescope(const ExperimentConfig& config, const MonteCarloOptions& options) {
  config.validate();
  const double segments_real = std::round(config.T);
  if (std::abs(segments_real - config.T) > 1e-9) throw ConfigError("T", "telescope needs an integer horizon");
  const double per_unit_real = std::round(1.0 / config.dt);
  if (std::abs(per_unit_real * config.dt - 1.0) > 1e-9) throw ConfigError("dt", "telescope needs 1/dt to be an integer");
  const auto segments = static_cast<std::size_t>(segments_real);
  const auto per_unit = static_cast<std::size_t>(per_unit_real);

  const auto t0 = Clock::now();
  ExperimentReport report = start_report("telescope", config);
  population_notes(report, config);
  for (std::size_t n = 1; n <= segments; ++n) report.times.push_back(static_cast<double>(n));

  const auto params = config.model();
  const auto law = config.initial_law();
  const std::size_t d = config.dim;
  const std::size_t J = config.J_list.front();

  auto task = [&](std::size_t r, std::uint64_t master) {
    auto g = rng::make_stream(master, r, rng::Stream::Initial);
    const auto proxy0 = dynamics::sample_initial(law, config.J_inf, d, g);
    std::vector<ParticleEnsemble> at_integer_times;
    tagged(r, config.J_inf, [&] {
      dynamics::integrate(proxy0, params, config.dt, segments * per_unit, per_unit,
                          [&](const ParticleEnsemble& s, std::size_t) { at_integer_times.push_back(s.head(J)); });
      return 0;
    });

    // finals[n]: the J-system spawned at t_n, evolved to T.
    std::vector<std::vector<double>> finals(segments + 1);
    for (std::size_t n = 0; n <= segments; ++n) {
      const auto spawn = measures::recenter_config(at_integer_times[n]);
      const auto end = tagged(r, J, [&] { return dynamics::evolve(spawn, params, config.dt, (segments - n) * per_unit); });
      finals[n] = phase_points(end);
    }
    std::vector<double> increments;
    std::vector<double> summed(finals[0].size(), 0.0);
    for (std::size_t n = 1; n <= segments; ++n) {
      std::vector<double> inc(finals[n].size());
      for (std::size_t i = 0; i < inc.size(); ++i) {
        inc[i] = finals[n - 1][i] - finals[n][i];
        summed[i] += inc[i];
      }
      const std::vector<double> zero(inc.size(), 0.0);
      increments.push_back(measures::normalized_config_distance(inc, zero, 2 * d));
    }
    const double residual = measures::normalized_config_distance(summed, [&] {
      std::vector<double> total(finals[0].size());
      for (std::size_t i = 0; i < total.size(); ++i) total[i] = finals[0][i] - finals[segments][i];
      return total;
    }(), 2 * d);
    bool monotone = true;
    for (std::size_t n = 2; n < increments.size(); ++n) {
      // increments[k] holds E_{k+1}; compare E_{n+1} against E_n for n >= 2.
      if (increments[n] > increments[n - 1]) monotone = false;
    }
    ReplicateSample sample;
    sample.series = {std::move(increments)};
    sample.scalars = {residual, monotone ? 1.0 : 0.0};
    return sample;
  };

  const auto mc = monte_carlo(task, config.M, config.seed, options);
  report.series.push_back({"increment", J, mc.series[0].mean, mc.series[0].stderr_});
  auto& residuals = report.replicate_values["residual"];
  auto& monotone = report.replicate_values["monotone_after_2"];
  for (const auto& s : mc.samples) {
    residuals.push_back(s.scalars[0]);
    monotone.push_back(s.scalars[1]);
  }
  report.scalars["max_residual"] = *std::ranges::max_element(residuals);
  report.scalars["fraction_monotone_after_2"] = mc.scalars.mean[1];

  std::vector<double> tn;
  std::vector<double> log_inc;
  for (std::size_t n = 0; n < segments; ++n) {
    if (mc.series[0].mean[n] > 0.0) {
      tn.push_back(report.times[n]);
      log_inc.push_back(std::log(mc.series[0].mean[n]));
    }
  }
  if (tn.size() >= 2) report.scalars["increment_log_slope"] = fit_slope(tn, log_inc);
  report.scalars["envelope_slope"] = -0.5 * report.scalars["alpha"];
  finish(report, mc, t0);
  return report;
}

}  // namespace experiments
}  // namespace flockmeter
