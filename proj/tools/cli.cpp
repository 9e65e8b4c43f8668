// Copyright 2026 The ddsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "config.hpp"
#include "ddsim/analysis.hpp"
#include "ddsim/analytic.hpp"
#include "ddsim/curve.hpp"
#include "ddsim/fit.hpp"
#include "ddsim/montecarlo.hpp"
#include "ddsim/noise.hpp"

namespace ddsim::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flag values are applied on top of the config file, in registration order,
// only when the flag (or its environment variable) was given.
class Overrides {
 public:
  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& name, const std::string& help,
                   std::function<void(RunConfig&, const T&)> set) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(name, *value, help);
    apply_.push_back([opt, value, set](RunConfig& cfg) {
      if (opt->count() > 0) set(cfg, *value);
    });
    return opt;
  }

  CLI::Option* add_flag(CLI::App* app, const std::string& name, const std::string& help,
                        std::function<void(RunConfig&)> set) {
    CLI::Option* opt = app->add_flag(name, help);
    apply_.push_back([opt, set](RunConfig& cfg) {
      if (opt->count() > 0) set(cfg);
    });
    return opt;
  }

  void apply(RunConfig& cfg) const {
    for (const auto& f : apply_) f(cfg);
  }

 private:
  std::vector<std::function<void(RunConfig&)>> apply_;
};

struct Context {
  RunConfig cfg;
  std::string hash;
  std::ostream& out;
  std::ostream& err;
};

std::vector<std::string> header(const Context& ctx, const std::string& what) {
  return {"config_hash=" + ctx.hash, what};
}

std::ofstream open_output(const fs::path& path) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return f;
}

void finish_output(std::ofstream& f, const fs::path& path, Context& ctx) {
  f.close();
  if (!f) throw std::runtime_error("failed writing " + path.string());
  ctx.out << "wrote " << path.string() << '\n';
}

SignalCurve load_curve(const std::string& path, const RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("data: cannot read '" + path + "'");
  SignalCurve curve;
  try {
    curve = read_curve_csv(in);
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  const double k = time_unit_factor(cfg.time_unit, "time_unit");
  for (double& t : curve.taus) t *= k;
  return curve;
}

std::string comparison_z(double analytic, double mean, double stderr_) {
  // Differences at rounding level count as agreement even when every
  // trajectory gave the same value and stderr is itself rounding noise.
  const double diff = mean - analytic;
  if (std::abs(diff) <= 1e-12) return "0";
  return stderr_ > 0.0 ? format_number(diff / stderr_) : "nan";
}

int cmd_simulate(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const double theta = cfg.resolved_theta();
  const std::vector<double> taus = cfg.tau.values();
  const bool analytic = cfg.engine != Engine::MonteCarlo;
  const bool mc = cfg.engine != Engine::Analytic;

  struct Result {
    SequenceKind kind;
    SignalCurve analytic;
    SignalCurve mc;
  };
  std::vector<Result> results;
  for (SequenceKind kind : cfg.sequences) {
    Result r{kind, {}, {}};
    if (analytic) r.analytic = analytic_curve(kind, theta, cfg.detuning, cfg.noise, taus);
    if (mc) r.mc = run_mc(kind, theta, cfg.detuning, cfg.noise, taus, cfg.mc);
    results.push_back(std::move(r));
  }

  const fs::path dir(cfg.out);
  for (const Result& r : results) {
    const std::string name = sequence_name(r.kind);
    if (analytic) {
      const fs::path path = dir / (name + "_analytic.csv");
      auto comments = header(ctx, "sequence=" + name + " engine=analytic");
      if (cfg.noise.kind == NoiseKind::CompoundPoissonRenewal) {
        comments.push_back("closed forms assume Gaussian noise with the same correlation");
      }
      std::ofstream f = open_output(path);
      write_curve_csv(f, r.analytic, comments);
      finish_output(f, path, ctx);
    }
    if (mc) {
      const fs::path path = dir / (name + "_montecarlo.csv");
      auto comments = header(ctx, "sequence=" + name + " engine=montecarlo");
      for (const auto& w : r.mc.warnings) {
        comments.push_back("warning: " + w);
        ctx.err << "warning: " << name << ": " << w << '\n';
      }
      std::ofstream f = open_output(path);
      write_curve_csv(f, r.mc, comments);
      finish_output(f, path, ctx);
    }
    if (analytic && mc) {
      const fs::path path = dir / (name + "_comparison.csv");
      std::ofstream f = open_output(path);
      for (const auto& c : header(ctx, "sequence=" + name + " z=(mean-analytic)/stderr")) {
        f << "# " << c << '\n';
      }
      f << "tau,analytic,mean,stderr,z\n";
      for (std::size_t j = 0; j < taus.size(); ++j) {
        f << format_number(taus[j]) << ',' << format_number(r.analytic.means[j]) << ','
          << format_number(r.mc.means[j]) << ',' << format_number(r.mc.stderrs[j]) << ','
          << comparison_z(r.analytic.means[j], r.mc.means[j], r.mc.stderrs[j]) << '\n';
      }
      finish_output(f, path, ctx);
    }
  }
  return kExitOk;
}

int cmd_components(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const fs::path dir(cfg.out);
  const std::vector<double> taus = cfg.tau.values();
  std::vector<std::array<double, 3>> rows;
  for (double tau : taus) {
    rows.push_back({chi_filter(FilterKind::RamseyLike, cfg.noise, tau),
                    chi_filter(FilterKind::HalfPeriod, cfg.noise, tau),
                    chi_filter(FilterKind::HahnLike, cfg.noise, tau)});
  }
  {
    const fs::path path = dir / "filter_exponents.csv";
    std::ofstream f = open_output(path);
    for (const auto& c : header(ctx, "filter-function decay exponents")) f << "# " << c << '\n';
    f << "tau,ramsey_like,half_period,hahn_like\n";
    for (std::size_t j = 0; j < taus.size(); ++j) {
      f << format_number(taus[j]) << ',' << format_number(rows[j][0]) << ','
        << format_number(rows[j][1]) << ',' << format_number(rows[j][2]) << '\n';
    }
    finish_output(f, path, ctx);
  }
  {
    const fs::path path = dir / "weights.csv";
    std::ofstream f = open_output(path);
    for (const auto& c : header(ctx, "Hahn-Ramsey component weights")) f << "# " << c << '\n';
    f << "theta,constant,ramsey_like,cos_delta,cos_2delta\n";
    for (std::size_t k = 0; k < cfg.theta_count; ++k) {
      const double theta =
          k + 1 == cfg.theta_count ? kPi / 2 : (kPi / 2) * static_cast<double>(k) / (cfg.theta_count - 1);
      const ComponentWeights w = component_weights(theta);
      f << format_number(theta) << ',' << format_number(w.constant) << ','
        << format_number(w.ramsey_like) << ',' << format_number(w.cos_delta) << ','
        << format_number(w.cos_2delta) << '\n';
    }
    finish_output(f, path, ctx);
  }
  return kExitOk;
}

json fit_json(const DecayFit& fit) {
  return json{{"model", std::string(decay_model_name(fit.model))},
              {"oscillating", fit.oscillating},
              {"tau_c", fit.tau_c},
              {"tau_c_err", std::isfinite(fit.tau_c_err) ? json(fit.tau_c_err) : json(nullptr)},
              {"amplitude", fit.amplitude},
              {"offset", fit.offset},
              {"frequency", fit.frequency},
              {"phase", fit.phase},
              {"residual_norm", fit.residual_norm},
              {"n_points", fit.n_points},
              {"iterations", fit.iterations},
              {"starts_tried", fit.starts_tried}};
}

int cmd_fit(Context& ctx, const std::string& data, const std::string& sequence) {
  const RunConfig& cfg = ctx.cfg;
  SignalCurve curve = load_curve(data, cfg);
  std::optional<SequenceKind> kind;
  if (!sequence.empty()) kind = parse_sequence(sequence, "--sequence");
  if (kind) curve = with_total_time(curve, *kind);

  FitOptions options;
  options.model = cfg.fit_model;
  options.oscillating = cfg.fit_oscillating;
  const DecayFit fit = fit_decay(curve, options);

  json report = fit_json(fit);
  report["time_unit"] = "us";
  report["time_axis"] = kind ? "total_free_evolution" : "as_given";
  report["source"] = fs::path(data).filename().string();
  report["config_hash"] = ctx.hash;
  const std::string text = report.dump(2) + "\n";
  ctx.out << text;

  const fs::path path = fs::path(cfg.out) / (fs::path(data).stem().string() + "_fit.json");
  std::ofstream f = open_output(path);
  f << text;
  finish_output(f, path, ctx);
  return kExitOk;
}

int cmd_scan(Context& ctx, const std::vector<std::string>& data,
             const std::vector<std::string>& sequences) {
  const RunConfig& cfg = ctx.cfg;
  std::vector<SequenceKind> kinds;
  for (const auto& s : sequences) kinds.push_back(parse_sequence(s, "--sequence"));
  if (kinds.empty()) kinds = cfg.sequences;
  if (kinds.size() != 1 && kinds.size() != data.size()) {
    throw ConfigError("sequence: give one sequence, or one per data file");
  }
  std::vector<SignalCurve> curves;
  for (const auto& path : data) curves.push_back(load_curve(path, cfg));

  const double theta = cfg.resolved_theta();
  const std::vector<double> lambdas = cfg.scan_lambda.values();
  const std::vector<double> gammas = cfg.scan_gamma.values();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const SequenceKind kind = kinds.size() == 1 ? kinds[0] : kinds[i];
    const ResidualMap map =
        scan_noise_params(curves[i], kind, theta, cfg.detuning, lambdas, gammas, cfg.mc.workers);
    const std::string stem = fs::path(data[i]).stem().string();
    const fs::path csv_path = fs::path(cfg.out) / (stem + "_residuals.csv");
    std::ofstream csv = open_output(csv_path);
    write_residual_map_csv(csv, map, header(ctx, "sequence=" + sequence_name(kind) + " source=" +
                                                     fs::path(data[i]).filename().string()));
    finish_output(csv, csv_path, ctx);

    const json report{{"source", fs::path(data[i]).filename().string()},
                      {"sequence", sequence_name(kind)},
                      {"best_lambda", map.best_lambda()},
                      {"best_gamma", map.best_gamma()},
                      {"best_residual", map.best_residual()},
                      {"argmin", {map.argmin_lambda, map.argmin_gamma}},
                      {"missing_cells", map.missing},
                      {"config_hash", ctx.hash}};
    const fs::path json_path = fs::path(cfg.out) / (stem + "_scan.json");
    std::ofstream js = open_output(json_path);
    js << report.dump(2) << '\n';
    finish_output(js, json_path, ctx);
  }
  return kExitOk;
}

int cmd_sensitivity(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  SensitivityOptions options;
  options.detuning = cfg.detuning;
  options.gamma_e = cfg.gamma_e;
  options.tau_max = cfg.sensitivity_tau_max;
  std::optional<double> theta;
  if (cfg.sensitivity_fixed_theta) theta = cfg.resolved_theta();
  const SensitivityResult r = sensitivity(cfg.noise, cfg.readout, theta, options);

  const json report{{"optimal_theta", r.optimal_theta},
                    {"optimal_theta_over_pi", r.optimal_theta / kPi},
                    {"optimal_tau", r.optimal_tau},
                    {"max_slope", r.max_slope},
                    {"delta_b_min", r.delta_b_min},
                    {"delta_b_min_formula", r.delta_b_min_formula},
                    {"t2_hr", r.t2_hr},
                    {"t2_hr_err", std::isfinite(r.t2_hr_err) ? json(r.t2_hr_err) : json(nullptr)},
                    {"eta", r.eta},
                    {"alpha", cfg.readout.alpha()},
                    {"beta", cfg.readout.beta()},
                    {"gamma_e", cfg.gamma_e},
                    {"units", {{"time", "us"}, {"field", "gauss"}, {"eta", "gauss sqrt(us)"}}},
                    {"config_hash", ctx.hash}};
  const std::string text = report.dump(2) + "\n";
  ctx.out << text;
  const fs::path path = fs::path(cfg.out) / "sensitivity.json";
  std::ofstream f = open_output(path);
  f << text;
  finish_output(f, path, ctx);
  return kExitOk;
}

int cmd_bloch(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const double theta = cfg.resolved_theta();
  for (SequenceKind kind : cfg.sequences) {
    const auto points = bloch_trajectory(kind, theta, cfg.detuning, cfg.bloch_tau,
                                         cfg.bloch_samples, cfg.rabi.value_or(0.0));
    const std::string name = sequence_name(kind);
    const fs::path path = fs::path(cfg.out) / ("bloch_" + name + ".csv");
    std::ofstream f = open_output(path);
    write_bloch_csv(f, points, header(ctx, "sequence=" + name + " noiseless"));
    finish_output(f, path, ctx);
  }
  return kExitOk;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"ddsim: spin dephasing under pulse sequences (analytic, Monte Carlo, fits)"};
  app.name("ddsim");
  app.fallthrough();
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON configuration file")->envname("DDSIM_CONFIG");

  Overrides ov;
  ov.add<std::uint64_t>(&app, "--seed", "master seed", [](RunConfig& c, const std::uint64_t& v) {
      c.mc.master_seed = v;
    })->envname("DDSIM_SEED");
  ov.add<std::string>(&app, "--out", "output directory", [](RunConfig& c, const std::string& v) {
      c.out = v;
    })->envname("DDSIM_OUT");
  ov.add<std::string>(&app, "--freq-unit", "rad (rad/us) or cycles (MHz)",
                      [](RunConfig& c, const std::string& v) {
                        apply_json(c, json{{"freq_unit", v}});
                      })->envname("DDSIM_FREQ_UNIT");
  ov.add<unsigned>(&app, "--workers", "worker threads, 0 = all cores",
                   [](RunConfig& c, const unsigned& v) { c.mc.workers = v; })->envname("DDSIM_WORKERS");
  ov.add<std::vector<std::string>>(&app, "--sequences", "ramsey, hahn_echo, hahn_ramsey",
                                   [](RunConfig& c, const std::vector<std::string>& v) {
                                     c.sequences.clear();
                                     for (const auto& s : v) c.sequences.push_back(parse_sequence(s, "--sequences"));
                                   });
  ov.add<double>(&app, "--theta", "tilt angle in rad", [](RunConfig& c, const double& v) { c.theta = v; });
  ov.add<double>(&app, "--theta-over-pi", "tilt angle in units of pi",
                 [](RunConfig& c, const double& v) { c.theta = v * kPi; });
  ov.add<double>(&app, "--rabi", "resonant Rabi frequency omega_0",
                 [](RunConfig& c, const double& v) { c.rabi = v; });
  ov.add<double>(&app, "--detuning", "detuning Delta", [](RunConfig& c, const double& v) { c.detuning = v; });
  ov.add<std::string>(&app, "--noise", "ou, renewal or none", [](RunConfig& c, const std::string& v) {
    apply_json(c, json{{"noise", {{"kind", v}}}});
  });
  ov.add<double>(&app, "--lambda", "noise correlation rate",
                 [](RunConfig& c, const double& v) { c.noise.lambda = v; });
  ov.add<double>(&app, "--gamma", "noise amplitude", [](RunConfig& c, const double& v) { c.noise.gamma = v; });
  ov.add<double>(&app, "--tau-start", "first tau", [](RunConfig& c, const double& v) { c.tau.start = v; });
  ov.add<double>(&app, "--tau-stop", "last tau", [](RunConfig& c, const double& v) { c.tau.stop = v; });
  ov.add<std::size_t>(&app, "--tau-count", "number of tau points",
                      [](RunConfig& c, const std::size_t& v) { c.tau.count = v; });
  ov.add<std::string>(&app, "--engine", "analytic, montecarlo or both",
                      [](RunConfig& c, const std::string& v) { apply_json(c, json{{"engine", v}}); })
      ->envname("DDSIM_ENGINE");
  ov.add<std::size_t>(&app, "--n-trajectories", "Monte Carlo trajectories",
                      [](RunConfig& c, const std::size_t& v) { c.mc.n_trajectories = v; })
      ->envname("DDSIM_N_TRAJECTORIES");
  ov.add<double>(&app, "--time-step", "Monte Carlo time step",
                 [](RunConfig& c, const double& v) { c.mc.time_step = v; });
  ov.add<std::string>(&app, "--pulse-model", "instantaneous or finite",
                      [](RunConfig& c, const std::string& v) {
                        apply_json(c, json{{"mc", {{"pulse_model", v}}}});
                      });
  ov.add<std::string>(&app, "--time-unit", "time unit of data files: ns, us, ms, s",
                      [](RunConfig& c, const std::string& v) {
                        time_unit_factor(v, "--time-unit");
                        c.time_unit = v;
                      });

  CLI::App* simulate = app.add_subcommand("simulate", "signal curves per sequence and engine");
  CLI::App* components = app.add_subcommand("components", "filter exponents and component weights");
  ov.add<std::size_t>(components, "--theta-count", "rows of the weights table",
                      [](RunConfig& c, const std::size_t& v) { c.theta_count = v; });

  CLI::App* fit = app.add_subcommand("fit", "fit a decay envelope to a tau,signal[,stderr] CSV");
  std::string fit_data;
  std::string fit_sequence;
  fit->add_option("data", fit_data, "data file")->required();
  fit->add_option("--sequence", fit_sequence,
                  "fit against the total free-evolution time of this sequence");
  ov.add<std::string>(fit, "--model", "gaussian or exponential", [](RunConfig& c, const std::string& v) {
    apply_json(c, json{{"fit", {{"model", v}}}});
  });
  ov.add_flag(fit, "--no-oscillation", "drop the cosine carrier",
              [](RunConfig& c) { c.fit_oscillating = false; });

  CLI::App* scan = app.add_subcommand("scan", "residual maps over (lambda, gamma)");
  std::vector<std::string> scan_data;
  std::vector<std::string> scan_sequences;
  scan->add_option("data", scan_data, "data files")->required();
  scan->add_option("--sequence", scan_sequences, "sequence of each data file (or one for all)");
  ov.add<double>(scan, "--lambda-min", "", [](RunConfig& c, const double& v) { c.scan_lambda.start = v; });
  ov.add<double>(scan, "--lambda-max", "", [](RunConfig& c, const double& v) { c.scan_lambda.stop = v; });
  ov.add<std::size_t>(scan, "--lambda-count", "",
                      [](RunConfig& c, const std::size_t& v) { c.scan_lambda.count = v; });
  ov.add<double>(scan, "--gamma-min", "", [](RunConfig& c, const double& v) { c.scan_gamma.start = v; });
  ov.add<double>(scan, "--gamma-max", "", [](RunConfig& c, const double& v) { c.scan_gamma.stop = v; });
  ov.add<std::size_t>(scan, "--gamma-count", "",
                      [](RunConfig& c, const std::size_t& v) { c.scan_gamma.count = v; });

  CLI::App* sens = app.add_subcommand("sensitivity", "shot-noise-limited field sensitivity");
  ov.add_flag(sens, "--fixed-theta", "use the configured tilt instead of optimising it",
              [](RunConfig& c) { c.sensitivity_fixed_theta = true; });
  ov.add<double>(sens, "--tau-max", "", [](RunConfig& c, const double& v) { c.sensitivity_tau_max = v; });
  ov.add<double>(sens, "--u", "bright-state photons per shot", [](RunConfig& c, const double& v) { c.readout.u = v; });
  ov.add<double>(sens, "--v", "dark-state photons per shot", [](RunConfig& c, const double& v) { c.readout.v = v; });
  ov.add<double>(sens, "--gamma-e", "gyromagnetic ratio, MHz/gauss",
                 [](RunConfig& c, const double& v) { c.gamma_e = v; });

  CLI::App* bloch = app.add_subcommand("bloch", "noiseless Bloch-sphere trajectories");
  ov.add<double>(bloch, "--tau", "delay length", [](RunConfig& c, const double& v) { c.bloch_tau = v; });
  ov.add<std::size_t>(bloch, "--samples", "points per pulse and per delay",
                      [](RunConfig& c, const std::size_t& v) { c.bloch_samples = v; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  Context ctx{RunConfig{}, "", out, err};
  try {
    if (!config_path.empty()) apply_json_text(ctx.cfg, read_file(config_path), config_path);
    ov.apply(ctx.cfg);
    convert_units(ctx.cfg);
    validate(ctx.cfg);
    ctx.hash = config_hash(ctx.cfg);

    if (simulate->parsed()) return cmd_simulate(ctx);
    if (components->parsed()) return cmd_components(ctx);
    if (fit->parsed()) return cmd_fit(ctx, fit_data, fit_sequence);
    if (scan->parsed()) return cmd_scan(ctx, scan_data, scan_sequences);
    if (sens->parsed()) return cmd_sensitivity(ctx);
    if (bloch->parsed()) return cmd_bloch(ctx);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const FitError& e) {
    err << "fit failed: " << e.what() << '\n';
    for (const auto& d : e.diagnostics()) err << "  " << d << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"ddsim"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace ddsim::cli
