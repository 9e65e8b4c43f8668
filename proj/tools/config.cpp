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

#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace ddsim::cli {

using nlohmann::json;

std::vector<double> GridSpec::values() const {
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = count == 1 ? start
                        : start + (stop - start) * static_cast<double>(k) /
                                      static_cast<double>(count - 1);
  }
  return out;
}

double RunConfig::resolved_theta() const {
  if (theta) return *theta;
  if (rabi) return tilt_angle(DrivingParams{*rabi, detuning}, convention).theta;
  return kPi / 2;
}

std::string sequence_name(SequenceKind kind) {
  switch (kind) {
    case SequenceKind::Ramsey: return "ramsey";
    case SequenceKind::HahnEcho: return "hahn_echo";
    case SequenceKind::HahnRamsey: return "hahn_ramsey";
    case SequenceKind::Custom: break;
  }
  return "custom";
}

SequenceKind parse_sequence(const std::string& name, const std::string& field) {
  if (name == "ramsey") return SequenceKind::Ramsey;
  if (name == "hahn_echo" || name == "echo") return SequenceKind::HahnEcho;
  if (name == "hahn_ramsey" || name == "hr") return SequenceKind::HahnRamsey;
  throw ConfigError(field + ": unknown sequence '" + name +
                    "' (expected ramsey, hahn_echo or hahn_ramsey)");
}

double time_unit_factor(const std::string& unit, const std::string& field) {
  if (unit == "ns") return 1e-3;
  if (unit == "us") return 1.0;
  if (unit == "ms") return 1e3;
  if (unit == "s") return 1e6;
  throw ConfigError(field + ": unknown time unit '" + unit + "' (expected ns, us, ms or s)");
}

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void check_keys(const json& obj, const std::string& path, std::set<std::string> allowed) {
  if (!obj.is_object()) throw ConfigError((path.empty() ? "config" : path) + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(join(path, key) + ": unknown key");
  }
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(field + ": must be finite");
  return x;
}

std::uint64_t unsigned_integer(const json& v, const std::string& field) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (x >= 0 && x == std::floor(x) && x < 9007199254740992.0) return static_cast<std::uint64_t>(x);
  }
  throw ConfigError(field + ": expected a non-negative integer");
}

std::string string(const json& v, const std::string& field) {
  if (!v.is_string()) throw ConfigError(field + ": expected a string");
  return v.get<std::string>();
}

bool boolean(const json& v, const std::string& field) {
  if (!v.is_boolean()) throw ConfigError(field + ": expected true or false");
  return v.get<bool>();
}

void read_grid(GridSpec& g, const json& obj, const std::string& path) {
  check_keys(obj, path, {"start", "stop", "count"});
  if (obj.contains("start")) g.start = number(obj["start"], path + ".start");
  if (obj.contains("stop")) g.stop = number(obj["stop"], path + ".stop");
  if (obj.contains("count")) g.count = unsigned_integer(obj["count"], path + ".count");
}

NoiseKind parse_noise_kind(const std::string& s, const std::string& field) {
  if (s == "ou" || s == "ornstein_uhlenbeck") return NoiseKind::OrnsteinUhlenbeck;
  if (s == "renewal" || s == "compound_poisson") return NoiseKind::CompoundPoissonRenewal;
  if (s == "none") return NoiseKind::None;
  throw ConfigError(field + ": unknown noise kind '" + s + "' (expected ou, renewal or none)");
}

std::string noise_kind_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::OrnsteinUhlenbeck: return "ou";
    case NoiseKind::CompoundPoissonRenewal: return "renewal";
    case NoiseKind::None: return "none";
  }
  return "ou";
}

std::string engine_name(Engine e) {
  switch (e) {
    case Engine::Analytic: return "analytic";
    case Engine::MonteCarlo: return "montecarlo";
    case Engine::Both: return "both";
  }
  return "analytic";
}

json grid_json(const GridSpec& g) {
  return json{{"start", g.start}, {"stop", g.stop}, {"count", g.count}};
}

void check_grid(const GridSpec& g, const std::string& field, bool allow_zero_start) {
  if (g.count < 2) throw ConfigError(field + ".count: must be at least 2");
  if (!(g.stop > g.start)) throw ConfigError(field + ".stop: must be greater than start");
  if (allow_zero_start ? g.start < 0.0 : !(g.start > 0.0)) {
    throw ConfigError(field + ".start: must be " +
                      std::string(allow_zero_start ? "non-negative" : "positive"));
  }
}

}  // namespace

void apply_json(RunConfig& cfg, const json& doc) {
  check_keys(doc, "", {"sequence", "sequences", "theta", "theta_over_pi", "rabi", "convention",
                       "detuning", "noise", "tau", "engine", "seed", "workers", "out",
                       "freq_unit", "mc", "readout", "gamma_e", "components", "bloch", "scan",
                       "fit", "sensitivity"});
  if (doc.contains("sequence") && doc.contains("sequences")) {
    throw ConfigError("sequences: give either sequence or sequences, not both");
  }
  if (doc.contains("sequence")) {
    cfg.sequences = {parse_sequence(string(doc["sequence"], "sequence"), "sequence")};
  }
  if (doc.contains("sequences")) {
    const json& list = doc["sequences"];
    if (!list.is_array() || list.empty()) throw ConfigError("sequences: expected a non-empty array");
    cfg.sequences.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string field = "sequences[" + std::to_string(i) + "]";
      cfg.sequences.push_back(parse_sequence(string(list[i], field), field));
    }
  }
  if (doc.contains("theta") && doc.contains("theta_over_pi")) {
    throw ConfigError("theta: give either theta or theta_over_pi, not both");
  }
  if (doc.contains("theta")) cfg.theta = number(doc["theta"], "theta");
  if (doc.contains("theta_over_pi")) cfg.theta = kPi * number(doc["theta_over_pi"], "theta_over_pi");
  if (doc.contains("rabi")) cfg.rabi = number(doc["rabi"], "rabi");
  if (doc.contains("convention")) {
    const std::string c = string(doc["convention"], "convention");
    if (c == "geometric") {
      cfg.convention = TiltConvention::Geometric;
    } else if (c == "effective_rabi") {
      cfg.convention = TiltConvention::EffectiveRabi;
    } else {
      throw ConfigError("convention: expected geometric or effective_rabi");
    }
  }
  if (doc.contains("detuning")) cfg.detuning = number(doc["detuning"], "detuning");
  if (doc.contains("noise")) {
    const json& n = doc["noise"];
    check_keys(n, "noise", {"kind", "lambda", "gamma"});
    if (n.contains("kind")) cfg.noise.kind = parse_noise_kind(string(n["kind"], "noise.kind"), "noise.kind");
    if (n.contains("lambda")) cfg.noise.lambda = number(n["lambda"], "noise.lambda");
    if (n.contains("gamma")) cfg.noise.gamma = number(n["gamma"], "noise.gamma");
  }
  if (doc.contains("tau")) read_grid(cfg.tau, doc["tau"], "tau");
  if (doc.contains("engine")) {
    const std::string e = string(doc["engine"], "engine");
    if (e == "analytic") {
      cfg.engine = Engine::Analytic;
    } else if (e == "montecarlo") {
      cfg.engine = Engine::MonteCarlo;
    } else if (e == "both") {
      cfg.engine = Engine::Both;
    } else {
      throw ConfigError("engine: expected analytic, montecarlo or both");
    }
  }
  if (doc.contains("seed")) cfg.mc.master_seed = unsigned_integer(doc["seed"], "seed");
  if (doc.contains("workers")) {
    cfg.mc.workers = static_cast<unsigned>(unsigned_integer(doc["workers"], "workers"));
  }
  if (doc.contains("out")) cfg.out = string(doc["out"], "out");
  if (doc.contains("freq_unit")) {
    const std::string u = string(doc["freq_unit"], "freq_unit");
    if (u == "rad") {
      cfg.freq_unit = FreqUnit::Rad;
    } else if (u == "cycles") {
      cfg.freq_unit = FreqUnit::Cycles;
    } else {
      throw ConfigError("freq_unit: expected rad or cycles");
    }
  }
  if (doc.contains("mc")) {
    const json& m = doc["mc"];
    check_keys(m, "mc", {"n_trajectories", "time_step", "pulse_model"});
    if (m.contains("n_trajectories")) {
      cfg.mc.n_trajectories = unsigned_integer(m["n_trajectories"], "mc.n_trajectories");
    }
    if (m.contains("time_step")) cfg.mc.time_step = number(m["time_step"], "mc.time_step");
    if (m.contains("pulse_model")) {
      const std::string p = string(m["pulse_model"], "mc.pulse_model");
      if (p == "instantaneous") {
        cfg.mc.pulse_model = PulseModel::Instantaneous;
      } else if (p == "finite") {
        cfg.mc.pulse_model = PulseModel::FiniteDuration;
      } else {
        throw ConfigError("mc.pulse_model: expected instantaneous or finite");
      }
    }
  }
  if (doc.contains("readout")) {
    const json& r = doc["readout"];
    check_keys(r, "readout", {"u", "v"});
    if (r.contains("u")) cfg.readout.u = number(r["u"], "readout.u");
    if (r.contains("v")) cfg.readout.v = number(r["v"], "readout.v");
  }
  if (doc.contains("gamma_e")) cfg.gamma_e = number(doc["gamma_e"], "gamma_e");
  if (doc.contains("components")) {
    const json& c = doc["components"];
    check_keys(c, "components", {"theta_count"});
    if (c.contains("theta_count")) {
      cfg.theta_count = unsigned_integer(c["theta_count"], "components.theta_count");
    }
  }
  if (doc.contains("bloch")) {
    const json& b = doc["bloch"];
    check_keys(b, "bloch", {"tau", "samples_per_segment"});
    if (b.contains("tau")) cfg.bloch_tau = number(b["tau"], "bloch.tau");
    if (b.contains("samples_per_segment")) {
      cfg.bloch_samples = unsigned_integer(b["samples_per_segment"], "bloch.samples_per_segment");
    }
  }
  if (doc.contains("scan")) {
    const json& s = doc["scan"];
    check_keys(s, "scan", {"lambda", "gamma"});
    if (s.contains("lambda")) read_grid(cfg.scan_lambda, s["lambda"], "scan.lambda");
    if (s.contains("gamma")) read_grid(cfg.scan_gamma, s["gamma"], "scan.gamma");
  }
  if (doc.contains("fit")) {
    const json& f = doc["fit"];
    check_keys(f, "fit", {"model", "oscillating", "time_unit"});
    if (f.contains("model")) {
      const std::string m = string(f["model"], "fit.model");
      if (m == "gaussian") {
        cfg.fit_model = DecayModel::GaussianEnvelope;
      } else if (m == "exponential") {
        cfg.fit_model = DecayModel::PlainExponential;
      } else {
        throw ConfigError("fit.model: expected gaussian or exponential");
      }
    }
    if (f.contains("oscillating")) cfg.fit_oscillating = boolean(f["oscillating"], "fit.oscillating");
    if (f.contains("time_unit")) {
      cfg.time_unit = string(f["time_unit"], "fit.time_unit");
      time_unit_factor(cfg.time_unit, "fit.time_unit");
    }
  }
  if (doc.contains("sensitivity")) {
    const json& s = doc["sensitivity"];
    check_keys(s, "sensitivity", {"fixed_theta", "tau_max"});
    if (s.contains("fixed_theta")) {
      cfg.sensitivity_fixed_theta = boolean(s["fixed_theta"], "sensitivity.fixed_theta");
    }
    if (s.contains("tau_max")) cfg.sensitivity_tau_max = number(s["tau_max"], "sensitivity.tau_max");
  }
}

void apply_json_text(RunConfig& cfg, const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                      ": invalid JSON");
  }
  apply_json(cfg, doc);
}

void convert_units(RunConfig& cfg) {
  if (cfg.freq_unit != FreqUnit::Cycles) return;
  const double k = 2 * kPi;
  cfg.detuning *= k;
  if (cfg.rabi) *cfg.rabi *= k;
  cfg.noise.gamma *= k;
  cfg.scan_gamma.start *= k;
  cfg.scan_gamma.stop *= k;
  cfg.freq_unit = FreqUnit::Rad;
}

void validate(const RunConfig& cfg) {
  if (cfg.sequences.empty()) throw ConfigError("sequences: must not be empty");
  check_grid(cfg.tau, "tau", true);
  if (!(cfg.noise.lambda > 0.0)) throw ConfigError("noise.lambda: must be positive");
  if (cfg.noise.gamma < 0.0) throw ConfigError("noise.gamma: must be non-negative");
  if (cfg.rabi && !(*cfg.rabi > 0.0)) throw ConfigError("rabi: must be positive");
  if (cfg.theta) {
    if (!(*cfg.theta > 0.0) || *cfg.theta > kPi / 2 + 1e-12) {
      throw ConfigError("theta: must lie in (0, pi/2]");
    }
  }
  if (cfg.mc.n_trajectories == 0) throw ConfigError("mc.n_trajectories: must be at least 1");
  if (!(cfg.mc.time_step > 0.0)) throw ConfigError("mc.time_step: must be positive");
  if (cfg.mc.pulse_model == PulseModel::FiniteDuration && !cfg.rabi) {
    throw ConfigError("rabi: finite pulses need the Rabi frequency");
  }
  if (!(cfg.readout.v >= 0.0) || !(cfg.readout.u > cfg.readout.v)) {
    throw ConfigError("readout: need u > v >= 0");
  }
  if (!(cfg.gamma_e > 0.0)) throw ConfigError("gamma_e: must be positive");
  if (cfg.theta_count < 2) throw ConfigError("components.theta_count: must be at least 2");
  if (cfg.bloch_tau < 0.0) throw ConfigError("bloch.tau: must be non-negative");
  if (cfg.bloch_samples == 0) throw ConfigError("bloch.samples_per_segment: must be at least 1");
  check_grid(cfg.scan_lambda, "scan.lambda", false);
  check_grid(cfg.scan_gamma, "scan.gamma", true);
  if (cfg.sensitivity_tau_max < 0.0) throw ConfigError("sensitivity.tau_max: must be non-negative");
  time_unit_factor(cfg.time_unit, "fit.time_unit");
}

json resolved_json(const RunConfig& cfg) {
  json seqs = json::array();
  for (SequenceKind k : cfg.sequences) seqs.push_back(sequence_name(k));
  json doc{
      {"sequences", seqs},
      {"theta", cfg.resolved_theta()},
      {"detuning", cfg.detuning},
      {"convention", cfg.convention == TiltConvention::Geometric ? "geometric" : "effective_rabi"},
      {"noise",
       {{"kind", noise_kind_name(cfg.noise.kind)},
        {"lambda", cfg.noise.lambda},
        {"gamma", cfg.noise.gamma}}},
      {"tau", grid_json(cfg.tau)},
      {"engine", engine_name(cfg.engine)},
      {"seed", cfg.mc.master_seed},
      {"mc",
       {{"n_trajectories", cfg.mc.n_trajectories},
        {"time_step", cfg.mc.time_step},
        {"pulse_model",
         cfg.mc.pulse_model == PulseModel::Instantaneous ? "instantaneous" : "finite"}}},
      {"readout", {{"u", cfg.readout.u}, {"v", cfg.readout.v}}},
      {"gamma_e", cfg.gamma_e},
      {"components", {{"theta_count", cfg.theta_count}}},
      {"bloch", {{"tau", cfg.bloch_tau}, {"samples_per_segment", cfg.bloch_samples}}},
      {"scan", {{"lambda", grid_json(cfg.scan_lambda)}, {"gamma", grid_json(cfg.scan_gamma)}}},
      {"fit",
       {{"model", std::string(decay_model_name(cfg.fit_model))},
        {"oscillating", cfg.fit_oscillating},
        {"time_unit", cfg.time_unit}}},
      {"sensitivity",
       {{"fixed_theta", cfg.sensitivity_fixed_theta}, {"tau_max", cfg.sensitivity_tau_max}}},
  };
  if (cfg.rabi) doc["rabi"] = *cfg.rabi;
  return doc;
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = resolved_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ddsim::cli
