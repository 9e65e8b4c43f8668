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

#pragma once

// Run configuration shared by all subcommands: read from a JSON document,
// overridden by DDSIM_* environment variables and then by flags.
//
// Units: times in microseconds, frequencies in rad/us. With freq_unit =
// "cycles" the detuning, Rabi frequency and noise amplitude (and the gamma
// scan axis) are read in MHz and multiplied by 2 pi; lambda is a rate and is
// never converted.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddsim/analysis.hpp"
#include "ddsim/fit.hpp"
#include "ddsim/montecarlo.hpp"
#include "ddsim/noise.hpp"
#include "ddsim/spin.hpp"

#include "json.hpp"

namespace ddsim::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Engine { Analytic, MonteCarlo, Both };
enum class FreqUnit { Rad, Cycles };

struct GridSpec {
  double start = 0.0;
  double stop = 1.0;
  std::size_t count = 2;

  std::vector<double> values() const;
};

struct RunConfig {
  std::vector<SequenceKind> sequences{SequenceKind::HahnRamsey};
  std::optional<double> theta;  // rad
  std::optional<double> rabi;   // omega_0
  TiltConvention convention = TiltConvention::Geometric;
  double detuning = 0.0;
  NoiseParams noise{1.0, 0.0, NoiseKind::OrnsteinUhlenbeck};
  GridSpec tau{0.0, 8.0, 40};
  Engine engine = Engine::Analytic;
  McConfig mc;
  std::string out = "ddsim_out";
  FreqUnit freq_unit = FreqUnit::Rad;

  ReadoutModel readout{0.03, 0.021};
  double gamma_e = kNvGyromagneticRatio;
  bool sensitivity_fixed_theta = false;
  double sensitivity_tau_max = 0.0;

  std::size_t theta_count = 91;

  double bloch_tau = 1.0;
  std::size_t bloch_samples = 50;

  GridSpec scan_lambda{0.5, 5.0, 10};
  GridSpec scan_gamma{0.1, 1.5, 15};

  DecayModel fit_model = DecayModel::GaussianEnvelope;
  bool fit_oscillating = true;
  std::string time_unit = "us";

  double resolved_theta() const;
};

std::string sequence_name(SequenceKind kind);
SequenceKind parse_sequence(const std::string& name, const std::string& field);

/// Factor converting `unit` (ns, us, ms, s) to microseconds.
double time_unit_factor(const std::string& unit, const std::string& field);

/// Applies a JSON document onto `cfg`. Unknown keys and wrong types are
/// ConfigErrors naming the field; parse errors name the line and column.
void apply_json_text(RunConfig& cfg, const std::string& text, const std::string& source);
void apply_json(RunConfig& cfg, const nlohmann::json& doc);

/// Multiplies the frequency fields by 2 pi when freq_unit is cycles.
void convert_units(RunConfig& cfg);

/// Checks invariants; throws ConfigError("<field>: <problem>").
void validate(const RunConfig& cfg);

/// Resolved configuration (internal units) without `out` and `workers`.
nlohmann::json resolved_json(const RunConfig& cfg);

/// 64-bit FNV-1a of resolved_json(cfg).dump(), as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace ddsim::cli
