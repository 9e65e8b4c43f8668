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

// Stochastic reference engine: samples noise trajectories, propagates the
// spin through the pulse sequence trajectory by trajectory and reports the
// mean <sigma_z> with its standard error.
//
// Reproducibility: trajectory i always draws from child_seed(master_seed, i)
// and partial results are merged in a fixed pairwise order over blocks of
// kBlockWidth trajectories, so results do not depend on the worker count.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "ddsim/curve.hpp"
#include "ddsim/noise.hpp"
#include "ddsim/spin.hpp"

namespace ddsim {

inline constexpr std::size_t kBlockWidth = 64;

enum class PulseModel { Instantaneous, FiniteDuration };

struct McConfig {
  std::size_t n_trajectories = 10000;
  std::uint64_t master_seed = 0;
  double time_step = 0.01;
  PulseModel pulse_model = PulseModel::Instantaneous;
  double rabi = 0.0;     // omega_0 for FiniteDuration pulses
  unsigned workers = 0;  // 0: one per hardware thread

  void validate() const;
};

/// Delay grids use the step min(time_step, 0.05 / lambda).
double delay_grid_step(const McConfig& cfg, const NoiseParams& noise);

/// Instantaneous pulses: delay d accumulates sign_d * detuning * tau plus the
/// noise integral over its window. HahnEcho ignores theta and detuning.
/// With FiniteDuration configured this forwards to run_mc_finite_pulses and
/// theta is replaced by the tilt of (rabi, detuning).
SignalCurve run_mc(SequenceKind kind, double theta, double detuning, const NoiseParams& noise,
                   std::span<const double> taus, const McConfig& cfg);

/// Pulses last beta / omega_1 and evolve under
///   H = ((s * detuning + f(t)) sigma_z + rabi sigma_x) / 2
/// on time_step sub-intervals, with the noise running through them. Delays
/// keep their nominal length tau between pulse edges.
SignalCurve run_mc_finite_pulses(SequenceKind kind, double detuning, const NoiseParams& noise,
                                 std::span<const double> taus, const McConfig& cfg);

/// <sigma_z> after one finite-pulse sequence driven by a given noise
/// trajectory, which must cover [0, duration of the sequence].
double finite_pulse_signal(SequenceKind kind, double detuning, double rabi, double tau,
                           const NoiseTrajectory& noise, double time_step);

/// Time grid the finite-pulse engine samples noise on for one tau.
std::vector<double> finite_pulse_grid(SequenceKind kind, double detuning, double rabi,
                                      double tau, double time_step, double delay_step);

struct BlochPoint {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 1.0;
};

/// Noiseless Bloch-sphere path through a canonical sequence, with
/// `samples_per_segment` points per pulse and per delay after the initial
/// point. Pulses are swept as continuous rotations about their tilted axes;
/// they take beta / omega_1 with omega_1 = rabi / sin(theta) when rabi > 0,
/// otherwise no time.
std::vector<BlochPoint> bloch_trajectory(SequenceKind kind, double theta, double detuning,
                                         double tau, std::size_t samples_per_segment,
                                         double rabi = 0.0);

/// CSV `t,x,y,z`.
void write_bloch_csv(std::ostream& out, std::span<const BlochPoint> points,
                     std::span<const std::string> comments = {});

/// Closed-form curve in the same shape (stderr 0, n 0).
SignalCurve analytic_curve(SequenceKind kind, double theta, double detuning,
                           const NoiseParams& noise, std::span<const double> taus);

}  // namespace ddsim
