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

#include "ddsim/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include "ddsim/analytic.hpp"
#include "ddsim/kernels.hpp"
#include "ddsim/parallel.hpp"
#include "ddsim/rng.hpp"

namespace ddsim {

void McConfig::validate() const {
  if (n_trajectories == 0) throw std::invalid_argument("n_trajectories must be at least 1");
  if (!(time_step > 0.0) || !std::isfinite(time_step)) {
    throw std::invalid_argument("time_step must be positive and finite");
  }
  if (pulse_model == PulseModel::FiniteDuration && !(rabi > 0.0 && std::isfinite(rabi))) {
    throw std::invalid_argument("finite-duration pulses need a positive Rabi frequency");
  }
}

double delay_grid_step(const McConfig& cfg, const NoiseParams& noise) {
  return std::min(cfg.time_step, 0.05 / noise.lambda);
}

namespace {

// Mean and centred second moment of a group of samples.
struct Moments {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;
};

Moments merge(const Moments& a, const Moments& b) {
  const double n = a.count + b.count;
  const double delta = b.mean - a.mean;
  Moments out;
  out.count = n;
  out.mean = a.mean + delta * (b.count / n);
  out.m2 = a.m2 + b.m2 + delta * delta * (a.count * b.count / n);
  return out;
}

Moments pairwise(std::span<const Moments> parts) {
  if (parts.size() == 1) return parts[0];
  const std::size_t half = parts.size() / 2;
  return merge(pairwise(parts.first(half)), pairwise(parts.subspan(half)));
}

Moments block_moments(const kernels::KernelTable& k, const double* x, std::size_t n) {
  Moments m;
  m.count = static_cast<double>(n);
  m.mean = k.lane_sum(x, n) / m.count;
  m.m2 = k.squared_deviation(x, n, m.mean);
  return m;
}

void check_inputs(SequenceKind kind, double theta, double detuning, const NoiseParams& noise,
                  std::span<const double> taus, const McConfig& cfg) {
  if (kind == SequenceKind::Custom) {
    throw std::invalid_argument("Monte Carlo runs need a canonical sequence kind");
  }
  noise.validate();
  cfg.validate();
  if (!std::isfinite(detuning)) throw std::invalid_argument("detuning must be finite");
  if (kind != SequenceKind::HahnEcho && cfg.pulse_model == PulseModel::Instantaneous) {
    PulseParams{theta, kPi / 2, 1}.validate();
  }
  if (taus.empty()) throw std::invalid_argument("tau grid must not be empty");
  for (double t : taus) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
      throw std::invalid_argument("tau values must be finite and non-negative");
    }
  }
}

// Pulses and delay windows of one canonical sequence at one tau.
struct CompiledSequence {
  std::vector<Matrix2> pulses;  // delays + 1, time order
  std::vector<double> base_phases;
  std::vector<std::pair<double, double>> windows;
  std::vector<std::pair<std::size_t, std::size_t>> grid_index;
};

CompiledSequence compile(SequenceKind kind, double theta, double detuning, double tau) {
  const PulseSequence seq = PulseSequence::of_kind(kind, theta, tau);
  CompiledSequence c;
  for (const auto& e : seq.elements) {
    if (const auto* p = std::get_if<PulseParams>(&e)) c.pulses.push_back(rotation_matrix(*p));
  }
  c.base_phases = seq.noiseless_phases(kind == SequenceKind::HahnEcho ? 0.0 : detuning);
  c.windows = seq.delay_windows();
  return c;
}

double signal_from_phases(const CompiledSequence& c, const double* noise_phase) {
  Vector2 psi(1.0, 0.0);
  for (std::size_t d = 0; d < c.base_phases.size(); ++d) {
    psi = c.pulses[d] * psi;
    const double phase = c.base_phases[d] + noise_phase[d];
    const Complex rot = std::polar(1.0, -phase / 2);
    psi(0) *= rot;
    psi(1) *= std::conj(rot);
  }
  psi = c.pulses.back() * psi;
  return std::norm(psi(0)) - std::norm(psi(1));
}

std::size_t snap_index(const std::vector<double>& grid, double t) {
  const auto it = std::lower_bound(grid.begin(), grid.end(), t - 1e-12 * std::max(1.0, t));
  if (it == grid.end() || std::abs(*it - t) > 1e-9 * std::max(1.0, t)) {
    throw std::logic_error("query time missing from the integration grid");
  }
  return static_cast<std::size_t>(it - grid.begin());
}

std::vector<double> merge_times(std::vector<double> times) {
  std::sort(times.begin(), times.end());
  std::vector<double> out;
  for (double t : times) {
    if (out.empty() || t - out.back() > 1e-12 * std::max(1.0, t)) out.push_back(t);
  }
  return out;
}

SignalCurve curve_skeleton(std::span<const double> taus, std::size_t n) {
  SignalCurve curve;
  curve.taus.assign(taus.begin(), taus.end());
  curve.means.assign(taus.size(), 0.0);
  curve.stderrs.assign(taus.size(), 0.0);
  curve.n = n;
  return curve;
}

// Reduces per-block moments [block][tau] into the curve.
void finish_curve(SignalCurve& curve, const std::vector<Moments>& blocks, std::size_t n_blocks) {
  const std::size_t n_tau = curve.taus.size();
  std::vector<Moments> column(n_blocks);
  for (std::size_t j = 0; j < n_tau; ++j) {
    for (std::size_t b = 0; b < n_blocks; ++b) column[b] = blocks[b * n_tau + j];
    const Moments total = pairwise(column);
    curve.means[j] = total.mean;
    curve.stderrs[j] =
        total.count > 1 ? std::sqrt(total.m2 / (total.count - 1) / total.count) : 0.0;
  }
  if (curve.n == 1) {
    curve.warnings.push_back("single trajectory: standard errors are not defined and set to 0");
  }
}

SignalCurve run_instantaneous(SequenceKind kind, double theta, double detuning,
                              const NoiseParams& noise, std::span<const double> taus,
                              const McConfig& cfg) {
  const std::size_t n_tau = taus.size();
  std::vector<CompiledSequence> compiled;
  compiled.reserve(n_tau);
  for (double tau : taus) compiled.push_back(compile(kind, theta, detuning, tau));

  SignalCurve curve = curve_skeleton(taus, cfg.n_trajectories);
  if (noise.is_silent()) {
    for (std::size_t j = 0; j < n_tau; ++j) {
      const std::vector<double> zeros(compiled[j].base_phases.size(), 0.0);
      curve.means[j] = signal_from_phases(compiled[j], zeros.data());
    }
    return curve;
  }

  std::vector<double> query{0.0};
  for (const auto& c : compiled) {
    for (const auto& [a, b] : c.windows) {
      query.push_back(a);
      query.push_back(b);
    }
  }
  query = merge_times(std::move(query));
  const double t_max = query.back();

  std::vector<double> grid;
  if (noise.kind == NoiseKind::OrnsteinUhlenbeck && t_max > 0.0) {
    const double h = delay_grid_step(cfg, noise);
    const auto cells = static_cast<std::size_t>(std::ceil(t_max / h - 1e-9));
    std::vector<double> points = query;
    for (std::size_t k = 0; k <= cells; ++k) {
      points.push_back(t_max * static_cast<double>(k) / static_cast<double>(cells));
    }
    grid = merge_times(std::move(points));
  } else {
    grid = query;
  }
  for (auto& c : compiled) {
    for (const auto& [a, b] : c.windows) {
      c.grid_index.emplace_back(snap_index(grid, a), snap_index(grid, b));
    }
  }

  const double g = noise.strength();
  std::vector<kernels::OuStep> steps(grid.size() - 1);
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double d = grid[k + 1] - grid[k];
    steps[k].decay = std::exp(-noise.lambda * d);
    steps[k].scale = g * std::sqrt(-std::expm1(-2 * noise.lambda * d));
    steps[k].half_width = 0.5 * d;
  }

  const kernels::KernelTable& kern = kernels::active();
  const std::size_t n = cfg.n_trajectories;
  const std::size_t n_blocks = (n + kBlockWidth - 1) / kBlockWidth;
  std::vector<Moments> blocks(n_blocks * n_tau);

  parallel_for(n_blocks, cfg.workers, [&](std::size_t block) {
    const std::size_t first = block * kBlockWidth;
    const std::size_t width = std::min(kBlockWidth, n - first);
    const std::size_t n_points = grid.size();
    std::vector<double> cumulative(n_points * width, 0.0);

    if (noise.kind == NoiseKind::OrnsteinUhlenbeck) {
      std::vector<double> normals(steps.size() * width);
      std::vector<double> value(width);
      for (std::size_t lane = 0; lane < width; ++lane) {
        Engine engine(child_seed(cfg.master_seed, first + lane));
        std::normal_distribution<double> normal;
        value[lane] = g * normal(engine);
        for (std::size_t k = 0; k < steps.size(); ++k) normals[k * width + lane] = normal(engine);
      }
      kern.ou_integrate(steps, normals.data(), width, value.data(), cumulative.data());
    } else {
      for (std::size_t lane = 0; lane < width; ++lane) {
        const NoiseTrajectory traj =
            sample_renewal(noise, grid, child_seed(cfg.master_seed, first + lane));
        double running = 0.0;
        for (std::size_t k = 1; k < n_points; ++k) {
          running += integrate_trajectory(traj, grid[k - 1], grid[k]);
          cumulative[k * width + lane] = running;
        }
      }
    }

    std::vector<double> signals(width);
    double noise_phase[2] = {0.0, 0.0};
    for (std::size_t j = 0; j < n_tau; ++j) {
      const CompiledSequence& c = compiled[j];
      for (std::size_t lane = 0; lane < width; ++lane) {
        for (std::size_t d = 0; d < c.grid_index.size(); ++d) {
          const auto [a, b] = c.grid_index[d];
          noise_phase[d] = cumulative[b * width + lane] - cumulative[a * width + lane];
        }
        signals[lane] = signal_from_phases(c, noise_phase);
      }
      blocks[block * n_tau + j] = block_moments(kern, signals.data(), width);
    }
  });

  finish_curve(curve, blocks, n_blocks);
  return curve;
}

struct Segment {
  double start = 0.0;
  double end = 0.0;
  bool pulse = false;
  int sign = +1;
};

std::vector<Segment> finite_segments(SequenceKind kind, double detuning, double rabi,
                                     double tau) {
  const double delta = kind == SequenceKind::HahnEcho ? 0.0 : detuning;
  const double omega1 = std::hypot(rabi, delta);
  const TiltAngle tilt = tilt_angle(DrivingParams{rabi, delta});
  const PulseSequence seq = PulseSequence::of_kind(kind, tilt.theta, tau);
  std::vector<Segment> segments;
  double t = 0.0;
  int frame = +1;
  for (const auto& e : seq.elements) {
    Segment s;
    s.start = t;
    if (const auto* p = std::get_if<PulseParams>(&e)) {
      s.pulse = true;
      frame = p->detuning_sign;
      t += p->beta / omega1;
    } else {
      t += std::get<Delay>(e).duration;
    }
    s.sign = frame;
    s.end = t;
    segments.push_back(s);
  }
  return segments;
}

std::size_t substeps(double length, double step) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(length / step - 1e-9)));
}

}  // namespace

std::vector<double> finite_pulse_grid(SequenceKind kind, double detuning, double rabi,
                                      double tau, double time_step, double delay_step) {
  std::vector<double> grid{0.0};
  for (const Segment& s : finite_segments(kind, detuning, rabi, tau)) {
    const double len = s.end - s.start;
    if (len <= 0.0) continue;
    const std::size_t n = substeps(len, s.pulse ? time_step : delay_step);
    for (std::size_t k = 1; k <= n; ++k) {
      grid.push_back(k == n ? s.end : s.start + len * static_cast<double>(k) / n);
    }
  }
  return merge_times(std::move(grid));
}

double finite_pulse_signal(SequenceKind kind, double detuning, double rabi, double tau,
                           const NoiseTrajectory& noise, double time_step) {
  const double delta = kind == SequenceKind::HahnEcho ? 0.0 : detuning;
  Vector2 psi(1.0, 0.0);
  for (const Segment& s : finite_segments(kind, detuning, rabi, tau)) {
    const double len = s.end - s.start;
    if (len <= 0.0) continue;
    if (!s.pulse) {
      const double phase = s.sign * delta * len + integrate_trajectory(noise, s.start, s.end);
      psi = free_phase_unitary(phase) * psi;
      continue;
    }
    const std::size_t n = substeps(len, time_step);
    for (std::size_t k = 0; k < n; ++k) {
      const double a = s.start + len * static_cast<double>(k) / n;
      const double b = k + 1 == n ? s.end : s.start + len * static_cast<double>(k + 1) / n;
      const double f_mean = integrate_trajectory(noise, a, b) / (b - a);
      const double wz = s.sign * delta + f_mean;
      const double w = std::hypot(rabi, wz);
      psi = axis_rotation(rabi / w, 0.0, wz / w, w * (b - a)) * psi;
    }
  }
  return std::norm(psi(0)) - std::norm(psi(1));
}

SignalCurve run_mc_finite_pulses(SequenceKind kind, double detuning, const NoiseParams& noise,
                                 std::span<const double> taus, const McConfig& cfg) {
  McConfig finite = cfg;
  finite.pulse_model = PulseModel::FiniteDuration;
  check_inputs(kind, kPi / 2, detuning, noise, taus, finite);

  const std::size_t n_tau = taus.size();
  const double delay_step = delay_grid_step(cfg, noise);
  std::vector<std::vector<double>> grids;
  for (double tau : taus) {
    grids.push_back(finite_pulse_grid(kind, detuning, cfg.rabi, tau, cfg.time_step, delay_step));
  }

  SignalCurve curve = curve_skeleton(taus, cfg.n_trajectories);
  for (const Segment& s : finite_segments(kind, detuning, cfg.rabi, taus[0])) {
    const double len = s.end - s.start;
    if (s.pulse && len / cfg.time_step < 10.0) {
      curve.warnings.push_back("pulse of duration " + format_number(len) +
                               " is resolved by fewer than 10 time steps");
      break;
    }
  }

  if (noise.is_silent()) {
    for (std::size_t j = 0; j < n_tau; ++j) {
      const NoiseTrajectory zero = sample_noise(NoiseParams::none(), grids[j], 0);
      curve.means[j] = finite_pulse_signal(kind, detuning, cfg.rabi, taus[j], zero, cfg.time_step);
    }
    return curve;
  }

  const kernels::KernelTable& kern = kernels::active();
  const std::size_t n = cfg.n_trajectories;
  const std::size_t n_blocks = (n + kBlockWidth - 1) / kBlockWidth;
  std::vector<Moments> blocks(n_blocks * n_tau);
  parallel_for(n_blocks, cfg.workers, [&](std::size_t block) {
    const std::size_t first = block * kBlockWidth;
    const std::size_t width = std::min(kBlockWidth, n - first);
    std::vector<double> signals(width);
    for (std::size_t j = 0; j < n_tau; ++j) {
      for (std::size_t lane = 0; lane < width; ++lane) {
        const std::uint64_t seed = child_seed(child_seed(cfg.master_seed, first + lane), j);
        const NoiseTrajectory traj = sample_noise(noise, grids[j], seed);
        signals[lane] =
            finite_pulse_signal(kind, detuning, cfg.rabi, taus[j], traj, cfg.time_step);
      }
      blocks[block * n_tau + j] = block_moments(kern, signals.data(), width);
    }
  });
  finish_curve(curve, blocks, n_blocks);
  return curve;
}

SignalCurve run_mc(SequenceKind kind, double theta, double detuning, const NoiseParams& noise,
                   std::span<const double> taus, const McConfig& cfg) {
  if (cfg.pulse_model == PulseModel::FiniteDuration) {
    SignalCurve curve = run_mc_finite_pulses(kind, detuning, noise, taus, cfg);
    if (kind != SequenceKind::HahnEcho) {
      const double derived = tilt_angle(DrivingParams{cfg.rabi, detuning}).theta;
      if (std::abs(derived - theta) > 1e-9) {
        curve.warnings.push_back("finite pulses use the tilt of (rabi, detuning) = " +
                                 format_number(derived) + " rad instead of the requested theta");
      }
    }
    return curve;
  }
  check_inputs(kind, theta, detuning, noise, taus, cfg);
  return run_instantaneous(kind, theta, detuning, noise, taus, cfg);
}

std::vector<BlochPoint> bloch_trajectory(SequenceKind kind, double theta, double detuning,
                                         double tau, std::size_t samples_per_segment,
                                         double rabi) {
  if (samples_per_segment == 0) throw std::invalid_argument("samples_per_segment must be >= 1");
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be >= 0");
  if (kind == SequenceKind::HahnEcho) {
    theta = kPi / 2;
    detuning = 0.0;
  }
  PulseParams{theta, kPi / 2, 1}.validate();
  const PulseSequence seq = PulseSequence::of_kind(kind, theta, tau);
  const double omega1 = rabi > 0.0 ? rabi / std::sin(theta) : 0.0;

  std::vector<BlochPoint> points;
  SpinState state = SpinState::up();
  double t = 0.0;
  auto record = [&](const SpinState& s, double time) {
    const BlochVector v = bloch_vector(s);
    points.push_back(BlochPoint{time, v.x, v.y, v.z});
  };
  record(state, t);
  const auto steps = static_cast<double>(samples_per_segment);
  int frame = +1;
  for (const auto& e : seq.elements) {
    if (const auto* p = std::get_if<PulseParams>(&e)) {
      frame = p->detuning_sign;
      const double duration = omega1 > 0.0 ? p->beta / omega1 : 0.0;
      for (std::size_t k = 1; k <= samples_per_segment; ++k) {
        PulseParams partial = *p;
        partial.beta = p->beta * static_cast<double>(k) / steps;
        record(SpinState{rotation_matrix(partial) * state.amplitudes},
               t + duration * static_cast<double>(k) / steps);
      }
      state = SpinState{rotation_matrix(*p) * state.amplitudes};
      t += duration;
    } else {
      const double duration = std::get<Delay>(e).duration;
      const double phase = frame * detuning * duration;
      for (std::size_t k = 1; k <= samples_per_segment; ++k) {
        const double frac = static_cast<double>(k) / steps;
        record(SpinState{free_phase_unitary(phase * frac) * state.amplitudes},
               t + duration * frac);
      }
      state = SpinState{free_phase_unitary(phase) * state.amplitudes};
      t += duration;
    }
  }
  return points;
}

void write_bloch_csv(std::ostream& out, std::span<const BlochPoint> points,
                     std::span<const std::string> comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "t,x,y,z\n";
  for (const BlochPoint& p : points) {
    out << format_number(p.t) << ',' << format_number(p.x) << ',' << format_number(p.y) << ','
        << format_number(p.z) << '\n';
  }
}

SignalCurve analytic_curve(SequenceKind kind, double theta, double detuning,
                           const NoiseParams& noise, std::span<const double> taus) {
  SignalCurve curve = curve_skeleton(taus, 0);
  for (std::size_t j = 0; j < taus.size(); ++j) {
    curve.means[j] = expected_signal(kind, theta, detuning, noise, taus[j]);
  }
  return curve;
}

}  // namespace ddsim
