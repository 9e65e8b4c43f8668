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

// Classical dephasing noise f(t) with correlation Gamma^2 exp(-lambda |dt|).

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace ddsim {

enum class NoiseKind { None, OrnsteinUhlenbeck, CompoundPoissonRenewal };

struct NoiseParams {
  double lambda = 1.0;  // correlation rate, 1/time
  double gamma = 0.0;   // rms amplitude, rad/time (variance gamma^2)
  NoiseKind kind = NoiseKind::OrnsteinUhlenbeck;

  static NoiseParams none() { return NoiseParams{1.0, 0.0, NoiseKind::None}; }

  // lambda > 0 and finite, gamma >= 0 and finite.
  void validate() const;
  // Gamma with kind == None mapped to zero.
  double strength() const { return kind == NoiseKind::None ? 0.0 : gamma; }
  bool is_silent() const { return strength() == 0.0; }
};

enum class Interpolation {
  Linear,  // trapezoid between samples (OU)
  Hold,    // value held until the next sample (renewal)
};

struct NoiseTrajectory {
  std::vector<double> grid;
  std::vector<double> values;
  std::uint64_t seed = 0;
  Interpolation interpolation = Interpolation::Linear;
};

struct DephasingConstants {
  double f1 = 0.0;
  double delta_f = 0.0;
};

double correlation(const NoiseParams& p, double dt);

/// F1(tau) = (Gamma/lambda)^2 (lambda tau + exp(-lambda tau) - 1), the half
/// double integral of the correlation over [0, tau]^2.
double f1(const NoiseParams& p, double tau);

/// dF(tau) = Gamma^2 / (2 lambda^2) (1 - exp(-lambda tau))^2, the half
/// integral over [0, tau] x [tau, 2 tau].
double delta_f(const NoiseParams& p, double tau);

DephasingConstants dephasing_constants(const NoiseParams& p, double tau);

enum class FilterKind {
  RamseyLike,  // (4 lambda Gamma^2 / pi) int sin^2(w tau)   / (w^2 (w^2 + lambda^2))
  HalfPeriod,  // (4 lambda Gamma^2 / pi) int sin^2(w tau/2) / (w^2 (w^2 + lambda^2))
  HahnLike,    // (16 lambda Gamma^2 / pi) int sin^4(w tau/2) / (w^2 (w^2 + lambda^2))
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// Decay exponent of one filter function, integrated numerically over
/// w in (0, w_max] with w_max = max(50 lambda, 50 / tau), plus the tail
/// beyond w_max in closed form.
QuadratureResult chi_filter_integral(FilterKind kind, const NoiseParams& p, double tau);

/// As chi_filter_integral; throws std::runtime_error if the error estimate
/// exceeds 1e-8 absolute (reported in the message).
double chi_filter(FilterKind kind, const NoiseParams& p, double tau);

/// Stationary OU process sampled with the exact transition kernel:
/// F(t0) ~ N(0, G^2), F(t+d) = F(t) e^{-l d} + N(0, G^2 (1 - e^{-2 l d})).
NoiseTrajectory sample_ou(const NoiseParams& p, std::span<const double> grid,
                          std::uint64_t seed);

/// Piecewise-constant process redrawn from N(0, G^2) at the events of a
/// rate-lambda Poisson process. The returned grid is the requested grid
/// merged with the jump times, so Hold integration is exact.
NoiseTrajectory sample_renewal(const NoiseParams& p, std::span<const double> grid,
                               std::uint64_t seed);

/// Dispatches on p.kind; kind None yields an all-zero trajectory.
NoiseTrajectory sample_noise(const NoiseParams& p, std::span<const double> grid,
                             std::uint64_t seed);

/// Integral of f over [t0, t1] using the trajectory's interpolation rule.
/// Throws std::out_of_range outside the sampled span.
double integrate_trajectory(const NoiseTrajectory& traj, double t0, double t1);

/// Two-column CSV with header `t,f`.
void write_trajectory_csv(std::ostream& out, const NoiseTrajectory& traj);

// Throws std::invalid_argument unless the grid is non-empty, finite and
// strictly increasing.
void check_grid(std::span<const double> grid);

}  // namespace ddsim
