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

#include "ddsim/noise.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ddsim/rng.hpp"
#include "ddsim/spin.hpp"

namespace ddsim {

void NoiseParams::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("noise correlation rate lambda must be positive and finite");
  }
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("noise strength gamma must be non-negative and finite");
  }
}

double correlation(const NoiseParams& p, double dt) {
  const double g = p.strength();
  return g * g * std::exp(-p.lambda * std::abs(dt));
}

double f1(const NoiseParams& p, double tau) {
  const double g = p.strength();
  const double x = p.lambda * tau;
  // x + e^{-x} - 1 loses all digits for small x unless written with expm1.
  return g * g / (p.lambda * p.lambda) * (x + std::expm1(-x));
}

double delta_f(const NoiseParams& p, double tau) {
  const double g = p.strength();
  const double m = std::expm1(-p.lambda * tau);
  return 0.5 * g * g / (p.lambda * p.lambda) * m * m;
}

DephasingConstants dephasing_constants(const NoiseParams& p, double tau) {
  return DephasingConstants{f1(p, tau), delta_f(p, tau)};
}

namespace {

// int_W^inf dw / (w^2 (w^2 + l^2))
double lorentz_tail(double w, double l) {
  const double x = l / w;
  if (x < 0.05) {
    const double x2 = x * x;
    return (1.0 / 3 - x2 / 5 + x2 * x2 / 7 - x2 * x2 * x2 / 9) / (w * w * w);
  }
  return (1.0 / w - std::atan(x) / l) / (l * l);
}

struct Tail {
  double value;
  double bound;
};

// n-th derivative of 1/(w^2 (w^2 + l^2)) = sum_m (-l^2)^m w^{-(4+2m)}, valid
// for l / w well below one.
double h_derivative(double w, double l, int n) {
  const double x2 = (l / w) * (l / w);
  double total = 0.0;
  double coeff = 1.0;
  for (int m = 0; m < 12; ++m) {
    double d = coeff;
    const int p = 4 + 2 * m;
    for (int j = 0; j < n; ++j) d *= -(p + j) / w;
    total += d;
    coeff *= -x2;
  }
  return total / (w * w * w * w);
}

// int_W^inf cos(c w) / (w^2 (w^2 + l^2)) dw.
Tail oscillating_tail(double w, double l, double c) {
  constexpr int kTerms = 8;
  // int e^{icw} h = -e^{icW} sum_n (-1)^n h^(n)(W) / (ic)^{n+1}
  std::complex<double> sum = 0.0;
  std::complex<double> ic_pow = std::complex<double>(0.0, c);
  for (int n = 0; n < kTerms; ++n) {
    const double sign = n % 2 == 0 ? 1.0 : -1.0;
    sum += sign * h_derivative(w, l, n) / ic_pow;
    ic_pow *= std::complex<double>(0.0, c);
  }
  const std::complex<double> value = -std::polar(1.0, c * w) * sum;
  const double bound = std::abs(h_derivative(w, l, kTerms - 1)) / std::pow(c, kTerms);
  return Tail{value.real(), bound};
}

}  // namespace

QuadratureResult chi_filter_integral(FilterKind kind, const NoiseParams& p, double tau) {
  p.validate();
  if (!(tau >= 0.0) || !std::isfinite(tau)) {
    throw std::invalid_argument("tau must be finite and non-negative");
  }
  const double g = p.strength();
  if (tau == 0.0 || g == 0.0) return {};
  const double l = p.lambda;

  // Integrand without prefactor; `k` is the angular frequency multiplying w
  // inside the sine and `power` its exponent.
  const double k = kind == FilterKind::RamseyLike ? tau : tau / 2;
  const int power = kind == FilterKind::HahnLike ? 4 : 2;
  const double prefactor = (kind == FilterKind::HahnLike ? 16.0 : 4.0) * l * g * g / kPi;

  auto integrand = [&](double w) {
    const double s = std::sin(k * w);
    const double s2 = s * s;
    const double filter = power == 4 ? s2 * s2 : s2;
    return filter / (w * w * (w * w + l * l));
  };

  const double w_max = std::max(50.0 * l, 50.0 / tau);
  std::vector<double> breaks{0.0};
  for (double b : {l, 4 * l, 16 * l}) {
    if (b < w_max) breaks.push_back(b);
  }
  const double period = kPi / k;
  for (double b = period; b < w_max; b += period) breaks.push_back(b);
  breaks.push_back(w_max);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  using Quad = boost::math::quadrature::gauss_kronrod<double, 15>;
  double value = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    double panel_error = 0.0;
    value += Quad::integrate(integrand, breaks[i], breaks[i + 1], 12, 1e-11, &panel_error);
    error += panel_error;
  }

  // Tail beyond w_max: sin^2 u = 1/2 - cos(2u)/2, sin^4 u = 3/8 - cos(2u)/2 +
  // cos(4u)/8. The cos(c w) h(w) pieces use the integration-by-parts series;
  // h is completely monotone so the remainder after N terms is at most
  // |h^(N-1)(W)| / c^N.
  double tail_error = 0.0;
  auto oscillating = [&](double c) {
    const Tail t = oscillating_tail(w_max, l, c);
    tail_error += t.bound;
    return t.value;
  };
  double tail;
  if (power == 2) {
    tail = 0.5 * lorentz_tail(w_max, l) - 0.5 * oscillating(2 * k);
  } else {
    tail = 0.375 * lorentz_tail(w_max, l) - 0.5 * oscillating(2 * k) +
           0.125 * oscillating(4 * k);
  }
  value += tail;
  error += tail_error;
  return QuadratureResult{prefactor * value, prefactor * error};
}

double chi_filter(FilterKind kind, const NoiseParams& p, double tau) {
  const QuadratureResult r = chi_filter_integral(kind, p, tau);
  if (!(r.error_estimate <= 1e-8 && r.error_estimate <= 1e-7 * std::abs(r.value)) &&
      r.value != 0.0) {
    throw std::runtime_error("filter-function quadrature did not converge: value " +
                             std::to_string(r.value) + ", error estimate " +
                             std::to_string(r.error_estimate));
  }
  return r.value;
}

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("time grid must not be empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i])) throw std::invalid_argument("time grid must be finite");
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw std::invalid_argument("time grid must be strictly increasing (index " +
                                  std::to_string(i) + ")");
    }
  }
}

NoiseTrajectory sample_ou(const NoiseParams& p, std::span<const double> grid,
                          std::uint64_t seed) {
  p.validate();
  check_grid(grid);
  NoiseTrajectory traj;
  traj.grid.assign(grid.begin(), grid.end());
  traj.values.resize(grid.size());
  traj.seed = seed;
  traj.interpolation = Interpolation::Linear;

  const double g = p.strength();
  Engine engine(seed);
  std::normal_distribution<double> normal;
  double f = g * normal(engine);
  traj.values[0] = f;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double d = grid[k] - grid[k - 1];
    const double decay = std::exp(-p.lambda * d);
    const double scale = g * std::sqrt(-std::expm1(-2 * p.lambda * d));
    // Same rounding as kernels::OuStep so engine lanes replay this path.
    f = std::fma(decay, f, scale * normal(engine));
    traj.values[k] = f;
  }
  return traj;
}

NoiseTrajectory sample_renewal(const NoiseParams& p, std::span<const double> grid,
                               std::uint64_t seed) {
  p.validate();
  check_grid(grid);
  const double g = p.strength();
  Engine engine(seed);
  std::normal_distribution<double> normal;
  std::exponential_distribution<double> wait(p.lambda);

  NoiseTrajectory traj;
  traj.seed = seed;
  traj.interpolation = Interpolation::Hold;
  // Draw order: initial value, then (waiting time, new value) per jump.
  double value = g * normal(engine);
  double next_jump = grid.front() + wait(engine);
  traj.grid.push_back(grid.front());
  traj.values.push_back(value);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double t = grid[i];
    while (next_jump <= t) {
      value = g * normal(engine);
      if (next_jump < t) {
        traj.grid.push_back(next_jump);
        traj.values.push_back(value);
      }
      next_jump += wait(engine);
    }
    traj.grid.push_back(t);
    traj.values.push_back(value);
  }
  return traj;
}

NoiseTrajectory sample_noise(const NoiseParams& p, std::span<const double> grid,
                             std::uint64_t seed) {
  switch (p.kind) {
    case NoiseKind::OrnsteinUhlenbeck: return sample_ou(p, grid, seed);
    case NoiseKind::CompoundPoissonRenewal: return sample_renewal(p, grid, seed);
    case NoiseKind::None: break;
  }
  check_grid(grid);
  NoiseTrajectory traj;
  traj.grid.assign(grid.begin(), grid.end());
  traj.values.assign(grid.size(), 0.0);
  traj.seed = seed;
  return traj;
}

double integrate_trajectory(const NoiseTrajectory& traj, double t0, double t1) {
  if (traj.grid.empty() || traj.grid.size() != traj.values.size()) {
    throw std::invalid_argument("malformed noise trajectory");
  }
  if (t1 < t0) return -integrate_trajectory(traj, t1, t0);
  const double lo = traj.grid.front();
  const double hi = traj.grid.back();
  const double slack = 1e-12 * std::max(1.0, std::abs(hi));
  if (t0 < lo - slack || t1 > hi + slack) {
    throw std::out_of_range("integration window [" + std::to_string(t0) + ", " +
                            std::to_string(t1) + "] outside trajectory span [" +
                            std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  t0 = std::clamp(t0, lo, hi);
  t1 = std::clamp(t1, lo, hi);
  if (t0 == t1) return 0.0;

  const auto& grid = traj.grid;
  const auto& values = traj.values;
  auto value_at = [&](std::size_t cell, double t) {
    if (traj.interpolation == Interpolation::Hold) return values[cell];
    const double w = (t - grid[cell]) / (grid[cell + 1] - grid[cell]);
    return values[cell] + w * (values[cell + 1] - values[cell]);
  };
  // Cell i spans [grid[i], grid[i+1]).
  std::size_t cell = static_cast<std::size_t>(
      std::upper_bound(grid.begin(), grid.end(), t0) - grid.begin());
  cell = cell == 0 ? 0 : cell - 1;
  double total = 0.0;
  double a = t0;
  while (a < t1 && cell + 1 < grid.size()) {
    const double b = std::min(t1, grid[cell + 1]);
    if (b > a) {
      if (traj.interpolation == Interpolation::Hold) {
        total += values[cell] * (b - a);
      } else {
        total += 0.5 * (b - a) * (value_at(cell, a) + value_at(cell, b));
      }
    }
    a = b;
    ++cell;
  }
  return total;
}

void write_trajectory_csv(std::ostream& out, const NoiseTrajectory& traj) {
  auto emit = [&](double x) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    out.write(buf, end - buf);
  };
  out << "t,f\n";
  for (std::size_t i = 0; i < traj.grid.size(); ++i) {
    emit(traj.grid[i]);
    out << ',';
    emit(traj.values[i]);
    out << '\n';
  }
}

}  // namespace ddsim
