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

#include "ddsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "ddsim/analytic.hpp"
#include "ddsim/fit.hpp"
#include "ddsim/kernels.hpp"
#include "ddsim/montecarlo.hpp"
#include "ddsim/parallel.hpp"

namespace ddsim {

ResidualMap scan_noise_params(const SignalCurve& data, SequenceKind kind, double theta,
                              double detuning, std::span<const double> lambda_grid,
                              std::span<const double> gamma_grid, unsigned workers) {
  if (lambda_grid.empty() || gamma_grid.empty()) {
    throw std::invalid_argument("scan grids must not be empty");
  }
  if (data.size() == 0) throw std::invalid_argument("no data to scan against");
  const std::size_t n = data.size();
  const double mean = std::accumulate(data.means.begin(), data.means.end(), 0.0) / n;
  const kernels::KernelTable& kern = kernels::active();
  const double tss = kern.squared_deviation(data.means.data(), n, mean);
  if (!(tss > 0.0)) throw std::invalid_argument("data are flat; residuals are undefined");

  ResidualMap map;
  map.lambda_grid.assign(lambda_grid.begin(), lambda_grid.end());
  map.gamma_grid.assign(gamma_grid.begin(), gamma_grid.end());
  const std::size_t n_gamma = gamma_grid.size();
  map.residuals.assign(lambda_grid.size() * n_gamma, std::numeric_limits<double>::quiet_NaN());

  parallel_for(map.residuals.size(), workers, [&](std::size_t cell) {
    const NoiseParams noise{lambda_grid[cell / n_gamma], gamma_grid[cell % n_gamma],
                            NoiseKind::OrnsteinUhlenbeck};
    std::vector<double> model(n);
    try {
      noise.validate();
      for (std::size_t i = 0; i < n; ++i) {
        model[i] = expected_signal(kind, theta, detuning, noise, data.taus[i]);
      }
    } catch (const std::exception&) {
      return;
    }
    const double r = kern.squared_distance(data.means.data(), model.data(), n) / tss;
    if (std::isfinite(r)) map.residuals[cell] = r;
  });

  std::size_t best = map.residuals.size();
  for (std::size_t cell = 0; cell < map.residuals.size(); ++cell) {
    const double r = map.residuals[cell];
    if (std::isnan(r)) {
      ++map.missing;
      continue;
    }
    if (best == map.residuals.size() || r < map.residuals[best]) best = cell;
  }
  if (best == map.residuals.size()) {
    throw std::runtime_error("the model could not be evaluated at any grid cell");
  }
  map.argmin_lambda = best / n_gamma;
  map.argmin_gamma = best % n_gamma;
  return map;
}

void write_residual_map_csv(std::ostream& out, const ResidualMap& map,
                            std::span<const std::string> comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "lambda,gamma,residual\n";
  for (std::size_t i = 0; i < map.lambda_grid.size(); ++i) {
    for (std::size_t j = 0; j < map.gamma_grid.size(); ++j) {
      const double r = map.at(i, j);
      out << format_number(map.lambda_grid[i]) << ',' << format_number(map.gamma_grid[j]) << ','
          << (std::isnan(r) ? std::string() : format_number(r)) << '\n';
    }
  }
}

void ReadoutModel::validate() const {
  if (!std::isfinite(u) || !std::isfinite(v) || v < 0.0 || !(u > v)) {
    throw std::invalid_argument("readout needs u > v >= 0 (bright and dark photon counts)");
  }
}

double min_detectable_field(const ReadoutModel& readout, double tau, double gamma_e) {
  readout.validate();
  if (!(tau > 0.0) || !(gamma_e > 0.0)) {
    throw std::invalid_argument("tau and gamma_e must be positive");
  }
  return 1.0 / (3 * kPi * gamma_e * tau * readout.alpha() * std::sqrt(readout.beta()));
}

namespace {

// Maximiser of a unimodal f on [a, b].
template <typename F>
double golden_section_max(F&& f, double a, double b, int iterations = 80) {
  const double ratio = (std::sqrt(5.0) - 1) / 2;
  double x1 = b - ratio * (b - a);
  double x2 = a + ratio * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int i = 0; i < iterations; ++i) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = f(x2);
    }
  }
  return f1 >= f2 ? x1 : x2;
}

// Grid search over `grid` (first strict maximum wins), then golden-section
// refinement between the neighbours of the best node. Returns the better of
// the two.
template <typename F>
std::pair<double, double> grid_then_refine(F&& f, std::span<const double> grid) {
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double v = f(grid[k]);
    if (v > best_value) {
      best_value = v;
      best = k;
    }
  }
  const double lo = grid[best == 0 ? 0 : best - 1];
  const double hi = grid[std::min(best + 1, grid.size() - 1)];
  if (hi > lo) {
    const double x = golden_section_max(f, lo, hi);
    const double v = f(x);
    if (v > best_value) return {x, v};
  }
  return {grid[best], best_value};
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = n == 1 ? a : a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  return out;
}

}  // namespace

double max_bias_slope(double theta, double detuning, const NoiseParams& noise, double tau) {
  if (!(tau > 0.0)) return 0.0;
  // The signal is periodic in epsilon with period 4 pi / tau.
  const std::vector<double> grid = linspace(0.0, 4 * kPi / tau, 721);
  auto slope = [&](double eps) {
    return std::abs(hr_signal_derivative(theta, detuning, BiasParams{eps}, noise, tau));
  };
  return grid_then_refine(slope, grid).second;
}

double numerical_min_detectable_field(const ReadoutModel& readout, double theta,
                                      double detuning, const NoiseParams& noise, double tau,
                                      double gamma_e) {
  readout.validate();
  const double slope = max_bias_slope(theta, detuning, noise, tau);
  if (!(slope > 0.0)) throw std::invalid_argument("signal does not respond to the bias field");
  const double alpha = readout.alpha();
  const double beta = readout.beta();
  return std::sqrt(beta) / (alpha * beta * 2 * kPi * gamma_e * slope);
}

double optimal_theta(const NoiseParams& noise, double detuning, std::span<const double> tau_grid) {
  if (tau_grid.empty()) throw std::invalid_argument("tau grid must not be empty");
  auto objective = [&](double theta) {
    double best = 0.0;
    for (double tau : tau_grid) {
      best = std::max(best, std::abs(hr_signal_derivative(theta, detuning, BiasParams{}, noise, tau)));
    }
    return best;
  };
  std::vector<double> grid(179);
  for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = (k + 1) * (kPi / 2) / 180;
  return grid_then_refine(objective, grid).first;
}

SensitivityResult sensitivity(const NoiseParams& noise, const ReadoutModel& readout,
                              std::optional<double> theta, const SensitivityOptions& options) {
  noise.validate();
  readout.validate();
  if (noise.is_silent()) {
    throw std::invalid_argument("sensitivity needs a finite coherence time (gamma > 0)");
  }
  if (!(options.gamma_e > 0.0)) throw std::invalid_argument("gamma_e must be positive");

  double tau_max = options.tau_max;
  if (tau_max <= 0.0) {
    // Long enough for the slowest (echo-like) terms to decay by ~e^-4.
    double hi = 1e-3;
    while (f1(noise, hi) < 2.0 && hi < 1e6) hi *= 2;
    double lo = hi / 2;
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (lo + hi);
      (f1(noise, mid) < 2.0 ? lo : hi) = mid;
    }
    tau_max = hi;
  }
  std::size_t n_tau = options.n_tau;
  if (n_tau == 0) {
    const double per_period = 10 * tau_max * std::abs(options.detuning) / (2 * kPi);
    n_tau = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(per_period)) + 1, 121, 20001);
  }
  if (n_tau < 6) throw std::invalid_argument("sensitivity needs at least 6 tau points");
  const std::vector<double> taus = linspace(0.0, tau_max, n_tau);
  const std::span<const double> positive(taus.data() + 1, taus.size() - 1);

  SensitivityResult out;
  out.optimal_theta = theta ? *theta : optimal_theta(noise, options.detuning, positive);
  PulseParams{out.optimal_theta, kPi / 2, 1}.validate();

  auto per_root_time = [&](double tau) {
    if (!(tau > 0.0)) return 0.0;
    const double d = hr_signal_derivative(out.optimal_theta, options.detuning, BiasParams{}, noise, tau);
    return std::abs(d) / std::sqrt(2 * tau);
  };
  out.optimal_tau = grid_then_refine(per_root_time, positive).first;
  out.max_slope = std::abs(
      hr_signal_derivative(out.optimal_theta, options.detuning, BiasParams{}, noise, out.optimal_tau));
  out.delta_b_min = numerical_min_detectable_field(readout, out.optimal_theta, options.detuning,
                                                   noise, out.optimal_tau, options.gamma_e);
  out.delta_b_min_formula = min_detectable_field(readout, out.optimal_tau, options.gamma_e);

  SignalCurve hr = analytic_curve(SequenceKind::HahnRamsey, out.optimal_theta, options.detuning, noise, taus);
  const DecayFit fit = fit_decay(with_total_time(hr, SequenceKind::HahnRamsey));
  out.t2_hr = fit.tau_c;
  out.t2_hr_err = fit.tau_c_err;
  out.eta = 1.0 / (3 * kPi * options.gamma_e * readout.alpha() * std::sqrt(readout.beta()) *
                   std::sqrt(out.t2_hr));
  return out;
}

}  // namespace ddsim
