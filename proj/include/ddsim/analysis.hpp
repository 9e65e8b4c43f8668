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

// Residual maps over (lambda, Gamma) and shot-noise-limited magnetometry.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ddsim/curve.hpp"
#include "ddsim/noise.hpp"
#include "ddsim/spin.hpp"

namespace ddsim {

// NV electron gyromagnetic ratio in MHz/gauss, i.e. 1/(us gauss) with times
// in microseconds.
inline constexpr double kNvGyromagneticRatio = 2.8025;

struct ResidualMap {
  std::vector<double> lambda_grid;
  std::vector<double> gamma_grid;
  // Row-major, one row per lambda: ||data - model||^2 / ||data - mean||^2.
  // NaN where the model could not be evaluated.
  std::vector<double> residuals;
  std::size_t argmin_lambda = 0;
  std::size_t argmin_gamma = 0;
  std::size_t missing = 0;

  double at(std::size_t i, std::size_t j) const { return residuals[i * gamma_grid.size() + j]; }
  double best_lambda() const { return lambda_grid[argmin_lambda]; }
  double best_gamma() const { return gamma_grid[argmin_gamma]; }
  double best_residual() const { return at(argmin_lambda, argmin_gamma); }
};

/// Compares `data` against the OU closed form of `kind` at every grid cell.
/// The argmin is the first minimum in row-major order.
ResidualMap scan_noise_params(const SignalCurve& data, SequenceKind kind, double theta,
                              double detuning, std::span<const double> lambda_grid,
                              std::span<const double> gamma_grid, unsigned workers = 0);

/// CSV `lambda,gamma,residual`, blank residual for missing cells.
void write_residual_map_csv(std::ostream& out, const ResidualMap& map,
                            std::span<const std::string> comments = {});

/// Mean photon counts per shot for the bright (u) and dark (v) state.
struct ReadoutModel {
  double u = 1.0;
  double v = 0.0;

  double alpha() const { return (u - v) / (u + v); }
  double beta() const { return (u + v) / 2; }
  void validate() const;
};

/// 1 / (3 pi gamma_e tau alpha sqrt(beta)).
double min_detectable_field(const ReadoutModel& readout, double tau,
                            double gamma_e = kNvGyromagneticRatio);

/// max over epsilon of |d<sigma_z>/d epsilon| at fixed tau.
double max_bias_slope(double theta, double detuning, const NoiseParams& noise, double tau);

/// sqrt(beta) / (alpha beta 2 pi gamma_e max|d<sigma_z>/d epsilon|): shot
/// noise over the steepest slope of the mean count rate with field.
double numerical_min_detectable_field(const ReadoutModel& readout, double theta,
                                      double detuning, const NoiseParams& noise, double tau,
                                      double gamma_e = kNvGyromagneticRatio);

/// Tilt in (0, pi/2) maximising max_tau |d<sigma_z>/d epsilon| at epsilon = 0.
/// 179-point grid, golden-section refinement around the best cell, ties
/// resolved toward smaller theta.
double optimal_theta(const NoiseParams& noise, double detuning, std::span<const double> tau_grid);

struct SensitivityOptions {
  double detuning = 2 * kPi;
  double gamma_e = kNvGyromagneticRatio;
  double tau_max = 0.0;  // 0: long enough for the echo-like terms to decay
  std::size_t n_tau = 0;  // 0: chosen from tau_max and the detuning
};

struct SensitivityResult {
  double optimal_theta = 0.0;
  double optimal_tau = 0.0;
  double max_slope = 0.0;            // |d<sigma_z>/d epsilon| at optimal_tau
  double delta_b_min = 0.0;          // numerical, decay included
  double delta_b_min_formula = 0.0;  // 1 / (3 pi gamma_e tau alpha sqrt(beta))
  double t2_hr = 0.0;
  double t2_hr_err = 0.0;
  double eta = 0.0;  // 1 / (3 pi gamma_e alpha sqrt(beta) sqrt(T2,HR))
};

/// theta = nullopt picks optimal_theta. The operating tau maximises
/// |slope| / sqrt(2 tau); T2,HR is the Gaussian-envelope fit to the closed-
/// form Hahn-Ramsey curve against total free-evolution time.
SensitivityResult sensitivity(const NoiseParams& noise, const ReadoutModel& readout,
                              std::optional<double> theta, const SensitivityOptions& options = {});

}  // namespace ddsim
