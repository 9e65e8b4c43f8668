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

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "ddsim/analysis.hpp"
#include "ddsim/analytic.hpp"
#include "ddsim/montecarlo.hpp"

using namespace ddsim;

namespace {

const NoiseParams kReference{2.5, 2 * kPi * 0.1, NoiseKind::OrnsteinUhlenbeck};

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = a + (b - a) * i / (n - 1);
  return t;
}

double slope_objective(double theta, const NoiseParams& noise, double delta,
                       const std::vector<double>& taus) {
  double best = 0.0;
  for (double t : taus) {
    best = std::max(best, std::abs(hr_signal_derivative(theta, delta, {}, noise, t)));
  }
  return best;
}

}  // namespace

TEST_CASE("scan recovers noiseless truth exactly") {
  const auto lambdas = linspace(0.5, 5.0, 10);
  const auto gammas = linspace(0.2, 1.6, 15);
  const NoiseParams truth{lambdas[4], gammas[5], NoiseKind::OrnsteinUhlenbeck};
  for (auto kind : {SequenceKind::HahnRamsey, SequenceKind::Ramsey}) {
    const auto data = analytic_curve(kind, 0.2 * kPi, 2 * kPi, truth, linspace(0.0, 6.0, 60));
    const ResidualMap map = scan_noise_params(data, kind, 0.2 * kPi, 2 * kPi, lambdas, gammas, 1);
    CHECK(map.argmin_lambda == 4);
    CHECK(map.argmin_gamma == 5);
    CHECK(map.best_residual() < 1e-20);
    CHECK(map.missing == 0);
    double smallest = INFINITY;
    for (double r : map.residuals) {
      CHECK(r >= 0.0);
      smallest = std::min(smallest, r);
    }
    CHECK(map.best_residual() == smallest);
    const ResidualMap wide =
        scan_noise_params(data, kind, 0.2 * kPi, 2 * kPi, lambdas, gammas, 4);
    CHECK(wide.residuals == map.residuals);
  }
}

TEST_CASE("scan under small noise lands within one cell of the truth") {
  const auto lambdas = linspace(0.5, 5.0, 10);
  const auto gammas = linspace(0.2, 1.6, 15);
  const NoiseParams truth{lambdas[4], gammas[5], NoiseKind::OrnsteinUhlenbeck};
  const auto clean =
      analytic_curve(SequenceKind::HahnRamsey, 0.2 * kPi, 2 * kPi, truth, linspace(0.0, 6.0, 60));
  int hits = 0;
  for (int seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.01);
    SignalCurve data = clean;
    for (double& m : data.means) m += noise(rng);
    const ResidualMap map =
        scan_noise_params(data, SequenceKind::HahnRamsey, 0.2 * kPi, 2 * kPi, lambdas, gammas, 1);
    const long di = static_cast<long>(map.argmin_lambda) - 4;
    const long dj = static_cast<long>(map.argmin_gamma) - 5;
    if (std::abs(di) <= 1 && std::abs(dj) <= 1) ++hits;
  }
  CHECK(hits >= 19);
}

TEST_CASE("noiseless data leave lambda unidentified") {
  const auto lambdas = linspace(0.5, 5.0, 6);
  const std::vector<double> gammas{0.0, 0.3, 0.6};
  const NoiseParams quiet{2.0, 0.0, NoiseKind::OrnsteinUhlenbeck};
  const auto data =
      analytic_curve(SequenceKind::HahnRamsey, 0.2 * kPi, 2 * kPi, quiet, linspace(0.0, 4.0, 30));
  const ResidualMap map =
      scan_noise_params(data, SequenceKind::HahnRamsey, 0.2 * kPi, 2 * kPi, lambdas, gammas, 1);
  for (std::size_t i = 0; i < lambdas.size(); ++i) CHECK(map.at(i, 0) == map.at(0, 0));
  CHECK(map.argmin_lambda == 0);
  CHECK(map.argmin_gamma == 0);
}

TEST_CASE("scan rejects empty grids and writes CSV") {
  const auto data =
      analytic_curve(SequenceKind::Ramsey, kPi / 2, 1.0, kReference, linspace(0.0, 2.0, 10));
  const std::vector<double> empty;
  const std::vector<double> one{1.0};
  CHECK_THROWS(scan_noise_params(data, SequenceKind::Ramsey, kPi / 2, 1.0, empty, one));
  CHECK_THROWS(scan_noise_params(data, SequenceKind::Ramsey, kPi / 2, 1.0, one, empty));
  const std::vector<double> lambdas{-1.0, 2.5};
  const ResidualMap map = scan_noise_params(data, SequenceKind::Ramsey, kPi / 2, 1.0, lambdas,
                                            std::vector<double>{0.5, 0.6283185307179586}, 1);
  CHECK(map.missing == 2);
  CHECK(std::isnan(map.at(0, 0)));
  CHECK(map.argmin_lambda == 1);
  CHECK(map.argmin_gamma == 1);
  std::ostringstream os;
  write_residual_map_csv(os, map);
  const std::string csv = os.str();
  CHECK(csv.rfind("lambda,gamma,residual\n", 0) == 0);
  CHECK(csv.find("-1,0.5,\n") != std::string::npos);
}

TEST_CASE("minimum detectable field formula") {
  const ReadoutModel unit{1.0, 0.0};
  // u = 1, v = 0 gives alpha = 1 and beta = 1/2; u = 2 gives beta = 1.
  const ReadoutModel ones{2.0, 0.0};
  CHECK(ones.alpha() == 1.0);
  CHECK(ones.beta() == 1.0);
  CHECK(min_detectable_field(ones, 1.0, 1.0) == doctest::Approx(1 / (3 * kPi)).epsilon(1e-15));
  CHECK(min_detectable_field(ReadoutModel{4.0, 0.0}, 1.0, 1.0) ==
        doctest::Approx(min_detectable_field(ones, 1.0, 1.0) / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(min_detectable_field(unit, 2.0, 1.0) < min_detectable_field(unit, 1.0, 1.0));
  CHECK(min_detectable_field(ReadoutModel{3.0, 1.0}, 1.0, 1.0) >
        min_detectable_field(ReadoutModel{3.5, 0.5}, 1.0, 1.0));
  CHECK_THROWS(min_detectable_field(ReadoutModel{1.0, 1.0}, 1.0));
  CHECK_THROWS(min_detectable_field(ReadoutModel{0.0, 0.0}, 1.0));
  CHECK_THROWS(min_detectable_field(ones, 0.0));
  CHECK_THROWS(min_detectable_field(ones, 1.0, 0.0));
}

TEST_CASE("min_detectable_field is monotone in tau, alpha and beta") {
  double last = INFINITY;
  for (double tau : {0.1, 0.5, 1.0, 3.0}) {
    const double v = min_detectable_field(ReadoutModel{0.03, 0.021}, tau);
    CHECK(v < last);
    last = v;
  }
  last = INFINITY;
  for (double v : {0.9, 0.6, 0.3, 0.0}) {
    // u + v fixed: only alpha grows.
    const double f = min_detectable_field(ReadoutModel{2.0 - v, v}, 1.0);
    CHECK(f < last);
    last = f;
  }
  last = INFINITY;
  for (double scale : {1.0, 2.0, 5.0}) {
    // alpha fixed: only beta grows.
    const double f = min_detectable_field(ReadoutModel{3.0 * scale, 1.0 * scale}, 1.0);
    CHECK(f < last);
    last = f;
  }
}

TEST_CASE("numerical detectable field matches the formula without decay") {
  const ReadoutModel readout{0.03, 0.021};
  const NoiseParams quiet{2.5, 0.0, NoiseKind::OrnsteinUhlenbeck};
  const double theta = std::atan(std::sqrt(2.0 / 3.0));
  // Best operating points sit where the fringe phase is a multiple of pi;
  // in between the estimator can only be worse than the formula.
  for (double tau : {0.5, 1.0, 2.0}) {
    const double numeric = numerical_min_detectable_field(readout, theta, 2 * kPi, quiet, tau);
    const double formula = min_detectable_field(readout, tau);
    CAPTURE(tau);
    CHECK(numeric / formula == doctest::Approx(1.0).epsilon(0.25));
  }
  for (double tau = 0.1; tau < 3.0; tau += 0.0625) {
    CAPTURE(tau);
    CHECK(numerical_min_detectable_field(readout, theta, 2 * kPi, quiet, tau) >
          0.99 * min_detectable_field(readout, tau));
  }
  CHECK(max_bias_slope(theta, 2 * kPi, quiet, 1.0) >=
        std::abs(hr_signal_derivative(theta, 2 * kPi, {}, quiet, 1.0)));
}

TEST_CASE("optimal tilt") {
  const auto taus = linspace(0.05, 2.0, 40);
  const NoiseParams quiet{2.5, 0.0, NoiseKind::OrnsteinUhlenbeck};
  const double q = optimal_theta(quiet, 2 * kPi, taus);
  CHECK(q > 0.0);
  CHECK(q < kPi / 2);
  CHECK(q == doctest::Approx(std::atan(std::sqrt(2.0 / 3.0))).epsilon(1e-6));

  const auto long_taus = linspace(0.0, 8.0, 161);
  const double reference = optimal_theta(kReference, 2 * kPi, long_taus);
  CHECK(std::abs(reference - 0.2 * kPi) <= 0.05 * kPi);
  const double best = slope_objective(reference, kReference, 2 * kPi, long_taus);
  for (int k = 1; k < 180; ++k) {
    CHECK(best >= slope_objective(k * (kPi / 2) / 180, kReference, 2 * kPi, long_taus) - 1e-15);
  }

  // Same physics in different time units gives the same maximiser.
  const double c = 3.7;
  std::vector<double> scaled;
  for (double t : long_taus) scaled.push_back(t / c);
  const NoiseParams fast{kReference.lambda * c, kReference.gamma * c, NoiseKind::OrnsteinUhlenbeck};
  CHECK(optimal_theta(fast, 2 * kPi * c, scaled) == doctest::Approx(reference).epsilon(1e-6));
}

TEST_CASE("sensitivity report") {
  const ReadoutModel readout{0.03, 0.021};
  const SensitivityResult r = sensitivity(kReference, readout, std::nullopt);
  CHECK(std::abs(r.optimal_theta - 0.2 * kPi) <= 0.05 * kPi);
  CHECK(r.optimal_tau > 0.0);
  CHECK(r.max_slope > 0.0);
  CHECK(r.delta_b_min > 0.0);
  CHECK(r.t2_hr > 0.0);
  CHECK(r.eta > 0.0);
  CHECK(r.delta_b_min_formula == doctest::Approx(min_detectable_field(readout, r.optimal_tau)));
  CHECK(r.eta == doctest::Approx(1 / (3 * kPi * kNvGyromagneticRatio * readout.alpha() *
                                      std::sqrt(readout.beta()) * std::sqrt(r.t2_hr))));

  const SensitivityResult fixed = sensitivity(kReference, readout, 0.3 * kPi);
  CHECK(fixed.optimal_theta == 0.3 * kPi);

  // Photon counts enter only through alpha and sqrt(beta).
  const SensitivityResult bright = sensitivity(kReference, ReadoutModel{0.3, 0.21}, std::nullopt);
  CHECK(bright.t2_hr == r.t2_hr);
  CHECK(bright.eta * std::sqrt(10.0) == doctest::Approx(r.eta).epsilon(1e-12));
}

TEST_CASE("quadrupling the noise power halves sqrt(T2) when motionally narrowed") {
  const ReadoutModel readout{0.03, 0.021};
  const NoiseParams base{40.0, 2.0, NoiseKind::OrnsteinUhlenbeck};
  const NoiseParams loud{40.0, 4.0, NoiseKind::OrnsteinUhlenbeck};
  const SensitivityResult a = sensitivity(base, readout, 0.2 * kPi);
  const SensitivityResult b = sensitivity(loud, readout, 0.2 * kPi);
  CHECK(std::sqrt(a.t2_hr / b.t2_hr) == doctest::Approx(2.0).epsilon(0.15));
  CHECK(b.eta / a.eta == doctest::Approx(2.0).epsilon(0.15));
}
