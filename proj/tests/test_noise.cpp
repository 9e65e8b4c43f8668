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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "ddsim/noise.hpp"
#include "ddsim/rng.hpp"
#include "ddsim/spin.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace ddsim;

namespace {

const NoiseParams kReference{2.5, 2 * kPi * 0.1, NoiseKind::OrnsteinUhlenbeck};

std::vector<double> uniform_grid(double t_end, std::size_t steps) {
  std::vector<double> g(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) g[k] = t_end * static_cast<double>(k) / steps;
  return g;
}

struct Stats {
  double n = 0, sum = 0, sum2 = 0, sum4 = 0;
  void add(double x) {
    n += 1;
    sum += x;
    sum2 += x * x;
    sum4 += x * x * x * x;
  }
  // Standard error of var() for a zero-mean quantity.
  double var_stderr() const { return std::sqrt((sum4 / n - var() * var()) / n); }
  double mean() const { return sum / n; }
  double var() const { return (sum2 - sum * sum / n) / (n - 1); }
  double stderr_() const { return std::sqrt(var() / n); }
};

double value_at(const NoiseTrajectory& traj, double t) {
  const auto it = std::lower_bound(traj.grid.begin(), traj.grid.end(), t);
  REQUIRE(it != traj.grid.end());
  REQUIRE(*it == t);
  return traj.values[static_cast<std::size_t>(it - traj.grid.begin())];
}

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(NoiseParams({0.0, 1.0, NoiseKind::OrnsteinUhlenbeck}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(NoiseParams({1.0, -1.0, NoiseKind::OrnsteinUhlenbeck}).validate(), std::invalid_argument);
  CHECK(NoiseParams({1.0, 3.0, NoiseKind::None}).is_silent());
  CHECK_THROWS_AS(check_grid(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(check_grid(std::vector<double>{0.0, 1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("correlation function") {
  CHECK(correlation(kReference, 0.0) == doctest::Approx(kReference.gamma * kReference.gamma));
  CHECK(correlation(kReference, 1e3) == 0.0);
  CHECK(correlation(kReference, 1.0) == doctest::Approx(0.03240).epsilon(1e-3));
  CHECK(correlation(kReference, -1.0) == correlation(kReference, 1.0));
}

TEST_CASE("dephasing constants: limits and reference values") {
  CHECK(f1(kReference, 0.0) == 0.0);
  CHECK(delta_f(kReference, 0.0) == 0.0);
  const double g2 = kReference.gamma * kReference.gamma;
  const double tiny = 1e-5;
  CHECK(f1(kReference, tiny) == doctest::Approx(g2 * tiny * tiny / 2).epsilon(1e-4));
  CHECK(f1(kReference, 1.0) == doctest::Approx(0.0999).epsilon(2e-3));
  CHECK(delta_f(kReference, 1e3) == doctest::Approx(g2 / (2 * kReference.lambda * kReference.lambda)).epsilon(1e-12));
}

TEST_CASE("dephasing constants match two-dimensional quadrature of the correlation") {
  for (double x = 0.01; x <= 20.0; x *= 1.4) {
    const double tau = x / kReference.lambda;
    CAPTURE(tau);
    const double q1 = oracle::f1_quadrature(kReference.lambda, kReference.gamma, tau);
    const double qd = oracle::delta_f_quadrature(kReference.lambda, kReference.gamma, tau);
    CHECK(std::abs(f1(kReference, tau) - q1) <= 1e-8 * q1);
    CHECK(std::abs(delta_f(kReference, tau) - qd) <= 1e-8 * qd);
  }
}

TEST_CASE("dephasing exponents are decays and monotone") {
  double prev_f1 = 0.0;
  double prev_df = 0.0;
  const double bound = kReference.gamma * kReference.gamma / (2 * kReference.lambda * kReference.lambda);
  for (double tau = 0.0; tau < 30.0; tau += 0.05) {
    const DephasingConstants d = dephasing_constants(kReference, tau);
    CHECK(d.f1 >= 0.0);
    CHECK(d.f1 - d.delta_f >= 0.0);
    CHECK(d.f1 + d.delta_f >= 0.0);
    CHECK(d.f1 >= prev_f1);
    CHECK(d.delta_f >= prev_df);
    CHECK(d.delta_f <= bound * (1 + 1e-15));
    prev_f1 = d.f1;
    prev_df = d.delta_f;
  }
}

TEST_CASE("filter-function integrals reproduce the closed-form exponents") {
  for (auto kind : {FilterKind::RamseyLike, FilterKind::HalfPeriod, FilterKind::HahnLike}) {
    CHECK(chi_filter(kind, kReference, 0.0) == 0.0);
  }
  CHECK(chi_filter(FilterKind::HalfPeriod, kReference, 1.0) ==
        doctest::Approx(f1(kReference, 1.0)).epsilon(1e-4));
  for (const double lambda : {0.3, 2.5, 40.0}) {
    const NoiseParams p{lambda, 1.3, NoiseKind::OrnsteinUhlenbeck};
    for (int k = 0; k < 25; ++k) {
      const double tau = (0.01 / lambda) * std::pow(1000.0, k / 24.0);
      CAPTURE(lambda);
      CAPTURE(tau);
      const double a = f1(p, tau);
      const double b = delta_f(p, tau);
      CHECK(chi_filter(FilterKind::RamseyLike, p, tau) == doctest::Approx(2 * (a + b)).epsilon(1e-4));
      CHECK(chi_filter(FilterKind::HalfPeriod, p, tau) == doctest::Approx(a).epsilon(1e-4));
      CHECK(chi_filter(FilterKind::HahnLike, p, tau) == doctest::Approx(2 * (a - b)).epsilon(1e-4));
      const double lt = lambda * tau;
      const double echo = (1.3 * 1.3 / (lambda * lambda)) *
                          (2 * lt - 3 + 4 * std::exp(-lt) - std::exp(-2 * lt));
      CHECK(chi_filter(FilterKind::HahnLike, p, tau) == doctest::Approx(echo).epsilon(1e-4));
    }
  }
}

TEST_CASE("OU sampling: silent, deterministic, seed-sensitive") {
  const auto grid = uniform_grid(2.0, 200);
  const NoiseTrajectory zero = sample_ou(NoiseParams{1.0, 0.0, NoiseKind::OrnsteinUhlenbeck}, grid, 5);
  CHECK(std::all_of(zero.values.begin(), zero.values.end(), [](double v) { return v == 0.0; }));
  const NoiseTrajectory a = sample_ou(kReference, grid, 99);
  const NoiseTrajectory b = sample_ou(kReference, grid, 99);
  const NoiseTrajectory c = sample_ou(kReference, grid, 100);
  REQUIRE(a.values.size() == grid.size());
  CHECK(std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(double)) == 0);
  CHECK(a.values != c.values);
  CHECK(sample_noise(NoiseParams::none(), grid, 1).values == std::vector<double>(grid.size(), 0.0));
}

TEST_CASE("OU sampling: moments, correlation and phase statistics over 1e5 trajectories") {
  const std::size_t n = 100000;
  const double tau = 1.0;
  const auto grid = uniform_grid(tau, 500);
  const std::size_t i0 = 100;
  const std::size_t i1 = 300;  // lag 0.4
  const double lag = grid[i1] - grid[i0];
  Stats mean_f, product, integral, cosine;
  std::vector<double> cos_partial_taus{0.2, 0.5, 1.0};
  std::vector<Stats> cos_partial(cos_partial_taus.size());
  for (std::size_t i = 0; i < n; ++i) {
    const NoiseTrajectory t = sample_ou(kReference, grid, child_seed(2024, i));
    mean_f.add(t.values[i0]);
    product.add(t.values[i0] * t.values[i1]);
    const double x = integrate_trajectory(t, 0.0, tau);
    integral.add(x);
    for (std::size_t j = 0; j < cos_partial_taus.size(); ++j) {
      cos_partial[j].add(std::cos(integrate_trajectory(t, 0.0, cos_partial_taus[j])));
    }
  }
  const double g = kReference.gamma;
  CHECK(std::abs(mean_f.mean()) <= 4 * g / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(product.mean() - correlation(kReference, lag)) <= 4 * product.stderr_());
  CHECK(std::abs(integral.var() - 2 * f1(kReference, tau)) <= 4 * integral.var_stderr());
  for (std::size_t j = 0; j < cos_partial_taus.size(); ++j) {
    CAPTURE(cos_partial_taus[j]);
    CHECK(std::abs(cos_partial[j].mean() - std::exp(-f1(kReference, cos_partial_taus[j]))) <=
          4 * cos_partial[j].stderr_());
  }
}

TEST_CASE("renewal sampling") {
  const std::vector<double> grid{0.0, 0.5, 1.0, 1.5, 2.0};
  const NoiseTrajectory frozen =
      sample_renewal(NoiseParams{1e-12, 1.0, NoiseKind::CompoundPoissonRenewal}, grid, 3);
  CHECK(std::all_of(frozen.values.begin(), frozen.values.end(),
                    [&](double v) { return v == frozen.values.front(); }));
  CHECK(frozen.interpolation == Interpolation::Hold);

  const NoiseParams p{2.5, 0.8, NoiseKind::CompoundPoissonRenewal};
  const std::size_t n = 100000;
  Stats var, cov, integral;
  for (std::size_t i = 0; i < n; ++i) {
    const NoiseTrajectory t = sample_renewal(p, grid, child_seed(77, i));
    const double a = value_at(t, 0.5);
    var.add(a * a);
    cov.add(a * value_at(t, 1.0));
    integral.add(integrate_trajectory(t, 0.0, 2.0));
  }
  CHECK(std::abs(var.mean() - p.gamma * p.gamma) <= 4 * var.stderr_());
  CHECK(std::abs(cov.mean() - correlation(p, 0.5)) <= 4 * cov.stderr_());
  // Same second-order statistics as OU, so the integral variance is 2 F1.
  const double v = integral.var();
  const double v_expected = 2 * f1(p, 2.0);
  CHECK(std::abs(v - v_expected) <= 4 * integral.var_stderr());

  const auto a = sample_renewal(p, grid, 8);
  const auto b = sample_renewal(p, grid, 8);
  CHECK(a.grid == b.grid);
  CHECK(a.values == b.values);
}

TEST_CASE("trajectory integration") {
  NoiseTrajectory zero{{0.0, 1.0, 2.0}, {0.0, 0.0, 0.0}, 0, Interpolation::Linear};
  CHECK(integrate_trajectory(zero, 0.0, 2.0) == 0.0);
  NoiseTrajectory constant{{0.0, 0.3, 1.1, 2.0}, {1.5, 1.5, 1.5, 1.5}, 0, Interpolation::Hold};
  CHECK(integrate_trajectory(constant, 0.0, 2.0) == doctest::Approx(3.0));
  CHECK(integrate_trajectory(constant, 0.2, 1.7) == doctest::Approx(1.5 * 1.5));
  constant.interpolation = Interpolation::Linear;
  CHECK(integrate_trajectory(constant, 0.2, 1.7) == doctest::Approx(1.5 * 1.5));
  CHECK(integrate_trajectory(constant, 1.7, 0.2) == doctest::Approx(-1.5 * 1.5));
  CHECK_THROWS_AS(integrate_trajectory(constant, -0.1, 1.0), std::out_of_range);
  CHECK_THROWS_AS(integrate_trajectory(constant, 0.0, 2.5), std::out_of_range);

  NoiseTrajectory ramp{{0.0, 1.0}, {0.0, 2.0}, 0, Interpolation::Linear};
  CHECK(integrate_trajectory(ramp, 0.0, 1.0) == doctest::Approx(1.0));
  CHECK(integrate_trajectory(ramp, 0.0, 0.5) == doctest::Approx(0.25));
}

TEST_CASE("trajectory CSV") {
  NoiseTrajectory t{{0.0, 0.5}, {1.0, -2.0}, 0, Interpolation::Linear};
  std::ostringstream os;
  write_trajectory_csv(os, t);
  CHECK(os.str() == "t,f\n0,1\n0.5,-2\n");
}
