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

#include "ddsim/analytic.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace ddsim {

namespace {

void check_tau(double tau) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) {
    throw std::invalid_argument("tau must be finite and non-negative");
  }
}

}  // namespace

double ramsey_signal(double detuning, const NoiseParams& noise, double tau) {
  check_tau(tau);
  return std::cos(detuning * tau) * std::exp(-f1(noise, tau));
}

double ramsey_signal_general(double theta, double detuning, const NoiseParams& noise,
                             double tau) {
  check_tau(tau);
  const PulseSequence seq = PulseSequence::ramsey(theta, tau);
  auto at_phase = [&](double phi) {
    const std::array<double, 1> phases{phi};
    return expectation_sigma_z(propagate(SpinState::up(), seq, phases));
  };
  const double s0 = at_phase(0.0);
  const double s_half = at_phase(kPi / 2);
  const double s_pi = at_phase(kPi);
  const double c0 = 0.5 * (s0 + s_pi);
  const double c1 = 0.5 * (s0 - s_pi);
  const double s1 = s_half - c0;
  const double phi = detuning * tau;
  return c0 + std::exp(-f1(noise, tau)) * (c1 * std::cos(phi) + s1 * std::sin(phi));
}

double hahn_echo_signal(const NoiseParams& noise, double tau) {
  check_tau(tau);
  return std::exp(-2 * (f1(noise, tau) - delta_f(noise, tau)));
}

ComponentWeights component_weights(double theta) {
  const double a2 = std::pow(std::cos(theta), 2);
  const double b2 = std::pow(std::sin(theta), 2);
  ComponentWeights w;
  w.constant = a2 * a2 * (1 - 2 * b2);
  w.ramsey_like = a2 * b2 * b2;
  w.cos_delta = -4 * a2 * a2 * b2;
  w.cos_2delta = b2 * b2 * (a2 + 1);
  return w;
}

FilterExponents filter_exponents(const NoiseParams& noise, double tau) {
  const double f = f1(noise, tau);
  const double d = delta_f(noise, tau);
  return FilterExponents{2 * (f + d), f, 2 * (f - d)};
}

SignalComponents signal_components(double theta, double detuning, const NoiseParams& noise,
                                   double tau) {
  check_tau(tau);
  SignalComponents c;
  c.weights = component_weights(theta);
  c.exponents = filter_exponents(noise, tau);
  c.constant_term = c.weights.constant;
  c.ramsey_like_term = c.weights.ramsey_like * std::exp(-c.exponents.ramsey_like);
  c.cos_delta_term =
      c.weights.cos_delta * std::cos(detuning * tau) * std::exp(-c.exponents.half_period);
  c.cos_2delta_term =
      c.weights.cos_2delta * std::cos(2 * detuning * tau) * std::exp(-c.exponents.hahn_like);
  return c;
}

double hahn_ramsey_signal(double theta, double detuning, const NoiseParams& noise,
                          double tau) {
  return signal_components(theta, detuning, noise, tau).total();
}

double hr_signal_biased(double theta, double detuning, const BiasParams& bias,
                        const NoiseParams& noise, double tau) {
  // The even-in-epsilon parts rescale the component terms; the odd parts
  // vanish at epsilon = 0, where this reduces to hahn_ramsey_signal exactly.
  const SignalComponents c = signal_components(theta, detuning, noise, tau);
  const double a = std::cos(theta);
  const double b = std::sin(theta);
  const double et = bias.epsilon * tau;
  const double even = c.constant_term + c.ramsey_like_term * std::cos(2 * et) +
                      c.cos_delta_term * std::cos(et) + c.cos_2delta_term;
  const double odd = 2 * a * a * a * b * b *
                     (std::exp(-c.exponents.ramsey_like) * std::sin(2 * et) +
                      2 * std::exp(-c.exponents.half_period) * std::cos(detuning * tau) *
                          std::sin(et));
  return even - odd;
}

double hr_signal_derivative(double theta, double detuning, const BiasParams& bias,
                            const NoiseParams& noise, double tau) {
  check_tau(tau);
  const double a = std::cos(theta);
  const double b = std::sin(theta);
  const double a2 = a * a;
  const double b2 = b * b;
  const double f = f1(noise, tau);
  const double d = delta_f(noise, tau);
  const double et = bias.epsilon * tau;
  const double half =
      -2 * a2 * a * b2 * std::exp(-f) *
          (tau * std::cos(detuning * tau) * (std::cos(et) - a * std::sin(et))) -
      a2 * b2 * std::exp(-2 * (f + d)) * tau *
          (2 * a * std::cos(2 * et) + b2 * std::sin(2 * et));
  return 2 * half;
}

double expected_signal(SequenceKind kind, double theta, double detuning,
                       const NoiseParams& noise, double tau) {
  switch (kind) {
    case SequenceKind::Ramsey:
      if (theta == kPi / 2) return ramsey_signal(detuning, noise, tau);
      return ramsey_signal_general(theta, detuning, noise, tau);
    case SequenceKind::HahnEcho: return hahn_echo_signal(noise, tau);
    case SequenceKind::HahnRamsey: return hahn_ramsey_signal(theta, detuning, noise, tau);
    case SequenceKind::Custom: break;
  }
  throw std::invalid_argument("no closed form for custom sequences");
}

double total_free_time(SequenceKind kind, double tau) {
  return kind == SequenceKind::Ramsey ? tau : 2 * tau;
}

}  // namespace ddsim
