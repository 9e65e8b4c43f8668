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

// Closed-form expected signals <sigma_z> in [-1, 1] under Gaussian
// (Ornstein-Uhlenbeck) dephasing noise with instantaneous pulses.
//
// The Hahn-Ramsey law is a sum of three decaying components
//
//   s = 2 [ a^4/2 (1 - 2b^2)
//         + a^2 b^4/2            e^{-2(F1 + dF)}
//         - 2 a^4 b^2 cos(D t)   e^{-F1}
//         + b^4/2 (a^2 + 1) cos(2 D t) e^{-2(F1 - dF)} ]
//
// with a = cos(theta), b = sin(theta), t the half interval (total free
// evolution 2t) and F1, dF the dephasing constants of the noise module.

#include "ddsim/noise.hpp"
#include "ddsim/spin.hpp"

namespace ddsim {

/// Ideal pi/2 pulses: cos(detuning tau) exp(-F1(tau)).
double ramsey_signal(double detuning, const NoiseParams& noise, double tau);

/// Ramsey at any tilt. The noiseless signal is c0 + c1 cos(phi) + s1 sin(phi)
/// in the accumulated phase phi; the coefficients come from propagating the
/// pulse matrices and the Gaussian average multiplies the first harmonic by
/// exp(-F1).
double ramsey_signal_general(double theta, double detuning, const NoiseParams& noise,
                             double tau);

/// Resonant echo exp(-2 (F1 - dF)).
double hahn_echo_signal(const NoiseParams& noise, double tau);

double hahn_ramsey_signal(double theta, double detuning, const NoiseParams& noise,
                          double tau);

struct ComponentWeights {
  double constant = 0.0;     // a^4 (1 - 2b^2)
  double ramsey_like = 0.0;  // a^2 b^4
  double cos_delta = 0.0;    // -4 a^4 b^2
  double cos_2delta = 0.0;   // b^4 (a^2 + 1)
};

/// Weights in the [-1, 1] normalisation (twice the spin-1/2 coefficients).
ComponentWeights component_weights(double theta);

struct FilterExponents {
  double ramsey_like = 0.0;  // 2 (F1 + dF)
  double half_period = 0.0;  // F1
  double hahn_like = 0.0;    // 2 (F1 - dF)
};

FilterExponents filter_exponents(const NoiseParams& noise, double tau);

struct SignalComponents {
  double constant_term = 0.0;
  double ramsey_like_term = 0.0;
  double cos_delta_term = 0.0;
  double cos_2delta_term = 0.0;
  ComponentWeights weights;
  FilterExponents exponents;

  double total() const {
    return constant_term + ramsey_like_term + cos_delta_term + cos_2delta_term;
  }
};

SignalComponents signal_components(double theta, double detuning, const NoiseParams& noise,
                                   double tau);

struct BiasParams {
  double epsilon = 0.0;  // 2 pi gamma_e B, rad/time
};

/// Hahn-Ramsey signal with a DC bias that shifts the spin transition by
/// epsilon; reduces to hahn_ramsey_signal at epsilon = 0.
double hr_signal_biased(double theta, double detuning, const BiasParams& bias,
                        const NoiseParams& noise, double tau);

/// d hr_signal_biased / d epsilon.
double hr_signal_derivative(double theta, double detuning, const BiasParams& bias,
                            const NoiseParams& noise, double tau);

/// Closed form for a canonical sequence. Ramsey at theta != pi/2 uses
/// ramsey_signal_general; HahnEcho ignores theta and detuning.
double expected_signal(SequenceKind kind, double theta, double detuning,
                       const NoiseParams& noise, double tau);

/// Total free-evolution time of a canonical sequence with parameter tau.
double total_free_time(SequenceKind kind, double tau);

}  // namespace ddsim
