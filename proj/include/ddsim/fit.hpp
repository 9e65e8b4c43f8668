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

// Decay-envelope fitting.
//
//   GaussianEnvelope:  A cos(w t + phi) exp(-(t / tau_c)^2) + c
//   PlainExponential:  A cos(w t + phi) exp(-t / tau_c) + c
//
// With oscillating = false the cosine is dropped (w = phi = 0).
//
// Initial values: w from the peak of the discrete spectrum of the linearly
// detrended data, phi from the phase of that spectral line, tau_c from the
// first time the upper envelope |y - c| falls below 1/e of its initial value,
// A and c from the data range. Levenberg-Marquardt then runs from that point
// and from a bounded set of perturbed starts; the lowest residual wins.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddsim/curve.hpp"
#include "ddsim/spin.hpp"

namespace ddsim {

enum class DecayModel { GaussianEnvelope, PlainExponential };

std::string_view decay_model_name(DecayModel model);

struct FitOptions {
  DecayModel model = DecayModel::GaussianEnvelope;
  bool oscillating = true;
  int max_iterations = 500;
  int max_restarts = 12;
  // Weight points by 1/stderr^2 when every stderr is positive.
  bool use_stderr_weights = true;
};

struct DecayFit {
  DecayModel model = DecayModel::GaussianEnvelope;
  bool oscillating = true;
  double tau_c = 0.0;
  double tau_c_err = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;
  double frequency = 0.0;  // rad / time
  double phase = 0.0;      // (-pi, pi]
  double residual_norm = 0.0;  // SSR / TSS, unweighted
  std::size_t n_points = 0;
  int iterations = 0;
  int starts_tried = 0;

  double evaluate(double t) const;
};

class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, std::vector<std::string> diagnostics = {});
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

/// Needs at least 6 points and non-constant data; throws FitError otherwise
/// or when no start converges.
DecayFit fit_decay(const SignalCurve& curve, const FitOptions& options = {});

DecayFit fit_decay(std::span<const double> t, std::span<const double> y,
                   const FitOptions& options = {},
                   std::span<const double> sigma = {});

/// Copy of `curve` with tau replaced by the total free-evolution time of
/// the sequence (tau for Ramsey, 2 tau for the echo sequences).
SignalCurve with_total_time(const SignalCurve& curve, SequenceKind kind);

}  // namespace ddsim
