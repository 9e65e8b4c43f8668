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

#include "ddsim/spin.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ddsim {

namespace {

const Complex kI{0.0, 1.0};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

SpinState SpinState::up() { return SpinState{Vector2(1.0, 0.0)}; }

SpinState SpinState::down() { return SpinState{Vector2(0.0, 1.0)}; }

SpinState SpinState::from_amplitudes(Complex up, Complex down) {
  const double norm = std::sqrt(std::norm(up) + std::norm(down));
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw std::invalid_argument("spin state amplitudes must be finite and non-zero");
  }
  return SpinState{Vector2(up / norm, down / norm)};
}

DensityMatrix DensityMatrix::pure(const SpinState& state) {
  return DensityMatrix{state.amplitudes * state.amplitudes.adjoint()};
}

DensityMatrix DensityMatrix::maximally_mixed() {
  return DensityMatrix{Matrix2::Identity() * 0.5};
}

bool DensityMatrix::is_physical(double tol) const {
  if ((entries - entries.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
  if (std::abs(entries.trace() - 1.0) > tol) return false;
  // Hermitian 2x2: eigenvalues are (tr +- sqrt(tr^2 - 4 det)) / 2.
  const double tr = entries.trace().real();
  const double det = (entries(0, 0) * entries(1, 1) - entries(0, 1) * entries(1, 0)).real();
  const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
  return 0.5 * (tr - disc) >= -tol;
}

void PulseParams::validate() const {
  if (!(theta > 0.0 && theta <= kPi / 2 + 1e-15)) {
    throw std::invalid_argument("pulse tilt theta must lie in (0, pi/2], got " +
                                std::to_string(theta));
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("pulse rotation beta must be finite and >= 0");
  }
  if (detuning_sign != 1 && detuning_sign != -1) {
    throw std::invalid_argument("pulse detuning_sign must be +1 or -1");
  }
}

double DrivingParams::effective_rabi() const { return std::hypot(rabi, detuning); }

TiltAngle tilt_angle(const DrivingParams& drive, TiltConvention convention) {
  if (!(drive.rabi > 0.0) || !std::isfinite(drive.rabi)) {
    throw std::invalid_argument("Rabi frequency must be positive");
  }
  if (!std::isfinite(drive.detuning)) {
    throw std::invalid_argument("detuning must be finite");
  }
  const double numerator =
      convention == TiltConvention::Geometric ? drive.rabi : drive.effective_rabi();
  // atan2 with a non-negative denominator lands in (0, pi/2]; the sign of the
  // detuning is carried separately.
  TiltAngle tilt;
  tilt.theta = std::atan2(numerator, std::abs(drive.detuning));
  tilt.detuning_sign = drive.detuning < 0.0 ? -1 : +1;
  return tilt;
}

PulseSequence PulseSequence::ramsey(double theta, double tau) {
  PulseSequence seq;
  seq.kind = SequenceKind::Ramsey;
  seq.elements = {PulseParams{theta, kPi / 2, +1}, Delay{tau},
                  PulseParams{theta, 3 * kPi / 2, +1}};
  return seq;
}

PulseSequence PulseSequence::hahn_echo(double tau) {
  PulseSequence seq = hahn_ramsey(kPi / 2, tau);
  seq.kind = SequenceKind::HahnEcho;
  return seq;
}

PulseSequence PulseSequence::hahn_ramsey(double theta, double tau) {
  PulseSequence seq;
  seq.kind = SequenceKind::HahnRamsey;
  seq.elements = {PulseParams{theta, kPi / 2, +1}, Delay{tau},
                  PulseParams{theta, kPi, -1}, Delay{tau},
                  PulseParams{theta, kPi / 2, +1}};
  return seq;
}

PulseSequence PulseSequence::of_kind(SequenceKind kind, double theta, double tau) {
  switch (kind) {
    case SequenceKind::Ramsey: return ramsey(theta, tau);
    case SequenceKind::HahnEcho: return hahn_echo(tau);
    case SequenceKind::HahnRamsey: return hahn_ramsey(theta, tau);
    case SequenceKind::Custom: break;
  }
  throw std::invalid_argument("custom sequences have no canonical expansion");
}

std::size_t PulseSequence::delay_count() const {
  std::size_t n = 0;
  for (const auto& e : elements) n += std::holds_alternative<Delay>(e) ? 1 : 0;
  return n;
}

std::vector<int> PulseSequence::delay_frame_signs() const {
  std::vector<int> signs;
  int frame = +1;
  for (const auto& e : elements) {
    if (const auto* p = std::get_if<PulseParams>(&e)) {
      frame = p->detuning_sign;
    } else {
      signs.push_back(frame);
    }
  }
  return signs;
}

std::vector<double> PulseSequence::noiseless_phases(double detuning) const {
  std::vector<double> phases;
  int frame = +1;
  for (const auto& e : elements) {
    if (const auto* p = std::get_if<PulseParams>(&e)) {
      frame = p->detuning_sign;
    } else {
      phases.push_back(frame * detuning * std::get<Delay>(e).duration);
    }
  }
  return phases;
}

std::vector<std::pair<double, double>> PulseSequence::delay_windows() const {
  std::vector<std::pair<double, double>> windows;
  double t = 0.0;
  for (const auto& e : elements) {
    if (const auto* d = std::get_if<Delay>(&e)) {
      windows.emplace_back(t, t + d->duration);
      t += d->duration;
    }
  }
  return windows;
}

Matrix2 axis_rotation(double nx, double ny, double nz, double angle) {
  const double c = std::cos(angle / 2);
  const double s = std::sin(angle / 2);
  Matrix2 u;
  u(0, 0) = Complex(c, -s * nz);
  u(0, 1) = Complex(-s * ny, -s * nx);
  u(1, 0) = Complex(s * ny, -s * nx);
  u(1, 1) = Complex(c, s * nz);
  return u;
}

Matrix2 rotation_matrix(const PulseParams& pulse) {
  // R_y(theta) rotates the z axis onto (sin theta, 0, cos theta).
  const double t = pulse.signed_theta();
  return axis_rotation(std::sin(t), 0.0, std::cos(t), pulse.beta);
}

Matrix2 free_phase_unitary(double total_phase) {
  Matrix2 u = Matrix2::Zero();
  u(0, 0) = std::exp(-kI * (total_phase / 2));
  u(1, 1) = std::exp(kI * (total_phase / 2));
  return u;
}

Matrix2 sequence_unitary(const PulseSequence& seq,
                         std::span<const double> phase_per_delay) {
  if (phase_per_delay.size() != seq.delay_count()) {
    throw std::invalid_argument("phase_per_delay has " +
                                std::to_string(phase_per_delay.size()) +
                                " entries but the sequence has " +
                                std::to_string(seq.delay_count()) + " delays");
  }
  Matrix2 u = Matrix2::Identity();
  std::size_t next_phase = 0;
  for (const auto& e : seq.elements) {
    std::visit(Overloaded{
                   [&](const PulseParams& p) { u = rotation_matrix(p) * u; },
                   [&](const Delay&) {
                     u = free_phase_unitary(phase_per_delay[next_phase++]) * u;
                   },
               },
               e);
  }
  return u;
}

SpinState propagate(const SpinState& state, const PulseSequence& seq,
                    std::span<const double> phase_per_delay) {
  return SpinState{sequence_unitary(seq, phase_per_delay) * state.amplitudes};
}

DensityMatrix propagate(const DensityMatrix& rho, const PulseSequence& seq,
                        std::span<const double> phase_per_delay) {
  const Matrix2 u = sequence_unitary(seq, phase_per_delay);
  return DensityMatrix{u * rho.entries * u.adjoint()};
}

double expectation_sigma_z(const SpinState& state) {
  return std::norm(state.amplitudes(0)) - std::norm(state.amplitudes(1));
}

double expectation_sigma_z(const DensityMatrix& rho) {
  return (rho.entries(0, 0) - rho.entries(1, 1)).real();
}

BlochVector bloch_vector(const SpinState& state) {
  const Complex coherence = std::conj(state.amplitudes(0)) * state.amplitudes(1);
  return BlochVector{2 * coherence.real(), 2 * coherence.imag(),
                     expectation_sigma_z(state)};
}

DensityMatrix analytic_density_matrix_hr(double theta, double f, double g) {
  const double a = std::cos(theta);
  const double b = std::sin(theta);
  const double a2 = a * a;
  const double b2 = b * b;
  const double swing = 2 * a * b2 * (a * std::cos(2 * f) + std::sin(2 * f));
  const Complex off =
      -a2 * b * (kI + a) * std::exp(-2.0 * kI * (f + g)) -
      2 * a2 * a * b * std::exp(-2.0 * kI * g) +
      b2 * b * (a - kI) * std::exp(2.0 * kI * (f - g));
  Matrix2 rho;
  rho(0, 0) = a2 + a2 * a2 + b2 * b2 - swing;
  rho(0, 1) = off;
  rho(1, 0) = std::conj(off);
  rho(1, 1) = b2 + 2 * a2 * b2 + swing;
  return DensityMatrix{rho * 0.5};
}

DensityMatrix long_time_density_matrix(double theta) {
  const double a2 = std::pow(std::cos(theta), 2);
  const double b2 = std::pow(std::sin(theta), 2);
  Matrix2 rho = Matrix2::Zero();
  rho(0, 0) = 0.5 * (a2 + a2 * a2 + b2 * b2);
  rho(1, 1) = 0.5 * (b2 + 2 * a2 * b2);
  return DensityMatrix{rho};
}

double unitarity_defect(const Matrix2& u) {
  return (u * u.adjoint() - Matrix2::Identity()).cwiseAbs().maxCoeff();
}

}  // namespace ddsim
