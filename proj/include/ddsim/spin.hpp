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

// Exact two-level quantum mechanics for pulse-sequence simulation.
//
// Basis is {|up>, |down>} with |up> the optically initialised m_s = 0 level.
// Rotations use the SU(2) convention R_a(x) = exp(-i sigma_a x / 2).

#include <complex>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace ddsim {

using Complex = std::complex<double>;
using Matrix2 = Eigen::Matrix2cd;
using Vector2 = Eigen::Vector2cd;

inline constexpr double kPi = 3.14159265358979323846;

struct SpinState {
  Vector2 amplitudes{Vector2(1.0, 0.0)};

  static SpinState up();
  static SpinState down();
  // Normalises (up, down); throws std::invalid_argument on a zero vector.
  static SpinState from_amplitudes(Complex up, Complex down);

  double norm_squared() const { return amplitudes.squaredNorm(); }
};

struct DensityMatrix {
  Matrix2 entries{Matrix2::Identity() * 0.5};

  static DensityMatrix pure(const SpinState& state);
  static DensityMatrix maximally_mixed();

  Complex trace() const { return entries.trace(); }
  // Hermitian, unit trace and positive semidefinite within `tol`.
  bool is_physical(double tol = 1e-12) const;
};

/// Off-resonant pulse R(theta, beta) = R_y(theta) R_z(beta) R_y(-theta).
///
/// `theta` tilts the rotation axis away from z toward x, `beta` is the
/// nominal rotation omega_1 * t_p. A pulse driven at the opposite detuning
/// (detuning_sign = -1) rotates about the mirrored axis, R(-theta, beta).
struct PulseParams {
  double theta = kPi / 2;
  double beta = kPi / 2;
  int detuning_sign = +1;

  // theta in (0, pi/2], beta >= 0, sign +-1; throws std::invalid_argument.
  void validate() const;
  double signed_theta() const { return detuning_sign < 0 ? -theta : theta; }
};

struct DrivingParams {
  double rabi = 1.0;       // resonant Rabi frequency omega_0, rad/time
  double detuning = 0.0;   // Delta = omega_spin - omega_drive, rad/time

  double effective_rabi() const;  // omega_1 = sqrt(omega_0^2 + Delta^2)
};

enum class TiltConvention {
  Geometric,     // arctan(omega_0 / Delta): the axis tilt of the drive
  EffectiveRabi,  // arctan(omega_1 / Delta)
};

struct TiltAngle {
  double theta = kPi / 2;  // in (0, pi/2]
  int detuning_sign = +1;  // sign of Delta, +1 at resonance
};

TiltAngle tilt_angle(const DrivingParams& drive,
                     TiltConvention convention = TiltConvention::Geometric);

struct Delay {
  double duration = 0.0;
};

using SequenceElement = std::variant<PulseParams, Delay>;

enum class SequenceKind { Ramsey, HahnEcho, HahnRamsey, Custom };

/// Ordered pulse/delay program.
///
/// During a delay the spin precesses in the frame of the most recent pulse,
/// so its noiseless phase is (that pulse's detuning sign) * Delta * duration.
struct PulseSequence {
  SequenceKind kind = SequenceKind::Custom;
  std::vector<SequenceElement> elements;

  // [R(theta, pi/2), tau, R(theta, 3pi/2)]: the readout pulse undoes the
  // first one, so the signal starts at +1 and oscillates as cos(Delta tau).
  static PulseSequence ramsey(double theta, double tau);
  // Resonant echo: Hahn-Ramsey timing at theta = pi/2.
  static PulseSequence hahn_echo(double tau);
  // [R(theta, pi/2) at +Delta, tau, R(-theta, pi) at -Delta, tau,
  //  R(theta, pi/2) at +Delta]
  static PulseSequence hahn_ramsey(double theta, double tau);
  static PulseSequence of_kind(SequenceKind kind, double theta, double tau);

  std::size_t delay_count() const;
  // Detuning sign of the frame each delay evolves in.
  std::vector<int> delay_frame_signs() const;
  // Noiseless per-delay phases sign * Delta * duration.
  std::vector<double> noiseless_phases(double detuning) const;
  // Time-ordered [start, end) of each delay with instantaneous pulses.
  std::vector<std::pair<double, double>> delay_windows() const;
};

Matrix2 rotation_matrix(const PulseParams& pulse);

/// exp(-i sigma_z / 2 * total_phase); the caller integrates Delta + f(t).
Matrix2 free_phase_unitary(double total_phase);

/// Rotation by `angle` about the unit Bloch axis (nx, ny, nz).
Matrix2 axis_rotation(double nx, double ny, double nz, double angle);

/// Product of all element unitaries in time order (last applied leftmost).
/// Throws std::invalid_argument when phases.size() != seq.delay_count().
Matrix2 sequence_unitary(const PulseSequence& seq,
                         std::span<const double> phase_per_delay);

SpinState propagate(const SpinState& state, const PulseSequence& seq,
                    std::span<const double> phase_per_delay);
DensityMatrix propagate(const DensityMatrix& rho, const PulseSequence& seq,
                        std::span<const double> phase_per_delay);

double expectation_sigma_z(const SpinState& state);
double expectation_sigma_z(const DensityMatrix& rho);

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 1.0;
};

BlochVector bloch_vector(const SpinState& state);

/// rho(2 tau) of the Hahn-Ramsey sequence before the readout pulse, for the
/// half-phases f and g accumulated in the two delays (each delay contributes
/// a total phase 2f, 2g).
DensityMatrix analytic_density_matrix_hr(double theta, double f, double g);

/// Noise-averaged rho(2 tau) for tau -> infinity: diagonal, unit trace.
DensityMatrix long_time_density_matrix(double theta);

/// max |U U^dagger - I| over entries.
double unitarity_defect(const Matrix2& u);

}  // namespace ddsim
