// Copyright 2026 The ringsqz Authors
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

// Closed-form spectral model of a below-threshold microring squeezer driven by a
// single classical pump: device parameters -> output-channel moments -> quadrature
// variances seen by a bichromatic local oscillator.
//
// Units: angular frequencies and rates in rad/s, lengths in m, variances relative
// to vacuum (vacuum = 1). Decibels are always 10*log10 of a variance ratio.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace ringsqz {

inline constexpr double kReducedPlanck = 1.054571817e-34;  // J s
inline constexpr double kSpeedOfLight = 299792458.0;       // m/s
inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Pump, signal and idler resonance angular frequencies (rad/s).
struct ResonanceTriplet {
  double pump = 0.0;
  double signal = 0.0;
  double idler = 0.0;
};

/// Physical and device parameters of the ring and its collection path.
///
/// Geometry fields (group velocity, nonlinear parameter, round-trip length) are only
/// needed when the nonlinear coupling is derived from them; zero means "not given".
/// When a dissipation rate is not given it defaults to omega / (2 Q).
struct RingParams {
  double loaded_q = 0.0;
  double resonance_angular_frequency = 0.0;
  double escape_efficiency_signal = 1.0;
  double escape_efficiency_idler = 1.0;
  double downstream_efficiency = 1.0;
  double group_velocity = 0.0;
  double nonlinear_parameter = 0.0;
  double round_trip_length = 0.0;
  std::optional<double> dissipation_signal;
  std::optional<double> dissipation_idler;
  std::optional<ResonanceTriplet> resonances;

  double gamma_signal() const;
  double gamma_idler() const;
  /// Mean of the signal and idler dissipation rates; the rate that normalizes g.
  double gamma_mean() const;
  /// (w_P^2 w_S w_I)^(1/4), or the single resonance frequency when no triplet is set.
  double mean_frequency() const;
  /// Net collection efficiency of the signal arm (escape times downstream).
  double net_efficiency_signal() const { return escape_efficiency_signal * downstream_efficiency; }
  double net_efficiency_idler() const { return escape_efficiency_idler * downstream_efficiency; }

  /// Throws DomainError when an invariant is violated.
  void validate() const;
};

enum class DetuningMode {
  kLockedZero,     // effective detuning held at zero
  kLockedShifted,  // pump follows the SPM/XPM-shifted resonance: detuning = g * gamma
  kExplicit,       // user supplied detuning
};

/// Classical intracavity pump.
struct PumpDrive {
  double intracavity_photons = 0.0;  // |beta_P|^2
  double coupling = 0.0;             // Lambda, rad/s
  DetuningMode detuning_mode = DetuningMode::kLockedShifted;
  double detuning = 0.0;  // rad/s, read only in kExplicit mode

  void validate() const;
};

/// Output-channel moments at sideband Omega: N_x(Omega, Omega) and M_xy(Omega, -Omega).
struct MomentSpectrum {
  double sideband = 0.0;
  double n_signal = 0.0;
  double n_idler = 0.0;
  std::complex<double> m_signal_idler;
  std::complex<double> m_idler_signal;
};

struct VariancePoint {
  double sideband = 0.0;
  double phase_sum = 0.0;
  double variance = 1.0;

  double variance_db() const;
};

/// Maximum and minimum variance over the LO phase sum.
struct ExtremalVariances {
  double plus = 1.0;
  double minus = 1.0;
};

struct SpectrumRow {
  double sideband = 0.0;  // rad/s
  double v_plus_db = 0.0;
  double v_minus_db = 0.0;
};

double to_db(double variance);
double from_db(double db);

double effective_frequency(const ResonanceTriplet& triplet);

/// Nonlinear coupling Lambda ~ hbar * w_bar * v_g^2 * gamma_NL / L.
double lambda_coeff(const RingParams& params);

/// Dimensionless gain g = Lambda |beta_P|^2 / gamma.
double gain(const RingParams& params, const PumpDrive& drive);

/// Effective detuning Delta implied by the drive's detuning mode.
double effective_detuning(const RingParams& params, const PumpDrive& drive);

/// Resonator dwelling time 2 Q / w_bar.
double dwell_time(const RingParams& params);

/// A drive that realizes gain g. The coupling is Lambda from the geometry when it is
/// available, otherwise gamma (so that |beta_P|^2 == g).
PumpDrive drive_for_gain(const RingParams& params, double g,
                         DetuningMode mode = DetuningMode::kLockedShifted, double detuning = 0.0);

/// Escape efficiency enters the closed forms; downstream loss scales N and M afterwards.
/// Throws SingularityError on (or numerically at) the parametric threshold.
MomentSpectrum moment_spectrum(const RingParams& params, const PumpDrive& drive, double sideband);

VariancePoint quadrature_variance(const RingParams& params, const PumpDrive& drive,
                                  double phase_signal, double phase_idler, double sideband);

/// Closed-form extremum of quadrature_variance over phase_signal + phase_idler.
ExtremalVariances phase_extremized_variances(const RingParams& params, const PumpDrive& drive,
                                             double sideband);

/// V+- = 1 + 4 eta g (2g +- sqrt(1 + 4g^2)); locked-shifted detuning at zero sideband.
ExtremalVariances extremal_variances(double g, double eta);

/// V+- = 1 +- 4 g eta / ((1 -+ g)^2 + (Omega/gamma)^2); zero detuning. Requires g < 1.
ExtremalVariances variances_delta_zero(double g, double eta, double sideband_over_gamma);

std::vector<SpectrumRow> squeezing_spectrum(const RingParams& params, const PumpDrive& drive,
                                            std::span<const double> sidebands, unsigned threads = 1);

/// n points logarithmically spaced over [lo, hi] inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

}  // namespace ringsqz
