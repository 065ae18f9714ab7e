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

#include "ringsqz/ring_model.hpp"

#include <cmath>
#include <sstream>

#include "ringsqz/errors.hpp"
#include "ringsqz/parallel.hpp"

namespace ringsqz {
namespace {

constexpr double kSingularRatio = 1e-12;

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

bool is_efficiency(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

struct SidebandPair {
  double n_bar_sum = 0.0;  // N_bar(W, W) + N_bar(-W, -W)
  std::complex<double> m_bar;
};

// Per-sideband evaluation of the printed closed forms. Downstream loss is applied by
// the caller.
MomentSpectrum raw_moments(const RingParams& params, const PumpDrive& drive, double sideband) {
  using namespace std::complex_literals;
  const double gs = params.gamma_signal();
  const double gi = params.gamma_idler();
  const double es = params.escape_efficiency_signal;
  const double ei = params.escape_efficiency_idler;
  const double delta = effective_detuning(params, drive);
  const double a = drive.intracavity_photons * drive.coupling;  // |beta|^2 Lambda
  const std::complex<double> ts(gs, -delta);
  const std::complex<double> ti(gi, -delta);
  const double w = sideband;

  const std::complex<double> prod = (std::conj(ti) - 1i * w) * (ts - 1i * w);
  const std::complex<double> denom = a * a - prod;
  const double denom2 = std::norm(denom);
  const double scale = a * a + std::abs(prod);
  if (!(denom2 > kSingularRatio * scale * scale)) {
    std::ostringstream os;
    os << "cavity response singular at threshold: g=" << gain(params, drive) << " delta=" << delta
       << " rad/s omega=" << w << " rad/s";
    throw SingularityError(os.str(), gain(params, drive), delta, w);
  }

  MomentSpectrum m;
  m.sideband = sideband;
  const double n_common = 4.0 * gs * gi * a * a / denom2;
  m.n_signal = es * n_common;
  m.n_idler = ei * n_common;
  const double m_pref = 2.0 * std::sqrt(es * gs * ei * gi) * a / denom2;
  m.m_signal_idler = m_pref * (a * a + (std::conj(ts) + 1i * w) * (std::conj(ti) - 1i * w));
  m.m_idler_signal = m_pref * (a * a + (std::conj(ti) + 1i * w) * (std::conj(ts) - 1i * w));
  return m;
}

SidebandPair sideband_pair(const RingParams& params, const PumpDrive& drive, double sideband) {
  params.validate();
  drive.validate();
  const MomentSpectrum pos = raw_moments(params, drive, sideband);
  const MomentSpectrum neg = raw_moments(params, drive, -sideband);
  const double dn = params.downstream_efficiency;
  SidebandPair out;
  out.n_bar_sum = dn * 0.5 * (pos.n_signal + pos.n_idler + neg.n_signal + neg.n_idler);
  out.m_bar = dn * 0.5 * (pos.m_signal_idler + pos.m_idler_signal);
  return out;
}

}  // namespace

double RingParams::gamma_signal() const {
  return dissipation_signal ? *dissipation_signal : resonance_angular_frequency / (2.0 * loaded_q);
}

double RingParams::gamma_idler() const {
  return dissipation_idler ? *dissipation_idler : resonance_angular_frequency / (2.0 * loaded_q);
}

double RingParams::gamma_mean() const { return 0.5 * (gamma_signal() + gamma_idler()); }

double RingParams::mean_frequency() const {
  return resonances ? effective_frequency(*resonances) : resonance_angular_frequency;
}

void RingParams::validate() const {
  require(std::isfinite(loaded_q) && loaded_q > 0.0, "ring: loaded Q must be positive");
  require(std::isfinite(resonance_angular_frequency) && resonance_angular_frequency > 0.0,
          "ring: resonance angular frequency must be positive");
  require(is_efficiency(escape_efficiency_signal), "ring: signal escape efficiency must lie in [0, 1]");
  require(is_efficiency(escape_efficiency_idler), "ring: idler escape efficiency must lie in [0, 1]");
  require(is_efficiency(downstream_efficiency), "ring: downstream efficiency must lie in [0, 1]");
  require(std::isfinite(group_velocity) && group_velocity >= 0.0, "ring: group velocity must be nonnegative");
  require(std::isfinite(nonlinear_parameter) && nonlinear_parameter >= 0.0,
          "ring: nonlinear parameter must be nonnegative");
  require(std::isfinite(round_trip_length) && round_trip_length >= 0.0,
          "ring: round-trip length must be nonnegative");
  if (dissipation_signal) {
    require(std::isfinite(*dissipation_signal) && *dissipation_signal > 0.0,
            "ring: signal dissipation rate must be positive");
  }
  if (dissipation_idler) {
    require(std::isfinite(*dissipation_idler) && *dissipation_idler > 0.0,
            "ring: idler dissipation rate must be positive");
  }
  if (resonances) {
    require(resonances->pump > 0.0 && resonances->signal > 0.0 && resonances->idler > 0.0,
            "ring: resonance triplet frequencies must be positive");
  }
}

void PumpDrive::validate() const {
  require(std::isfinite(intracavity_photons) && intracavity_photons >= 0.0,
          "drive: intracavity photon number must be nonnegative");
  require(std::isfinite(coupling) && coupling >= 0.0, "drive: nonlinear coupling must be nonnegative");
  require(std::isfinite(detuning), "drive: detuning must be finite");
}

double VariancePoint::variance_db() const { return to_db(variance); }

double to_db(double variance) {
  if (!(variance > 0.0)) throw DomainError("variance must be positive to express in dB");
  return 10.0 * std::log10(variance);
}

double from_db(double db) { return std::pow(10.0, db / 10.0); }

double effective_frequency(const ResonanceTriplet& t) {
  require(t.pump > 0.0 && t.signal > 0.0 && t.idler > 0.0, "resonance frequencies must be positive");
  return std::pow(t.pump * t.pump * t.signal * t.idler, 0.25);
}

double lambda_coeff(const RingParams& params) {
  const double w_bar = params.mean_frequency();
  require(std::isfinite(w_bar) && w_bar > 0.0, "lambda: mean frequency must be positive");
  require(std::isfinite(params.round_trip_length) && params.round_trip_length > 0.0,
          "lambda: round-trip length must be positive");
  require(params.group_velocity >= 0.0 && params.nonlinear_parameter >= 0.0,
          "lambda: group velocity and nonlinear parameter must be nonnegative");
  return kReducedPlanck * w_bar * params.group_velocity * params.group_velocity *
         params.nonlinear_parameter / params.round_trip_length;
}

double gain(const RingParams& params, const PumpDrive& drive) {
  drive.validate();
  const double gamma = params.gamma_mean();
  require(std::isfinite(gamma) && gamma > 0.0, "gain: dissipation rate must be positive");
  return drive.coupling * drive.intracavity_photons / gamma;
}

double effective_detuning(const RingParams& params, const PumpDrive& drive) {
  switch (drive.detuning_mode) {
    case DetuningMode::kLockedZero:
      return 0.0;
    case DetuningMode::kLockedShifted:
      return gain(params, drive) * params.gamma_mean();
    case DetuningMode::kExplicit:
      return drive.detuning;
  }
  return 0.0;
}

double dwell_time(const RingParams& params) {
  require(std::isfinite(params.loaded_q) && params.loaded_q > 0.0, "dwell time: loaded Q must be positive");
  const double w_bar = params.mean_frequency();
  require(std::isfinite(w_bar) && w_bar > 0.0, "dwell time: mean frequency must be positive");
  return 2.0 * params.loaded_q / w_bar;
}

PumpDrive drive_for_gain(const RingParams& params, double g, DetuningMode mode, double detuning) {
  require(std::isfinite(g) && g >= 0.0, "gain must be nonnegative");
  params.validate();
  PumpDrive drive;
  double coupling = 0.0;
  if (params.round_trip_length > 0.0) coupling = lambda_coeff(params);
  if (!(coupling > 0.0)) coupling = params.gamma_mean();
  drive.coupling = coupling;
  drive.intracavity_photons = g * params.gamma_mean() / coupling;
  drive.detuning_mode = mode;
  drive.detuning = detuning;
  return drive;
}

MomentSpectrum moment_spectrum(const RingParams& params, const PumpDrive& drive, double sideband) {
  params.validate();
  drive.validate();
  MomentSpectrum m = raw_moments(params, drive, sideband);
  const double dn = params.downstream_efficiency;
  m.n_signal *= dn;
  m.n_idler *= dn;
  m.m_signal_idler *= dn;
  m.m_idler_signal *= dn;
  return m;
}

VariancePoint quadrature_variance(const RingParams& params, const PumpDrive& drive, double phase_signal,
                                  double phase_idler, double sideband) {
  const SidebandPair p = sideband_pair(params, drive, sideband);
  const double phase_sum = phase_signal + phase_idler;
  const std::complex<double> rot = std::polar(1.0, -phase_sum);
  VariancePoint v;
  v.sideband = sideband;
  v.phase_sum = phase_sum;
  v.variance = 1.0 + p.n_bar_sum + 2.0 * (rot * p.m_bar).real();
  return v;
}

ExtremalVariances phase_extremized_variances(const RingParams& params, const PumpDrive& drive,
                                             double sideband) {
  const SidebandPair p = sideband_pair(params, drive, sideband);
  const double base = 1.0 + p.n_bar_sum;
  const double swing = 2.0 * std::abs(p.m_bar);
  return {base + swing, base - swing};
}

ExtremalVariances extremal_variances(double g, double eta) {
  require(std::isfinite(g) && g >= 0.0, "extremal variances: g must be nonnegative");
  require(is_efficiency(eta), "extremal variances: efficiency must lie in [0, 1]");
  const double root = std::sqrt(1.0 + 4.0 * g * g);
  // 2g - sqrt(1 + 4g^2) = -1 / (2g + sqrt(1 + 4g^2)) avoids cancellation at large g.
  return {1.0 + 4.0 * eta * g * (2.0 * g + root), 1.0 - 4.0 * eta * g / (2.0 * g + root)};
}

ExtremalVariances variances_delta_zero(double g, double eta, double sideband_over_gamma) {
  require(std::isfinite(g) && g >= 0.0, "zero-detuning variances: g must be nonnegative");
  require(is_efficiency(eta), "zero-detuning variances: efficiency must lie in [0, 1]");
  require(std::isfinite(sideband_over_gamma), "zero-detuning variances: sideband must be finite");
  if (g >= 1.0) {
    std::ostringstream os;
    os << "zero-detuning variance at or above threshold: g=" << g << " omega/gamma=" << sideband_over_gamma;
    throw SingularityError(os.str(), g, 0.0, sideband_over_gamma);
  }
  const double w2 = sideband_over_gamma * sideband_over_gamma;
  return {1.0 + 4.0 * g * eta / ((1.0 - g) * (1.0 - g) + w2),
          1.0 - 4.0 * g * eta / ((1.0 + g) * (1.0 + g) + w2)};
}

std::vector<SpectrumRow> squeezing_spectrum(const RingParams& params, const PumpDrive& drive,
                                            std::span<const double> sidebands, unsigned threads) {
  params.validate();
  drive.validate();
  for (double w : sidebands) require(std::isfinite(w), "spectrum: sideband grid must be finite");
  std::vector<SpectrumRow> rows(sidebands.size());
  parallel_for_chunks(sidebands.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const ExtremalVariances v = phase_extremized_variances(params, drive, sidebands[i]);
      rows[i] = {sidebands[i], to_db(v.plus), to_db(v.minus)};
    }
  });
  return rows;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  require(lo > 0.0 && hi >= lo, "log grid: need 0 < lo <= hi");
  require(n >= 1, "log grid: need at least one point");
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double step = std::log(hi / lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo * std::exp(step * static_cast<double>(i));
  out.back() = hi;
  return out;
}

}  // namespace ringsqz
