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

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "ringsqz/errors.hpp"

namespace ringsqz {
namespace {

using testing::periodic_min;
using testing::symmetric_variances;

constexpr double kOmega1550 = 1.216e15;

RingParams make_ring(double escape = 1.0, double downstream = 1.0) {
  RingParams p;
  p.loaded_q = 8e5;
  p.resonance_angular_frequency = kOmega1550;
  p.escape_efficiency_signal = escape;
  p.escape_efficiency_idler = escape;
  p.downstream_efficiency = downstream;
  return p;
}

RingParams geometry_ring() {
  RingParams p = make_ring();
  p.group_velocity = kSpeedOfLight / 2.1;
  p.nonlinear_parameter = 1.0;
  p.round_trip_length = kTwoPi * 120e-6;
  return p;
}

// Phase-scanned min and max of the general quadrature variance.
std::pair<double, double> scanned_extrema(const RingParams& p, const PumpDrive& d, double sideband) {
  const auto vmin = periodic_min([&](double phi) { return quadrature_variance(p, d, phi, 0.0, sideband).variance; });
  const auto vmax =
      periodic_min([&](double phi) { return -quadrature_variance(p, d, phi, 0.0, sideband).variance; });
  return {vmin.second, -vmax.second};
}

TEST(LambdaCoeff, ZeroNonlinearityGivesZero) {
  RingParams p = geometry_ring();
  p.group_velocity = 0.0;
  EXPECT_EQ(lambda_coeff(p), 0.0);
  p = geometry_ring();
  p.nonlinear_parameter = 0.0;
  EXPECT_EQ(lambda_coeff(p), 0.0);
}

TEST(LambdaCoeff, InverseInRoundTripLength) {
  RingParams p = geometry_ring();
  const double base = lambda_coeff(p);
  p.round_trip_length *= 2.0;
  EXPECT_DOUBLE_EQ(lambda_coeff(p), base / 2.0);
}

TEST(LambdaCoeff, DimensionalExample) {
  // hbar * w * v^2 * gamma / L evaluated by hand: 1.0546e-34 * 1.216e15 * (2.9979e8/2.1)^2 / 7.5398e-4.
  const RingParams p = geometry_ring();
  const double lambda = lambda_coeff(p);
  EXPECT_NEAR(lambda, 3.4664, 1e-3);
  // The acceptance drive at g = 0.45 then needs |beta|^2 = 0.45 * Gamma / Lambda photons.
  const PumpDrive d = drive_for_gain(p, 0.45);
  EXPECT_DOUBLE_EQ(d.coupling, lambda);
  EXPECT_NEAR(d.intracavity_photons, 0.45 * p.gamma_mean() / lambda, 1e-6 * d.intracavity_photons);
  EXPECT_NEAR(gain(p, d), 0.45, 1e-12);
}

TEST(LambdaCoeff, RejectsMissingLength) {
  RingParams p = geometry_ring();
  p.round_trip_length = 0.0;
  EXPECT_THROW(lambda_coeff(p), DomainError);
}

TEST(LambdaCoeff, TripletCollapsesToSingleFrequency) {
  RingParams p = geometry_ring();
  const double base = lambda_coeff(p);
  p.resonances = ResonanceTriplet{kOmega1550, kOmega1550, kOmega1550};
  EXPECT_NEAR(lambda_coeff(p), base, 1e-12 * base);
  EXPECT_NEAR(effective_frequency({4.0, 2.0, 8.0}), std::pow(16.0 * 2.0 * 8.0, 0.25), 1e-12);
}

TEST(Gain, ZeroPumpAndArithmetic) {
  RingParams p = make_ring();
  PumpDrive d;
  d.coupling = 1e-3 * p.gamma_mean();
  d.intracavity_photons = 0.0;
  EXPECT_EQ(gain(p, d), 0.0);
  d.intracavity_photons = 450.0;
  EXPECT_NEAR(gain(p, d), 0.45, 1e-12);
  d.intracavity_photons = 900.0;
  EXPECT_NEAR(gain(p, d), 0.90, 1e-12);
}

TEST(Gain, NotClampedAboveOne) {
  const RingParams p = make_ring();
  EXPECT_NEAR(gain(p, drive_for_gain(p, 1.7)), 1.7, 1e-12);
}

TEST(Gain, DefaultDissipationFromQ) {
  const RingParams p = make_ring();
  EXPECT_NEAR(p.gamma_mean(), kOmega1550 / (2.0 * 8e5), 1e-3);
  EXPECT_NEAR(p.gamma_mean(), 7.6e8, 1e6);
}

TEST(DwellTime, ExampleAndScaling) {
  RingParams p = make_ring();
  EXPECT_NEAR(dwell_time(p), 1.3158e-9, 1e-12);
  p.loaded_q *= 2.0;
  EXPECT_NEAR(dwell_time(p), 2.6316e-9, 1e-12);
  p.loaded_q = 0.0;
  EXPECT_THROW(dwell_time(p), DomainError);
}

TEST(RingParams, ValidateRejectsBadEfficiency) {
  RingParams p = make_ring();
  p.escape_efficiency_signal = 1.2;
  EXPECT_THROW(p.validate(), DomainError);
  p = make_ring();
  p.dissipation_idler = -1.0;
  EXPECT_THROW(p.validate(), DomainError);
}

TEST(MomentSpectrum, NoPumpIsVacuum) {
  const RingParams p = make_ring();
  const MomentSpectrum m = moment_spectrum(p, drive_for_gain(p, 0.0), 0.3 * p.gamma_mean());
  EXPECT_EQ(m.n_signal, 0.0);
  EXPECT_EQ(m.n_idler, 0.0);
  EXPECT_EQ(std::abs(m.m_signal_idler), 0.0);
}

TEST(MomentSpectrum, LorentzianRolloff) {
  const RingParams p = make_ring();
  const PumpDrive d = drive_for_gain(p, 0.5);
  const MomentSpectrum near = moment_spectrum(p, d, 0.0);
  const MomentSpectrum far = moment_spectrum(p, d, 1e4 * p.gamma_mean());
  EXPECT_GT(near.n_signal, 0.1);
  EXPECT_LT(far.n_signal, 1e-12);
  EXPECT_LT(std::abs(far.m_signal_idler), 1e-6);
}

TEST(MomentSpectrum, SymmetricArmsProduceEqualFluxes) {
  const RingParams p = make_ring(0.8, 0.9);
  const PumpDrive d = drive_for_gain(p, 0.6);
  for (double w : {0.0, 0.3, 2.0}) {
    const MomentSpectrum m = moment_spectrum(p, d, w * p.gamma_mean());
    EXPECT_DOUBLE_EQ(m.n_signal, m.n_idler);
  }
}

TEST(MomentSpectrum, AssembledVarianceMatchesExtremalForm) {
  const RingParams p = make_ring(0.75, 0.5);
  for (double g : {0.1, 0.45, 0.9, 1.5}) {
    const ExtremalVariances v = phase_extremized_variances(p, drive_for_gain(p, g), 0.0);
    const ExtremalVariances ref = extremal_variances(g, 0.375);
    EXPECT_NEAR(v.plus / ref.plus, 1.0, 1e-9) << g;
    EXPECT_NEAR(v.minus / ref.minus, 1.0, 1e-9) << g;
  }
}

TEST(MomentSpectrum, MatchesHandDerivedSymmetricForm) {
  const RingParams p = make_ring(0.9, 0.8);
  const double eta = 0.72;
  const double gamma = p.gamma_mean();
  for (double g : {0.2, 0.7}) {
    for (double delta : {0.0, 0.3, 1.1}) {
      for (double w : {0.0, 0.4, 2.5}) {
        const PumpDrive d = drive_for_gain(p, g, DetuningMode::kExplicit, delta * gamma);
        const ExtremalVariances v = phase_extremized_variances(p, d, w * gamma);
        const auto [plus, minus] = symmetric_variances(g, eta, delta, w);
        EXPECT_NEAR(v.plus, plus, 1e-10 * plus);
        EXPECT_NEAR(v.minus, minus, 1e-10);
      }
    }
  }
}

TEST(MomentSpectrum, ThresholdIsSingular) {
  const RingParams p = make_ring();
  const PumpDrive d = drive_for_gain(p, 1.0, DetuningMode::kLockedZero);
  try {
    moment_spectrum(p, d, 0.0);
    FAIL() << "expected SingularityError";
  } catch (const SingularityError& e) {
    EXPECT_NEAR(e.gain(), 1.0, 1e-12);
    EXPECT_EQ(e.detuning(), 0.0);
    EXPECT_EQ(e.sideband(), 0.0);
  }
}

TEST(QuadratureVariance, VacuumIsOne) {
  const RingParams p = make_ring();
  const PumpDrive d = drive_for_gain(p, 0.0);
  for (double phi : {0.0, 1.0, 2.5})
    for (double w : {0.0, 1e8, 1e10}) EXPECT_DOUBLE_EQ(quadrature_variance(p, d, phi, 0.3, w).variance, 1.0);
}

TEST(QuadratureVariance, DependsOnlyOnPhaseSum) {
  const RingParams p = make_ring(0.8);
  const PumpDrive d = drive_for_gain(p, 0.6);
  const double w = 0.4 * p.gamma_mean();
  for (double sum : {0.0, 0.7, 2.9, 5.0}) {
    const double ref = quadrature_variance(p, d, sum, 0.0, w).variance;
    for (double split : {-3.0, -0.4, 0.9, 4.2}) {
      EXPECT_NEAR(quadrature_variance(p, d, sum - split, split, w).variance, ref, 1e-12 * ref);
    }
  }
}

TEST(QuadratureVariance, ExtremaArePiApart) {
  const RingParams p = make_ring(0.8);
  const PumpDrive d = drive_for_gain(p, 0.6);
  const double w = 0.4 * p.gamma_mean();
  const auto vmin = periodic_min([&](double phi) { return quadrature_variance(p, d, phi, 0.0, w).variance; });
  const auto vmax = periodic_min([&](double phi) { return -quadrature_variance(p, d, phi, 0.0, w).variance; });
  const double gap = std::remainder(vmax.first - vmin.first, kTwoPi);
  EXPECT_NEAR(std::abs(gap), M_PI, 1e-6);
}

TEST(QuadratureVariance, ScannedExtremaMatchClosedForm) {
  const RingParams p = make_ring(0.9, 0.7);
  const PumpDrive d = drive_for_gain(p, 0.55);
  const double w = 0.25 * p.gamma_mean();
  const auto [vmin, vmax] = scanned_extrema(p, d, w);
  const ExtremalVariances v = phase_extremized_variances(p, d, w);
  EXPECT_NEAR(v.minus, vmin, 1e-10);
  EXPECT_NEAR(v.plus, vmax, 1e-10 * vmax);
}

TEST(QuadratureVariance, MinimumUncertaintyAtUnitEfficiency) {
  const RingParams p = make_ring();
  for (DetuningMode mode : {DetuningMode::kLockedZero, DetuningMode::kLockedShifted}) {
    for (double g : {0.1, 0.5, 0.8}) {
      for (double w : {0.0, 0.5, 1.0}) {
        const auto [vmin, vmax] = scanned_extrema(p, drive_for_gain(p, g, mode), w * p.gamma_mean());
        EXPECT_NEAR(vmin * vmax, 1.0, 1e-8) << g << " " << w;
      }
    }
  }
}

TEST(ExtremalVariances, ZeroGainIsVacuum) {
  const ExtremalVariances v = extremal_variances(0.0, 0.6);
  EXPECT_EQ(v.plus, 1.0);
  EXPECT_EQ(v.minus, 1.0);
}

TEST(ExtremalVariances, HalfGainLossless) {
  const ExtremalVariances v = extremal_variances(0.5, 1.0);
  EXPECT_NEAR(v.plus, 5.8284, 1e-4);
  EXPECT_NEAR(v.minus, 0.1716, 1e-4);
  EXPECT_NEAR(v.plus * v.minus, 1.0, 1e-12);
  // Oracle: phase scan of the general variance at Omega = 0 with the shifted detuning.
  const RingParams p = make_ring();
  const auto [vmin, vmax] = scanned_extrema(p, drive_for_gain(p, 0.5), 0.0);
  EXPECT_NEAR(v.minus, vmin, 1e-10);
  EXPECT_NEAR(v.plus, vmax, 1e-9);
}

TEST(ExtremalVariances, OperatingPoint) {
  EXPECT_NEAR(to_db(extremal_variances(0.45, 0.257).minus), -1.0, 0.01);
  EXPECT_NEAR(to_db(extremal_variances(0.45, 0.75).minus), -4.0, 0.02);
  EXPECT_NEAR(extremal_variances(0.45, 0.257).minus, 0.794, 1e-3);
}

TEST(ExtremalVariances, LossyBound) {
  for (double eta : {0.1, 0.5, 0.9}) {
    for (double g : {0.1, 1.0, 10.0, 1e4}) {
      const ExtremalVariances v = extremal_variances(g, eta);
      EXPECT_GT(v.minus, 1.0 - eta);
      EXPECT_LE(v.minus, 1.0);
      EXPECT_GE(v.plus, 1.0);
    }
    EXPECT_NEAR(extremal_variances(1e6, eta).minus, 1.0 - eta, 1e-6);
  }
}

TEST(ExtremalVariances, RejectsBadInputs) {
  EXPECT_THROW(extremal_variances(-0.1, 0.5), DomainError);
  EXPECT_THROW(extremal_variances(0.1, 1.5), DomainError);
}

TEST(VariancesDeltaZero, Examples) {
  const ExtremalVariances far = variances_delta_zero(0.5, 1.0, 1e6);
  EXPECT_NEAR(far.plus, 1.0, 1e-11);
  EXPECT_NEAR(far.minus, 1.0, 1e-11);
  const ExtremalVariances half = variances_delta_zero(0.5, 1.0, 0.0);
  EXPECT_NEAR(half.plus, 9.0, 1e-12);
  EXPECT_NEAR(half.minus, 1.0 / 9.0, 1e-12);
  EXPECT_NEAR(half.plus * half.minus, 1.0, 1e-12);
  EXPECT_NEAR(variances_delta_zero(0.9, 1.0, 0.0).plus, 361.0, 1e-9);
}

TEST(VariancesDeltaZero, MatchesMomentAssembly) {
  const RingParams p = make_ring(0.8, 0.9);
  for (double g : {0.3, 0.9}) {
    for (double w : {0.0, 0.5, 3.0}) {
      const ExtremalVariances ref = variances_delta_zero(g, 0.72, w);
      const ExtremalVariances v =
          phase_extremized_variances(p, drive_for_gain(p, g, DetuningMode::kLockedZero), w * p.gamma_mean());
      EXPECT_NEAR(v.plus / ref.plus, 1.0, 1e-9);
      EXPECT_NEAR(v.minus / ref.minus, 1.0, 1e-9);
    }
  }
}

TEST(VariancesDeltaZero, ThresholdThrows) {
  EXPECT_THROW(variances_delta_zero(1.0, 1.0, 0.0), SingularityError);
  EXPECT_THROW(variances_delta_zero(1.3, 1.0, 0.0), SingularityError);
}

TEST(SqueezingSpectrum, VacuumIsFlat) {
  const RingParams p = make_ring();
  const auto grid = log_grid(kTwoPi * 20e6, kTwoPi * 1e9, 50);
  for (const auto& row : squeezing_spectrum(p, drive_for_gain(p, 0.0), grid)) {
    EXPECT_EQ(row.v_plus_db, 0.0);
    EXPECT_EQ(row.v_minus_db, 0.0);
  }
}

TEST(SqueezingSpectrum, SqueezingDegradesAwayFromResonance) {
  const RingParams p = make_ring(0.75, 0.5);
  for (double g : {0.2, 0.45, 1.0, 2.0}) {
    // Dense sampling oracle: consecutive points on a fine grid never get more squeezed.
    const auto grid = log_grid(1e5, 1e3 * p.gamma_mean(), 2000);
    const auto rows = squeezing_spectrum(p, drive_for_gain(p, g), grid);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GE(rows[i].v_minus_db, rows[i - 1].v_minus_db - 1e-12);
  }
}

TEST(SqueezingSpectrum, EfficiencyDeepensSqueezing) {
  const auto grid = log_grid(1e7, 1e10, 20);
  const RingParams lossy = make_ring(0.5);
  const RingParams better = make_ring(0.9);
  const auto a = squeezing_spectrum(lossy, drive_for_gain(lossy, 0.45), grid);
  const auto b = squeezing_spectrum(better, drive_for_gain(better, 0.45), grid);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_LT(b[i].v_minus_db, a[i].v_minus_db);
}

TEST(SqueezingSpectrum, ThreadCountDoesNotChangeOutput) {
  const RingParams p = make_ring(0.75, 0.5);
  const auto grid = log_grid(1e7, 1e10, 101);
  const auto one = squeezing_spectrum(p, drive_for_gain(p, 0.45), grid, 1);
  const auto four = squeezing_spectrum(p, drive_for_gain(p, 0.45), grid, 4);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_EQ(one[i].v_plus_db, four[i].v_plus_db);
    EXPECT_EQ(one[i].v_minus_db, four[i].v_minus_db);
  }
}

TEST(Decibels, RoundTrip) {
  EXPECT_NEAR(from_db(to_db(0.37)), 0.37, 1e-15);
  EXPECT_THROW(to_db(0.0), DomainError);
}

TEST(LogGrid, EndpointsAndSpacing) {
  const auto grid = log_grid(1.0, 100.0, 3);
  ASSERT_EQ(grid.size(), 3u);
  EXPECT_DOUBLE_EQ(grid[0], 1.0);
  EXPECT_NEAR(grid[1], 10.0, 1e-12);
  EXPECT_DOUBLE_EQ(grid[2], 100.0);
}

}  // namespace
}  // namespace ringsqz
