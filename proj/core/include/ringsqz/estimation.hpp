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

// Parameter inference: spectral and power-scan fits to the cavity squeezing model,
// linear fits for number-difference and power-scaling data, and subset statistics.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ringsqz/least_squares.hpp"

namespace ringsqz {

struct SubsetStats {
  std::vector<double> values;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation across subsets
};

/// Requires at least two subset values.
SubsetStats subset_stats(std::span<const double> values);

/// Partition `samples` into `subsets` equal contiguous blocks and apply `statistic`
/// to each. Samples past the last full block are dropped.
template <class T, class Statistic>
SubsetStats subset_stats(std::span<const T> samples, std::size_t subsets, Statistic&& statistic);

enum class Branch { kPlus, kMinus };

enum class SpectrumModel {
  kLockedShifted,  // detuning = g * gamma
  kLockedZero,     // detuning = 0
  kFreeDetuning,   // detuning fitted
};

struct SpectrumPoint {
  double sideband = 0.0;  // rad/s
  double variance_db = 0.0;
  Branch branch = Branch::kPlus;
};

/// Parameter starting values; zero means "estimate from the data".
struct SpectrumGuess {
  double g = 0.0;
  double eta = 0.0;
  double gamma = 0.0;
  double detuning_over_gamma = 0.0;
};

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<double> errors;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> notes;

  double value(const std::string& name) const;
  double error(const std::string& name) const;
};

/// Phase-extremized variance (linear, vacuum = 1) of the symmetric cavity model.
/// detuning_over_gamma is only read for kFreeDetuning.
double spectrum_model_variance(SpectrumModel model, Branch branch, double g, double eta, double gamma,
                               double detuning_over_gamma, double sideband);

/// Residuals in linear variance space for internal (unconstrained) parameters
/// theta = (log g, logit eta, log gamma[, detuning / gamma]).
std::vector<double> spectrum_residuals(SpectrumModel model, std::span<const SpectrumPoint> points,
                                       std::span<const double> theta);

/// Forward-mode derivative of spectrum_residuals with respect to theta (row-major,
/// points x parameters).
Matrix spectrum_residual_jacobian(SpectrumModel model, std::span<const SpectrumPoint> points,
                                  std::span<const double> theta);

FitResult fit_spectrum(std::span<const SpectrumPoint> points, SpectrumModel model,
                       const SpectrumGuess& guess = {}, const LeastSquaresOptions& options = {});

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_error = 0.0;
  double intercept_error = 0.0;
  double residual_norm = 0.0;
};

/// Ordinary least squares y = slope * x + intercept; needs >= 3 points.
LinearFit ordinary_least_squares(std::span<const double> x, std::span<const double> y);

struct NrfSlopeFit {
  LinearFit line;
  double eta = 0.0;  // 1 - slope
  double eta_error = 0.0;
};

NrfSlopeFit fit_nrf_slope(std::span<const double> n_tot, std::span<const double> variance_difference);

/// OLS slope of log(n_tot) against log(power). All values must be positive.
LinearFit fit_power_scaling(std::span<const double> power, std::span<const double> n_tot);

struct PowerScanPoint {
  double power = 0.0;
  double v_plus_db = 0.0;
  double v_minus_db = 0.0;
};

/// Joint fit of both branches of the locked-shifted zero-sideband variances with
/// g = k * P. Parameters reported as ("eta", "k").
FitResult fit_variance_vs_power(std::span<const PowerScanPoint> points, double k_guess = 0.0,
                                double eta_guess = 0.0, const LeastSquaresOptions& options = {});

// ---------------------------------------------------------------------------

template <class T, class Statistic>
SubsetStats subset_stats(std::span<const T> samples, std::size_t subsets, Statistic&& statistic) {
  const std::size_t block = subsets == 0 ? 0 : samples.size() / subsets;
  std::vector<double> values;
  values.reserve(subsets);
  for (std::size_t s = 0; s < subsets && block > 0; ++s) {
    values.push_back(statistic(samples.subspan(s * block, block)));
  }
  return subset_stats(std::span<const double>(values));
}

}  // namespace ringsqz
