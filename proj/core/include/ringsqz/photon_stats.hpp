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

// Monte Carlo photon counting on a lossy multimode two-mode squeezed vacuum with
// Poisson background, and the count-statistics estimators (number-difference
// variance, noise reduction factor, unheralded g2) with subset error bars.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace ringsqz {

enum class Arm { kSignal, kIdler };

/// Per-temporal-mode squeezing parameters plus per-arm efficiency and background.
struct SchmidtSpectrum {
  std::vector<double> squeezing;  // r_l >= 0
  double eta_signal = 1.0;
  double eta_idler = 1.0;
  double noise_mean_signal = 0.0;  // photons per pulse
  double noise_mean_idler = 0.0;

  void validate() const;

  /// K equal modes sharing total mean pair number `mean_pairs` (sum of sinh^2 r).
  static SchmidtSpectrum equal_modes(std::size_t modes, double mean_pairs, double eta = 1.0);
};

struct PhotonPair {
  std::uint32_t signal = 0;
  std::uint32_t idler = 0;
};

struct CountSet {
  std::vector<PhotonPair> pulses;
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> saturated;  // 1 when either arm exceeds the saturation threshold

  std::size_t size() const { return pulses.size(); }
  std::vector<std::uint32_t> column(Arm arm) const;
};

struct SamplerOptions {
  unsigned threads = 1;
  std::uint32_t saturation_threshold = 10;  // counts above this are flagged
};

/// Draws `num_pulses` pulses. Each (seed, pulse, mode, stage) has its own substream,
/// so the result does not depend on the thread count.
CountSet sample_counts(const SchmidtSpectrum& spectrum, std::size_t num_pulses, std::uint64_t seed,
                       const SamplerOptions& options = {});

/// Pair-number draw by inverse CDF of P(n) = tanh^2n(r) / cosh^2(r), capped where the
/// cumulative probability reaches 1 - 1e-12.
std::uint32_t sample_pair_number(double r, double uniform);

struct EstimatorOptions {
  bool include_saturated = false;
  std::size_t subsets = 8;
};

struct DifferenceMoments {
  double variance_difference = 0.0;  // unbiased sample variance of n_S - n_I
  double total_mean = 0.0;           // mean of n_S + n_I
};

/// A subset-averaged estimate.
struct Estimate {
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> subset_values;
  std::vector<std::string> notes;
};

struct CountStatistics {
  Estimate n_tot;
  Estimate variance_difference;
  Estimate nrf;
  Estimate g2_signal;
  Estimate g2_idler;
  std::size_t pulses_used = 0;
  std::size_t pulses_saturated = 0;
  std::vector<std::string> notes;
};

DifferenceMoments vardiff_and_total(const CountSet& counts, const EstimatorOptions& options = {});

/// V_dn / n_tot over `options.subsets` equal subsets (remainder dropped).
Estimate nrf(const CountSet& counts, const EstimatorOptions& options = {});

/// (<n^2> - <n>) / <n>^2 per subset.
Estimate g2(const CountSet& counts, Arm arm, const EstimatorOptions& options = {});

CountStatistics count_statistics(const CountSet& counts, const EstimatorOptions& options = {});

/// K = 1 / (g2 - 1), valid under the equal-population mode model.
double effective_mode_number(double g2_value);

/// g2 after adding independent Poisson noise of mean `noise_mean` to light with
/// noiseless g2 `g2_noiseless` and mean `signal_mean`.
double noise_degraded_g2(double g2_noiseless, double signal_mean, double noise_mean);

/// Same, for K equal modes each with squeezing r, detected with efficiency eta.
double noise_degraded_g2(double r, std::size_t modes, double noise_mean, double eta);

// Closed-form expectations for a SchmidtSpectrum.
double expected_mean(const SchmidtSpectrum& spectrum, Arm arm);
/// General unequal-efficiency variance of n_S - n_I, background included.
double expected_variance_difference(const SchmidtSpectrum& spectrum);
double expected_nrf(const SchmidtSpectrum& spectrum);
double expected_g2(const SchmidtSpectrum& spectrum, Arm arm);

}  // namespace ringsqz
