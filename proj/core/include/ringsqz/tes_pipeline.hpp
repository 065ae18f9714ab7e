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

// Photon-number assignment for transition-edge-sensor voltage traces: principal
// component scores, a square-root-rule histogram, a Gaussian mixture fitted to it,
// and discretization at the mixture's intersection points. A synthetic trace
// generator closes the loop for round-trip validation.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ringsqz/least_squares.hpp"
#include "ringsqz/photon_stats.hpp"

namespace ringsqz {

/// num_pulses x num_samples voltages, row-major, one row per pulse.
struct TraceSet {
  std::size_t num_pulses = 0;
  std::size_t num_samples = 0;
  double sample_period = 1.0;  // s
  std::vector<float> samples;

  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(samples).subspan(i * num_samples, num_samples);
  }
  std::span<float> row(std::size_t i) { return std::span<float>(samples).subspan(i * num_samples, num_samples); }

  void validate() const;
};

/// Single-photon detector response used by the synthetic generator.
struct PulseTemplate {
  std::vector<double> shape;    // unit peak
  double per_photon_gain = 1.0;  // V
  double noise_sigma = 0.0;      // V, white, per sample
  double nonlinearity = 1.0;     // each added photon contributes this factor times the previous one

  void validate() const;

  /// Pulse height in units of per_photon_gain for n photons.
  double response(std::uint32_t n) const;

  /// Separation of the n = 0 and n = 1 classes in units of the score noise, i.e.
  /// per_photon_gain * |shape|_2 / noise_sigma.
  double score_separation_sigmas() const;

  /// exp(-t/decay) - exp(-t/rise) sampled at t = k * sample_period, normalized to unit peak.
  static PulseTemplate exponential(std::size_t samples, double sample_period, double rise_time, double decay_time);

  /// Copy with per_photon_gain chosen so that score_separation_sigmas() == separation.
  PulseTemplate with_separation(double separation, double noise) const;
};

TraceSet generate_traces(std::span<const std::uint32_t> photon_numbers, const PulseTemplate& tmpl,
                         double sample_period, std::uint64_t seed, unsigned threads = 1);

struct PrincipalComponent {
  std::vector<double> mean_trace;
  std::vector<double> component;  // unit norm, nonnegative overlap with the mean trace
  double eigenvalue = 0.0;
  double explained_fraction = 0.0;
};

/// Leading eigenvector of the num_samples x num_samples second-moment matrix of the
/// mean-subtracted traces.
PrincipalComponent principal_component(const TraceSet& traces);

/// s_i = sum_t (v_i(t) - mean(t)) pc(t) dt
std::vector<double> project_scores(const TraceSet& traces, std::span<const double> mean_trace,
                                   std::span<const double> component, unsigned threads = 1);

/// floor(sqrt(N) / 4), at least 8 (223 bins for N = 800000). Requires N >= 16.
std::size_t bin_count(std::size_t num_samples);

struct ScoreHistogram {
  std::size_t num_bins = 0;
  std::vector<double> edges;   // num_bins + 1, ascending
  std::vector<double> counts;  // num_bins
  std::size_t total = 0;

  double center(std::size_t bin) const { return 0.5 * (edges[bin] + edges[bin + 1]); }
  double width() const { return edges[1] - edges[0]; }
};

ScoreHistogram make_histogram(std::span<const double> scores);
ScoreHistogram make_histogram(std::span<const double> scores, std::size_t num_bins);

struct GaussianComponent {
  double amplitude = 0.0;  // peak height in counts per bin
  double mean = 0.0;
  double sigma = 1.0;
};

struct GaussianMixture {
  std::vector<GaussianComponent> components;  // ascending means
  std::vector<double> boundaries;             // components.size() - 1, ascending
  double residual_norm = 0.0;
  std::vector<double> scan_residuals;  // weighted residual norm for each tried component count
  std::vector<std::string> notes;
};

struct MixtureOptions {
  std::size_t max_components = 12;
  double improvement_threshold = 0.05;
  std::size_t smoothing_window = 5;
  // Count-scale residuals put a 1e-8 gradient cosine below working precision.
  LeastSquaresOptions solver{.gradient_tolerance = 1e-6};
};

/// Intersection of the two weighted densities lying between their means; falls back
/// to the midpoint (and sets *fell_back) when no root lies between them.
double gaussian_boundary(const GaussianComponent& lower, const GaussianComponent& upper,
                         bool* fell_back = nullptr);

GaussianMixture fit_mixture(const ScoreHistogram& histogram, const MixtureOptions& options = {});

struct Assignment {
  std::vector<std::uint32_t> numbers;
  std::size_t tail_count = 0;  // scores more than 5 sigma above the top component
  double tail_fraction = 0.0;
};

/// Photon number = index of the boundary interval holding the score; a score equal to
/// a boundary goes to the lower class.
Assignment assign_numbers(std::span<const double> scores, const GaussianMixture& mixture);

struct ChannelAnalysis {
  PrincipalComponent pca;
  ScoreHistogram histogram;
  GaussianMixture mixture;
  Assignment assignment;
};

/// PCA -> scores -> histogram -> mixture -> assignment for one detector channel.
ChannelAnalysis classify_traces(const TraceSet& traces, const MixtureOptions& options = {}, unsigned threads = 1);

struct RoundTripReport {
  double misclassification_rate = 0.0;  // pulses where either arm was misassigned
  double rate_signal = 0.0;
  double rate_idler = 0.0;
  double tail_fraction_signal = 0.0;
  double tail_fraction_idler = 0.0;
  GaussianMixture mixture_signal;
  GaussianMixture mixture_idler;
  CountSet recovered;
  std::vector<std::string> notes;
};

/// Seed used by round_trip for one arm's synthetic traces.
std::uint64_t arm_trace_seed(std::uint64_t seed, Arm arm);

RoundTripReport round_trip(const CountSet& counts, const PulseTemplate& tmpl, double sample_period,
                           std::uint64_t seed, const MixtureOptions& options = {}, unsigned threads = 1);

}  // namespace ringsqz
