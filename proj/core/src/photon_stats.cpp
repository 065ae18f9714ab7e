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

#include "ringsqz/photon_stats.hpp"

#include <cmath>
#include <random>
#include <span>
#include <sstream>

#include "ringsqz/errors.hpp"
#include "ringsqz/estimation.hpp"
#include "ringsqz/parallel.hpp"
#include "ringsqz/rng.hpp"

namespace ringsqz {
namespace {

constexpr double kTailMass = 1e-12;

std::uint32_t thin(std::uint32_t n, double eta, SubstreamRng& rng) {
  if (n == 0 || eta <= 0.0) return 0;
  if (eta >= 1.0) return n;
  std::binomial_distribution<std::uint32_t> dist(n, eta);
  return dist(rng);
}

std::uint32_t poisson(double mean, SubstreamRng& rng) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<std::uint32_t> dist(mean);
  return dist(rng);
}

struct Filtered {
  std::vector<PhotonPair> pulses;
  std::vector<std::string> notes;
};

Filtered usable_pulses(const CountSet& counts, const EstimatorOptions& options) {
  Filtered out;
  out.pulses.reserve(counts.size());
  const bool have_flags = counts.saturated.size() == counts.size();
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (!options.include_saturated && have_flags && counts.saturated[i]) {
      ++dropped;
      continue;
    }
    out.pulses.push_back(counts.pulses[i]);
  }
  if (dropped > 0) {
    std::ostringstream os;
    os << "excluded " << dropped << " saturated pulses";
    out.notes.push_back(os.str());
  }
  return out;
}

void note_remainder(std::size_t total, std::size_t subsets, std::vector<std::string>& notes) {
  if (subsets == 0) return;
  const std::size_t rem = total % subsets;
  if (rem != 0) {
    std::ostringstream os;
    os << "dropped " << rem << " pulses that do not fill " << subsets << " equal subsets";
    notes.push_back(os.str());
  }
}

double difference_variance(std::span<const PhotonPair> p) {
  const double n = static_cast<double>(p.size());
  double mean = 0.0;
  for (const auto& x : p) mean += static_cast<double>(x.signal) - static_cast<double>(x.idler);
  mean /= n;
  double ss = 0.0;
  for (const auto& x : p) {
    const double d = static_cast<double>(x.signal) - static_cast<double>(x.idler) - mean;
    ss += d * d;
  }
  return ss / (n - 1.0);
}

double total_mean(std::span<const PhotonPair> p) {
  double s = 0.0;
  for (const auto& x : p) s += static_cast<double>(x.signal) + static_cast<double>(x.idler);
  return s / static_cast<double>(p.size());
}

double nrf_of(std::span<const PhotonPair> p) {
  if (p.size() < 2) throw DegenerateDataError("NRF needs at least two pulses per subset");
  const double n_tot = total_mean(p);
  if (!(n_tot > 0.0)) throw DegenerateDataError("NRF undefined: n_tot = 0 (no detected photons)");
  return difference_variance(p) / n_tot;
}

double g2_of(std::span<const PhotonPair> p, Arm arm) {
  double s1 = 0.0, s2 = 0.0;
  for (const auto& x : p) {
    const double n = static_cast<double>(arm == Arm::kSignal ? x.signal : x.idler);
    s1 += n;
    s2 += n * n;
  }
  const double count = static_cast<double>(p.size());
  const double mean = s1 / count;
  if (!(mean > 0.0)) {
    throw DegenerateDataError(std::string("g2 undefined: zero mean count in the ") +
                              (arm == Arm::kSignal ? "signal" : "idler") + " arm");
  }
  return (s2 / count - mean) / (mean * mean);
}

template <class Statistic>
Estimate subset_estimate(const Filtered& data, const EstimatorOptions& options, Statistic&& stat) {
  if (options.subsets < 2) throw DomainError("subset estimate needs at least two subsets");
  if (data.pulses.size() < 2 * options.subsets) {
    throw DegenerateDataError("too few pulses to form the requested subsets");
  }
  const SubsetStats s = subset_stats(std::span<const PhotonPair>(data.pulses), options.subsets, stat);
  Estimate e;
  e.mean = s.mean;
  e.std = s.std;
  e.subset_values = s.values;
  e.notes = data.notes;
  note_remainder(data.pulses.size(), options.subsets, e.notes);
  return e;
}

}  // namespace

void SchmidtSpectrum::validate() const {
  if (squeezing.empty()) throw DomainError("Schmidt spectrum must contain at least one mode");
  for (double r : squeezing) {
    if (!std::isfinite(r) || r < 0.0) throw DomainError("squeezing parameters must be finite and nonnegative");
  }
  auto eff = [](double e) { return std::isfinite(e) && e >= 0.0 && e <= 1.0; };
  if (!eff(eta_signal) || !eff(eta_idler)) throw DomainError("arm efficiencies must lie in [0, 1]");
  if (!(noise_mean_signal >= 0.0) || !(noise_mean_idler >= 0.0) || !std::isfinite(noise_mean_signal) ||
      !std::isfinite(noise_mean_idler)) {
    throw DomainError("background means must be finite and nonnegative");
  }
}

SchmidtSpectrum SchmidtSpectrum::equal_modes(std::size_t modes, double mean_pairs, double eta) {
  if (modes == 0) throw DomainError("need at least one mode");
  if (!(mean_pairs >= 0.0)) throw DomainError("mean pair number must be nonnegative");
  SchmidtSpectrum s;
  s.squeezing.assign(modes, std::asinh(std::sqrt(mean_pairs / static_cast<double>(modes))));
  s.eta_signal = eta;
  s.eta_idler = eta;
  return s;
}

std::vector<std::uint32_t> CountSet::column(Arm arm) const {
  std::vector<std::uint32_t> out(pulses.size());
  for (std::size_t i = 0; i < pulses.size(); ++i) out[i] = arm == Arm::kSignal ? pulses[i].signal : pulses[i].idler;
  return out;
}

std::uint32_t sample_pair_number(double r, double uniform) {
  if (r <= 0.0) return 0;
  const double t = std::tanh(r);
  const double log_q = 2.0 * std::log(t);  // log tanh^2 r < 0
  if (!(log_q < 0.0)) return 0;
  // P(N > n) = q^(n+1); the cap is the first n with P(N > n) <= 1e-12.
  const double cap = std::max(0.0, std::ceil(std::log(kTailMass) / log_q) - 1.0);
  const double n = std::floor(std::log1p(-uniform) / log_q);
  return static_cast<std::uint32_t>(std::min(n, cap));
}

CountSet sample_counts(const SchmidtSpectrum& spectrum, std::size_t num_pulses, std::uint64_t seed,
                       const SamplerOptions& options) {
  spectrum.validate();
  if (num_pulses == 0) throw DomainError("need at least one pulse");
  CountSet out;
  out.seed = seed;
  out.pulses.resize(num_pulses);
  out.saturated.assign(num_pulses, 0);
  const std::size_t modes = spectrum.squeezing.size();

  parallel_for_chunks(num_pulses, options.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      std::uint32_t ns = 0, ni = 0;
      for (std::size_t l = 0; l < modes; ++l) {
        const double r = spectrum.squeezing[l];
        if (r <= 0.0) continue;
        SubstreamRng pair_rng(seed, p, l, RngStage::kPairNumber);
        const std::uint32_t pairs = sample_pair_number(r, pair_rng.uniform());
        SubstreamRng s_rng(seed, p, l, RngStage::kSignalThinning);
        SubstreamRng i_rng(seed, p, l, RngStage::kIdlerThinning);
        ns += thin(pairs, spectrum.eta_signal, s_rng);
        ni += thin(pairs, spectrum.eta_idler, i_rng);
      }
      SubstreamRng bs(seed, p, 0, RngStage::kSignalBackground);
      SubstreamRng bi(seed, p, 0, RngStage::kIdlerBackground);
      ns += poisson(spectrum.noise_mean_signal, bs);
      ni += poisson(spectrum.noise_mean_idler, bi);
      out.pulses[p] = {ns, ni};
      out.saturated[p] = (ns > options.saturation_threshold || ni > options.saturation_threshold) ? 1 : 0;
    }
  });
  return out;
}

DifferenceMoments vardiff_and_total(const CountSet& counts, const EstimatorOptions& options) {
  const Filtered data = usable_pulses(counts, options);
  if (data.pulses.size() < 2) throw DegenerateDataError("number-difference variance needs at least two pulses");
  return {difference_variance(data.pulses), total_mean(data.pulses)};
}

Estimate nrf(const CountSet& counts, const EstimatorOptions& options) {
  return subset_estimate(usable_pulses(counts, options), options,
                         [](std::span<const PhotonPair> p) { return nrf_of(p); });
}

Estimate g2(const CountSet& counts, Arm arm, const EstimatorOptions& options) {
  return subset_estimate(usable_pulses(counts, options), options,
                         [arm](std::span<const PhotonPair> p) { return g2_of(p, arm); });
}

CountStatistics count_statistics(const CountSet& counts, const EstimatorOptions& options) {
  const Filtered data = usable_pulses(counts, options);
  CountStatistics st;
  st.pulses_used = data.pulses.size();
  st.pulses_saturated = counts.size() - data.pulses.size();
  st.notes = data.notes;
  note_remainder(data.pulses.size(), options.subsets, st.notes);
  Filtered quiet{data.pulses, {}};
  st.n_tot = subset_estimate(quiet, options, [](std::span<const PhotonPair> p) { return total_mean(p); });
  st.variance_difference =
      subset_estimate(quiet, options, [](std::span<const PhotonPair> p) { return difference_variance(p); });
  st.nrf = subset_estimate(quiet, options, [](std::span<const PhotonPair> p) { return nrf_of(p); });
  st.g2_signal = subset_estimate(quiet, options, [](std::span<const PhotonPair> p) { return g2_of(p, Arm::kSignal); });
  st.g2_idler = subset_estimate(quiet, options, [](std::span<const PhotonPair> p) { return g2_of(p, Arm::kIdler); });
  return st;
}

double effective_mode_number(double g2_value) {
  if (!std::isfinite(g2_value) || g2_value <= 1.0) {
    throw DomainError("effective mode number needs g2 > 1");
  }
  return 1.0 / (g2_value - 1.0);
}

double noise_degraded_g2(double g2_noiseless, double signal_mean, double noise_mean) {
  if (!(signal_mean >= 0.0) || !(noise_mean >= 0.0) || !(g2_noiseless >= 0.0)) {
    throw DomainError("noise-degraded g2 needs nonnegative inputs");
  }
  const double total = signal_mean + noise_mean;
  if (total == 0.0) return g2_noiseless;
  if (std::isinf(noise_mean)) return 1.0;
  const double frac = signal_mean / total;
  return 1.0 + (g2_noiseless - 1.0) * frac * frac;
}

double noise_degraded_g2(double r, std::size_t modes, double noise_mean, double eta) {
  if (modes == 0) throw DomainError("need at least one mode");
  if (!(r >= 0.0) || !(eta >= 0.0 && eta <= 1.0)) throw DomainError("invalid squeezing or efficiency");
  const double k = static_cast<double>(modes);
  const double sinh_r = std::sinh(r);
  return noise_degraded_g2(1.0 + 1.0 / k, eta * k * sinh_r * sinh_r, noise_mean);
}

double expected_mean(const SchmidtSpectrum& s, Arm arm) {
  s.validate();
  double pairs = 0.0;
  for (double r : s.squeezing) pairs += std::sinh(r) * std::sinh(r);
  return arm == Arm::kSignal ? s.eta_signal * pairs + s.noise_mean_signal : s.eta_idler * pairs + s.noise_mean_idler;
}

double expected_variance_difference(const SchmidtSpectrum& s) {
  s.validate();
  double v = 0.0;
  for (double r : s.squeezing) {
    const double p = std::sinh(r) * std::sinh(r);
    v += s.eta_signal * p * (s.eta_signal * p + 1.0) + s.eta_idler * p * (s.eta_idler * p + 1.0) -
         2.0 * s.eta_signal * s.eta_idler * p * (1.0 + p);
  }
  return v + s.noise_mean_signal + s.noise_mean_idler;
}

double expected_nrf(const SchmidtSpectrum& s) {
  const double total = expected_mean(s, Arm::kSignal) + expected_mean(s, Arm::kIdler);
  if (!(total > 0.0)) throw DegenerateDataError("NRF undefined: n_tot = 0");
  return expected_variance_difference(s) / total;
}

double expected_g2(const SchmidtSpectrum& s, Arm arm) {
  s.validate();
  const double eta = arm == Arm::kSignal ? s.eta_signal : s.eta_idler;
  const double noise = arm == Arm::kSignal ? s.noise_mean_signal : s.noise_mean_idler;
  double sum = 0.0, sum_sq = 0.0;
  for (double r : s.squeezing) {
    const double m = eta * std::sinh(r) * std::sinh(r);
    sum += m;
    sum_sq += m * m;
  }
  const double mean = sum + noise;
  if (!(mean > 0.0)) throw DegenerateDataError("g2 undefined: zero mean count");
  return (sum * sum + sum_sq + 2.0 * noise * sum + noise * noise) / (mean * mean);
}

}  // namespace ringsqz
