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

#include "ringsqz/tes_pipeline.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "ringsqz/errors.hpp"
#include "ringsqz/parallel.hpp"
#include "ringsqz/rng.hpp"

namespace ringsqz {
namespace {

constexpr double kTailSigmas = 5.0;
constexpr double kSigmaFloorBins = 0.25;  // sigma floor in units of bin width

std::vector<double> moving_average(const std::vector<double>& x, std::size_t window) {
  const std::size_t half = window / 2;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(x.size() - 1, i + half);
    double s = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) s += x[j];
    out[i] = s / static_cast<double>(hi - lo + 1);
  }
  return out;
}

struct Seed {
  std::size_t bin;
  double height;
};

// Local maxima of the smoothed histogram, refined to the raw-count maximum nearby.
std::vector<Seed> find_peaks(const std::vector<double>& counts, std::size_t window) {
  const std::vector<double> sm = moving_average(counts, window);
  std::vector<Seed> peaks;
  const std::size_t n = sm.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? sm[i - 1] : -1.0;
    const double right = i + 1 < n ? sm[i + 1] : -1.0;
    if (sm[i] > 0.0 && sm[i] > left && sm[i] >= right) {
      const std::size_t half = window / 2;
      const std::size_t lo = i >= half ? i - half : 0;
      const std::size_t hi = std::min(n - 1, i + half);
      std::size_t best = i;
      for (std::size_t j = lo; j <= hi; ++j)
        if (counts[j] > counts[best]) best = j;
      // Maxima closer than the smoothing window are one feature; keep the taller.
      if (!peaks.empty() && best - peaks.back().bin < window) {
        if (sm[i] > peaks.back().height) peaks.back() = {best, sm[i]};
        continue;
      }
      peaks.push_back({best, sm[i]});
    }
  }
  return peaks;
}

struct NormalizedHistogram {
  std::vector<double> x;  // bin centers mapped to [0, 1]
  std::vector<double> y;
  std::vector<double> weight;
  double lo = 0.0;
  double span = 1.0;
  double bin_width = 1.0;  // normalized
};

double mixture_value(std::span<const double> theta, double x, double sigma_floor) {
  double v = 0.0;
  for (std::size_t k = 0; 3 * k + 2 < theta.size(); ++k) {
    const double a = std::exp(theta[3 * k]);
    const double mu = theta[3 * k + 1];
    const double s = sigma_floor + std::exp(theta[3 * k + 2]);
    const double z = (x - mu) / s;
    v += a * std::exp(-0.5 * z * z);
  }
  return v;
}

struct ScanFit {
  std::vector<GaussianComponent> components;  // normalized units
  double residual_norm = 0.0;
};

std::optional<ScanFit> fit_components(const NormalizedHistogram& h, const std::vector<Seed>& seeds,
                                      const LeastSquaresOptions& solver, std::string& error) {
  const double sigma_floor = kSigmaFloorBins * h.bin_width;
  const std::size_t k = seeds.size();
  std::vector<double> theta;
  theta.reserve(3 * k);
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t b = seeds[c].bin;
    // Width from the second moment of the counts between neighbouring seeds.
    // Edge seeds mirror their inner half-gap so distant classes do not inflate the width.
    double left = c > 0 ? 0.5 * (h.x[seeds[c - 1].bin] + h.x[b]) : -1.0;
    double right = c + 1 < k ? 0.5 * (h.x[seeds[c + 1].bin] + h.x[b]) : 2.0;
    if (c == 0 && k > 1) left = 2.0 * h.x[b] - right;
    if (c + 1 == k && k > 1) right = 2.0 * h.x[b] - left;
    double w = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < h.x.size(); ++j) {
      if (h.x[j] <= left || h.x[j] >= right) continue;
      const double d = h.x[j] - h.x[b];
      w += h.y[j];
      m2 += h.y[j] * d * d;
    }
    double sigma = w > 0.0 ? std::sqrt(m2 / w) : h.bin_width;
    sigma = std::max(sigma, 2.0 * sigma_floor);
    theta.push_back(std::log(std::max(h.y[b], 1.0)));
    theta.push_back(h.x[b]);
    theta.push_back(std::log(sigma - sigma_floor));
  }

  LeastSquaresProblem problem;
  problem.num_residuals = h.x.size();
  for (std::size_t c = 0; c < k; ++c) {
    problem.parameter_names.push_back("log_amplitude_" + std::to_string(c));
    problem.parameter_names.push_back("mean_" + std::to_string(c));
    problem.parameter_names.push_back("log_sigma_" + std::to_string(c));
  }
  problem.residuals = [&](std::span<const double> t, std::span<double> r) {
    for (std::size_t j = 0; j < h.x.size(); ++j) {
      r[j] = (mixture_value(t, h.x[j], sigma_floor) - h.y[j]) * h.weight[j];
    }
  };
  problem.jacobian = [&](std::span<const double> t, Matrix& jac) {
    for (std::size_t j = 0; j < h.x.size(); ++j) {
      for (std::size_t c = 0; c < k; ++c) {
        const double a = std::exp(t[3 * c]);
        const double mu = t[3 * c + 1];
        const double es = std::exp(t[3 * c + 2]);
        const double s = sigma_floor + es;
        const double z = (h.x[j] - mu) / s;
        const double g = a * std::exp(-0.5 * z * z);
        jac(j, 3 * c) = g * h.weight[j];
        jac(j, 3 * c + 1) = g * z / s * h.weight[j];
        jac(j, 3 * c + 2) = g * z * z / s * es * h.weight[j];
      }
    }
  };
  try {
    const LeastSquaresSolution sol = levenberg_marquardt(problem, theta, solver);
    ScanFit fit;
    fit.residual_norm = sol.residual_norm;
    for (std::size_t c = 0; c < k; ++c) {
      fit.components.push_back(
          {std::exp(sol.theta[3 * c]), sol.theta[3 * c + 1], sigma_floor + std::exp(sol.theta[3 * c + 2])});
    }
    std::sort(fit.components.begin(), fit.components.end(),
              [](const auto& a, const auto& b) { return a.mean < b.mean; });
    return fit;
  } catch (const FitError& e) {
    error = e.what();
    return std::nullopt;
  }
}

// True when no two adjacent bins are both occupied.
bool spikes_only(const std::vector<double>& counts) {
  for (std::size_t b = 0; b + 1 < counts.size(); ++b)
    if (counts[b] > 0.0 && counts[b + 1] > 0.0) return false;
  return true;
}

bool well_formed(const std::vector<GaussianComponent>& comps) {
  for (std::size_t c = 0; c < comps.size(); ++c) {
    if (!(comps[c].sigma > 0.0) || !std::isfinite(comps[c].mean)) return false;
    if (c > 0 && !(comps[c].mean > comps[c - 1].mean + 0.5 * std::min(comps[c].sigma, comps[c - 1].sigma))) {
      return false;
    }
  }
  return true;
}

}  // namespace

void TraceSet::validate() const {
  if (num_samples < 8) throw DomainError("traces need at least 8 samples");
  if (samples.size() != num_pulses * num_samples) throw DomainError("trace matrix is not rectangular");
  if (!(sample_period > 0.0) || !std::isfinite(sample_period)) throw DomainError("sample period must be positive");
  for (float v : samples)
    if (!std::isfinite(v)) throw DomainError("trace values must be finite");
}

void PulseTemplate::validate() const {
  if (shape.empty()) throw DomainError("pulse template shape is empty");
  const double peak = *std::max_element(shape.begin(), shape.end());
  if (std::abs(peak - 1.0) > 1e-9) throw DomainError("pulse template shape must have unit peak");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw DomainError("noise sigma must be nonnegative");
  if (!(nonlinearity > 0.0) || !std::isfinite(nonlinearity)) throw DomainError("nonlinearity must be positive");
  if (!std::isfinite(per_photon_gain)) throw DomainError("gain must be finite");
}

double PulseTemplate::response(std::uint32_t n) const {
  if (nonlinearity == 1.0) return static_cast<double>(n);
  return (1.0 - std::pow(nonlinearity, static_cast<double>(n))) / (1.0 - nonlinearity);
}

double PulseTemplate::score_separation_sigmas() const {
  double norm2 = 0.0;
  for (double s : shape) norm2 += s * s;
  return noise_sigma > 0.0 ? per_photon_gain * std::sqrt(norm2) / noise_sigma
                           : std::numeric_limits<double>::infinity();
}

PulseTemplate PulseTemplate::exponential(std::size_t samples, double sample_period, double rise_time,
                                         double decay_time) {
  if (samples < 8) throw DomainError("pulse template needs at least 8 samples");
  if (!(sample_period > 0.0) || !(rise_time > 0.0) || !(decay_time > rise_time)) {
    throw DomainError("pulse template needs 0 < rise time < decay time");
  }
  PulseTemplate t;
  t.shape.resize(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    const double time = static_cast<double>(k) * sample_period;
    t.shape[k] = std::exp(-time / decay_time) - std::exp(-time / rise_time);
  }
  const double peak = *std::max_element(t.shape.begin(), t.shape.end());
  for (double& s : t.shape) s /= peak;
  return t;
}

PulseTemplate PulseTemplate::with_separation(double separation, double noise) const {
  if (!(separation > 0.0) || !(noise > 0.0)) throw DomainError("separation and noise must be positive");
  PulseTemplate t = *this;
  double norm2 = 0.0;
  for (double s : shape) norm2 += s * s;
  t.noise_sigma = noise;
  t.per_photon_gain = separation * noise / std::sqrt(norm2);
  return t;
}

TraceSet generate_traces(std::span<const std::uint32_t> photon_numbers, const PulseTemplate& tmpl,
                         double sample_period, std::uint64_t seed, unsigned threads) {
  tmpl.validate();
  if (!(sample_period > 0.0)) throw DomainError("sample period must be positive");
  TraceSet out;
  out.num_pulses = photon_numbers.size();
  out.num_samples = tmpl.shape.size();
  out.sample_period = sample_period;
  out.samples.resize(out.num_pulses * out.num_samples);
  parallel_for_chunks(out.num_pulses, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double height = tmpl.per_photon_gain * tmpl.response(photon_numbers[i]);
      SubstreamRng rng(seed, i, 0, RngStage::kTraceNoise);
      std::normal_distribution<double> noise(0.0, 1.0);
      auto row = out.row(i);
      for (std::size_t k = 0; k < out.num_samples; ++k) {
        double v = height * tmpl.shape[k];
        if (tmpl.noise_sigma > 0.0) v += tmpl.noise_sigma * noise(rng);
        row[k] = static_cast<float>(v);
      }
    }
  });
  return out;
}

PrincipalComponent principal_component(const TraceSet& traces) {
  traces.validate();
  if (traces.num_pulses < 2) throw DomainError("principal component needs at least two traces");
  const auto ns = static_cast<Eigen::Index>(traces.num_samples);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(ns);
  double raw_energy = 0.0;
  for (std::size_t i = 0; i < traces.num_pulses; ++i) {
    const auto row = traces.row(i);
    for (Eigen::Index k = 0; k < ns; ++k) {
      mean(k) += row[k];
      raw_energy += static_cast<double>(row[k]) * row[k];
    }
  }
  mean /= static_cast<double>(traces.num_pulses);

  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(ns, ns);
  constexpr std::size_t kBlock = 4096;
  Eigen::MatrixXd block(static_cast<Eigen::Index>(kBlock), ns);
  for (std::size_t start = 0; start < traces.num_pulses; start += kBlock) {
    const std::size_t rows = std::min(kBlock, traces.num_pulses - start);
    for (std::size_t i = 0; i < rows; ++i) {
      const auto row = traces.row(start + i);
      for (Eigen::Index k = 0; k < ns; ++k) block(static_cast<Eigen::Index>(i), k) = row[k] - mean(k);
    }
    const auto b = block.topRows(static_cast<Eigen::Index>(rows));
    second.selfadjointView<Eigen::Lower>().rankUpdate(b.transpose());
  }
  second = second.selfadjointView<Eigen::Lower>();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(second);
  if (eig.info() != Eigen::Success) throw DegenerateDataError("eigen-decomposition of trace moments failed");
  const double top = eig.eigenvalues()(ns - 1);
  const double trace_sum = eig.eigenvalues().sum();
  if (!(top > 1e-24 * std::max(raw_energy, 1e-300))) {
    throw DegenerateDataError("traces have zero variance about their mean");
  }
  Eigen::VectorXd pc = eig.eigenvectors().col(ns - 1);
  pc.normalize();
  const double overlap = pc.dot(mean);
  if (overlap < 0.0) {
    pc = -pc;
  } else if (overlap == 0.0) {
    Eigen::Index idx = 0;
    pc.cwiseAbs().maxCoeff(&idx);
    if (pc(idx) < 0.0) pc = -pc;
  }

  PrincipalComponent out;
  out.mean_trace.assign(mean.data(), mean.data() + ns);
  out.component.assign(pc.data(), pc.data() + ns);
  out.eigenvalue = top;
  out.explained_fraction = trace_sum > 0.0 ? top / trace_sum : 1.0;
  return out;
}

std::vector<double> project_scores(const TraceSet& traces, std::span<const double> mean_trace,
                                   std::span<const double> component, unsigned threads) {
  if (mean_trace.size() != traces.num_samples || component.size() != traces.num_samples) {
    throw DomainError("score projection: dimension mismatch between traces and component");
  }
  std::vector<double> scores(traces.num_pulses);
  parallel_for_chunks(traces.num_pulses, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto row = traces.row(i);
      double s = 0.0;
      for (std::size_t k = 0; k < traces.num_samples; ++k) s += (row[k] - mean_trace[k]) * component[k];
      scores[i] = s * traces.sample_period;
    }
  });
  return scores;
}

std::size_t bin_count(std::size_t num_samples) {
  if (num_samples < 16) throw DomainError("histogram needs at least 16 samples");
  const auto bins = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(num_samples)) / 4.0));
  return std::max<std::size_t>(bins, 8);
}

ScoreHistogram make_histogram(std::span<const double> scores) {
  return make_histogram(scores, bin_count(scores.size()));
}

ScoreHistogram make_histogram(std::span<const double> scores, std::size_t num_bins) {
  if (scores.empty() || num_bins < 1) throw DomainError("histogram needs scores and at least one bin");
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) throw DegenerateDataError("all scores are identical");
  ScoreHistogram h;
  h.num_bins = num_bins;
  h.total = scores.size();
  h.edges.resize(num_bins + 1);
  const double width = (hi - lo) / static_cast<double>(num_bins);
  for (std::size_t b = 0; b <= num_bins; ++b) h.edges[b] = lo + width * static_cast<double>(b);
  h.edges.back() = hi;
  h.counts.assign(num_bins, 0.0);
  for (double s : scores) {
    auto b = static_cast<std::size_t>((s - lo) / width);
    h.counts[std::min(b, num_bins - 1)] += 1.0;
  }
  return h;
}

double gaussian_boundary(const GaussianComponent& lower, const GaussianComponent& upper, bool* fell_back) {
  if (fell_back) *fell_back = false;
  const double m1 = lower.mean, m2 = upper.mean;
  const double v1 = lower.sigma * lower.sigma, v2 = upper.sigma * upper.sigma;
  // ln A1 - (x - m1)^2 / 2v1 = ln A2 - (x - m2)^2 / 2v2  ->  a x^2 + b x + c = 0
  const double a = 0.5 / v2 - 0.5 / v1;
  const double b = m1 / v1 - m2 / v2;
  const double c = 0.5 * m2 * m2 / v2 - 0.5 * m1 * m1 / v1 + std::log(lower.amplitude / upper.amplitude);
  const double lo = std::min(m1, m2), hi = std::max(m1, m2);
  auto inside = [&](double x) { return std::isfinite(x) && x > lo && x < hi; };

  if (std::abs(a) <= 1e-12 * (std::abs(b) * std::max(std::abs(m1), std::abs(m2)) + std::abs(b) / (hi - lo))) {
    const double x = -c / b;
    if (inside(x)) return x;
  } else {
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
      const double r1 = q / a;
      const double r2 = q != 0.0 ? c / q : r1;
      if (inside(r1) && inside(r2)) return std::abs(r1 - 0.5 * (m1 + m2)) < std::abs(r2 - 0.5 * (m1 + m2)) ? r1 : r2;
      if (inside(r1)) return r1;
      if (inside(r2)) return r2;
    }
  }
  if (fell_back) *fell_back = true;
  return 0.5 * (m1 + m2);
}

GaussianMixture fit_mixture(const ScoreHistogram& histogram, const MixtureOptions& options) {
  if (histogram.num_bins < 3) throw DomainError("mixture fit needs at least three bins");
  if (options.max_components < 1) throw DomainError("mixture fit needs max_components >= 1");

  NormalizedHistogram h;
  h.lo = histogram.edges.front();
  h.span = histogram.edges.back() - histogram.edges.front();
  h.bin_width = histogram.width() / h.span;
  for (std::size_t b = 0; b < histogram.num_bins; ++b) {
    h.x.push_back((histogram.center(b) - h.lo) / h.span);
    h.y.push_back(histogram.counts[b]);
    h.weight.push_back(1.0 / std::max(std::sqrt(histogram.counts[b]), 1.0));
  }

  GaussianMixture mixture;
  if (spikes_only(h.y)) {
    // Every class is narrower than a bin: the widths are unresolvable and a fit has
    // no finite optimum, so each occupied bin becomes one floor-width component.
    const double sigma = kSigmaFloorBins * histogram.width();
    for (std::size_t b = 0; b < histogram.num_bins; ++b) {
      if (histogram.counts[b] > 0.0) mixture.components.push_back({histogram.counts[b], histogram.center(b), sigma});
    }
    if (mixture.components.size() > options.max_components) {
      throw FitError("histogram has " + std::to_string(mixture.components.size()) +
                         " isolated classes, more than max_components",
                     -1.0);
    }
    mixture.notes.push_back("all occupied bins isolated: " + std::to_string(mixture.components.size()) +
                            " components placed at bin centers without fitting");
    for (std::size_t c = 0; c + 1 < mixture.components.size(); ++c) {
      mixture.boundaries.push_back(gaussian_boundary(mixture.components[c], mixture.components[c + 1]));
    }
    return mixture;
  }
  std::vector<Seed> peaks = find_peaks(h.y, options.smoothing_window);
  if (peaks.empty()) throw DegenerateDataError("histogram has no peaks");
  std::vector<Seed> by_height = peaks;
  std::stable_sort(by_height.begin(), by_height.end(),
                   [](const Seed& a, const Seed& b) { return a.height > b.height; });
  const std::size_t k_max = std::min(options.max_components, by_height.size());

  std::optional<ScanFit> chosen;
  std::size_t chosen_k = 0;
  std::string last_error;
  for (std::size_t k = 1; k <= k_max; ++k) {
    std::vector<Seed> seeds(by_height.begin(), by_height.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(seeds.begin(), seeds.end(), [](const Seed& a, const Seed& b) { return a.bin < b.bin; });
    std::string error;
    std::optional<ScanFit> fit = fit_components(h, seeds, options.solver, error);
    if (!fit) {
      if (!chosen) {
        // A single Gaussian can fail on clearly multimodal data; try the next count.
        mixture.notes.push_back("fit with " + std::to_string(k) + " components failed (" + error + ")");
        last_error = error;
        continue;
      }
      mixture.notes.push_back("fit with " + std::to_string(k) + " components failed (" + error + "); keeping " +
                              std::to_string(chosen_k));
      break;
    }
    if (!well_formed(fit->components)) {
      mixture.notes.push_back("fit with " + std::to_string(k) + " components produced coincident means; keeping " +
                              std::to_string(chosen_k));
      break;
    }
    mixture.scan_residuals.push_back(fit->residual_norm);
    if (chosen) {
      const double prev = chosen->residual_norm * chosen->residual_norm;
      const double now = fit->residual_norm * fit->residual_norm;
      const double improvement = prev > 0.0 ? (prev - now) / prev : 0.0;
      if (improvement < options.improvement_threshold) {
        std::ostringstream os;
        os << "component count " << chosen_k << " selected: adding component " << k << " improved residual by "
           << 100.0 * improvement << "% (< " << 100.0 * options.improvement_threshold << "%)";
        mixture.notes.push_back(os.str());
        break;
      }
    }
    // Weighted SSR is chi-square; once it matches counting noise, more components fit noise.
    const double dof = static_cast<double>(h.x.size()) - 3.0 * static_cast<double>(k);
    const double chi2 = fit->residual_norm * fit->residual_norm;
    chosen = std::move(fit);
    chosen_k = k;
    if (dof > 0.0 && chi2 <= dof + 3.0 * std::sqrt(2.0 * dof)) {
      std::ostringstream os;
      os << "component count " << k << " selected: residual " << chi2 << " consistent with counting noise ("
         << dof << " degrees of freedom)";
      mixture.notes.push_back(os.str());
      break;
    }
    if (k == k_max) {
      mixture.notes.push_back("component count " + std::to_string(k) + " selected: scan limit reached");
    }
  }

  if (!chosen) throw FitError("mixture fit failed for every component count: " + last_error, -1.0);
  for (const auto& c : chosen->components) {
    mixture.components.push_back({c.amplitude, h.lo + c.mean * h.span, c.sigma * h.span});
  }
  mixture.residual_norm = chosen->residual_norm;
  for (std::size_t c = 0; c + 1 < mixture.components.size(); ++c) {
    const auto& lower = mixture.components[c];
    const auto& upper = mixture.components[c + 1];
    bool fell_back = false;
    mixture.boundaries.push_back(gaussian_boundary(lower, upper, &fell_back));
    if (fell_back) {
      mixture.notes.push_back("warning: no density intersection between components " + std::to_string(c) + " and " +
                              std::to_string(c + 1) + "; using midpoint");
    }
    const double separation = (upper.mean - lower.mean) / std::max(lower.sigma, upper.sigma);
    if (separation < 4.0) {
      std::ostringstream os;
      os << "overlap: components " << c << " and " << c + 1 << " are only " << separation << " sigma apart";
      mixture.notes.push_back(os.str());
    }
  }
  return mixture;
}

Assignment assign_numbers(std::span<const double> scores, const GaussianMixture& mixture) {
  Assignment out;
  out.numbers.resize(scores.size());
  const auto& bounds = mixture.boundaries;
  const double tail_start = mixture.components.empty()
                                ? std::numeric_limits<double>::infinity()
                                : mixture.components.back().mean + kTailSigmas * mixture.components.back().sigma;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto it = std::lower_bound(bounds.begin(), bounds.end(), scores[i]);
    out.numbers[i] = static_cast<std::uint32_t>(it - bounds.begin());
    if (scores[i] > tail_start) ++out.tail_count;
  }
  out.tail_fraction = scores.empty() ? 0.0 : static_cast<double>(out.tail_count) / static_cast<double>(scores.size());
  return out;
}

ChannelAnalysis classify_traces(const TraceSet& traces, const MixtureOptions& options, unsigned threads) {
  ChannelAnalysis a;
  a.pca = principal_component(traces);
  const std::vector<double> scores = project_scores(traces, a.pca.mean_trace, a.pca.component, threads);
  a.histogram = make_histogram(scores);
  a.mixture = fit_mixture(a.histogram, options);
  a.assignment = assign_numbers(scores, a.mixture);
  return a;
}

std::uint64_t arm_trace_seed(std::uint64_t seed, Arm arm) {
  return splitmix64_mix(seed ^ (arm == Arm::kSignal ? 0x5349474eULL : 0x49444c52ULL));
}

RoundTripReport round_trip(const CountSet& counts, const PulseTemplate& tmpl, double sample_period,
                           std::uint64_t seed, const MixtureOptions& options, unsigned threads) {
  if (counts.size() < 16) throw DomainError("round trip needs at least 16 pulses");
  RoundTripReport report;
  report.recovered.seed = counts.seed;
  report.recovered.pulses.resize(counts.size());
  report.recovered.saturated.assign(counts.size(), 0);
  std::vector<std::uint8_t> wrong(counts.size(), 0);

  for (Arm arm : {Arm::kSignal, Arm::kIdler}) {
    const bool is_signal = arm == Arm::kSignal;
    const std::vector<std::uint32_t> truth = counts.column(arm);
    const std::uint64_t arm_seed = arm_trace_seed(seed, arm);
    ChannelAnalysis a;
    {
      const TraceSet traces = generate_traces(truth, tmpl, sample_period, arm_seed, threads);
      a = classify_traces(traces, options, threads);
    }
    std::size_t errors = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const std::uint32_t got = a.assignment.numbers[i];
      if (got != truth[i]) {
        ++errors;
        wrong[i] = 1;
      }
      if (is_signal) {
        report.recovered.pulses[i].signal = got;
      } else {
        report.recovered.pulses[i].idler = got;
      }
    }
    const double rate = static_cast<double>(errors) / static_cast<double>(truth.size());
    for (const auto& n : a.mixture.notes) report.notes.push_back(std::string(is_signal ? "signal: " : "idler: ") + n);
    if (is_signal) {
      report.rate_signal = rate;
      report.tail_fraction_signal = a.assignment.tail_fraction;
      report.mixture_signal = std::move(a.mixture);
    } else {
      report.rate_idler = rate;
      report.tail_fraction_idler = a.assignment.tail_fraction;
      report.mixture_idler = std::move(a.mixture);
    }
  }
  const auto bad = std::count(wrong.begin(), wrong.end(), std::uint8_t{1});
  report.misclassification_rate = static_cast<double>(bad) / static_cast<double>(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const auto& p = report.recovered.pulses[i];
    report.recovered.saturated[i] = (p.signal > 10 || p.idler > 10) ? 1 : 0;
  }
  return report;
}

}  // namespace ringsqz
