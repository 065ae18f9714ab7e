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

#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ringsqz/estimation.hpp"
#include "ringsqz/rng.hpp"
#include "ringsqz/trace_io.hpp"
#include "table.hpp"

namespace ringsqz::cli {
namespace {

namespace fs = std::filesystem;

// Config frequencies are in Hz; the library works in rad/s.
double hz_to_rad(double hz) { return kTwoPi * hz; }

void write_text(const CommandContext& ctx, CommandResult& result, const std::string& name,
                const std::string& content) {
  fs::create_directories(ctx.out_dir);
  const fs::path path = fs::path(ctx.out_dir) / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << content;
  if (!out) throw FormatError("write failed for " + path.string());
  result.files.push_back(name);
}

std::string resolve(const RunConfig& cfg, const std::string& path) {
  const fs::path p(path);
  if (p.is_absolute()) return path;
  return (fs::path(cfg.base_dir()) / p).string();
}

std::string require_text(const RunConfig& cfg, const std::string& section, const std::string& key) {
  auto v = cfg.text(section, key);
  if (!v) throw FormatError("missing required key [" + section + "] " + key);
  return *v;
}

std::size_t positive_size(const RunConfig& cfg, const std::string& section, const std::string& key,
                          std::size_t fallback) {
  const auto v = cfg.integer(section, key);
  if (!v) return fallback;
  if (*v < 1) throw DomainError("[" + section + "] " + key + " must be >= 1");
  return static_cast<std::size_t>(*v);
}

// key = value report lines.
class Report {
 public:
  explicit Report(const std::string& provenance) { os_ << provenance << '\n'; }
  void put(const std::string& key, double v) { os_ << key << " = " << format_double(v) << '\n'; }
  void put(const std::string& key, const std::string& v) { os_ << key << " = " << v << '\n'; }
  void put_list(const std::string& key, const std::vector<double>& values) {
    os_ << key << " =";
    for (std::size_t i = 0; i < values.size(); ++i) os_ << (i ? ", " : " ") << format_double(values[i]);
    os_ << '\n';
  }
  void put(const std::string& key, const Estimate& e) {
    put(key + ".mean", e.mean);
    put(key + ".std", e.std);
    put_list(key + ".subsets", e.subset_values);
  }
  void note(const std::string& text) { os_ << "note = " << text << '\n'; }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

std::string counts_csv(const std::string& provenance, const CountSet& counts) {
  std::string out = provenance + "\npulse_index,n_signal,n_idler,saturated\n";
  out.reserve(out.size() + counts.size() * 16);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const auto& p = counts.pulses[i];
    out += std::to_string(i);
    out += ',';
    out += std::to_string(p.signal);
    out += ',';
    out += std::to_string(p.idler);
    out += ',';
    out += counts.saturated[i] ? '1' : '0';
    out += '\n';
  }
  return out;
}

EstimatorOptions estimator_options(const RunConfig& cfg) {
  EstimatorOptions opt;
  opt.include_saturated = cfg.boolean("counts", "include_saturated").value_or(false);
  opt.subsets = positive_size(cfg, "counts", "subsets", 8);
  return opt;
}

SamplerOptions sampler_options(const RunConfig& cfg, unsigned threads) {
  SamplerOptions opt;
  opt.threads = threads;
  const auto threshold = cfg.integer("counts", "saturation_threshold");
  if (threshold) {
    if (*threshold < 0) throw DomainError("[counts] saturation_threshold must be >= 0");
    opt.saturation_threshold = static_cast<std::uint32_t>(*threshold);
  }
  return opt;
}

void report_statistics(Report& report, const std::string& prefix, const CountStatistics& st) {
  report.put(prefix + "pulses_used", static_cast<double>(st.pulses_used));
  report.put(prefix + "pulses_saturated", static_cast<double>(st.pulses_saturated));
  report.put(prefix + "n_tot", st.n_tot);
  report.put(prefix + "variance_difference", st.variance_difference);
  report.put(prefix + "nrf", st.nrf);
  if (st.nrf.mean > 0.0) report.put(prefix + "nrf_db", to_db(st.nrf.mean));
  report.put(prefix + "g2_signal", st.g2_signal);
  report.put(prefix + "g2_idler", st.g2_idler);
  for (const auto& [arm, g2v] : {std::pair{"signal", st.g2_signal.mean}, std::pair{"idler", st.g2_idler.mean}}) {
    const std::string key = prefix + "effective_modes_" + arm;
    if (g2v > 1.0) {
      report.put(key, effective_mode_number(g2v));
    } else {
      report.put(key, "undefined (g2 <= 1)");
    }
  }
  report.note("effective mode numbers assume equally populated temporal modes");
  for (const auto& n : st.notes) report.note(n);
}

MixtureOptions mixture_options(const RunConfig& cfg) {
  MixtureOptions opt;
  opt.max_components = positive_size(cfg, "traces", "max_components", opt.max_components);
  opt.improvement_threshold = cfg.number_or("traces", "improvement_threshold", opt.improvement_threshold);
  if (!(opt.improvement_threshold > 0.0 && opt.improvement_threshold < 1.0)) {
    throw DomainError("[traces] improvement_threshold must lie in (0, 1)");
  }
  return opt;
}


void report_channel(Report& report, const std::string& prefix, const ChannelAnalysis& a) {
  report.put(prefix + "explained_fraction", a.pca.explained_fraction);
  report.put(prefix + "bins", static_cast<double>(a.histogram.num_bins));
  report.put(prefix + "components", static_cast<double>(a.mixture.components.size()));
  for (std::size_t c = 0; c < a.mixture.components.size(); ++c) {
    const auto& comp = a.mixture.components[c];
    const std::string key = prefix + "component." + std::to_string(c);
    report.put(key + ".amplitude", comp.amplitude);
    report.put(key + ".mean", comp.mean);
    report.put(key + ".sigma", comp.sigma);
  }
  report.put_list(prefix + "boundaries", a.mixture.boundaries);
  report.put_list(prefix + "scan_residuals", a.mixture.scan_residuals);
  report.put(prefix + "tail_count", static_cast<double>(a.assignment.tail_count));
  report.put(prefix + "tail_fraction", a.assignment.tail_fraction);
  for (const auto& n : a.mixture.notes) report.note(prefix + n);
}

void report_mixture(Report& report, const std::string& prefix, const GaussianMixture& m) {
  report.put(prefix + "components", static_cast<double>(m.components.size()));
  for (std::size_t c = 0; c < m.components.size(); ++c) {
    const std::string key = prefix + "component." + std::to_string(c);
    report.put(key + ".amplitude", m.components[c].amplitude);
    report.put(key + ".mean", m.components[c].mean);
    report.put(key + ".sigma", m.components[c].sigma);
  }
  report.put_list(prefix + "boundaries", m.boundaries);
}

LeastSquaresOptions solver_options(const RunConfig& cfg) {
  LeastSquaresOptions opt;
  opt.gradient_tolerance = cfg.number_or("fit", "gradient_tolerance", opt.gradient_tolerance);
  if (!(opt.gradient_tolerance > 0.0)) throw DomainError("[fit] gradient_tolerance must be positive");
  const auto iters = cfg.integer("fit", "max_iterations");
  if (iters) {
    if (*iters < 1) throw DomainError("[fit] max_iterations must be >= 1");
    opt.max_iterations = static_cast<int>(*iters);
  }
  return opt;
}

void report_fit(Report& report, const FitResult& fit) {
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    report.put(fit.names[i], fit.values[i]);
    report.put(fit.names[i] + ".error", fit.errors[i]);
  }
  report.put("residual_norm", fit.residual_norm);
  report.put("iterations", static_cast<double>(fit.iterations));
  report.put("converged", fit.converged ? "true" : "false");
  for (const auto& n : fit.notes) report.note(n);
}

void report_line(Report& report, const LinearFit& line) {
  report.put("slope", line.slope);
  report.put("slope.error", line.slope_error);
  report.put("intercept", line.intercept);
  report.put("intercept.error", line.intercept_error);
  report.put("residual_norm", line.residual_norm);
}

std::string provenance(const CommandContext& ctx, const std::string& command) {
  return provenance_line(command, ctx.config.hash(), ctx.seed);
}

}  // namespace

int exit_code_for(const Error& error) {
  switch (error.kind()) {
    case Error::Kind::kDomain:
    case Error::Kind::kFormat:
      return 2;
    case Error::Kind::kSingularity:
    case Error::Kind::kFit:
      return 3;
    case Error::Kind::kDegenerateData:
      return 4;
  }
  return 1;
}

RingParams ring_from_config(const RunConfig& cfg) {
  if (!cfg.has_section("ring")) throw FormatError("missing [ring] section");
  RingParams p;
  const auto q = cfg.number("ring", "loaded_q");
  const auto f = cfg.number("ring", "resonance_frequency");
  if (!q || !f) throw FormatError("[ring] needs loaded_q and resonance_frequency (Hz)");
  p.loaded_q = *q;
  p.resonance_angular_frequency = hz_to_rad(*f);
  const double esc = cfg.number_or("ring", "escape_efficiency", 1.0);
  p.escape_efficiency_signal = cfg.number_or("ring", "escape_efficiency_signal", esc);
  p.escape_efficiency_idler = cfg.number_or("ring", "escape_efficiency_idler", esc);
  p.downstream_efficiency = cfg.number_or("ring", "downstream_efficiency", 1.0);
  p.group_velocity = cfg.number_or("ring", "group_velocity", 0.0);
  p.nonlinear_parameter = cfg.number_or("ring", "nonlinear_parameter", 0.0);
  p.round_trip_length = cfg.number_or("ring", "round_trip_length", 0.0);
  if (auto v = cfg.number("ring", "dissipation_signal")) p.dissipation_signal = hz_to_rad(*v);
  if (auto v = cfg.number("ring", "dissipation_idler")) p.dissipation_idler = hz_to_rad(*v);
  const bool any_triplet = cfg.has("ring", "pump_frequency") || cfg.has("ring", "signal_frequency") ||
                           cfg.has("ring", "idler_frequency");
  if (any_triplet) {
    const auto fp = cfg.number("ring", "pump_frequency");
    const auto fs_ = cfg.number("ring", "signal_frequency");
    const auto fi = cfg.number("ring", "idler_frequency");
    if (!fp || !fs_ || !fi) throw FormatError("[ring] pump, signal and idler frequencies must be given together");
    p.resonances = ResonanceTriplet{hz_to_rad(*fp), hz_to_rad(*fs_), hz_to_rad(*fi)};
  }
  p.validate();
  return p;
}

PumpDrive drive_from_config(const RunConfig& cfg, const RingParams& ring) {
  DetuningMode mode = DetuningMode::kLockedShifted;
  const std::string mode_name = cfg.text("drive", "detuning_mode").value_or("locked_shifted");
  if (mode_name == "locked_shifted") {
    mode = DetuningMode::kLockedShifted;
  } else if (mode_name == "locked_zero") {
    mode = DetuningMode::kLockedZero;
  } else if (mode_name == "explicit") {
    mode = DetuningMode::kExplicit;
  } else {
    throw FormatError("[drive] detuning_mode must be locked_shifted, locked_zero or explicit");
  }
  const double detuning = hz_to_rad(cfg.number_or("drive", "detuning", 0.0));
  if (mode == DetuningMode::kExplicit && !cfg.has("drive", "detuning")) {
    throw FormatError("[drive] detuning (Hz) is required when detuning_mode = explicit");
  }
  const bool has_gain = cfg.has("drive", "gain");
  const bool has_photons = cfg.has("drive", "intracavity_photons");
  if (has_gain == has_photons) throw FormatError("[drive] needs exactly one of gain or intracavity_photons");

  PumpDrive drive;
  if (has_gain) {
    if (cfg.has("drive", "coupling")) throw FormatError("[drive] coupling is only used with intracavity_photons");
    drive = drive_for_gain(ring, *cfg.number("drive", "gain"), mode, detuning);
  } else {
    drive.intracavity_photons = *cfg.number("drive", "intracavity_photons");
    if (auto c = cfg.number("drive", "coupling")) {
      drive.coupling = hz_to_rad(*c);
    } else {
      if (!(ring.round_trip_length > 0.0)) {
        throw FormatError("[drive] coupling (Hz) is required unless [ring] gives the geometry");
      }
      drive.coupling = lambda_coeff(ring);
    }
    drive.detuning_mode = mode;
    drive.detuning = detuning;
  }
  drive.validate();
  return drive;
}

SchmidtSpectrum schmidt_from_config(const RunConfig& cfg) {
  if (!cfg.has_section("schmidt")) throw FormatError("missing [schmidt] section");
  const double eta = cfg.number_or("schmidt", "eta", 1.0);
  SchmidtSpectrum s;
  const bool explicit_r = cfg.has("schmidt", "squeezing");
  const bool equal = cfg.has("schmidt", "modes") || cfg.has("schmidt", "mean_pairs");
  if (explicit_r == equal) throw FormatError("[schmidt] needs either squeezing or modes + mean_pairs");
  if (explicit_r) {
    s.squeezing = *cfg.number_list("schmidt", "squeezing");
  } else {
    const auto modes = cfg.integer("schmidt", "modes");
    const auto mean = cfg.number("schmidt", "mean_pairs");
    if (!modes || !mean) throw FormatError("[schmidt] modes and mean_pairs must be given together");
    if (*modes < 1) throw DomainError("[schmidt] modes must be >= 1");
    s = SchmidtSpectrum::equal_modes(static_cast<std::size_t>(*modes), *mean);
  }
  s.eta_signal = cfg.number_or("schmidt", "eta_signal", eta);
  s.eta_idler = cfg.number_or("schmidt", "eta_idler", eta);
  const double noise = cfg.number_or("schmidt", "noise_mean", 0.0);
  s.noise_mean_signal = cfg.number_or("schmidt", "noise_mean_signal", noise);
  s.noise_mean_idler = cfg.number_or("schmidt", "noise_mean_idler", noise);
  s.validate();
  return s;
}

PulseTemplate template_from_config(const RunConfig& cfg, double& sample_period) {
  const std::size_t samples = positive_size(cfg, "template", "samples", 64);
  sample_period = cfg.number_or("template", "sample_period", 50e-9);
  const double rise = cfg.number_or("template", "rise_time", 100e-9);
  const double decay = cfg.number_or("template", "decay_time", 1e-6);
  const double separation = cfg.number_or("template", "separation_sigmas", 7.0);
  const double noise = cfg.number_or("template", "noise_sigma", 1e-3);
  PulseTemplate t = PulseTemplate::exponential(samples, sample_period, rise, decay);
  if (noise > 0.0) {
    t = t.with_separation(separation, noise);
  } else if (noise == 0.0) {
    t.noise_sigma = 0.0;
    t.per_photon_gain = 1e-3;
  } else {
    throw DomainError("[template] noise_sigma must be nonnegative");
  }
  t.nonlinearity = cfg.number_or("template", "nonlinearity", 1.0);
  t.validate();
  return t;
}

CommandResult cmd_spectrum(const CommandContext& ctx) {
  const RunConfig& cfg = ctx.config;
  const RingParams ring = ring_from_config(cfg);
  const PumpDrive drive = drive_from_config(cfg, ring);
  const double f_lo = cfg.number_or("spectrum", "sideband_min", 20e6);
  const double f_hi = cfg.number_or("spectrum", "sideband_max", 1e9);
  const std::size_t points = positive_size(cfg, "spectrum", "points", 50);
  const double noise_db = cfg.number_or("spectrum", "noise_db", 0.0);
  if (!(noise_db >= 0.0)) throw DomainError("[spectrum] noise_db must be nonnegative");
  if (!(f_lo > 0.0) || !(f_hi >= f_lo)) throw DomainError("[spectrum] need 0 < sideband_min <= sideband_max");

  const std::vector<double> grid = points == 1 ? std::vector<double>{hz_to_rad(f_lo)}
                                               : log_grid(hz_to_rad(f_lo), hz_to_rad(f_hi), points);
  const std::vector<SpectrumRow> rows = squeezing_spectrum(ring, drive, grid, ctx.threads);

  const double g = gain(ring, drive);
  const std::string prov = provenance(ctx, "spectrum");
  std::string meta = "# variance_db = 10*log10(V), vacuum V = 1; omega is the angular sideband frequency\n";
  meta += "# g=" + format_double(g) + " gamma_rad_per_s=" + format_double(ring.gamma_mean()) +
          " eta=" + format_double(ring.net_efficiency_signal()) +
          " detuning_rad_per_s=" + format_double(effective_detuning(ring, drive)) + "\n";

  std::string csv = prov + "\n" + meta + "omega_rad_per_s,v_plus_db,v_minus_db\n";
  for (const auto& r : rows) {
    csv += format_double(r.sideband) + "," + format_double(r.v_plus_db) + "," + format_double(r.v_minus_db) + "\n";
  }

  std::string fit_ready = prov + "\n" + meta;
  if (noise_db > 0.0) fit_ready += "# gaussian noise added: sigma_db=" + format_double(noise_db) + "\n";
  fit_ready += "omega_rad_per_s,variance_db,branch\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int b = 0; b < 2; ++b) {
      double v = b == 0 ? rows[i].v_plus_db : rows[i].v_minus_db;
      if (noise_db > 0.0) {
        SubstreamRng rng(ctx.seed, i, static_cast<std::uint64_t>(b), RngStage::kMeasurementNoise);
        std::normal_distribution<double> noise(0.0, noise_db);
        v += noise(rng);
      }
      fit_ready += format_double(rows[i].sideband) + "," + format_double(v) + (b == 0 ? ",plus\n" : ",minus\n");
    }
  }

  CommandResult result;
  write_text(ctx, result, "spectrum.csv", csv);
  write_text(ctx, result, "spectrum_points.csv", fit_ready);
  result.log.push_back("gain = " + format_double(g));
  result.log.push_back("points = " + std::to_string(rows.size()));
  return result;
}

CommandResult cmd_counts(const CommandContext& ctx) {
  const RunConfig& cfg = ctx.config;
  const SchmidtSpectrum spectrum = schmidt_from_config(cfg);
  const std::size_t pulses = positive_size(cfg, "counts", "pulses", 100000);
  const SamplerOptions sampler = sampler_options(cfg, ctx.threads);
  const EstimatorOptions estimator = estimator_options(cfg);
  const std::string prov = provenance(ctx, "counts");

  CommandResult result;
  const CountSet counts = sample_counts(spectrum, pulses, ctx.seed, sampler);
  write_text(ctx, result, "counts.csv", counts_csv(prov, counts));

  Report report(prov);
  report.put("pulses", static_cast<double>(pulses));
  report.put("subsets", static_cast<double>(estimator.subsets));
  report.put("include_saturated", estimator.include_saturated ? "true" : "false");
  report.put("expected.n_tot", expected_mean(spectrum, Arm::kSignal) + expected_mean(spectrum, Arm::kIdler));
  try {
    report.put("expected.nrf", expected_nrf(spectrum));
    report.put("expected.g2_signal", expected_g2(spectrum, Arm::kSignal));
    report.put("expected.g2_idler", expected_g2(spectrum, Arm::kIdler));
  } catch (const DegenerateDataError& e) {
    report.note(std::string("expected values undefined: ") + e.what());
  }
  // Estimator failures (for instance n_tot = 0) propagate after the counts are on disk.
  const CountStatistics st = count_statistics(counts, estimator);
  report_statistics(report, "", st);

  if (const auto scales = cfg.number_list("counts", "gain_scales")) {
    std::string sweep = prov + "\n# squeezing parameters multiplied by gain_scale; seed per row derived from the run seed\n";
    sweep += "gain_scale,n_tot,n_tot_std,variance_difference,variance_difference_std,nrf,nrf_std\n";
    for (std::size_t i = 0; i < scales->size(); ++i) {
      const double scale = (*scales)[i];
      if (!(scale > 0.0)) throw DomainError("[counts] gain_scales must be positive");
      SchmidtSpectrum scaled = spectrum;
      for (double& r : scaled.squeezing) r *= scale;
      const CountSet c = sample_counts(scaled, pulses, splitmix64_mix(ctx.seed + i + 1), sampler);
      const CountStatistics s = count_statistics(c, estimator);
      sweep += format_double(scale) + "," + format_double(s.n_tot.mean) + "," + format_double(s.n_tot.std) + "," +
               format_double(s.variance_difference.mean) + "," + format_double(s.variance_difference.std) + "," +
               format_double(s.nrf.mean) + "," + format_double(s.nrf.std) + "\n";
    }
    write_text(ctx, result, "nrf_points.csv", sweep);
  }
  write_text(ctx, result, "counts_report.txt", report.str());
  result.log.push_back("pulses = " + std::to_string(pulses));
  return result;
}

CommandResult cmd_traces(const CommandContext& ctx) {
  const RunConfig& cfg = ctx.config;
  const MixtureOptions mixture = mixture_options(cfg);
  const EstimatorOptions estimator = estimator_options(cfg);
  const std::string prov = provenance(ctx, "traces");
  Report report(prov);
  CommandResult result;

  if (const auto input_signal = cfg.text("traces", "input_signal")) {
    const double csv_period = cfg.number_or("traces", "csv_sample_period", 0.0);
    const TraceSet signal = read_traces(resolve(cfg, *input_signal), csv_period);
    const ChannelAnalysis a_signal = classify_traces(signal, mixture, ctx.threads);
    report.put("mode", "ingest");
    report.put("signal.pulses", static_cast<double>(signal.num_pulses));
    report.put("signal.samples", static_cast<double>(signal.num_samples));
    report_channel(report, "signal.", a_signal);

    std::string csv = prov + "\n";
    if (const auto input_idler = cfg.text("traces", "input_idler")) {
      const TraceSet idler = read_traces(resolve(cfg, *input_idler), csv_period);
      if (idler.num_pulses != signal.num_pulses) {
        throw FormatError("signal and idler trace files hold different pulse counts");
      }
      const ChannelAnalysis a_idler = classify_traces(idler, mixture, ctx.threads);
      report.put("idler.pulses", static_cast<double>(idler.num_pulses));
      report.put("idler.samples", static_cast<double>(idler.num_samples));
      report_channel(report, "idler.", a_idler);
      CountSet counts;
      counts.seed = ctx.seed;
      counts.pulses.resize(signal.num_pulses);
      counts.saturated.resize(signal.num_pulses);
      for (std::size_t i = 0; i < signal.num_pulses; ++i) {
        counts.pulses[i] = {a_signal.assignment.numbers[i], a_idler.assignment.numbers[i]};
        counts.saturated[i] = (counts.pulses[i].signal > 10 || counts.pulses[i].idler > 10) ? 1 : 0;
      }
      csv = counts_csv(prov, counts);
      try {
        report_statistics(report, "recovered.", count_statistics(counts, estimator));
      } catch (const DegenerateDataError& e) {
        report.note(std::string("recovered statistics unavailable: ") + e.what());
      }
    } else {
      csv += "pulse_index,n_signal\n";
      for (std::size_t i = 0; i < signal.num_pulses; ++i) {
        csv += std::to_string(i) + "," + std::to_string(a_signal.assignment.numbers[i]) + "\n";
      }
    }
    write_text(ctx, result, "traces_counts.csv", csv);
    write_text(ctx, result, "traces_report.txt", report.str());
    return result;
  }

  // Synthetic round trip: sample counts, render traces, classify, compare.
  const SchmidtSpectrum spectrum = schmidt_from_config(cfg);
  const std::size_t pulses = positive_size(cfg, "traces", "pulses", 100000);
  double dt = 0.0;
  const PulseTemplate tmpl = template_from_config(cfg, dt);
  const CountSet truth = sample_counts(spectrum, pulses, ctx.seed, sampler_options(cfg, ctx.threads));
  const RoundTripReport rt = round_trip(truth, tmpl, dt, ctx.seed, mixture, ctx.threads);

  const std::string dump = cfg.text("traces", "write_traces").value_or("none");
  if (dump != "none" && dump != "binary" && dump != "csv" && dump != "both") {
    throw FormatError("[traces] write_traces must be none, binary, csv or both");
  }
  if (dump != "none") {
    fs::create_directories(ctx.out_dir);
    for (Arm arm : {Arm::kSignal, Arm::kIdler}) {
      const std::string stem = arm == Arm::kSignal ? "traces_signal" : "traces_idler";
      const TraceSet traces = generate_traces(truth.column(arm), tmpl, dt, arm_trace_seed(ctx.seed, arm), ctx.threads);
      if (dump == "binary" || dump == "both") {
        write_traces_binary((fs::path(ctx.out_dir) / (stem + ".tes")).string(), traces);
        result.files.push_back(stem + ".tes");
      }
      if (dump == "csv" || dump == "both") {
        write_traces_csv((fs::path(ctx.out_dir) / (stem + ".csv")).string(), traces);
        result.files.push_back(stem + ".csv");
      }
    }
  }

  report.put("mode", "round_trip");
  report.put("pulses", static_cast<double>(pulses));
  report.put("separation_sigmas", tmpl.score_separation_sigmas());
  report.put("misclassification_rate", rt.misclassification_rate);
  report.put("misclassification_rate.signal", rt.rate_signal);
  report.put("misclassification_rate.idler", rt.rate_idler);
  report.put("tail_fraction.signal", rt.tail_fraction_signal);
  report.put("tail_fraction.idler", rt.tail_fraction_idler);
  report_mixture(report, "signal.", rt.mixture_signal);
  report_mixture(report, "idler.", rt.mixture_idler);
  for (const auto& n : rt.notes) report.note(n);
  try {
    const CountStatistics st_true = count_statistics(truth, estimator);
    const CountStatistics st_rec = count_statistics(rt.recovered, estimator);
    report.put("true.nrf", st_true.nrf.mean);
    report.put("recovered.nrf", st_rec.nrf.mean);
    report.put("true.g2_signal", st_true.g2_signal.mean);
    report.put("recovered.g2_signal", st_rec.g2_signal.mean);
  } catch (const DegenerateDataError& e) {
    report.note(std::string("count statistics unavailable: ") + e.what());
  }
  write_text(ctx, result, "traces_counts.csv", counts_csv(prov, rt.recovered));
  write_text(ctx, result, "traces_report.txt", report.str());
  return result;
}

CommandResult cmd_fit(const CommandContext& ctx) {
  const RunConfig& cfg = ctx.config;
  const std::string kind = require_text(cfg, "fit", "kind");
  const std::string data_path = resolve(cfg, require_text(cfg, "fit", "data"));
  const Table table = Table::read(data_path);
  const LeastSquaresOptions solver = solver_options(cfg);
  Report report(provenance(ctx, "fit"));
  report.put("kind", kind);
  report.put("points", static_cast<double>(table.rows()));

  if (kind == "spectrum") {
    const std::string model_name = cfg.text("fit", "model").value_or("locked_shifted");
    SpectrumModel model = SpectrumModel::kLockedShifted;
    if (model_name == "locked_zero") {
      model = SpectrumModel::kLockedZero;
    } else if (model_name == "free_detuning") {
      model = SpectrumModel::kFreeDetuning;
    } else if (model_name != "locked_shifted") {
      throw FormatError("[fit] model must be locked_shifted, locked_zero or free_detuning");
    }
    const std::size_t c_omega = table.column("omega_rad_per_s");
    const std::size_t c_v = table.column("variance_db");
    const std::size_t c_b = table.column("branch");
    std::vector<SpectrumPoint> points(table.rows());
    for (std::size_t r = 0; r < table.rows(); ++r) {
      points[r].sideband = table.number(r, c_omega);
      points[r].variance_db = table.number(r, c_v);
      const std::string& b = table.cell(r, c_b);
      if (b == "plus") {
        points[r].branch = Branch::kPlus;
      } else if (b == "minus") {
        points[r].branch = Branch::kMinus;
      } else {
        throw FormatError(data_path + ": branch must be plus or minus, got '" + b + "'");
      }
    }
    SpectrumGuess guess;
    guess.g = cfg.number_or("fit", "g", 0.0);
    guess.eta = cfg.number_or("fit", "eta", 0.0);
    guess.gamma = hz_to_rad(cfg.number_or("fit", "gamma", 0.0));
    guess.detuning_over_gamma = cfg.number_or("fit", "detuning_over_gamma", 0.0);
    report.put("model", model_name);
    report.note("gamma is reported in rad/s; variances fitted in linear units");
    report_fit(report, fit_spectrum(points, model, guess, solver));
  } else if (kind == "nrf") {
    const NrfSlopeFit fit = fit_nrf_slope(table.numbers("n_tot"), table.numbers("variance_difference"));
    report_line(report, fit.line);
    report.put("eta", fit.eta);
    report.put("eta.error", fit.eta_error);
  } else if (kind == "power_scaling") {
    const std::string pc = cfg.text("fit", "power_column").value_or("power");
    const std::string nc = cfg.text("fit", "n_tot_column").value_or("n_tot");
    report_line(report, fit_power_scaling(table.numbers(pc), table.numbers(nc)));
  } else if (kind == "variance_vs_power") {
    const auto p = table.numbers("power");
    const auto vp = table.numbers("v_plus_db");
    const auto vm = table.numbers("v_minus_db");
    std::vector<PowerScanPoint> points(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) points[i] = {p[i], vp[i], vm[i]};
    report_fit(report,
               fit_variance_vs_power(points, cfg.number_or("fit", "k", 0.0), cfg.number_or("fit", "eta", 0.0), solver));
  } else {
    throw FormatError("[fit] kind must be spectrum, nrf, power_scaling or variance_vs_power");
  }
  CommandResult result;
  write_text(ctx, result, "fit_report.txt", report.str());
  return result;
}

}  // namespace ringsqz::cli
