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

#include "ringsqz/estimation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "ringsqz/errors.hpp"
#include "ringsqz/ring_model.hpp"

namespace ringsqz {
namespace {

// Forward-mode dual number carrying up to four partial derivatives.
struct Dual {
  double v = 0.0;
  std::array<double, 4> d{};

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT(google-explicit-constructor)
  static Dual variable(double value, std::size_t index) {
    Dual x(value);
    x.d[index] = 1.0;
    return x;
  }
};

inline Dual operator+(const Dual& a, const Dual& b) {
  Dual r(a.v + b.v);
  for (std::size_t i = 0; i < 4; ++i) r.d[i] = a.d[i] + b.d[i];
  return r;
}
inline Dual operator-(const Dual& a, const Dual& b) {
  Dual r(a.v - b.v);
  for (std::size_t i = 0; i < 4; ++i) r.d[i] = a.d[i] - b.d[i];
  return r;
}
inline Dual operator-(const Dual& a) {
  Dual r(-a.v);
  for (std::size_t i = 0; i < 4; ++i) r.d[i] = -a.d[i];
  return r;
}
inline Dual operator*(const Dual& a, const Dual& b) {
  Dual r(a.v * b.v);
  for (std::size_t i = 0; i < 4; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
  return r;
}
inline Dual operator/(const Dual& a, const Dual& b) {
  Dual r(a.v / b.v);
  for (std::size_t i = 0; i < 4; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) / (b.v * b.v);
  return r;
}
inline Dual sqrt(const Dual& a) {
  Dual r(std::sqrt(a.v));
  for (std::size_t i = 0; i < 4; ++i) r.d[i] = a.d[i] / (2.0 * r.v);
  return r;
}
inline Dual exp(const Dual& a) {
  Dual r(std::exp(a.v));
  for (std::size_t i = 0; i < 4; ++i) r.d[i] = a.d[i] * r.v;
  return r;
}

inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.v; }

using std::exp;
using std::sqrt;

template <class T>
T model_variance(SpectrumModel model, Branch branch, T g, T eta, T gamma, T delta, double sideband) {
  const T w = T(sideband) / gamma;
  const T w2 = w * w;
  const bool plus = branch == Branch::kPlus;
  switch (model) {
    case SpectrumModel::kLockedShifted: {
      const T u = T(1.0) + w2;
      const T root = sqrt(u * u + T(4.0) * g * g);
      if (plus) return T(1.0) + T(4.0) * eta * g * (T(2.0) * g + root) / (u * u);
      // 2g - root = -u^2 / (2g + root)
      return T(1.0) - T(4.0) * eta * g / (T(2.0) * g + root);
    }
    case SpectrumModel::kLockedZero: {
      if (plus) return T(1.0) + T(4.0) * g * eta / ((T(1.0) - g) * (T(1.0) - g) + w2);
      return T(1.0) - T(4.0) * g * eta / ((T(1.0) + g) * (T(1.0) + g) + w2);
    }
    case SpectrumModel::kFreeDetuning: {
      const T re = T(1.0) - delta * delta + g * g + w2;
      const T mod = sqrt(re * re + T(4.0) * delta * delta);
      const T den_a = g * g - T(1.0) - delta * delta + w2;
      const T den = den_a * den_a + T(4.0) * w2;
      return T(1.0) + T(4.0) * eta * g * (T(2.0) * g + (plus ? mod : -mod)) / den;
    }
  }
  return T(1.0);
}

std::size_t parameter_count(SpectrumModel model) { return model == SpectrumModel::kFreeDetuning ? 4 : 3; }

std::vector<std::string> parameter_names(SpectrumModel model) {
  std::vector<std::string> names{"g", "eta", "gamma"};
  if (model == SpectrumModel::kFreeDetuning) names.push_back("detuning_over_gamma");
  return names;
}

template <class T>
T logistic(const T& x) {
  return T(1.0) / (T(1.0) + exp(-x));
}

double logit(double p) { return std::log(p / (1.0 - p)); }

template <class T>
void unpack(SpectrumModel model, std::span<const T> theta, T& g, T& eta, T& gamma, T& delta) {
  g = exp(theta[0]);
  eta = logistic(theta[1]);
  gamma = exp(theta[2]);
  delta = model == SpectrumModel::kFreeDetuning ? theta[3] : T(0.0);
}

const char* model_name(SpectrumModel model) {
  switch (model) {
    case SpectrumModel::kLockedShifted:
      return "locked_shifted";
    case SpectrumModel::kLockedZero:
      return "locked_zero";
    case SpectrumModel::kFreeDetuning:
      return "free_detuning";
  }
  return "?";
}

// Inverts the zero-sideband extremal variances for (g, eta). Returns false when the
// pair is not consistent with the model.
bool invert_extremal(SpectrumModel model, double v_plus, double v_minus, double& g, double& eta) {
  if (!(v_plus > 1.0) || !(v_minus < 1.0) || !(v_minus > 0.0)) return false;
  if (model == SpectrumModel::kLockedZero) {
    const double ratio = std::sqrt((v_plus - 1.0) / (1.0 - v_minus));
    g = (ratio - 1.0) / (ratio + 1.0);
    if (!(g > 0.0 && g < 1.0)) return false;
    eta = (1.0 - v_minus) * (1.0 + g) * (1.0 + g) / (4.0 * g);
  } else {
    const double sum = v_plus + v_minus - 2.0;
    const double rho = (v_plus - v_minus) / sum;
    if (!(sum > 0.0) || !(rho > 1.0)) return false;
    g = 1.0 / (2.0 * std::sqrt(rho * rho - 1.0));
    eta = sum / (16.0 * g * g);
  }
  return std::isfinite(g) && std::isfinite(eta) && g > 0.0;
}

double clamp_eta(double eta) { return std::clamp(eta, 0.02, 0.98); }

}  // namespace

SubsetStats subset_stats(std::span<const double> values) {
  if (values.size() < 2) throw DomainError("subset statistics need at least two subsets");
  SubsetStats s;
  s.values.assign(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / (n - 1.0));
  return s;
}

double FitResult::value(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return values[i];
  throw DomainError("fit result has no parameter '" + name + "'");
}

double FitResult::error(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return errors[i];
  throw DomainError("fit result has no parameter '" + name + "'");
}

double spectrum_model_variance(SpectrumModel model, Branch branch, double g, double eta, double gamma,
                               double detuning_over_gamma, double sideband) {
  return model_variance<double>(model, branch, g, eta, gamma,
                                model == SpectrumModel::kLockedShifted ? g : detuning_over_gamma, sideband);
}

std::vector<double> spectrum_residuals(SpectrumModel model, std::span<const SpectrumPoint> points,
                                       std::span<const double> theta) {
  double g, eta, gamma, delta;
  unpack<double>(model, theta, g, eta, gamma, delta);
  std::vector<double> r(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    r[i] = model_variance<double>(model, p.branch, g, eta, gamma, delta, p.sideband) - from_db(p.variance_db);
  }
  return r;
}

Matrix spectrum_residual_jacobian(SpectrumModel model, std::span<const SpectrumPoint> points,
                                  std::span<const double> theta) {
  const std::size_t n = parameter_count(model);
  std::vector<Dual> t(n);
  for (std::size_t j = 0; j < n; ++j) t[j] = Dual::variable(theta[j], j);
  Dual g, eta, gamma, delta;
  unpack<Dual>(model, std::span<const Dual>(t), g, eta, gamma, delta);
  Matrix jac(points.size(), n);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Dual v = model_variance<Dual>(model, points[i].branch, g, eta, gamma, delta, points[i].sideband);
    for (std::size_t j = 0; j < n; ++j) jac(i, j) = v.d[j];
  }
  return jac;
}

FitResult fit_spectrum(std::span<const SpectrumPoint> points, SpectrumModel model, const SpectrumGuess& guess,
                       const LeastSquaresOptions& options) {
  const std::size_t n = parameter_count(model);
  if (points.size() < n) throw DomainError("spectrum fit needs at least as many points as parameters");
  double w_lo = std::numeric_limits<double>::infinity(), w_hi = 0.0;
  for (const auto& p : points) {
    if (!(p.sideband >= 0.0) || !std::isfinite(p.variance_db)) throw DomainError("spectrum fit: invalid point");
    w_lo = std::min(w_lo, p.sideband);
    w_hi = std::max(w_hi, p.sideband);
  }

  FitResult result;
  result.notes.push_back(std::string("model mode: ") + model_name(model));
  if (points.size() < 4 || !(w_lo > 0.0 && w_hi >= 10.0 * w_lo)) {
    result.notes.push_back("data span less than 4 points or one decade of sideband frequency");
  }

  // Starting values from the lowest-sideband extremal pair.
  double g0 = 0.3, eta0 = 0.5;
  {
    double best_plus = 0.0, best_minus = 0.0, w_plus = 1e300, w_minus = 1e300;
    for (const auto& p : points) {
      if (p.branch == Branch::kPlus && p.sideband < w_plus) {
        w_plus = p.sideband;
        best_plus = from_db(p.variance_db);
      }
      if (p.branch == Branch::kMinus && p.sideband < w_minus) {
        w_minus = p.sideband;
        best_minus = from_db(p.variance_db);
      }
    }
    double g_est = 0.0, eta_est = 0.0;
    if (invert_extremal(model, best_plus, best_minus, g_est, eta_est)) {
      g0 = g_est;
      eta0 = clamp_eta(eta_est);
    }
  }
  if (guess.g > 0.0) g0 = guess.g;
  if (guess.eta > 0.0 && guess.eta < 1.0) eta0 = guess.eta;
  std::vector<double> gamma_starts;
  if (guess.gamma > 0.0) {
    gamma_starts = {guess.gamma};
  } else {
    const double mid = w_lo > 0.0 ? std::sqrt(w_lo * w_hi) : std::max(w_hi, 1.0);
    gamma_starts = {0.3 * mid, mid, 3.0 * mid, 0.1 * mid, 10.0 * mid};
  }

  LeastSquaresProblem problem;
  problem.num_residuals = points.size();
  problem.parameter_names = parameter_names(model);
  problem.residuals = [&](std::span<const double> theta, std::span<double> r) {
    const std::vector<double> v = spectrum_residuals(model, points, theta);
    std::copy(v.begin(), v.end(), r.begin());
  };

  std::optional<LeastSquaresSolution> best;
  std::string last_error;
  for (double gamma0 : gamma_starts) {
    std::vector<double> theta{std::log(g0), logit(eta0), std::log(gamma0)};
    if (model == SpectrumModel::kFreeDetuning) {
      theta.push_back(guess.detuning_over_gamma != 0.0 ? guess.detuning_over_gamma : g0);
    }
    try {
      LeastSquaresSolution sol = levenberg_marquardt(problem, theta, options);
      if (!best || sol.residual_norm < best->residual_norm) best = std::move(sol);
    } catch (const FitError& e) {
      last_error = e.what();
    }
  }
  if (!best) throw FitError("spectrum fit failed from every starting point: " + last_error, -1.0);

  double g, eta, gamma, delta;
  unpack<double>(model, std::span<const double>(best->theta), g, eta, gamma, delta);
  const std::vector<double> jac_diag{g, eta * (1.0 - eta), gamma, 1.0};
  result.names = problem.parameter_names;
  result.values = {g, eta, gamma};
  if (model == SpectrumModel::kFreeDetuning) result.values.push_back(delta);
  for (std::size_t j = 0; j < n; ++j) {
    result.errors.push_back(jac_diag[j] * std::sqrt(std::max(0.0, best->covariance(j, j))));
  }
  result.residual_norm = best->residual_norm;
  result.iterations = best->iterations;
  result.converged = best->converged;
  if (eta > 0.999 || eta < 1e-3) result.notes.push_back("eta at logistic bound");
  return result;
}

LinearFit ordinary_least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("OLS: x and y differ in length");
  if (x.size() < 3) throw DomainError("OLS: need at least three points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DegenerateDataError("OLS: all x values are identical");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (fit.slope * x[i] + fit.intercept);
    ssr += e * e;
  }
  const double s2 = ssr / (n - 2.0);
  fit.residual_norm = std::sqrt(ssr);
  fit.slope_error = std::sqrt(s2 / sxx);
  fit.intercept_error = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  return fit;
}

NrfSlopeFit fit_nrf_slope(std::span<const double> n_tot, std::span<const double> variance_difference) {
  NrfSlopeFit out;
  out.line = ordinary_least_squares(n_tot, variance_difference);
  out.eta = 1.0 - out.line.slope;
  out.eta_error = out.line.slope_error;
  return out;
}

LinearFit fit_power_scaling(std::span<const double> power, std::span<const double> n_tot) {
  if (power.size() != n_tot.size()) throw DomainError("power scaling: length mismatch");
  std::vector<double> lx(power.size()), ly(n_tot.size());
  for (std::size_t i = 0; i < power.size(); ++i) {
    if (!(power[i] > 0.0) || !(n_tot[i] > 0.0)) throw DomainError("power scaling: values must be positive");
    lx[i] = std::log(power[i]);
    ly[i] = std::log(n_tot[i]);
  }
  return ordinary_least_squares(lx, ly);
}

FitResult fit_variance_vs_power(std::span<const PowerScanPoint> points, double k_guess, double eta_guess,
                                const LeastSquaresOptions& options) {
  std::vector<double> powers;
  for (const auto& p : points) {
    if (!(p.power >= 0.0) || !std::isfinite(p.v_plus_db) || !std::isfinite(p.v_minus_db)) {
      throw DomainError("power scan: invalid point");
    }
    powers.push_back(p.power);
  }
  std::sort(powers.begin(), powers.end());
  powers.erase(std::unique(powers.begin(), powers.end()), powers.end());
  if (powers.size() < 3) throw DomainError("power scan fit needs at least three distinct powers");

  double k0 = 0.0, eta0 = 0.5;
  const auto top = std::max_element(points.begin(), points.end(),
                                    [](const auto& a, const auto& b) { return a.power < b.power; });
  double g_est = 0.0, eta_est = 0.0;
  if (invert_extremal(SpectrumModel::kLockedShifted, from_db(top->v_plus_db), from_db(top->v_minus_db), g_est,
                      eta_est)) {
    k0 = g_est / top->power;
    eta0 = clamp_eta(eta_est);
  } else {
    k0 = 0.3 / top->power;
  }
  if (k_guess > 0.0) k0 = k_guess;
  if (eta_guess > 0.0 && eta_guess < 1.0) eta0 = eta_guess;

  LeastSquaresProblem problem;
  problem.num_residuals = 2 * points.size();
  problem.parameter_names = {"eta", "k"};
  problem.residuals = [&](std::span<const double> theta, std::span<double> r) {
    const double eta = logistic(theta[0]);
    const double k = std::exp(theta[1]);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const ExtremalVariances v = extremal_variances(k * points[i].power, eta);
      r[2 * i] = v.plus - from_db(points[i].v_plus_db);
      r[2 * i + 1] = v.minus - from_db(points[i].v_minus_db);
    }
  };
  const LeastSquaresSolution sol = levenberg_marquardt(problem, {logit(eta0), std::log(k0)}, options);
  const double eta = logistic(sol.theta[0]);
  const double k = std::exp(sol.theta[1]);
  FitResult result;
  result.names = problem.parameter_names;
  result.values = {eta, k};
  result.errors = {eta * (1.0 - eta) * std::sqrt(std::max(0.0, sol.covariance(0, 0))),
                   k * std::sqrt(std::max(0.0, sol.covariance(1, 1)))};
  result.residual_norm = sol.residual_norm;
  result.iterations = sol.iterations;
  result.converged = sol.converged;
  result.notes.push_back("model mode: locked_shifted, g = k * P");
  if (eta > 0.999 || eta < 1e-3) result.notes.push_back("eta at logistic bound");
  return result;
}

}  // namespace ringsqz
