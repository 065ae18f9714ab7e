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

#include "ringsqz/least_squares.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "ringsqz/errors.hpp"

namespace ringsqz {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd to_eigen(const Matrix& m) {
  MatrixXd out(m.rows, m.cols);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) out(r, c) = m(r, c);
  return out;
}

std::string param_name(const LeastSquaresProblem& p, std::size_t i) {
  if (i < p.parameter_names.size()) return p.parameter_names[i];
  return "p" + std::to_string(i);
}

double sum_squares(const std::vector<double>& r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return s;
}

// Names a parameter (or pair) responsible for rank deficiency of J^T J, if any.
bool find_degenerate_pair(const LeastSquaresProblem& problem, const MatrixXd& jtj, std::string& what) {
  const Eigen::Index n = jtj.rows();
  const double max_diag = jtj.diagonal().maxCoeff();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(jtj(i, i) > 1e-28 * std::max(max_diag, 1e-300))) {
      what = "parameter '" + param_name(problem, i) + "' does not influence the residuals (pair " +
             param_name(problem, i) + "/" + param_name(problem, i) + ")";
      return true;
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double corr = jtj(i, j) / std::sqrt(jtj(i, i) * jtj(j, j));
      if (std::abs(corr) > 1.0 - 1e-12) {
        what = "parameters '" + param_name(problem, i) + "' and '" + param_name(problem, j) +
               "' are degenerate";
        return true;
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(jtj);
  const VectorXd ev = eig.eigenvalues();
  if (ev(0) <= 1e-14 * ev(n - 1)) {
    // Degenerate combination of more than two parameters: report the two largest
    // components of the null vector.
    const VectorXd v = eig.eigenvectors().col(0).cwiseAbs();
    Eigen::Index a = 0;
    v.maxCoeff(&a);
    VectorXd rest = v;
    rest(a) = -1.0;
    Eigen::Index b = 0;
    rest.maxCoeff(&b);
    what = "normal equations singular along parameters '" + param_name(problem, a) + "' and '" +
           param_name(problem, b) + "'";
    return true;
  }
  return false;
}

}  // namespace

Matrix central_difference_jacobian(const ResidualFunction& residuals, std::size_t num_residuals,
                                   std::span<const double> theta, double relative_step) {
  const std::size_t n = theta.size();
  Matrix jac(num_residuals, n);
  std::vector<double> x(theta.begin(), theta.end());
  std::vector<double> rp(num_residuals), rm(num_residuals);
  for (std::size_t j = 0; j < n; ++j) {
    const double h = relative_step * std::max(1.0, std::abs(theta[j]));
    x[j] = theta[j] + h;
    residuals(x, rp);
    x[j] = theta[j] - h;
    residuals(x, rm);
    x[j] = theta[j];
    for (std::size_t i = 0; i < num_residuals; ++i) jac(i, j) = (rp[i] - rm[i]) / (2.0 * h);
  }
  return jac;
}

LeastSquaresSolution levenberg_marquardt(const LeastSquaresProblem& problem, std::vector<double> theta,
                                         const LeastSquaresOptions& options) {
  const std::size_t m = problem.num_residuals;
  const std::size_t n = theta.size();
  if (n == 0 || m == 0) throw DomainError("least squares: empty problem");

  auto eval_jacobian = [&](const std::vector<double>& x) {
    if (problem.jacobian) {
      Matrix j(m, n);
      problem.jacobian(x, j);
      return j;
    }
    return central_difference_jacobian(problem.residuals, m, x, options.difference_step);
  };

  std::vector<double> r(m), r_trial(m);
  problem.residuals(theta, r);
  double ssr = sum_squares(r);
  if (!std::isfinite(ssr)) throw FitError("least squares: residuals not finite at the starting point", ssr);

  double lambda = options.initial_damping;
  double nu = 2.0;
  bool converged = false;
  int iterations = 0;
  double grad_inf = 0.0;
  double cosine = 0.0;
  MatrixXd jtj;

  for (;;) {
    const MatrixXd jac = to_eigen(eval_jacobian(theta));
    const VectorXd rv = Eigen::Map<const VectorXd>(r.data(), static_cast<Eigen::Index>(m));
    const VectorXd grad = jac.transpose() * rv;
    jtj = jac.transpose() * jac;
    grad_inf = grad.cwiseAbs().maxCoeff();

    // Columns negligible against the largest carry no information and are skipped.
    cosine = 0.0;
    const double rnorm = std::sqrt(ssr);
    const VectorXd col_norms = jac.colwise().norm();
    const double col_floor = 1e-12 * col_norms.maxCoeff();
    for (std::size_t j = 0; j < n; ++j) {
      const double cn = col_norms(static_cast<Eigen::Index>(j));
      if (cn > col_floor && rnorm > 0.0) cosine = std::max(cosine, std::abs(grad(j)) / (cn * rnorm));
    }
    if (grad_inf <= options.gradient_tolerance || cosine <= options.gradient_tolerance) {
      converged = true;
      break;
    }
    if (iterations >= options.max_iterations) break;
    ++iterations;

    VectorXd diag = jtj.diagonal();
    const double diag_floor = 1e-12 * std::max(diag.maxCoeff(), 1e-300);
    for (Eigen::Index k = 0; k < diag.size(); ++k) diag(k) = std::max(diag(k), diag_floor);

    bool accepted = false;
    while (!accepted) {
      MatrixXd a = jtj;
      a.diagonal() += lambda * diag;
      const VectorXd step = a.ldlt().solve(-grad);
      std::vector<double> trial(n);
      for (std::size_t j = 0; j < n; ++j) trial[j] = theta[j] + step(static_cast<Eigen::Index>(j));
      problem.residuals(trial, r_trial);
      const double ssr_trial = sum_squares(r_trial);
      const double predicted = step.dot(lambda * diag.cwiseProduct(step) - grad);
      if (std::isfinite(ssr_trial) && ssr_trial < ssr && step.allFinite()) {
        const double rho = predicted > 0.0 ? (ssr - ssr_trial) / predicted : 1.0;
        lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
        nu = 2.0;
        theta = std::move(trial);
        std::swap(r, r_trial);
        ssr = ssr_trial;
        accepted = true;
      } else {
        lambda *= nu;
        nu *= 2.0;
        if (lambda > 1e30 || !std::isfinite(lambda)) break;
      }
    }
    if (!accepted) {
      // No downhill step exists at working precision.
      break;
    }
  }

  if (!converged) {
    std::ostringstream os;
    os << "least squares did not converge after " << iterations << " iterations: residual norm "
       << std::sqrt(ssr) << ", gradient " << grad_inf << ", gradient cosine " << cosine;
    throw FitError(os.str(), std::sqrt(ssr));
  }

  std::string degenerate;
  if (find_degenerate_pair(problem, jtj, degenerate)) {
    throw FitError("ill-conditioned fit: " + degenerate, std::sqrt(ssr));
  }

  LeastSquaresSolution sol;
  sol.theta = theta;
  sol.residuals = r;
  sol.residual_norm = std::sqrt(ssr);
  sol.gradient_norm = grad_inf;
  sol.iterations = iterations;
  sol.converged = true;
  const double s2 = m > n ? ssr / static_cast<double>(m - n) : 0.0;
  const MatrixXd cov = s2 * jtj.ldlt().solve(MatrixXd::Identity(n, n));
  sol.covariance = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sol.covariance(i, j) = cov(i, j);
  return sol;
}

}  // namespace ringsqz
