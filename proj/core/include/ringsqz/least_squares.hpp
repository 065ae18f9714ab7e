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

// Damped Gauss-Newton (Levenberg-Marquardt) for small dense problems.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ringsqz {

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

using ResidualFunction = std::function<void(std::span<const double> theta, std::span<double> residuals)>;
using JacobianFunction = std::function<void(std::span<const double> theta, Matrix& jacobian)>;

struct LeastSquaresProblem {
  std::size_t num_residuals = 0;
  ResidualFunction residuals;
  JacobianFunction jacobian;  // optional; central differences when empty
  std::vector<std::string> parameter_names;
};

struct LeastSquaresOptions {
  double gradient_tolerance = 1e-8;
  int max_iterations = 500;
  double initial_damping = 1e-3;
  double difference_step = 1e-6;  // relative step for numerical Jacobians
};

struct LeastSquaresSolution {
  std::vector<double> theta;
  std::vector<double> residuals;
  double residual_norm = 0.0;
  double gradient_norm = 0.0;  // infinity norm of J^T r at the solution
  int iterations = 0;
  bool converged = false;
  Matrix covariance;  // s^2 (J^T J)^-1 with s^2 = SSR / (m - n)
};

Matrix central_difference_jacobian(const ResidualFunction& residuals, std::size_t num_residuals,
                                   std::span<const double> theta, double relative_step = 1e-6);

/// Minimizes 0.5 |r(theta)|^2. Converged means |J^T r|_inf (or its column-normalized
/// cosine form) fell below options.gradient_tolerance.
///
/// Throws FitError when max_iterations is exhausted, when the damping saturates
/// without meeting the tolerance, or when J^T J at the solution is singular (the
/// message names the degenerate parameter pair).
LeastSquaresSolution levenberg_marquardt(const LeastSquaresProblem& problem, std::vector<double> theta0,
                                         const LeastSquaresOptions& options = {});

}  // namespace ringsqz
