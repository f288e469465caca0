// Copyright 2026 The hmmapprox Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "hmmapprox/error.hpp"

namespace hmmapprox {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// Input data (files, user matrices) and matrices built by the library are
// checked against different tolerances.
inline constexpr double kInputTolerance = 1e-9;
inline constexpr double kInternalTolerance = 1e-12;

inline double min_entry(const Matrix& a) { return a.size() == 0 ? 0.0 : a.minCoeff(); }

// max_i |sum_j a_ij - 1|, and the row where it is attained.
inline double stochasticity_residual(const Matrix& a, Eigen::Index* worst_row = nullptr) {
  double worst = 0.0;
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double r = std::abs(a.row(i).sum() - 1.0);
    if (r > worst) {
      worst = r;
      row = i;
    }
  }
  if (worst_row) *worst_row = row;
  return worst;
}

inline void require_stochastic(const Matrix& a, double tol, const std::string& what) {
  if (a.rows() != a.cols())
    throw ShapeMismatch(what + " must be square, got " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()));
  if (a.size() > 0 && a.minCoeff() < 0.0) throw ValidationError(what + " has negative entries");
  Eigen::Index row = 0;
  const double r = stochasticity_residual(a, &row);
  if (r > tol)
    throw ValidationError(what + " row " + std::to_string(row) + " sums to " +
                          std::to_string(a.row(row).sum()) + ", expected 1");
}

struct StationaryOptions {
  double tolerance = 1e-10;      // acceptance bound on ||pi A - pi||_inf
  int max_power_iterations = 1000000;
};

struct StationaryResult {
  RowVector pi;
  bool unique = true;          // false when A has several invariant distributions
  bool power_iteration = false;
  double residual = 0.0;       // ||pi A - pi||_inf
};

// Invariant probability vector of a row-stochastic matrix.
//
// Solves (A^T - I) pi^T = 0 together with e^T pi^T = 1 as a least-squares
// problem with a complete orthogonal decomposition, which yields the
// minimum-norm solution when the chain is reducible (non-unique invariant
// vector). If that solution is not an accurate nonnegative invariant vector,
// power iteration on the lazy chain (A + I)/2 started from the uniform vector
// takes over.
inline StationaryResult stationary_distribution(const Matrix& a, const StationaryOptions& opts = {}) {
  require_stochastic(a, kInputTolerance, "transition matrix");
  const Eigen::Index n = a.rows();
  if (n == 0) throw ValidationError("transition matrix is empty");

  Matrix system(n + 1, n);
  system.topRows(n) = a.transpose() - Matrix::Identity(n, n);
  system.row(n).setOnes();
  Vector rhs = Vector::Zero(n + 1);
  rhs(n) = 1.0;

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(system);
  cod.setThreshold(1e-12);
  StationaryResult result;
  result.unique = cod.rank() == n;
  result.pi = cod.solve(rhs).transpose();

  auto residual = [&a](const RowVector& p) { return (p * a - p).cwiseAbs().maxCoeff(); };
  // Round-off can leave entries of order -1e-17 on transient states.
  if (result.pi.minCoeff() > -1e-13) {
    result.pi = result.pi.cwiseMax(0.0);
    result.pi /= result.pi.sum();
    result.residual = residual(result.pi);
    if (result.residual <= opts.tolerance) return result;
  }

  result.power_iteration = true;
  const Matrix lazy = 0.5 * (a + Matrix::Identity(n, n));
  RowVector p = RowVector::Constant(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < opts.max_power_iterations; ++it) {
    RowVector next = p * lazy;
    next /= next.sum();
    const double change = (next - p).cwiseAbs().maxCoeff();
    p = std::move(next);
    if (change < 0.1 * opts.tolerance && residual(p) <= opts.tolerance) {
      result.pi = p;
      result.residual = residual(p);
      return result;
    }
  }
  throw ValidationError("stationary vector: power iteration did not converge");
}

inline RowVector stationary_vector(const Matrix& a) { return stationary_distribution(a).pi; }

}  // namespace hmmapprox
