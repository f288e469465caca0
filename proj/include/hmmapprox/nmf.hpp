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

// Informational-divergence NMF with the stochasticity constraints used by
// the approximate realization algorithm.
//
//   solve_two_factor       min D(H || Pi Gamma)  s.t. e'Pi e = 1, Gamma e = e
//   solve_fixed_left       min D(H || Pi Gamma)  over Gamma, s.t. Gamma e = e
//   solve_left_stochastic  min D(T || M (I_m (x) G)) over M, s.t. M e = e
//
// All three use multiplicative updates, which never increase the objective
// and keep zero entries at zero. Constraints are restored exactly after every
// iteration, so every iterate is feasible.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "hmmapprox/error.hpp"
#include "hmmapprox/hankel.hpp"
#include "hmmapprox/linalg.hpp"

namespace hmmapprox {

struct SolverOptions {
  int max_iters = 5000;
  // Stop once the relative objective decrease of one iteration drops below
  // this value.
  double tol = 1e-10;
  std::uint64_t seed = 0;
  // Optional 0/1 pattern for the free factor being solved for (Pi in
  // solve_two_factor, Gamma in solve_fixed_left, the block matrix M in
  // solve_left_stochastic). Masked entries start at zero and stay there.
  std::optional<Matrix> structure_mask;
  // Safeguarded extrapolation between multiplicative steps; a trial point is
  // kept only when it lowers the objective further than the plain step.
  bool extrapolate = true;
};

struct SolveReport {
  int iterations = 0;
  std::vector<double> objective;  // entry k: objective after k iterations
  std::vector<double> residual;   // entry k: constraint residual after k iterations
  bool converged = false;
  bool renormalized_input = false;      // H did not sum to one
  bool overparametrized = false;        // inner size exceeds min(rows, cols)
  std::vector<std::size_t> reset_rows;  // rows that received no mass and were set uniform
  int accepted_extrapolations = 0;

  double final_objective() const { return objective.empty() ? 0.0 : objective.back(); }
  double final_residual() const { return residual.empty() ? 0.0 : residual.back(); }
};

struct FactorPair {
  Matrix pi;     // R x N
  Matrix gamma;  // N x C, row-stochastic
};

struct TwoFactorResult {
  FactorPair factors;
  SolveReport report;
};

struct FixedLeftResult {
  Matrix gamma;
  SolveReport report;
};

struct LeftStochasticResult {
  Matrix mblock;  // N x mN, [M(y_1) | ... | M(y_m)]
  SolveReport report;
};

inline Divergence objective(const Matrix& h, const Matrix& pi, const Matrix& gamma) {
  if (pi.cols() != gamma.rows() || pi.rows() != h.rows() || gamma.cols() != h.cols())
    throw ShapeMismatch("objective: H is " + std::to_string(h.rows()) + "x" +
                        std::to_string(h.cols()) + ", Pi " + std::to_string(pi.rows()) + "x" +
                        std::to_string(pi.cols()) + ", Gamma " + std::to_string(gamma.rows()) +
                        "x" + std::to_string(gamma.cols()));
  return i_divergence(h, pi * gamma);
}

inline void write_trace_csv(std::ostream& os, const SolveReport& report) {
  const auto old_precision = os.precision(17);
  os << "iteration,objective,residual\n";
  for (std::size_t k = 0; k < report.objective.size(); ++k)
    os << k << ',' << report.objective[k] << ',' << report.residual[k] << '\n';
  os.precision(old_precision);
}

namespace detail {

inline Matrix random_positive(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(0.1, 1.0);
  Matrix x(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) x(i, j) = uniform(rng);
  return x;
}

inline void apply_mask(Matrix& x, const std::optional<Matrix>& mask, const char* what) {
  if (!mask) return;
  if (mask->rows() != x.rows() || mask->cols() != x.cols())
    throw ShapeMismatch(std::string("structure mask does not match ") + what);
  x = x.cwiseProduct((mask->array() != 0.0).cast<double>().matrix());
}

// H ./ X with 0/0 = 0. A positive H entry over a zero model entry means the
// objective is infinite.
inline Matrix ratio(const Matrix& h, const Matrix& x, const char* step) {
  Matrix r(h.rows(), h.cols());
  for (Eigen::Index j = 0; j < h.cols(); ++j)
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
      const double q = h(i, j);
      if (q == 0.0) {
        r(i, j) = 0.0;
      } else if (x(i, j) == 0.0) {
        throw SolverError(step, "model assigns zero mass where the data is positive");
      } else {
        r(i, j) = q / x(i, j);
      }
    }
  return r;
}

// Normalizes each row to sum one. Rows with no mass become uniform over
// their admissible (unmasked) entries and are recorded.
inline void normalize_rows(Matrix& x, const std::optional<Matrix>& mask,
                           std::vector<std::size_t>* reset) {
  for (Eigen::Index a = 0; a < x.rows(); ++a) {
    const double z = x.row(a).sum();
    if (z > 0.0) {
      x.row(a) /= z;
      continue;
    }
    RowVector row = RowVector::Ones(x.cols());
    if (mask) row = (mask->row(a).array() != 0.0).cast<double>().matrix();
    if (row.sum() == 0.0) throw ValidationError("structure mask leaves a row with no free entries");
    x.row(a) = row / row.sum();
    if (reset && std::find(reset->begin(), reset->end(), static_cast<std::size_t>(a)) == reset->end())
      reset->push_back(static_cast<std::size_t>(a));
  }
}

// Gamma <- D^-1 Gamma, Pi <- Pi D with D = diag(Gamma e). The product Pi Gamma
// is unchanged; rows of Gamma with no mass are left alone.
inline void rebalance(Matrix& pi, Matrix& gamma) {
  const Vector d = gamma.rowwise().sum();
  for (Eigen::Index a = 0; a < gamma.rows(); ++a) {
    if (d(a) > 0.0) {
      gamma.row(a) /= d(a);
      pi.col(a) *= d(a);
    }
  }
}

inline double row_residual(const Matrix& x) { return x.rows() == 0 ? 0.0 : stochasticity_residual(x); }

inline double finite_objective(const Divergence& d, const char* step) {
  if (d.is_infinite()) throw SolverError(step, "objective is infinite (absolute continuity fails)");
  return d.value();
}

// x * (x / previous)^beta, entrywise; entries with a zero on either side are
// left as they are.
inline Matrix extrapolate(const Matrix& x, const Matrix& previous, double beta) {
  Matrix y = x;
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (x(i, j) > 0.0 && previous(i, j) > 0.0) y(i, j) = x(i, j) * std::pow(x(i, j) / previous(i, j), beta);
  return y;
}

// Step-size control for the extrapolation: grow on success, halve on failure.
struct Extrapolator {
  double beta = 0.5;
  static constexpr double kGrowth = 1.1;
  static constexpr double kMax = 8.0;
  static constexpr double kMin = 1.0 / 64.0;

  void accept() { beta = std::min(beta * kGrowth, kMax); }
  void reject() { beta = std::max(beta * 0.5, kMin); }
};

// D(H || X_old) - D(H || X_new), summed term by term so that the difference
// of two nearly equal objectives keeps its relative accuracy.
inline double divergence_decrease(const Matrix& h, const Matrix& x_old, const Matrix& x_new) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < h.cols(); ++j)
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
      const double a = x_old(i, j), b = x_new(i, j);
      total += a - b;
      if (h(i, j) > 0.0) total += h(i, j) * std::log1p((b - a) / a);
    }
  return total;
}

inline bool decreased_enough(double previous, double current, double decrease, double tol) {
  if (current <= 0.0) return true;
  return decrease <= tol * std::abs(previous);
}

// Shared iteration driver. `step` advances the state in place by one plain
// multiplicative iteration and returns the new objective; `trial` builds an
// extrapolated state from (current, previous) and returns its objective, or
// nothing when it is not worth trying. `decrease(before, after)` gives the
// objective decrease between two states.
template <class State, class Step, class Trial, class Residual, class Decrease>
SolveReport iterate(State& state, double initial_objective, const SolverOptions& opts, Step step,
                    Trial trial, Residual residual, Decrease decrease) {
  if (opts.max_iters < 1) throw ValidationError("max_iters must be at least 1");
  if (!(opts.tol > 0.0)) throw ValidationError("tol must be positive");
  SolveReport report;
  report.objective.push_back(initial_objective);
  report.residual.push_back(residual(state));
  Extrapolator control;
  double current = initial_objective;
  for (int k = 0; k < opts.max_iters; ++k) {
    State previous = state;
    double next = step(state);
    if (opts.extrapolate && k > 0) {
      State candidate = state;
      const std::optional<double> value = trial(candidate, previous, control.beta);
      if (value && *value < next) {
        state = std::move(candidate);
        next = *value;
        control.accept();
        ++report.accepted_extrapolations;
      } else {
        control.reject();
      }
    }
    report.iterations = k + 1;
    report.objective.push_back(next);
    report.residual.push_back(residual(state));
    const double before = current;
    current = next;
    if (decreased_enough(before, current, decrease(previous, state), opts.tol)) {
      report.converged = true;
      break;
    }
  }
  return report;
}

}  // namespace detail

// Step 1: full two-factor problem.
//
// One iteration is a Pi sweep followed by a Gamma sweep of the standard
// I-divergence multiplicative updates, then the product-preserving
// rebalancing Gamma <- D^-1 Gamma, Pi <- Pi D with D = diag(Gamma e), then
// Pi <- Pi / (e'Pi e). After a Gamma sweep the model mass equals the data
// mass, so the last scaling leaves the objective unchanged up to rounding.
inline TwoFactorResult solve_two_factor(const Matrix& h_in, std::size_t inner,
                                        const SolverOptions& opts = {}) {
  constexpr const char* kStep = "law approximation";
  if (inner < 1) throw ValidationError("inner size must be at least 1");
  if (h_in.size() == 0) throw ShapeMismatch("empty data matrix");
  if (h_in.minCoeff() < 0.0) throw ValidationError("data matrix has negative entries");
  const double total = h_in.sum();
  if (!(total > 0.0)) throw ValidationError("data matrix has no mass");

  SolveReport flags;
  Matrix h = h_in;
  if (std::abs(total - 1.0) > kInternalTolerance) {
    h /= total;
    flags.renormalized_input = true;
  }
  const auto n = static_cast<Eigen::Index>(inner);
  flags.overparametrized = n > std::min(h.rows(), h.cols());

  std::mt19937_64 rng(opts.seed);
  FactorPair f{detail::random_positive(h.rows(), n, rng), detail::random_positive(n, h.cols(), rng)};
  detail::apply_mask(f.pi, opts.structure_mask, "Pi");
  std::vector<std::size_t> reset;
  detail::normalize_rows(f.gamma, std::nullopt, &reset);
  if (!(f.pi.sum() > 0.0)) throw ValidationError("structure mask removes every entry of Pi");
  f.pi /= f.pi.sum();

  auto normalize = [&](FactorPair& s) {
    detail::rebalance(s.pi, s.gamma);
    detail::normalize_rows(s.gamma, std::nullopt, &reset);
    const double mass = s.pi.sum();
    if (!(mass > 0.0)) throw SolverError(kStep, "left factor lost all mass");
    s.pi /= mass;
  };
  auto evaluate = [&](const FactorPair& s) {
    return detail::finite_objective(objective(h, s.pi, s.gamma), kStep);
  };
  auto step = [&](FactorPair& s) {
    Matrix r = detail::ratio(h, s.pi * s.gamma, kStep);
    const RowVector gamma_mass = s.gamma.rowwise().sum().transpose();
    s.pi = s.pi.cwiseProduct(r * s.gamma.transpose());
    for (Eigen::Index a = 0; a < n; ++a)
      if (gamma_mass(a) > 0.0) s.pi.col(a) /= gamma_mass(a);
    detail::apply_mask(s.pi, opts.structure_mask, "Pi");

    r = detail::ratio(h, s.pi * s.gamma, kStep);
    const Vector pi_mass = s.pi.colwise().sum().transpose();
    const Matrix numer = s.pi.transpose() * r;
    for (Eigen::Index a = 0; a < n; ++a)
      if (pi_mass(a) > 0.0) s.gamma.row(a) = s.gamma.row(a).cwiseProduct(numer.row(a)) / pi_mass(a);
    normalize(s);
    return evaluate(s);
  };
  auto trial = [&](FactorPair& s, const FactorPair& previous, double beta) -> std::optional<double> {
    s.pi = detail::extrapolate(s.pi, previous.pi, beta);
    s.gamma = detail::extrapolate(s.gamma, previous.gamma, beta);
    normalize(s);
    const Divergence d = objective(h, s.pi, s.gamma);
    if (d.is_infinite()) return std::nullopt;
    return d.value();
  };
  auto residual = [](const FactorPair& s) {
    return std::max(std::abs(s.pi.sum() - 1.0), detail::row_residual(s.gamma));
  };

  auto decrease = [&](const FactorPair& a, const FactorPair& b) {
    return detail::divergence_decrease(h, a.pi * a.gamma, b.pi * b.gamma);
  };

  SolveReport report = detail::iterate(f, evaluate(f), opts, step, trial, residual, decrease);
  report.renormalized_input = flags.renormalized_input;
  report.overparametrized = flags.overparametrized;
  report.reset_rows = std::move(reset);
  return {std::move(f), std::move(report)};
}

// Step 2: Gamma only, Pi fixed, Gamma e = e.
//
// Gamma_aj <- Gamma_aj (sum_i Pi_ia H_ij / (Pi Gamma)_ij) / Z_a with Z_a the
// row normalizer. This is the alternating-minimization form of the update;
// the problem is convex in Gamma and the iteration converges to a global
// minimum.
inline FixedLeftResult solve_fixed_left(const Matrix& h, const Matrix& pi_fixed,
                                        const SolverOptions& opts = {}) {
  constexpr const char* kStep = "approximate realization";
  if (pi_fixed.rows() != h.rows())
    throw ShapeMismatch("Pi has " + std::to_string(pi_fixed.rows()) + " rows, H has " +
                        std::to_string(h.rows()));
  if (h.size() == 0 || pi_fixed.cols() == 0) throw ShapeMismatch("empty factor");
  if (h.minCoeff() < 0.0 || pi_fixed.minCoeff() < 0.0)
    throw ValidationError("fixed-left problem needs nonnegative data");

  std::mt19937_64 rng(opts.seed);
  Matrix gamma = detail::random_positive(pi_fixed.cols(), h.cols(), rng);
  detail::apply_mask(gamma, opts.structure_mask, "Gamma");
  std::vector<std::size_t> reset;
  detail::normalize_rows(gamma, opts.structure_mask, &reset);
  reset.clear();

  auto evaluate = [&](const Matrix& g) {
    return detail::finite_objective(objective(h, pi_fixed, g), kStep);
  };
  auto step = [&](Matrix& g) {
    const Matrix r = detail::ratio(h, pi_fixed * g, kStep);
    g = g.cwiseProduct(pi_fixed.transpose() * r);
    detail::apply_mask(g, opts.structure_mask, "Gamma");
    detail::normalize_rows(g, opts.structure_mask, &reset);
    return evaluate(g);
  };
  auto trial = [&](Matrix& g, const Matrix& previous, double beta) -> std::optional<double> {
    g = detail::extrapolate(g, previous, beta);
    detail::normalize_rows(g, opts.structure_mask, nullptr);
    const Divergence d = objective(h, pi_fixed, g);
    if (d.is_infinite()) return std::nullopt;
    return d.value();
  };
  auto residual = [](const Matrix& g) { return detail::row_residual(g); };

  auto decrease = [&](const Matrix& a, const Matrix& b) {
    return detail::divergence_decrease(h, pi_fixed * a, pi_fixed * b);
  };

  SolveReport report = detail::iterate(gamma, evaluate(gamma), opts, step, trial, residual, decrease);
  report.overparametrized = pi_fixed.cols() > std::min(h.rows(), h.cols());
  report.reset_rows = std::move(reset);
  return {std::move(gamma), std::move(report)};
}

namespace detail {

// M (I_m (x) G) without forming the Kronecker product: block y of the result
// is M(y) G.
inline Matrix block_product(const Matrix& mblock, const Matrix& g, Eigen::Index symbols) {
  const Eigen::Index n = g.rows();
  const Eigen::Index width = g.cols();
  Matrix x(mblock.rows(), width * symbols);
  for (Eigen::Index y = 0; y < symbols; ++y)
    x.middleCols(y * width, width).noalias() = mblock.middleCols(y * n, n) * g;
  return x;
}

}  // namespace detail

// Step 3: M = [M(y_1) | ... | M(y_m)] with M e = e, given
// T = Gamma*_{n+1} and G = Gamma*_n (row-stochastic). The right factor is the
// block diagonal I_m (x) G, which is never materialized.
inline LeftStochasticResult solve_left_stochastic(const Matrix& t, const Matrix& g,
                                                  std::size_t symbols,
                                                  const SolverOptions& opts = {}) {
  constexpr const char* kStep = "parametrization";
  const auto m = static_cast<Eigen::Index>(symbols);
  const Eigen::Index n = g.rows();
  if (m < 1 || n < 1) throw ShapeMismatch("parametrization needs m >= 1 and N >= 1");
  if (t.rows() != n || t.cols() != g.cols() * m)
    throw ShapeMismatch("T is " + std::to_string(t.rows()) + "x" + std::to_string(t.cols()) +
                        ", expected " + std::to_string(n) + "x" + std::to_string(g.cols() * m));
  if (t.minCoeff() < 0.0 || g.minCoeff() < 0.0)
    throw ValidationError("parametrization needs nonnegative factors");
  if (detail::row_residual(g) > kInputTolerance)
    throw ValidationError("right factor Gamma_n must be row-stochastic");

  std::mt19937_64 rng(opts.seed);
  Matrix mblock = detail::random_positive(n, n * m, rng);
  detail::apply_mask(mblock, opts.structure_mask, "M");
  std::vector<std::size_t> reset;
  detail::normalize_rows(mblock, opts.structure_mask, &reset);
  reset.clear();

  auto evaluate = [&](const Matrix& mb) {
    return detail::finite_objective(i_divergence(t, detail::block_product(mb, g, m)), kStep);
  };
  auto step = [&](Matrix& mb) {
    const Matrix r = detail::ratio(t, detail::block_product(mb, g, m), kStep);
    const Eigen::Index width = g.cols();
    Matrix numer(n, n * m);
    for (Eigen::Index y = 0; y < m; ++y)
      numer.middleCols(y * n, n).noalias() = r.middleCols(y * width, width) * g.transpose();
    mb = mb.cwiseProduct(numer);
    detail::apply_mask(mb, opts.structure_mask, "M");
    detail::normalize_rows(mb, opts.structure_mask, &reset);
    return evaluate(mb);
  };
  auto trial = [&](Matrix& mb, const Matrix& previous, double beta) -> std::optional<double> {
    mb = detail::extrapolate(mb, previous, beta);
    detail::normalize_rows(mb, opts.structure_mask, nullptr);
    const Divergence d = i_divergence(t, detail::block_product(mb, g, m));
    if (d.is_infinite()) return std::nullopt;
    return d.value();
  };
  auto residual = [](const Matrix& mb) { return detail::row_residual(mb); };

  auto decrease = [&](const Matrix& a, const Matrix& b) {
    return detail::divergence_decrease(t, detail::block_product(a, g, m), detail::block_product(b, g, m));
  };

  SolveReport report = detail::iterate(mblock, evaluate(mblock), opts, step, trial, residual, decrease);
  report.reset_rows = std::move(reset);
  return {std::move(mblock), std::move(report)};
}

}  // namespace hmmapprox
