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

// Approximate realization of a stationary source by an HMM of given size:
//
//   1. factor H_nn ~ Pi* Gamma*_n                      (solve_two_factor)
//   2. fit Gamma*_{n+1} to H_{n,n+1} with Pi* fixed      (solve_fixed_left)
//   3. fit M = [M(y_1)|...|M(y_m)] to Gamma*_{n+1} against I_m (x) Gamma*_n
//                                                        (solve_left_stochastic)
//
// The output model uses A* = sum_y M*(y) and its invariant vector pi*.
// When the approximating class is Markov, every step has a closed form and
// the result is A*_ij = q(j|i).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <future>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hmmapprox/error.hpp"
#include "hmmapprox/hankel.hpp"
#include "hmmapprox/linalg.hpp"
#include "hmmapprox/models.hpp"
#include "hmmapprox/nmf.hpp"
#include "hmmapprox/words.hpp"

namespace hmmapprox {

// Singular values above rel_tol * sigma_max.
inline std::size_t numerical_rank(const Matrix& x, double rel_tol = 1e-10) {
  if (x.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(x);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  return static_cast<std::size_t>((s.array() > rel_tol * s(0)).count());
}

struct ApproximationResult {
  HmmModel model;
  std::size_t depth = 0;  // n
  std::uint64_t seed = 0;
  FactorPair law_factors;  // Pi*_n, Gamma*_n
  Matrix gamma_next;       // Gamma*_{n+1}
  Matrix mblock;           // [M*(y_1) | ... | M*(y_m)]
  SolveReport law;
  SolveReport realization;
  SolveReport parametrization;
  Divergence block_divergence;  // (1/2n) D(H_nn || Pi* Gamma*_n)
  Divergence model_divergence;  // (1/2n) D(H_nn || H_nn of the output model)
  std::size_t pi_rank = 0;      // numerical rank of Pi*_n
  bool rank_deficient = false;
  std::size_t restarts = 1;

  bool converged() const { return law.converged && realization.converged && parametrization.converged; }
};

template <PdfSource Q>
ApproximationResult approximate_hmm_once(const Q& source, std::size_t states, std::size_t n,
                                         const SolverOptions& opts) {
  if (states < 1) throw ValidationError("HMM size must be at least 1");
  if (n < 1) throw ValidationError("depth n must be at least 1");
  if (2 * n + 1 > source.max_length())
    throw LengthOutOfRange("source must support words of length 2n+1 = " + std::to_string(2 * n + 1));
  const std::size_t m = source.alphabet().size();
  const auto big_n = static_cast<Eigen::Index>(states);

  const HankelBlock h = build_block(source, n, n);
  const HankelBlock h_next = build_block(source, n, n + 1);

  if (opts.structure_mask)
    throw ValidationError("approximate_hmm does not take a structure mask");
  TwoFactorResult law = solve_two_factor(h.data, states, opts);
  FixedLeftResult realization = solve_fixed_left(h_next.data, law.factors.pi, opts);
  LeftStochasticResult param =
      solve_left_stochastic(realization.gamma, law.factors.gamma, m, opts);

  const auto cols = static_cast<Eigen::Index>(checked_power(m, n));
  if (law.factors.pi.rows() != cols || law.factors.pi.cols() != big_n ||
      realization.gamma.rows() != big_n || realization.gamma.cols() != cols * static_cast<Eigen::Index>(m) ||
      param.mblock.rows() != big_n || param.mblock.cols() != big_n * static_cast<Eigen::Index>(m))
    throw SolverError("assembly", "unexpected factor shapes");

  std::vector<Matrix> emission;
  emission.reserve(m);
  for (std::size_t y = 0; y < m; ++y)
    emission.push_back(param.mblock.middleCols(static_cast<Eigen::Index>(y) * big_n, big_n));
  Matrix a = Matrix::Zero(big_n, big_n);
  for (const Matrix& my : emission) a += my;
  if (stochasticity_residual(a) > kInternalTolerance)
    throw SolverError("assembly", "A* is not row-stochastic");
  RowVector pi = stationary_vector(a);
  HmmModel model(source.alphabet(), std::move(emission), std::move(pi), kInternalTolerance);

  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  const Divergence block_div = scale * objective(h.data, law.factors.pi, law.factors.gamma);
  const Divergence model_div = scale * i_divergence(h.data, build_block(model, n, n).data);
  const std::size_t rank = numerical_rank(law.factors.pi);

  return ApproximationResult{std::move(model),
                             n,
                             opts.seed,
                             std::move(law.factors),
                             std::move(realization.gamma),
                             std::move(param.mblock),
                             std::move(law.report),
                             std::move(realization.report),
                             std::move(param.report),
                             block_div,
                             model_div,
                             rank,
                             rank < std::min<std::size_t>(states, static_cast<std::size_t>(cols)),
                             1};
}

// Runs the three-step algorithm with seeds opts.seed, opts.seed + 1, ... and
// keeps the run whose output model has the smallest block divergence
// (1/2n) D(H_nn || H_nn^{P*}); ties go to the lowest seed. Restarts run
// concurrently and are independent.
template <PdfSource Q>
ApproximationResult approximate_hmm(const Q& source, std::size_t states, std::size_t n,
                                    const SolverOptions& opts = {}, std::size_t restarts = 1) {
  if (restarts < 1) throw ValidationError("restarts must be at least 1");
  std::vector<std::future<ApproximationResult>> runs;
  runs.reserve(restarts);
  for (std::size_t r = 0; r < restarts; ++r) {
    SolverOptions o = opts;
    o.seed = opts.seed + r;
    runs.push_back(std::async(restarts > 1 ? std::launch::async : std::launch::deferred,
                              [&source, states, n, o] { return approximate_hmm_once(source, states, n, o); }));
  }
  std::optional<ApproximationResult> best;
  for (auto& run : runs) {
    ApproximationResult result = run.get();
    if (!best || result.model_divergence < best->model_divergence) best.emplace(std::move(result));
  }
  best->restarts = restarts;
  return std::move(*best);
}

struct MarkovApproximation {
  MarkovModel model;
  std::vector<Symbol> null_symbols;  // symbols with q(i) = 0; their rows are uniform
};

// Best Markov approximation in divergence rate: A*_ij = q(ij) / q(i).
// The row normalizer is sum_j q(ij), which equals q(i) for consistent
// sources and keeps rows stochastic for empirical ones.
template <PdfSource Q>
MarkovApproximation markov_approximation(const Q& source) {
  if (source.max_length() < 2) throw LengthOutOfRange("Markov approximation needs words of length 2");
  const std::size_t m = source.alphabet().size();
  const auto big_m = static_cast<Eigen::Index>(m);
  Matrix a(big_m, big_m);
  std::vector<Symbol> null_symbols;
  for (Symbol i = 0; i < m; ++i) {
    double row_mass = 0.0;
    for (Symbol j = 0; j < m; ++j) {
      a(i, j) = source.probability(Word{i, j});
      row_mass += a(i, j);
    }
    if (row_mass > 0.0) {
      a.row(i) /= row_mass;
    } else {
      a.row(i).setConstant(1.0 / static_cast<double>(m));
      null_symbols.push_back(i);
    }
  }
  return {MarkovModel(source.alphabet(), std::move(a)), std::move(null_symbols)};
}

struct MarkovPipelineResult {
  // Closed-form solutions of the three steps with Pi restricted to the
  // block-diagonal Markov structure.
  Matrix pi;          // m^n x m, column j holds q(u~ j) on the rows ending in j
  Matrix gamma;       // m x m^n, row j holds q(jv)/q(j)
  Matrix gamma_next;  // m x m^{n+1}, row j holds q(jw)/q(j)
  Matrix mblock;      // m x m^2, M(y) has only column y nonzero
  MarkovModel model;
  // The same three steps solved by masked multiplicative updates.
  Matrix masked_transition;
  SolveReport law;
  SolveReport realization;
  SolveReport parametrization;
  double disagreement = 0.0;  // max |A*_closed - A*_masked|
  std::vector<Symbol> null_symbols;

  bool agrees(double tol = 1e-8) const { return disagreement <= tol; }
};

// 0/1 mask for Pi_n: row i (flo word ending in symbol j) may only use column j.
inline Matrix markov_pi_mask(std::size_t m, std::size_t n) {
  const std::size_t rows = checked_power(m, n);
  const std::size_t group = rows / m;
  Matrix mask = Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < rows; ++i) mask(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i / group)) = 1.0;
  return mask;
}

// 0/1 mask for [M(y_1)|...|M(y_m)] with m_ij(y) = A_ij delta_jy.
inline Matrix markov_m_mask(std::size_t m) {
  const auto big_m = static_cast<Eigen::Index>(m);
  Matrix mask = Matrix::Zero(big_m, big_m * big_m);
  for (Eigen::Index y = 0; y < big_m; ++y) mask.col(y * big_m + y).setOnes();
  return mask;
}

template <PdfSource Q>
MarkovPipelineResult markov_structured_pipeline(const Q& source, std::size_t n,
                                                const SolverOptions& opts = {}) {
  if (n < 1) throw ValidationError("depth n must be at least 1");
  if (2 * n + 1 > source.max_length())
    throw LengthOutOfRange("source must support words of length 2n+1 = " + std::to_string(2 * n + 1));
  const std::size_t m = source.alphabet().size();
  const auto big_m = static_cast<Eigen::Index>(m);
  const Matrix h = build_block(source, n, n).data;
  const Matrix h_next = build_block(source, n, n + 1).data;
  const auto group = static_cast<Eigen::Index>(checked_power(m, n - 1));

  std::vector<Symbol> null_symbols;
  Matrix pi = Matrix::Zero(h.rows(), big_m);
  Matrix gamma(big_m, h.cols());
  Matrix gamma_next(big_m, h_next.cols());
  for (Eigen::Index j = 0; j < big_m; ++j) {
    // Rows whose flo word ends in symbol j are contiguous.
    const auto rows = h.middleRows(j * group, group);
    pi.col(j).segment(j * group, group) = rows.rowwise().sum();
    const double mass = rows.sum();
    const double mass_next = h_next.middleRows(j * group, group).sum();
    if (mass > 0.0 && mass_next > 0.0) {
      gamma.row(j) = rows.colwise().sum() / mass;
      gamma_next.row(j) = h_next.middleRows(j * group, group).colwise().sum() / mass_next;
    } else {
      gamma.row(j).setConstant(1.0 / static_cast<double>(h.cols()));
      gamma_next.row(j).setConstant(1.0 / static_cast<double>(h_next.cols()));
      null_symbols.push_back(static_cast<Symbol>(j));
    }
  }
  // m_ij(y) = A_ij delta_jy: the masked step-3 optimum is the mass of block y
  // of row i of Gamma*_{n+1}, i.e. q(iy)/q(i).
  const Eigen::Index width = h.cols();
  Matrix a(big_m, big_m);
  Matrix mblock = Matrix::Zero(big_m, big_m * big_m);
  for (Eigen::Index i = 0; i < big_m; ++i) {
    for (Eigen::Index y = 0; y < big_m; ++y) a(i, y) = gamma_next.row(i).segment(y * width, width).sum();
    a.row(i) /= a.row(i).sum();
    for (Eigen::Index y = 0; y < big_m; ++y) mblock(i, y * big_m + y) = a(i, y);
  }
  MarkovModel model(source.alphabet(), a);

  SolverOptions masked = opts;
  masked.structure_mask = markov_pi_mask(m, n);
  TwoFactorResult law = solve_two_factor(h, m, masked);
  masked.structure_mask.reset();
  FixedLeftResult realization = solve_fixed_left(h_next, law.factors.pi, masked);
  masked.structure_mask = markov_m_mask(m);
  LeftStochasticResult param = solve_left_stochastic(realization.gamma, law.factors.gamma, m, masked);
  Matrix masked_a = Matrix::Zero(big_m, big_m);
  for (Eigen::Index y = 0; y < big_m; ++y) masked_a += param.mblock.middleCols(y * big_m, big_m);
  const double disagreement = (masked_a - a).cwiseAbs().maxCoeff();

  return {std::move(pi),          std::move(gamma),         std::move(gamma_next),
          std::move(mblock),      std::move(model),         std::move(masked_a),
          std::move(law.report),  std::move(realization.report), std::move(param.report),
          disagreement,           std::move(null_symbols)};
}

// Divergence rate between stationary Markov chains on the same alphabet:
//   sum_i mu_Q(i) sum_j q(j|i) log(q(j|i) / p(j|i)).
inline Divergence markov_divergence_rate(const MarkovModel& q, const MarkovModel& p) {
  if (q.alphabet().size() != p.alphabet().size())
    throw ShapeMismatch("Markov chains have different alphabet sizes");
  const Matrix& aq = q.transition();
  const Matrix& ap = p.transition();
  const RowVector& mu = q.stationary();
  double total = 0.0;
  for (Eigen::Index i = 0; i < aq.rows(); ++i)
    for (Eigen::Index j = 0; j < aq.cols(); ++j) {
      if (mu(i) * aq(i, j) == 0.0) continue;
      if (ap(i, j) == 0.0) return Divergence::infinity();
      total += mu(i) * aq(i, j) * std::log(aq(i, j) / ap(i, j));
    }
  return Divergence(std::max(total, 0.0));
}

struct EquivalenceReport {
  std::vector<double> per_length;  // entry k: max over |u| = k of |p*(u) - q(u)|
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool passed = true;
};

template <PdfSource Q>
EquivalenceReport check_equivalence(const HmmModel& model, const Q& source, std::size_t max_len,
                                    double tol) {
  if (max_len > source.max_length())
    throw LengthOutOfRange("source does not support length " + std::to_string(max_len));
  if (model.symbols() != source.alphabet().size())
    throw ShapeMismatch("model and source alphabets differ in size");
  EquivalenceReport report;
  report.tolerance = tol;
  for (std::size_t k = 0; k <= max_len; ++k) {
    double worst = 0.0;
    for (const Word& u : enumerate(k, model.symbols(), Order::llo))
      worst = std::max(worst, std::abs(model.probability(u) - source.probability(u)));
    report.per_length.push_back(worst);
    report.max_deviation = std::max(report.max_deviation, worst);
  }
  report.passed = report.max_deviation <= tol;
  return report;
}

}  // namespace hmmapprox
