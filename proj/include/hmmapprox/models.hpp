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

// Stationary finite-alphabet sources answering word probabilities p(w):
//
//   HmmModel     - p(w) = pi M(y_1) ... M(y_n) e with substochastic M(y)
//                  summing to a row-stochastic A and pi = pi A.
//   MarkovModel  - a Markov chain on the alphabet itself.
//   EmpiricalPdf - sliding-window frequencies of an observed sequence.
//
// All three satisfy the PdfSource concept used by the Hankel and pipeline
// code.

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hmmapprox/error.hpp"
#include "hmmapprox/linalg.hpp"
#include "hmmapprox/words.hpp"

namespace hmmapprox {

inline constexpr std::size_t kUnboundedLength = std::numeric_limits<std::size_t>::max();

template <class S>
concept PdfSource = requires(const S& s, const Word& w) {
  { s.alphabet() } -> std::convertible_to<const Alphabet&>;
  { s.max_length() } -> std::convertible_to<std::size_t>;
  { s.probability(w) } -> std::convertible_to<double>;
};

// Residuals of the HMM parameter invariants, computed without throwing so
// that invalid files can be reported in full.
struct HmmDiagnostics {
  double entry_min = 0.0;             // smallest entry over all M(y)
  double entry_max = 0.0;             // largest entry over all M(y)
  double stochasticity = 0.0;         // max_i |(A e)_i - 1|
  Eigen::Index worst_row = 0;
  double pi_min = 0.0;
  double pi_sum = 0.0;                // |pi e - 1|
  double stationarity = 0.0;          // ||pi A - pi||_inf
  // (state, symbol) pairs with sum_j m_ij(y) = 0. Empty means every finite
  // string has positive probability.
  std::vector<std::pair<std::size_t, Symbol>> positivity_failures;

  bool positive() const { return positivity_failures.empty(); }
  bool valid(double tol) const {
    return entry_min >= 0.0 && entry_max <= 1.0 + tol && stochasticity <= tol && pi_min >= 0.0 &&
           pi_sum <= tol && stationarity <= tol;
  }
};

inline HmmDiagnostics diagnose_hmm(const std::vector<Matrix>& emission, const RowVector& pi) {
  HmmDiagnostics d;
  if (emission.empty()) throw ValidationError("HMM needs at least one symbol matrix");
  const Eigen::Index n = emission.front().rows();
  Matrix a = Matrix::Zero(n, n);
  d.entry_min = std::numeric_limits<double>::infinity();
  d.entry_max = -std::numeric_limits<double>::infinity();
  for (std::size_t y = 0; y < emission.size(); ++y) {
    const Matrix& m = emission[y];
    if (m.rows() != n || m.cols() != n)
      throw ShapeMismatch("M(" + std::to_string(y) + ") is " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()) + ", expected " + std::to_string(n) + "x" +
                          std::to_string(n));
    d.entry_min = std::min(d.entry_min, m.minCoeff());
    d.entry_max = std::max(d.entry_max, m.maxCoeff());
    a += m;
    for (Eigen::Index i = 0; i < n; ++i)
      if (!(m.row(i).sum() > 0.0)) d.positivity_failures.emplace_back(i, static_cast<Symbol>(y));
  }
  if (pi.size() != n)
    throw ShapeMismatch("pi has length " + std::to_string(pi.size()) + ", expected " +
                        std::to_string(n));
  d.stochasticity = stochasticity_residual(a, &d.worst_row);
  d.pi_min = pi.minCoeff();
  d.pi_sum = std::abs(pi.sum() - 1.0);
  d.stationarity = (pi * a - pi).cwiseAbs().maxCoeff();
  std::sort(d.positivity_failures.begin(), d.positivity_failures.end());
  return d;
}

class HmmModel {
 public:
  // Validates the parameters against `tol`; throws ValidationError.
  HmmModel(Alphabet alphabet, std::vector<Matrix> emission, RowVector pi,
           double tol = kInputTolerance)
      : alphabet_(std::move(alphabet)), emission_(std::move(emission)), pi_(std::move(pi)) {
    if (emission_.size() != alphabet_.size())
      throw ShapeMismatch("got " + std::to_string(emission_.size()) + " symbol matrices for an " +
                          "alphabet of size " + std::to_string(alphabet_.size()));
    const HmmDiagnostics d = diagnose_hmm(emission_, pi_);
    if (d.entry_min < 0.0 || d.entry_max > 1.0 + tol)
      throw ValidationError("symbol matrix entries must lie in [0,1]");
    if (d.stochasticity > tol)
      throw ValidationError("transition matrix row " + std::to_string(d.worst_row) +
                            " does not sum to 1 (residual " + std::to_string(d.stochasticity) + ")");
    if (d.pi_min < 0.0 || d.pi_sum > tol) throw ValidationError("pi is not a probability vector");
    if (d.stationarity > tol)
      throw ValidationError("pi is not invariant for A (residual " +
                            std::to_string(d.stationarity) + ")");
    transition_ = Matrix::Zero(states(), states());
    for (const Matrix& m : emission_) transition_ += m;
  }

  // pi computed as the invariant vector of A = sum_y M(y).
  static HmmModel with_stationary(Alphabet alphabet, std::vector<Matrix> emission,
                                  double tol = kInputTolerance) {
    if (emission.empty()) throw ValidationError("HMM needs at least one symbol matrix");
    Matrix a = Matrix::Zero(emission.front().rows(), emission.front().cols());
    for (const Matrix& m : emission) {
      if (m.rows() != a.rows() || m.cols() != a.cols())
        throw ShapeMismatch("symbol matrices differ in shape");
      a += m;
    }
    require_stochastic(a, tol, "transition matrix");
    RowVector pi = stationary_vector(a);
    return HmmModel(std::move(alphabet), std::move(emission), std::move(pi), tol);
  }

  const Alphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t symbols() const noexcept { return alphabet_.size(); }
  std::size_t states() const noexcept { return static_cast<std::size_t>(pi_.size()); }
  const Matrix& emission(Symbol y) const { return emission_.at(y); }
  const std::vector<Matrix>& emissions() const noexcept { return emission_; }
  const Matrix& transition() const noexcept { return transition_; }
  const RowVector& stationary() const noexcept { return pi_; }
  std::size_t max_length() const noexcept { return kUnboundedLength; }

  // M(w) = M(y_1) ... M(y_n); identity for the empty word.
  Matrix word_matrix(const Word& w) const {
    check_word(w, symbols());
    Matrix m = Matrix::Identity(states(), states());
    for (Symbol y : w) m = m * emission_[y];
    return m;
  }

  // pi M(w), the row of Pi_K belonging to w.
  RowVector forward(const Word& w) const {
    check_word(w, symbols());
    RowVector row = pi_;
    for (Symbol y : w) row = row * emission_[y];
    return row;
  }

  // M(w) e, the column of Gamma_L belonging to w.
  Vector backward(const Word& w) const {
    check_word(w, symbols());
    Vector col = Vector::Ones(states());
    for (std::size_t i = w.size(); i-- > 0;) col = emission_[w[i]] * col;
    return col;
  }

  double probability(const Word& w) const { return forward(w).sum(); }

  HmmDiagnostics diagnostics() const { return diagnose_hmm(emission_, pi_); }

  // Every finite string has positive probability when sum_j m_ij(y) > 0
  // for all states i and symbols y.
  bool all_words_positive() const { return diagnostics().positive(); }

 private:
  Alphabet alphabet_;
  std::vector<Matrix> emission_;
  RowVector pi_;
  Matrix transition_;
};

inline double word_probability(const HmmModel& model, const Word& w) { return model.probability(w); }

// Markov chain whose states are the alphabet symbols.
class MarkovModel {
 public:
  MarkovModel(Alphabet alphabet, Matrix transition, double tol = kInputTolerance)
      : alphabet_(std::move(alphabet)), transition_(std::move(transition)) {
    if (static_cast<std::size_t>(transition_.rows()) != alphabet_.size())
      throw ShapeMismatch("transition matrix size does not match the alphabet");
    require_stochastic(transition_, tol, "transition matrix");
    const StationaryResult s = stationary_distribution(transition_);
    mu_ = s.pi;
    unique_ = s.unique;
  }

  const Alphabet& alphabet() const noexcept { return alphabet_; }
  const Matrix& transition() const noexcept { return transition_; }
  const RowVector& stationary() const noexcept { return mu_; }
  bool unique_stationary() const noexcept { return unique_; }
  std::size_t max_length() const noexcept { return kUnboundedLength; }

  // mu(y_1) A(y_1,y_2) ... A(y_{n-1},y_n).
  double probability(const Word& w) const {
    check_word(w, alphabet_.size());
    if (w.empty()) return 1.0;
    double p = mu_(w[0]);
    for (std::size_t i = 1; i < w.size(); ++i) p *= transition_(w[i - 1], w[i]);
    return p;
  }

 private:
  Alphabet alphabet_;
  Matrix transition_;
  RowVector mu_;
  bool unique_ = true;
};

// States are the symbols; M(y) keeps only column y of A.
inline HmmModel markov_to_hmm(const MarkovModel& mk) {
  const std::size_t m = mk.alphabet().size();
  const auto n = static_cast<Eigen::Index>(m);
  std::vector<Matrix> emission(m, Matrix::Zero(n, n));
  for (std::size_t y = 0; y < m; ++y)
    emission[y].col(static_cast<Eigen::Index>(y)) = mk.transition().col(static_cast<Eigen::Index>(y));
  return HmmModel(mk.alphabet(), std::move(emission), mk.stationary(), kInternalTolerance);
}

// Draws a length-T output path: X_0 ~ pi, then (Y_{t+1}, X_{t+1}) jointly
// from row X_t of [M(y_1) | ... | M(y_m)].
inline Word sample_path(const HmmModel& model, std::size_t length, std::uint64_t seed) {
  const std::size_t n = model.states();
  const std::size_t m = model.symbols();
  // cumulative[i] runs over the outcomes (y, j) in the order y-major.
  std::vector<std::vector<double>> cumulative(n, std::vector<double>(m * n));
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t y = 0; y < m; ++y)
      for (std::size_t j = 0; j < n; ++j) {
        acc += model.emission(static_cast<Symbol>(y))(static_cast<Eigen::Index>(i),
                                                      static_cast<Eigen::Index>(j));
        cumulative[i][y * n + j] = acc;
      }
  }
  std::vector<double> initial(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) initial[i] = acc += model.stationary()(static_cast<Eigen::Index>(i));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  // First index whose cumulative value exceeds u * total; zero-mass outcomes
  // are never selected.
  auto draw = [&](const std::vector<double>& cum) {
    const double u = uniform(rng) * cum.back();
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    if (it == cum.end()) it = std::lower_bound(cum.begin(), cum.end(), cum.back());
    return static_cast<std::size_t>(it - cum.begin());
  };

  std::size_t state = draw(initial);
  std::vector<Symbol> path;
  path.reserve(length);
  for (std::size_t t = 0; t < length; ++t) {
    const std::size_t outcome = draw(cumulative[state]);
    path.push_back(static_cast<Symbol>(outcome / n));
    state = outcome % n;
  }
  return Word(std::move(path));
}

// Random model with all entries drawn uniformly from [lo, 1) and rows
// normalized, so every transition and emission has positive probability.
inline HmmModel random_hmm(std::size_t states, std::size_t symbols, std::uint64_t seed,
                           double lo = 0.05) {
  if (states < 1 || symbols < 1) throw ValidationError("random_hmm needs N >= 1 and m >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(lo, 1.0);
  const auto n = static_cast<Eigen::Index>(states);
  std::vector<Matrix> emission(symbols, Matrix(n, n));
  for (Matrix& m : emission)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) m(i, j) = uniform(rng);
  for (Eigen::Index i = 0; i < n; ++i) {
    double total = 0.0;
    for (const Matrix& m : emission) total += m.row(i).sum();
    for (Matrix& m : emission) m.row(i) /= total;
  }
  return HmmModel::with_stationary(Alphabet::of_size(symbols), std::move(emission), kInternalTolerance);
}

inline MarkovModel random_markov(std::size_t symbols, std::uint64_t seed, double lo = 0.05) {
  if (symbols < 1) throw ValidationError("random_markov needs m >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(lo, 1.0);
  const auto m = static_cast<Eigen::Index>(symbols);
  Matrix a(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) a(i, j) = uniform(rng);
    a.row(i) /= a.row(i).sum();
  }
  return MarkovModel(Alphabet::of_size(symbols), std::move(a), kInternalTolerance);
}

// Sliding-window word frequencies of one observed sequence, for every word
// length up to k_max. Each length is counted independently, so
// p(w) = #{windows equal to w} / (T - |w| + 1).
class EmpiricalPdf {
 public:
  EmpiricalPdf(Alphabet alphabet, const Word& sequence, std::size_t k_max)
      : alphabet_(std::move(alphabet)), length_(sequence.size()), k_max_(k_max) {
    const std::size_t m = alphabet_.size();
    check_word(sequence, m);
    if (k_max_ < 1 || sequence.size() < k_max_)
      throw LengthOutOfRange("empirical pdf needs 1 <= k_max <= sequence length");
    if (checked_power(m, k_max_) > (std::size_t{1} << 28))
      throw LengthOutOfRange("m^k_max is too large for dense window counts");
    counts_.resize(k_max_ + 1);
    counts_[0] = {static_cast<std::uint64_t>(length_ + 1)};
    for (std::size_t k = 1; k <= k_max_; ++k) {
      const std::size_t words = checked_power(m, k);
      std::vector<std::uint64_t>& c = counts_[k];
      c.assign(words, 0);
      // Rolling big-endian (llo) index of the current window.
      std::size_t index = 0;
      for (std::size_t t = 0; t < length_; ++t) {
        index = (index * m + sequence[t]) % words;
        if (t + 1 >= k) ++c[index];
      }
    }
  }

  const Alphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t max_length() const noexcept { return k_max_; }
  std::size_t sample_length() const noexcept { return length_; }

  std::uint64_t count(const Word& w) const {
    if (w.size() > k_max_)
      throw LengthOutOfRange("word of length " + std::to_string(w.size()) +
                             " exceeds k_max = " + std::to_string(k_max_));
    return counts_[w.size()][llo_index(w, alphabet_.size())];
  }

  double probability(const Word& w) const {
    if (w.empty()) return 1.0;
    return static_cast<double>(count(w)) / static_cast<double>(length_ - w.size() + 1);
  }

 private:
  Alphabet alphabet_;
  std::size_t length_;
  std::size_t k_max_;
  std::vector<std::vector<std::uint64_t>> counts_;  // indexed by length, then llo index
};

inline EmpiricalPdf empirical_pdf(const Alphabet& alphabet, const Word& sequence, std::size_t k_max) {
  return EmpiricalPdf(alphabet, sequence, k_max);
}

// max over |u| <= max_len - 1 of |sum_y p(uy) - p(u)|. Zero (to rounding) for
// exact sources; O(k/T) for empirical ones.
template <PdfSource S>
double consistency_deviation(const S& source, std::size_t max_len) {
  const std::size_t m = source.alphabet().size();
  max_len = std::min(max_len, source.max_length());
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 <= max_len; ++k)
    for (const Word& u : enumerate(k, m, Order::llo)) {
      double total = 0.0;
      for (Symbol y = 0; y < m; ++y) {
        Word uy = u;
        uy.push_back(y);
        total += source.probability(uy);
      }
      worst = std::max(worst, std::abs(total - source.probability(u)));
    }
  return worst;
}

}  // namespace hmmapprox
