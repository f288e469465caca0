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

// Hankel blocks of string probabilities and the informational divergence.
//
// H_KL is the m^K x m^L matrix with entry (i, j) = p(u_i v_j), where u_i is
// the i-th length-K word in flo order and v_j the j-th length-L word in llo
// order. For an HMM it factors as H_KL = Pi_K Gamma_L with rows pi M(u_i)
// and columns M(v_j) e.

#include <cmath>
#include <compare>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "hmmapprox/error.hpp"
#include "hmmapprox/linalg.hpp"
#include "hmmapprox/models.hpp"
#include "hmmapprox/words.hpp"

namespace hmmapprox {

struct HankelBlock {
  std::size_t row_length = 0;  // K
  std::size_t col_length = 0;  // L
  std::size_t symbols = 0;     // m
  Matrix data;
};

template <PdfSource S>
HankelBlock build_block(const S& source, std::size_t K, std::size_t L) {
  if (K + L > source.max_length())
    throw LengthOutOfRange("block (" + std::to_string(K) + "," + std::to_string(L) +
                           ") needs words of length " + std::to_string(K + L) +
                           ", source supports " + std::to_string(source.max_length()));
  const std::size_t m = source.alphabet().size();
  const std::vector<Word> rows = enumerate(K, m, Order::flo);
  const std::vector<Word> cols = enumerate(L, m, Order::llo);
  HankelBlock block{K, L, m, Matrix(static_cast<Eigen::Index>(rows.size()),
                                    static_cast<Eigen::Index>(cols.size()))};
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      block.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          source.probability(rows[i] + cols[j]);
  return block;
}

struct HmmBlockFactors {
  Matrix pi_rows;     // Pi_K, m^K x N, rows pi M(u_i) in flo order
  Matrix gamma_cols;  // Gamma_L, N x m^L, columns M(v_j) e in llo order
};

inline Matrix hmm_pi_factor(const HmmModel& model, std::size_t K) {
  const std::vector<Word> rows = enumerate(K, model.symbols(), Order::flo);
  Matrix pi_k(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(model.states()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    pi_k.row(static_cast<Eigen::Index>(i)) = model.forward(rows[i]);
  return pi_k;
}

inline Matrix hmm_gamma_factor(const HmmModel& model, std::size_t L) {
  const std::vector<Word> cols = enumerate(L, model.symbols(), Order::llo);
  Matrix gamma_l(static_cast<Eigen::Index>(model.states()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    gamma_l.col(static_cast<Eigen::Index>(j)) = model.backward(cols[j]);
  return gamma_l;
}

inline HmmBlockFactors hmm_block_factors(const HmmModel& model, std::size_t K, std::size_t L) {
  return {hmm_pi_factor(model, K), hmm_gamma_factor(model, L)};
}

// Gamma_{L+1} = [M(y_1) Gamma_L | ... | M(y_m) Gamma_L]; the first symbol of
// an llo word selects a contiguous block of m^L columns.
inline Matrix extend_gamma(const std::vector<Matrix>& emission, const Matrix& gamma) {
  const Eigen::Index width = gamma.cols();
  Matrix next(gamma.rows(), width * static_cast<Eigen::Index>(emission.size()));
  for (std::size_t y = 0; y < emission.size(); ++y)
    next.middleCols(static_cast<Eigen::Index>(y) * width, width) = emission[y] * gamma;
  return next;
}

// Nonnegative extended real. Infinity is a flag, not a floating-point value.
class Divergence {
 public:
  constexpr Divergence() = default;
  constexpr explicit Divergence(double value) : value_(value) {}

  static constexpr Divergence infinity() {
    Divergence d;
    d.infinite_ = true;
    return d;
  }

  constexpr bool is_infinite() const noexcept { return infinite_; }
  constexpr bool is_finite() const noexcept { return !infinite_; }

  // Finite value; throws for +inf.
  double value() const {
    if (infinite_) throw Error("divergence is infinite");
    return value_;
  }

  // Finite value, or IEEE infinity for printing and comparisons.
  double as_double() const noexcept {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  friend Divergence operator*(double s, Divergence d) {
    return d.infinite_ ? d : Divergence(s * d.value_);
  }

  friend bool operator==(const Divergence& a, const Divergence& b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }
  friend std::partial_ordering operator<=>(const Divergence& a, const Divergence& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ <=> b.infinite_;
    return a.value_ <=> b.value_;
  }

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

inline std::ostream& operator<<(std::ostream& os, const Divergence& d) {
  if (d.is_infinite()) return os << "inf";
  return os << d.value();
}

// Elementwise D(q||p) = q log(q/p) - q + p with 0 log 0 = 0 and q/0 = inf
// for q > 0.
inline Divergence scalar_divergence(double q, double p) {
  if (q == 0.0) return Divergence(p);
  if (p == 0.0) return Divergence::infinity();
  return Divergence(q * std::log(q / p) - q + p);
}

// D(M||N) = sum_ij (M_ij log(M_ij / N_ij) - M_ij + N_ij).
template <class A, class B>
Divergence i_divergence(const Eigen::MatrixBase<A>& m, const Eigen::MatrixBase<B>& n) {
  if (m.rows() != n.rows() || m.cols() != n.cols())
    throw ShapeMismatch("i_divergence: " + std::to_string(m.rows()) + "x" +
                        std::to_string(m.cols()) + " vs " + std::to_string(n.rows()) + "x" +
                        std::to_string(n.cols()));
  double total = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double q = m(i, j);
      const double p = n(i, j);
      if (q < 0.0 || p < 0.0) throw ValidationError("i_divergence: negative entry");
      if (q == 0.0) {
        total += p;
      } else if (p == 0.0) {
        return Divergence::infinity();
      } else {
        total += q * std::log(q / p) - q + p;
      }
    }
  // Rounding can push an exact zero slightly negative.
  return Divergence(total < 0.0 ? 0.0 : total);
}

// (1/2n) D(H_nn^Q || H_nn^P), an estimate of the divergence rate D(Q||P).
template <PdfSource Q, PdfSource P>
Divergence divergence_rate_estimate(const Q& q, const P& p, std::size_t n) {
  if (n == 0) throw LengthOutOfRange("divergence rate estimate needs n >= 1");
  if (q.alphabet().size() != p.alphabet().size())
    throw ShapeMismatch("sources have different alphabet sizes");
  const HankelBlock hq = build_block(q, n, n);
  const HankelBlock hp = build_block(p, n, n);
  return (1.0 / (2.0 * static_cast<double>(n))) * i_divergence(hq.data, hp.data);
}

// Header: a "word" corner cell, then llo column words; one row per flo word.
inline void write_block_csv(std::ostream& os, const HankelBlock& block, const Alphabet& alphabet) {
  const std::vector<Word> rows = enumerate(block.row_length, alphabet, Order::flo);
  const std::vector<Word> cols = enumerate(block.col_length, alphabet, Order::llo);
  const auto old_precision = os.precision(17);
  os << "word";
  for (const Word& v : cols) os << ',' << format_word(v, alphabet);
  os << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    os << format_word(rows[i], alphabet);
    for (std::size_t j = 0; j < cols.size(); ++j)
      os << ',' << block.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    os << '\n';
  }
  os.precision(old_precision);
}

}  // namespace hmmapprox
