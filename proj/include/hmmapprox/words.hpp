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

// Finite-alphabet words and the two fixed-length enumerations used to index
// Hankel blocks:
//
//   flo  - lexicographic order reading right to left (the first symbol
//          varies fastest); row index of a block.
//   llo  - ordinary lexicographic order reading left to right; column index
//          of a block.
//
// For a word d_1 d_2 ... d_n over {0,...,m-1}:
//   flo_index = sum_i d_i m^(i-1)      (little-endian radix m)
//   llo_index = sum_i d_i m^(n-i)      (big-endian radix m)

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hmmapprox/error.hpp"

namespace hmmapprox {

using Symbol = std::uint32_t;

enum class Order { flo, llo };

// m^n, throwing when the result does not fit in std::size_t.
inline std::size_t checked_power(std::size_t m, std::size_t n) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (m != 0 && r > std::numeric_limits<std::size_t>::max() / m)
      throw LengthOutOfRange("m^n overflows for m=" + std::to_string(m) +
                             ", n=" + std::to_string(n));
    r *= m;
  }
  return r;
}

// Ordered set of distinct symbol labels. Symbol k is the label at position k.
class Alphabet {
 public:
  Alphabet() = default;

  explicit Alphabet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) throw ValidationError("alphabet must contain at least one symbol");
    for (std::size_t k = 0; k < labels_.size(); ++k) {
      if (labels_[k].empty()) throw ValidationError("alphabet labels must be non-empty");
      if (!index_.emplace(labels_[k], static_cast<Symbol>(k)).second)
        throw ValidationError("duplicate alphabet label '" + labels_[k] + "'");
    }
  }

  // Labels "0", "1", ..., "m-1".
  static Alphabet of_size(std::size_t m) {
    std::vector<std::string> labels;
    labels.reserve(m);
    for (std::size_t k = 0; k < m; ++k) labels.push_back(std::to_string(k));
    return Alphabet(std::move(labels));
  }

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label(Symbol s) const { return labels_.at(s); }

  Symbol symbol(std::string_view label) const {
    auto it = index_.find(std::string(label));
    if (it == index_.end()) throw InvalidWord("unknown symbol label '" + std::string(label) + "'");
    return it->second;
  }

  bool contains(std::string_view label) const { return index_.count(std::string(label)) != 0; }

  // True when every label is a single character, so words can be written
  // without separators.
  bool single_char() const {
    return std::all_of(labels_.begin(), labels_.end(),
                       [](const std::string& l) { return l.size() == 1; });
  }

  friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.labels_ == b.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, Symbol> index_;
};

// A finite string of symbol digits. The empty word is the default.
class Word {
 public:
  Word() = default;
  Word(std::initializer_list<Symbol> digits) : digits_(digits) {}
  explicit Word(std::vector<Symbol> digits) : digits_(std::move(digits)) {}

  std::size_t size() const noexcept { return digits_.size(); }
  bool empty() const noexcept { return digits_.empty(); }
  Symbol operator[](std::size_t i) const { return digits_[i]; }
  Symbol front() const { return digits_.front(); }
  Symbol back() const { return digits_.back(); }
  auto begin() const noexcept { return digits_.begin(); }
  auto end() const noexcept { return digits_.end(); }
  const std::vector<Symbol>& digits() const noexcept { return digits_; }

  void push_back(Symbol s) { digits_.push_back(s); }

  // Concatenation uv.
  friend Word operator+(const Word& u, const Word& v) {
    std::vector<Symbol> d;
    d.reserve(u.size() + v.size());
    d.insert(d.end(), u.digits_.begin(), u.digits_.end());
    d.insert(d.end(), v.digits_.begin(), v.digits_.end());
    return Word(std::move(d));
  }

  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;

 private:
  std::vector<Symbol> digits_;
};

inline void check_word(const Word& w, std::size_t m) {
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] >= m)
      throw InvalidWord("digit " + std::to_string(w[i]) + " at position " + std::to_string(i) +
                        " is outside an alphabet of size " + std::to_string(m));
}

inline std::size_t flo_index(const Word& w, std::size_t m) {
  check_word(w, m);
  std::size_t index = 0;
  for (std::size_t i = w.size(); i-- > 0;) index = index * m + w[i];
  return index;
}

inline std::size_t llo_index(const Word& w, std::size_t m) {
  check_word(w, m);
  std::size_t index = 0;
  for (Symbol d : w) index = index * m + d;
  return index;
}

inline std::size_t flo_index(const Word& w, const Alphabet& a) { return flo_index(w, a.size()); }
inline std::size_t llo_index(const Word& w, const Alphabet& a) { return llo_index(w, a.size()); }

inline std::size_t word_index(const Word& w, std::size_t m, Order order) {
  return order == Order::flo ? flo_index(w, m) : llo_index(w, m);
}

// Inverse of flo_index / llo_index on words of the given length.
inline Word word_at(std::size_t index, std::size_t length, std::size_t m, Order order) {
  if (index >= checked_power(m, length))
    throw LengthOutOfRange("index " + std::to_string(index) + " out of range for length " +
                           std::to_string(length));
  std::vector<Symbol> d(length);
  for (std::size_t i = 0; i < length; ++i) {
    Symbol digit = static_cast<Symbol>(index % m);
    index /= m;
    if (order == Order::flo)
      d[i] = digit;
    else
      d[length - 1 - i] = digit;
  }
  return Word(std::move(d));
}

// All m^n words of length n in the requested order.
inline std::vector<Word> enumerate(std::size_t n, std::size_t m, Order order) {
  const std::size_t count = checked_power(m, n);
  std::vector<Word> words;
  words.reserve(count);
  for (std::size_t k = 0; k < count; ++k) words.push_back(word_at(k, n, m, order));
  return words;
}

inline std::vector<Word> enumerate(std::size_t n, const Alphabet& a, Order order) {
  return enumerate(n, a.size(), order);
}

// Words are written as concatenated labels when all labels are single
// characters, '.'-separated otherwise. The empty word is written "".
inline std::string format_word(const Word& w, const Alphabet& a) {
  const bool compact = a.single_char();
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!compact && i > 0) out += '.';
    out += a.label(w[i]);
  }
  return out;
}

inline Word parse_word(std::string_view text, const Alphabet& a) {
  Word w;
  if (text.empty()) return w;
  if (a.single_char()) {
    for (char c : text) w.push_back(a.symbol(std::string_view(&c, 1)));
    return w;
  }
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = text.find('.', start);
    w.push_back(a.symbol(text.substr(start, dot == std::string_view::npos ? dot : dot - start)));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return w;
}

}  // namespace hmmapprox
