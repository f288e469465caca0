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

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "hmmapprox/words.hpp"

namespace hmmapprox {
namespace {

// All words of length n, built by recursion rather than radix arithmetic.
std::vector<std::vector<Symbol>> all_words(std::size_t n, std::size_t m) {
  std::vector<std::vector<Symbol>> out{{}};
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<std::vector<Symbol>> next;
    for (const auto& w : out)
      for (Symbol y = 0; y < m; ++y) {
        auto v = w;
        v.push_back(y);
        next.push_back(v);
      }
    out = std::move(next);
  }
  return out;
}

std::vector<std::string> labels(const std::vector<Word>& words, const Alphabet& a) {
  std::vector<std::string> out;
  for (const Word& w : words) out.push_back(format_word(w, a));
  return out;
}

TEST(Alphabet, RejectsDuplicatesAndEmpty) {
  EXPECT_THROW(Alphabet({"a", "a"}), ValidationError);
  EXPECT_THROW(Alphabet(std::vector<std::string>{}), ValidationError);
  EXPECT_NO_THROW(Alphabet({"x"}));
}

TEST(Alphabet, LabelsMapToDigits) {
  const Alphabet a({"H", "T"});
  EXPECT_EQ(a.size(), 2u);
  EXPECT_EQ(a.symbol("T"), 1u);
  EXPECT_EQ(a.label(0), "H");
  EXPECT_THROW(a.symbol("Z"), InvalidWord);
  EXPECT_EQ(Alphabet::of_size(3).labels(), (std::vector<std::string>{"0", "1", "2"}));
}

TEST(FloIndex, BinaryLengthTwo) {
  EXPECT_EQ(flo_index({0, 0}, 2), 0u);
  EXPECT_EQ(flo_index({1, 0}, 2), 1u);
  EXPECT_EQ(flo_index({0, 1}, 2), 2u);
  EXPECT_EQ(flo_index({1, 1}, 2), 3u);
}

TEST(FloIndex, EmptyWordIsZero) {
  EXPECT_EQ(flo_index(Word{}, 2), 0u);
  EXPECT_EQ(llo_index(Word{}, 2), 0u);
}

TEST(FloIndex, PositionInRightToLeftOrder) {
  // Sort all length-3 words by comparing from the last symbol backwards.
  auto words = all_words(3, 2);
  std::sort(words.begin(), words.end(), [](auto a, auto b) {
    std::reverse(a.begin(), a.end());
    std::reverse(b.begin(), b.end());
    return a < b;
  });
  const auto pos = std::find(words.begin(), words.end(), std::vector<Symbol>{1, 1, 0}) - words.begin();
  EXPECT_EQ(flo_index({1, 1, 0}, 2), static_cast<std::size_t>(pos));
  EXPECT_EQ(flo_index({1, 1, 0}, 2), 3u);
}

TEST(LloIndex, BinaryLengthTwo) {
  EXPECT_EQ(llo_index({0, 0}, 2), 0u);
  EXPECT_EQ(llo_index({0, 1}, 2), 1u);
  EXPECT_EQ(llo_index({1, 0}, 2), 2u);
  EXPECT_EQ(llo_index({1, 1}, 2), 3u);
}

TEST(LloIndex, PositionInLexicographicOrder) {
  auto words = all_words(3, 2);
  std::sort(words.begin(), words.end());
  const auto pos = std::find(words.begin(), words.end(), std::vector<Symbol>{1, 1, 0}) - words.begin();
  EXPECT_EQ(llo_index({1, 1, 0}, 2), static_cast<std::size_t>(pos));
  EXPECT_EQ(llo_index({1, 1, 0}, 2), 6u);
}

TEST(Index, RejectsOutOfRangeDigits) {
  EXPECT_THROW(flo_index({0, 2}, 2), InvalidWord);
  EXPECT_THROW(llo_index({3}, 3), InvalidWord);
}

TEST(Enumerate, PrintedBinaryLists) {
  const Alphabet a = Alphabet::of_size(2);
  EXPECT_EQ(labels(enumerate(1, a, Order::flo), a), (std::vector<std::string>{"0", "1"}));
  EXPECT_EQ(labels(enumerate(2, a, Order::flo), a), (std::vector<std::string>{"00", "10", "01", "11"}));
  EXPECT_EQ(labels(enumerate(2, a, Order::llo), a), (std::vector<std::string>{"00", "01", "10", "11"}));
  EXPECT_EQ(labels(enumerate(3, a, Order::flo), a),
            (std::vector<std::string>{"000", "100", "010", "110", "001", "101", "011", "111"}));
}

TEST(Enumerate, LengthZeroIsEmptyWord) {
  const auto words = enumerate(0, 3, Order::flo);
  ASSERT_EQ(words.size(), 1u);
  EXPECT_TRUE(words.front().empty());
}

TEST(Enumerate, MatchesSortedOracle) {
  for (std::size_t m = 1; m <= 4; ++m)
    for (std::size_t n = 0; n <= 4; ++n) {
      auto lex = all_words(n, m);
      std::sort(lex.begin(), lex.end());
      auto rev = lex;
      std::sort(rev.begin(), rev.end(), [](auto a, auto b) {
        std::reverse(a.begin(), a.end());
        std::reverse(b.begin(), b.end());
        return a < b;
      });
      const auto llo = enumerate(n, m, Order::llo);
      const auto flo = enumerate(n, m, Order::flo);
      ASSERT_EQ(llo.size(), lex.size());
      for (std::size_t k = 0; k < lex.size(); ++k) {
        EXPECT_EQ(llo[k].digits(), lex[k]);
        EXPECT_EQ(flo[k].digits(), rev[k]);
      }
    }
}

TEST(IndexProperty, EnumerateThenIndexIsIdentity) {
  for (std::size_t m = 1; m <= 5; ++m)
    for (std::size_t n = 0; n <= 4; ++n)
      for (Order order : {Order::flo, Order::llo}) {
        const auto words = enumerate(n, m, order);
        for (std::size_t k = 0; k < words.size(); ++k) {
          EXPECT_EQ(word_index(words[k], m, order), k);
          EXPECT_EQ(word_at(k, n, m, order), words[k]);
        }
      }
}

TEST(IndexProperty, LastSymbolSelectsContiguousFloBlock) {
  for (std::size_t m = 2; m <= 4; ++m)
    for (std::size_t n = 1; n <= 4; ++n) {
      const std::size_t block = checked_power(m, n - 1);
      for (const Word& w : enumerate(n, m, Order::flo)) EXPECT_EQ(flo_index(w, m) / block, w.back());
    }
}

TEST(IndexProperty, LloConcatenation) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = 1 + rng() % 4;
    const std::size_t lu = rng() % 5, lv = rng() % 5;
    std::vector<Symbol> du(lu), dv(lv);
    for (auto& d : du) d = static_cast<Symbol>(rng() % m);
    for (auto& d : dv) d = static_cast<Symbol>(rng() % m);
    const Word u(du), v(dv);
    EXPECT_EQ(llo_index(u + v, m), llo_index(u, m) * checked_power(m, lv) + llo_index(v, m));
  }
}

TEST(WordText, CompactAndDottedForms) {
  const Alphabet bits = Alphabet::of_size(2);
  EXPECT_EQ(parse_word("0110", bits), (Word{0, 1, 1, 0}));
  EXPECT_EQ(format_word(Word{1, 0}, bits), "10");
  EXPECT_EQ(format_word(Word{}, bits), "");

  const Alphabet weather({"sun", "rain"});
  EXPECT_EQ(format_word(Word{0, 1, 1}, weather), "sun.rain.rain");
  EXPECT_EQ(parse_word("rain.sun", weather), (Word{1, 0}));
  EXPECT_THROW(parse_word("rain.snow", weather), InvalidWord);
}

TEST(CheckedPower, DetectsOverflow) {
  EXPECT_EQ(checked_power(3, 4), 81u);
  EXPECT_EQ(checked_power(7, 0), 1u);
  EXPECT_THROW(checked_power(2, 64), Error);
}

}  // namespace
}  // namespace hmmapprox
