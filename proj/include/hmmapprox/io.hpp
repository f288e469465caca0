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

// File formats.
//
// HMM model (JSON):
//   { "alphabet": ["a", "b"], "N": 2,
//     "M": { "a": [[...], [...]], "b": [[...], [...]] },
//     "pi": [...] }                      // optional; computed from A if absent
//
// Markov model (JSON):
//   { "alphabet": ["a", "b"], "A": [[...], [...]] }
//
// Sample path (text): one symbol per character when every label is a single
// character, whitespace-separated tokens otherwise.
//
// Requires nlohmann/json.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hmmapprox/error.hpp"
#include "hmmapprox/linalg.hpp"
#include "hmmapprox/models.hpp"
#include "hmmapprox/words.hpp"

namespace hmmapprox::io {

using json = nlohmann::json;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << content;
  if (!out) throw ParseError("error writing '" + path + "'");
}

inline json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

namespace detail {

inline std::string label_of(const json& j, const std::string& where) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  throw ParseError(where + ": alphabet labels must be strings or integers");
}

inline Alphabet parse_alphabet(const json& doc) {
  if (!doc.contains("alphabet") || !doc["alphabet"].is_array())
    throw ParseError("missing array \"alphabet\"");
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < doc["alphabet"].size(); ++k)
    labels.push_back(label_of(doc["alphabet"][k], "alphabet[" + std::to_string(k) + "]"));
  try {
    return Alphabet(std::move(labels));
  } catch (const ValidationError& e) {
    throw ParseError(std::string("alphabet: ") + e.what());
  }
}

inline Matrix parse_matrix(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& where) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw ParseError(where + ": expected " + std::to_string(rows) + " rows");
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ParseError(where + " row " + std::to_string(i) + ": expected " + std::to_string(cols) +
                       " entries");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number())
        throw ParseError(where + "[" + std::to_string(i) + "][" + std::to_string(c) + "]: not a number");
      m(i, c) = v.get<double>();
    }
  }
  return m;
}

inline json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

// HMM parameters as read, before validation.
struct RawHmm {
  Alphabet alphabet;
  std::vector<Matrix> emission;
  std::optional<RowVector> pi;
};

inline RawHmm parse_raw_hmm(const json& doc) {
  RawHmm raw;
  raw.alphabet = detail::parse_alphabet(doc);
  if (!doc.contains("N") || !doc["N"].is_number_integer() || doc["N"].get<long long>() < 1)
    throw ParseError("\"N\" must be a positive integer");
  const auto n = static_cast<Eigen::Index>(doc["N"].get<long long>());
  if (!doc.contains("M") || !doc["M"].is_object()) throw ParseError("missing object \"M\"");
  for (const std::string& label : raw.alphabet.labels()) {
    if (!doc["M"].contains(label)) throw ParseError("M: no matrix for symbol '" + label + "'");
    raw.emission.push_back(detail::parse_matrix(doc["M"][label], n, n, "M['" + label + "']"));
  }
  if (doc["M"].size() != raw.alphabet.size()) throw ParseError("M: symbols outside the alphabet");
  if (doc.contains("pi")) {
    const json& p = doc["pi"];
    if (!p.is_array() || static_cast<Eigen::Index>(p.size()) != n)
      throw ParseError("pi: expected " + std::to_string(n) + " entries");
    RowVector pi(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!p[static_cast<std::size_t>(i)].is_number()) throw ParseError("pi[" + std::to_string(i) + "]: not a number");
      pi(i) = p[static_cast<std::size_t>(i)].get<double>();
    }
    raw.pi = std::move(pi);
  }
  return raw;
}

inline HmmModel make_hmm(RawHmm raw) {
  if (raw.pi) return HmmModel(std::move(raw.alphabet), std::move(raw.emission), std::move(*raw.pi));
  return HmmModel::with_stationary(std::move(raw.alphabet), std::move(raw.emission));
}

inline MarkovModel parse_markov(const json& doc) {
  Alphabet alphabet = detail::parse_alphabet(doc);
  const auto m = static_cast<Eigen::Index>(alphabet.size());
  Matrix a = detail::parse_matrix(doc["A"], m, m, "A");
  return MarkovModel(std::move(alphabet), std::move(a));
}

inline bool is_markov_document(const json& doc) { return doc.is_object() && doc.contains("A") && !doc.contains("M"); }

using ModelFile = std::variant<HmmModel, MarkovModel>;

inline ModelFile load_model(const std::string& path) {
  const json doc = parse_json(read_file(path), path);
  if (!doc.is_object()) throw ParseError(path + ": expected a JSON object");
  try {
    if (is_markov_document(doc)) return parse_markov(doc);
    return make_hmm(parse_raw_hmm(doc));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline json to_json(const HmmModel& model) {
  json doc;
  doc["alphabet"] = model.alphabet().labels();
  doc["N"] = model.states();
  json m = json::object();
  for (Symbol y = 0; y < model.symbols(); ++y) m[model.alphabet().label(y)] = detail::matrix_json(model.emission(y));
  doc["M"] = std::move(m);
  json pi = json::array();
  for (Eigen::Index i = 0; i < model.stationary().size(); ++i) pi.push_back(model.stationary()(i));
  doc["pi"] = std::move(pi);
  return doc;
}

inline json to_json(const MarkovModel& model) {
  json doc;
  doc["alphabet"] = model.alphabet().labels();
  doc["A"] = detail::matrix_json(model.transition());
  return doc;
}

// Reads a sample path. Without an alphabet, the labels are the sorted set of
// distinct symbols that occur.
inline std::pair<Alphabet, Word> parse_sample(const std::string& text,
                                              const std::optional<Alphabet>& alphabet) {
  std::vector<std::string> tokens;
  const bool char_mode = alphabet ? alphabet->single_char() : true;
  if (char_mode) {
    for (char c : text)
      if (!std::isspace(static_cast<unsigned char>(c))) tokens.emplace_back(1, c);
  } else {
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
  }
  if (tokens.empty()) throw ParseError("sample is empty");
  Alphabet a = alphabet ? *alphabet
                        : Alphabet([&] {
                            std::set<std::string> distinct(tokens.begin(), tokens.end());
                            return std::vector<std::string>(distinct.begin(), distinct.end());
                          }());
  Word w;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (!a.contains(tokens[t]))
      throw ParseError("sample symbol " + std::to_string(t) + " ('" + tokens[t] + "') is not in the alphabet");
    w.push_back(a.symbol(tokens[t]));
  }
  return {std::move(a), std::move(w)};
}

inline std::string format_sample(const Word& w, const Alphabet& a) {
  std::string out;
  const bool compact = a.single_char();
  for (std::size_t t = 0; t < w.size(); ++t) {
    if (!compact && t > 0) out += ' ';
    out += a.label(w[t]);
  }
  out += '\n';
  return out;
}

}  // namespace hmmapprox::io
