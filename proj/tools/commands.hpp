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

// Subcommands of the hmmapprox tool. `run` takes the argument list without
// the program name so tests can drive it in-process.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hmmapprox/hmmapprox.hpp"
#include "hmmapprox/io.hpp"

namespace hmmapprox::cli {

using json = nlohmann::json;

enum ExitCode : int {
  kOk = 0,
  kValidation = 2,
  kNotConverged = 3,
  kIo = 4,
};

using Source = std::variant<HmmModel, MarkovModel, EmpiricalPdf>;

struct SourceSpec {
  std::string model;
  std::string sample;
  std::size_t kmax = 0;
  std::string alphabet;  // comma-separated labels for sample files

  json to_json() const {
    json j;
    if (!model.empty()) j["model"] = model;
    if (!sample.empty()) {
      j["sample"] = sample;
      j["kmax"] = kmax;
      if (!alphabet.empty()) j["alphabet"] = alphabet;
    }
    return j;
  }
};

inline std::optional<Alphabet> parse_alphabet_list(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::vector<std::string> labels;
  std::stringstream in(text);
  std::string label;
  while (std::getline(in, label, ',')) labels.push_back(label);
  return Alphabet(std::move(labels));
}

inline Source load_source(const SourceSpec& spec) {
  if (spec.model.empty() == spec.sample.empty())
    throw ValidationError("give exactly one of a model file or a sample file");
  if (!spec.model.empty()) {
    io::ModelFile file = io::load_model(spec.model);
    if (auto* hmm = std::get_if<HmmModel>(&file)) return std::move(*hmm);
    return std::get<MarkovModel>(std::move(file));
  }
  if (spec.kmax < 1) throw ValidationError("--kmax is required with a sample file");
  auto [alphabet, path] = io::parse_sample(io::read_file(spec.sample), parse_alphabet_list(spec.alphabet));
  return EmpiricalPdf(std::move(alphabet), path, spec.kmax);
}

inline std::string format_double(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

inline std::string format_divergence(const Divergence& d) {
  return d.is_infinite() ? "inf" : format_double(d.value());
}

inline json divergence_json(const Divergence& d) {
  return d.is_infinite() ? json("inf") : json(d.value());
}

inline json report_json(const std::string& name, const SolveReport& r) {
  return {{"step", name},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"final_objective", r.final_objective()},
          {"final_residual", r.final_residual()},
          {"accepted_extrapolations", r.accepted_extrapolations},
          {"overparametrized", r.overparametrized},
          {"reset_rows", r.reset_rows}};
}

inline void write_outputs(const std::string& out, const std::string& content, const json& config) {
  io::write_file(out, content);
  io::write_file(out + ".config.json", config.dump(2) + "\n");
}

inline void add_source_options(CLI::App& cmd, SourceSpec& spec, const std::string& prefix = "") {
  cmd.add_option("--" + prefix + "model", spec.model, "Model file (HMM or Markov JSON)");
  cmd.add_option("--" + prefix + "sample", spec.sample, "Sample path file");
  cmd.add_option("--" + prefix + "kmax", spec.kmax, "Longest word counted in the sample");
  cmd.add_option("--" + prefix + "alphabet", spec.alphabet, "Comma-separated labels of the sample alphabet");
}

inline int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  const io::json doc = io::parse_json(io::read_file(path), path);
  if (!doc.is_object()) throw ParseError(path + ": expected a JSON object");
  out << std::setprecision(17);
  if (io::is_markov_document(doc)) {
    Alphabet alphabet = io::detail::parse_alphabet(doc);
    const auto m = static_cast<Eigen::Index>(alphabet.size());
    const Matrix a = io::detail::parse_matrix(doc["A"], m, m, "A");
    Eigen::Index row = 0;
    const double r = stochasticity_residual(a, &row);
    out << "markov model, " << m << " symbols\n";
    out << "stochasticity residual: " << r << '\n';
    if (a.minCoeff() < 0.0 || r > kInputTolerance) {
      err << "invalid: " << (a.minCoeff() < 0.0 ? "negative transition entries" : "row " + std::to_string(row) + " of A sums to " + format_double(a.row(row).sum())) << '\n';
      return kValidation;
    }
    const MarkovModel model(std::move(alphabet), a);
    const RowVector& mu = model.stationary();
    out << "stationarity residual: " << (mu * a - mu).cwiseAbs().maxCoeff() << '\n';
    if (!model.unique_stationary()) out << "note: invariant distribution is not unique\n";
    const bool positive = (a.array() > 0.0).all();
    if (!positive) err << "warning: positivity condition fails (some transitions have zero probability)\n";
    out << "positivity: " << (positive ? "all finite strings have positive probability" : "fails") << '\n';
    out << "valid\n";
    return kOk;
  }

  io::RawHmm raw = io::parse_raw_hmm(doc);
  const auto n = raw.emission.front().rows();
  Matrix a = Matrix::Zero(n, n);
  for (const Matrix& m : raw.emission) a += m;
  Eigen::Index row = 0;
  const double stoch = stochasticity_residual(a, &row);
  RowVector pi;
  if (raw.pi) {
    pi = *raw.pi;
  } else if (stoch <= kInputTolerance && a.minCoeff() >= 0.0) {
    pi = stationary_vector(a);
    out << "pi computed from A\n";
  } else {
    pi = RowVector::Constant(n, 1.0 / static_cast<double>(n));
  }
  const HmmDiagnostics d = diagnose_hmm(raw.emission, pi);
  out << "hmm model, " << n << " states, " << raw.alphabet.size() << " symbols\n";
  out << "entry range: [" << d.entry_min << ", " << d.entry_max << "]\n";
  out << "stochasticity residual: " << d.stochasticity << " (row " << d.worst_row << ")\n";
  out << "pi sum residual: " << d.pi_sum << '\n';
  out << "stationarity residual: " << d.stationarity << '\n';

  std::vector<std::string> problems;
  if (d.entry_min < 0.0 || d.entry_max > 1.0 + kInputTolerance) problems.push_back("symbol matrix entries outside [0,1]");
  if (d.stochasticity > kInputTolerance)
    problems.push_back("row " + std::to_string(d.worst_row) + " of A sums to " + format_double(a.row(d.worst_row).sum()));
  if (d.pi_min < 0.0 || d.pi_sum > kInputTolerance) problems.push_back("pi is not a probability vector");
  if (d.stochasticity <= kInputTolerance && d.stationarity > kInputTolerance) problems.push_back("pi is not invariant for A");
  if (!problems.empty()) {
    for (const std::string& p : problems) err << "invalid: " << p << '\n';
    return kValidation;
  }
  if (!d.positive()) {
    err << "warning: positivity condition fails for";
    for (const auto& [state, symbol] : d.positivity_failures) err << " (state " << state << ", symbol " << raw.alphabet.label(symbol) << ")";
    err << '\n';
  }
  out << "positivity: " << (d.positive() ? "all finite strings have positive probability" : "fails") << '\n';
  out << "valid\n";
  return kOk;
}

template <class F>
decltype(auto) visit_source(const Source& s, F&& f) {
  return std::visit(std::forward<F>(f), s);
}

inline int cmd_hankel(const SourceSpec& spec, std::size_t rows, std::size_t cols, const std::string& out_path,
                      std::ostream& out) {
  const Source source = load_source(spec);
  const HankelBlock block = visit_source(source, [&](const auto& s) { return build_block(s, rows, cols); });
  const Alphabet& alphabet = visit_source(source, [](const auto& s) -> const Alphabet& { return s.alphabet(); });
  std::ostringstream csv;
  write_block_csv(csv, block, alphabet);
  json config = {{"command", "hankel"}, {"source", spec.to_json()}, {"rows", rows}, {"cols", cols}, {"out", out_path}};
  write_outputs(out_path, csv.str(), config);
  out << "wrote " << block.data.rows() << "x" << block.data.cols() << " block to " << out_path << '\n';
  return kOk;
}

struct ApproximateArgs {
  SourceSpec source;
  std::size_t size = 2;
  std::size_t depth = 0;  // 0 means the default (N, or 1 with --markov)
  int iters = 5000;
  double tol = 1e-10;
  std::uint64_t seed = 0;
  std::size_t restarts = 1;
  bool markov = false;
  bool no_extrapolate = false;
  std::string trace;
  std::string out;

  json to_json() const {
    return {{"command", "approximate"}, {"source", source.to_json()}, {"size", size}, {"depth", depth},
            {"iters", iters}, {"tol", tol}, {"seed", seed}, {"restarts", restarts}, {"markov", markov},
            {"extrapolate", !no_extrapolate}, {"trace", trace}, {"out", out}};
  }
};

inline void write_trace(const std::string& prefix, const std::string& step, const SolveReport& r) {
  if (prefix.empty()) return;
  std::ostringstream csv;
  write_trace_csv(csv, r);
  io::write_file(prefix + "." + step + ".csv", csv.str());
}

inline int cmd_approximate(ApproximateArgs args, std::ostream& out) {
  const Source source = load_source(args.source);
  SolverOptions opts;
  opts.max_iters = args.iters;
  opts.tol = args.tol;
  opts.seed = args.seed;
  opts.extrapolate = !args.no_extrapolate;
  out << std::setprecision(17);

  if (args.markov) {
    const std::size_t n = args.depth == 0 ? 1 : args.depth;
    args.depth = n;
    const MarkovPipelineResult r = visit_source(source, [&](const auto& s) { return markov_structured_pipeline(s, n, opts); });
    json doc = io::to_json(r.model);
    doc["diagnostics"] = {{"depth", n},
                          {"masked_transition", io::detail::matrix_json(r.masked_transition)},
                          {"disagreement", r.disagreement},
                          {"null_symbols", r.null_symbols},
                          {"steps", json::array({report_json("law approximation", r.law),
                                                  report_json("approximate realization", r.realization),
                                                  report_json("parametrization", r.parametrization)})}};
    write_outputs(args.out, doc.dump(2) + "\n", args.to_json());
    write_trace(args.trace, "law", r.law);
    write_trace(args.trace, "realization", r.realization);
    write_trace(args.trace, "parametrization", r.parametrization);
    out << "A* =\n";
    const Matrix& a = r.model.transition();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index j = 0; j < a.cols(); ++j) out << (j ? " " : "  ") << a(i, j);
      out << '\n';
    }
    out << "masked solver disagreement: " << r.disagreement << '\n';
    if (!r.null_symbols.empty()) out << "warning: symbols with zero probability were given uniform rows\n";
    return r.agrees() ? kOk : kNotConverged;
  }

  const std::size_t n = args.depth == 0 ? args.size : args.depth;
  args.depth = n;
  const ApproximationResult r =
      visit_source(source, [&](const auto& s) { return approximate_hmm(s, args.size, n, opts, args.restarts); });
  const std::size_t check_len = std::min<std::size_t>(
      2 * args.size, visit_source(source, [](const auto& s) { return s.max_length(); }));
  const EquivalenceReport eq =
      visit_source(source, [&](const auto& s) { return check_equivalence(r.model, s, check_len, 1e-6); });

  json doc = io::to_json(r.model);
  doc["diagnostics"] = {{"size", args.size},
                        {"depth", n},
                        {"seed", r.seed},
                        {"restarts", r.restarts},
                        {"converged", r.converged()},
                        {"block_divergence", divergence_json(r.block_divergence)},
                        {"model_divergence", divergence_json(r.model_divergence)},
                        {"pi_rank", r.pi_rank},
                        {"rank_deficient", r.rank_deficient},
                        {"steps", json::array({report_json("law approximation", r.law),
                                                report_json("approximate realization", r.realization),
                                                report_json("parametrization", r.parametrization)})},
                        {"equivalence", {{"max_length", check_len},
                                         {"per_length", eq.per_length},
                                         {"max_deviation", eq.max_deviation}}}};
  write_outputs(args.out, doc.dump(2) + "\n", args.to_json());
  write_trace(args.trace, "law", r.law);
  write_trace(args.trace, "realization", r.realization);
  write_trace(args.trace, "parametrization", r.parametrization);

  out << "block divergence (1/2n) D(H_nn || Pi* Gamma*): " << format_divergence(r.block_divergence) << '\n';
  out << "model divergence (1/2n) D(H_nn || H_nn of model): " << format_divergence(r.model_divergence) << '\n';
  out << "iterations: law " << r.law.iterations << ", realization " << r.realization.iterations
      << ", parametrization " << r.parametrization.iterations << '\n';
  out << "max |p*(u) - q(u)| for |u| <= " << check_len << ": " << eq.max_deviation << '\n';
  if (r.rank_deficient) out << "warning: Pi* is rank deficient (rank " << r.pi_rank << ")\n";
  if (!r.converged()) {
    out << "warning: iteration limit reached before convergence\n";
    return kNotConverged;
  }
  return kOk;
}

struct DivrateArgs {
  SourceSpec q;
  SourceSpec p;
  std::size_t n_max = 6;
  std::string out;
};

inline int cmd_divrate(const DivrateArgs& args, std::ostream& out) {
  if (args.n_max < 1) throw ValidationError("--nmax must be at least 1");
  const Source q = load_source(args.q);
  const Source p = load_source(args.p);
  std::ostringstream csv;
  csv << "n,estimate\n";
  for (std::size_t n = 1; n <= args.n_max; ++n) {
    const Divergence d = std::visit([&](const auto& a, const auto& b) { return divergence_rate_estimate(a, b, n); }, q, p);
    csv << n << ',' << format_divergence(d) << '\n';
  }
  const auto* mq = std::get_if<MarkovModel>(&q);
  const auto* mp = std::get_if<MarkovModel>(&p);
  if (mq && mp) csv << "analytic," << format_divergence(markov_divergence_rate(*mq, *mp)) << '\n';
  json config = {{"command", "divrate"}, {"q", args.q.to_json()}, {"p", args.p.to_json()}, {"nmax", args.n_max}, {"out", args.out}};
  write_outputs(args.out, csv.str(), config);
  out << csv.str();
  return kOk;
}

inline int cmd_sample(const std::string& model_path, std::size_t length, std::uint64_t seed,
                      const std::string& out_path, std::ostream& out) {
  if (length < 1) throw ValidationError("--length must be at least 1");
  io::ModelFile file = io::load_model(model_path);
  const HmmModel model = std::holds_alternative<HmmModel>(file) ? std::get<HmmModel>(file)
                                                                : markov_to_hmm(std::get<MarkovModel>(file));
  const Word path = sample_path(model, length, seed);
  json config = {{"command", "sample"}, {"model", model_path}, {"length", length}, {"seed", seed}, {"out", out_path}};
  write_outputs(out_path, io::format_sample(path, model.alphabet()), config);
  out << "wrote " << length << " symbols to " << out_path << '\n';
  return kOk;
}

inline int cmd_generate(std::size_t states, std::size_t symbols, std::uint64_t seed, bool markov,
                        const std::string& out_path, std::ostream& out) {
  const json doc = markov ? io::to_json(random_markov(symbols, seed)) : io::to_json(random_hmm(states, symbols, seed));
  json config = {{"command", "generate"}, {"states", states}, {"symbols", symbols}, {"seed", seed},
                 {"markov", markov}, {"out", out_path}};
  write_outputs(out_path, doc.dump(2) + "\n", config);
  out << "wrote " << (markov ? "Markov" : "HMM") << " model to " << out_path << '\n';
  return kOk;
}

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Approximate stationary processes by hidden Markov models of given size"};
  app.require_subcommand(1);

  std::string validate_model;
  auto* validate = app.add_subcommand("validate", "Check model invariants and the positivity condition");
  validate->add_option("--model", validate_model, "Model file")->required();

  SourceSpec hankel_src;
  std::size_t hankel_rows = 0, hankel_cols = 0;
  std::string hankel_out;
  auto* hankel = app.add_subcommand("hankel", "Write the Hankel block H_KL as CSV");
  add_source_options(*hankel, hankel_src);
  hankel->add_option("--rows,-K", hankel_rows, "Row word length K")->required();
  hankel->add_option("--cols,-L", hankel_cols, "Column word length L")->required();
  hankel->add_option("--out", hankel_out, "Output CSV")->required();

  ApproximateArgs approx;
  auto* approximate = app.add_subcommand("approximate", "Fit an HMM of given size to a source");
  add_source_options(*approximate, approx.source);
  approximate->add_option("--size,-N", approx.size, "Number of hidden states");
  approximate->add_option("--depth,-n", approx.depth, "Block depth n (default: N, or 1 with --markov)");
  approximate->add_option("--iters", approx.iters, "Iteration cap per step");
  approximate->add_option("--tol", approx.tol, "Relative objective decrease threshold");
  approximate->add_option("--seed", approx.seed, "Seed of the random initialization");
  approximate->add_option("--restarts", approx.restarts, "Independent restarts with consecutive seeds");
  approximate->add_flag("--markov", approx.markov, "Closed-form Markov approximation");
  approximate->add_flag("--no-extrapolate", approx.no_extrapolate, "Plain multiplicative updates only");
  approximate->add_option("--trace", approx.trace, "Prefix for per-step objective trace CSVs");
  approximate->add_option("--out", approx.out, "Output model JSON")->required();

  DivrateArgs div;
  auto* divrate = app.add_subcommand("divrate", "Hankel estimates of the divergence rate D(Q||P)");
  add_source_options(*divrate, div.q);
  add_source_options(*divrate, div.p, "ref-");
  divrate->add_option("--nmax", div.n_max, "Largest block depth");
  divrate->add_option("--out", div.out, "Output CSV")->required();

  std::string sample_model, sample_out;
  std::size_t sample_length = 0;
  std::uint64_t sample_seed = 0;
  auto* sample = app.add_subcommand("sample", "Draw a sample path from a model");
  sample->add_option("--model", sample_model, "Model file")->required();
  sample->add_option("--length,-T", sample_length, "Path length")->required();
  sample->add_option("--seed", sample_seed, "Random seed");
  sample->add_option("--out", sample_out, "Output text file")->required();

  std::size_t gen_states = 2, gen_symbols = 2;
  std::uint64_t gen_seed = 0;
  bool gen_markov = false;
  std::string gen_out;
  auto* generate = app.add_subcommand("generate", "Write a random model with positive parameters");
  generate->add_option("--states,-N", gen_states, "Number of hidden states");
  generate->add_option("--symbols,-m", gen_symbols, "Alphabet size");
  generate->add_option("--seed", gen_seed, "Random seed");
  generate->add_flag("--markov", gen_markov, "Write a Markov chain instead of an HMM");
  generate->add_option("--out", gen_out, "Output model JSON")->required();

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kValidation;
  }

  try {
    if (*validate) return cmd_validate(validate_model, out, err);
    if (*hankel) return cmd_hankel(hankel_src, hankel_rows, hankel_cols, hankel_out, out);
    if (*approximate) return cmd_approximate(approx, out);
    if (*divrate) return cmd_divrate(div, out);
    if (*sample) return cmd_sample(sample_model, sample_length, sample_seed, sample_out, out);
    if (*generate) return cmd_generate(gen_states, gen_symbols, gen_seed, gen_markov, gen_out, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const SolverError& e) {
    err << "error in step '" << e.step() << "': " << e.what() << '\n';
    return kNotConverged;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }
  return kValidation;
}

}  // namespace hmmapprox::cli
