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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "commands.hpp"
#include "oracles.hpp"

namespace hmmapprox {
namespace {

namespace fs = std::filesystem;
using testing::mat;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("hmmapprox_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& content) const {
    io::write_file(path(name), content);
    return path(name);
  }

  static std::vector<std::vector<std::string>> csv(const std::string& file) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(io::read_file(file));
    std::string line;
    while (std::getline(in, line)) {
      std::vector<std::string> cells;
      std::stringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) cells.push_back(cell);
      if (!line.empty() && line.back() == ',') cells.emplace_back();
      rows.push_back(cells);
    }
    return rows;
  }

  fs::path dir_;
};

const std::string kData = HMMAPPROX_DATA_DIR;

TEST_F(Cli, ValidateAcceptsValidModel) {
  const Outcome r = run({"validate", "--model", kData + "/binary_hmm2.json"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("stochasticity residual: 0"), std::string::npos);
  EXPECT_NE(r.out.find("valid"), std::string::npos);
}

TEST_F(Cli, ValidateNamesBadRow) {
  const std::string model = write("bad.json", R"({"alphabet": ["0", "1"], "N": 2,
    "M": {"0": [[0.5, 0.2], [0.1, 0.1]], "1": [[0.1, 0.1], [0.4, 0.4]]}})");
  const Outcome r = run({"validate", "--model", model});
  EXPECT_EQ(r.code, cli::kValidation);
  EXPECT_NE(r.err.find("row 0"), std::string::npos);
  EXPECT_NE(r.err.find("0.9"), std::string::npos);
}

TEST_F(Cli, ValidateFlagsPositivityButPasses) {
  const std::string model = write("weak.json", R"({"alphabet": ["0", "1"], "N": 2,
    "M": {"0": [[0.3, 0.2], [0, 0]], "1": [[0.25, 0.25], [0.5, 0.5]]}})");
  const Outcome r = run({"validate", "--model", model});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("positivity condition fails"), std::string::npos);
}

TEST_F(Cli, ValidateMarkovAndParseErrors) {
  EXPECT_EQ(run({"validate", "--model", kData + "/markov_q.json"}).code, 0);
  EXPECT_EQ(run({"validate", "--model", write("broken.json", "{\"alphabet\": [")}).code, cli::kIo);
  EXPECT_EQ(run({"validate", "--model", path("missing.json")}).code, cli::kIo);
  const Outcome shape = run({"validate", "--model", write("shape.json", R"({"alphabet": ["0"], "N": 2, "M": {"0": [[1, 0]]}})")});
  EXPECT_EQ(shape.code, cli::kIo);
  EXPECT_NE(shape.err.find("expected 2 rows"), std::string::npos);
}

TEST_F(Cli, HankelEmptyBlock) {
  ASSERT_EQ(run({"hankel", "--model", kData + "/binary_hmm2.json", "-K", "0", "-L", "0", "--out", path("h.csv")}).code, 0);
  const auto rows = csv(path("h.csv"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(std::stod(rows[1][1]), 1.0);
  EXPECT_TRUE(fs::exists(path("h.csv.config.json")));
}

TEST_F(Cli, HankelBinaryBlockSumsToOne) {
  ASSERT_EQ(run({"hankel", "--model", kData + "/binary_hmm2.json", "-K", "1", "-L", "1", "--out", path("h.csv")}).code, 0);
  const auto rows = csv(path("h.csv"));
  ASSERT_EQ(rows.size(), 3u);
  double total = 0;
  for (std::size_t i = 1; i < 3; ++i)
    for (std::size_t j = 1; j < 3; ++j) total += std::stod(rows[i][j]);
  EXPECT_NEAR(total, 1.0, 1e-15);
}

TEST_F(Cli, HankelFromSampleCountsWindows) {
  // Windows of length 2 in 0110100111: 01 11 10 01 10 00 01 11 11.
  const std::string sample = write("s.txt", "0110100111\n");
  ASSERT_EQ(run({"hankel", "--sample", sample, "--kmax", "2", "-K", "1", "-L", "1", "--out", path("h.csv")}).code, 0);
  const auto rows = csv(path("h.csv"));
  EXPECT_EQ(rows[0], (std::vector<std::string>{"word", "0", "1"}));
  EXPECT_DOUBLE_EQ(std::stod(rows[1][1]), 1.0 / 9.0);
  EXPECT_DOUBLE_EQ(std::stod(rows[1][2]), 3.0 / 9.0);
  EXPECT_DOUBLE_EQ(std::stod(rows[2][1]), 2.0 / 9.0);
  EXPECT_DOUBLE_EQ(std::stod(rows[2][2]), 3.0 / 9.0);
  EXPECT_EQ(run({"hankel", "--sample", sample, "--kmax", "2", "-K", "2", "-L", "1", "--out", path("x.csv")}).code,
            cli::kValidation);
}

TEST_F(Cli, ApproximateMarkovPrintsTransition) {
  const Outcome r = run({"approximate", "--model", kData + "/markov_q.json", "--markov", "--depth", "2", "--out", path("m.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("A* ="), std::string::npos);
  const auto doc = io::parse_json(io::read_file(path("m.json")), "m.json");
  EXPECT_NEAR(doc["A"][0][1].get<double>(), 0.1, 1e-12);
  EXPECT_LE(doc["diagnostics"]["disagreement"].get<double>(), 1e-8);
}

TEST_F(Cli, ApproximateIsDeterministic) {
  const std::vector<std::string> base{"approximate", "--model", kData + "/binary_hmm2.json", "-N", "2", "--seed", "4"};
  auto args = base;
  args.insert(args.end(), {"--out", path("a.json")});
  ASSERT_EQ(run(args).code, 0);
  args = base;
  args.insert(args.end(), {"--out", path("b.json")});
  ASSERT_EQ(run(args).code, 0);
  EXPECT_EQ(io::read_file(path("a.json")), io::read_file(path("b.json")));
}

TEST_F(Cli, ApproximateRecoversHmmAndDivrateConfirms) {
  const std::string truth = kData + "/binary_hmm2.json";
  const Outcome r = run({"approximate", "--model", truth, "-N", "2", "-n", "3", "--iters", "20000", "--restarts", "3",
                     "--trace", path("trace"), "--out", path("fit.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = io::parse_json(io::read_file(path("fit.json")), "fit.json");
  EXPECT_LE(doc["diagnostics"]["equivalence"]["max_deviation"].get<double>(), 1e-6);
  EXPECT_NE(r.out.find("max |p*(u) - q(u)|"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("trace.law.csv")));
  EXPECT_EQ(csv(path("trace.law.csv"))[0], (std::vector<std::string>{"iteration", "objective", "residual"}));

  ASSERT_EQ(run({"divrate", "--model", truth, "--ref-model", path("fit.json"), "--nmax", "3", "--out", path("d.csv")}).code, 0);
  const auto rows = csv(path("d.csv"));
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t n = 1; n <= 3; ++n) {
    EXPECT_GE(std::stod(rows[n][1]), 0.0);
    EXPECT_LE(std::stod(rows[n][1]), 1e-6);
  }
}

TEST_F(Cli, ApproximateFlagsNonConvergence) {
  const Outcome r = run({"approximate", "--model", kData + "/binary_hmm2.json", "-N", "2", "--iters", "2", "--out", path("a.json")});
  EXPECT_EQ(r.code, cli::kNotConverged);
  const auto doc = io::parse_json(io::read_file(path("a.json")), "a.json");
  EXPECT_FALSE(doc["diagnostics"]["converged"].get<bool>());
}

TEST_F(Cli, DivrateEqualSourcesGiveZeros) {
  const std::string q = kData + "/markov_q.json";
  ASSERT_EQ(run({"divrate", "--model", q, "--ref-model", q, "--nmax", "3", "--out", path("d.csv")}).code, 0);
  const auto rows = csv(path("d.csv"));
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_EQ(std::stod(rows[k][1]), 0.0);
  EXPECT_EQ(rows.back()[0], "analytic");
}

TEST_F(Cli, DivrateApproachesAnalyticRow) {
  ASSERT_EQ(run({"divrate", "--model", kData + "/markov_q.json", "--ref-model", kData + "/markov_p.json", "--out",
                 path("d.csv")})
                .code,
            0);
  const auto rows = csv(path("d.csv"));
  ASSERT_EQ(rows.size(), 8u);
  const double analytic = std::stod(rows[7][1]);
  EXPECT_LT(std::abs(std::stod(rows[6][1]) - analytic), std::abs(std::stod(rows[1][1]) - analytic));
  EXPECT_LE(std::abs(std::stod(rows[6][1]) - analytic), 0.02);
}

TEST_F(Cli, DivrateWritesInf) {
  const std::string p = write("p.json", R"({"alphabet": ["0", "1"], "A": [[1, 0], [0.5, 0.5]]})");
  ASSERT_EQ(run({"divrate", "--model", kData + "/markov_q.json", "--ref-model", p, "--nmax", "2", "--out", path("d.csv")}).code, 0);
  const auto rows = csv(path("d.csv"));
  EXPECT_EQ(rows[1][1], "inf");
  EXPECT_EQ(rows[2][1], "inf");
  EXPECT_EQ(rows[3][1], "inf");
}

TEST_F(Cli, SampleIsReproducible) {
  const std::string model = kData + "/binary_hmm2.json";
  ASSERT_EQ(run({"sample", "--model", model, "-T", "1000", "--seed", "3", "--out", path("a.txt")}).code, 0);
  ASSERT_EQ(run({"sample", "--model", model, "-T", "1000", "--seed", "3", "--out", path("b.txt")}).code, 0);
  EXPECT_EQ(io::read_file(path("a.txt")), io::read_file(path("b.txt")));
  EXPECT_EQ(io::read_file(path("a.txt")).size(), 1001u);
  const auto config = io::parse_json(io::read_file(path("a.txt.config.json")), "config");
  EXPECT_EQ(config["seed"].get<int>(), 3);
  EXPECT_EQ(config["length"].get<int>(), 1000);
}

TEST_F(Cli, SampleOfDeterministicModel) {
  const std::string model = write("flip.json", R"({"alphabet": ["a", "b"], "N": 2,
    "M": {"a": [[0, 1], [0, 0]], "b": [[0, 0], [1, 0]]}, "pi": [0.5, 0.5]})");
  ASSERT_EQ(run({"sample", "--model", model, "-T", "40", "--out", path("s.txt")}).code, 0);
  const std::string text = io::read_file(path("s.txt"));
  for (std::size_t t = 1; t < 40; ++t) EXPECT_NE(text[t], text[t - 1]);
}

TEST_F(Cli, GenerateWritesValidModels) {
  ASSERT_EQ(run({"generate", "-N", "3", "-m", "2", "--seed", "5", "--out", path("g.json")}).code, 0);
  EXPECT_EQ(run({"validate", "--model", path("g.json")}).code, 0);
  ASSERT_EQ(run({"generate", "--markov", "-m", "3", "--out", path("k.json")}).code, 0);
  EXPECT_EQ(run({"validate", "--model", path("k.json")}).code, 0);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, cli::kValidation);
  EXPECT_EQ(run({"hankel", "-K", "1", "-L", "1", "--out", path("h.csv")}).code, cli::kValidation);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kValidation);
  EXPECT_EQ(run({"validate", "--help"}).code, 0);
}

}  // namespace
}  // namespace hmmapprox
