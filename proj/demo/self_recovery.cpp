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

// Fits a two-state HMM to the exact law of a random two-state HMM and
// compares the two laws on all words of length at most four.

#include <cstdlib>
#include <iostream>

#include "hmmapprox/hmmapprox.hpp"

int main(int argc, char** argv) {
  using namespace hmmapprox;
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
  const HmmModel truth = random_hmm(2, 2, seed);

  SolverOptions opts;
  opts.max_iters = 20000;
  const ApproximationResult fit = approximate_hmm(truth, 2, 3, opts, 5);
  const EquivalenceReport eq = check_equivalence(fit.model, truth, 4, 1e-6);

  std::cout.precision(6);
  std::cout << "true transition matrix\n" << truth.transition() << "\n\n";
  std::cout << "fitted transition matrix\n" << fit.model.transition() << "\n\n";
  std::cout << "max |p*(u) - q(u)| over |u| <= 4: " << eq.max_deviation << '\n';
  std::cout << "best restart seed: " << fit.seed << '\n';
  return eq.passed ? 0 : 1;
}
