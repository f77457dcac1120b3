// Copyright 2026 The rdplab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RDPLAB_TESTS_TEST_SUPPORT_H_
#define RDPLAB_TESTS_TEST_SUPPORT_H_

// Random instance generators and randomized property checks shared by the
// unit tests and the acceptance runner.

#include <cstdint>
#include <string>
#include <vector>

#include "rdplab/coding_sim.h"
#include "rdplab/probability.h"
#include "rdplab/regions.h"
#include "rdplab/rng.h"

namespace rdplab::testing {

std::vector<double> RandomSimplex(CounterRng& rng, int size);
// Random pmf with each entry zeroed with probability `sparsity`.
std::vector<double> RandomSparseSimplex(CounterRng& rng, int size,
                                        double sparsity);
JointPmf RandomJoint(CounterRng& rng, const std::vector<Axis>& axes);
Kernel RandomKernel(CounterRng& rng, int in, int out);

// Random candidates feasible for `setting` over a random (or given) source.
Candidate RandomFeasibleCandidate(CounterRng& rng, const JointPmf& p_xz,
                                  const Setting& setting, int v_size);

// Worst violation found over `count` random instances; zero is ideal.
struct PropertyResult {
  int instances = 0;
  double max_violation = 0.0;
  std::string worst;  // description of the worst instance
};

// TV(P_W, Q_W) <= TV(P_WL, Q_WL).
PropertyResult CheckMarginalTvContraction(std::uint64_t seed, int count);
// TV(P_W K, Q_W K) = TV(P_W, Q_W).
PropertyResult CheckSameChannelTv(std::uint64_t seed, int count);
// TV(P_W K1, P_W K2) = E_{P_W}[TV(K1(.|w), K2(.|w))].
PropertyResult CheckSameInputTv(std::uint64_t seed, int count);
// TV(P_UL, P_WL) <= P(U != W) for couplings of (U, W, L).
PropertyResult CheckCouplingTv(std::uint64_t seed, int count);
// Best classifier accuracy between P and Q (equal priors) = 1/2 + TV/2.
PropertyResult CheckCriticBound(std::uint64_t seed, int count);
// I(A;B,C) = I(A;B) + I(A;C|B).
PropertyResult CheckChainRule(std::uint64_t seed, int count);

// Structural identities of the regions, candidate-wise.
PropertyResult CheckIndependentShift(std::uint64_t seed, int count);
PropertyResult CheckSideInfoEmbedding(std::uint64_t seed, int count);
PropertyResult CheckEncoderSideDominance(std::uint64_t seed, int count);
PropertyResult CheckMarginalJointDominance(std::uint64_t seed, int count);

// Small random induced code with the Markov structure X - (Z, M) - Y built
// in: n letters, binary X and Z, |M| = m_size, |Y| = |X|.
struct RandomCode {
  JointPmf p_xz;
  InducedCode code;
};
RandomCode RandomInducedCode(CounterRng& rng, int n, int m_size);

// The binary benchmark family: X uniform, Z = X xor Bern(z_flip),
// V = Y = X xor Bern(v_flip).
Candidate BinaryChainCandidate(double z_flip, double v_flip);

double BinaryEntropy(double p);

}  // namespace rdplab::testing

#endif  // RDPLAB_TESTS_TEST_SUPPORT_H_
