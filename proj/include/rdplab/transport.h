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

#ifndef RDPLAB_TRANSPORT_H_
#define RDPLAB_TRANSPORT_H_

// Couplings with prescribed marginals: exact min-cost transport and the
// entropic (KL-projection) variant used by the convex inner problems of the
// region oracle.
//
// Plans are row-major m x n tables pi(i, j) with row sums a and column sums b.

#include <span>
#include <vector>

namespace rdplab {

struct TransportPlan {
  double cost = 0.0;
  std::vector<double> plan;
};

// Exact minimum of sum pi(i,j) c(i,j) over couplings of (a, b), by successive
// shortest augmenting paths. a and b must carry equal mass.
TransportPlan MinCostTransport(std::span<const double> a,
                               std::span<const double> b,
                               std::span<const double> cost);

struct SinkhornOptions {
  int max_iterations = 5000;
  double tolerance = 1e-12;  // max abs row-marginal error
};

struct SinkhornResult {
  std::vector<double> plan;
  std::vector<double> g;  // column potentials (natural log), for warm starts
  int iterations = 0;
  bool converged = false;
};

// argmin KL(pi || R) over couplings of (a, b), where log R is given in
// natural-log units (entries may be -inf). Column sums are exact on return.
SinkhornResult SinkhornProject(std::span<const double> log_ref,
                               std::span<const double> a,
                               std::span<const double> b,
                               const SinkhornOptions& options = {},
                               const std::vector<double>* warm_g = nullptr);

}  // namespace rdplab

#endif  // RDPLAB_TRANSPORT_H_
