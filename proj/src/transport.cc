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

#include "rdplab/transport.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "rdplab/error.h"

namespace rdplab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Residual capacities below this are treated as exhausted.
constexpr double kFlowEpsilon = 1e-15;

double LogSumExp(const double* v, int n, int stride) {
  double hi = -kInf;
  for (int k = 0; k < n; ++k) hi = std::max(hi, v[k * stride]);
  if (hi == -kInf) return -kInf;
  double s = 0.0;
  for (int k = 0; k < n; ++k) s += std::exp(v[k * stride] - hi);
  return hi + std::log(s);
}

}  // namespace

TransportPlan MinCostTransport(std::span<const double> a,
                               std::span<const double> b,
                               std::span<const double> cost) {
  const int m = static_cast<int>(a.size());
  const int n = static_cast<int>(b.size());
  Require(cost.size() == a.size() * b.size(), "transport cost shape mismatch");
  // Nodes: 0 = source, 1..m rows, m+1..m+n columns, m+n+1 = sink.
  const int source = 0, sink = m + n + 1, nodes = m + n + 2;
  struct Edge {
    int to;
    double cap;
    double cost;
  };
  std::vector<Edge> edges;
  std::vector<std::vector<int>> adj(nodes);
  auto add = [&](int u, int v, double cap, double c) {
    adj[u].push_back(static_cast<int>(edges.size()));
    edges.push_back({v, cap, c});
    adj[v].push_back(static_cast<int>(edges.size()));
    edges.push_back({u, 0.0, -c});
  };
  for (int i = 0; i < m; ++i) add(source, 1 + i, a[i], 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) add(1 + i, 1 + m + j, kInf, cost[i * n + j]);
  }
  for (int j = 0; j < n; ++j) add(1 + m + j, sink, b[j], 0.0);

  std::vector<double> dist(nodes);
  std::vector<int> via(nodes);
  for (int round = 0; round < 4 * nodes * nodes + 16; ++round) {
    // Bellman-Ford: residual graphs of min-cost flows have no negative cycles.
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(via.begin(), via.end(), -1);
    dist[source] = 0.0;
    for (int pass = 0; pass < nodes; ++pass) {
      bool changed = false;
      for (int u = 0; u < nodes; ++u) {
        if (dist[u] == kInf) continue;
        for (int e : adj[u]) {
          if (edges[e].cap <= kFlowEpsilon) continue;
          const double nd = dist[u] + edges[e].cost;
          if (nd < dist[edges[e].to] - 1e-15) {
            dist[edges[e].to] = nd;
            via[edges[e].to] = e;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    if (dist[sink] == kInf) break;
    double push = kInf;
    for (int v = sink; v != source; v = edges[via[v] ^ 1].to) {
      push = std::min(push, edges[via[v]].cap);
    }
    for (int v = sink; v != source; v = edges[via[v] ^ 1].to) {
      edges[via[v]].cap -= push;
      edges[via[v] ^ 1].cap += push;
    }
  }
  TransportPlan out;
  out.plan.assign(static_cast<std::size_t>(m) * n, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int e : adj[1 + i]) {
      const int to = edges[e].to;
      if (to < 1 + m || to > m + n || (e & 1)) continue;
      const int j = to - 1 - m;
      const double flow = edges[e ^ 1].cap;
      out.plan[i * n + j] = flow;
      out.cost += flow * cost[i * n + j];
    }
  }
  return out;
}

namespace {

// Scaling-domain iterations on K = exp(log_ref - shift). Much cheaper than
// the log domain but only safe when the kernel's dynamic range fits a
// double; returns nullopt when it does not or when the scalings degenerate.
std::optional<SinkhornResult> ScalingSinkhorn(std::span<const double> log_ref,
                                              std::span<const double> a,
                                              std::span<const double> b,
                                              const SinkhornOptions& options,
                                              const std::vector<double>* warm_g) {
  constexpr double kRange = 600.0;
  const int m = static_cast<int>(a.size());
  const int n = static_cast<int>(b.size());
  double hi = -kInf, lo = kInf;
  for (double v : log_ref) {
    if (v == -kInf) continue;
    hi = std::max(hi, v);
    lo = std::min(lo, v);
  }
  if (hi == -kInf || hi - lo > kRange) return std::nullopt;
  std::vector<double> k(log_ref.size());
  for (std::size_t i = 0; i < k.size(); ++i) k[i] = std::exp(log_ref[i] - hi);
  std::vector<double> u(m, 0.0), v(n, 1.0);
  if (warm_g && static_cast<int>(warm_g->size()) == n) {
    for (int j = 0; j < n; ++j) {
      const double e = (*warm_g)[j] + hi;
      if (std::fabs(e) > kRange) {
        std::fill(v.begin(), v.end(), 1.0);
        break;
      }
      v[j] = std::exp(e);
    }
  }
  SinkhornResult out;
  for (int it = 0; it < options.max_iterations; ++it) {
    out.iterations = it + 1;
    for (int i = 0; i < m; ++i) {
      if (a[i] <= 0.0) {
        u[i] = 0.0;
        continue;
      }
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += k[i * n + j] * v[j];
      if (!(s > 0.0)) return std::nullopt;
      u[i] = a[i] / s;
    }
    for (int j = 0; j < n; ++j) {
      if (b[j] <= 0.0) {
        v[j] = 0.0;
        continue;
      }
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += k[i * n + j] * u[i];
      if (!(s > 0.0)) return std::nullopt;
      v[j] = b[j] / s;
      if (!std::isfinite(v[j])) return std::nullopt;
    }
    double err = 0.0;
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += k[i * n + j] * v[j];
      err = std::max(err, std::fabs(u[i] * s - a[i]));
    }
    if (err <= options.tolerance) {
      out.converged = true;
      break;
    }
  }
  out.plan.resize(k.size());
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) out.plan[i * n + j] = u[i] * k[i * n + j] * v[j];
  }
  out.g.resize(n);
  for (int j = 0; j < n; ++j) out.g[j] = v[j] > 0.0 ? std::log(v[j]) - hi : 0.0;
  return out;
}

}  // namespace

SinkhornResult SinkhornProject(std::span<const double> log_ref,
                               std::span<const double> a,
                               std::span<const double> b,
                               const SinkhornOptions& options,
                               const std::vector<double>* warm_g) {
  const int m = static_cast<int>(a.size());
  const int n = static_cast<int>(b.size());
  Require(log_ref.size() == a.size() * b.size(), "Sinkhorn shape mismatch");
  if (auto fast = ScalingSinkhorn(log_ref, a, b, options, warm_g)) {
    return *std::move(fast);
  }
  std::vector<double> log_a(m), log_b(n);
  for (int i = 0; i < m; ++i) log_a[i] = a[i] > 0.0 ? std::log(a[i]) : -kInf;
  for (int j = 0; j < n; ++j) log_b[j] = b[j] > 0.0 ? std::log(b[j]) : -kInf;
  std::vector<double> f(m, 0.0);
  std::vector<double> g =
      warm_g && static_cast<int>(warm_g->size()) == n ? *warm_g
                                                      : std::vector<double>(n, 0.0);
  std::vector<double> work(static_cast<std::size_t>(m) * n);
  SinkhornResult out;
  auto fill = [&] {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        work[i * n + j] = log_ref[i * n + j] + f[i] + g[j];
      }
    }
  };
  for (int it = 0; it < options.max_iterations; ++it) {
    out.iterations = it + 1;
    // Row update.
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) work[i * n + j] = log_ref[i * n + j] + g[j];
      const double lse = LogSumExp(&work[i * n], n, 1);
      f[i] = (log_a[i] == -kInf || lse == -kInf) ? -kInf : log_a[i] - lse;
    }
    // Column update.
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < m; ++i) work[i * n + j] = log_ref[i * n + j] + f[i];
      const double lse = LogSumExp(&work[j], m, n);
      g[j] = (log_b[j] == -kInf || lse == -kInf) ? -kInf : log_b[j] - lse;
    }
    // Row marginal error after the column step.
    fill();
    double err = 0.0;
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += std::exp(work[i * n + j]);
      err = std::max(err, std::fabs(s - a[i]));
    }
    if (err <= options.tolerance) {
      out.converged = true;
      break;
    }
  }
  fill();
  out.plan.resize(work.size());
  for (std::size_t k = 0; k < work.size(); ++k) out.plan[k] = std::exp(work[k]);
  for (double& v : g) {
    if (!std::isfinite(v)) v = 0.0;
  }
  out.g = std::move(g);
  return out;
}

}  // namespace rdplab
