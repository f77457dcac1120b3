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

#include "rdplab/probability.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <sstream>

#include "rdplab/error.h"

namespace rdplab {
namespace {

std::uint64_t& CapStorage() {
  static std::uint64_t cap = [] {
    std::uint64_t value = std::uint64_t{1} << 20;
    if (const char* env = std::getenv("RDPLAB_CAP")) {
      char* end = nullptr;
      const unsigned long long parsed = std::strtoull(env, &end, 10);
      if (end != env && *end == '\0' && parsed > 0) value = parsed;
    }
    return value;
  }();
  return cap;
}

// Validates a nonnegative vector of unit mass; `what` names it in errors.
void ValidateMass(std::span<const double> probs, const std::string& what) {
  Require(!probs.empty(), what + ": empty distribution");
  long double total = 0.0L;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) {
      std::ostringstream msg;
      msg << what << ": negative or non-finite entry " << p;
      Fail(ErrorCode::kInvalidArgument, msg.str());
    }
    total += p;
  }
  if (std::fabs(static_cast<double>(total) - 1.0) > kMassTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << ": total mass " << static_cast<double>(total)
        << " differs from 1";
    Fail(ErrorCode::kInvalidArgument, msg.str());
  }
}

double XLog2X(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

// Joint laid out as a dense (a, b, c) block after merging axis groups.
struct Grouped {
  int na = 1, nb = 1, nc = 1;
  std::vector<double> data;
  double at(int a, int b, int c) const {
    return data[(static_cast<std::size_t>(a) * nb + b) * nc + c];
  }
};

int GroupSize(const JointPmf& j, const AxisGroup& g) {
  int size = 1;
  for (const auto& name : g) size *= j.axis(name).size;
  return size;
}

Grouped Group(const JointPmf& j, const AxisGroup& a, const AxisGroup& b,
              const AxisGroup& c) {
  AxisGroup all;
  all.insert(all.end(), a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  all.insert(all.end(), c.begin(), c.end());
  std::vector<std::string> sorted = all;
  std::sort(sorted.begin(), sorted.end());
  Require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
          "axis groups must be disjoint");
  Grouped g;
  g.na = GroupSize(j, a);
  g.nb = GroupSize(j, b);
  g.nc = GroupSize(j, c);
  if (all.empty()) {
    g.data = {1.0};
  } else {
    const JointPmf m = j.Marginal(all);
    g.data.assign(m.data().begin(), m.data().end());
  }
  return g;
}

}  // namespace

std::uint64_t EnumerationCap() { return CapStorage(); }

void SetEnumerationCap(std::uint64_t cap) {
  Require(cap > 0, "enumeration cap must be positive");
  CapStorage() = cap;
}

void CheckCap(double states, const std::string& what) {
  if (!(states <= static_cast<double>(EnumerationCap()))) {
    std::ostringstream msg;
    msg << what << ": " << states << " states exceed the enumeration cap "
        << EnumerationCap();
    Fail(ErrorCode::kCapExceeded, msg.str());
  }
}

// ---------------------------------------------------------------------------
// Pmf

Pmf::Pmf(std::vector<double> probs) : probs_(std::move(probs)) {
  ValidateMass(probs_, "pmf");
}

Pmf Pmf::Uniform(int size) {
  Require(size > 0, "uniform pmf needs a positive size");
  return Pmf(std::vector<double>(size, 1.0 / size));
}

Pmf Pmf::PointMass(int size, int at) {
  Require(size > 0 && at >= 0 && at < size, "point mass out of range");
  std::vector<double> p(size, 0.0);
  p[at] = 1.0;
  return Pmf(std::move(p));
}

Pmf Pmf::Bernoulli(double p_one) {
  Require(p_one >= 0.0 && p_one <= 1.0, "Bernoulli parameter out of [0,1]");
  return Pmf({1.0 - p_one, p_one});
}

// ---------------------------------------------------------------------------
// JointPmf

JointPmf::JointPmf(std::vector<Axis> axes, std::vector<double> data)
    : axes_(std::move(axes)), data_(std::move(data)) {
  Require(!axes_.empty(), "joint pmf needs at least one axis");
  double states = 1.0;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    Require(axes_[i].size > 0, "axis '" + axes_[i].name + "' has size 0");
    for (std::size_t k = 0; k < i; ++k) {
      Require(axes_[k].name != axes_[i].name,
              "duplicate axis name '" + axes_[i].name + "'");
    }
    states *= axes_[i].size;
  }
  CheckCap(states, "joint pmf");
  Require(static_cast<double>(data_.size()) == states,
          "joint pmf data length does not match its axes");
  ValidateMass(data_, "joint pmf");
}

JointPmf JointPmf::FromPmf(const Pmf& pmf, std::string name) {
  return JointPmf({{std::move(name), pmf.size()}},
                  std::vector<double>(pmf.probs().begin(), pmf.probs().end()));
}

int JointPmf::AxisIndex(std::string_view name) const {
  for (int i = 0; i < rank(); ++i) {
    if (axes_[i].name == name) return i;
  }
  Fail(ErrorCode::kInvalidArgument,
       "no axis named '" + std::string(name) + "'");
}

bool JointPmf::HasAxis(std::string_view name) const {
  return std::any_of(axes_.begin(), axes_.end(),
                     [&](const Axis& a) { return a.name == name; });
}

std::vector<std::size_t> JointPmf::Strides() const {
  std::vector<std::size_t> strides(axes_.size());
  std::size_t s = 1;
  for (int i = rank() - 1; i >= 0; --i) {
    strides[i] = s;
    s *= axes_[i].size;
  }
  return strides;
}

double JointPmf::at(std::initializer_list<int> index) const {
  Require(static_cast<int>(index.size()) == rank(), "index rank mismatch");
  std::size_t offset = 0;
  int i = 0;
  for (int v : index) {
    Require(v >= 0 && v < axes_[i].size, "index out of range");
    offset = offset * axes_[i].size + v;
    ++i;
  }
  return data_[offset];
}

JointPmf JointPmf::Marginal(const AxisGroup& keep) const {
  Require(!keep.empty(), "marginal must keep at least one axis");
  std::vector<Axis> out_axes;
  std::vector<int> src;
  for (const auto& name : keep) {
    const int k = AxisIndex(name);
    Require(std::find(src.begin(), src.end(), k) == src.end(),
            "axis '" + name + "' listed twice");
    src.push_back(k);
    out_axes.push_back(axes_[k]);
  }
  // Stride in the output tensor contributed by each source axis.
  std::vector<std::size_t> out_stride(axes_.size(), 0);
  {
    std::size_t s = 1;
    for (int i = static_cast<int>(src.size()) - 1; i >= 0; --i) {
      out_stride[src[i]] = s;
      s *= axes_[src[i]].size;
    }
  }
  std::size_t out_size = 1;
  for (const auto& a : out_axes) out_size *= a.size;
  std::vector<long double> acc(out_size, 0.0L);
  std::vector<int> idx(axes_.size(), 0);
  std::size_t out = 0;
  for (std::size_t flat = 0; flat < data_.size(); ++flat) {
    acc[out] += data_[flat];
    for (int d = rank() - 1; d >= 0; --d) {
      out += out_stride[d];
      if (++idx[d] < axes_[d].size) break;
      out -= out_stride[d] * axes_[d].size;
      idx[d] = 0;
    }
  }
  std::vector<double> values(acc.begin(), acc.end());
  return JointPmf(std::move(out_axes), std::move(values));
}

JointPmf JointPmf::Renamed(const std::vector<std::string>& names) const {
  Require(static_cast<int>(names.size()) == rank(), "rename rank mismatch");
  std::vector<Axis> axes = axes_;
  for (int i = 0; i < rank(); ++i) axes[i].name = names[i];
  return JointPmf(std::move(axes), data_);
}

Pmf JointPmf::ToPmf() const {
  Require(rank() == 1, "ToPmf needs a rank-1 joint");
  return Pmf(data_);
}

// ---------------------------------------------------------------------------
// Kernel

Kernel::Kernel(int input_size, int output_size, std::vector<double> rows)
    : input_size_(input_size),
      output_size_(output_size),
      rows_(std::move(rows)),
      unconstrained_(input_size > 0 ? input_size : 0, false) {
  Require(input_size_ > 0 && output_size_ > 0, "kernel sizes must be positive");
  Require(rows_.size() ==
              static_cast<std::size_t>(input_size_) * output_size_,
          "kernel table has the wrong length");
  for (int i = 0; i < input_size_; ++i) {
    ValidateMass(Row(i), "kernel row " + std::to_string(i));
  }
}

Kernel Kernel::FromRows(const std::vector<std::vector<double>>& rows) {
  Require(!rows.empty(), "kernel needs at least one row");
  const int out = static_cast<int>(rows.front().size());
  std::vector<double> flat;
  for (const auto& r : rows) {
    Require(static_cast<int>(r.size()) == out, "ragged kernel rows");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return Kernel(static_cast<int>(rows.size()), out, std::move(flat));
}

Kernel Kernel::Identity(int size) {
  std::vector<double> flat(static_cast<std::size_t>(size) * size, 0.0);
  for (int i = 0; i < size; ++i) flat[static_cast<std::size_t>(i) * size + i] = 1.0;
  return Kernel(size, size, std::move(flat));
}

Kernel Kernel::Constant(int input_size, const Pmf& row) {
  std::vector<double> flat;
  for (int i = 0; i < input_size; ++i) {
    flat.insert(flat.end(), row.probs().begin(), row.probs().end());
  }
  return Kernel(input_size, row.size(), std::move(flat));
}

Kernel Kernel::BinarySymmetric(double flip) {
  Require(flip >= 0.0 && flip <= 1.0, "flip probability out of [0,1]");
  return Kernel(2, 2, {1.0 - flip, flip, flip, 1.0 - flip});
}

Kernel Kernel::Conditional(const JointPmf& joint, std::string_view input_axis,
                           std::string_view output_axis) {
  const JointPmf m =
      joint.Marginal({std::string(input_axis), std::string(output_axis)});
  const int ni = m.axes()[0].size;
  const int no = m.axes()[1].size;
  std::vector<double> flat(static_cast<std::size_t>(ni) * no);
  std::vector<bool> flags(ni, false);
  for (int i = 0; i < ni; ++i) {
    long double total = 0.0L;
    for (int o = 0; o < no; ++o) total += m.data()[static_cast<std::size_t>(i) * no + o];
    for (int o = 0; o < no; ++o) {
      const std::size_t k = static_cast<std::size_t>(i) * no + o;
      flat[k] = total > 0.0L ? static_cast<double>(m.data()[k] / total)
                             : 1.0 / no;
    }
    flags[i] = !(total > 0.0L);
  }
  Kernel k(ni, no, std::move(flat));
  k.unconstrained_ = std::move(flags);
  return k;
}

// ---------------------------------------------------------------------------
// DistortionMatrix

DistortionMatrix::DistortionMatrix(int rows, int cols,
                                   std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  Require(rows_ > 0 && cols_ > 0, "distortion matrix sizes must be positive");
  Require(values_.size() == static_cast<std::size_t>(rows_) * cols_,
          "distortion matrix has the wrong length");
  for (double v : values_) {
    Require(std::isfinite(v) && v >= 0.0,
            "distortion entries must be finite and nonnegative");
  }
}

DistortionMatrix DistortionMatrix::Hamming(int size) {
  std::vector<double> v(static_cast<std::size_t>(size) * size, 1.0);
  for (int i = 0; i < size; ++i) v[static_cast<std::size_t>(i) * size + i] = 0.0;
  return DistortionMatrix(size, size, std::move(v));
}

DistortionMatrix DistortionMatrix::SquaredEmbedded(
    const std::vector<double>& points) {
  const int n = static_cast<int>(points.size());
  std::vector<double> v(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      const double diff = points[i] - points[k];
      v[static_cast<std::size_t>(i) * n + k] = diff * diff;
    }
  }
  return DistortionMatrix(n, n, std::move(v));
}

double DistortionMatrix::max() const {
  return *std::max_element(values_.begin(), values_.end());
}

// ---------------------------------------------------------------------------
// Information measures

double Entropy(const Pmf& p) {
  double h = 0.0;
  for (double v : p.probs()) h -= XLog2X(v);
  return std::max(0.0, h);
}

double Entropy(const JointPmf& joint, const AxisGroup& axes) {
  const JointPmf m = axes.empty() ? joint : joint.Marginal(axes);
  double h = 0.0;
  for (double v : m.data()) h -= XLog2X(v);
  return std::max(0.0, h);
}

double MutualInformation(const JointPmf& joint) {
  Require(joint.rank() == 2, "mutual information needs exactly two axes");
  return MutualInformation(joint, {joint.axes()[0].name},
                           {joint.axes()[1].name});
}

double MutualInformation(const JointPmf& joint, const AxisGroup& a,
                         const AxisGroup& b) {
  return ConditionalMutualInformation(joint, a, b, {});
}

double ConditionalMutualInformation(const JointPmf& joint) {
  Require(joint.rank() == 3,
          "conditional mutual information needs exactly three axes");
  return ConditionalMutualInformation(joint, {joint.axes()[0].name},
                                      {joint.axes()[1].name},
                                      {joint.axes()[2].name});
}

// Computed directly as D(P_ABC || P_C P_A|C P_B|C) so that exact conditional
// independence yields an exact zero rather than a cancellation residue.
double ConditionalMutualInformation(const JointPmf& joint, const AxisGroup& a,
                                    const AxisGroup& b, const AxisGroup& c) {
  Require(!a.empty() && !b.empty(), "information groups must be nonempty");
  const Grouped g = Group(joint, a, b, c);
  std::vector<double> pac(static_cast<std::size_t>(g.na) * g.nc, 0.0);
  std::vector<double> pbc(static_cast<std::size_t>(g.nb) * g.nc, 0.0);
  std::vector<double> pc(g.nc, 0.0);
  for (int i = 0; i < g.na; ++i) {
    for (int k = 0; k < g.nb; ++k) {
      for (int l = 0; l < g.nc; ++l) {
        const double p = g.at(i, k, l);
        pac[static_cast<std::size_t>(i) * g.nc + l] += p;
        pbc[static_cast<std::size_t>(k) * g.nc + l] += p;
        pc[l] += p;
      }
    }
  }
  double total = 0.0;
  for (int i = 0; i < g.na; ++i) {
    for (int k = 0; k < g.nb; ++k) {
      for (int l = 0; l < g.nc; ++l) {
        const double p = g.at(i, k, l);
        if (p <= 0.0) continue;
        const double q = pac[static_cast<std::size_t>(i) * g.nc + l] *
                         pbc[static_cast<std::size_t>(k) * g.nc + l];
        total += p * std::log2(p * pc[l] / q);
      }
    }
  }
  return std::max(0.0, total);
}

double TvDistance(std::span<const double> p, std::span<const double> q) {
  Require(p.size() == q.size(), "total variation needs equal shapes");
  long double sum = 0.0L;
  for (std::size_t i = 0; i < p.size(); ++i) {
    sum += std::fabs(p[i] - q[i]);
  }
  return std::min(1.0, static_cast<double>(sum / 2.0L));
}

double TvDistance(const Pmf& p, const Pmf& q) {
  return TvDistance(p.probs(), q.probs());
}

double TvDistance(const JointPmf& p, const JointPmf& q) {
  Require(p.rank() == q.rank(), "total variation needs equal shapes");
  for (int i = 0; i < p.rank(); ++i) {
    Require(p.axes()[i].size == q.axes()[i].size,
            "total variation needs equal shapes");
  }
  return TvDistance(p.data(), q.data());
}

// ---------------------------------------------------------------------------
// Products and averages

JointPmf ProductPower(const JointPmf& p, int n) {
  Require(n >= 1, "product power needs n >= 1");
  CheckCap(std::pow(static_cast<double>(p.size()), n), "product power");
  std::vector<Axis> axes;
  for (int t = 1; t <= n; ++t) {
    for (const auto& a : p.axes()) {
      axes.push_back({a.name + std::to_string(t), a.size});
    }
  }
  std::vector<double> data = {1.0};
  for (int t = 0; t < n; ++t) {
    std::vector<double> next;
    next.reserve(data.size() * p.size());
    for (double prefix : data) {
      for (double v : p.data()) next.push_back(prefix * v);
    }
    data = std::move(next);
  }
  return JointPmf(std::move(axes), std::move(data));
}

JointPmf ProductPower(const Pmf& p, int n, const std::string& name) {
  return ProductPower(JointPmf::FromPmf(p, name), n);
}

JointPmf AverageEmpirical(const JointPmf& block, int n) {
  Require(n >= 1 && block.rank() % n == 0,
          "axes do not decompose into n letters");
  const int k = block.rank() / n;
  for (int t = 1; t < n; ++t) {
    for (int i = 0; i < k; ++i) {
      Require(block.axes()[t * k + i].size == block.axes()[i].size,
              "letters have mismatched alphabets");
    }
  }
  std::vector<Axis> axes(block.axes().begin(), block.axes().begin() + k);
  for (auto& a : axes) {
    while (!a.name.empty() && std::isdigit(static_cast<unsigned char>(a.name.back()))) {
      a.name.pop_back();
    }
  }
  std::size_t letter_size = 1;
  for (const auto& a : axes) letter_size *= a.size;
  std::vector<long double> acc(letter_size, 0.0L);
  for (int t = 0; t < n; ++t) {
    AxisGroup names;
    for (int i = 0; i < k; ++i) names.push_back(block.axes()[t * k + i].name);
    const JointPmf m = block.Marginal(names);
    for (std::size_t s = 0; s < letter_size; ++s) acc[s] += m.data()[s];
  }
  std::vector<double> data(letter_size);
  for (std::size_t s = 0; s < letter_size; ++s) {
    data[s] = static_cast<double>(acc[s] / n);
  }
  return JointPmf(std::move(axes), std::move(data));
}

double ExpectedDistortion(const JointPmf& joint, const DistortionMatrix& d) {
  Require(joint.rank() % 2 == 0, "distortion needs (X,Y) letter pairs");
  const int n = joint.rank() / 2;
  for (int t = 0; t < n; ++t) {
    Require(joint.axes()[2 * t].size == d.rows() &&
                joint.axes()[2 * t + 1].size == d.cols(),
            "distortion matrix does not match the alphabets");
  }
  long double total = 0.0L;
  for (int t = 0; t < n; ++t) {
    const JointPmf m = n == 1 ? joint
                              : joint.Marginal({joint.axes()[2 * t].name,
                                                joint.axes()[2 * t + 1].name});
    for (int x = 0; x < d.rows(); ++x) {
      for (int y = 0; y < d.cols(); ++y) {
        total += m.data()[static_cast<std::size_t>(x) * d.cols() + y] * d(x, y);
      }
    }
  }
  return static_cast<double>(total / n);
}

JointPmf KernelCompose(const JointPmf& p, const Kernel& kernel,
                       std::string_view input_axis, std::string new_axis) {
  const int k = p.AxisIndex(input_axis);
  Require(p.axes()[k].size == kernel.input_size(),
          "kernel input size does not match axis '" + std::string(input_axis) +
              "'");
  Require(!p.HasAxis(new_axis), "axis '" + new_axis + "' already exists");
  const std::size_t stride = p.Strides()[k];
  const int in_size = p.axes()[k].size;
  const int out_size = kernel.output_size();
  CheckCap(static_cast<double>(p.size()) * out_size, "kernel compose");
  std::vector<double> data;
  data.reserve(p.size() * out_size);
  for (std::size_t flat = 0; flat < p.size(); ++flat) {
    const int in = static_cast<int>((flat / stride) % in_size);
    const auto row = kernel.Row(in);
    for (int o = 0; o < out_size; ++o) data.push_back(p.data()[flat] * row[o]);
  }
  std::vector<Axis> axes = p.axes();
  axes.push_back({std::move(new_axis), out_size});
  return JointPmf(std::move(axes), std::move(data));
}

JointPmf Condition(const JointPmf& joint, std::string_view axis, int value) {
  const int k = joint.AxisIndex(axis);
  Require(joint.rank() >= 2, "conditioning would leave no axes");
  Require(value >= 0 && value < joint.axes()[k].size,
          "conditioning value out of range");
  const std::size_t stride = joint.Strides()[k];
  const int size = joint.axes()[k].size;
  std::vector<double> kept;
  long double total = 0.0L;
  for (std::size_t flat = 0; flat < joint.size(); ++flat) {
    if (static_cast<int>((flat / stride) % size) != value) continue;
    kept.push_back(joint.data()[flat]);
    total += joint.data()[flat];
  }
  if (!(total > 0.0L)) {
    Fail(ErrorCode::kInvalidArgument,
         "conditioning on a null event " + std::string(axis) + "=" +
             std::to_string(value));
  }
  for (double& v : kept) v = static_cast<double>(v / total);
  std::vector<Axis> axes = joint.axes();
  axes.erase(axes.begin() + k);
  return JointPmf(std::move(axes), std::move(kept));
}

}  // namespace rdplab
