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

#ifndef RDPLAB_PROBABILITY_H_
#define RDPLAB_PROBABILITY_H_

// Exact finite-alphabet probability algebra.
//
// Conventions used throughout the library:
//   * logarithms are base 2, so every information quantity is in bits;
//   * 0 log 0 = 0 and 0 log(0/0) = 0;
//   * tensors are stored row-major (last axis varies fastest);
//   * inputs are validated to a mass tolerance of 1e-12 and are never
//     renormalized implicitly.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rdplab {

inline constexpr double kMassTolerance = 1e-12;

// Largest number of states any single enumeration may materialize. Defaults
// to 2^20; the RDPLAB_CAP environment variable overrides the default.
std::uint64_t EnumerationCap();
void SetEnumerationCap(std::uint64_t cap);
// Throws kCapExceeded when `states` exceeds the cap.
void CheckCap(double states, const std::string& what);

class Pmf {
 public:
  explicit Pmf(std::vector<double> probs);

  static Pmf Uniform(int size);
  static Pmf PointMass(int size, int at);
  static Pmf Bernoulli(double p_one);

  int size() const { return static_cast<int>(probs_.size()); }
  double operator[](int i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }

  bool operator==(const Pmf&) const = default;

 private:
  std::vector<double> probs_;
};

struct Axis {
  std::string name;
  int size = 0;

  bool operator==(const Axis&) const = default;
};

using AxisGroup = std::vector<std::string>;

class JointPmf {
 public:
  JointPmf(std::vector<Axis> axes, std::vector<double> data);

  static JointPmf FromPmf(const Pmf& pmf, std::string name);

  const std::vector<Axis>& axes() const { return axes_; }
  int rank() const { return static_cast<int>(axes_.size()); }
  std::size_t size() const { return data_.size(); }
  std::span<const double> data() const { return data_; }

  int AxisIndex(std::string_view name) const;
  bool HasAxis(std::string_view name) const;
  const Axis& axis(std::string_view name) const {
    return axes_[AxisIndex(name)];
  }
  std::vector<std::size_t> Strides() const;

  double at(std::initializer_list<int> index) const;

  // Marginal over `keep`, with axes in the order listed.
  JointPmf Marginal(const AxisGroup& keep) const;
  // Same tensor with every axis renamed in order.
  JointPmf Renamed(const std::vector<std::string>& names) const;
  // Rank-1 view as a Pmf.
  Pmf ToPmf() const;

  bool operator==(const JointPmf&) const = default;

 private:
  std::vector<Axis> axes_;
  std::vector<double> data_;
};

class Kernel {
 public:
  // Row-major |input| x |output| table; every row must be a pmf.
  Kernel(int input_size, int output_size, std::vector<double> rows);

  static Kernel FromRows(const std::vector<std::vector<double>>& rows);
  static Kernel Identity(int size);
  static Kernel Constant(int input_size, const Pmf& row);
  static Kernel BinarySymmetric(double flip);
  // Conditional law of `output_axis` given `input_axis`. Inputs with zero
  // probability receive a uniform row flagged as unconstrained.
  static Kernel Conditional(const JointPmf& joint, std::string_view input_axis,
                            std::string_view output_axis);

  int input_size() const { return input_size_; }
  int output_size() const { return output_size_; }
  double operator()(int in, int out) const {
    return rows_[static_cast<std::size_t>(in) * output_size_ + out];
  }
  std::span<const double> Row(int in) const {
    return std::span<const double>(rows_).subspan(
        static_cast<std::size_t>(in) * output_size_, output_size_);
  }
  std::span<const double> data() const { return rows_; }
  bool unconstrained(int in) const { return unconstrained_[in]; }

 private:
  int input_size_;
  int output_size_;
  std::vector<double> rows_;
  std::vector<bool> unconstrained_;
};

class DistortionMatrix {
 public:
  DistortionMatrix(int rows, int cols, std::vector<double> values);

  static DistortionMatrix Hamming(int size);
  // d(x, y) = (a_x - a_y)^2 for reproduction points a.
  static DistortionMatrix SquaredEmbedded(const std::vector<double>& points);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double operator()(int x, int y) const {
    return values_[static_cast<std::size_t>(x) * cols_ + y];
  }
  std::span<const double> data() const { return values_; }
  double max() const;

 private:
  int rows_;
  int cols_;
  std::vector<double> values_;
};

double Entropy(const Pmf& p);
// Joint entropy of the listed axes (all axes when empty).
double Entropy(const JointPmf& joint, const AxisGroup& axes = {});

// I(A;B) for a two-axis joint.
double MutualInformation(const JointPmf& joint);
double MutualInformation(const JointPmf& joint, const AxisGroup& a,
                         const AxisGroup& b);

// I(A;B|C) for a three-axis joint ordered (A, B, C).
double ConditionalMutualInformation(const JointPmf& joint);
double ConditionalMutualInformation(const JointPmf& joint, const AxisGroup& a,
                                    const AxisGroup& b, const AxisGroup& c);

double TvDistance(std::span<const double> p, std::span<const double> q);
double TvDistance(const Pmf& p, const Pmf& q);
// Axes sizes must agree position by position; names are not compared.
double TvDistance(const JointPmf& p, const JointPmf& q);

// p^{(x)n}. Axes are interleaved by time: (A1, B1, A2, B2, ...).
JointPmf ProductPower(const JointPmf& p, int n);
JointPmf ProductPower(const Pmf& p, int n, const std::string& name = "x");

// (1/n) sum_t P_{W_t} for a joint whose axes are n time-interleaved blocks
// of identically sized letters. Output axes take the first block's names
// with any trailing digits removed.
JointPmf AverageEmpirical(const JointPmf& block, int n);

// E[d(X,Y)] for a two-axis joint, or the block average
// E[(1/n) sum_t d(X_t,Y_t)] for 2n time-interleaved axes (X1,Y1,X2,Y2,...).
double ExpectedDistortion(const JointPmf& joint, const DistortionMatrix& d);

// Appends an axis `new_axis` drawn from `kernel` given `input_axis`.
JointPmf KernelCompose(const JointPmf& p, const Kernel& kernel,
                       std::string_view input_axis, std::string new_axis);

// Law of the remaining axes given axis == value.
JointPmf Condition(const JointPmf& joint, std::string_view axis, int value);

}  // namespace rdplab

#endif  // RDPLAB_PROBABILITY_H_
