// Copyright 2026 The qwsample Authors
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

#include "qwsample/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace qws {

namespace {
// lambdas sorted in decreasing order with prefix sums of lambda and lambda^2
struct SortedLambdas {
  std::vector<double> v;
  std::vector<double> sum1;
  std::vector<double> sum2;

  explicit SortedLambdas(const LambdaValues& lv) : v(lv.lambdas) {
    std::sort(v.begin(), v.end(), std::greater<>());
    sum1.assign(v.size() + 1, 0.0);
    sum2.assign(v.size() + 1, 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
      sum1[i + 1] = sum1[i] + v[i];
      sum2[i + 1] = sum2[i] + v[i] * v[i];
    }
  }
  // number of entries strictly above lambda
  std::size_t above(double lambda) const {
    return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), lambda, std::greater<>()) - v.begin());
  }
};

void check_grid(const std::vector<double>& grid) {
  require(!grid.empty(), ErrorCode::kInvalidArgument, "empty lambda grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require(grid[i] >= 0.0 && grid[i] <= 1.0, ErrorCode::kInvalidArgument, "lambda grid leaves [0, 1]");
    if (i > 0) require(grid[i] > grid[i - 1], ErrorCode::kInvalidArgument, "lambda grid must increase");
  }
}

std::vector<double> trapezoid_weights(const std::vector<double>& grid) {
  std::vector<double> w(grid.size(), 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double h = 0.5 * (grid[i] - grid[i - 1]);
    w[i - 1] += h;
    w[i] += h;
  }
  return w;
}
}  // namespace

LambdaValues lambda_values(const std::vector<HermitianMatrix>& states, const TargetSpec& target, double log_f_ml) {
  LambdaValues lv;
  lv.lambdas.reserve(states.size());
  for (const auto& s : states) {
    const double lf = log_target_density(s, target);
    // clamp rounding excursions above the maximum
    lv.lambdas.push_back(std::min(1.0, std::exp(lf - log_f_ml)));
  }
  return lv;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 10; ++i) g.push_back(i / 10.0);
  return g;
}

std::vector<double> dense_lambda_grid(int points) {
  require(points >= 2, ErrorCode::kInvalidArgument, "dense grid needs at least two points");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = static_cast<double>(i) / (points - 1);
  return g;
}

std::vector<double> size_estimate(const LambdaValues& uniform, const std::vector<double>& grid) {
  check_grid(grid);
  require(uniform.size() > 0, ErrorCode::kInvalidArgument, "empty uniform sample");
  const SortedLambdas s(uniform);
  std::vector<double> out;
  for (double l : grid) out.push_back(static_cast<double>(s.above(l)) / static_cast<double>(uniform.size()));
  return out;
}

std::vector<double> credibility_from_size(const LambdaValues& uniform, const std::vector<double>& grid) {
  check_grid(grid);
  const SortedLambdas s(uniform);
  const double total = s.sum1.back();
  require(total > 0.0, ErrorCode::kInvalidArgument, "all lambda values vanish");
  std::vector<double> out;
  for (double l : grid) out.push_back(s.sum1[s.above(l)] / total);
  return out;
}

std::vector<double> credibility_estimate(const LambdaValues& target_sample, const std::vector<double>& grid) {
  return size_estimate(target_sample, grid);
}

double trapezoid(const std::vector<double>& grid, const std::vector<double>& values) {
  require(grid.size() == values.size(), ErrorCode::kDimensionMismatch, "grid and values differ in length");
  double s = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) s += 0.5 * (grid[i] - grid[i - 1]) * (values[i] + values[i - 1]);
  return s;
}

double q_statistic(const std::vector<double>& grid, const std::vector<double>& c_hat,
                   const std::vector<double>& c_ref) {
  require(c_hat.size() == grid.size() && c_ref.size() == grid.size(), ErrorCode::kDimensionMismatch,
          "credibility curves are not on the same grid");
  std::vector<double> d(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) d[i] = (c_hat[i] - c_ref[i]) * (c_hat[i] - c_ref[i]);
  return trapezoid(grid, d);
}

double QExpectation::sd() const { return std::sqrt(std::max(variance, 0.0)); }

QExpectation expected_q(const std::vector<double>& grid, const std::vector<double>& c, double n_tgt,
                        double correction) {
  check_grid(grid);
  require(c.size() == grid.size(), ErrorCode::kDimensionMismatch, "curve and grid differ in length");
  require(n_tgt > 0.0, ErrorCode::kInvalidArgument, "target sample size must be positive");
  QExpectation e;
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = c[i] * (1.0 - c[i]);
  e.integral_c1mc = trapezoid(grid, v);
  e.correction = correction;
  e.mean = e.integral_c1mc / n_tgt + correction;

  const std::vector<double> w = trapezoid_weights(grid);
  double a = 0.0;
  double b = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (w[i] == 0.0) continue;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double lo = std::min(c[i], c[j]);
      const double hi = std::max(c[i], c[j]);
      const double ww = w[i] * w[j];
      a += ww * lo * lo * (1.0 - hi) * (1.0 - hi);
      b += ww * lo * (1.0 - hi) * (1.0 - 4.0 * lo - 2.0 * hi + 6.0 * lo * hi);
    }
  }
  e.variance = 2.0 * a / (n_tgt * n_tgt) + b / (n_tgt * n_tgt * n_tgt);
  return e;
}

std::vector<double> uniform_bias_leading(const LambdaValues& uniform, const std::vector<double>& grid, double n_ufm) {
  check_grid(grid);
  require(n_ufm > 0.0, ErrorCode::kInvalidArgument, "uniform sample size must be positive");
  const SortedLambdas s(uniform);
  const double n = static_cast<double>(uniform.size());
  const double m1 = s.sum1.back() / n;
  const double m2 = s.sum2.back() / n;
  require(m1 > 0.0, ErrorCode::kInvalidArgument, "all lambda values vanish");
  std::vector<double> out;
  for (double l : grid) {
    const std::size_t k = s.above(l);
    const double c = s.sum1[k] / s.sum1.back();
    const double tail2 = s.sum2[k] / s.sum2.back();
    out.push_back(m2 / (m1 * m1) * (c - tail2) / n_ufm);
  }
  return out;
}

double ufm_deviation_estimate(const LambdaValues& uniform, const std::vector<double>& grid) {
  check_grid(grid);
  const SortedLambdas s(uniform);
  const double n = static_cast<double>(uniform.size());
  const double m1 = s.sum1.back() / n;
  const double m2 = s.sum2.back() / n;
  require(m1 > 0.0, ErrorCode::kInvalidArgument, "all lambda values vanish");
  const std::vector<double> bias = uniform_bias_leading(uniform, grid, n);
  std::vector<double> d(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::size_t k = s.above(grid[i]);
    const double c = s.sum1[k] / s.sum1.back();
    const double tail2 = s.sum2[k] / n;
    // Var(X - cY) with X = [lambda < lambda_k] lambda_k, Y = lambda_k
    const double var = ((1.0 - 2.0 * c) * tail2 + c * c * m2) / (m1 * m1) / n;
    d[i] = std::max(var, 0.0) + bias[i] * bias[i];
  }
  return trapezoid(grid, d);
}

Verdict quality_verdict(double q, double expected, double variance) {
  require(variance > 0.0, ErrorCode::kInvalidArgument, "verdict needs a positive variance");
  const double z = std::abs(q - expected) / std::sqrt(variance);
  if (z < 1.0) return Verdict::kVeryGood;
  if (z < 2.0) return Verdict::kGood;
  return Verdict::kReject;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kVeryGood:
      return "very-good";
    case Verdict::kGood:
      return "good";
    case Verdict::kReject:
      return "reject";
  }
  return "unknown";
}

}  // namespace qws
