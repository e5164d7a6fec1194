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

#pragma once

// Sample verification through bounded-likelihood regions: size s_lambda from
// a uniform sample, credibility c_lambda from the target sample, and the Q
// statistic comparing the two.

#include <cstdint>
#include <vector>

#include "qwsample/hermitian.hpp"
#include "qwsample/target.hpp"

namespace qws {

/// lambda_k = f(rho_k) / f(rho_ML), each in [0, 1].
struct LambdaValues {
  std::vector<double> lambdas;
  std::size_t size() const { return lambdas.size(); }
};

LambdaValues lambda_values(const std::vector<HermitianMatrix>& states, const TargetSpec& target, double log_f_ml);

/// 0, 0.1, ..., 1.
std::vector<double> default_lambda_grid();
/// points equally spaced values on [0, 1].
std::vector<double> dense_lambda_grid(int points = 1001);

/// Fraction of lambda_k strictly above each grid value.
std::vector<double> size_estimate(const LambdaValues& uniform, const std::vector<double>& grid);
/// sum_k [lambda < lambda_k] lambda_k / sum_l lambda_l, the exact empirical form.
std::vector<double> credibility_from_size(const LambdaValues& uniform, const std::vector<double>& grid);
/// Fraction of target-sample entries inside each region.
std::vector<double> credibility_estimate(const LambdaValues& target_sample, const std::vector<double>& grid);

/// Trapezoid rule on an increasing grid.
double trapezoid(const std::vector<double>& grid, const std::vector<double>& values);

/// Integral of (c_hat - c_ref)^2.
double q_statistic(const std::vector<double>& grid, const std::vector<double>& c_hat,
                   const std::vector<double>& c_ref);

struct QExpectation {
  double integral_c1mc = 0.0;  // integral of c (1 - c)
  double correction = 0.0;     // integral of (c_ufm - c)^2, independent of N_tgt
  double mean = 0.0;
  double variance = 0.0;
  double sd() const;
};

QExpectation expected_q(const std::vector<double>& grid, const std::vector<double>& c_ref, double n_tgt,
                        double correction = 0.0);

/// Estimate of the integral of (c_ufm - c)^2 from the uniform sample itself:
/// delta-method variance of the ratio estimator plus the squared leading bias.
double ufm_deviation_estimate(const LambdaValues& uniform, const std::vector<double>& grid);

/// Leading 1/N_ufm bias of the uniform-reference credibility at each grid value.
std::vector<double> uniform_bias_leading(const LambdaValues& uniform, const std::vector<double>& grid, double n_ufm);

enum class Verdict { kVeryGood, kGood, kReject };
Verdict quality_verdict(double q, double expected, double variance);
const char* to_string(Verdict v);

struct CredibilityCurve {
  std::vector<double> grid;
  std::vector<double> s;
  std::vector<double> c_ref;
  std::vector<double> c_hat;
  std::uint64_t n_ufm = 0;
  std::uint64_t n_tgt = 0;
};

}  // namespace qws
