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

// Measurement models and the likelihood target f(rho) = prod_k p_k^nu_k.

#include <string>
#include <string_view>
#include <vector>

#include "qwsample/hermitian.hpp"

namespace qws {

inline constexpr double kCompletenessTolerance = 1e-10;

/// Probability-operator measurement {Pi_k}, PSD effects summing to 1.
class Pom {
 public:
  explicit Pom(std::vector<HermitianMatrix> effects);

  /// Single-qubit tetrahedron.
  static Pom tetrahedron();
  /// k-fold tensor power of the tetrahedron, m = 2^k, K = 4^k.
  static Pom tetra_power(int k);
  /// "tetra" or "tetra^k".
  static Pom from_name(std::string_view name);

  int dim() const { return dim_; }
  std::size_t size() const { return effects_.size(); }
  const std::vector<HermitianMatrix>& effects() const { return effects_; }
  const HermitianMatrix& operator[](std::size_t k) const { return effects_[k]; }
  /// K x m^2 matrix A with p = A * layout(rho).
  const RealMatrix& born_matrix() const { return born_; }

 private:
  int dim_;
  std::vector<HermitianMatrix> effects_;
  RealMatrix born_;
};

/// Effects a_l (x) b_j at index K_b l + j.
Pom tensor_pom(const Pom& a, const Pom& b);

struct Counts {
  std::vector<double> nu;
  double total() const;
  /// Comma and/or whitespace separated values; "v*r" repeats v r times.
  static Counts parse(std::string_view text);
};

class TargetSpec {
 public:
  TargetSpec(Pom pom, Counts counts);

  const Pom& pom() const { return pom_; }
  const Counts& counts() const { return counts_; }
  int dim() const { return pom_.dim(); }
  double total() const { return total_; }

 private:
  Pom pom_;
  Counts counts_;
  double total_;
};

RealVector born_probabilities(const HermitianMatrix& rho, const Pom& pom);
RealVector born_probabilities(const QuantumState& rho, const Pom& pom);

/// sum_k nu_k log p_k; -inf when some p_k <= 0 carries a positive count.
double log_likelihood(const RealVector& p, const Counts& counts);
/// log f(rho), unnormalized; -inf outside the state space.
double log_target_density(const HermitianMatrix& rho, const TargetSpec& spec);
double log_target_density(const QuantumState& rho, const TargetSpec& spec);
/// Caller guarantees rho is physical.
double log_target_density_trusted(const HermitianMatrix& rho, const TargetSpec& spec);

struct MlOptions {
  int max_iterations = 100000;
  /// Stop when lambda_max(R) - 1 drops below this.
  double kkt_tolerance = 1e-10;
  double rank_threshold = 1e-6;
};

struct MlResult {
  QuantumState rho_ml = QuantumState::maximally_mixed(2);
  double log_f_max = 0.0;
  int iterations = 0;
  bool converged = false;
  int rank = 0;
  Spectrum eigenvalues;
  /// Largest eigenvalue of R minus one; nonpositive up to noise at the maximum.
  double kkt_residual = 0.0;
  std::string diagnostics;
};

/// Diluted R rho R iteration.
MlResult ml_estimator(const TargetSpec& spec, const MlOptions& options = {});

/// Stationary point of log f over all unit-trace hermitian matrices.
HermitianMatrix unconstrained_peak(const TargetSpec& spec, const TracelessBasis& basis);

/// sum_k nu_k a_k a_k^T / p_k^2 with a_kl = tr(Pi_k B_l), at rho.
RealMatrix shape_matrix_F(const TargetSpec& spec, const TracelessBasis& basis, const HermitianMatrix& rho);
/// Same, evaluated at the unconstrained peak.
RealMatrix shape_matrix_F(const TargetSpec& spec, const TracelessBasis& basis);

/// True when some state reproduces p through the Born rule.
bool is_permissible_probabilities(const RealVector& p, const Pom& pom);

}  // namespace qws
