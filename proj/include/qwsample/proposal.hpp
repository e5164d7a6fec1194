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

// The proposal distribution: a linearly shifted Wishart law with a uniform
// admixture of weight kappa.

#include <cstdint>
#include <vector>

#include "qwsample/hermitian.hpp"
#include "qwsample/wishart.hpp"

namespace qws {

/// Sigma = (rho_peak^{-1} + m^2/(n-m))^{-1} for n > m, the identity for n = m.
HermitianMatrix covariance_for_peak(const QuantumState& rho_peak, int n);

/// (m^2-1) x (m^2-1) curvature of log g at its peak, in basis coordinates.
using ShapeMatrix = RealMatrix;
ShapeMatrix shape_matrix_G(const QuantumState& rho_peak, int n, const TracelessBasis& basis);

struct FwhmResult {
  double approx = 0.0;
  double exact = 0.0;
  double relative_error() const { return approx / exact - 1.0; }
};

/// Longitudinal FWHM of the m = 2^k family peaked at (1 + z sigma_z^{(x)k})/m,
/// measured in the coordinate eps of rho_peak + eps m^{-1/2} sigma_z^{(x)k}.
FwhmResult fwhm_longitudinal(int m, int n, double z_peak);

enum class SplitMode { kExactCount, kBernoulli };

class ProposalSpec {
 public:
  ProposalSpec(WishartParams wishart, HermitianMatrix delta_rho, double kappa,
               SplitMode split = SplitMode::kExactCount);

  int m() const { return wishart_.m(); }
  int n() const { return wishart_.n(); }
  const WishartParams& wishart() const { return wishart_; }
  const HermitianMatrix& delta_rho() const { return delta_; }
  bool has_shift() const { return shifted_; }
  double kappa() const { return kappa_; }
  SplitMode split() const { return split_; }
  double log_hs_volume() const { return log_volume_; }

  /// Exact-count split: uniform draws are the last uniform_count(N) indices.
  std::uint64_t uniform_count(std::uint64_t total) const;

 private:
  WishartParams wishart_;
  HermitianMatrix delta_;
  double kappa_;
  SplitMode split_;
  bool shifted_ = false;
  double log_volume_ = 0.0;
};

/// Wishart peak at x1 rho_ml + (1-x1)/m (identity covariance when x1 = 0),
/// shifted by x2 (rho_ml - 1/m).
ProposalSpec proposal_from_estimate(const QuantumState& rho_ml, int n, double kappa, double x1, double x2,
                                    SplitMode split = SplitMode::kExactCount);

/// log of (1-kappa) g_s(rho) + kappa [rho physical] / V.
double log_proposal_density(const HermitianMatrix& rho, const ProposalSpec& spec);

struct ProposalDraw {
  HermitianMatrix state;
  double log_g = 0.0;
  bool physical = true;
  bool uniform_component = false;
};

/// Index-addressed draws: draw(i) depends only on (spec, seed, total, i).
class ProposalGenerator {
 public:
  ProposalGenerator(const ProposalSpec& spec, std::uint64_t seed, std::uint64_t total);

  const ProposalSpec& spec() const { return spec_; }
  std::uint64_t total() const { return total_; }
  std::uint64_t uniform_count() const { return n_uniform_; }
  ProposalDraw draw(std::uint64_t index) const;

 private:
  bool is_uniform(std::uint64_t index) const;
  void annotate(ProposalDraw& d, const HermitianMatrix& preimage, double preimage_log_det) const;

  ProposalSpec spec_;
  WishartParams uniform_;
  std::uint64_t total_;
  std::uint64_t n_uniform_;
  std::uint64_t key_wishart_;
  std::uint64_t key_uniform_;
  std::uint64_t key_lottery_;
};

struct ProposalSample {
  int m = 0;
  std::vector<HermitianMatrix> states;
  std::vector<double> log_g;
  std::vector<std::uint8_t> physical;
  std::size_t size() const { return states.size(); }
};

ProposalSample build_proposal_sample(const ProposalSpec& spec, std::uint64_t total, std::uint64_t seed,
                                     int threads = 1);

/// Moves every state by delta_rho and recomputes the physical flags. The
/// densities travel with their states since the shift preserves (d rho).
ProposalSample apply_shift(ProposalSample sample, const HermitianMatrix& delta_rho);

/// Physical within the PSD tolerance; Cholesky first, spectrum only when that fails.
bool is_physical(const HermitianMatrix& rho);
/// Log determinant by Cholesky; -inf when not positive definite.
double cholesky_log_det(const HermitianMatrix& h);

}  // namespace qws
