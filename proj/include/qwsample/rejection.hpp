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

// Von Neumann accept-reject from a proposal sample to the likelihood target.
// The bound C is the largest f/g over the proposal sample itself, so every
// run is two passes: ratios first, decisions second.

#include <cstdint>
#include <string>
#include <vector>

#include "qwsample/proposal.hpp"
#include "qwsample/target.hpp"

namespace qws {

struct ChunkAcceptance {
  std::uint64_t begin = 0;
  std::uint64_t proposed = 0;
  std::uint64_t physical = 0;
  std::uint64_t accepted = 0;
};

struct AcceptanceReport {
  double log_C = 0.0;
  std::uint64_t proposed = 0;
  std::uint64_t physical = 0;
  std::uint64_t accepted = 0;
  double p_acc = 0.0;
  std::vector<ChunkAcceptance> chunks;
  /// Binomial standard error of p_acc.
  double standard_error() const;
};

struct TargetSample {
  int m = 0;
  std::vector<HermitianMatrix> states;
  /// Proposal indices of the accepted entries, increasing.
  std::vector<std::uint64_t> indices;
  std::uint64_t seed = 0;
  std::string proposal_digest;
  std::string target_digest;
};

std::string spec_digest(const ProposalSpec& spec);
std::string spec_digest(const TargetSpec& spec);

/// log f - log g for a physical entry, -inf otherwise.
double log_ratio(const HermitianMatrix& rho, double log_g, bool physical, const TargetSpec& target);

/// max_i [log f(rho_i) - log g(rho_i)] over the sample.
double compute_bound_C(const ProposalSample& proposal, const TargetSpec& target);

struct RejectionResult {
  TargetSample sample;
  AcceptanceReport report;
};

/// Entry i is accepted iff u_i < exp(log f - log g - log_C), with u_i drawn
/// from the accept substream of seed at index i.
RejectionResult rejection_sample(const ProposalSample& proposal, const TargetSpec& target, double log_C,
                                 std::uint64_t seed);

struct RejectionOptions {
  std::uint64_t total = 100000;
  std::uint64_t seed = 1;
  int threads = 1;
  std::uint64_t chunk_size = std::uint64_t{1} << 20;
  /// Keep the accepted states, not only their indices.
  bool keep_states = true;
  /// Added to the sample maximum; log 2 halves the yield.
  double log_C_offset = 0.0;
  /// When set, pass-1 ratios are spilled to this file instead of memory.
  std::string ratio_file;
};

/// Streaming two-pass sampler driven by a proposal generator; states are
/// regenerated by index, so memory stays O(chunk) apart from the ratios.
RejectionResult sample_target(const ProposalSpec& proposal, const TargetSpec& target, const RejectionOptions& opt);

struct ScanPoint {
  int n = 0;
  double kappa = 0.0;
  double x1 = 0.0;
  double x2 = 0.0;
};

struct ScanRow {
  ScanPoint point;
  double p_acc = 0.0;
  double standard_error = 0.0;
  std::uint64_t accepted = 0;
  std::uint64_t proposed = 0;
  double log_C = 0.0;
  bool best = false;
};

/// Acceptance rate at each grid point, proposals built by proposal_from_estimate.
std::vector<ScanRow> acceptance_scan(const std::vector<ScanPoint>& grid, const TargetSpec& target,
                                     const QuantumState& rho_ml, const RejectionOptions& opt);

struct SliceResult {
  double p_e = 0.0;
  double log_max_ratio = 0.0;
  double t_at_max = 0.0;
  double integral_f = 0.0;  // scaled by exp(-log_f_ref)
  double integral_g = 0.0;  // scaled by exp(-log_g_ref)
  double log_f_ref = 0.0;
  double log_g_ref = 0.0;
};

/// Yield of accept-reject restricted to the line rho0 + t D, t in [t_lo, t_hi].
SliceResult line_slice_acceptance(const HermitianMatrix& rho0, const HermitianMatrix& direction, double t_lo,
                                  double t_hi, const TargetSpec& target, const ProposalSpec& proposal);
/// Qubit diameter (1 + t e.sigma)/2, -1 <= t <= 1, for a unit vector e.
SliceResult line_slice_acceptance(const BlochVector& e, const TargetSpec& target, const ProposalSpec& proposal);

}  // namespace qws
