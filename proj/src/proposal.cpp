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

#include "qwsample/proposal.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>

#include "parallel.hpp"

namespace qws {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kMinPeakEigenvalue = 1e-9;

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double mixture(double log_gs, bool physical, const ProposalSpec& spec) {
  const double k = spec.kappa();
  const double shifted = k < 1.0 ? std::log1p(-k) + log_gs : kNegInf;
  const double uniform = physical ? std::log(k) - spec.log_hs_volume() : kNegInf;
  return log_add(shifted, uniform);
}
}  // namespace

double cholesky_log_det(const HermitianMatrix& h) {
  Eigen::LLT<CMatrix> llt(h.matrix());
  if (llt.info() != Eigen::Success) return kNegInf;
  double s = 0.0;
  const auto& l = llt.matrixLLT();
  for (int i = 0; i < h.dim(); ++i) {
    const double d = l(i, i).real();
    if (!(d > 0.0)) return kNegInf;
    s += std::log(d);
  }
  return 2.0 * s;
}

bool is_physical(const HermitianMatrix& rho) {
  Eigen::LLT<CMatrix> llt(rho.matrix());
  if (llt.info() == Eigen::Success) return true;
  return is_psd(rho);
}

HermitianMatrix covariance_for_peak(const QuantumState& rho_peak, int n) {
  const int m = rho_peak.dim();
  if (n < m) fail(ErrorCode::kInvalidArgument, "covariance needs n >= m, got n = " + std::to_string(n));
  if (n == m) return HermitianMatrix::identity(m);
  const double lmin = min_eigenvalue(rho_peak.matrix());
  if (!(lmin > kMinPeakEigenvalue))
    fail(ErrorCode::kNotPositive, "peak state is rank deficient (min eigenvalue " + std::to_string(lmin) +
                                      "); choose a full-rank peak and reach the target with a shift");
  const double a = static_cast<double>(m) * m / (n - m);
  return inverse(inverse(rho_peak.matrix()) + HermitianMatrix::identity(m) * a);
}

ShapeMatrix shape_matrix_G(const QuantumState& rho_peak, int n, const TracelessBasis& basis) {
  const int m = rho_peak.dim();
  if (basis.dim() != m) fail(ErrorCode::kDimensionMismatch, "basis and state dimensions differ");
  if (n <= m) fail(ErrorCode::kInvalidArgument, "peak shape needs n > m");
  if (!(min_eigenvalue(rho_peak.matrix()) > kMinPeakEigenvalue))
    fail(ErrorCode::kNotPositive, "peak state is singular");
  const CMatrix rinv = inverse(rho_peak.matrix()).matrix();
  const auto size = static_cast<Eigen::Index>(basis.size());
  std::vector<CMatrix> mb(basis.size());
  RealVector t(size);
  for (Eigen::Index l = 0; l < size; ++l) {
    mb[l] = rinv * basis[l].matrix();
    t(l) = mb[l].trace().real();
  }
  const double nm = n - m;
  ShapeMatrix g(size, size);
  for (Eigen::Index l = 0; l < size; ++l) {
    for (Eigen::Index k = l; k < size; ++k) {
      const double tt = (mb[l] * mb[k]).trace().real();
      g(l, k) = g(k, l) = nm * tt - nm * nm / (static_cast<double>(m) * n) * t(l) * t(k);
    }
  }
  return g;
}

FwhmResult fwhm_longitudinal(int m, int n, double z_peak) {
  int k = 0;
  while ((1 << k) < m) ++k;
  if (m < 2 || (1 << k) != m) fail(ErrorCode::kInvalidDimension, "the slice family needs m = 2^k");
  if (n <= m) fail(ErrorCode::kInvalidArgument, "FWHM needs n > m");
  if (!(std::abs(z_peak) < 1.0)) fail(ErrorCode::kInvalidArgument, "z_peak must lie in (-1, 1)");

  FwhmResult r;
  r.approx = 2.0 / m * (1.0 - z_peak * z_peak) *
             std::sqrt(std::log(4.0) / ((n - m) * (1.0 + m * z_peak * z_peak / n)));

  const HermitianMatrix z = sigma_z_power(k);
  const HermitianMatrix one = HermitianMatrix::identity(m);
  const QuantumState peak((one + z * z_peak) * (1.0 / m));
  const WishartParams w(n, covariance_for_peak(peak, n));
  const double sq = std::sqrt(static_cast<double>(m));
  const double half = log_wishart_density(peak, w) - std::log(2.0);
  auto above = [&](double eps) { return log_wishart_density(peak.matrix() + z * (eps / sq), w) > half; };
  // Slice leaves the state space at z_peak + eps sqrt(m) = +-1.
  auto edge = [&](double inside, double outside) {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (inside + outside);
      (above(mid) ? inside : outside) = mid;
      if (std::abs(outside - inside) < 1e-15) break;
    }
    return 0.5 * (inside + outside);
  };
  const double up = edge(0.0, (1.0 - z_peak) / sq);
  const double down = edge(0.0, -(1.0 + z_peak) / sq);
  r.exact = up - down;
  return r;
}

ProposalSpec::ProposalSpec(WishartParams wishart, HermitianMatrix delta_rho, double kappa, SplitMode split)
    : wishart_(std::move(wishart)), delta_(std::move(delta_rho)), kappa_(kappa), split_(split) {
  if (delta_.dim() != wishart_.m()) fail(ErrorCode::kDimensionMismatch, "shift and covariance dimensions differ");
  if (!(std::abs(delta_.trace()) <= kTraceTolerance)) fail(ErrorCode::kInvalidArgument, "shift is not traceless");
  if (!(kappa_ >= 0.0 && kappa_ <= 1.0)) fail(ErrorCode::kInvalidArgument, "kappa must lie in [0, 1]");
  shifted_ = delta_.frobenius_norm() > 0.0;
  log_volume_ = qws::log_hs_volume(wishart_.m());
}

std::uint64_t ProposalSpec::uniform_count(std::uint64_t total) const {
  if (kappa_ >= 1.0) return total;
  const double x = kappa_ * static_cast<double>(total);
  const double r = std::round(x);
  // kappa N that is integral up to rounding counts as integral
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, x)) return static_cast<std::uint64_t>(r);
  return static_cast<std::uint64_t>(std::floor(x));
}

ProposalSpec proposal_from_estimate(const QuantumState& rho_ml, int n, double kappa, double x1, double x2,
                                    SplitMode split) {
  const int m = rho_ml.dim();
  const HermitianMatrix mixed = HermitianMatrix::identity(m) * (1.0 / m);
  HermitianMatrix sigma = HermitianMatrix::identity(m);
  if (x1 != 0.0 && n > m) sigma = covariance_for_peak(QuantumState(rho_ml.matrix() * x1 + mixed * (1.0 - x1)), n);
  HermitianMatrix delta = (rho_ml.matrix() - mixed) * x2;
  return ProposalSpec(WishartParams(n, std::move(sigma)), std::move(delta), kappa, split);
}

double log_proposal_density(const HermitianMatrix& rho, const ProposalSpec& spec) {
  if (rho.dim() != spec.m()) fail(ErrorCode::kDimensionMismatch, "state and proposal dimensions differ");
  const bool physical = is_psd(rho);
  const double lgs = log_wishart_density(spec.has_shift() ? rho - spec.delta_rho() : rho, spec.wishart());
  return mixture(lgs, physical, spec);
}

ProposalGenerator::ProposalGenerator(const ProposalSpec& spec, std::uint64_t seed, std::uint64_t total)
    : spec_(spec),
      uniform_(WishartParams::identity(spec.m(), spec.m())),
      total_(total),
      n_uniform_(spec.split() == SplitMode::kExactCount ? spec.uniform_count(total) : 0),
      key_wishart_(derive_key(seed, "proposal")),
      key_uniform_(derive_key(seed, "uniform")),
      key_lottery_(derive_key(seed, "lottery")) {}

bool ProposalGenerator::is_uniform(std::uint64_t index) const {
  if (spec_.split() == SplitMode::kExactCount) return index >= total_ - n_uniform_;
  if (spec_.kappa() <= 0.0) return false;
  if (spec_.kappa() >= 1.0) return true;
  RngStream lottery(key_lottery_, index);
  return lottery.uniform() < spec_.kappa();
}

void ProposalGenerator::annotate(ProposalDraw& d, const HermitianMatrix& pre, double pre_log_det) const {
  const WishartParams& w = spec_.wishart();
  bool ok = pre_log_det > kNegInf;
  if (!ok && w.n() == w.m()) ok = is_psd(pre);
  const double lgs = ok ? log_wishart_density_trusted(pre, pre_log_det, w) : kNegInf;
  d.log_g = mixture(lgs, d.physical, spec_);
}

ProposalDraw ProposalGenerator::draw(std::uint64_t index) const {
  ProposalDraw d;
  if (is_uniform(index)) {
    RngStream rng(key_uniform_, index);
    d.state = sample_wishart_state(uniform_, rng).matrix();
    d.uniform_component = true;
    d.physical = true;
    if (spec_.kappa() >= 1.0) {
      d.log_g = -spec_.log_hs_volume();
      return d;
    }
    const HermitianMatrix pre = spec_.has_shift() ? d.state - spec_.delta_rho() : d.state;
    annotate(d, pre, cholesky_log_det(pre));
    return d;
  }
  RngStream rng(key_wishart_, index);
  HermitianMatrix pre = sample_wishart_state(spec_.wishart(), rng).matrix();
  const double ld = cholesky_log_det(pre);
  if (spec_.has_shift()) {
    d.state = pre + spec_.delta_rho();
    d.physical = is_physical(d.state);
  } else {
    d.state = pre;
    d.physical = true;
  }
  annotate(d, pre, ld);
  return d;
}

ProposalSample build_proposal_sample(const ProposalSpec& spec, std::uint64_t total, std::uint64_t seed,
                                     int threads) {
  if (total < 1) fail(ErrorCode::kInvalidArgument, "proposal sample needs N >= 1");
  const ProposalGenerator gen(spec, seed, total);
  ProposalSample s;
  s.m = spec.m();
  s.states.resize(total);
  s.log_g.resize(total);
  s.physical.resize(total);
  detail::parallel_for(0, total, threads, [&](std::uint64_t lo, std::uint64_t hi, int) {
    for (std::uint64_t i = lo; i < hi; ++i) {
      ProposalDraw d = gen.draw(i);
      s.states[i] = std::move(d.state);
      s.log_g[i] = d.log_g;
      s.physical[i] = d.physical ? 1 : 0;
    }
  });
  return s;
}

ProposalSample apply_shift(ProposalSample sample, const HermitianMatrix& delta_rho) {
  if (!(std::abs(delta_rho.trace()) <= kTraceTolerance)) fail(ErrorCode::kInvalidArgument, "shift is not traceless");
  for (std::size_t i = 0; i < sample.size(); ++i) {
    sample.states[i] += delta_rho;
    sample.physical[i] = is_physical(sample.states[i]) ? 1 : 0;
  }
  return sample;
}

}  // namespace qws
