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

#include "qwsample/rejection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string_view>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "parallel.hpp"

namespace qws {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

class Digest {
 public:
  void add(double v) { add_bytes(&v, sizeof v); }
  void add(std::uint64_t v) { add_bytes(&v, sizeof v); }
  void add(const HermitianMatrix& h) {
    add(static_cast<std::uint64_t>(h.dim()));
    for (double v : h.to_layout()) add(v);
  }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
    return buf;
  }

 private:
  void add_bytes(const void* p, std::size_t n) {
    h_ ^= fnv1a64(std::string_view(static_cast<const char*>(p), n));
    h_ *= 0x100000001B3ull;
  }
  std::uint64_t h_ = 0xCBF29CE484222325ull;
};

double accept_uniform(std::uint64_t key, std::uint64_t index) {
  RngStream rng(key, index);
  return rng.uniform();
}
}  // namespace

double AcceptanceReport::standard_error() const {
  if (proposed == 0) return 0.0;
  return std::sqrt(p_acc * (1.0 - p_acc) / static_cast<double>(proposed));
}

std::string spec_digest(const ProposalSpec& spec) {
  Digest d;
  d.add(static_cast<std::uint64_t>(spec.n()));
  d.add(spec.wishart().sigma());
  d.add(spec.delta_rho());
  d.add(spec.kappa());
  d.add(static_cast<std::uint64_t>(spec.split() == SplitMode::kExactCount ? 0 : 1));
  return d.hex();
}

std::string spec_digest(const TargetSpec& spec) {
  Digest d;
  for (const auto& e : spec.pom().effects()) d.add(e);
  for (double v : spec.counts().nu) d.add(v);
  return d.hex();
}

double log_ratio(const HermitianMatrix& rho, double log_g, bool physical, const TargetSpec& target) {
  if (!physical) return kNegInf;
  const double lf = log_target_density_trusted(rho, target);
  if (lf == kNegInf) return kNegInf;
  return lf - log_g;
}

double compute_bound_C(const ProposalSample& proposal, const TargetSpec& target) {
  require(proposal.size() > 0, ErrorCode::kInvalidArgument, "empty proposal sample");
  double best = kNegInf;
  for (std::size_t i = 0; i < proposal.size(); ++i)
    best = std::max(best, log_ratio(proposal.states[i], proposal.log_g[i], proposal.physical[i] != 0, target));
  require(best > kNegInf, ErrorCode::kInvalidArgument, "no proposal entry has positive target density");
  return best;
}

RejectionResult rejection_sample(const ProposalSample& proposal, const TargetSpec& target, double log_C,
                                 std::uint64_t seed) {
  RejectionResult r;
  r.sample.m = proposal.m;
  r.sample.seed = seed;
  r.sample.target_digest = spec_digest(target);
  r.report.log_C = log_C;
  r.report.proposed = proposal.size();
  const std::uint64_t key = derive_key(seed, "accept");
  for (std::size_t i = 0; i < proposal.size(); ++i) {
    if (proposal.physical[i]) ++r.report.physical;
    const double lr = log_ratio(proposal.states[i], proposal.log_g[i], proposal.physical[i] != 0, target);
    if (lr == kNegInf) continue;
    if (accept_uniform(key, i) < std::exp(lr - log_C)) {
      r.sample.states.push_back(proposal.states[i]);
      r.sample.indices.push_back(i);
    }
  }
  r.report.accepted = r.sample.states.size();
  r.report.p_acc = r.report.proposed ? static_cast<double>(r.report.accepted) / r.report.proposed : 0.0;
  r.report.chunks.push_back({0, r.report.proposed, r.report.physical, r.report.accepted});
  return r;
}

namespace {
// Pass-1 ratios, either resident or spilled to a file chunk by chunk.
class RatioStore {
 public:
  explicit RatioStore(const std::string& path) : path_(path) {
    if (!path_.empty()) {
      out_.open(path_, std::ios::binary | std::ios::trunc);
      if (!out_) fail(ErrorCode::kIo, "cannot open ratio file " + path_);
    }
  }
  ~RatioStore() {
    if (!path_.empty()) std::remove(path_.c_str());
  }
  void append(const std::vector<double>& chunk) {
    if (path_.empty()) {
      all_.insert(all_.end(), chunk.begin(), chunk.end());
      return;
    }
    out_.write(reinterpret_cast<const char*>(chunk.data()), static_cast<std::streamsize>(chunk.size() * sizeof(double)));
    if (!out_) fail(ErrorCode::kIo, "write to ratio file " + path_ + " failed");
  }
  void rewind() {
    if (path_.empty()) return;
    out_.close();
    in_.open(path_, std::ios::binary);
    if (!in_) fail(ErrorCode::kIo, "cannot reopen ratio file " + path_);
  }
  void read(std::uint64_t begin, std::vector<double>& chunk) {
    if (path_.empty()) {
      std::copy_n(all_.begin() + static_cast<std::ptrdiff_t>(begin), chunk.size(), chunk.begin());
      return;
    }
    in_.read(reinterpret_cast<char*>(chunk.data()), static_cast<std::streamsize>(chunk.size() * sizeof(double)));
    if (!in_) fail(ErrorCode::kIo, "read from ratio file " + path_ + " failed");
  }

 private:
  std::string path_;
  std::vector<double> all_;
  std::ofstream out_;
  std::ifstream in_;
};
}  // namespace

RejectionResult sample_target(const ProposalSpec& proposal, const TargetSpec& target, const RejectionOptions& opt) {
  require(opt.total >= 1, ErrorCode::kInvalidArgument, "need at least one proposal");
  require(opt.chunk_size >= 1, ErrorCode::kInvalidArgument, "chunk size must be positive");
  require(proposal.m() == target.dim(), ErrorCode::kDimensionMismatch, "proposal and target dimensions differ");
  const ProposalGenerator gen(proposal, opt.seed, opt.total);
  RatioStore store(opt.ratio_file);
  RejectionResult r;
  AcceptanceReport& rep = r.report;
  rep.proposed = opt.total;

  // pass 1
  double log_C = kNegInf;
  std::vector<double> buf;
  for (std::uint64_t begin = 0; begin < opt.total; begin += opt.chunk_size) {
    const std::uint64_t end = std::min(opt.total, begin + opt.chunk_size);
    buf.assign(end - begin, kNegInf);
    std::vector<double> worker_max(static_cast<std::size_t>(std::max(opt.threads, 1)), kNegInf);
    std::vector<std::uint64_t> worker_phys(worker_max.size(), 0);
    detail::parallel_for(begin, end, opt.threads, [&](std::uint64_t lo, std::uint64_t hi, int w) {
      for (std::uint64_t i = lo; i < hi; ++i) {
        const ProposalDraw d = gen.draw(i);
        if (d.physical) ++worker_phys[w];
        const double lr = log_ratio(d.state, d.log_g, d.physical, target);
        buf[i - begin] = lr;
        worker_max[w] = std::max(worker_max[w], lr);
      }
    });
    ChunkAcceptance c{begin, end - begin, 0, 0};
    for (std::size_t w = 0; w < worker_max.size(); ++w) {
      log_C = std::max(log_C, worker_max[w]);
      c.physical += worker_phys[w];
    }
    rep.physical += c.physical;
    rep.chunks.push_back(c);
    store.append(buf);
  }
  require(log_C > kNegInf, ErrorCode::kInvalidArgument, "no proposal entry has positive target density");
  log_C += opt.log_C_offset;
  rep.log_C = log_C;

  // pass 2
  store.rewind();
  const std::uint64_t key = derive_key(opt.seed, "accept");
  for (auto& c : rep.chunks) {
    buf.resize(c.proposed);
    store.read(c.begin, buf);
    for (std::uint64_t j = 0; j < c.proposed; ++j) {
      if (buf[j] == kNegInf) continue;
      if (accept_uniform(key, c.begin + j) < std::exp(buf[j] - log_C)) r.sample.indices.push_back(c.begin + j);
    }
    c.accepted = 0;
  }
  for (std::uint64_t idx : r.sample.indices) {
    auto it = std::upper_bound(rep.chunks.begin(), rep.chunks.end(), idx,
                               [](std::uint64_t v, const ChunkAcceptance& c) { return v < c.begin; });
    ++std::prev(it)->accepted;
  }
  rep.accepted = r.sample.indices.size();
  rep.p_acc = static_cast<double>(rep.accepted) / static_cast<double>(rep.proposed);

  r.sample.m = proposal.m();
  r.sample.seed = opt.seed;
  r.sample.proposal_digest = spec_digest(proposal);
  r.sample.target_digest = spec_digest(target);
  if (opt.keep_states) {
    r.sample.states.resize(r.sample.indices.size());
    detail::parallel_for(0, r.sample.indices.size(), opt.threads, [&](std::uint64_t lo, std::uint64_t hi, int) {
      for (std::uint64_t j = lo; j < hi; ++j) r.sample.states[j] = gen.draw(r.sample.indices[j]).state;
    });
  }
  return r;
}

std::vector<ScanRow> acceptance_scan(const std::vector<ScanPoint>& grid, const TargetSpec& target,
                                     const QuantumState& rho_ml, const RejectionOptions& opt) {
  require(!grid.empty(), ErrorCode::kInvalidArgument, "empty scan grid");
  RejectionOptions o = opt;
  o.keep_states = false;
  std::vector<ScanRow> rows;
  std::size_t best = 0;
  for (const auto& pt : grid) {
    const ProposalSpec spec = proposal_from_estimate(rho_ml, pt.n, pt.kappa, pt.x1, pt.x2);
    const RejectionResult r = sample_target(spec, target, o);
    ScanRow row{pt, r.report.p_acc, r.report.standard_error(), r.report.accepted, r.report.proposed, r.report.log_C,
                false};
    rows.push_back(row);
    if (row.p_acc > rows[best].p_acc) best = rows.size() - 1;
  }
  rows[best].best = true;
  return rows;
}

SliceResult line_slice_acceptance(const HermitianMatrix& rho0, const HermitianMatrix& direction, double t_lo,
                                  double t_hi, const TargetSpec& target, const ProposalSpec& proposal) {
  require(t_hi > t_lo, ErrorCode::kInvalidArgument, "empty slice interval");
  require(std::abs(rho0.trace() - 1.0) <= kTraceTolerance && std::abs(direction.trace()) <= kTraceTolerance,
          ErrorCode::kInvalidArgument, "slice must stay in the unit-trace plane");
  auto at = [&](double t) { return rho0 + direction * t; };
  auto lf = [&](double t) { return log_target_density(at(t), target); };
  auto lg = [&](double t) { return log_proposal_density(at(t), proposal); };

  constexpr int kGrid = 4000;
  SliceResult res;
  res.log_f_ref = kNegInf;
  res.log_g_ref = kNegInf;
  double best = kNegInf;
  int best_i = -1;
  for (int i = 0; i <= kGrid; ++i) {
    const double t = t_lo + (t_hi - t_lo) * i / kGrid;
    const double f = lf(t);
    const double g = lg(t);
    res.log_f_ref = std::max(res.log_f_ref, f);
    res.log_g_ref = std::max(res.log_g_ref, g);
    if (f == kNegInf) continue;
    if (g == kNegInf) fail(ErrorCode::kNumerical, "proposal vanishes where the target does not");
    if (f - g > best) {
      best = f - g;
      best_i = i;
    }
  }
  if (res.log_g_ref == kNegInf) fail(ErrorCode::kNumerical, "proposal vanishes on the whole line");
  if (best_i < 0) return res;
  // refine the maximum of log f - log g around the best grid point
  const double h = (t_hi - t_lo) / kGrid;
  const double a = std::max(t_lo, t_lo + h * (best_i - 1));
  const double b = std::min(t_hi, t_lo + h * (best_i + 1));
  auto neg = [&](double t) {
    const double f = lf(t);
    return f == kNegInf ? std::numeric_limits<double>::max() : -(f - lg(t));
  };
  const auto mn = boost::math::tools::brent_find_minima(neg, a, b, 52);
  res.t_at_max = t_lo + h * best_i;
  res.log_max_ratio = best;
  if (-mn.second > best) {
    res.log_max_ratio = -mn.second;
    res.t_at_max = mn.first;
  }

  using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
  auto fi = [&](double t) {
    const double v = lf(t);
    return v == kNegInf ? 0.0 : std::exp(v - res.log_f_ref);
  };
  auto gi = [&](double t) {
    const double v = lg(t);
    return v == kNegInf ? 0.0 : std::exp(v - res.log_g_ref);
  };
  res.integral_f = Quad::integrate(fi, t_lo, t_hi, 20, 1e-11);
  res.integral_g = Quad::integrate(gi, t_lo, t_hi, 20, 1e-11);
  res.p_e = std::exp(res.log_f_ref - res.log_g_ref - res.log_max_ratio) * res.integral_f / res.integral_g;
  return res;
}

SliceResult line_slice_acceptance(const BlochVector& e, const TargetSpec& target, const ProposalSpec& proposal) {
  require(target.dim() == 2, ErrorCode::kInvalidDimension, "Bloch diameters need m = 2");
  const double len = e.length();
  require(len > 0.0, ErrorCode::kInvalidArgument, "direction must be nonzero");
  const BlochVector u{e.x / len, e.y / len, e.z / len};
  const HermitianMatrix center = HermitianMatrix::identity(2) * 0.5;
  const HermitianMatrix dir = from_bloch(u) - center;
  return line_slice_acceptance(center, dir, -1.0, 1.0, target, proposal);
}

}  // namespace qws
