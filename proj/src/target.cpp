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

#include "qwsample/target.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "qwsample/proposal.hpp"

namespace qws {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

RealMatrix build_born_matrix(const std::vector<HermitianMatrix>& effects, int m) {
  RealMatrix a(static_cast<Eigen::Index>(effects.size()), m * m);
  for (std::size_t k = 0; k < effects.size(); ++k) {
    const CMatrix& e = effects[k].matrix();
    Eigen::Index pos = 0;
    const auto row = static_cast<Eigen::Index>(k);
    for (int i = 0; i < m; ++i) a(row, pos++) = e(i, i).real();
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        a(row, pos++) = 2.0 * e(i, j).real();
        a(row, pos++) = 2.0 * e(i, j).imag();
      }
    }
  }
  return a;
}

// Layout of rho into a stack buffer, no allocation.
using LayoutVector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim * kMaxDim, 1>;

LayoutVector layout_of(const HermitianMatrix& rho) {
  const int m = rho.dim();
  LayoutVector x(m * m);
  rho.to_layout(std::span<double>(x.data(), static_cast<std::size_t>(x.size())));
  return x;
}

double parse_double(std::string_view tok) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    fail(ErrorCode::kInvalidArgument, "cannot parse count '" + std::string(tok) + "'");
  return v;
}
}  // namespace

Pom::Pom(std::vector<HermitianMatrix> effects) : effects_(std::move(effects)) {
  require(!effects_.empty(), ErrorCode::kInvalidArgument, "POM has no effects");
  dim_ = effects_.front().dim();
  HermitianMatrix sum(dim_);
  for (const auto& e : effects_) {
    require(e.dim() == dim_, ErrorCode::kDimensionMismatch, "POM effects differ in dimension");
    if (!is_psd(e, 1e-10)) fail(ErrorCode::kNotPositive, "POM effect is not positive semidefinite");
    sum += e;
  }
  const double dev = (sum.matrix() - CMatrix::Identity(dim_, dim_)).cwiseAbs().maxCoeff();
  if (!(dev <= kCompletenessTolerance))
    fail(ErrorCode::kInvalidArgument, "POM effects do not sum to the identity (deviation " + std::to_string(dev) + ")");
  born_ = build_born_matrix(effects_, dim_);
}

Pom Pom::tetrahedron() {
  const double s = 1.0 / std::sqrt(3.0);
  const double dirs[4][3] = {{s, -s, -s}, {-s, s, -s}, {-s, -s, s}, {s, s, s}};
  std::vector<HermitianMatrix> e;
  for (const auto& d : dirs) e.push_back(from_bloch({d[0], d[1], d[2]}) * 0.5);
  return Pom(std::move(e));
}

Pom Pom::tetra_power(int k) {
  require(k >= 1 && k <= 4, ErrorCode::kInvalidArgument, "tetra^k needs 1 <= k <= 4");
  Pom p = tetrahedron();
  for (int i = 1; i < k; ++i) p = tensor_pom(p, tetrahedron());
  return p;
}

Pom Pom::from_name(std::string_view name) {
  if (name == "tetra") return tetrahedron();
  constexpr std::string_view prefix = "tetra^";
  if (name.substr(0, prefix.size()) == prefix) {
    int k = 0;
    const auto tail = name.substr(prefix.size());
    const auto res = std::from_chars(tail.data(), tail.data() + tail.size(), k);
    if (res.ec == std::errc() && res.ptr == tail.data() + tail.size()) return tetra_power(k);
  }
  fail(ErrorCode::kInvalidArgument, "unknown POM name '" + std::string(name) + "'");
}

Pom tensor_pom(const Pom& a, const Pom& b) {
  std::vector<HermitianMatrix> e;
  e.reserve(a.size() * b.size());
  for (const auto& x : a.effects())
    for (const auto& y : b.effects()) e.push_back(kron(x, y));
  return Pom(std::move(e));
}

double Counts::total() const {
  double s = 0.0;
  for (double v : nu) s += v;
  return s;
}

Counts Counts::parse(std::string_view text) {
  Counts c;
  std::string buf(text);
  for (char& ch : buf)
    if (ch == ',' || ch == ';') ch = ' ';
  std::istringstream in(buf);
  std::string tok;
  while (in >> tok) {
    const auto star = tok.find('*');
    if (star == std::string::npos) {
      c.nu.push_back(parse_double(tok));
      continue;
    }
    const double v = parse_double(std::string_view(tok).substr(0, star));
    const double r = parse_double(std::string_view(tok).substr(star + 1));
    if (!(r >= 1.0 && r == std::floor(r) && r <= 1e6)) fail(ErrorCode::kInvalidArgument, "bad repeat in '" + tok + "'");
    c.nu.insert(c.nu.end(), static_cast<std::size_t>(r), v);
  }
  require(!c.nu.empty(), ErrorCode::kInvalidArgument, "no counts given");
  for (double v : c.nu)
    require(v >= 0.0 && std::isfinite(v), ErrorCode::kInvalidArgument, "counts must be finite and nonnegative");
  return c;
}

TargetSpec::TargetSpec(Pom pom, Counts counts) : pom_(std::move(pom)), counts_(std::move(counts)) {
  if (counts_.nu.size() != pom_.size())
    fail(ErrorCode::kDimensionMismatch, "got " + std::to_string(counts_.nu.size()) + " counts for a POM with " +
                                            std::to_string(pom_.size()) + " outcomes");
  for (double v : counts_.nu)
    require(v >= 0.0 && std::isfinite(v), ErrorCode::kInvalidArgument, "counts must be finite and nonnegative");
  total_ = counts_.total();
}

RealVector born_probabilities(const HermitianMatrix& rho, const Pom& pom) {
  require(rho.dim() == pom.dim(), ErrorCode::kDimensionMismatch, "state and POM dimensions differ");
  return pom.born_matrix() * layout_of(rho);
}

RealVector born_probabilities(const QuantumState& rho, const Pom& pom) {
  return born_probabilities(rho.matrix(), pom);
}

double log_likelihood(const RealVector& p, const Counts& counts) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double nu = counts.nu[static_cast<std::size_t>(k)];
    if (nu == 0.0) continue;
    if (!(p(k) > 0.0)) return kNegInf;
    s += nu * std::log(p(k));
  }
  return s;
}

double log_target_density_trusted(const HermitianMatrix& rho, const TargetSpec& spec) {
  const RealMatrix& a = spec.pom().born_matrix();
  const LayoutVector x = layout_of(rho);
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.rows(); ++k) {
    const double nu = spec.counts().nu[static_cast<std::size_t>(k)];
    if (nu == 0.0) continue;
    const double p = a.row(k).dot(x);
    if (!(p > 0.0)) return kNegInf;
    s += nu * std::log(p);
  }
  return s;
}

double log_target_density(const HermitianMatrix& rho, const TargetSpec& spec) {
  require(rho.dim() == spec.dim(), ErrorCode::kDimensionMismatch, "state and POM dimensions differ");
  if (!is_physical(rho)) return kNegInf;
  return log_target_density_trusted(rho, spec);
}

double log_target_density(const QuantumState& rho, const TargetSpec& spec) {
  return log_target_density(rho.matrix(), spec);
}

MlResult ml_estimator(const TargetSpec& spec, const MlOptions& opt) {
  const int m = spec.dim();
  const double n_tot = spec.total();
  require(n_tot > 0.0, ErrorCode::kInvalidArgument, "ML estimation needs a positive total count");
  const Pom& pom = spec.pom();
  const auto& nu = spec.counts().nu;

  auto r_operator = [&](const RealVector& p) {
    CMatrix r = CMatrix::Zero(m, m);
    for (std::size_t k = 0; k < pom.size(); ++k)
      if (nu[k] > 0.0) r += (nu[k] / (n_tot * p(static_cast<Eigen::Index>(k)))) * pom[k].matrix();
    return r;
  };

  auto kkt_of = [&](const RealVector& p) {
    Eigen::SelfAdjointEigenSolver<CMatrix> rs(r_operator(p), Eigen::EigenvaluesOnly);
    return rs.eigenvalues().maxCoeff() - 1.0;
  };

  CMatrix rho = CMatrix::Identity(m, m) / static_cast<double>(m);
  RealVector p = born_probabilities(HermitianMatrix::from_matrix(rho), pom);
  double ll = log_likelihood(p, spec.counts()) / n_tot;
  double kkt = kkt_of(p);
  double eps = 1.0;
  MlResult res;
  bool stalled = false;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    // lambda_max(R) >= 1 at every state, with equality only at the maximum
    if (kkt < opt.kkt_tolerance) {
      res.converged = true;
      break;
    }
    const CMatrix r = r_operator(p);
    // near the top the likelihood gain drops below rounding; there the KKT residual decides
    const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(ll));
    bool accepted = false;
    while (eps > 1e-14) {
      const CMatrix t = CMatrix::Identity(m, m) + eps * r;
      CMatrix cand = t * rho * t.adjoint();
      cand /= cand.trace().real();
      const HermitianMatrix h = HermitianMatrix::from_matrix(cand);
      const RealVector pc = born_probabilities(h, pom);
      const double lc = log_likelihood(pc, spec.counts()) / n_tot;
      if (lc > ll - slack) {
        const double kc = kkt_of(pc);
        if (lc > ll + slack || kc < kkt) {
          rho = h.matrix();
          p = pc;
          ll = std::max(ll, lc);
          kkt = kc;
          accepted = true;
          break;
        }
      }
      eps *= 0.5;
    }
    if (!accepted) {
      stalled = true;
      res.converged = kkt < std::sqrt(opt.kkt_tolerance);
      break;
    }
    eps = std::min(eps * 2.0, 1e8);
  }
  res.iterations = it;
  const HermitianMatrix h = HermitianMatrix::from_matrix(rho);
  res.rho_ml = QuantumState::trusted(h);
  res.log_f_max = ll * n_tot;
  res.eigenvalues = eigenvalues(h);
  res.rank = 0;
  for (Eigen::Index i = 0; i < res.eigenvalues.size(); ++i)
    if (res.eigenvalues(i) > opt.rank_threshold) ++res.rank;
  res.kkt_residual = kkt;
  std::ostringstream diag;
  diag << "iterations=" << it << " step=" << eps << " kkt=" << res.kkt_residual;
  res.diagnostics = diag.str();
  if (stalled) res.diagnostics += " (stalled at rounding level)";
  else if (!res.converged) res.diagnostics += " (iteration limit reached)";
  return res;
}

namespace {
// a_kl = tr(Pi_k B_l)
RealMatrix effect_coordinates(const Pom& pom, const TracelessBasis& basis) {
  RealMatrix a(static_cast<Eigen::Index>(pom.size()), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < pom.size(); ++k)
    for (std::size_t l = 0; l < basis.size(); ++l)
      a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = pom[k].trace_product(basis[l]);
  return a;
}
}  // namespace

RealMatrix shape_matrix_F(const TargetSpec& spec, const TracelessBasis& basis, const HermitianMatrix& rho) {
  require(basis.dim() == spec.dim() && rho.dim() == spec.dim(), ErrorCode::kDimensionMismatch,
          "basis, state and POM dimensions differ");
  const RealMatrix a = effect_coordinates(spec.pom(), basis);
  const RealVector p = born_probabilities(rho, spec.pom());
  const auto d = static_cast<Eigen::Index>(basis.size());
  RealMatrix f = RealMatrix::Zero(d, d);
  for (Eigen::Index k = 0; k < a.rows(); ++k) {
    const double nu = spec.counts().nu[static_cast<std::size_t>(k)];
    if (nu == 0.0) continue;
    if (!(p(k) > 0.0)) fail(ErrorCode::kNumerical, "vanishing probability at the evaluation point");
    f.noalias() += (nu / (p(k) * p(k))) * a.row(k).transpose() * a.row(k);
  }
  return f;
}

RealMatrix shape_matrix_F(const TargetSpec& spec, const TracelessBasis& basis) {
  return shape_matrix_F(spec, basis, unconstrained_peak(spec, basis));
}

HermitianMatrix unconstrained_peak(const TargetSpec& spec, const TracelessBasis& basis) {
  require(basis.dim() == spec.dim(), ErrorCode::kDimensionMismatch, "basis and POM dimensions differ");
  const int m = spec.dim();
  const RealMatrix a = effect_coordinates(spec.pom(), basis);
  const auto& nu = spec.counts().nu;
  const RealVector p0 = born_probabilities(HermitianMatrix::identity(m) * (1.0 / m), spec.pom());
  RealVector c = RealVector::Zero(static_cast<Eigen::Index>(basis.size()));
  auto probs = [&](const RealVector& x) -> RealVector { return p0 + a * x; };
  auto loglik = [&](const RealVector& p) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      const double v = nu[static_cast<std::size_t>(k)];
      if (v == 0.0) continue;
      if (!(p(k) > 0.0)) return kNegInf;
      s += v * std::log(p(k));
    }
    return s;
  };
  RealVector p = probs(c);
  double ll = loglik(p);
  std::ostringstream trail;
  for (int it = 0; it < 500; ++it) {
    RealVector grad = RealVector::Zero(c.size());
    RealMatrix f = RealMatrix::Zero(c.size(), c.size());
    for (Eigen::Index k = 0; k < a.rows(); ++k) {
      const double v = nu[static_cast<std::size_t>(k)];
      if (v == 0.0) continue;
      grad += (v / p(k)) * a.row(k).transpose();
      f.noalias() += (v / (p(k) * p(k))) * a.row(k).transpose() * a.row(k);
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> fs(f);
    const double fmax = fs.eigenvalues().maxCoeff();
    if (!(fs.eigenvalues().minCoeff() > 1e-12 * fmax))
      fail(ErrorCode::kNumerical, "curvature is singular on the coordinate space; the counts do not fix the peak");
    const RealVector step = fs.eigenvectors() *
                            (fs.eigenvalues().cwiseInverse().asDiagonal() * (fs.eigenvectors().transpose() * grad));
    double t = 1.0;
    bool moved = false;
    for (int half = 0; half < 60; ++half, t *= 0.5) {
      const RealVector cand = c + t * step;
      const RealVector pc = probs(cand);
      const double lc = loglik(pc);
      if (lc >= ll - 1e-14 * std::abs(ll)) {
        c = cand;
        p = pc;
        ll = lc;
        moved = true;
        break;
      }
    }
    trail << " it" << it << ":|step|=" << t * step.norm() << ",logf=" << ll;
    if (!moved) fail(ErrorCode::kConvergence, "Newton iteration stalled:" + trail.str());
    if (t * step.norm() < 1e-13 * std::max(1.0, c.norm())) return from_coordinates({c}, basis);
  }
  fail(ErrorCode::kConvergence, "Newton iteration did not converge:" + trail.str());
}

bool is_permissible_probabilities(const RealVector& p, const Pom& pom) {
  require(static_cast<std::size_t>(p.size()) == pom.size(), ErrorCode::kDimensionMismatch,
          "probability vector length differs from the POM size");
  Counts c;
  c.nu.assign(p.data(), p.data() + p.size());
  const MlResult r = ml_estimator(TargetSpec(pom, std::move(c)));
  const RealVector q = born_probabilities(r.rho_ml, pom);
  return (q - p).cwiseAbs().maxCoeff() <= 1e-6;
}

}  // namespace qws
