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

#include "qwsample/wishart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qwsample/special.hpp"

namespace qws {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double lgamma_d(double x) { return std::lgamma(x); }

bool is_identity(const HermitianMatrix& h) {
  const int m = h.dim();
  return (h.matrix() - CMatrix::Identity(m, m)).cwiseAbs().maxCoeff() == 0.0;
}
}  // namespace

GaussianMatrix sample_standard_gaussian(int m, int n, RngStream& rng) {
  check_dimension(m);
  if (n < m) fail(ErrorCode::kInvalidArgument, "gaussian matrix needs n >= m, got n = " + std::to_string(n));
  GaussianMatrix g{m, n, Eigen::MatrixXcd(m, n)};
  // Column by column, matching the order the state sampler consumes draws.
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) g.entries(i, j) = rng.complex_normal();
  return g;
}

WishartParams::WishartParams(int n, HermitianMatrix sigma) : n_(n), sigma_(std::move(sigma)) {
  const int m = sigma_.dim();
  if (n_ < m) fail(ErrorCode::kInvalidArgument, "Wishart law needs n >= m, got n = " + std::to_string(n_));
  const Spectrum ev = eigenvalues(sigma_);
  if (!(ev.minCoeff() > 0.0)) fail(ErrorCode::kNotPositive, "covariance is not positive definite");
  identity_ = is_identity(sigma_);
  if (identity_) {
    sigma_sqrt_ = sigma_;
    sigma_inv_ = sigma_;
    log_det_sigma_ = 0.0;
  } else {
    sigma_sqrt_ = psd_sqrt(sigma_);
    sigma_inv_ = inverse(sigma_);
    log_det_sigma_ = log_det(ev);
  }
  log_norm_ = lgamma_d(static_cast<double>(m) * n_) - log_multivariate_gamma(m, n_) -
              0.5 * (m * (m - 1.0) * std::numbers::ln2 + std::log(static_cast<double>(m)));
}

WishartParams WishartParams::identity(int m, int n) { return WishartParams(n, HermitianMatrix::identity(m)); }

QuantumState sample_wishart_state(const WishartParams& p, RngStream& rng) {
  const int m = p.m();
  for (;;) {
    CMatrix r = CMatrix::Zero(m, m);
    Eigen::Matrix<Complex, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1> psi(m);
    for (int j = 0; j < p.n(); ++j) {
      for (int i = 0; i < m; ++i) psi(i) = rng.complex_normal();
      r.noalias() += psi * psi.adjoint();
    }
    if (!p.sigma_is_identity()) {
      const CMatrix& s = p.sigma_sqrt().matrix();
      CMatrix t = s * r * s;
      r = t;
    }
    const double tr = r.diagonal().real().sum();
    if (!(tr > kTraceUnderflow)) continue;
    r /= tr;
    return QuantumState::trusted(HermitianMatrix::from_matrix(r));
  }
}

QuantumState sample_uniform_state(int m, RngStream& rng) {
  // Identity covariance with n = m.
  static thread_local int cached_m = 0;
  static thread_local WishartParams cached = WishartParams::identity(1, 1);
  if (cached_m != m) {
    cached = WishartParams::identity(m, m);
    cached_m = m;
  }
  return sample_wishart_state(cached, rng);
}

double log_wishart_density_trusted(const HermitianMatrix& rho, double log_det_rho, const WishartParams& p) {
  const int m = p.m();
  const double t = p.sigma_is_identity() ? rho.trace() : p.sigma_inverse().trace_product(rho);
  if (!(t > 0.0)) return kNegInf;
  double v = p.log_normalization() - p.n() * p.log_det_sigma() - static_cast<double>(m) * p.n() * std::log(t);
  if (p.n() > m) {
    if (!(log_det_rho > kNegInf)) return kNegInf;
    v += (p.n() - m) * log_det_rho;
  }
  return v;
}

double log_wishart_density(const HermitianMatrix& rho, const WishartParams& p) {
  if (rho.dim() != p.m()) fail(ErrorCode::kDimensionMismatch, "state and covariance dimensions differ");
  const Spectrum ev = eigenvalues(rho);
  if (!is_psd(ev)) return kNegInf;
  return log_wishart_density_trusted(rho, p.n() > p.m() ? log_det(ev) : 0.0, p);
}

double log_wishart_density(const QuantumState& rho, const WishartParams& p) {
  return log_wishart_density(rho.matrix(), p);
}

QuantumState wishart_peak(const WishartParams& p) {
  const int m = p.m();
  if (p.n() <= m) fail(ErrorCode::kInvalidArgument, "the Wishart peak is interior only for n > m");
  if (p.sigma_is_identity()) return QuantumState::maximally_mixed(m);
  // rho^{-1} = c Sigma^{-1} - m^2/(n-m); pick c > a s_max so that tr rho = 1.
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(p.sigma().matrix());
  const Spectrum s = solver.eigenvalues();
  const double a = static_cast<double>(m) * m / (p.n() - m);
  auto trace_at = [&](double c) {
    double tr = 0.0;
    for (int i = 0; i < m; ++i) tr += 1.0 / (c / s(i) - a);
    return tr;
  };
  double lo = a * s.maxCoeff();
  double hi = lo + 1.0;
  while (trace_at(hi) > 1.0) hi = lo + 2.0 * (hi - lo);
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (trace_at(mid) > 1.0 ? lo : hi) = mid;
  }
  const double c = 0.5 * (lo + hi);
  Spectrum d(m);
  for (int i = 0; i < m; ++i) d(i) = 1.0 / (c / s(i) - a);
  d /= d.sum();
  const CMatrix& v = solver.eigenvectors();
  CMatrix rho = v * d.asDiagonal() * v.adjoint();
  return QuantumState::trusted(HermitianMatrix::from_matrix(rho));
}

QubitMarginals::QubitMarginals(int n, double theta) : n_(n), theta_(theta) {
  if (n < 2) fail(ErrorCode::kInvalidArgument, "qubit marginals need n >= 2");
  log_norm_ = lgamma_d(2.0 * n) - (2.0 * n - 1.0) * std::numbers::ln2 - 2.0 * lgamma_d(n);
}

double QubitMarginals::s_density(double s) const {
  if (s < 0.0 || s >= 1.0) return 0.0;
  return 2.0 * (n_ - 1) * s * std::pow(1.0 - s * s, n_ - 2);
}

double QubitMarginals::phi_density(double phi) const {
  return (phi < 0.0 || phi >= 2.0 * std::numbers::pi) ? 0.0 : 0.5 / std::numbers::pi;
}

double QubitMarginals::z_density(double z) const {
  if (z <= -1.0 || z >= 1.0) return 0.0;
  const double den = std::cosh(theta_) - z * std::sinh(theta_);
  return std::exp(log_norm_ + (n_ - 1) * std::log1p(-z * z) - 2.0 * n_ * std::log(den));
}

double QubitMarginals::x_density(double x) const {
  if (x <= -1.0 || x >= 1.0) return 0.0;
  const double ch = std::cosh(theta_);
  const double sh = std::sinh(theta_);
  const double w = 1.0 + x * x * sh * sh;
  const double xp = x * ch / std::sqrt(w);
  const double p0 = std::exp(log_norm_ + (n_ - 1) * std::log1p(-xp * xp));
  return p0 * ch / (w * std::sqrt(w));
}

double QubitMarginals::z_mode() const {
  // root of sinh z^2 + (n-1) cosh z - n sinh = 0 inside (-1, 1), cancellation free
  const double sh = std::sinh(theta_);
  const double b = (n_ - 1) * std::cosh(theta_);
  return 2.0 * n_ * sh / (b + std::sqrt(b * b + 4.0 * n_ * sh * sh));
}

namespace {
template <class F>
double integrate(F f, double a, double b) {
  a = std::max(a, -1.0);
  b = std::min(b, 1.0);
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, 1e-12);
}
}  // namespace

double QubitMarginals::z_probability(double a, double b) const {
  return integrate([this](double z) { return z_density(z); }, a, b);
}

double QubitMarginals::x_probability(double a, double b) const {
  return integrate([this](double x) { return x_density(x); }, a, b);
}

double qubit_theta_for_peak(int n, double z_peak) {
  if (n <= 2) fail(ErrorCode::kInvalidArgument, "an interior qubit peak needs n > 2");
  if (!(std::abs(z_peak) < 1.0)) fail(ErrorCode::kInvalidArgument, "peak must lie inside the Bloch ball");
  return std::atanh((n - 2.0) * z_peak / (n - 2.0 * z_peak * z_peak));
}

}  // namespace qws
