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

// Reference computations for the tests. Nothing here calls the sampling,
// density or estimator code under test; randomness comes from mt19937_64.

#include <algorithm>
#include <array>
#include <limits>
#include <numeric>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

namespace oracle {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;

// Ginibre construction of a Hilbert-Schmidt uniform state.
inline Mat hs_uniform_state(int m, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  Mat g(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) g(i, j) = Complex(nd(gen), nd(gen));
  Mat r = g * g.adjoint();
  return r / r.trace().real();
}

// rho = S G G^dagger S / tr with G an m x n complex Ginibre matrix.
inline Mat wishart_state(const Mat& s, int n, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  const int m = static_cast<int>(s.rows());
  Mat g(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = Complex(nd(gen), nd(gen));
  Mat r = s * g * g.adjoint() * s;
  return r / r.trace().real();
}

inline double purity(const Mat& rho) { return (rho * rho).trace().real(); }

// Tetrahedron effects (1 + a.sigma)/4, a in {(1,-1,-1), (-1,1,-1), (-1,-1,1), (1,1,1)}/sqrt3.
inline std::vector<Mat> tetra_effects() {
  const double s = 1.0 / std::sqrt(3.0);
  const double a[4][3] = {{s, -s, -s}, {-s, s, -s}, {-s, -s, s}, {s, s, s}};
  std::vector<Mat> out;
  for (const auto& v : a) {
    Mat e(2, 2);
    e << Complex(1 + v[2], 0), Complex(v[0], -v[1]), Complex(v[0], v[1]), Complex(1 - v[2], 0);
    out.push_back(e / 4.0);
  }
  return out;
}

inline std::vector<Mat> tensor(const std::vector<Mat>& a, const std::vector<Mat>& b) {
  std::vector<Mat> out;
  for (const auto& x : a)
    for (const auto& y : b) {
      Mat k(x.rows() * y.rows(), x.cols() * y.cols());
      for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j) k.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
      out.push_back(k);
    }
  return out;
}

inline double log_likelihood(const Mat& rho, const std::vector<Mat>& effects, const std::vector<double>& nu) {
  double s = 0.0;
  for (std::size_t k = 0; k < effects.size(); ++k) {
    const double p = (effects[k] * rho).trace().real();
    if (nu[k] == 0.0) continue;
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    s += nu[k] * std::log(p);
  }
  return s;
}

// Tetrahedron linear inversion: r = 3 sum_k p_k a_k.
inline std::array<double, 3> tetra_linear_inversion(const std::vector<double>& nu) {
  const double s = 1.0 / std::sqrt(3.0);
  const double a[4][3] = {{s, -s, -s}, {-s, s, -s}, {-s, -s, s}, {s, s, s}};
  double tot = 0.0;
  for (double v : nu) tot += v;
  std::array<double, 3> r{0, 0, 0};
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 3; ++i) r[i] += 3.0 * nu[k] / tot * a[k][i];
  return r;
}

// Kolmogorov-Smirnov distance of a sample against a continuous CDF.
inline double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

// Two-sample Kolmogorov-Smirnov distance.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return d;
}

// 1% critical value of the two-sample KS distance, large-sample form.
inline double ks_two_sample_critical(std::size_t na, std::size_t nb) {
  return 1.628 * std::sqrt(double(na + nb) / (double(na) * double(nb)));
}

// Pearson chi-square p value of observed counts against expected counts.
// Bins with expectation below min_expected are pooled into their neighbour.
inline double chi2_p_value(const std::vector<double>& observed, const std::vector<double>& expected,
                           double min_expected = 5.0) {
  std::vector<double> o;
  std::vector<double> e;
  double ao = 0.0;
  double ae = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    ao += observed[i];
    ae += expected[i];
    if (ae >= min_expected) {
      o.push_back(ao);
      e.push_back(ae);
      ao = ae = 0.0;
    }
  }
  if (!e.empty()) {
    o.back() += ao;
    e.back() += ae;
  }
  double chi2 = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) chi2 += (o[i] - e[i]) * (o[i] - e[i]) / e[i];
  const double dof = static_cast<double>(e.size()) - 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), chi2));
}

// Two-sample chi-square homogeneity test on common bins.
inline double chi2_two_sample_p(const std::vector<double>& a, const std::vector<double>& b) {
  const double na = std::accumulate(a.begin(), a.end(), 0.0);
  const double nb = std::accumulate(b.begin(), b.end(), 0.0);
  const double ka = std::sqrt(nb / na);
  const double kb = std::sqrt(na / nb);
  double chi2 = 0.0;
  int bins = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] + b[i] == 0.0) continue;
    chi2 += (ka * a[i] - kb * b[i]) * (ka * a[i] - kb * b[i]) / (a[i] + b[i]);
    ++bins;
  }
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(bins - 1), chi2));
}

// Central finite-difference Hessian of f: R^d -> R at x.
inline Eigen::MatrixXd fd_hessian(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                  double h) {
  const int d = static_cast<int>(x.size());
  Eigen::MatrixXd H(d, d);
  const double f0 = f(x);
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      if (i == j) {
        Eigen::VectorXd p = x, q = x;
        p(i) += h;
        q(i) -= h;
        H(i, i) = (f(p) - 2.0 * f0 + f(q)) / (h * h);
        continue;
      }
      Eigen::VectorXd pp = x, pm = x, mp = x, mm = x;
      pp(i) += h, pp(j) += h;
      pm(i) += h, pm(j) -= h;
      mp(i) -= h, mp(j) += h;
      mm(i) -= h, mm(j) -= h;
      H(i, j) = H(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
    }
  }
  return H;
}

// Moments E[lambda^k], k = 0..kmax, of lambda(r) over the uniform Bloch ball.
// Product rule: Gauss-Legendre in r and cos(theta), trapezoid in phi. Exact
// when lambda^kmax is a polynomial of degree below about min(2 nr - 2, np).
inline std::vector<double> bloch_ball_moments(const std::function<double(double, double, double)>& lambda, int kmax,
                                              int nr = 160, int nt = 160, int np = 320) {
  std::vector<double> xr, wr, xt, wt;
  auto gl = [](int n, std::vector<double>& x, std::vector<double>& w) {
    // Golub-Welsch on [-1, 1]
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = i / std::sqrt(4.0 * i * i - 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
      x[i] = es.eigenvalues()(i);
      w[i] = 2.0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
    }
  };
  gl(nr, xr, wr);
  gl(nt, xt, wt);
  std::vector<double> mom(kmax + 1, 0.0);
  for (int a = 0; a < nr; ++a) {
    const double r = 0.5 * (xr[a] + 1.0);
    const double wrad = 0.5 * wr[a] * 3.0 * r * r;
    for (int b = 0; b < nt; ++b) {
      const double ct = xt[b];
      const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
      for (int c = 0; c < np; ++c) {
        const double phi = 2.0 * std::numbers::pi * c / np;
        const double l = lambda(r * st * std::cos(phi), r * st * std::sin(phi), r * ct);
        const double w = wrad * 0.5 * wt[b] / np;
        double lk = 1.0;
        for (int k = 0; k <= kmax; ++k) {
          mom[k] += w * lk;
          lk *= l;
        }
      }
    }
  }
  return mom;
}

}  // namespace oracle
