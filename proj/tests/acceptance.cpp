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

// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qwsample/proposal.hpp"
#include "qwsample/rejection.hpp"
#include "qwsample/target.hpp"
#include "qwsample/verify.hpp"
#include "qwsample/wishart.hpp"

using namespace qws;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [missed: " << what << "]";
    }
  }
};

struct Criterion {
  const char* id;
  const char* title;
  double budget_s;  // 0: no runtime bound
  std::function<void(Outcome&)> body;
};

TargetSpec qubit_target(const std::string& counts) { return TargetSpec(Pom::tetrahedron(), Counts::parse(counts)); }

const char* kTwoQubitCounts = "10,4,6,4,7,6,5,6,5,6,10,6,5,6,8,6";

RejectionResult run_rejection(const ProposalSpec& p, const TargetSpec& t, std::uint64_t n, std::uint64_t seed = 1) {
  RejectionOptions o;
  o.total = n;
  o.seed = seed;
  o.keep_states = false;
  return sample_target(p, t, o);
}

// ---- 1
void uniform_sampler(Outcome& out) {
  const int n = 100000;
  RngStream rng(derive_key(1, "acceptance-uniform"), 0);
  const WishartParams g(5, HermitianMatrix::diagonal(std::vector<double>{std::exp(0.5), std::exp(-0.5)}));
  std::vector<double> radii;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const QuantumState r = sample_uniform_state(2, rng);
    radii.push_back(to_bloch(r.matrix()).length());
    const double v = std::exp(log_wishart_density(r, g)) * hs_volume(2);
    s += v;
    s2 += v * v;
  }
  const double ks = oracle::ks_statistic(radii, [](double r) { return r * r * r; });
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  out.detail << "KS=" << ks << " V*E[g]=" << mean << " SE=" << se;
  out.check(ks < 0.01, "KS < 0.01");
  out.check(std::abs(mean - 1.0) <= 3.0 * se, "normalization within 3 SE");
}

// ---- 2
void qubit_analytics(Outcome& out) {
  const int n = 5;
  const double z = 0.8;
  const double theta = qubit_theta_for_peak(n, z);
  const double d[] = {1.0 + z, 1.0 - z};
  const HermitianMatrix sig = covariance_for_peak(QuantumState(HermitianMatrix::diagonal(d) * 0.5), n);
  const double theta_cov = 0.5 * std::log(sig(0, 0).real() / sig(1, 1).real());
  const QubitMarginals qm(n, theta);
  const double mode = qm.z_mode();

  const int draws = 100000, bins = 50;
  const WishartParams w(n, sig);
  RngStream rng(derive_key(1, "acceptance-zhist"), 0);
  std::vector<double> obs(bins, 0.0), exp(bins, 0.0);
  for (int i = 0; i < draws; ++i) {
    const double zz = to_bloch(sample_wishart_state(w, rng).matrix()).z;
    obs[std::clamp(int((zz + 1.0) / 0.04), 0, bins - 1)] += 1;
  }
  for (int k = 0; k < bins; ++k) exp[k] = draws * qm.z_probability(-1.0 + 0.04 * k, -1.0 + 0.04 * (k + 1));
  const double p = oracle::chi2_p_value(obs, exp);
  out.detail.precision(7);
  out.detail << "theta=" << theta << " theta(Sigma)=" << theta_cov << " mode=" << mode << " chi2 p=" << p;
  out.check(std::abs(theta - theta_cov) < 1e-12, "theta agrees with the covariance");
  out.check(std::abs(theta - 0.76660) <= 1e-5, "theta = 0.76660 +- 1e-5");
  out.check(std::abs(mode - 0.7223) <= 5e-4, "mode = 0.7223 +- 5e-4");
  out.check(p > 0.01, "z histogram p > 0.01");
}

// ---- 3
void qubit_rates(Outcome& out) {
  struct Case {
    const char* counts;
    int n;
    double kappa, x2, expect;
  };
  const Case cases[] = {{"25*4", 14, 0.1, 0.0, 0.608}, {"25*4", 18, 0.1, 0.0, 0.33}, {"10,20,25,45", 13, 0.2, 1.0, 0.286}};
  for (const auto& c : cases) {
    const TargetSpec t = qubit_target(c.counts);
    const ProposalSpec p = proposal_from_estimate(ml_estimator(t).rho_ml, c.n, c.kappa, 0.0, c.x2);
    const double rate = run_rejection(p, t, 100000).report.p_acc;
    out.detail << c.counts << " n=" << c.n << ": " << rate << " (" << c.expect << ")  ";
    out.check(std::abs(rate - c.expect) <= 0.01, std::string(c.counts) + " n=" + std::to_string(c.n));
  }
}

// ---- 4
void ml_checks(Outcome& out) {
  const MlResult q = ml_estimator(qubit_target("10,20,25,45"));
  const double len = to_bloch(q.rho_ml.matrix()).length();
  out.detail << "qubit |r|=" << len;
  out.check(std::abs(len - 0.8832) <= 5e-4, "Bloch length");
  const MlResult t = ml_estimator(TargetSpec(Pom::tetra_power(2), Counts::parse(kTwoQubitCounts)));
  std::vector<double> ev(t.eigenvalues.data(), t.eigenvalues.data() + t.eigenvalues.size());
  std::sort(ev.rbegin(), ev.rend());
  const double expect[] = {0.5033, 0.3377, 0.1589, 0.0};
  out.detail << " two-qubit eigenvalues";
  for (int i = 0; i < 4; ++i) {
    out.detail << " " << ev[i];
    out.check(std::abs(ev[i] - expect[i]) <= 5e-4, "eigenvalue " + std::to_string(i));
  }
}

// ---- 5
void two_qubit_rates(Outcome& out) {
  const std::uint64_t n_prop = 10000000;
  struct Case {
    int nu_bar, n;
    double kappa, expect;
  };
  // kappa is the uniform weight: 20% Wishart means kappa = 0.8
  const Case cases[] = {{10, 6, 0.8, 0.0048}, {20, 8, 0.5, 0.00091}, {100, 35, 0.1, 0.0064},
                        {10, 4, 1.0, 5.4e-4},  {20, 4, 1.0, 2.3e-5}};
  for (const auto& c : cases) {
    const TargetSpec t(Pom::tetra_power(2), Counts::parse(std::to_string(c.nu_bar) + "*16"));
    const ProposalSpec p(WishartParams::identity(4, c.n), HermitianMatrix(4), c.kappa);
    const double rate = run_rejection(p, t, n_prop).report.p_acc;
    out.detail << "nu=" << c.nu_bar << (c.kappa == 1.0 ? " uniform" : " W(" + std::to_string(c.n) + ")") << ": "
               << rate << " (" << c.expect << ")  ";
    out.check(std::abs(rate / c.expect - 1.0) <= 0.2, "nu=" + std::to_string(c.nu_bar) + " kappa=" +
                                                          std::to_string(c.kappa).substr(0, 3));
  }
}

// ---- 6
void non_centred(Outcome& out) {
  const TargetSpec t(Pom::tetra_power(2), Counts::parse(kTwoQubitCounts));
  const ProposalSpec p = proposal_from_estimate(ml_estimator(t).rho_ml, 5, 0.6, 0.75, 0.15);
  const double rate = run_rejection(p, t, 1000000).report.p_acc;
  out.detail << "P_acc=" << rate;
  out.check(rate > 0.005, "P_acc > 0.005");
}

// ---- 7
void fwhm(Outcome& out) {
  double lo = 1, hi = -1;
  for (int m : {2, 4}) {
    const int n = m + 16 / m + 1;
    for (int i = 5; i <= 95; ++i) {
      const double e = fwhm_longitudinal(m, n, i / 100.0).relative_error();
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
  }
  out.detail << "relative error in [" << lo << ", " << hi << "]";
  out.check(lo >= -0.04 && hi <= 0.02, "band [-0.04, 0.02]");
}

// ---- 8
void hessians(Outcome& out) {
  std::mt19937_64 gen(8);
  for (int k : {1, 2}) {
    const int m = 1 << k;
    const TracelessBasis b = generalized_pauli_basis(m);
    const QuantumState peak(HermitianMatrix::from_matrix(oracle::hs_uniform_state(m, gen)));
    const int n = m + 8;
    const WishartParams w(n, covariance_for_peak(peak, n));
    auto lg = [&](const Eigen::VectorXd& x) { return log_wishart_density(from_coordinates({x}, b), w); };
    const Eigen::MatrixXd hg = -oracle::fd_hessian(lg, to_coordinates(peak, b).coords, 1e-4);
    const double eg = (shape_matrix_G(peak, n, b) - hg).norm() / hg.norm();

    // data whose ML lies inside the state space
    const HermitianMatrix rho0 = HermitianMatrix::from_matrix(oracle::hs_uniform_state(m, gen));
    const Pom pom = Pom::tetra_power(k);
    const RealVector q = born_probabilities(rho0, pom);
    Counts c;
    for (Eigen::Index i = 0; i < q.size(); ++i) c.nu.push_back(std::round(1600.0 * q(i)));
    const TargetSpec t(pom, c);
    const HermitianMatrix top = unconstrained_peak(t, b);
    const bool interior = is_psd(top) && min_eigenvalue(top) > 0.0;
    auto lf = [&](const Eigen::VectorXd& x) { return log_target_density(from_coordinates({x}, b), t); };
    const Eigen::MatrixXd hf = -oracle::fd_hessian(lf, to_coordinates(top, b).coords, 1e-5);
    const double ef = (shape_matrix_F(t, b) - hf).norm() / hf.norm();
    out.detail << "m=" << m << " G err=" << eg << " F err=" << ef << "  ";
    out.check(interior, "interior peak for m=" + std::to_string(m));
    out.check(eg <= 1e-3, "G for m=" + std::to_string(m));
    out.check(ef <= 1e-3, "F for m=" + std::to_string(m));
  }
}

// ---- 9
// lambda of states produced by make(i), streamed in blocks.
std::vector<double> stream_lambdas(std::uint64_t count, const TargetSpec& t, double log_f_ml,
                                   const std::function<HermitianMatrix(std::uint64_t)>& make) {
  std::vector<double> out;
  out.reserve(count);
  std::vector<HermitianMatrix> block;
  for (std::uint64_t i = 0; i < count; ++i) {
    block.push_back(make(i));
    if (block.size() == 4096 || i + 1 == count) {
      const LambdaValues lv = lambda_values(block, t, log_f_ml);
      out.insert(out.end(), lv.lambdas.begin(), lv.lambdas.end());
      block.clear();
    }
  }
  return out;
}

// Exact integral over [0, 1] of the step function credibility_from_size.
double integral_c_ufm(const LambdaValues& u) {
  std::vector<double> b = u.lambdas;
  b.push_back(0.0);
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  const std::vector<double> c = credibility_from_size(u, b);
  double s = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) s += c[i] * ((i + 1 < b.size() ? b[i + 1] : 1.0) - b[i]);
  return s;
}

void verification(Outcome& out) {
  const TargetSpec t = qubit_target("10,20,25,45");
  const MlResult ml = ml_estimator(t);
  const auto grid = dense_lambda_grid();

  // (a) uniform reference
  const std::uint64_t n_ufm = 1000000;
  const std::uint64_t ukey = derive_key(1, "verify-uniform");
  LambdaValues ref;
  ref.lambdas = stream_lambdas(n_ufm, t, ml.log_f_max, [&](std::uint64_t i) {
    RngStream r(ukey, i);
    return sample_uniform_state(2, r).matrix();
  });
  const std::vector<double> c_ref = credibility_from_size(ref, grid);
  const double corr = ufm_deviation_estimate(ref, grid);
  const double i_c1mc = expected_q(grid, c_ref, 1.0).integral_c1mc;
  out.detail << "int c(1-c)=" << i_c1mc;
  out.check(std::abs(i_c1mc - 0.15567) <= 0.002, "int c(1-c) = 0.15567 +- 0.002");

  // (b) Q over replicas, drawn from one shuffled pool of target samples
  const int replicas = 200;
  const ProposalSpec p = proposal_from_estimate(ml.rho_ml, 13, 0.2, 0.0, 1.0);
  const std::uint64_t n_prop = 7800000;
  const RejectionResult rr = run_rejection(p, t, n_prop, 2);
  const ProposalGenerator gen(p, 2, n_prop);
  std::vector<double> pool = stream_lambdas(rr.sample.indices.size(), t, ml.log_f_max,
                                            [&](std::uint64_t i) { return gen.draw(rr.sample.indices[i]).state; });
  std::shuffle(pool.begin(), pool.end(), std::mt19937_64(2024));
  out.detail << " pool=" << pool.size();
  for (int n_tgt : {100, 1000, 10000}) {
    if (pool.size() < std::size_t(replicas) * n_tgt) {
      out.check(false, "pool too small for N_tgt=" + std::to_string(n_tgt));
      continue;
    }
    double s = 0, s2 = 0;
    for (int r = 0; r < replicas; ++r) {
      LambdaValues lv;
      lv.lambdas.assign(pool.begin() + std::ptrdiff_t(r) * n_tgt, pool.begin() + std::ptrdiff_t(r + 1) * n_tgt);
      const double nq = n_tgt * q_statistic(grid, credibility_estimate(lv, grid), c_ref);
      s += nq;
      s2 += nq * nq;
    }
    const double mean = s / replicas;
    const double se = std::sqrt((s2 / replicas - mean * mean) / (replicas - 1));
    const double pred = n_tgt * expected_q(grid, c_ref, n_tgt, corr).mean;
    out.detail << " N=" << n_tgt << ": N*Q=" << mean << "+-" << se << " vs " << pred;
    out.check(std::abs(mean - pred) <= 2.0 * se, "N*Q within 2 SE at N_tgt=" + std::to_string(n_tgt));
  }

  // (c) bias of the uniform-reference credibility. Its integral over lambda is
  // sum lambda^2 / sum lambda; truth E[lambda^2]/E[lambda] from quadrature.
  const auto eff = oracle::tetra_effects();
  const std::vector<double> nu = t.counts().nu;
  const auto li = oracle::tetra_linear_inversion(nu);
  auto rho_of = [](double x, double y, double z) {
    oracle::Mat r(2, 2);
    r << oracle::Complex(1 + z, 0), oracle::Complex(x, -y), oracle::Complex(x, y), oracle::Complex(1 - z, 0);
    return oracle::Mat(r / 2.0);
  };
  const double lmax = oracle::log_likelihood(rho_of(li[0], li[1], li[2]), eff, nu);
  const auto mom = oracle::bloch_ball_moments(
      [&](double x, double y, double z) { return std::exp(oracle::log_likelihood(rho_of(x, y, z), eff, nu) - lmax); },
      2);
  const double truth = mom[2] / mom[1];
  std::vector<double> xs, ys;
  bool negative = true;
  for (int n_small : {32, 64, 128, 256}) {
    const int reps = 20000;
    const std::uint64_t key = derive_key(1, "bias-" + std::to_string(n_small));
    double s = 0, s2 = 0;
    for (int r = 0; r < reps; ++r) {
      LambdaValues u;
      u.lambdas = stream_lambdas(n_small, t, ml.log_f_max, [&](std::uint64_t i) {
        RngStream g(key, std::uint64_t(r) * n_small + i);
        return sample_uniform_state(2, g).matrix();
      });
      double x = 0, y = 0;
      for (double l : u.lambdas) x += l * l, y += l;
      // control variate with zero mean removes the O(N^-1/2) noise
      const double cv = (x / n_small - truth * y / n_small) / mom[1];
      const double dv = integral_c_ufm(u) - truth - cv;
      s += dv;
      s2 += dv * dv;
    }
    const double mean = s / reps;
    const double se = std::sqrt((s2 / reps - mean * mean) / (reps - 1));
    out.detail << " bias(" << n_small << ")=" << mean << "+-" << se;
    negative = negative && mean + 2.0 * se < 0.0;
    xs.push_back(std::log(double(n_small)));
    ys.push_back(std::log(std::abs(mean)));
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) sxy += (xs[i] - mx) * (ys[i] - my), sxx += (xs[i] - mx) * (xs[i] - mx);
  const double slope = sxy / sxx;
  out.detail << " slope=" << slope;
  out.check(negative, "bias negative");
  out.check(std::abs(slope + 1.0) <= 0.15, "slope -1 +- 0.15");
}

// ---- 10
void higher_dimension(Outcome& out) {
  const int m = 8;
  std::mt19937_64 gen(10);
  std::normal_distribution<double> nd;
  auto unitary = [&](int d) {
    oracle::Mat a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = oracle::Complex(nd(gen), nd(gen));
    return oracle::Mat(Eigen::HouseholderQR<oracle::Mat>(a).householderQ());
  };
  // Sigma = V diag(a 1_4, b 1_4) V^dagger; U = V diag(U1, U2) V^dagger commutes with it
  const oracle::Mat v = unitary(m);
  oracle::Mat dg = oracle::Mat::Zero(m, m);
  for (int i = 0; i < m; ++i) dg(i, i) = i < 4 ? 0.7 : 1.9;
  const oracle::Mat sigma = v * dg * v.adjoint();
  oracle::Mat blk = oracle::Mat::Zero(m, m);
  blk.topLeftCorner(4, 4) = unitary(4);
  blk.bottomRightCorner(4, 4) = unitary(4);
  const oracle::Mat u = v * blk * v.adjoint();
  const int n = 12;
  const WishartParams w(n, HermitianMatrix::from_matrix(sigma));
  const WishartParams ws(n, HermitianMatrix::from_matrix(sigma * 3.7));
  double d_scale = 0, d_unit = 0;
  for (int t = 0; t < 20; ++t) {
    const oracle::Mat rho = oracle::hs_uniform_state(m, gen);
    const double a = log_wishart_density(HermitianMatrix::from_matrix(rho), w);
    d_scale = std::max(d_scale, std::abs(a - log_wishart_density(HermitianMatrix::from_matrix(rho), ws)));
    d_unit = std::max(d_unit, std::abs(a - log_wishart_density(HermitianMatrix::from_matrix(u * rho * u.adjoint()), w)));
  }
  out.detail << "scale dev=" << d_scale << " unitary dev=" << d_unit;
  out.check(d_scale <= 1e-10, "scale invariance");
  out.check(d_unit <= 1e-10, "commuting-unitary invariance");

  // uniform mean state, 64 real parameters, Bonferroni at 1%
  const int draws = 100000;
  RngStream rng(derive_key(1, "acceptance-mean8"), 0);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(m * m), s2 = Eigen::VectorXd::Zero(m * m);
  for (int i = 0; i < draws; ++i) {
    const auto lay = sample_uniform_state(m, rng).matrix().to_layout();
    for (int k = 0; k < m * m; ++k) s(k) += lay[k], s2(k) += lay[k] * lay[k];
  }
  double zmax = 0;
  for (int k = 0; k < m * m; ++k) {
    const double mean = s(k) / draws;
    const double se = std::sqrt((s2(k) / draws - mean * mean) / draws);
    zmax = std::max(zmax, std::abs(mean - (k < m ? 1.0 / m : 0.0)) / se);
  }
  const double zcrit = 3.42;  // two-sided 0.01 / 64
  out.detail << " mean-state max z=" << zmax;
  out.check(zmax < zcrit, "uniform mean state");

  // wide target: all 64 counts equal to 1, maximal at 1/8
  const Pom pom = Pom::tetra_power(3);
  const TargetSpec t(pom, Counts::parse("1*64"));
  const ProposalSpec p(WishartParams::identity(m, 9), HermitianMatrix(m), 0.9);
  RejectionOptions o;
  o.total = 100000;
  o.seed = 1;
  const RejectionResult r = sample_target(p, t, o);
  std::vector<double> lib;
  for (const auto& st : r.sample.states) lib.push_back(oracle::purity(oracle::Mat(st.matrix())));

  const auto t1 = oracle::tetra_effects();
  const auto eff = oracle::tensor(oracle::tensor(t1, t1), t1);
  const std::vector<double> ones(64, 1.0);
  const double lmax = oracle::log_likelihood(oracle::Mat::Identity(m, m) / double(m), eff, ones);
  std::vector<double> ora;
  std::uniform_real_distribution<double> uu(0, 1);
  while (ora.size() < 10000) {
    const oracle::Mat rho = oracle::hs_uniform_state(m, gen);
    if (uu(gen) < std::exp(oracle::log_likelihood(rho, eff, ones) - lmax)) ora.push_back(oracle::purity(rho));
  }
  std::vector<double> edges = ora;
  std::sort(edges.begin(), edges.end());
  const int bins = 20;
  std::vector<double> cut;
  for (int b = 1; b < bins; ++b) cut.push_back(edges[edges.size() * b / bins]);
  auto hist = [&](const std::vector<double>& x) {
    std::vector<double> h(bins, 0.0);
    for (double v : x) h[std::upper_bound(cut.begin(), cut.end(), v) - cut.begin()] += 1;
    return h;
  };
  const double pv = oracle::chi2_two_sample_p(hist(lib), hist(ora));
  out.detail << " accepted=" << lib.size() << " purity chi2 p=" << pv;
  out.check(lib.size() >= 1000, "enough accepted states");
  out.check(pv > 0.01, "purity histogram p > 0.01");
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"C1", "uniform sampler correctness", 10, uniform_sampler},
      {"C2", "qubit Wishart analytics", 30, qubit_analytics},
      {"C3", "qubit acceptance rates", 60, qubit_rates},
      {"C4", "ML estimator", 10, ml_checks},
      {"C5", "two-qubit acceptance rates", 1800, two_qubit_rates},
      {"C6", "non-centred two-qubit rate", 300, non_centred},
      {"C7", "FWHM approximation", 60, fwhm},
      {"C8", "Hessian oracles", 0, hessians},
      {"C9", "verification statistics", 1200, verification},
      {"C10", "higher-dimension properties", 0, higher_dimension},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && secs > c.budget_s) o.check(false, "runtime budget " + std::to_string(int(c.budget_s)) + " s");
    if (!o.pass) ++failed;
    std::printf("%s %-4s %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed;
}
