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

#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qwsample/target.hpp"

using namespace qws;

namespace {
oracle::Mat to_mat(const HermitianMatrix& h) { return oracle::Mat(h.matrix()); }

Counts counts(std::initializer_list<double> v) {
  Counts c;
  c.nu = v;
  return c;
}
}  // namespace

TEST_CASE("tetrahedron is a SIC") {
  const Pom t = Pom::tetrahedron();
  REQUIRE(t.size() == 4);
  HermitianMatrix sum(2);
  for (std::size_t k = 0; k < 4; ++k) {
    sum += t[k];
    for (std::size_t l = 0; l < 4; ++l)
      CHECK(t[k].trace_product(t[l]) == doctest::Approx(k == l ? 0.25 : 1.0 / 12).epsilon(1e-14));
  }
  CHECK((sum - HermitianMatrix::identity(2)).frobenius_norm() < 1e-15);
}

TEST_CASE("named measurements") {
  CHECK(Pom::from_name("tetra").size() == 4);
  const Pom t2 = Pom::from_name("tetra^2");
  CHECK(t2.dim() == 4);
  CHECK(t2.size() == 16);
  CHECK(Pom::tetra_power(3).size() == 64);
  CHECK_THROWS_AS(Pom::from_name("cube"), Error);
  CHECK_THROWS_AS(Pom::from_name("tetra^0"), Error);
}

TEST_CASE("tensor ordering") {
  const Pom t = Pom::tetrahedron();
  const Pom tt = tensor_pom(t, t);
  for (std::size_t l = 0; l < 4; ++l)
    for (std::size_t j = 0; j < 4; ++j) CHECK((tt[4 * l + j] - kron(t[l], t[j])).frobenius_norm() < 1e-15);
}

TEST_CASE("effects must be complete and positive") {
  const double a[] = {0.5, 0.5};
  const double b[] = {0.4, 0.4};
  CHECK_THROWS_AS(Pom({HermitianMatrix::diagonal(a), HermitianMatrix::diagonal(b)}), Error);
  const double c[] = {1.2, 1.0};
  const double d[] = {-0.2, 0.0};
  CHECK_THROWS_AS(Pom({HermitianMatrix::diagonal(c), HermitianMatrix::diagonal(d)}), Error);
}

TEST_CASE("count parsing") {
  CHECK(Counts::parse("25*4").nu == std::vector<double>{25, 25, 25, 25});
  CHECK(Counts::parse("1, 2;3  4").nu == std::vector<double>{1, 2, 3, 4});
  CHECK(Counts::parse("2.5*2 1").total() == 6.0);
  CHECK_THROWS_AS(Counts::parse(""), Error);
  CHECK_THROWS_AS(Counts::parse("x"), Error);
  CHECK_THROWS_AS(Counts::parse("-1 2"), Error);
  CHECK_THROWS_AS(Counts::parse("3*0"), Error);
  CHECK_THROWS_AS(Counts::parse("3*1.5"), Error);
  CHECK_THROWS_AS(TargetSpec(Pom::tetrahedron(), counts({1, 2, 3})), Error);
}

TEST_CASE("Born rule and likelihood") {
  std::mt19937_64 gen(3);
  const Pom p = Pom::tetra_power(2);
  const oracle::Mat rho = oracle::hs_uniform_state(4, gen);
  const RealVector q = born_probabilities(HermitianMatrix::from_matrix(rho), p);
  std::vector<oracle::Mat> eff;
  for (std::size_t k = 0; k < p.size(); ++k) {
    eff.push_back(to_mat(p[k]));
    CHECK(q(k) == doctest::Approx((eff.back() * rho).trace().real()).epsilon(1e-14));
  }
  Counts c;
  for (int k = 0; k < 16; ++k) c.nu.push_back(k % 5);
  const TargetSpec spec(p, c);
  CHECK(log_target_density(HermitianMatrix::from_matrix(rho), spec) ==
        doctest::Approx(oracle::log_likelihood(rho, eff, c.nu)).epsilon(1e-13));
  const double bad[] = {1.1, -0.1, 0.0, 0.0};
  CHECK(std::isinf(log_target_density(HermitianMatrix::diagonal(bad), spec)));
}

TEST_CASE("interior qubit ML equals linear inversion") {
  const std::vector<double> nu = {10, 20, 25, 45};
  const TargetSpec spec(Pom::tetrahedron(), counts({10, 20, 25, 45}));
  const MlResult r = ml_estimator(spec);
  CHECK(r.converged);
  CHECK(r.rank == 2);
  const auto li = oracle::tetra_linear_inversion(nu);
  const BlochVector b = to_bloch(r.rho_ml.matrix());
  CHECK(b.x == doctest::Approx(li[0]).epsilon(1e-6));
  CHECK(b.y == doctest::Approx(li[1]).epsilon(1e-6));
  CHECK(b.z == doctest::Approx(li[2]).epsilon(1e-6));
  CHECK(r.kkt_residual < 1e-6);
  const HermitianMatrix up = unconstrained_peak(spec, generalized_pauli_basis(2));
  CHECK((up - r.rho_ml.matrix()).frobenius_norm() < 1e-8);
}

TEST_CASE("boundary qubit ML is pure") {
  const TargetSpec spec(Pom::tetrahedron(), counts({0, 0, 0, 10}));
  const MlResult r = ml_estimator(spec);
  CHECK(r.rank == 1);
  const BlochVector b = to_bloch(r.rho_ml.matrix());
  const double s = 1.0 / std::sqrt(3.0);
  CHECK(b.x == doctest::Approx(s).epsilon(1e-4));
  CHECK(b.y == doctest::Approx(s).epsilon(1e-4));
  CHECK(b.z == doctest::Approx(s).epsilon(1e-4));
  CHECK(r.log_f_max == doctest::Approx(10 * std::log(0.5)).epsilon(1e-6));
  CHECK(r.kkt_residual < 1e-6);
}

TEST_CASE("permissible frequencies are reproduced") {
  std::mt19937_64 gen(12);
  const oracle::Mat rho = oracle::hs_uniform_state(4, gen);
  const Pom p = Pom::tetra_power(2);
  const RealVector q = born_probabilities(HermitianMatrix::from_matrix(rho), p);
  Counts c;
  for (Eigen::Index k = 0; k < q.size(); ++k) c.nu.push_back(1000.0 * q(k));
  const MlResult r = ml_estimator(TargetSpec(p, c));
  CHECK(r.rank == 4);
  CHECK((to_mat(r.rho_ml.matrix()) - rho).norm() < 1e-8);
  CHECK(is_permissible_probabilities(q, p));
  RealVector edge = RealVector::Zero(4);
  edge(0) = 1.0;
  CHECK_FALSE(is_permissible_probabilities(edge, Pom::tetrahedron()));
}

TEST_CASE("shape matrix F is the negative Hessian of log f") {
  std::mt19937_64 gen(40);
  for (int k : {1, 2}) {
    const int m = 1 << k;
    const Pom p = Pom::tetra_power(k);
    const TracelessBasis b = generalized_pauli_basis(m);
    const oracle::Mat rho0 = oracle::hs_uniform_state(m, gen);
    Counts c;
    const RealVector q = born_probabilities(HermitianMatrix::from_matrix(rho0), p);
    for (Eigen::Index i = 0; i < q.size(); ++i) c.nu.push_back(std::round(500.0 * q(i)) + 1.0);
    const TargetSpec spec(p, c);
    const HermitianMatrix at = HermitianMatrix::from_matrix(rho0);
    auto lf = [&](const Eigen::VectorXd& x) { return log_target_density_trusted(from_coordinates({x}, b), spec); };
    const Eigen::MatrixXd h = -oracle::fd_hessian(lf, to_coordinates(at, b).coords, 1e-4);
    const RealMatrix f = shape_matrix_F(spec, b, at);
    CHECK((f - h).norm() / h.norm() < 1e-5);
  }
}
