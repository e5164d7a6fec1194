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

// Quantum Wishart states: gaussian matrix draws, the direct state sampler,
// its exact log-density, uniform (Hilbert-Schmidt) sampling and the qubit
// closed forms.

#include <Eigen/Dense>

#include "qwsample/hermitian.hpp"
#include "qwsample/rng.hpp"

namespace qws {

/// m x n complex matrix of independent standard complex normals.
struct GaussianMatrix {
  int m = 0;
  int n = 0;
  Eigen::MatrixXcd entries;
};

GaussianMatrix sample_standard_gaussian(int m, int n, RngStream& rng);

/// W^Q_m(n, Sigma) with its cached factorizations and constants.
class WishartParams {
 public:
  WishartParams(int n, HermitianMatrix sigma);
  static WishartParams identity(int m, int n);

  int m() const { return sigma_.dim(); }
  int n() const { return n_; }
  const HermitianMatrix& sigma() const { return sigma_; }
  const HermitianMatrix& sigma_sqrt() const { return sigma_sqrt_; }
  const HermitianMatrix& sigma_inverse() const { return sigma_inv_; }
  double log_det_sigma() const { return log_det_sigma_; }
  /// log Gamma(mn) - log Gamma_m(n) - 1/2 log(2^{m(m-1)} m)
  double log_normalization() const { return log_norm_; }
  bool sigma_is_identity() const { return identity_; }

 private:
  int n_;
  HermitianMatrix sigma_;
  HermitianMatrix sigma_sqrt_;
  HermitianMatrix sigma_inv_;
  double log_det_sigma_ = 0.0;
  double log_norm_ = 0.0;
  bool identity_ = false;
};

/// Traces below this are redrawn.
inline constexpr double kTraceUnderflow = 1e-300;

/// rho = S Psi Psi^dagger S / tr(...) with S = Sigma^(1/2).
QuantumState sample_wishart_state(const WishartParams& p, RngStream& rng);
QuantumState sample_uniform_state(int m, RngStream& rng);

/// log g(rho) with respect to (d rho). -inf outside the PSD cone, and on its
/// boundary when n > m. Accepts non-unit-trace input only through the trusted
/// overload below.
double log_wishart_density(const QuantumState& rho, const WishartParams& p);
double log_wishart_density(const HermitianMatrix& rho, const WishartParams& p);
/// Skips the PSD test; log_det_rho must be the log determinant of rho.
double log_wishart_density_trusted(const HermitianMatrix& rho, double log_det_rho, const WishartParams& p);

/// Location of the maximum of g for n > m.
QuantumState wishart_peak(const WishartParams& p);

/// Closed forms for m = 2, Sigma equivalent to cosh(theta) + sinh(theta) sigma_z.
///
/// Coordinates: z along sigma_z, s = transverse radius / sqrt(1 - z^2) in
/// [0, 1), phi the azimuth. The three marginals factorize.
class QubitMarginals {
 public:
  QubitMarginals(int n, double theta);

  int n() const { return n_; }
  double theta() const { return theta_; }

  double s_density(double s) const;
  double phi_density(double phi) const;
  double z_density(double z) const;
  /// Marginal of the Bloch x coordinate.
  double x_density(double x) const;
  /// Mode of z_density.
  double z_mode() const;
  /// Probability of z in [a, b].
  double z_probability(double a, double b) const;
  double x_probability(double a, double b) const;

 private:
  int n_;
  double theta_;
  double log_norm_;
};

/// theta for which the Wishart peak of a qubit sits at Bloch z = z_peak.
double qubit_theta_for_peak(int n, double z_peak);

}  // namespace qws
