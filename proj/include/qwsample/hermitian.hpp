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

// Dense hermitian matrices, quantum states, the traceless orthonormal basis
// and the spectral primitives every other module is built on.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qwsample/error.hpp"

namespace qws {

inline constexpr int kMaxDim = 16;
inline constexpr double kPsdTolerance = 1e-12;
inline constexpr double kTraceTolerance = 1e-12;

using Complex = std::complex<double>;
// Stack storage bounded by kMaxDim keeps the per-sample hot loops allocation free.
using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;
using Spectrum = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

void check_dimension(int m);

/// Hermitian m x m matrix. Hermiticity holds exactly by construction.
///
/// The binary layout (shared with the sample chunk files) is m diagonal
/// reals followed by the (re, im) pairs of the strict upper triangle in
/// row-major order: m * m doubles in total.
class HermitianMatrix {
 public:
  HermitianMatrix() : mat_(CMatrix::Zero(1, 1)) {}
  explicit HermitianMatrix(int dim);

  static HermitianMatrix identity(int dim);
  static HermitianMatrix diagonal(std::span<const double> diag);
  /// Takes the hermitian part (A + A^dagger) / 2 of an arbitrary square matrix.
  static HermitianMatrix from_matrix(const CMatrix& a);
  static HermitianMatrix from_layout(int dim, std::span<const double> layout);

  static constexpr std::size_t layout_size(int dim) { return static_cast<std::size_t>(dim) * dim; }
  void to_layout(std::span<double> out) const;
  std::vector<double> to_layout() const;

  int dim() const { return static_cast<int>(mat_.rows()); }
  const CMatrix& matrix() const { return mat_; }
  Complex operator()(int i, int j) const { return mat_(i, j); }
  double trace() const;
  double frobenius_norm() const { return mat_.norm(); }

  HermitianMatrix& operator+=(const HermitianMatrix& o);
  HermitianMatrix& operator-=(const HermitianMatrix& o);
  HermitianMatrix& operator*=(double s);
  friend HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) { return a += b; }
  friend HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) { return a -= b; }
  friend HermitianMatrix operator*(HermitianMatrix a, double s) { return a *= s; }
  friend HermitianMatrix operator*(double s, HermitianMatrix a) { return a *= s; }

  /// Real part of tr(this * other); exact for hermitian operands.
  double trace_product(const HermitianMatrix& other) const;

 private:
  explicit HermitianMatrix(CMatrix m) : mat_(std::move(m)) {}
  CMatrix mat_;
};

/// Unit-trace hermitian matrix that is PSD up to tol times its spectral norm.
class QuantumState {
 public:
  explicit QuantumState(HermitianMatrix mat, double tol = kPsdTolerance);

  /// Wraps a matrix already known to be a state (sampler output). No checks.
  static QuantumState trusted(HermitianMatrix mat, double tol = kPsdTolerance) {
    return QuantumState(std::move(mat), tol, Unchecked{});
  }
  static QuantumState maximally_mixed(int dim);

  const HermitianMatrix& matrix() const { return mat_; }
  int dim() const { return mat_.dim(); }
  double tolerance() const { return tol_; }

 private:
  struct Unchecked {};
  QuantumState(HermitianMatrix mat, double tol, Unchecked) : mat_(std::move(mat)), tol_(tol) {}
  HermitianMatrix mat_;
  double tol_;
};

/// Orthonormal basis of the traceless hermitian matrices: tr B_l = 0 and
/// tr(B_l B_l') = delta_ll'. Generalized Gell-Mann matrices, ordered as
/// symmetric off-diagonal, antisymmetric off-diagonal, then diagonal.
class TracelessBasis {
 public:
  const std::vector<HermitianMatrix>& elements() const { return elements_; }
  const HermitianMatrix& operator[](std::size_t l) const { return elements_[l]; }
  int dim() const { return dim_; }
  std::size_t size() const { return elements_.size(); }

 private:
  friend TracelessBasis generalized_pauli_basis(int m);
  int dim_ = 0;
  std::vector<HermitianMatrix> elements_;
};

TracelessBasis generalized_pauli_basis(int m);

struct StateCoordinates {
  RealVector coords;
};

/// rho = 1/m + sum_l coords_l B_l. Works for any unit-trace hermitian matrix.
StateCoordinates to_coordinates(const HermitianMatrix& rho, const TracelessBasis& basis);
StateCoordinates to_coordinates(const QuantumState& rho, const TracelessBasis& basis);
HermitianMatrix from_coordinates(const StateCoordinates& c, const TracelessBasis& basis);

Spectrum eigenvalues(const HermitianMatrix& h);
double min_eigenvalue(const HermitianMatrix& h);
/// -inf if any eigenvalue is <= 0, otherwise the sum of log eigenvalues.
double log_det(const HermitianMatrix& h);
double log_det(const Spectrum& eigenvalues);
bool is_psd(const HermitianMatrix& h, double rel_tol = kPsdTolerance);
bool is_psd(const Spectrum& eigenvalues, double rel_tol = kPsdTolerance);
/// Principal square root; eigenvalues within tolerance of zero are clamped.
HermitianMatrix psd_sqrt(const HermitianMatrix& h, double rel_tol = kPsdTolerance);
HermitianMatrix inverse(const HermitianMatrix& h);

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double length() const;
  bool is_physical() const { return x * x + y * y + z * z <= 1.0; }
};

BlochVector to_bloch(const HermitianMatrix& rho);
HermitianMatrix from_bloch(const BlochVector& r);

/// Volume of the m-dimensional state space under the Hilbert-Schmidt measure.
double log_hs_volume(int m);
/// Throws ErrorCode::kNumerical when the value leaves the double range; use
/// log_hs_volume there.
double hs_volume(int m);

/// Kronecker product of two hermitian matrices.
HermitianMatrix kron(const HermitianMatrix& a, const HermitianMatrix& b);
/// sigma_z tensored n_qubits times.
HermitianMatrix sigma_z_power(int n_qubits);

}  // namespace qws
