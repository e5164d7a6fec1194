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

#include "qwsample/hermitian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "qwsample/special.hpp"

namespace qws {

void check_dimension(int m) {
  if (m < 1 || m > kMaxDim)
    fail(ErrorCode::kInvalidDimension,
         "dimension " + std::to_string(m) + " outside [1, " + std::to_string(kMaxDim) + "]");
}

HermitianMatrix::HermitianMatrix(int dim) {
  check_dimension(dim);
  mat_ = CMatrix::Zero(dim, dim);
}

HermitianMatrix HermitianMatrix::identity(int dim) {
  check_dimension(dim);
  return HermitianMatrix(CMatrix(CMatrix::Identity(dim, dim)));
}

HermitianMatrix HermitianMatrix::diagonal(std::span<const double> diag) {
  const int m = static_cast<int>(diag.size());
  HermitianMatrix h(m);
  for (int i = 0; i < m; ++i) h.mat_(i, i) = diag[i];
  return h;
}

HermitianMatrix HermitianMatrix::from_matrix(const CMatrix& a) {
  require(a.rows() == a.cols(), ErrorCode::kDimensionMismatch, "matrix is not square");
  check_dimension(static_cast<int>(a.rows()));
  CMatrix h = (a + a.adjoint()) * 0.5;
  return HermitianMatrix(std::move(h));
}

HermitianMatrix HermitianMatrix::from_layout(int dim, std::span<const double> layout) {
  check_dimension(dim);
  if (layout.size() != layout_size(dim))
    fail(ErrorCode::kDimensionMismatch, "layout has " + std::to_string(layout.size()) + " values, expected " +
                                            std::to_string(layout_size(dim)));
  CMatrix m(dim, dim);
  std::size_t pos = 0;
  for (int i = 0; i < dim; ++i) m(i, i) = layout[pos++];
  for (int i = 0; i < dim; ++i) {
    for (int j = i + 1; j < dim; ++j) {
      const Complex v(layout[pos], layout[pos + 1]);
      pos += 2;
      m(i, j) = v;
      m(j, i) = std::conj(v);
    }
  }
  return HermitianMatrix(std::move(m));
}

void HermitianMatrix::to_layout(std::span<double> out) const {
  const int d = dim();
  require(out.size() == layout_size(d), ErrorCode::kDimensionMismatch, "layout buffer size mismatch");
  std::size_t pos = 0;
  for (int i = 0; i < d; ++i) out[pos++] = mat_(i, i).real();
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      out[pos++] = mat_(i, j).real();
      out[pos++] = mat_(i, j).imag();
    }
  }
}

std::vector<double> HermitianMatrix::to_layout() const {
  std::vector<double> out(layout_size(dim()));
  to_layout(out);
  return out;
}

double HermitianMatrix::trace() const { return mat_.diagonal().real().sum(); }

HermitianMatrix& HermitianMatrix::operator+=(const HermitianMatrix& o) {
  require(o.dim() == dim(), ErrorCode::kDimensionMismatch, "dimension mismatch in sum");
  mat_ += o.mat_;
  return *this;
}

HermitianMatrix& HermitianMatrix::operator-=(const HermitianMatrix& o) {
  require(o.dim() == dim(), ErrorCode::kDimensionMismatch, "dimension mismatch in difference");
  mat_ -= o.mat_;
  return *this;
}

HermitianMatrix& HermitianMatrix::operator*=(double s) {
  mat_ *= s;
  return *this;
}

double HermitianMatrix::trace_product(const HermitianMatrix& other) const {
  require(other.dim() == dim(), ErrorCode::kDimensionMismatch, "dimension mismatch in trace product");
  // tr(AB) = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij) for hermitian B.
  double acc = 0.0;
  const int d = dim();
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) {
      const Complex a = mat_(i, j);
      const Complex b = other.mat_(i, j);
      acc += a.real() * b.real() + a.imag() * b.imag();
    }
  }
  return acc;
}

QuantumState::QuantumState(HermitianMatrix mat, double tol) : mat_(std::move(mat)), tol_(tol) {
  require(tol >= 0.0, ErrorCode::kInvalidArgument, "negative PSD tolerance");
  const double tr = mat_.trace();
  if (!(std::abs(tr - 1.0) <= kTraceTolerance))
    fail(ErrorCode::kInvalidArgument, "state trace deviates from 1 by " + std::to_string(tr - 1.0));
  if (!is_psd(mat_, tol))
    fail(ErrorCode::kNotPositive, "state has negative eigenvalue " + std::to_string(min_eigenvalue(mat_)));
}

QuantumState QuantumState::maximally_mixed(int dim) {
  return trusted(HermitianMatrix::identity(dim) * (1.0 / dim));
}

TracelessBasis generalized_pauli_basis(int m) {
  if (m < 2) fail(ErrorCode::kInvalidDimension, "basis needs m >= 2, got " + std::to_string(m));
  check_dimension(m);
  TracelessBasis basis;
  basis.dim_ = m;
  basis.elements_.reserve(static_cast<std::size_t>(m) * m - 1);
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;

  for (int j = 0; j < m; ++j) {
    for (int k = j + 1; k < m; ++k) {
      CMatrix b = CMatrix::Zero(m, m);
      b(j, k) = inv_sqrt2;
      b(k, j) = inv_sqrt2;
      basis.elements_.push_back(HermitianMatrix::from_matrix(b));
    }
  }
  for (int j = 0; j < m; ++j) {
    for (int k = j + 1; k < m; ++k) {
      CMatrix b = CMatrix::Zero(m, m);
      b(j, k) = Complex(0.0, -inv_sqrt2);
      b(k, j) = Complex(0.0, inv_sqrt2);
      basis.elements_.push_back(HermitianMatrix::from_matrix(b));
    }
  }
  for (int l = 1; l < m; ++l) {
    const double norm = 1.0 / std::sqrt(static_cast<double>(l) * (l + 1));
    CMatrix b = CMatrix::Zero(m, m);
    for (int j = 0; j < l; ++j) b(j, j) = norm;
    b(l, l) = -l * norm;
    basis.elements_.push_back(HermitianMatrix::from_matrix(b));
  }
  return basis;
}

StateCoordinates to_coordinates(const HermitianMatrix& rho, const TracelessBasis& basis) {
  require(rho.dim() == basis.dim(), ErrorCode::kDimensionMismatch, "state and basis dimensions differ");
  StateCoordinates c{RealVector(static_cast<Eigen::Index>(basis.size()))};
  for (std::size_t l = 0; l < basis.size(); ++l) c.coords(static_cast<Eigen::Index>(l)) = rho.trace_product(basis[l]);
  return c;
}

StateCoordinates to_coordinates(const QuantumState& rho, const TracelessBasis& basis) {
  return to_coordinates(rho.matrix(), basis);
}

HermitianMatrix from_coordinates(const StateCoordinates& c, const TracelessBasis& basis) {
  require(static_cast<std::size_t>(c.coords.size()) == basis.size(), ErrorCode::kDimensionMismatch,
          "coordinate vector length does not match basis");
  HermitianMatrix rho = HermitianMatrix::identity(basis.dim()) * (1.0 / basis.dim());
  for (std::size_t l = 0; l < basis.size(); ++l) rho += basis[l] * c.coords(static_cast<Eigen::Index>(l));
  return rho;
}

Spectrum eigenvalues(const HermitianMatrix& h) {
  const int d = h.dim();
  if (d == 1) return Spectrum::Constant(1, h(0, 0).real());
  if (d == 2) {
    // Closed form; avoids the iterative solver in the qubit hot loops.
    const double a = h(0, 0).real();
    const double c = h(1, 1).real();
    const double mean = 0.5 * (a + c);
    const double r = std::hypot(0.5 * (a - c), std::abs(h(0, 1)));
    Spectrum s(2);
    s << mean - r, mean + r;
    return s;
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.matrix(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

double min_eigenvalue(const HermitianMatrix& h) { return eigenvalues(h).minCoeff(); }

double log_det(const Spectrum& ev) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (!(ev(i) > 0.0)) return -std::numeric_limits<double>::infinity();
    acc += std::log(ev(i));
  }
  return acc;
}

double log_det(const HermitianMatrix& h) { return log_det(eigenvalues(h)); }

bool is_psd(const Spectrum& ev, double rel_tol) {
  const double scale = ev.cwiseAbs().maxCoeff();
  return ev.minCoeff() >= -rel_tol * scale;
}

bool is_psd(const HermitianMatrix& h, double rel_tol) { return is_psd(eigenvalues(h), rel_tol); }

HermitianMatrix psd_sqrt(const HermitianMatrix& h, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.matrix());
  Spectrum ev = solver.eigenvalues();
  if (!is_psd(ev, rel_tol))
    fail(ErrorCode::kNotPositive, "square root of a matrix with eigenvalue " + std::to_string(ev.minCoeff()));
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = std::sqrt(std::max(ev(i), 0.0));
  const CMatrix& v = solver.eigenvectors();
  CMatrix root = v * ev.asDiagonal() * v.adjoint();
  return HermitianMatrix::from_matrix(root);
}

HermitianMatrix inverse(const HermitianMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.matrix());
  Spectrum ev = solver.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  require(ev.cwiseAbs().minCoeff() > 1e-14 * scale, ErrorCode::kNumerical, "matrix is singular");
  const CMatrix& v = solver.eigenvectors();
  CMatrix inv = v * ev.cwiseInverse().asDiagonal() * v.adjoint();
  return HermitianMatrix::from_matrix(inv);
}

double BlochVector::length() const { return std::sqrt(x * x + y * y + z * z); }

BlochVector to_bloch(const HermitianMatrix& rho) {
  require(rho.dim() == 2, ErrorCode::kInvalidDimension, "Bloch vectors exist for m = 2 only");
  // x = tr(rho sigma_x) = 2 Re rho_01, y = tr(rho sigma_y) = -2 Im rho_01.
  return {2.0 * rho(0, 1).real(), -2.0 * rho(0, 1).imag(), rho(0, 0).real() - rho(1, 1).real()};
}

HermitianMatrix from_bloch(const BlochVector& r) {
  CMatrix m(2, 2);
  m(0, 0) = 0.5 * (1.0 + r.z);
  m(1, 1) = 0.5 * (1.0 - r.z);
  m(0, 1) = Complex(0.5 * r.x, -0.5 * r.y);
  m(1, 0) = Complex(0.5 * r.x, 0.5 * r.y);
  return HermitianMatrix::from_matrix(m);
}

double log_hs_volume(int m) {
  require(m >= 2, ErrorCode::kInvalidDimension, "state-space volume needs m >= 2");
  const double md = m;
  return 0.5 * (md * (md - 1.0) * std::numbers::ln2 + std::log(md)) + log_multivariate_gamma(m, m) -
         std::lgamma(md * md);
}

double hs_volume(int m) {
  const double lv = log_hs_volume(m);
  const double v = std::exp(lv);
  if (!std::isnormal(v))
    fail(ErrorCode::kNumerical,
         "state-space volume for m = " + std::to_string(m) + " leaves double range; use log_hs_volume");
  return v;
}

double log_multivariate_gamma(int m, int n) {
  require(m >= 1 && n >= m, ErrorCode::kInvalidArgument, "multivariate gamma needs n >= m >= 1");
  double acc = 0.5 * m * (m - 1.0) * std::log(std::numbers::pi);
  for (int j = 1; j <= m; ++j) acc += std::lgamma(static_cast<double>(n - j + 1));
  return acc;
}

HermitianMatrix kron(const HermitianMatrix& a, const HermitianMatrix& b) {
  const int da = a.dim();
  const int db = b.dim();
  check_dimension(da * db);
  CMatrix k(da * db, da * db);
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < da; ++j) k.block(i * db, j * db, db, db) = a(i, j) * b.matrix();
  return HermitianMatrix::from_matrix(k);
}

HermitianMatrix sigma_z_power(int n_qubits) {
  require(n_qubits >= 1, ErrorCode::kInvalidArgument, "need at least one qubit");
  const std::vector<double> z{1.0, -1.0};
  HermitianMatrix sz = HermitianMatrix::diagonal(z);
  HermitianMatrix acc = sz;
  for (int q = 1; q < n_qubits; ++q) acc = kron(acc, sz);
  return acc;
}

}  // namespace qws
