#pragma once

// Dense symmetric linear algebra: spectral decompositions, PSD square roots,
// pseudo-inverses and Cameron-Martin norms. Everything is templated on the
// scalar type and accepts any Eigen expression.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "ou/error.hpp"

namespace ou {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = DenseMatrix<double>;
using Vector = DenseVector<double>;

/// Tolerances shared by the symmetric routines.
template <typename Scalar>
struct SymTolerance {
  static constexpr Scalar symmetry = Scalar(1e-12);  // relative
  static constexpr Scalar psd = Scalar(1e-10);       // absolute, scaled up by max(1, |lambda_max|)
  static constexpr Scalar rank = Scalar(1e-12);      // relative to the largest eigenvalue
};

/// Relative defect ||S - S^T||_F / ||S||_F (0 for the zero matrix).
template <typename Derived>
typename Derived::Scalar symmetry_defect(const Eigen::MatrixBase<Derived>& s) {
  using Scalar = typename Derived::Scalar;
  const Scalar scale = s.norm();
  if (scale == Scalar(0)) return Scalar(0);
  return (s - s.transpose()).norm() / scale;
}

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& s,
                  typename Derived::Scalar rel_tol = SymTolerance<typename Derived::Scalar>::symmetry) {
  return s.rows() == s.cols() && s.rows() >= 1 && symmetry_defect(s) <= rel_tol;
}

template <typename Derived>
DenseMatrix<typename Derived::Scalar> symmetrize(const Eigen::MatrixBase<Derived>& s) {
  return (s + s.transpose()) / typename Derived::Scalar(2);
}

template <typename Scalar>
struct SpectralDecomp {
  DenseVector<Scalar> eigenvalues;   // descending
  DenseMatrix<Scalar> eigenvectors;  // orthonormal columns, matching eigenvalues

  Eigen::Index dim() const { return eigenvalues.size(); }

  DenseMatrix<Scalar> reconstruct() const {
    return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
  }

  Scalar max_eigenvalue() const { return eigenvalues(0); }
  Scalar min_eigenvalue() const { return eigenvalues(dim() - 1); }
};

/// Eigen-decomposition of a symmetric matrix, eigenpairs sorted descending.
/// Throws NonSymmetric when the relative symmetry defect exceeds `sym_tol`.
template <typename Derived>
SpectralDecomp<typename Derived::Scalar> spectral(
    const Eigen::MatrixBase<Derived>& s,
    typename Derived::Scalar sym_tol = SymTolerance<typename Derived::Scalar>::symmetry) {
  using Scalar = typename Derived::Scalar;
  if (!is_symmetric(s, sym_tol)) {
    std::ostringstream msg;
    msg << "matrix " << s.rows() << "x" << s.cols() << " has relative symmetry defect "
        << (s.rows() == s.cols() ? symmetry_defect(s) : Scalar(-1));
    throw Error(ErrorCode::NonSymmetric, msg.str());
  }
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> solver(symmetrize(s));
  SpectralDecomp<Scalar> out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

template <typename Scalar>
Scalar psd_threshold(const SpectralDecomp<Scalar>& d) {
  return -SymTolerance<Scalar>::psd * std::max(Scalar(1), std::abs(d.max_eigenvalue()));
}

/// Clamps eigenvalues in [threshold, 0) to zero; anything more negative is NotPSD.
template <typename Scalar>
SpectralDecomp<Scalar> clamp_psd(SpectralDecomp<Scalar> d) {
  const Scalar floor = psd_threshold(d);
  if (d.min_eigenvalue() < floor) {
    std::ostringstream msg;
    msg << "minimum eigenvalue " << d.min_eigenvalue() << " below " << floor;
    throw Error(ErrorCode::NotPSD, msg.str());
  }
  d.eigenvalues = d.eigenvalues.cwiseMax(Scalar(0));
  return d;
}

/// Symmetrizes and removes roundoff negativity. Quadrature-built kernels pass through here.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> psd_repair(const Eigen::MatrixBase<Derived>& s) {
  auto d = clamp_psd(spectral(symmetrize(s)));
  return symmetrize(d.reconstruct());
}

template <typename Derived>
DenseMatrix<typename Derived::Scalar> sqrt_psd(const Eigen::MatrixBase<Derived>& s) {
  using Scalar = typename Derived::Scalar;
  auto d = clamp_psd(spectral(s));
  const DenseVector<Scalar> roots = d.eigenvalues.cwiseSqrt();
  return symmetrize(DenseMatrix<Scalar>(d.eigenvectors * roots.asDiagonal() * d.eigenvectors.transpose()));
}

template <typename Derived>
typename Derived::Scalar trace(const Eigen::MatrixBase<Derived>& s) {
  return s.trace();
}

/// Largest singular value.
template <typename Derived>
typename Derived::Scalar spectral_norm(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.size() == 0) return Scalar(0);
  Eigen::JacobiSVD<DenseMatrix<Scalar>> svd(m);
  return svd.singularValues()(0);
}

/// Norm and inner product of the Cameron-Martin space H_R = R(X) of a
/// symmetric non-negative R: <x, y>_{H_R} = <R^{-1}x, R^{-1}y> with R^{-1}
/// the pseudo-inverse on (ker R)^perp. Eigenvalues at or below `rank_cut`
/// are treated as kernel directions.
template <typename Scalar>
class CameronMartinMetric {
 public:
  template <typename Derived>
  explicit CameronMartinMetric(const Eigen::MatrixBase<Derived>& base,
                               std::optional<Scalar> rank_cut = std::nullopt)
      : base_(symmetrize(base)), decomp_(clamp_psd(spectral(base))) {
    const Scalar top = decomp_.max_eigenvalue();
    cut_ = rank_cut ? *rank_cut : SymTolerance<Scalar>::rank * std::max(top, Scalar(0));
    if (cut_ < Scalar(0)) throw Error(ErrorCode::BadParameter, "rank cut must be >= 0");
    rank_ = 0;
    for (Eigen::Index i = 0; i < decomp_.dim(); ++i) {
      if (decomp_.eigenvalues(i) > cut_) ++rank_;
    }
  }

  const DenseMatrix<Scalar>& base() const { return base_; }
  const SpectralDecomp<Scalar>& decomposition() const { return decomp_; }
  Scalar rank_cut() const { return cut_; }
  Eigen::Index rank() const { return rank_; }
  Eigen::Index dim() const { return decomp_.dim(); }

  /// R^{-1} y restricted to (ker R)^perp; kernel components map to 0.
  DenseVector<Scalar> pseudo_inverse_apply(const DenseVector<Scalar>& y) const {
    const auto v = range_basis();
    DenseVector<Scalar> coeffs = v.transpose() * y;
    coeffs.array() /= decomp_.eigenvalues.head(rank_).array();
    return v * coeffs;
  }

  DenseMatrix<Scalar> pseudo_inverse() const {
    const auto v = range_basis();
    DenseVector<Scalar> inv = decomp_.eigenvalues.head(rank_).cwiseInverse();
    return v * inv.asDiagonal() * v.transpose();
  }

  /// Orthogonal projection onto ker R.
  DenseVector<Scalar> kernel_projection(const DenseVector<Scalar>& y) const {
    const auto v = range_basis();
    return y - v * (v.transpose() * y);
  }

  bool in_range(const DenseVector<Scalar>& y, Scalar rel_tol = Scalar(1e-9)) const {
    return kernel_projection(y).norm() <= rel_tol * std::max(y.norm(), Scalar(1));
  }

  Scalar inner(const DenseVector<Scalar>& x, const DenseVector<Scalar>& y) const {
    return pseudo_inverse_apply(x).dot(pseudo_inverse_apply(y));
  }

  Scalar norm(const DenseVector<Scalar>& x) const { return pseudo_inverse_apply(x).norm(); }

 private:
  auto range_basis() const { return decomp_.eigenvectors.leftCols(rank_); }

  DenseMatrix<Scalar> base_;
  SpectralDecomp<Scalar> decomp_;
  Scalar cut_ = Scalar(0);
  Eigen::Index rank_ = 0;
};

template <typename Derived>
CameronMartinMetric(const Eigen::MatrixBase<Derived>&) -> CameronMartinMetric<typename Derived::Scalar>;

template <typename Scalar>
DenseVector<Scalar> pseudo_inverse_apply(const CameronMartinMetric<Scalar>& metric,
                                         const DenseVector<Scalar>& y) {
  return metric.pseudo_inverse_apply(y);
}

}  // namespace ou
