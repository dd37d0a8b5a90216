#pragma once

// Dense symmetric-positive-definite kernels and matrix-variate densities.
//
// Everything here is templated on the scalar type and accepts arbitrary Eigen
// expressions; results are plain dense matrices. SPD results are symmetrized
// ((M + M^T) / 2) after composition.

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "odcfmsv/error.hpp"
#include "odcfmsv/rng.hpp"

namespace odcf {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline constexpr double kDefaultEigenFloor = 1e-12;
inline constexpr double kDefaultVarianceFloor = 1e-300;

template <typename Derived>
DenseMatrix<typename Derived::Scalar> symmetrize(const Eigen::MatrixBase<Derived>& m) {
  return (m + m.transpose()) / typename Derived::Scalar(2);
}

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw DimensionError(std::string(what) + ": expected a non-empty square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

/// Lower Cholesky factor of an SPD matrix. Only the lower triangle is read.
/// Throws DecompositionError naming the first non-positive pivot.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> cholesky_spd(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  require_square(m, "cholesky_spd");
  const Eigen::Index n = m.rows();
  DenseMatrix<Scalar> l = DenseMatrix<Scalar>::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Scalar pivot = m(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > Scalar(0))) throw DecompositionError(static_cast<long>(j), static_cast<double>(pivot));
    const Scalar ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i)
      l(i, j) = (m(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / ljj;
  }
  return l;
}

/// log|M| from a lower Cholesky factor.
template <typename Derived>
typename Derived::Scalar logdet_from_cholesky(const Eigen::MatrixBase<Derived>& l) {
  return typename Derived::Scalar(2) * l.diagonal().array().log().sum();
}

template <typename Derived>
typename Derived::Scalar logdet_spd(const Eigen::MatrixBase<Derived>& m) {
  return logdet_from_cholesky(cholesky_spd(m));
}

/// SPD matrix with invariants checked on construction: symmetric to 1e-12
/// relative tolerance and positive definite.
template <typename Scalar>
class SpdMatrix {
 public:
  SpdMatrix() = default;

  template <typename Derived>
  explicit SpdMatrix(const Eigen::MatrixBase<Derived>& m) {
    require_square(m, "SpdMatrix");
    const Scalar scale = std::max(Scalar(1), m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale)
      throw DomainError("SpdMatrix: input is not symmetric");
    value_ = symmetrize(m);
    cholesky_spd(value_);
  }

  const DenseMatrix<Scalar>& matrix() const noexcept { return value_; }
  operator const DenseMatrix<Scalar>&() const noexcept { return value_; }
  Eigen::Index dim() const noexcept { return value_.rows(); }
  Scalar operator()(Eigen::Index i, Eigen::Index j) const { return value_(i, j); }

 private:
  DenseMatrix<Scalar> value_;
};

/// Unit-diagonal SPD matrix obtained by standardizing a covariance.
template <typename Scalar>
class CorrelationMatrix {
 public:
  CorrelationMatrix() = default;

  const DenseMatrix<Scalar>& matrix() const noexcept { return value_; }
  operator const DenseMatrix<Scalar>&() const noexcept { return value_; }
  Eigen::Index dim() const noexcept { return value_.rows(); }
  Scalar operator()(Eigen::Index i, Eigen::Index j) const { return value_(i, j); }

  template <typename Derived>
  friend CorrelationMatrix<typename Derived::Scalar> standardize_corr(const Eigen::MatrixBase<Derived>&,
                                                                     typename Derived::Scalar);

 private:
  explicit CorrelationMatrix(DenseMatrix<Scalar> v) : value_(std::move(v)) {}
  DenseMatrix<Scalar> value_;
};

/// (diag P)^{-1/2} P (diag P)^{-1/2} with the diagonal set to exactly one.
template <typename Derived>
CorrelationMatrix<typename Derived::Scalar> standardize_corr(
    const Eigen::MatrixBase<Derived>& p, typename Derived::Scalar variance_floor = kDefaultVarianceFloor) {
  using Scalar = typename Derived::Scalar;
  require_square(p, "standardize_corr");
  const Eigen::Index n = p.rows();
  DenseVector<Scalar> inv_sd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(p(i, i) > variance_floor))
      throw NumericalError("standardize_corr: degenerate variance at diagonal entry " + std::to_string(i));
    inv_sd(i) = Scalar(1) / std::sqrt(p(i, i));
  }
  DenseMatrix<Scalar> c(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      Scalar r = Scalar(0.5) * (p(i, j) + p(j, i)) * inv_sd(i) * inv_sd(j);
      r = std::clamp(r, Scalar(-1), Scalar(1));
      c(i, j) = r;
      c(j, i) = r;
    }
    c(j, j) = Scalar(1);
  }
  return CorrelationMatrix<Scalar>(std::move(c));
}

/// P^a through the spectral decomposition P = Q diag(lambda) Q^T.
/// Throws NearSingularError when an eigenvalue is below `floor`.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> spd_power(const Eigen::MatrixBase<Derived>& p, typename Derived::Scalar a,
                                                typename Derived::Scalar floor = kDefaultEigenFloor) {
  using Scalar = typename Derived::Scalar;
  require_square(p, "spd_power");
  if (!std::isfinite(a)) throw DomainError("spd_power: exponent must be finite");
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> es(symmetrize(p));
  if (es.info() != Eigen::Success) throw NumericalError("spd_power: eigendecomposition failed");
  const auto& lambda = es.eigenvalues();
  if (lambda.minCoeff() < floor)
    throw NearSingularError("spd_power: eigenvalue " + std::to_string(static_cast<double>(lambda.minCoeff())) +
                            " below floor " + std::to_string(static_cast<double>(floor)));
  const DenseVector<Scalar> powered = lambda.array().pow(a).matrix();
  return symmetrize(es.eigenvectors() * powered.asDiagonal() * es.eigenvectors().transpose());
}

/// log Gamma_q(a) = q(q-1)/4 log(pi) + sum_{i=1}^q log Gamma(a + (1 - i)/2).
template <typename Scalar>
Scalar log_mvgamma(int q, Scalar a) {
  if (q < 1) throw DomainError("log_mvgamma: dimension must be >= 1");
  if (!(a > Scalar(q - 1) / Scalar(2)))
    throw DomainError("log_mvgamma: argument " + std::to_string(static_cast<double>(a)) +
                      " is at or below the pole (q - 1)/2");
  Scalar out = Scalar(q) * Scalar(q - 1) / Scalar(4) * std::log(std::numbers::pi_v<Scalar>);
  for (int i = 1; i <= q; ++i) out += std::lgamma(a + Scalar(1 - i) / Scalar(2));
  return out;
}

/// Wishart draw X = C W C^T where C C^T = scale and W ~ W_q(df, I) by Bartlett.
/// `scale_factor` may be any square root of the scale matrix.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> sample_wishart_factor(typename Derived::Scalar df,
                                                            const Eigen::MatrixBase<Derived>& scale_factor,
                                                            Rng& rng) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index q = scale_factor.rows();
  if (!(df >= Scalar(q)))
    throw DomainError("sample_wishart: degrees of freedom " + std::to_string(static_cast<double>(df)) +
                      " below dimension " + std::to_string(q));
  DenseMatrix<Scalar> t = DenseMatrix<Scalar>::Zero(q, q);
  for (Eigen::Index i = 0; i < q; ++i) {
    t(i, i) = std::sqrt(static_cast<Scalar>(rng.chi_squared(static_cast<double>(df - Scalar(i)))));
    for (Eigen::Index j = 0; j < i; ++j) t(i, j) = static_cast<Scalar>(rng.normal());
  }
  const DenseMatrix<Scalar> ct = scale_factor * t;
  return symmetrize(ct * ct.transpose());
}

template <typename Derived>
DenseMatrix<typename Derived::Scalar> sample_wishart(typename Derived::Scalar df, const Eigen::MatrixBase<Derived>& s,
                                                     Rng& rng) {
  require_square(s, "sample_wishart");
  if (!(df >= typename Derived::Scalar(s.rows())))
    throw DomainError("sample_wishart: degrees of freedom below dimension");
  return sample_wishart_factor(df, cholesky_spd(s), rng);
}

/// Exact log density of W_q(X | df, S), normalizer included.
template <typename DerivedX, typename DerivedS>
typename DerivedX::Scalar wishart_logpdf(const Eigen::MatrixBase<DerivedX>& x, typename DerivedX::Scalar df,
                                         const Eigen::MatrixBase<DerivedS>& s) {
  using Scalar = typename DerivedX::Scalar;
  require_square(x, "wishart_logpdf");
  require_square(s, "wishart_logpdf");
  if (x.rows() != s.rows()) throw DimensionError("wishart_logpdf: X and S differ in dimension");
  const Eigen::Index q = x.rows();
  if (!(df > Scalar(q - 1))) throw DomainError("wishart_logpdf: degrees of freedom too small");
  const DenseMatrix<Scalar> lx = cholesky_spd(x);
  const DenseMatrix<Scalar> ls = cholesky_spd(s);
  // tr(S^{-1} X) = ||L_S^{-1} L_X||_F^2
  const DenseMatrix<Scalar> z = ls.template triangularView<Eigen::Lower>().solve(lx);
  const Scalar qd = Scalar(q);
  return (df - qd - Scalar(1)) / Scalar(2) * logdet_from_cholesky(lx) - z.squaredNorm() / Scalar(2) -
         df * qd / Scalar(2) * std::log(Scalar(2)) - df / Scalar(2) * logdet_from_cholesky(ls) -
         log_mvgamma<Scalar>(static_cast<int>(q), df / Scalar(2));
}

/// log N(x | 0, Sigma).
template <typename DerivedX, typename DerivedS>
typename DerivedX::Scalar mvn_logpdf(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedS>& sigma) {
  using Scalar = typename DerivedX::Scalar;
  const DenseMatrix<Scalar> l = cholesky_spd(sigma);
  const DenseVector<Scalar> z = l.template triangularView<Eigen::Lower>().solve(x);
  return -Scalar(0.5) * (Scalar(x.size()) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>) +
                         logdet_from_cholesky(l) + z.squaredNorm());
}

/// Draw from N(mean, C C^T) given a square-root factor C.
template <typename DerivedM, typename DerivedC>
DenseVector<typename DerivedM::Scalar> sample_mvn_factor(const Eigen::MatrixBase<DerivedM>& mean,
                                                         const Eigen::MatrixBase<DerivedC>& factor, Rng& rng) {
  return mean + factor * rng.normal_vector(mean.size()).template cast<typename DerivedM::Scalar>();
}

}  // namespace odcf
