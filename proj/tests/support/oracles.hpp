#pragma once

// Independent reference computations used by the tests.

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "odcfmsv/svsampler.hpp"

namespace odcf::testing {

/// Posterior mean and variance of h in the conditionally Gaussian SV model by
/// dense linear algebra on the full T x T covariance.
SmoothedPath dense_sv_posterior(const VectorXd& fstar, const VectorXi& s, const MixtureTable& table,
                                const SvSeriesParams& sv);

/// log p(fstar | s, phi, sigma_eta^2) with mu ~ N(mu_mean, mu_var) and h integrated out, and the
/// posterior mean and variance of mu, from the dense joint Gaussian.
SvMarginal dense_sv_marginal(const VectorXd& fstar, const VectorXi& s, const MixtureTable& table, double phi,
                             double sigma_eta_sq, double mu_mean, double mu_var);

/// Kolmogorov-Smirnov statistic sup |F_n - F|.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Asymptotic one-sample KS critical value at the 1% level.
double ks_critical_1pct(std::size_t n);

/// Random SPD matrix with eigenvalues in [lo, hi].
MatrixXd random_spd(Index n, double lo, double hi, Rng& rng);

}  // namespace odcf::testing
