#pragma once

// Univariate stochastic-volatility updates through the offset log-chi-square
// mixture approximation: indicators, forward-filter/backward-sample of the
// log-volatility path, and the (phi, sigma_eta^2) and mu blocks.

#include <array>

#include <Eigen/Dense>

#include "odcfmsv/model.hpp"
#include "odcfmsv/rng.hpp"

namespace odcf {

using Eigen::VectorXi;

struct MixtureComponent {
  double weight;
  double mean;
  double variance;
};

/// Normal mixture approximating log chi-square(1).
class MixtureTable {
 public:
  explicit MixtureTable(std::vector<MixtureComponent> components);

  /// Seven-component table of Kim, Shephard and Chib (1998); means include the -1.2704 shift.
  static const MixtureTable& ksc();

  Index size() const { return static_cast<Index>(components_.size()); }
  const MixtureComponent& operator[](Index m) const { return components_[static_cast<std::size_t>(m)]; }
  double mean() const;

 private:
  std::vector<MixtureComponent> components_;
};

inline constexpr double kDefaultOffset = 1e-5;

/// log(f^2 + c), elementwise.
VectorXd log_square_transform(const Eigen::Ref<const VectorXd>& f, double offset = kDefaultOffset);

/// Posterior component probabilities for one observation.
VectorXd indicator_posterior(double fstar, double h, const MixtureTable& table);

/// Component indices (zero-based) drawn independently per time point.
VectorXi sample_indicators(const Eigen::Ref<const VectorXd>& fstar, const Eigen::Ref<const VectorXd>& h,
                           const MixtureTable& table, Rng& rng);

struct SvSeriesParams {
  double mu;
  double phi;
  double sigma_eta_sq;
};

/// Exact draw of h_{1:T} given indicators in the conditionally Gaussian model
/// fstar_t = h_t + m_{s_t} + N(0, v_{s_t}), h_{t+1} = mu + phi (h_t - mu) + N(0, sigma_eta^2).
VectorXd ffbs_h(const Eigen::Ref<const VectorXd>& fstar, const VectorXi& s, const MixtureTable& table,
                const SvSeriesParams& sv, Rng& rng);

struct SmoothedPath {
  VectorXd mean;
  VectorXd var;
};

/// Rauch-Tung-Striebel smoother of the same model (deterministic).
SmoothedPath smooth_h(const Eigen::Ref<const VectorXd>& fstar, const VectorXi& s, const MixtureTable& table,
                      const SvSeriesParams& sv);

/// Kalman filter with mu carried as a constant Gaussian state.
struct SvMarginal {
  double loglik;   // log p(fstar | s, phi, sigma_eta^2) with mu and h integrated out
  double mu_mean;  // p(mu | fstar, s, phi, sigma_eta^2)
  double mu_var;
};

SvMarginal sv_marginal_likelihood(const Eigen::Ref<const VectorXd>& fstar, const VectorXi& s,
                                  const MixtureTable& table, double phi, double sigma_eta_sq, double mu_mean,
                                  double mu_var);

/// Random-walk Metropolis state on (atanh phi, log sigma_eta^2). The proposal
/// covariance adapts from the chain history only while `adapt` is passed true.
struct RwAdapter {
  Eigen::Matrix2d proposal_cov = (Eigen::Matrix2d() << 0.04, 0.0, 0.0, 0.09).finished();
  Eigen::Vector2d running_mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d running_m2 = Eigen::Matrix2d::Zero();
  long count = 0;
  long proposed = 0;
  long accepted = 0;

  void observe(const Eigen::Vector2d& x);
  double acceptance_rate() const { return proposed ? static_cast<double>(accepted) / proposed : 0.0; }
};

/// One MH update of (phi, sigma_eta^2) targeting p(phi, sigma_eta^2 | fstar, s)
/// with mu and the log-volatility path integrated out.
std::pair<double, double> sample_phi_sigma(const Eigen::Ref<const VectorXd>& fstar, const VectorXi& s,
                                           const MixtureTable& table, double phi, double sigma_eta_sq,
                                           const PriorConfig& priors, RwAdapter& adapter, bool adapt, Rng& rng);

/// Conjugate normal draw of mu given the log-volatility path.
double sample_mu(const Eigen::Ref<const VectorXd>& h, double phi, double sigma_eta_sq, double prior_mean,
                 double prior_var, Rng& rng);

/// Draw of mu from p(mu | fstar, s, phi, sigma_eta^2) (path integrated out).
double sample_mu_marginal(const Eigen::Ref<const VectorXd>& fstar, const VectorXi& s, const MixtureTable& table,
                          double phi, double sigma_eta_sq, const PriorConfig& priors, Rng& rng);

/// Full SV block for one series: indicators, (phi, sigma_eta^2), then (mu, h) jointly.
struct SvBlockState {
  SvSeriesParams params;
  VectorXd h;
  VectorXi s;
  RwAdapter adapter;
};

void update_sv_series(const Eigen::Ref<const VectorXd>& x, double offset, const MixtureTable& table,
                      const PriorConfig& priors, bool adapt, SvBlockState& state, Rng& rng);

}  // namespace odcf
