#include "odcfmsv/svsampler.hpp"

#include <cmath>
#include <numeric>

namespace odcf {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
}

MixtureTable::MixtureTable(std::vector<MixtureComponent> components) : components_(std::move(components)) {
  if (components_.empty()) throw DomainError("MixtureTable: no components");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight > 0.0) || !(c.variance > 0.0)) throw DomainError("MixtureTable: weights and variances must be positive");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("MixtureTable: weights must sum to one");
}

const MixtureTable& MixtureTable::ksc() {
  static const MixtureTable table({{0.00730, -10.12999 - 1.2704, 5.79596},
                                   {0.10556, -3.97281 - 1.2704, 2.61369},
                                   {0.00002, -8.56686 - 1.2704, 5.17950},
                                   {0.04395, 2.77786 - 1.2704, 0.16735},
                                   {0.34001, 0.61942 - 1.2704, 0.64009},
                                   {0.24566, 1.79518 - 1.2704, 0.34023},
                                   {0.25750, -1.08819 - 1.2704, 1.26261}});
  return table;
}

double MixtureTable::mean() const {
  double out = 0.0;
  for (const auto& c : components_) out += c.weight * c.mean;
  return out;
}

VectorXd log_square_transform(const Eigen::Ref<const VectorXd>& f, double offset) {
  if (!(offset > 0.0)) throw DomainError("log_square_transform: offset must be positive");
  return (f.array().square() + offset).log().matrix();
}

VectorXd indicator_posterior(double fstar, double h, const MixtureTable& table) {
  const Index n = table.size();
  VectorXd logw(n);
  for (Index m = 0; m < n; ++m) {
    const auto& c = table[m];
    const double r = fstar - h - c.mean;
    logw(m) = std::log(c.weight) - 0.5 * (std::log(c.variance) + r * r / c.variance);
  }
  const double top = logw.maxCoeff();
  if (!std::isfinite(top)) throw NumericalError("sample_indicators: all component weights underflow");
  VectorXd w = (logw.array() - top).exp().matrix();
  return w / w.sum();
}

VectorXi sample_indicators(const Eigen::Ref<const VectorXd>& fstar, const Eigen::Ref<const VectorXd>& h,
                           const MixtureTable& table, Rng& rng) {
  if (fstar.size() != h.size()) throw DimensionError("sample_indicators: length mismatch");
  VectorXi s(fstar.size());
  for (Index t = 0; t < fstar.size(); ++t) {
    const VectorXd w = indicator_posterior(fstar(t), h(t), table);
    double u = rng.uniform();
    Index m = 0;
    for (; m < w.size() - 1; ++m) {
      u -= w(m);
      if (u <= 0.0) break;
    }
    s(t) = static_cast<int>(m);
  }
  return s;
}

namespace {

struct ForwardPass {
  VectorXd m;  // filtered means
  VectorXd c;  // filtered variances
};

ForwardPass forward_filter(const Eigen::Ref<const VectorXd>& fstar, const VectorXi& s, const MixtureTable& table,
                           const SvSeriesParams& sv) {
  const Index T = fstar.size();
  if (s.size() != T) throw DimensionError("ffbs_h: indicator length mismatch");
  if (!(std::abs(sv.phi) < 1.0)) throw DomainError("ffbs_h: |phi| must be < 1");
  ForwardPass out{VectorXd(T), VectorXd(T)};
  double a = sv.mu;
  double r = sv.sigma_eta_sq / (1.0 - sv.phi * sv.phi);
  for (Index t = 0; t < T; ++t) {
    const auto& comp = table[s(t)];
    const double y = fstar(t) - comp.mean;
    const double f = r + comp.variance;
    if (f > 0.0) {
      out.m(t) = a + r / f * (y - a);
      out.c(t) = r * comp.variance / f;
    } else {
      out.m(t) = a;
      out.c(t) = 0.0;
    }
    if (!std::isfinite(out.m(t)) || !std::isfinite(out.c(t)))
      throw NumericalError("ffbs_h: non-finite filter moments at t = " + std::to_string(t));
    a = sv.mu + sv.phi * (out.m(t) - sv.mu);
    r = sv.phi * sv.phi * out.c(t) + sv.sigma_eta_sq;
  }
  return out;
}

}  // namespace

VectorXd ffbs_h(const Eigen::Ref<const VectorXd>& fstar, const VectorXi& s, const MixtureTable& table,
                const SvSeriesParams& sv, Rng& rng) {
  const ForwardPass fw = forward_filter(fstar, s, table, sv);
  const Index T = fstar.size();
  VectorXd h(T);
  h(T - 1) = fw.m(T - 1) + std::sqrt(fw.c(T - 1)) * rng.normal();
  for (Index t = T - 2; t >= 0; --t) {
    const double denom = sv.sigma_eta_sq + sv.phi * sv.phi * fw.c(t);
    if (denom > 0.0) {
      const double gain = fw.c(t) * sv.phi / denom;
      const double mean = fw.m(t) + gain * (h(t + 1) - sv.mu - sv.phi * (fw.m(t) - sv.mu));
      const double var = fw.c(t) * sv.sigma_eta_sq / denom;
      h(t) = mean + std::sqrt(var) * rng.normal();
    } else {
      h(t) = fw.m(t);
    }
    if (!std::isfinite(h(t))) throw NumericalError("ffbs_h: non-finite draw at t = " + std::to_string(t));
  }
  return h;
}

SmoothedPath smooth_h(const Eigen::Ref<const VectorXd>& fstar, const VectorXi& s, const MixtureTable& table,
                      const SvSeriesParams& sv) {
  const ForwardPass fw = forward_filter(fstar, s, table, sv);
  const Index T = fstar.size();
  SmoothedPath out{VectorXd(T), VectorXd(T)};
  out.mean(T - 1) = fw.m(T - 1);
  out.var(T - 1) = fw.c(T - 1);
  for (Index t = T - 2; t >= 0; --t) {
    const double a_next = sv.mu + sv.phi * (fw.m(t) - sv.mu);
    const double r_next = sv.phi * sv.phi * fw.c(t) + sv.sigma_eta_sq;
    const double j = r_next > 0.0 ? fw.c(t) * sv.phi / r_next : 0.0;
    out.mean(t) = fw.m(t) + j * (out.mean(t + 1) - a_next);
    out.var(t) = fw.c(t) + j * j * (out.var(t + 1) - r_next);
  }
  return out;
}

SvMarginal sv_marginal_likelihood(const Eigen::Ref<const VectorXd>& fstar, const VectorXi& s,
                                  const MixtureTable& table, double phi, double sigma_eta_sq, double mu_mean,
                                  double mu_var) {
  // state (x_t, mu) with x_t = h_t - mu
  Eigen::Vector2d a(0.0, mu_mean);
  Eigen::Matrix2d P;
  P << sigma_eta_sq / (1.0 - phi * phi), 0.0, 0.0, mu_var;
  double loglik = 0.0;
  const Index T = fstar.size();
  for (Index t = 0; t < T; ++t) {
    const auto& comp = table[s(t)];
    const double y = fstar(t) - comp.mean;
    const double f = P(0, 0) + 2.0 * P(0, 1) + P(1, 1) + comp.variance;
    const double e = y - a(0) - a(1);
    loglik -= 0.5 * (kLog2Pi + std::log(f) + e * e / f);
    const Eigen::Vector2d k(P(0, 0) + P(0, 1), P(0, 1) + P(1, 1));
    a += k * (e / f);
    P -= k * k.transpose() / f;
    if (t + 1 < T) {
      a(0) *= phi;
      P(0, 0) = phi * phi * P(0, 0) + sigma_eta_sq;
      P(0, 1) *= phi;
      P(1, 0) = P(0, 1);
    }
  }
  return {loglik, a(1), std::max(P(1, 1), 0.0)};
}

void RwAdapter::observe(const Eigen::Vector2d& x) {
  ++count;
  const Eigen::Vector2d delta = x - running_mean;
  running_mean += delta / static_cast<double>(count);
  running_m2 += delta * (x - running_mean).transpose();
  if (count >= 50) {
    const Eigen::Matrix2d cov = running_m2 / static_cast<double>(count - 1);
    proposal_cov = (2.38 * 2.38 / 2.0) * (cov + 1e-6 * Eigen::Matrix2d::Identity());
  }
}

std::pair<double, double> sample_phi_sigma(const Eigen::Ref<const VectorXd>& fstar, const VectorXi& s,
                                           const MixtureTable& table, double phi, double sigma_eta_sq,
                                           const PriorConfig& priors, RwAdapter& adapter, bool adapt, Rng& rng) {
  const auto log_target = [&](double ph, double s2) {
    const double lp = log_prior_phi(ph, priors) + log_prior_sigma_eta_sq(s2, priors);
    if (!std::isfinite(lp)) return -std::numeric_limits<double>::infinity();
    const SvMarginal m = sv_marginal_likelihood(fstar, s, table, ph, s2, priors.mu_mean, priors.mu_var);
    // Jacobian of (atanh phi, log sigma^2)
    return m.loglik + lp + std::log1p(-ph * ph) + std::log(s2);
  };

  const Eigen::Vector2d current(std::atanh(phi), std::log(sigma_eta_sq));
  const Eigen::Matrix2d chol = Eigen::LLT<Eigen::Matrix2d>(adapter.proposal_cov).matrixL();
  const Eigen::Vector2d proposal = current + chol * Eigen::Vector2d(rng.normal(), rng.normal());
  const double phi_new = std::tanh(proposal(0));
  const double s2_new = std::exp(proposal(1));

  Eigen::Vector2d next = current;
  ++adapter.proposed;
  if (std::abs(phi_new) < 1.0 && s2_new > 0.0 && std::isfinite(s2_new)) {
    const double log_ratio = log_target(phi_new, s2_new) - log_target(phi, sigma_eta_sq);
    if (std::log(rng.uniform()) < log_ratio) {
      next = proposal;
      ++adapter.accepted;
    }
  }
  if (adapt) adapter.observe(next);
  if (next == current) return {phi, sigma_eta_sq};
  return {phi_new, s2_new};
}

double sample_mu(const Eigen::Ref<const VectorXd>& h, double phi, double sigma_eta_sq, double prior_mean,
                 double prior_var, Rng& rng) {
  if (prior_var <= 0.0) return prior_mean;
  const Index T = h.size();
  double precision = 1.0 / prior_var + (1.0 - phi * phi) / sigma_eta_sq;
  double weighted = prior_mean / prior_var + (1.0 - phi * phi) * h(0) / sigma_eta_sq;
  for (Index t = 1; t < T; ++t) {
    precision += (1.0 - phi) * (1.0 - phi) / sigma_eta_sq;
    weighted += (1.0 - phi) * (h(t) - phi * h(t - 1)) / sigma_eta_sq;
  }
  const double var = 1.0 / precision;
  return var * weighted + std::sqrt(var) * rng.normal();
}

double sample_mu_marginal(const Eigen::Ref<const VectorXd>& fstar, const VectorXi& s, const MixtureTable& table,
                          double phi, double sigma_eta_sq, const PriorConfig& priors, Rng& rng) {
  const SvMarginal m = sv_marginal_likelihood(fstar, s, table, phi, sigma_eta_sq, priors.mu_mean, priors.mu_var);
  return m.mu_mean + std::sqrt(m.mu_var) * rng.normal();
}

void update_sv_series(const Eigen::Ref<const VectorXd>& x, double offset, const MixtureTable& table,
                      const PriorConfig& priors, bool adapt, SvBlockState& state, Rng& rng) {
  const VectorXd fstar = log_square_transform(x, offset);
  state.s = sample_indicators(fstar, state.h, table, rng);
  const auto [phi, s2] = sample_phi_sigma(fstar, state.s, table, state.params.phi, state.params.sigma_eta_sq,
                                          priors, state.adapter, adapt, rng);
  state.params.phi = phi;
  state.params.sigma_eta_sq = s2;
  state.params.mu = sample_mu_marginal(fstar, state.s, table, phi, s2, priors, rng);
  state.h = ffbs_h(fstar, state.s, table, state.params, rng);
}

}  // namespace odcf
