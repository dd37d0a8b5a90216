#include "odcfmsv/wishartsampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace odcf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct PtContext {
  const CorrDynParams& corr;
  MatrixXd a_inv;
  MatrixXd a_chol_scaled;  // chol(A) / sqrt(k)

  explicit PtContext(const CorrDynParams& c)
      : corr(c),
        a_inv(c.A.matrix().inverse()),
        a_chol_scaled(cholesky_spd(c.A.matrix()) / std::sqrt(c.k)) {}
};

bool usable(const std::vector<MatrixXd>& P) {
  return std::all_of(P.begin(), P.end(), [](const MatrixXd& m) { return well_conditioned_spd(m); });
}

double observation_loglik(const MatrixXd& P, const VectorXd& x, FactorLikelihood kind) {
  if (kind == FactorLikelihood::Correlation) return mvn_logpdf(x, standardize_corr(P).matrix());
  return mvn_logpdf(x, P);
}

// Terms of log W(Q_next | k, S(P)) that depend on P.
double successor_terms(const MatrixXd& P, const MatrixXd& Q_next, const PtContext& ctx) {
  const double d = ctx.corr.d, k = ctx.corr.k;
  const MatrixXd half = spd_power(P, 0.5 * d);
  const double tr = (ctx.a_inv * half * Q_next * half).trace();
  return 0.5 * k * d * logdet_spd(P) - 0.5 * k * tr;
}

double log_accept(const MatrixXd& P_prop, const MatrixXd& P_curr, const MatrixXd* Q_next, const VectorXd& x,
                  FactorLikelihood kind, const PtContext& ctx) {
  double out = observation_loglik(P_prop, x, kind) - observation_loglik(P_curr, x, kind);
  if (Q_next) out += successor_terms(P_prop, *Q_next, ctx) - successor_terms(P_curr, *Q_next, ctx);
  return out;
}

MatrixXd pt_step(const MatrixXd& P_prev, const MatrixXd& P_curr, const MatrixXd* Q_next, const VectorXd& x,
                 FactorLikelihood kind, const PtContext& ctx, Rng& rng, PtStats* stats) {
  if (stats) ++stats->proposed;
  try {
    // S_{t-1} = C C^T with C = P_{t-1}^{-d/2} chol(A) / sqrt(k)
    const MatrixXd factor = spd_power(P_prev, -0.5 * ctx.corr.d) * ctx.a_chol_scaled;
    MatrixXd Q_prop;
    double ratio = 0.0;
    if (kind == FactorLikelihood::Covariance) {
      // x ~ N(0, Q^{-1}) is conjugate to the transition: propose from W(k + 1, (S^{-1} + x x^T)^{-1}),
      // leaving only the successor terms in the ratio.
      const MatrixXd s_inv = symmetrize((factor * factor.transpose()).inverse());
      const MatrixXd post_scale = symmetrize(MatrixXd(s_inv + x * x.transpose()).inverse());
      Q_prop = sample_wishart_factor(ctx.corr.k + 1.0, cholesky_spd(post_scale), rng);
    } else {
      Q_prop = sample_wishart_factor(ctx.corr.k, factor, rng);
    }
    const MatrixXd P_prop = symmetrize(Q_prop.inverse());
    if (!well_conditioned_spd(P_prop)) {
      if (stats) ++stats->failed;
      return P_curr;
    }
    if (kind == FactorLikelihood::Covariance) {
      if (Q_next) ratio = successor_terms(P_prop, *Q_next, ctx) - successor_terms(P_curr, *Q_next, ctx);
    } else {
      ratio = log_accept(P_prop, P_curr, Q_next, x, kind, ctx);
    }
    if (std::isnan(ratio)) {
      if (stats) ++stats->failed;
      return P_curr;
    }
    if (std::log(rng.uniform()) < ratio) {
      if (stats) ++stats->accepted;
      return P_prop;
    }
  } catch (const NumericalError&) {
    if (stats) ++stats->failed;
  }
  return P_curr;
}

}  // namespace

bool well_conditioned_spd(const MatrixXd& P, double max_condition) {
  if (!P.allFinite()) return false;
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(P, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) return false;
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  return lo > 0.0 && hi < max_condition * lo && std::isfinite(hi);
}

double pt_log_accept_ratio(const MatrixXd& P_prop, const MatrixXd& P_curr, const MatrixXd* P_next,
                           const VectorXd& x_t, const CorrDynParams& corr, FactorLikelihood kind) {
  const PtContext ctx(corr);
  if (!P_next) return log_accept(P_prop, P_curr, nullptr, x_t, kind, ctx);
  const MatrixXd Q_next = symmetrize(P_next->inverse());
  return log_accept(P_prop, P_curr, &Q_next, x_t, kind, ctx);
}

MatrixXd sample_pt(const MatrixXd& P_prev, const MatrixXd& P_curr, const MatrixXd* P_next, const VectorXd& x_t,
                   const CorrDynParams& corr, FactorLikelihood kind, Rng& rng, PtStats* stats) {
  const PtContext ctx(corr);
  if (!P_next) return pt_step(P_prev, P_curr, nullptr, x_t, kind, ctx, rng, stats);
  const MatrixXd Q_next = symmetrize(P_next->inverse());
  return pt_step(P_prev, P_curr, &Q_next, x_t, kind, ctx, rng, stats);
}

void sample_p_path(std::vector<MatrixXd>& P, const MatrixXd& X, const CorrDynParams& corr, FactorLikelihood kind,
                   Rng& rng, PtStats* stats) {
  const Index T = static_cast<Index>(P.size());
  if (X.rows() != T || X.cols() != corr.q()) throw DimensionError("sample_p_path: factor matrix shape mismatch");
  const PtContext ctx(corr);
  const MatrixXd eye = MatrixXd::Identity(corr.q(), corr.q());
  for (Index t = 0; t < T; ++t) {
    const MatrixXd& prev = t == 0 ? eye : P[static_cast<std::size_t>(t - 1)];
    const VectorXd x = X.row(t).transpose();
    auto& cur = P[static_cast<std::size_t>(t)];
    if (t + 1 < T) {
      const MatrixXd Q_next = symmetrize(P[static_cast<std::size_t>(t + 1)].inverse());
      cur = pt_step(prev, cur, &Q_next, x, kind, ctx, rng, stats);
    } else {
      cur = pt_step(prev, cur, nullptr, x, kind, ctx, rng, stats);
    }
  }
}

AConditional a_conditional(const std::vector<MatrixXd>& P, double d, double k, double prior_df, double prior_scale) {
  if (!(prior_scale > 0.0)) throw DomainError("sample_A: prior scale must be positive");
  Index q = 0;
  if (!P.empty()) q = P.front().rows();
  else throw DomainError("a_conditional: empty path has no dimension; use the prior directly");
  MatrixXd acc = MatrixXd::Identity(q, q) / prior_scale;
  MatrixXd prev_half = MatrixXd::Identity(q, q);
  for (std::size_t t = 0; t < P.size(); ++t) {
    if (t > 0) prev_half = spd_power(P[t - 1], 0.5 * d);
    acc += k * symmetrize(prev_half * P[t].inverse() * prev_half);
  }
  return {prior_df + static_cast<double>(P.size()) * k, symmetrize(acc.inverse())};
}

SpdMatrix<double> sample_A(const std::vector<MatrixXd>& P, double d, double k, double prior_df, double prior_scale,
                           Rng& rng) {
  const AConditional c = a_conditional(P, d, k, prior_df, prior_scale);
  const MatrixXd a_inv = sample_wishart(c.df, c.scale, rng);
  return SpdMatrix<double>(symmetrize(a_inv.inverse()));
}

TransitionCache::TransitionCache(const std::vector<MatrixXd>& P, const MatrixXd& A) : q_(A.rows()) {
  logdet_A_ = logdet_spd(A);
  const MatrixXd a_inv = symmetrize(A.inverse());
  terms_.reserve(P.size());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es;
  for (std::size_t t = 0; t < P.size(); ++t) {
    es.compute(P[t], Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
      throw NearSingularError("TransitionCache: P path is not positive definite at t = " + std::to_string(t + 1));
    sum_logdet_Q_ -= es.eigenvalues().array().log().sum();
    const MatrixXd Q = symmetrize(P[t].inverse());
    Term term;
    if (t == 0) {
      term.log_lambda = VectorXd::Zero(q_);
      term.weights = a_inv.cwiseProduct(Q);
    } else {
      es.compute(P[t - 1]);
      if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
        throw NearSingularError("TransitionCache: P path is not positive definite at t = " + std::to_string(t));
      term.log_lambda = es.eigenvalues().array().log().matrix();
      const MatrixXd& U = es.eigenvectors();
      term.weights = (U.transpose() * a_inv * U).cwiseProduct(U.transpose() * Q * U);
      sum_logdet_prev_ += term.log_lambda.sum();
    }
    terms_.push_back(std::move(term));
  }
}

double TransitionCache::trace_sum(double d) const {
  double total = 0.0;
  for (const auto& term : terms_) {
    const VectorXd s = (0.5 * d * term.log_lambda).array().exp().matrix();
    total += s.dot(term.weights * s);
  }
  return total;
}

double TransitionCache::log_transition_sum_given_trace(double d, double k, double trace) const {
  const double T = static_cast<double>(terms_.size());
  const double q = static_cast<double>(q_);
  // log|S_{t-1}| = -q log k + log|A| - d log|P_{t-1}|
  return 0.5 * (k - q - 1.0) * sum_logdet_Q_ - 0.5 * k * trace - 0.5 * k * q * T * std::numbers::ln2 -
         0.5 * k * (T * (-q * std::log(k) + logdet_A_) - d * sum_logdet_prev_) -
         T * log_mvgamma<double>(static_cast<int>(q_), 0.5 * k);
}

double TransitionCache::log_transition_sum(double d, double k) const {
  return log_transition_sum_given_trace(d, k, trace_sum(d));
}

double logpost_d(double d, const TransitionCache& cache, double k) {
  if (!(d > -1.0 && d < 1.0)) return kNegInf;
  const double v = cache.log_transition_sum(d, k) - std::numbers::ln2;
  return std::isfinite(v) ? v : kNegInf;
}

double logpost_d(double d, const std::vector<MatrixXd>& P, const MatrixXd& A, double k) {
  if (!(d > -1.0 && d < 1.0)) return kNegInf;
  try {
    return logpost_d(d, TransitionCache(P, A), k);
  } catch (const NumericalError&) {
    return kNegInf;
  }
}

double logpost_k(double k, const TransitionCache& cache, double d, double lambda0, double trace) {
  const double q = static_cast<double>(cache.q());
  if (!(k > q)) return kNegInf;
  const double v = cache.log_transition_sum_given_trace(d, k, trace) + std::log(lambda0) - lambda0 * (k - q);
  return std::isfinite(v) ? v : kNegInf;
}

double logpost_k(double k, const std::vector<MatrixXd>& P, const MatrixXd& A, double d, double lambda0) {
  const double q = static_cast<double>(A.rows());
  if (!(k > q)) return kNegInf;
  try {
    const TransitionCache cache(P, A);
    return logpost_k(k, cache, d, lambda0, cache.trace_sum(d));
  } catch (const NumericalError&) {
    return kNegInf;
  }
}

std::vector<MatrixXd> wishart_innovations(const std::vector<MatrixXd>& P, const CorrDynParams& corr) {
  const Index q = corr.q();
  const MatrixXd chol_a = cholesky_spd(corr.A.matrix()) / std::sqrt(corr.k);
  std::vector<MatrixXd> W;
  W.reserve(P.size());
  MatrixXd prev_pow = MatrixXd::Identity(q, q);  // P_{t-1}^{d/2}
  for (std::size_t t = 0; t < P.size(); ++t) {
    if (t > 0) prev_pow = spd_power(P[t - 1], 0.5 * corr.d);
    // L^{-1} = (chol_a)^{-1} P_{t-1}^{d/2}
    const MatrixXd l_inv = chol_a.triangularView<Eigen::Lower>().solve(prev_pow);
    W.push_back(symmetrize(l_inv * P[t].inverse() * l_inv.transpose()));
  }
  return W;
}

std::vector<MatrixXd> path_from_innovations(const std::vector<MatrixXd>& W, const CorrDynParams& corr) {
  const Index q = corr.q();
  const MatrixXd chol_a = cholesky_spd(corr.A.matrix()) / std::sqrt(corr.k);
  std::vector<MatrixXd> P;
  P.reserve(W.size());
  MatrixXd prev = MatrixXd::Identity(q, q);
  for (std::size_t t = 0; t < W.size(); ++t) {
    const MatrixXd l = spd_power(prev, -0.5 * corr.d) * chol_a;
    prev = symmetrize((l * W[t] * l.transpose()).inverse());
    P.push_back(prev);
  }
  return P;
}

double path_loglik(const std::vector<MatrixXd>& P, const MatrixXd& X, FactorLikelihood kind) {
  if (X.rows() != static_cast<Index>(P.size())) throw DimensionError("path_loglik: length mismatch");
  double out = 0.0;
  for (std::size_t t = 0; t < P.size(); ++t)
    out += observation_loglik(P[t], X.row(static_cast<Index>(t)).transpose(), kind);
  return out;
}

bool sample_d_noncentered(std::vector<MatrixXd>& P, const MatrixXd& X, CorrDynParams& corr, FactorLikelihood kind,
                          DMoveState& state, bool adapt, Rng& rng) {
  ++state.proposed;
  const double d_new = corr.d + std::exp(state.log_step) * rng.normal();
  bool accepted = false;
  if (d_new > -1.0 && d_new < 1.0) {
    try {
      const auto W = wishart_innovations(P, corr);
      CorrDynParams proposal = corr;
      proposal.d = d_new;
      auto P_new = path_from_innovations(W, proposal);
      if (!usable(P_new)) throw NearSingularError("sample_d_noncentered: rebuilt path is ill-conditioned");
      const double ratio = path_loglik(P_new, X, kind) - path_loglik(P, X, kind);
      if (std::log(rng.uniform()) < ratio) {
        P = std::move(P_new);
        corr.d = d_new;
        accepted = true;
      }
    } catch (const NumericalError&) {
      // a path that cannot be rebuilt is a rejection
    }
  }
  if (accepted) ++state.accepted;
  if (adapt) {
    // Robbins-Monro toward 0.44 acceptance, step size decaying with the count
    const double gain = 1.0 / std::sqrt(static_cast<double>(state.proposed));
    state.log_step += gain * ((accepted ? 1.0 : 0.0) - 0.44);
    state.log_step = std::clamp(state.log_step, std::log(1e-4), std::log(1.0));
  }
  return accepted;
}

ArmsConfig arms_config_d() { return ArmsConfig{-1.0, 1.0}; }

ArmsConfig arms_config_k(Index q) {
  const double lo = static_cast<double>(q);
  return ArmsConfig{lo, lo + 1000.0};
}

}  // namespace odcf
