#pragma once

// Correlation-level block: single-move Metropolis-Hastings draws of P_t with
// the prior transition as proposal, the conjugate draw of A, and the log
// posteriors of d and k used by ARMS.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "odcfmsv/arms.hpp"
#include "odcfmsv/model.hpp"

namespace odcf {

/// How the factor observation at time t enters the P_t conditional.
enum class FactorLikelihood {
  Correlation,  // eps_t ~ N(0, standardize_corr(P_t))
  Covariance,   // f_t ~ N(0, P_t)
};

struct PtStats {
  long proposed = 0;
  long accepted = 0;
  long failed = 0;  // proposals that could not be constructed or evaluated
};

/// Largest eigenvalue ratio accepted for a proposed P_t. Proposals beyond it
/// (or not numerically positive definite) are rejected.
inline constexpr double kMaxCondition = 1e12;

bool well_conditioned_spd(const MatrixXd& P, double max_condition = kMaxCondition);

/// log of the MH acceptance ratio for replacing P_curr by P_prop at one time
/// point: observation likelihood ratio plus the ratio of the successor
/// transition W(P_next^{-1} | k, S(P)), under the prior-transition proposal.
/// `P_next` may be null at t = T.
double pt_log_accept_ratio(const MatrixXd& P_prop, const MatrixXd& P_curr, const MatrixXd* P_next,
                           const VectorXd& x_t, const CorrDynParams& corr, FactorLikelihood kind);

/// One MH update of P_t. `P_prev` is P_{t-1} (identity at t = 1). Correlation
/// likelihoods use the prior-transition proposal; covariance likelihoods use the
/// conjugate W(k + 1, (S^{-1} + x x^T)^{-1}) proposal for P_t^{-1}.
MatrixXd sample_pt(const MatrixXd& P_prev, const MatrixXd& P_curr, const MatrixXd* P_next, const VectorXd& x_t,
                   const CorrDynParams& corr, FactorLikelihood kind, Rng& rng, PtStats* stats = nullptr);

/// Sweep over t = 1..T; `X` holds eps_t or f_t by row.
void sample_p_path(std::vector<MatrixXd>& P, const MatrixXd& X, const CorrDynParams& corr, FactorLikelihood kind,
                   Rng& rng, PtStats* stats = nullptr);

/// Full conditional of A^{-1}: Wishart(df, scale).
struct AConditional {
  double df;
  MatrixXd scale;
};

/// Prior A^{-1} ~ W_q(prior_df, prior_scale * I).
AConditional a_conditional(const std::vector<MatrixXd>& P, double d, double k, double prior_df, double prior_scale);

SpdMatrix<double> sample_A(const std::vector<MatrixXd>& P, double d, double k, double prior_df, double prior_scale,
                           Rng& rng);

/// Sum over t of log W_q(P_t^{-1} | k, S_{t-1}) with every P_{t-1} diagonalized
/// once. For fixed d the sum is O(1) in k.
class TransitionCache {
 public:
  TransitionCache(const std::vector<MatrixXd>& P, const MatrixXd& A);

  Index T() const { return static_cast<Index>(terms_.size()); }
  Index q() const { return q_; }

  /// sum_t tr(S_{t-1}(d)^{-1} P_t^{-1}) / k.
  double trace_sum(double d) const;
  double log_transition_sum(double d, double k) const;
  /// Same, reusing a trace_sum value computed at the same d.
  double log_transition_sum_given_trace(double d, double k, double trace) const;

 private:
  struct Term {
    VectorXd log_lambda;  // eigenvalues of P_{t-1}, log scale
    MatrixXd weights;     // G .* H
  };
  Index q_;
  double logdet_A_;
  double sum_logdet_Q_ = 0.0;
  double sum_logdet_prev_ = 0.0;
  std::vector<Term> terms_;
};

/// Log posterior of d up to a constant (uniform prior on (-1, 1)); -inf outside.
double logpost_d(double d, const std::vector<MatrixXd>& P, const MatrixXd& A, double k);
double logpost_d(double d, const TransitionCache& cache, double k);

/// Log posterior of k up to a constant (k - q ~ Exp(lambda0)); -inf for k <= q.
double logpost_k(double k, const std::vector<MatrixXd>& P, const MatrixXd& A, double d, double lambda0);
double logpost_k(double k, const TransitionCache& cache, double d, double lambda0, double trace);

/// Whitened transitions W_t = L_{t-1}^{-1} P_t^{-1} L_{t-1}^{-T}, where
/// L_{t-1} = P_{t-1}^{-d/2} chol(A) / sqrt(k). Under the model W_t ~ W_q(k, I)
/// independently of d.
std::vector<MatrixXd> wishart_innovations(const std::vector<MatrixXd>& P, const CorrDynParams& corr);
/// Inverse of wishart_innovations.
std::vector<MatrixXd> path_from_innovations(const std::vector<MatrixXd>& W, const CorrDynParams& corr);

/// Sum over t of the observation log likelihood of the P path.
double path_loglik(const std::vector<MatrixXd>& P, const MatrixXd& X, FactorLikelihood kind);

/// Random-walk proposal scale for the non-centered d move, tuned during burn-in.
struct DMoveState {
  double log_step = std::log(0.05);
  long proposed = 0;
  long accepted = 0;
};

/// Metropolis update of d with the innovations held fixed: the P path is
/// rebuilt from W under the proposed d and the step is accepted on the
/// observation likelihood ratio (the innovation law does not involve d).
/// Returns true when the move is accepted; `P` and `corr.d` are updated in place.
bool sample_d_noncentered(std::vector<MatrixXd>& P, const MatrixXd& X, CorrDynParams& corr, FactorLikelihood kind,
                          DMoveState& state, bool adapt, Rng& rng);

/// Default supports for the ARMS draws.
ArmsConfig arms_config_d();
ArmsConfig arms_config_k(Index q);

}  // namespace odcf
