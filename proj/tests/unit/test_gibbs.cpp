#include <catch_amalgamated.hpp>

#include <cmath>

#include "geweke.hpp"
#include "odcfmsv/error.hpp"
#include "odcfmsv/gibbs.hpp"
#include "oracles.hpp"

using namespace odcf;
using Catch::Matchers::WithinAbs;

namespace {

double inverse_gamma_logpdf(double x, double shape, double scale) {
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

SimulatedData small_pg(std::uint64_t seed, Index T = 40) {
  Rng rng(seed);
  ModelParams p = reference_simulation_params();
  return simulate_pg(p.meas, p.corr, T, rng);
}

}  // namespace

TEST_CASE("collapsed_residual_ss equals y'(I + F F')^{-1} y") {
  const SimulatedData s = small_pg(1, 30);
  const MatrixXd M = MatrixXd::Identity(30, 30) + s.data.F * s.data.F.transpose();
  const VectorXd got = collapsed_residual_ss(s.data.Y, s.data.F);
  for (Index j = 0; j < s.data.p(); ++j) {
    const VectorXd y = s.data.Y.col(j);
    CHECK_THAT(got(j), WithinAbs(y.dot(M.ldlt().solve(y)), 1e-10));
  }
}

TEST_CASE("Conjugate sigma^2 and B updates match brute-force joint density ratios to 1e-8") {
  const SimulatedData s = small_pg(2, 30);
  PriorConfig pr;
  const InvGammaParams ig = sigma_sq_conditional(s.data.Y, s.data.F, pr);
  const BConditional bc = b_conditional(s.data.Y, s.data.F);
  const Index p = s.data.p(), q = s.data.q();
  Rng rng(3);
  auto cond_logpdf = [&](const VectorXd& omega, const MatrixXd& B) {
    double out = 0.0;
    for (Index j = 0; j < p; ++j) {
      out += inverse_gamma_logpdf(omega(j), ig.shape, ig.scale(j));
      out += mvn_logpdf(VectorXd((B.row(j) - bc.mean.row(j)).transpose()), MatrixXd(omega(j) * bc.sigma_b));
    }
    return out;
  };
  auto joint = [&](const VectorXd& omega, const MatrixXd& B) {
    ModelParams m = s.params;
    m.meas.omega = omega;
    m.meas.B = B;
    return log_joint(s.data, m, s.latents, pr, ModelVariant::PG);
  };
  for (int rep = 0; rep < 5; ++rep) {
    VectorXd o1(p), o2(p);
    for (Index j = 0; j < p; ++j) {
      o1(j) = 0.02 + 0.5 * rng.uniform();
      o2(j) = 0.02 + 0.5 * rng.uniform();
    }
    const MatrixXd B1 = s.params.meas.B + 0.1 * rng.normal_matrix(p, q);
    const MatrixXd B2 = s.params.meas.B + 0.1 * rng.normal_matrix(p, q);
    CHECK_THAT(cond_logpdf(o1, B1) - cond_logpdf(o2, B2), WithinAbs(joint(o1, B1) - joint(o2, B2), 1e-8));
  }
}

TEST_CASE("SV-on-errors loading conditional matches brute-force joint density ratios to 1e-8") {
  Rng rng(4);
  const ModelParams base = reference_simulation_params();
  SvParams err = SvParams::constant(10, -2.0, 0.9, 0.05);
  const SimulatedData s = simulate_sverr(base.meas.B, err, base.factor_sv, base.corr, 30, rng);
  PriorConfig pr;
  const Index j = 3;
  const VectorXd lambda = s.latents.He.col(j).array().exp();
  const auto [mean, cov] = bj_conditional(s.data.Y.col(j), s.data.F, lambda, pr.c0);
  auto joint = [&](const VectorXd& b) {
    ModelParams m = s.params;
    m.meas.B.row(j) = b.transpose();
    return log_joint(s.data, m, s.latents, pr, ModelVariant::SVERR);
  };
  for (int rep = 0; rep < 5; ++rep) {
    const VectorXd b1 = mean + 0.2 * rng.normal_vector(2), b2 = mean + 0.2 * rng.normal_vector(2);
    CHECK_THAT(mvn_logpdf(VectorXd(b1 - mean), cov) - mvn_logpdf(VectorXd(b2 - mean), cov),
               WithinAbs(joint(b1) - joint(b2), 1e-8));
  }
}

TEST_CASE("A update matches brute-force joint density ratios to 1e-8") {
  const SimulatedData s = small_pg(5, 30);
  PriorConfig pr;
  const auto& c = s.params.corr;
  const AConditional ac = a_conditional(s.latents.P, c.d, c.k, pr.a_df(2), pr.a_scale(2));
  Rng rng(6);
  auto joint = [&](const MatrixXd& a_inv) {
    ModelParams m = s.params;
    m.corr.A = SpdMatrix<double>(MatrixXd(a_inv.inverse()));
    return log_joint(s.data, m, s.latents, pr, ModelVariant::PG);
  };
  for (int rep = 0; rep < 5; ++rep) {
    const MatrixXd x1 = testing::random_spd(2, 0.2, 3.0, rng), x2 = testing::random_spd(2, 0.2, 3.0, rng);
    CHECK_THAT(wishart_logpdf(x1, ac.df, ac.scale) - wishart_logpdf(x2, ac.df, ac.scale),
               WithinAbs(joint(x1) - joint(x2), 1e-8));
  }
}

TEST_CASE("sample_B draws have the conditional mean and covariance") {
  const SimulatedData s = small_pg(7, 30);
  const BConditional bc = b_conditional(s.data.Y, s.data.F);
  Rng rng(8);
  const int n = 20000;
  const VectorXd omega = s.params.meas.omega;
  MatrixXd sum = MatrixXd::Zero(10, 2);
  double sumsq00 = 0.0;
  for (int i = 0; i < n; ++i) {
    const MatrixXd B = sample_B(s.data.Y, s.data.F, omega, rng);
    sum += B;
    sumsq00 += (B(0, 0) - bc.mean(0, 0)) * (B(0, 0) - bc.mean(0, 0));
  }
  const MatrixXd mean = sum / n;
  for (Index j = 0; j < 10; ++j)
    for (Index i = 0; i < 2; ++i)
      CHECK(std::abs(mean(j, i) - bc.mean(j, i)) < 3.5 * std::sqrt(omega(j) * bc.sigma_b(i, i) / n));
  CHECK(std::abs(sumsq00 / n / (omega(0) * bc.sigma_b(0, 0)) - 1.0) < 0.05);
}

TEST_CASE("McmcConfig validation") {
  McmcConfig c;
  c.kept = 0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c.kept = 10;
  c.thin = 0;
  CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("Chains are deterministic for a seed and store kept / thin draws") {
  const SimulatedData s = small_pg(9, 60);
  McmcConfig c;
  c.variant = ModelVariant::ODCFMSV;
  c.burn_in = 20;
  c.kept = 30;
  c.thin = 3;
  c.seed = 77;
  const ChainDraws a = run_chain(s.data, PriorConfig{}, c);
  const ChainDraws b = run_chain(s.data, PriorConfig{}, c);
  REQUIRE(a.count() == 10);
  for (long i = 0; i < a.count(); ++i) {
    REQUIRE(a.draws[i].params.meas.B == b.draws[i].params.meas.B);
    REQUIRE(a.draws[i].params.corr.d == b.draws[i].params.corr.d);
    REQUIRE(a.draws[i].params.corr.k == b.draws[i].params.corr.k);
  }
  c.seed = 78;
  const ChainDraws other = run_chain(s.data, PriorConfig{}, c);
  CHECK(other.draws.back().params.corr.d != a.draws.back().params.corr.d);
}

TEST_CASE("PG sampler recovers the loadings of simulated data") {
  const SimulatedData s = small_pg(10, 400);
  McmcConfig c;
  c.variant = ModelVariant::PG;
  c.burn_in = 300;
  c.kept = 500;
  c.seed = 3;
  const ChainDraws ch = run_chain(s.data, PriorConfig{}, c);
  const PosteriorSummary sum = summarize(ch);
  const auto truth = flatten_parameters(s.params, ModelVariant::PG);
  long covered = 0, total = 0;
  for (std::size_t i = 0; i < sum.params.size(); ++i) {
    if (sum.params[i].group != "B" && sum.params[i].group != "sigma2") continue;
    ++total;
    if (truth[i].value >= sum.params[i].lower && truth[i].value <= sum.params[i].upper) ++covered;
  }
  CHECK(total == 30);
  CHECK(covered >= 25);
}

TEST_CASE("Each variant runs every block and records diagnostics") {
  for (auto v : {ModelVariant::ODCFMSV, ModelVariant::PG, ModelVariant::SVERR}) {
    const SimulatedData s = small_pg(11, 50);
    McmcConfig c;
    c.variant = v;
    c.burn_in = 10;
    c.kept = 10;
    const ChainDraws ch = run_chain(s.data, PriorConfig{}, c);
    CHECK(ch.count() == 10);
    CHECK(ch.diagnostics.pt.proposed == 20 * 50);
    CHECK(ch.diagnostics.arms_calls == 20);
    CHECK(std::isfinite(ch.draws.back().log_joint));
    CHECK(ch.portfolio_sd_mean().size() == 50);
  }
}

TEST_CASE("Geweke joint-distribution check passes for the PG sampler at small scale") {
  testing::GewekeConfig g;
  g.variant = ModelVariant::PG;
  g.replications = 400;
  g.sweeps = 10;
  g.priors = testing::geweke_priors();
  g.seed = 2024;
  const auto r = testing::run_geweke(g);
  for (const auto& p : r.params) {
    INFO(p.name << " z = " << p.z());
    CHECK(std::abs(p.z()) < 3.0);
  }
  CHECK(r.failures == 0);
}
