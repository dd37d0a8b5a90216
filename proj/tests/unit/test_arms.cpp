#include <catch_amalgamated.hpp>

#include <cmath>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>

#include "odcfmsv/arms.hpp"
#include "odcfmsv/error.hpp"
#include "oracles.hpp"

using namespace odcf;

namespace {

// Successive ARMS transitions from a fixed start; thinned to reduce the
// Metropolis-step autocorrelation before the KS test.
std::vector<double> arms_chain(const std::function<double(double)>& logf, const ArmsConfig& cfg, double x0, int n,
                               int thin, Rng& rng) {
  std::vector<double> out;
  double x = x0;
  for (int i = 0; i < n * thin; ++i) {
    x = arms(logf, cfg, x, rng);
    if ((i + 1) % thin == 0) out.push_back(x);
  }
  return out;
}

}  // namespace

TEST_CASE("ARMS reproduces N(0,1) at the 1% KS level") {
  Rng rng(101);
  ArmsConfig cfg;
  cfg.lo = -10.0;
  cfg.hi = 10.0;
  const auto xs = arms_chain([](double x) { return -0.5 * x * x; }, cfg, 0.3, 4000, 1, rng);
  const boost::math::normal_distribution<double> nd;
  const double d = testing::ks_statistic(xs, [&](double x) { return boost::math::cdf(nd, x); });
  INFO("KS D = " << d);
  CHECK(d < testing::ks_critical_1pct(xs.size()));
}

TEST_CASE("ARMS reproduces Gamma(3,1) at the 1% KS level") {
  Rng rng(102);
  ArmsConfig cfg;
  cfg.lo = 0.0;
  cfg.hi = 40.0;
  const auto xs = arms_chain([](double x) { return 2.0 * std::log(x) - x; }, cfg, 2.0, 4000, 1, rng);
  const boost::math::gamma_distribution<double> gd(3.0, 1.0);
  const double d = testing::ks_statistic(xs, [&](double x) { return boost::math::cdf(gd, x); });
  INFO("KS D = " << d);
  CHECK(d < testing::ks_critical_1pct(xs.size()));
}

TEST_CASE("ARMS handles a bimodal, non-log-concave target") {
  Rng rng(103);
  ArmsConfig cfg;
  cfg.lo = -8.0;
  cfg.hi = 8.0;
  auto logf = [](double x) { return std::log(0.5 * std::exp(-0.5 * (x - 2) * (x - 2)) + 0.5 * std::exp(-0.5 * (x + 2) * (x + 2))); };
  const auto xs = arms_chain(logf, cfg, 2.0, 4000, 2, rng);
  const boost::math::normal_distribution<double> a(2.0, 1.0), b(-2.0, 1.0);
  const double d = testing::ks_statistic(
      xs, [&](double x) { return 0.5 * boost::math::cdf(a, x) + 0.5 * boost::math::cdf(b, x); });
  INFO("KS D = " << d);
  CHECK(d < testing::ks_critical_1pct(xs.size()));
}

TEST_CASE("ArmsEnvelope dominates a concave log density between abscissae") {
  auto f = [](double x) { return -0.5 * x * x; };
  std::vector<double> x{-2.0, -0.5, 0.7, 2.5}, y;
  for (double v : x) y.push_back(f(v));
  const ArmsEnvelope env(-5.0, 5.0, x, y);
  for (double z = -4.9; z < 4.9; z += 0.01) REQUIRE(env.log_hull(z) >= f(z) - 1e-12);
}

TEST_CASE("ARMS rejects invalid configurations") {
  Rng rng(104);
  ArmsConfig cfg;
  cfg.lo = 1.0;
  cfg.hi = 0.0;
  CHECK_THROWS_AS(arms([](double) { return 0.0; }, cfg, 0.5, rng), DomainError);
}

TEST_CASE("ARMS is deterministic given the stream") {
  ArmsConfig cfg;
  cfg.lo = -10.0;
  cfg.hi = 10.0;
  Rng a(5), b(5);
  auto f = [](double x) { return -0.5 * x * x; };
  for (int i = 0; i < 20; ++i) REQUIRE(arms(f, cfg, 0.1, a) == arms(f, cfg, 0.1, b));
}
