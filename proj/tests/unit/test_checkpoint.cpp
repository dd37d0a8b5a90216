#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "odcfmsv/checkpoint.hpp"
#include "odcfmsv/error.hpp"

using namespace odcf;

namespace {

FactorDataset fixture(Index T = 40) {
  Rng rng(21);
  const ModelParams p = reference_simulation_params();
  return simulate_odcfmsv(p.meas, p.factor_sv, p.corr, T, rng).data;
}

McmcConfig short_config(ModelVariant v) {
  McmcConfig c;
  c.variant = v;
  c.burn_in = 15;
  c.kept = 20;
  c.thin = 2;
  c.seed = 99;
  return c;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("odcfmsv_test_" + name);
}

}  // namespace

TEST_CASE("Matrices survive JSON at full precision") {
  Rng rng(1);
  const MatrixXd m = rng.normal_matrix(3, 4) * 1e-7 + MatrixXd::Constant(3, 4, 1.0 / 3.0);
  const MatrixXd back = matrix_from_json(Json::parse(matrix_to_json(m).dump()));
  CHECK(back == m);
  const VectorXd v = rng.normal_vector(5);
  CHECK(vector_from_json(Json::parse(vector_to_json(v).dump())) == v);
}

TEST_CASE("Priors reject unknown keys and invalid values") {
  CHECK_THROWS_AS(priors_from_json(Json{{"nu_zero", 3.0}}), DomainError);
  CHECK_THROWS_AS(priors_from_json(Json{{"nu0", -1.0}}), DomainError);
  const PriorConfig p = priors_from_json(Json{{"lambda0", 0.05}});
  CHECK(p.lambda0 == 0.05);
  CHECK(p.nu0 == PriorConfig{}.nu0);
}

TEST_CASE("The configuration hash tracks data, priors and settings but not the kept count") {
  const FactorDataset d = fixture();
  const PriorConfig pr;
  McmcConfig c = short_config(ModelVariant::ODCFMSV);
  const auto h = chain_config_hash(d, pr, c);
  CHECK(h == chain_config_hash(d, pr, c));
  McmcConfig longer = c;
  longer.kept = 500;
  CHECK(h == chain_config_hash(d, pr, longer));
  McmcConfig seed = c;
  seed.seed = 100;
  CHECK(h != chain_config_hash(d, pr, seed));
  PriorConfig pr2;
  pr2.c0 = 4.0;
  CHECK(h != chain_config_hash(d, pr2, c));
  FactorDataset d2 = d;
  d2.Y(3, 3) += 1e-12;
  CHECK(h != chain_config_hash(d2, pr, c));
}

TEST_CASE("A chain resumed from a checkpoint is bit-identical to an uninterrupted chain") {
  for (auto v : {ModelVariant::ODCFMSV, ModelVariant::PG, ModelVariant::SVERR}) {
    const FactorDataset d = fixture();
    const McmcConfig c = short_config(v);
    GibbsSampler full(d, PriorConfig{}, c);
    full.run();

    for (long stop : {7L, 15L, 24L}) {
      GibbsSampler first(d, PriorConfig{}, c);
      first.run([&](long sweep) { return sweep < stop; });
      REQUIRE(first.sweeps_done() == stop);
      const auto path = temp_path("resume.json");
      save_checkpoint(path.string(), capture(first));

      GibbsSampler resumed(d, PriorConfig{}, c);
      restore(resumed, load_checkpoint(path.string()));
      resumed.run();
      std::filesystem::remove(path);

      INFO(to_string(v) << " stopped at " << stop);
      CHECK(to_json(resumed.state()).dump() == to_json(full.state()).dump());
      CHECK(to_json(resumed.draws()).dump() == to_json(full.draws()).dump());
      CHECK(resumed.rng().state() == full.rng().state());
    }
  }
}

TEST_CASE("A finished chain can be extended with more kept sweeps") {
  const FactorDataset d = fixture();
  McmcConfig c = short_config(ModelVariant::PG);
  GibbsSampler first(d, PriorConfig{}, c);
  first.run();
  const Checkpoint ck = capture(first);
  c.kept = 40;
  GibbsSampler extended(d, PriorConfig{}, c);
  restore(extended, ck);
  extended.run();
  CHECK(extended.draws().count() == 20);
}

TEST_CASE("Restoring into a different configuration fails") {
  const FactorDataset d = fixture();
  const McmcConfig c = short_config(ModelVariant::PG);
  GibbsSampler a(d, PriorConfig{}, c);
  a.run([](long s) { return s < 3; });
  McmcConfig other = c;
  other.seed = 5;
  GibbsSampler b(d, PriorConfig{}, other);
  CHECK_THROWS_AS(restore(b, capture(a)), DataError);
}

TEST_CASE("Malformed checkpoint files are data errors") {
  const auto path = temp_path("bad.json");
  {
    std::ofstream(path) << "{\"format\": 3";
  }
  CHECK_THROWS_AS(load_checkpoint(path.string()), DataError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/ckpt.json"), DataError);
}
