#pragma once

// Self-describing chain checkpoints (JSON, full double precision) carrying the
// configuration hash, sweep index, rng state and everything the sampler needs
// to continue bit-exactly.

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "odcfmsv/gibbs.hpp"

namespace odcf {

using Json = nlohmann::json;

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

/// Hash of everything that determines a chain: data, priors and MCMC settings
/// (the kept-sweep count excluded so a finished chain can be extended).
std::uint64_t chain_config_hash(const FactorDataset& data, const PriorConfig& priors, const McmcConfig& config);

Json matrix_to_json(const MatrixXd& m);
MatrixXd matrix_from_json(const Json& j);
Json vector_to_json(const VectorXd& v);
VectorXd vector_from_json(const Json& j);

Json to_json(const PriorConfig& p);
PriorConfig priors_from_json(const Json& j);
Json to_json(const McmcConfig& c);
McmcConfig mcmc_from_json(const Json& j);
Json to_json(const ModelParams& p);
ModelParams params_from_json(const Json& j);
Json to_json(const LatentState& l);
LatentState latents_from_json(const Json& j);
Json to_json(const ChainState& s);
ChainState chain_state_from_json(const Json& j);
Json to_json(const ChainDraws& d);
ChainDraws chain_draws_from_json(const Json& j);

struct Checkpoint {
  std::uint64_t config_hash = 0;
  long sweeps_done = 0;
  std::string rng_state;
  McmcConfig config;
  PriorConfig priors;
  Index T = 0, p = 0, q = 0;
  ChainState state;
  ChainDraws draws;
};

Checkpoint capture(const GibbsSampler& sampler);
/// Copies a checkpoint into a sampler built on the same data and settings.
/// Throws DataError when the configuration hash differs.
void restore(GibbsSampler& sampler, const Checkpoint& ckpt);

Json to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(const Json& j);

/// Atomic write (temporary file, then rename).
void save_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace odcf
