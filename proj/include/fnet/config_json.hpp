#pragma once

#include <json.hpp>

#include "fnet/model.hpp"
#include "fnet/oracle.hpp"
#include "fnet/relax.hpp"
#include "fnet/train.hpp"

namespace fnet {

// Strict (de)serialization: unknown keys raise DataError, missing keys keep
// defaults. Every CLI flag maps onto one of these JSON keys.
nlohmann::json to_json(const BasisConfig& c);
nlohmann::json to_json(const ModelConfig& c);
nlohmann::json to_json(const TrainConfig& c);
nlohmann::json to_json(const RelaxConfig& c);
nlohmann::json to_json(const LennardJonesOracle::Config& c);

BasisConfig basis_config_from_json(const nlohmann::json& j);
ModelConfig model_config_from_json(const nlohmann::json& j);
TrainConfig train_config_from_json(const nlohmann::json& j);
RelaxConfig relax_config_from_json(const nlohmann::json& j);
LennardJonesOracle::Config oracle_config_from_json(const nlohmann::json& j);

nlohmann::json load_json_file(const std::string& path);

}  // namespace fnet
