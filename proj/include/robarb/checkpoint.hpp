#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "robarb/market_data.hpp"
#include "robarb/partition.hpp"
#include "robarb/trainer.hpp"

namespace robarb {

inline constexpr const char* kCheckpointSchema = "robarb.checkpoint/1";

// Trained strategy plus what is needed to resume or audit it. Matrices are
// stored column-major as flat arrays next to their shapes.
struct Checkpoint {
  StrategyNet net;
  AssetBounds bounds;
  BoxPartition partition;
  std::vector<std::string> tickers;
  std::string config_hash;  // FNV-1a of the resolved configuration, hex
};

nlohmann::json checkpoint_json(const Checkpoint& cp);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& file, const Checkpoint& cp);
Checkpoint load_checkpoint(const std::filesystem::path& file);

// Throws CompatibilityError unless d, n and B agree.
void check_compatible(const StrategyNet& net, int assets, int horizon, double bound);

}  // namespace robarb
