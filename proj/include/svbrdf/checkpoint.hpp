#pragma once

#include <map>
#include <string>
#include <vector>

#include "svbrdf/models.hpp"
#include "svbrdf/optim.hpp"

namespace svbrdf::nn {

// Versioned little-endian container:
//   "SVCK" | u32 version | meta entries | named tensors | optimizer groups
// Meta keys are sorted (std::map) so identical state always produces
// identical bytes.
using CheckpointMeta = std::map<std::string, std::string>;

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr char kArchId[] = "svbrdf-gan-v1";

struct OptimizerSnapshot {
  std::string name;  // "nr", "pdp", "d"
  std::int64_t step = 0;
  std::vector<AdamParamState> states;
};

void save_checkpoint(const std::string& path, const Generator& g, const Discriminator& d,
                     const CheckpointMeta& meta,
                     const std::vector<OptimizerSnapshot>& optimizers = {});

// Loads into freshly constructed models; throws DataError on bad magic,
// unknown version, truncation, unknown tensor names or shape mismatches.
CheckpointMeta load_checkpoint(const std::string& path, Generator& g, Discriminator& d,
                               std::vector<OptimizerSnapshot>* optimizers = nullptr);

}  // namespace svbrdf::nn
