#pragma once

#include <optional>
#include <string>

#include "fnet/model.hpp"
#include "fnet/train.hpp"

namespace fnet {

// Binary checkpoint: magic + version, a JSON header (model config, training
// position), then a manifest of (name, shape, byte offset) into a flat f64
// blob holding parameters, batch-norm buffers, and Adam moments. Round trips
// bit-exactly; wrong magic or version is refused with DataError.
void save_checkpoint(const std::string& path, const Model& model, const TrainState* training);

struct LoadedCheckpoint {
    Model model;
    std::optional<TrainState> training;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace fnet
