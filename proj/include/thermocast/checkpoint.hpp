#pragma once

#include <cstdint>
#include <string>

#include "thermocast/model.hpp"

namespace thermocast {

// Versioned, self-describing checkpoint container: a magic tag, a JSON
// header (schema version, full model config, scalers, RNG seed, tensor
// directory), then the raw row-major little-endian float64 payload of every
// parameter in directory order. Writing the same model twice produces
// byte-identical files.
struct Checkpoint {
    AdjointModel model;
    std::uint64_t seed = 0;
    std::string config_echo;  // JSON of the run configuration, verbatim
};

void save_checkpoint(const AdjointModel& model, std::uint64_t seed,
                     const std::string& config_echo, const std::string& path);

Checkpoint load_checkpoint(const std::string& path);

// Config (de)serialization shared by the checkpoint and the CLI.
std::string model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const std::string& json_text);

}  // namespace thermocast
