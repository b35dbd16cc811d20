#pragma once

#include <cstdint>
#include <string>

#include "fedunlearn/model.hpp"
#include "fedunlearn/types.hpp"

namespace fedunlearn {

inline constexpr char kArtifactVersion[] = "0.1.0";

// On disk: one JSON header line (version, hashes, model spec, parameter
// count), a newline, then the parameters as little-endian 64-bit floats in
// ParamVector order. Round-trips bit for bit.
struct Checkpoint {
    std::string version = kArtifactVersion;
    std::uint64_t config_hash = 0;
    std::uint64_t dataset_hash = 0;
    ModelSpec model;
    ParamVector params;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);

// Throws ProvenanceError when the file was written by a different artifact
// version, ValidationError on a malformed or truncated file.
Checkpoint load_checkpoint(const std::string& path);

} // namespace fedunlearn
