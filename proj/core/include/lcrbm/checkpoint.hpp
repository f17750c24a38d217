#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lcrbm/model.hpp"

namespace lcrbm {

/// Everything needed to reuse a trained model: parameters, the master seed
/// that produced them, the case orientation, and the encoder vocabularies of
/// the dataset it was trained on.
struct Checkpoint {
    ModelParams params;
    uint64_t seed = 0;
    bool item_oriented = false;
    std::vector<std::string> genre_names;
    std::vector<std::string> occupation_vocab;
};

/// Single-file binary format: magic, version, JSON header (dims, seed,
/// vocabularies, tensor manifest), then raw little-endian doubles per
/// tensor. Round-trips losslessly.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

/// Throws ParseError on bad magic, unsupported version, or truncation;
/// ValidationError when tensor sizes disagree with the dims.
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace lcrbm
