#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace fixtures {

/// Hand-written 4-user / 5-movie / 12-rating directory in the 100K file
/// layout (u.data, u.item, u.user, u.genre, u.occupation), with known
/// contents the parser tests assert against.
std::filesystem::path write_tiny_100k(const std::filesystem::path& dir);

/// Same content re-expressed in the 1M layout (ratings.dat, movies.dat,
/// users.dat).
std::filesystem::path write_tiny_1m(const std::filesystem::path& dir);

struct SyntheticConfig {
    int users = 60;
    int items = 40;
    int ratings_per_user = 12;
    uint64_t seed = 7;
    bool standard_folds = true; // also emit u1..u5 .base/.test partitions
};

/// Generated dataset in the 100K layout with planted structure: users belong
/// to latent taste groups, items to genre clusters, and ratings follow a
/// group-cluster affinity plus noise, so a real model has signal to find.
/// Demographics correlate with the taste groups.
std::filesystem::path write_synthetic_100k(const std::filesystem::path& dir,
                                           const SyntheticConfig& synth);

} // namespace fixtures
