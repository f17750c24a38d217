#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace lcrbm {

inline constexpr int kRatingLevels = 5;   // K
inline constexpr int kAgeGroups = 8;      // A
inline constexpr int kGenderCount = 2;    // S

struct RatingTriple {
    int32_t user_id = 0;   // dense, 0-based
    int32_t item_id = 0;   // dense, 0-based
    int8_t rating = 0;     // 1..K
    int64_t timestamp = 0; // carried, unused
};

/// Multi-hot genre flags, one entry per genre in the dataset's vocabulary.
using GenreVector = std::vector<uint8_t>;

/// One-hot occupation / age-group / gender blocks for one user.
struct DemographicVector {
    std::vector<uint8_t> occupation; // length O, exactly one 1
    std::vector<uint8_t> age_group;  // length 8, exactly one 1
    std::vector<uint8_t> gender;     // length 2, exactly one 1
};

/// Returns the index of the single set bit; -1 if none.
int hot_index(const std::vector<uint8_t>& onehot);

struct RatingDataset {
    std::vector<RatingTriple> triples;
    int32_t num_users = 0;
    int32_t num_items = 0;
    int rating_levels = kRatingLevels;

    std::vector<GenreVector> item_genres;              // indexed by dense item id
    std::vector<DemographicVector> user_demographics;  // indexed by dense user id

    std::unordered_map<int64_t, int32_t> user_id_map;  // raw id -> dense index
    std::unordered_map<int64_t, int32_t> item_id_map;
    std::vector<int64_t> user_raw_ids;                 // dense index -> raw id
    std::vector<int64_t> item_raw_ids;

    std::vector<std::string> genre_names;       // size G
    std::vector<std::string> occupation_vocab;  // size O

    int genre_count() const { return static_cast<int>(genre_names.size()); }
    int occupation_count() const { return static_cast<int>(occupation_vocab.size()); }
};

struct FoldSplit {
    int fold_index = 0; // 1-based
    RatingDataset train;
    RatingDataset test;
};

// ---- metadata encoders ----------------------------------------------------

/// Age in years to a one-hot over the 8 age groups
/// [7-14] [15-21] [22-28] [29-36] [37-48] [49-55] [56-65] [66-73].
/// Shared boundary ages resolve to the lower group; out-of-range ages clamp.
std::vector<uint8_t> encode_age(int age_years);
int age_group_index(int age_years);

/// 1M age range codes (1, 18, 25, ...) to the midpoint age of the range they
/// name; values that are not range codes pass through as plain ages.
int age_group_midpoint_years(int code_1m);

/// 'M' -> [1,0], 'F' -> [0,1]; anything else is a ValidationError.
std::vector<uint8_t> encode_gender(char code);

/// One-hot at the vocabulary index of `label`; unknown label is a
/// ValidationError.
std::vector<uint8_t> encode_occupation(const std::string& label,
                                       const std::vector<std::string>& vocabulary);

// ---- parsers ---------------------------------------------------------------

/// Parse a MovieLens 100K directory: u.data, u.item, u.user, u.occupation
/// (and u.genre when present). Dense ids follow first appearance in the
/// metadata files.
RatingDataset parse_100k(const std::filesystem::path& data_dir);

/// Parse a MovieLens 1M directory: ratings.dat, movies.dat, users.dat
/// ("::"-separated). Genre names map onto the 100K genre ordering; unmatched
/// names extend the vocabulary. 1M age codes map onto the 8 age groups by
/// range midpoint.
RatingDataset parse_1m(const std::filesystem::path& data_dir);

/// Load the shipped u1.base/u1.test .. u5.base/u5.test splits, sharing the
/// id maps and metadata of the full parse.
std::vector<FoldSplit> load_standard_folds_100k(const std::filesystem::path& data_dir);

/// Seeded uniform partition of the triples into n test folds. Bit-identical
/// for equal seeds; test sizes differ by at most one.
std::vector<FoldSplit> make_folds(const RatingDataset& dataset, int n_folds, uint64_t seed);

/// FNV-1a over the triples; manifest guard against silent data drift.
uint64_t dataset_checksum(const RatingDataset& dataset);

} // namespace lcrbm
