#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lcrbm/dataset.hpp"
#include "lcrbm/rng.hpp"

namespace lcrbm {

enum class LabelVariant { none, item_genre, user_demographic };

const char* variant_name(LabelVariant v);
LabelVariant variant_from_name(const std::string& name);

struct ModelDims {
    int32_t visible_units = 0; // movies for user cases, users for item cases
    int rating_levels = kRatingLevels;
    int hidden_units = 100;
    LabelVariant variant = LabelVariant::none;
    int genre_count = 0;      // item_genre only
    int occupation_count = 0; // user_demographic only
    int age_groups = kAgeGroups;
    int gender_count = kGenderCount;
};

/// Throws ValidationError unless dimensions are positive and the label
/// dimensions match the variant.
void validate_dims(const ModelDims& dims);

/// Label-to-hidden couplings. Each weight matrix is stored label-major with
/// the hidden axis contiguous: row(b) = F weights of label value b.
struct LabelLayers {
    std::vector<double> genre_w, genre_bias;           // [G][F], [G]
    std::vector<double> occupation_w, occupation_bias; // [O][F], [O]
    std::vector<double> age_w, age_bias;               // [A][F], [A]
    std::vector<double> gender_w, gender_bias;         // [S][F], [S]
};

/// All trainable parameters of one model.
///
/// The rating weight tensor couples hidden unit j with level k of visible
/// unit i; it is stored so that the F hidden weights of one (unit, level)
/// pair are contiguous: weights[(i*K + k)*F + j].
struct ModelParams {
    ModelDims dims;
    std::vector<double> weights;  // [m][K][F]
    std::vector<double> vis_bias; // [m][K]
    std::vector<double> hid_bias; // [F]
    LabelLayers labels;

    std::span<double> w_block(int unit, int level) {
        const size_t off = (static_cast<size_t>(unit) * dims.rating_levels + level) *
                           dims.hidden_units;
        return {weights.data() + off, static_cast<size_t>(dims.hidden_units)};
    }
    std::span<const double> w_block(int unit, int level) const {
        const size_t off = (static_cast<size_t>(unit) * dims.rating_levels + level) *
                           dims.hidden_units;
        return {weights.data() + off, static_cast<size_t>(dims.hidden_units)};
    }
    size_t parameter_count() const;
};

/// Returns the F-wide row of a label-major matrix.
inline std::span<const double> label_row(const std::vector<double>& mat, int index,
                                         int hidden_units) {
    return {mat.data() + static_cast<size_t>(index) * hidden_units,
            static_cast<size_t>(hidden_units)};
}

/// One observed rating inside a case. Levels are 0-based (rating - 1).
struct ActiveUnit {
    int32_t unit = 0;
    int32_t level = 0;
};

/// One case: all observed ratings of one user (or one movie, for item
/// orientation) plus the case's observed labels. Unobserved units simply do
/// not appear; they contribute nothing anywhere.
struct TrainingCase {
    int64_t case_id = 0;
    std::vector<ActiveUnit> active; // sorted by unit, unique units
    GenreVector genre;              // multi-hot flags, item_genre variant
    int occupation = -1;            // one-hot indices, user_demographic variant
    int age_group = -1;
    int gender = -1;
};

struct CaseSet {
    ModelDims dims;
    std::vector<TrainingCase> cases;
    bool item_oriented = false; // true: cases are movies, units are users
};

/// One case per user holding that user's train ratings over item units.
/// variant user_demographic attaches the user's demographics; plain attaches
/// nothing. Users without ratings produce no case.
CaseSet build_user_cases(const RatingDataset& train, LabelVariant variant,
                         int hidden_units);

/// One case per movie holding its ratings over user units, genre flags
/// attached (variant item_genre). Movies without ratings produce no case.
CaseSet build_item_cases(const RatingDataset& train, int hidden_units);

// ---- conditionals ----------------------------------------------------------

/// x := hid_bias + sum of w_block(unit, level) over the given assignment.
void hidden_input_visible(const ModelParams& p, std::span<const ActiveUnit> assignment,
                          std::span<double> x);

/// Adds genre couplings for every set flag (data side, multi-hot).
void add_genre_input(const ModelParams& p, std::span<const uint8_t> flags,
                     std::span<double> x);
/// Adds the couplings of a single genre value (chain side, one-hot).
void add_genre_input(const ModelParams& p, int genre, std::span<double> x);
/// Adds occupation, age-group and gender couplings; -1 entries are skipped.
void add_demographic_input(const ModelParams& p, int occupation, int age_group,
                           int gender, std::span<double> x);

/// p(h_j = 1 | case data and labels) for all j. Only the case's active units
/// and its labels contribute.
void hidden_given_visible(const ModelParams& p, const TrainingCase& c,
                          std::span<double> probs);

/// p(v_unit = k | hidden sample) over the K levels; probs sums to 1.
void visible_given_hidden(const ModelParams& p, std::span<const uint8_t> hidden,
                          int unit, std::span<double> probs);

/// Softmax label conditionals given a hidden sample; each block sums to 1.
void genre_given_hidden(const ModelParams& p, std::span<const uint8_t> hidden,
                        std::span<double> probs);
void occupation_given_hidden(const ModelParams& p, std::span<const uint8_t> hidden,
                             std::span<double> probs);
void age_given_hidden(const ModelParams& p, std::span<const uint8_t> hidden,
                      std::span<double> probs);
void gender_given_hidden(const ModelParams& p, std::span<const uint8_t> hidden,
                         std::span<double> probs);

/// Joint energy of (visible assignment, labels, hidden) where the visible
/// assignment and labels are the case's; sums run only over active units.
double energy(const ModelParams& p, const TrainingCase& c,
              std::span<const uint8_t> hidden);

// ---- Gibbs sampling --------------------------------------------------------

struct HiddenState {
    std::vector<double> probs;    // p(h_j = 1 | current visible and labels)
    std::vector<uint8_t> samples; // 0/1 draw from probs
};

/// Mutable state of one negative chain. Visible levels cover exactly the
/// case's active units; labels are single sampled values.
struct ChainState {
    std::vector<ActiveUnit> visible;
    HiddenState hidden;
    int genre = -1;
    int occupation = -1;
    int age_group = -1;
    int gender = -1;
    std::vector<double> scratch; // softmax workspace
};

/// Initializes the chain at the data: hidden.probs = p(h|data) (this is the
/// positive-phase statistic), hidden.samples drawn from it, visible levels
/// copied from the case. Labels start unset; the first sweep samples them.
void start_chain(const ModelParams& p, const TrainingCase& c, ChainState& state,
                 Rng& rng);

/// One full sweep: resample every active visible unit and the label blocks
/// from the current hidden sample, then recompute hidden.probs against the
/// reconstruction and resample hidden.samples. After T sweeps, hidden.probs
/// is the chain-end statistic and visible/labels hold the T-th
/// reconstruction.
void gibbs_step(const ModelParams& p, const TrainingCase& c, ChainState& state,
                Rng& rng);

// ---- initialization --------------------------------------------------------

/// Seeded initial parameters: weights and label weights Normal(0, 0.01^2),
/// hidden biases zero, visible and label biases at Laplace-smoothed log
/// frequencies of the training cases.
ModelParams init_params(const ModelDims& dims, const CaseSet& train, uint64_t seed);

} // namespace lcrbm
