#include "lcrbm/model.hpp"

#include <algorithm>
#include <cmath>

#include "lcrbm/errors.hpp"
#include "lcrbm/numeric.hpp"

namespace lcrbm {

const char* variant_name(LabelVariant v) {
    switch (v) {
        case LabelVariant::none: return "plain";
        case LabelVariant::item_genre: return "item";
        case LabelVariant::user_demographic: return "user";
    }
    return "plain";
}

LabelVariant variant_from_name(const std::string& name) {
    if (name == "plain") return LabelVariant::none;
    if (name == "item") return LabelVariant::item_genre;
    if (name == "user") return LabelVariant::user_demographic;
    throw ValidationError("unknown variant \"" + name + "\" (plain, item, user)");
}

void validate_dims(const ModelDims& dims) {
    if (dims.visible_units < 1) throw ValidationError("model needs at least one visible unit");
    if (dims.rating_levels < 1) throw ValidationError("rating levels must be >= 1");
    if (dims.hidden_units < 0) throw ValidationError("hidden unit count must be >= 0");
    if (dims.variant == LabelVariant::item_genre && dims.genre_count < 1)
        throw ValidationError("item variant needs genre_count >= 1");
    if (dims.variant == LabelVariant::user_demographic &&
        (dims.occupation_count < 1 || dims.age_groups < 1 || dims.gender_count < 1))
        throw ValidationError("user variant needs occupation/age/gender dimensions >= 1");
}

size_t ModelParams::parameter_count() const {
    return weights.size() + vis_bias.size() + hid_bias.size() + labels.genre_w.size() +
           labels.genre_bias.size() + labels.occupation_w.size() +
           labels.occupation_bias.size() + labels.age_w.size() + labels.age_bias.size() +
           labels.gender_w.size() + labels.gender_bias.size();
}

CaseSet build_user_cases(const RatingDataset& train, LabelVariant variant,
                         int hidden_units) {
    if (variant == LabelVariant::item_genre)
        throw ValidationError("item variant uses item-oriented cases");
    CaseSet set;
    set.item_oriented = false;
    set.dims.visible_units = train.num_items;
    set.dims.rating_levels = train.rating_levels;
    set.dims.hidden_units = hidden_units;
    set.dims.variant = variant;
    if (variant == LabelVariant::user_demographic) {
        set.dims.occupation_count = train.occupation_count();
        set.dims.age_groups = kAgeGroups;
        set.dims.gender_count = kGenderCount;
    }
    validate_dims(set.dims);

    std::vector<std::vector<ActiveUnit>> per_user(train.num_users);
    for (const auto& t : train.triples)
        per_user[t.user_id].push_back({t.item_id, t.rating - 1});

    for (int32_t u = 0; u < train.num_users; ++u) {
        if (per_user[u].empty()) continue;
        TrainingCase c;
        c.case_id = u;
        c.active = std::move(per_user[u]);
        std::sort(c.active.begin(), c.active.end(),
                  [](const ActiveUnit& a, const ActiveUnit& b) { return a.unit < b.unit; });
        if (variant == LabelVariant::user_demographic) {
            const auto& demo = train.user_demographics.at(u);
            c.occupation = hot_index(demo.occupation);
            c.age_group = hot_index(demo.age_group);
            c.gender = hot_index(demo.gender);
        }
        set.cases.push_back(std::move(c));
    }
    return set;
}

CaseSet build_item_cases(const RatingDataset& train, int hidden_units) {
    CaseSet set;
    set.item_oriented = true;
    set.dims.visible_units = train.num_users;
    set.dims.rating_levels = train.rating_levels;
    set.dims.hidden_units = hidden_units;
    set.dims.variant = LabelVariant::item_genre;
    set.dims.genre_count = train.genre_count();
    validate_dims(set.dims);

    std::vector<std::vector<ActiveUnit>> per_item(train.num_items);
    for (const auto& t : train.triples)
        per_item[t.item_id].push_back({t.user_id, t.rating - 1});

    for (int32_t i = 0; i < train.num_items; ++i) {
        if (per_item[i].empty()) continue;
        TrainingCase c;
        c.case_id = i;
        c.active = std::move(per_item[i]);
        std::sort(c.active.begin(), c.active.end(),
                  [](const ActiveUnit& a, const ActiveUnit& b) { return a.unit < b.unit; });
        c.genre = train.item_genres.at(i);
        set.cases.push_back(std::move(c));
    }
    return set;
}

void hidden_input_visible(const ModelParams& p, std::span<const ActiveUnit> assignment,
                          std::span<double> x) {
    const int F = p.dims.hidden_units;
    for (int j = 0; j < F; ++j) x[j] = p.hid_bias[j];
    for (const auto& a : assignment) {
        const auto w = p.w_block(a.unit, a.level);
        for (int j = 0; j < F; ++j) x[j] += w[j];
    }
}

void add_genre_input(const ModelParams& p, std::span<const uint8_t> flags,
                     std::span<double> x) {
    const int F = p.dims.hidden_units;
    for (size_t g = 0; g < flags.size(); ++g) {
        if (!flags[g]) continue;
        const auto w = label_row(p.labels.genre_w, static_cast<int>(g), F);
        for (int j = 0; j < F; ++j) x[j] += w[j];
    }
}

void add_genre_input(const ModelParams& p, int genre, std::span<double> x) {
    if (genre < 0) return;
    const int F = p.dims.hidden_units;
    const auto w = label_row(p.labels.genre_w, genre, F);
    for (int j = 0; j < F; ++j) x[j] += w[j];
}

void add_demographic_input(const ModelParams& p, int occupation, int age_group,
                           int gender, std::span<double> x) {
    const int F = p.dims.hidden_units;
    if (occupation >= 0) {
        const auto w = label_row(p.labels.occupation_w, occupation, F);
        for (int j = 0; j < F; ++j) x[j] += w[j];
    }
    if (age_group >= 0) {
        const auto w = label_row(p.labels.age_w, age_group, F);
        for (int j = 0; j < F; ++j) x[j] += w[j];
    }
    if (gender >= 0) {
        const auto w = label_row(p.labels.gender_w, gender, F);
        for (int j = 0; j < F; ++j) x[j] += w[j];
    }
}

void hidden_given_visible(const ModelParams& p, const TrainingCase& c,
                          std::span<double> probs) {
    hidden_input_visible(p, c.active, probs);
    if (p.dims.variant == LabelVariant::item_genre)
        add_genre_input(p, c.genre, probs);
    else if (p.dims.variant == LabelVariant::user_demographic)
        add_demographic_input(p, c.occupation, c.age_group, c.gender, probs);
    for (auto& v : probs) v = sigmoid(v);
}

void visible_given_hidden(const ModelParams& p, std::span<const uint8_t> hidden,
                          int unit, std::span<double> probs) {
    const int K = p.dims.rating_levels;
    const int F = p.dims.hidden_units;
    for (int k = 0; k < K; ++k) {
        double logit = p.vis_bias[static_cast<size_t>(unit) * K + k];
        const auto w = p.w_block(unit, k);
        for (int j = 0; j < F; ++j)
            if (hidden[j]) logit += w[j];
        probs[k] = logit;
    }
    softmax_inplace(probs);
}

namespace {

void label_block_given_hidden(std::span<const uint8_t> hidden,
                              const std::vector<double>& w,
                              const std::vector<double>& bias, int F,
                              std::span<double> probs) {
    for (size_t b = 0; b < bias.size(); ++b) {
        double logit = bias[b];
        const auto row = label_row(w, static_cast<int>(b), F);
        for (int j = 0; j < F; ++j)
            if (hidden[j]) logit += row[j];
        probs[b] = logit;
    }
    softmax_inplace(probs.subspan(0, bias.size()));
}

} // namespace

void genre_given_hidden(const ModelParams& p, std::span<const uint8_t> hidden,
                        std::span<double> probs) {
    label_block_given_hidden(hidden, p.labels.genre_w, p.labels.genre_bias,
                             p.dims.hidden_units, probs);
}

void occupation_given_hidden(const ModelParams& p, std::span<const uint8_t> hidden,
                             std::span<double> probs) {
    label_block_given_hidden(hidden, p.labels.occupation_w, p.labels.occupation_bias,
                             p.dims.hidden_units, probs);
}

void age_given_hidden(const ModelParams& p, std::span<const uint8_t> hidden,
                      std::span<double> probs) {
    label_block_given_hidden(hidden, p.labels.age_w, p.labels.age_bias,
                             p.dims.hidden_units, probs);
}

void gender_given_hidden(const ModelParams& p, std::span<const uint8_t> hidden,
                         std::span<double> probs) {
    label_block_given_hidden(hidden, p.labels.gender_w, p.labels.gender_bias,
                             p.dims.hidden_units, probs);
}

double energy(const ModelParams& p, const TrainingCase& c,
              std::span<const uint8_t> hidden) {
    const int F = p.dims.hidden_units;
    const int K = p.dims.rating_levels;
    if (hidden.size() != static_cast<size_t>(F))
        throw ValidationError("hidden vector length " + std::to_string(hidden.size()) +
                              " does not match hidden unit count " + std::to_string(F));

    // x_j collects every coupling into hidden unit j plus its bias, so the
    // hidden-dependent part of the energy is just -h.x.
    std::vector<double> x(F);
    hidden_input_visible(p, c.active, x);
    if (p.dims.variant == LabelVariant::item_genre)
        add_genre_input(p, c.genre, x);
    else if (p.dims.variant == LabelVariant::user_demographic)
        add_demographic_input(p, c.occupation, c.age_group, c.gender, x);

    double e = 0.0;
    for (int j = 0; j < F; ++j)
        if (hidden[j]) e -= x[j];
    for (const auto& a : c.active)
        e -= p.vis_bias[static_cast<size_t>(a.unit) * K + a.level];
    if (p.dims.variant == LabelVariant::item_genre) {
        for (size_t g = 0; g < c.genre.size(); ++g)
            if (c.genre[g]) e -= p.labels.genre_bias[g];
    } else if (p.dims.variant == LabelVariant::user_demographic) {
        if (c.occupation >= 0) e -= p.labels.occupation_bias[c.occupation];
        if (c.age_group >= 0) e -= p.labels.age_bias[c.age_group];
        if (c.gender >= 0) e -= p.labels.gender_bias[c.gender];
    }
    return e;
}

void start_chain(const ModelParams& p, const TrainingCase& c, ChainState& state,
                 Rng& rng) {
    const int F = p.dims.hidden_units;
    state.visible = c.active;
    state.hidden.probs.resize(F);
    state.hidden.samples.resize(F);
    state.genre = state.occupation = state.age_group = state.gender = -1;

    int scratch_size = p.dims.rating_levels;
    scratch_size = std::max(scratch_size, p.dims.genre_count);
    scratch_size = std::max(scratch_size, p.dims.occupation_count);
    if (p.dims.variant == LabelVariant::user_demographic) {
        scratch_size = std::max(scratch_size, p.dims.age_groups);
        scratch_size = std::max(scratch_size, p.dims.gender_count);
    }
    state.scratch.resize(scratch_size);

    hidden_given_visible(p, c, state.hidden.probs);
    for (int j = 0; j < F; ++j)
        state.hidden.samples[j] = rng.bernoulli(state.hidden.probs[j]) ? 1 : 0;
}

void gibbs_step(const ModelParams& p, const TrainingCase& c, ChainState& state,
                Rng& rng) {
    const int F = p.dims.hidden_units;
    const int K = p.dims.rating_levels;

    // Visible sweep in ascending unit order; the draw order is part of the
    // reproducibility contract.
    std::span<double> probs(state.scratch);
    for (auto& a : state.visible) {
        visible_given_hidden(p, state.hidden.samples, a.unit, probs.subspan(0, K));
        a.level = rng.categorical(probs.subspan(0, K));
    }

    if (p.dims.variant == LabelVariant::item_genre) {
        const int G = p.dims.genre_count;
        genre_given_hidden(p, state.hidden.samples, probs.subspan(0, G));
        state.genre = rng.categorical(std::span<const double>(probs.subspan(0, G)));
    } else if (p.dims.variant == LabelVariant::user_demographic) {
        const int O = p.dims.occupation_count;
        occupation_given_hidden(p, state.hidden.samples, probs.subspan(0, O));
        state.occupation = rng.categorical(std::span<const double>(probs.subspan(0, O)));
        const int A = p.dims.age_groups;
        age_given_hidden(p, state.hidden.samples, probs.subspan(0, A));
        state.age_group = rng.categorical(std::span<const double>(probs.subspan(0, A)));
        const int S = p.dims.gender_count;
        gender_given_hidden(p, state.hidden.samples, probs.subspan(0, S));
        state.gender = rng.categorical(std::span<const double>(probs.subspan(0, S)));
    }

    hidden_input_visible(p, state.visible, state.hidden.probs);
    if (p.dims.variant == LabelVariant::item_genre)
        add_genre_input(p, state.genre, state.hidden.probs);
    else if (p.dims.variant == LabelVariant::user_demographic)
        add_demographic_input(p, state.occupation, state.age_group, state.gender,
                              state.hidden.probs);
    for (int j = 0; j < F; ++j) {
        state.hidden.probs[j] = sigmoid(state.hidden.probs[j]);
        state.hidden.samples[j] = rng.bernoulli(state.hidden.probs[j]) ? 1 : 0;
    }
}

namespace {

// log((count + 1) / (total + bins)) per bin
std::vector<double> smoothed_log_frequencies(const std::vector<int64_t>& counts,
                                             int64_t total) {
    std::vector<double> out(counts.size());
    const double denom = static_cast<double>(total) + static_cast<double>(counts.size());
    for (size_t b = 0; b < counts.size(); ++b)
        out[b] = std::log((static_cast<double>(counts[b]) + 1.0) / denom);
    return out;
}

} // namespace

ModelParams init_params(const ModelDims& dims, const CaseSet& train, uint64_t seed) {
    validate_dims(dims);
    const int F = dims.hidden_units;
    const int K = dims.rating_levels;
    const size_t m = dims.visible_units;

    ModelParams p;
    p.dims = dims;
    p.weights.resize(m * K * F);
    p.vis_bias.resize(m * K);
    p.hid_bias.assign(F, 0.0);

    Rng rng(Rng::mix(seed, 0x696e6974ULL)); // "init"
    for (auto& w : p.weights) w = rng.normal() * 0.01;

    // Per-(unit, level) rating counts over the training cases.
    std::vector<int64_t> level_counts(m * K, 0);
    for (const auto& c : train.cases)
        for (const auto& a : c.active)
            ++level_counts[static_cast<size_t>(a.unit) * K + a.level];
    for (size_t i = 0; i < m; ++i) {
        int64_t n_i = 0;
        for (int k = 0; k < K; ++k) n_i += level_counts[i * K + k];
        const double denom = static_cast<double>(n_i + K);
        for (int k = 0; k < K; ++k)
            p.vis_bias[i * K + k] =
                std::log((static_cast<double>(level_counts[i * K + k]) + 1.0) / denom);
    }

    if (dims.variant == LabelVariant::item_genre) {
        const int G = dims.genre_count;
        p.labels.genre_w.resize(static_cast<size_t>(G) * F);
        for (auto& w : p.labels.genre_w) w = rng.normal() * 0.01;
        std::vector<int64_t> counts(G, 0);
        int64_t total = 0;
        for (const auto& c : train.cases)
            for (size_t g = 0; g < c.genre.size(); ++g)
                if (c.genre[g]) {
                    ++counts[g];
                    ++total;
                }
        p.labels.genre_bias = smoothed_log_frequencies(counts, total);
    } else if (dims.variant == LabelVariant::user_demographic) {
        const int O = dims.occupation_count;
        const int A = dims.age_groups;
        const int S = dims.gender_count;
        p.labels.occupation_w.resize(static_cast<size_t>(O) * F);
        for (auto& w : p.labels.occupation_w) w = rng.normal() * 0.01;
        p.labels.age_w.resize(static_cast<size_t>(A) * F);
        for (auto& w : p.labels.age_w) w = rng.normal() * 0.01;
        p.labels.gender_w.resize(static_cast<size_t>(S) * F);
        for (auto& w : p.labels.gender_w) w = rng.normal() * 0.01;

        std::vector<int64_t> occ(O, 0), age(A, 0), gen(S, 0);
        int64_t n_occ = 0, n_age = 0, n_gen = 0;
        for (const auto& c : train.cases) {
            if (c.occupation >= 0) { ++occ[c.occupation]; ++n_occ; }
            if (c.age_group >= 0) { ++age[c.age_group]; ++n_age; }
            if (c.gender >= 0) { ++gen[c.gender]; ++n_gen; }
        }
        p.labels.occupation_bias = smoothed_log_frequencies(occ, n_occ);
        p.labels.age_bias = smoothed_log_frequencies(age, n_age);
        p.labels.gender_bias = smoothed_log_frequencies(gen, n_gen);
    }
    return p;
}

} // namespace lcrbm
