#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "lcrbm/errors.hpp"
#include "lcrbm/model.hpp"
#include "lcrbm/numeric.hpp"
#include "lcrbm/oracle.hpp"
#include "tiny_models.hpp"

using namespace lcrbm;

namespace {

ModelParams zero_params(const ModelDims& d) {
    Rng rng(0);
    return tiny::random_params(d, rng, 0.0);
}

std::vector<uint8_t> bits_of(uint32_t mask, int F) {
    std::vector<uint8_t> h(F);
    for (int j = 0; j < F; ++j) h[j] = (mask >> j) & 1u;
    return h;
}

RatingDataset tiny_dataset() {
    fixtures::write_tiny_100k("fixture_model_tiny");
    return parse_100k("fixture_model_tiny");
}

} // namespace

TEST_CASE("variant names round-trip") {
    CHECK(std::string(variant_name(LabelVariant::none)) == "plain");
    CHECK(std::string(variant_name(LabelVariant::item_genre)) == "item");
    CHECK(std::string(variant_name(LabelVariant::user_demographic)) == "user");
    for (auto v : {LabelVariant::none, LabelVariant::item_genre,
                   LabelVariant::user_demographic})
        CHECK(variant_from_name(variant_name(v)) == v);
    CHECK_THROWS_AS(variant_from_name("itemized"), ValidationError);
}

TEST_CASE("dimension validation") {
    ModelDims d = tiny::dims_for(LabelVariant::none, 2, 5, 3);
    CHECK_NOTHROW(validate_dims(d));
    d.visible_units = 0;
    CHECK_THROWS_AS(validate_dims(d), ValidationError);
    d = tiny::dims_for(LabelVariant::item_genre, 2, 5, 3);
    d.genre_count = 0;
    CHECK_THROWS_AS(validate_dims(d), ValidationError);
    d = tiny::dims_for(LabelVariant::user_demographic, 2, 5, 3);
    d.occupation_count = 0;
    CHECK_THROWS_AS(validate_dims(d), ValidationError);
}

TEST_CASE("user cases collect each user's ratings over item units") {
    const RatingDataset ds = tiny_dataset();
    const CaseSet set = build_user_cases(ds, LabelVariant::none, 7);
    CHECK_FALSE(set.item_oriented);
    CHECK(set.dims.visible_units == 5);
    CHECK(set.dims.hidden_units == 7);
    REQUIRE(set.cases.size() == 4);

    const TrainingCase& first = set.cases[0];
    CHECK(first.case_id == 0);
    REQUIRE(first.active.size() == 3);
    // user 1 rated items 1,2,3 as 5,3,4; levels are 0-based
    CHECK(first.active[0].unit == 0);
    CHECK(first.active[0].level == 4);
    CHECK(first.active[1].unit == 1);
    CHECK(first.active[1].level == 2);
    CHECK(first.active[2].unit == 2);
    CHECK(first.active[2].level == 3);
    CHECK(first.occupation == -1); // plain attaches nothing
    CHECK(first.genre.empty());

    const CaseSet demo = build_user_cases(ds, LabelVariant::user_demographic, 7);
    CHECK(demo.dims.occupation_count == 3);
    CHECK(demo.cases[0].occupation == 0);
    CHECK(demo.cases[0].age_group == 2);
    CHECK(demo.cases[0].gender == 0);
    CHECK(demo.cases[3].gender == 1);

    CHECK_THROWS_AS(build_user_cases(ds, LabelVariant::item_genre, 7),
                    ValidationError);
}

TEST_CASE("item cases collect each movie's ratings over user units") {
    const RatingDataset ds = tiny_dataset();
    const CaseSet set = build_item_cases(ds, 6);
    CHECK(set.item_oriented);
    CHECK(set.dims.visible_units == 4);
    CHECK(set.dims.variant == LabelVariant::item_genre);
    CHECK(set.dims.genre_count == 4);
    REQUIRE(set.cases.size() == 5);

    // movie 1: rated 5,4,2 by users 1,2,4
    const TrainingCase& first = set.cases[0];
    REQUIRE(first.active.size() == 3);
    CHECK(first.active[0].unit == 0);
    CHECK(first.active[0].level == 4);
    CHECK(first.active[1].unit == 1);
    CHECK(first.active[1].level == 3);
    CHECK(first.active[2].unit == 3);
    CHECK(first.active[2].level == 1);
    CHECK(first.genre == GenreVector{0, 1, 0, 0});
}

TEST_CASE("units without ratings produce no case") {
    RatingDataset ds;
    ds.num_users = 3;
    ds.num_items = 3;
    ds.genre_names = {"unknown", "Action"};
    ds.item_genres = {{1, 0}, {0, 1}, {1, 0}};
    ds.occupation_vocab = {"other"};
    ds.user_demographics.resize(3, {{1}, encode_age(30), encode_gender('M')});
    ds.triples = {{0, 0, 3, 0}, {1, 2, 5, 0}}; // user 2 and item 1 unrated

    const CaseSet users = build_user_cases(ds, LabelVariant::none, 2);
    REQUIRE(users.cases.size() == 2);
    CHECK(users.cases[1].case_id == 1);
    CHECK(users.cases[1].active[0].unit == 2);

    const CaseSet items = build_item_cases(ds, 2);
    REQUIRE(items.cases.size() == 2);
    CHECK(items.cases[1].genre == GenreVector{1, 0});
}

TEST_CASE("energy: zero parameters give zero energy") {
    const ModelDims d = tiny::dims_for(LabelVariant::none, 2, 3, 2);
    const ModelParams p = zero_params(d);
    TrainingCase c;
    c.active = {{0, 1}, {1, 2}};
    for (uint32_t mask = 0; mask < 4; ++mask)
        CHECK(energy(p, c, bits_of(mask, 2)) == 0.0);
}

TEST_CASE("energy: one active coupling contributes its negated weight") {
    const ModelDims d = tiny::dims_for(LabelVariant::none, 1, 2, 1);
    ModelParams p = zero_params(d);
    p.w_block(0, 1)[0] = 2.0;
    TrainingCase c;
    c.active = {{0, 1}};
    const std::vector<uint8_t> on = {1};
    CHECK(energy(p, c, on) == -2.0);
    const std::vector<uint8_t> off = {0};
    CHECK(energy(p, c, off) == 0.0);
}

TEST_CASE("energy: hidden vector length is checked") {
    const ModelDims d = tiny::dims_for(LabelVariant::none, 1, 2, 1);
    const ModelParams p = zero_params(d);
    TrainingCase c;
    c.active = {{0, 0}};
    const std::vector<uint8_t> wrong = {1, 0, 1};
    CHECK_THROWS_AS(energy(p, c, wrong), ValidationError);
}

TEST_CASE("energy agrees with the oracle's independent arithmetic") {
    Rng rng(31);
    for (auto variant : {LabelVariant::none, LabelVariant::item_genre,
                         LabelVariant::user_demographic}) {
        const ModelDims d = tiny::dims_for(variant, 2, 2, 2);
        const ModelParams p = tiny::random_params(d, rng);
        TrainingCase structure = tiny::random_case(d, 2, rng);
        oracle::for_each_config(
            p, structure,
            [&](std::span<const ActiveUnit> assignment, const oracle::LabelConfig& label,
                uint32_t hidden_bits, double e) {
                TrainingCase c;
                c.active.assign(assignment.begin(), assignment.end());
                if (variant == LabelVariant::item_genre) {
                    c.genre.assign(d.genre_count, 0);
                    c.genre[label.genre] = 1;
                } else if (variant == LabelVariant::user_demographic) {
                    c.occupation = label.occupation;
                    c.age_group = label.age_group;
                    c.gender = label.gender;
                }
                CHECK(energy(p, c, bits_of(hidden_bits, d.hidden_units)) ==
                      doctest::Approx(e).epsilon(1e-12));
            });
    }
}

TEST_CASE("hidden probabilities: zero parameters give one half") {
    const ModelDims d = tiny::dims_for(LabelVariant::none, 3, 5, 4);
    const ModelParams p = zero_params(d);
    TrainingCase c;
    c.active = {{0, 2}, {2, 4}};
    std::vector<double> probs(4);
    hidden_given_visible(p, c, probs);
    for (double q : probs) CHECK(q == 0.5);
}

TEST_CASE("hidden probabilities: empty case leaves only the bias") {
    const ModelDims d = tiny::dims_for(LabelVariant::none, 3, 5, 2);
    ModelParams p = zero_params(d);
    p.hid_bias = {0.37, -1.25};
    TrainingCase empty;
    std::vector<double> probs(2);
    hidden_given_visible(p, empty, probs);
    CHECK(probs[0] == doctest::Approx(sigmoid(0.37)).epsilon(1e-12));
    CHECK(probs[1] == doctest::Approx(sigmoid(-1.25)).epsilon(1e-12));
}

TEST_CASE("hidden probabilities stay strictly inside (0,1)") {
    Rng rng(5);
    const ModelDims d = tiny::dims_for(LabelVariant::user_demographic, 3, 3, 3);
    const ModelParams p = tiny::random_params(d, rng, 3.0);
    const TrainingCase c = tiny::random_case(d, 3, rng);
    std::vector<double> probs(3);
    hidden_given_visible(p, c, probs);
    for (double q : probs) {
        CHECK(q > 0.0);
        CHECK(q < 1.0);
    }
}

TEST_CASE("visible distribution: zero parameters are uniform") {
    const ModelDims d = tiny::dims_for(LabelVariant::none, 2, 5, 3);
    const ModelParams p = zero_params(d);
    const std::vector<uint8_t> h = {1, 0, 1};
    std::vector<double> probs(5);
    visible_given_hidden(p, h, 1, probs);
    for (double q : probs) CHECK(q == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("visible distribution: shifting one unit's logits changes nothing") {
    Rng rng(11);
    const ModelDims d = tiny::dims_for(LabelVariant::none, 2, 5, 3);
    const ModelParams p = tiny::random_params(d, rng);
    ModelParams shifted = p;
    for (int k = 0; k < 5; ++k) shifted.vis_bias[1 * 5 + k] += 3.7;

    for (uint32_t mask = 0; mask < 8; ++mask) {
        const auto h = bits_of(mask, 3);
        std::vector<double> a(5), b(5);
        visible_given_hidden(p, h, 1, a);
        visible_given_hidden(shifted, h, 1, b);
        double sum = 0.0;
        for (int k = 0; k < 5; ++k) {
            CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
            sum += a[k];
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("label distributions: zero parameters are uniform, sums are one") {
    const ModelDims item = tiny::dims_for(LabelVariant::item_genre, 2, 2, 2);
    const ModelParams pi = zero_params(item);
    const std::vector<uint8_t> h = {1, 0};
    std::vector<double> genre(2);
    genre_given_hidden(pi, h, genre);
    CHECK(genre[0] == doctest::Approx(0.5).epsilon(1e-12));

    const ModelDims user = tiny::dims_for(LabelVariant::user_demographic, 2, 2, 2);
    const ModelParams pu = zero_params(user);
    std::vector<double> occ(2), age(2), gen(2);
    occupation_given_hidden(pu, h, occ);
    age_given_hidden(pu, h, age);
    gender_given_hidden(pu, h, gen);
    for (const auto* block : {&occ, &age, &gen}) {
        CHECK((*block)[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK((*block)[0] + (*block)[1] == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("label distributions: a dominant logit saturates") {
    const ModelDims d = tiny::dims_for(LabelVariant::item_genre, 2, 2, 2);
    ModelParams p = zero_params(d);
    p.labels.genre_bias[1] = 50.0;
    const std::vector<uint8_t> h = {0, 0};
    std::vector<double> genre(2);
    genre_given_hidden(p, h, genre);
    CHECK(genre[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("hidden conditional is the sigmoid of the energy gap") {
    Rng rng(17);
    for (auto variant : {LabelVariant::none, LabelVariant::item_genre,
                         LabelVariant::user_demographic}) {
        const ModelDims d = tiny::dims_for(variant, 3, 3, 3);
        const ModelParams p = tiny::random_params(d, rng);
        const TrainingCase c = tiny::random_case(d, 2, rng);
        std::vector<double> probs(3);
        hidden_given_visible(p, c, probs);
        for (int j = 0; j < 3; ++j) {
            auto h = bits_of(rng.uniform_int(8), 3);
            h[j] = 0;
            const double e_off = energy(p, c, h);
            h[j] = 1;
            const double e_on = energy(p, c, h);
            CHECK(probs[j] == doctest::Approx(sigmoid(e_off - e_on)).epsilon(1e-9));
        }
    }
}

TEST_CASE("closed-form conditionals match full enumeration") {
    Rng rng(23);
    for (auto variant : {LabelVariant::none, LabelVariant::item_genre,
                         LabelVariant::user_demographic}) {
        CAPTURE(variant_name(variant));
        const ModelDims d = tiny::dims_for(variant, 3, 3, 3);
        for (int round = 0; round < 5; ++round) {
            const ModelParams p = tiny::random_params(d, rng);
            const TrainingCase c = tiny::random_case(d, 2, rng);

            std::vector<double> probs(d.hidden_units);
            hidden_given_visible(p, c, probs);
            const auto exact_h = oracle::exact_hidden_conditional(p, c);
            for (int j = 0; j < d.hidden_units; ++j)
                CHECK(probs[j] == doctest::Approx(exact_h[j]).epsilon(1e-9));

            for (uint32_t mask = 0; mask < 8; ++mask) {
                const auto h = bits_of(mask, d.hidden_units);
                std::vector<double> vis(d.rating_levels);
                for (const auto& a : c.active) {
                    visible_given_hidden(p, h, a.unit, vis);
                    const auto exact_v =
                        oracle::exact_visible_conditional(p, c, mask, a.unit);
                    for (int k = 0; k < d.rating_levels; ++k)
                        CHECK(vis[k] == doctest::Approx(exact_v[k]).epsilon(1e-9));
                }
                if (variant == LabelVariant::item_genre) {
                    std::vector<double> genre(d.genre_count);
                    genre_given_hidden(p, h, genre);
                    const auto exact_g = oracle::exact_genre_conditional(p, mask);
                    for (int g = 0; g < d.genre_count; ++g)
                        CHECK(genre[g] == doctest::Approx(exact_g[g]).epsilon(1e-9));
                } else if (variant == LabelVariant::user_demographic) {
                    std::vector<double> occ(d.occupation_count), age(d.age_groups),
                        gen(d.gender_count);
                    occupation_given_hidden(p, h, occ);
                    age_given_hidden(p, h, age);
                    gender_given_hidden(p, h, gen);
                    const auto eo = oracle::exact_occupation_conditional(p, mask);
                    const auto ea = oracle::exact_age_conditional(p, mask);
                    const auto eg = oracle::exact_gender_conditional(p, mask);
                    for (int o = 0; o < d.occupation_count; ++o)
                        CHECK(occ[o] == doctest::Approx(eo[o]).epsilon(1e-9));
                    for (int a = 0; a < d.age_groups; ++a)
                        CHECK(age[a] == doctest::Approx(ea[a]).epsilon(1e-9));
                    for (int s = 0; s < d.gender_count; ++s)
                        CHECK(gen[s] == doctest::Approx(eg[s]).epsilon(1e-9));
                }
            }
        }
    }
}

TEST_CASE("enumeration comparisons can actually fail") {
    // Negative control: a planted off-by-one in a coupling weight must blow
    // the residual past the tolerance, or the oracle checks prove nothing.
    Rng rng(77);
    const ModelDims d = tiny::dims_for(LabelVariant::none, 2, 2, 2);
    const ModelParams p = tiny::random_params(d, rng);
    TrainingCase c;
    c.active = {{0, 1}};

    const auto exact_h = oracle::exact_hidden_conditional(p, c);

    ModelParams corrupted = p;
    const size_t coupling =
        (static_cast<size_t>(c.active[0].unit) * d.rating_levels +
         static_cast<size_t>(c.active[0].level)) *
        d.hidden_units;
    corrupted.weights[coupling] += 0.25;

    std::vector<double> probs(d.hidden_units);
    hidden_given_visible(corrupted, c, probs);
    double worst = 0;
    for (int j = 0; j < d.hidden_units; ++j)
        worst = std::max(worst, std::abs(probs[j] - exact_h[j]));
    CHECK(worst > 1e-3);
}

TEST_CASE("chain starts at the data") {
    Rng model_rng(41);
    const ModelDims d = tiny::dims_for(LabelVariant::item_genre, 3, 3, 3);
    const ModelParams p = tiny::random_params(d, model_rng);
    const TrainingCase c = tiny::random_case(d, 3, model_rng);

    Rng rng(7);
    ChainState state;
    start_chain(p, c, state, rng);
    REQUIRE(state.visible.size() == c.active.size());
    for (size_t t = 0; t < c.active.size(); ++t) {
        CHECK(state.visible[t].unit == c.active[t].unit);
        CHECK(state.visible[t].level == c.active[t].level);
    }
    std::vector<double> probs(d.hidden_units);
    hidden_given_visible(p, c, probs);
    for (int j = 0; j < d.hidden_units; ++j)
        CHECK(state.hidden.probs[j] == probs[j]);
    CHECK(state.genre == -1); // labels are sampled by the first sweep
}

TEST_CASE("gibbs reconstruction is uniform when every weight is zero") {
    const ModelDims d = tiny::dims_for(LabelVariant::none, 3, 5, 2);
    const ModelParams p = zero_params(d);
    TrainingCase c;
    c.active = {{0, 0}, {1, 3}, {2, 2}};

    Rng rng(99);
    ChainState state;
    start_chain(p, c, state, rng);
    std::vector<int> counts(5, 0);
    const int sweeps = 10000;
    for (int t = 0; t < sweeps; ++t) {
        gibbs_step(p, c, state, rng);
        for (const auto& v : state.visible) ++counts[v.level];
    }
    const double expected = sweeps * 3 / 5.0;
    double chi2 = 0.0;
    for (int k = 0; k < 5; ++k) {
        const double diff = counts[k] - expected;
        chi2 += diff * diff / expected;
    }
    CHECK(chi2 < 13.2767); // chi-square 1% critical value at 4 dof
}

TEST_CASE("saturated parameters make the chain deterministic") {
    const ModelDims d = tiny::dims_for(LabelVariant::item_genre, 3, 3, 2);
    ModelParams p = zero_params(d);
    const int target_level[3] = {2, 0, 1};
    for (int i = 0; i < 3; ++i)
        p.vis_bias[static_cast<size_t>(i) * 3 + target_level[i]] = 50.0;
    p.hid_bias = {50.0, -50.0};
    p.labels.genre_bias[1] = 50.0;

    TrainingCase c;
    c.active = {{0, 0}, {1, 1}, {2, 2}}; // starts away from the attractor
    c.genre = {1, 0};

    Rng rng(3);
    ChainState state;
    start_chain(p, c, state, rng);
    for (int t = 0; t < 100; ++t) {
        gibbs_step(p, c, state, rng);
        for (int i = 0; i < 3; ++i) CHECK(state.visible[i].level == target_level[i]);
        CHECK(state.genre == 1);
        CHECK(state.hidden.samples[0] == 1);
        CHECK(state.hidden.samples[1] == 0);
    }
}

namespace {

// Runs the chain and compares its empirical state distribution against the
// enumerated joint: total variation plus a per-state Monte-Carlo error band.
void check_stationary(const ModelParams& p, const TrainingCase& c, uint64_t seed) {
    std::map<std::vector<int>, double> exact;
    const double log_z = oracle::exact_log_partition_direct(p, c);
    oracle::for_each_config(
        p, c,
        [&](std::span<const ActiveUnit> assignment, const oracle::LabelConfig& label,
            uint32_t hidden_bits, double e) {
            std::vector<int> key;
            for (const auto& a : assignment) key.push_back(a.level);
            key.push_back(label.genre);
            key.push_back(static_cast<int>(hidden_bits));
            exact[key] += std::exp(-e - log_z);
        });

    Rng rng(seed);
    ChainState state;
    start_chain(p, c, state, rng);
    for (int t = 0; t < 1000; ++t) gibbs_step(p, c, state, rng); // burn-in

    const int sweeps = 200000;
    std::map<std::vector<int>, int> counts;
    for (int t = 0; t < sweeps; ++t) {
        gibbs_step(p, c, state, rng);
        std::vector<int> key;
        for (const auto& v : state.visible) key.push_back(v.level);
        key.push_back(state.genre);
        uint32_t bits = 0;
        for (size_t j = 0; j < state.hidden.samples.size(); ++j)
            bits |= static_cast<uint32_t>(state.hidden.samples[j]) << j;
        key.push_back(static_cast<int>(bits));
        ++counts[key];
    }

    double tv = 0.0;
    for (const auto& [key, prob] : exact) {
        const double emp = counts.count(key) ? counts.at(key) / double(sweeps) : 0.0;
        tv += std::abs(emp - prob);
        const double mcse = std::sqrt(prob * (1.0 - prob) / sweeps);
        CHECK(std::abs(emp - prob) < 3.0 * mcse + 0.003);
    }
    CHECK(tv * 0.5 < 0.02);
}

} // namespace

TEST_CASE("long-run gibbs statistics match the enumerated joint") {
    SUBCASE("plain") {
        Rng rng(61);
        const ModelDims d = tiny::dims_for(LabelVariant::none, 2, 2, 2);
        const ModelParams p = tiny::random_params(d, rng, 0.5);
        TrainingCase c;
        c.active = {{0, 0}, {1, 1}};
        check_stationary(p, c, 1001);
    }
    SUBCASE("with a genre layer") {
        Rng rng(62);
        const ModelDims d = tiny::dims_for(LabelVariant::item_genre, 2, 2, 1);
        const ModelParams p = tiny::random_params(d, rng, 0.5);
        TrainingCase c;
        c.active = {{0, 1}, {1, 0}};
        c.genre = {0, 1};
        check_stationary(p, c, 1002);
    }
}

TEST_CASE("initialization is seed-deterministic") {
    const RatingDataset ds = tiny_dataset();
    const CaseSet set = build_user_cases(ds, LabelVariant::none, 6);
    const ModelParams a = init_params(set.dims, set, 42);
    const ModelParams b = init_params(set.dims, set, 42);
    CHECK(a.weights == b.weights);
    CHECK(a.vis_bias == b.vis_bias);
    const ModelParams other = init_params(set.dims, set, 43);
    CHECK(a.weights != other.weights);
}

TEST_CASE("initialization: smoothed rating frequencies become visible biases") {
    ModelDims d = tiny::dims_for(LabelVariant::none, 2, 5, 3);
    CaseSet set;
    set.dims = d;
    const int counts[5] = {10, 20, 30, 20, 20};
    int64_t id = 0;
    for (int k = 0; k < 5; ++k)
        for (int n = 0; n < counts[k]; ++n) {
            TrainingCase c;
            c.case_id = id++;
            c.active = {{0, k}};
            set.cases.push_back(c);
        }

    const ModelParams p = init_params(d, set, 7);
    std::vector<double> probs(p.vis_bias.begin(), p.vis_bias.begin() + 5);
    softmax_inplace(probs);
    for (int k = 0; k < 5; ++k)
        CHECK(probs[k] == doctest::Approx((counts[k] + 1) / 105.0).epsilon(1e-12));

    // unit 1 is never rated: the smoothing floor leaves a uniform log(1/K)
    for (int k = 0; k < 5; ++k)
        CHECK(p.vis_bias[5 + k] == doctest::Approx(std::log(1.0 / 5)).epsilon(1e-12));

    for (double b : p.hid_bias) CHECK(b == 0.0);
}

TEST_CASE("initialization: genre biases follow smoothed flag frequencies") {
    ModelDims d = tiny::dims_for(LabelVariant::item_genre, 2, 2, 2);
    d.genre_count = 3;
    CaseSet set;
    set.dims = d;
    set.item_oriented = true;
    TrainingCase a;
    a.active = {{0, 0}};
    a.genre = {1, 1, 0};
    TrainingCase b;
    b.active = {{1, 1}};
    b.genre = {0, 1, 0};
    set.cases = {a, b};

    const ModelParams p = init_params(d, set, 11);
    std::vector<double> probs = p.labels.genre_bias;
    softmax_inplace(probs);
    CHECK(probs[0] == doctest::Approx(2.0 / 6).epsilon(1e-12));
    CHECK(probs[1] == doctest::Approx(3.0 / 6).epsilon(1e-12));
    CHECK(probs[2] == doctest::Approx(1.0 / 6).epsilon(1e-12));
}
