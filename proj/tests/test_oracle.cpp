#include <cmath>
#include <vector>

#include "doctest.h"
#include "lcrbm/errors.hpp"
#include "lcrbm/model.hpp"
#include "lcrbm/oracle.hpp"
#include "tiny_models.hpp"

using namespace lcrbm;

namespace {

// Every level assignment of the case's active units times every one-hot
// label choice, as data cases; exp(loglik) over these must sum to 1.
std::vector<TrainingCase> all_data_cases(const ModelDims& d,
                                         const TrainingCase& structure) {
    std::vector<TrainingCase> out;
    const int n = static_cast<int>(structure.active.size());
    const auto labels = oracle::enumerate_label_configs(d);
    size_t level_count = 1;
    for (int t = 0; t < n; ++t) level_count *= d.rating_levels;
    for (size_t v = 0; v < level_count; ++v) {
        TrainingCase c = structure;
        size_t digits = v;
        for (int t = 0; t < n; ++t) {
            c.active[t].level = static_cast<int32_t>(digits % d.rating_levels);
            digits /= d.rating_levels;
        }
        for (const auto& label : labels) {
            TrainingCase with_label = c;
            if (d.variant == LabelVariant::item_genre) {
                with_label.genre.assign(d.genre_count, 0);
                with_label.genre[label.genre] = 1;
            } else if (d.variant == LabelVariant::user_demographic) {
                with_label.occupation = label.occupation;
                with_label.age_group = label.age_group;
                with_label.gender = label.gender;
            }
            out.push_back(with_label);
        }
    }
    return out;
}

} // namespace

TEST_CASE("label configurations enumerate the variant's blocks") {
    CHECK(oracle::enumerate_label_configs(tiny::dims_for(LabelVariant::none, 2, 2, 2))
              .size() == 1);
    ModelDims item = tiny::dims_for(LabelVariant::item_genre, 2, 2, 2);
    item.genre_count = 3;
    const auto genres = oracle::enumerate_label_configs(item);
    REQUIRE(genres.size() == 3);
    CHECK(genres[0].genre == 0);
    CHECK(genres[2].genre == 2);
    CHECK(genres[0].occupation == -1);

    const auto demo = oracle::enumerate_label_configs(
        tiny::dims_for(LabelVariant::user_demographic, 2, 2, 2));
    REQUIRE(demo.size() == 8);
    CHECK(demo[0].occupation == 0);
    CHECK(demo[0].age_group == 0);
    CHECK(demo[0].gender == 0);
    CHECK(demo[7].occupation == 1);
    CHECK(demo[7].gender == 1);
}

TEST_CASE("enumeration budget refuses oversized models") {
    Rng rng(1);
    const ModelDims small = tiny::dims_for(LabelVariant::none, 2, 2, 2);
    const ModelParams ps = tiny::random_params(small, rng);
    TrainingCase c;
    c.active = {{0, 0}, {1, 1}};
    CHECK(oracle::check_budget(ps, c) == 16);

    const ModelDims big = tiny::dims_for(LabelVariant::none, 12, 5, 12);
    const ModelParams pb = tiny::random_params(big, rng, 0.1);
    TrainingCase wide;
    for (int i = 0; i < 12; ++i) wide.active.push_back({i, 0});
    CHECK_THROWS_AS(oracle::check_budget(pb, wide), ValidationError);
    CHECK_THROWS_AS(oracle::exact_log_partition(pb, wide), ValidationError);
}

TEST_CASE("degenerate partitions have closed forms") {
    // one unit, one level, no hidden units: a single configuration
    ModelDims d1 = tiny::dims_for(LabelVariant::none, 1, 1, 0);
    const ModelParams p1 = [&] {
        Rng rng(2);
        return tiny::random_params(d1, rng, 0.0);
    }();
    TrainingCase c1;
    c1.active = {{0, 0}};
    CHECK(oracle::exact_log_partition_direct(p1, c1) == doctest::Approx(0.0));
    CHECK(oracle::exact_log_partition(p1, c1) == doctest::Approx(0.0));

    // two levels at zero bias: two equally weighted configurations
    ModelDims d2 = tiny::dims_for(LabelVariant::none, 1, 2, 0);
    const ModelParams p2 = [&] {
        Rng rng(3);
        return tiny::random_params(d2, rng, 0.0);
    }();
    TrainingCase c2;
    c2.active = {{0, 0}};
    CHECK(oracle::exact_log_partition_direct(p2, c2) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(oracle::exact_log_partition(p2, c2) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("both partition routes agree on random tiny models") {
    Rng rng(47);
    for (auto variant : {LabelVariant::none, LabelVariant::item_genre,
                         LabelVariant::user_demographic}) {
        CAPTURE(variant_name(variant));
        for (int round = 0; round < 5; ++round) {
            const ModelDims d = tiny::dims_for(variant, 3, 3, 3);
            const ModelParams p = tiny::random_params(d, rng);
            const TrainingCase c = tiny::random_case(d, 2, rng);
            const double direct = oracle::exact_log_partition_direct(p, c);
            const double factored = oracle::exact_log_partition(p, c);
            CHECK(direct == doctest::Approx(factored).epsilon(1e-9));
        }
    }
}

TEST_CASE("case log-likelihoods form a distribution over data configurations") {
    Rng rng(53);
    for (auto variant : {LabelVariant::none, LabelVariant::item_genre,
                         LabelVariant::user_demographic}) {
        CAPTURE(variant_name(variant));
        const ModelDims d = tiny::dims_for(variant, 2, 2, 2);
        const ModelParams p = tiny::random_params(d, rng);
        const TrainingCase structure = tiny::random_case(d, 2, rng);
        double total = 0.0;
        for (const auto& data : all_data_cases(d, structure))
            total += std::exp(oracle::exact_case_loglik(p, data));
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("query conditional demands an unobserved query unit") {
    Rng rng(59);
    const ModelDims d = tiny::dims_for(LabelVariant::none, 3, 2, 2);
    const ModelParams p = tiny::random_params(d, rng);
    TrainingCase c;
    c.active = {{0, 1}, {2, 0}};
    CHECK_NOTHROW(oracle::exact_query_conditional(p, c, 1));
    CHECK_THROWS_AS(oracle::exact_query_conditional(p, c, 0), ValidationError);
    CHECK_THROWS_AS(oracle::exact_visible_conditional(p, c, 0, 1), ValidationError);
}

TEST_CASE("hidden enumeration bails out beyond 24 units") {
    Rng rng(61);
    const ModelDims d = tiny::dims_for(LabelVariant::none, 1, 2, 25);
    const ModelParams p = tiny::random_params(d, rng, 0.01);
    TrainingCase c;
    c.active = {{0, 0}};
    CHECK_THROWS_AS(oracle::exact_hidden_conditional(p, c), ValidationError);
}

TEST_CASE("exact gradient matches central finite differences") {
    Rng rng(67);
    for (auto variant : {LabelVariant::none, LabelVariant::item_genre,
                         LabelVariant::user_demographic}) {
        CAPTURE(variant_name(variant));
        const ModelDims d = tiny::dims_for(variant, 2, 2, 2);
        ModelParams p = tiny::random_params(d, rng, 0.8);
        const TrainingCase data = tiny::random_case(d, 2, rng);
        ModelParams grad = oracle::exact_loglik_gradient(p, data);

        auto tensors = [](ModelParams& m) {
            return std::vector<std::vector<double>*>{
                &m.weights,           &m.vis_bias,       &m.hid_bias,
                &m.labels.genre_w,    &m.labels.genre_bias,
                &m.labels.occupation_w, &m.labels.occupation_bias,
                &m.labels.age_w,      &m.labels.age_bias,
                &m.labels.gender_w,   &m.labels.gender_bias};
        };
        ModelParams work = p;
        const auto grad_t = tensors(grad);
        const auto work_t = tensors(work);
        const double eps = 1e-5;
        for (size_t t = 0; t < work_t.size(); ++t) {
            for (size_t idx = 0; idx < work_t[t]->size(); ++idx) {
                const double saved = (*work_t[t])[idx];
                (*work_t[t])[idx] = saved + eps;
                const double up = oracle::exact_case_loglik(work, data);
                (*work_t[t])[idx] = saved - eps;
                const double down = oracle::exact_case_loglik(work, data);
                (*work_t[t])[idx] = saved;
                const double numeric = (up - down) / (2.0 * eps);
                CHECK((*grad_t[t])[idx] ==
                      doctest::Approx(numeric).epsilon(1e-6).scale(1.0));
            }
        }
    }
}
