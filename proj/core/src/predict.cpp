#include "lcrbm/predict.hpp"

#include <algorithm>

#include "lcrbm/errors.hpp"
#include "lcrbm/numeric.hpp"

namespace lcrbm {

CaseScorer::CaseScorer(const ModelParams& params, const TrainingCase& observed)
    : params_(params), observed_(observed), base_(params.dims.hidden_units) {
    hidden_input_visible(params_, observed_.active, base_);
    if (params_.dims.variant == LabelVariant::item_genre)
        add_genre_input(params_, observed_.genre, base_);
    else if (params_.dims.variant == LabelVariant::user_demographic)
        add_demographic_input(params_, observed_.occupation, observed_.age_group,
                              observed_.gender, base_);
}

double CaseScorer::score(int query_unit, int level) const {
    const int F = params_.dims.hidden_units;
    const auto hit = std::lower_bound(
        observed_.active.begin(), observed_.active.end(), query_unit,
        [](const ActiveUnit& a, int unit) { return a.unit < unit; });
    if (hit != observed_.active.end() && hit->unit == query_unit)
        throw ValidationError("query unit " + std::to_string(query_unit) +
                              " is observed in the case");
    double s = params_.vis_bias[static_cast<size_t>(query_unit) *
                                    params_.dims.rating_levels +
                                level];
    const auto w = params_.w_block(query_unit, level);
    for (int j = 0; j < F; ++j) s += softplus(base_[j] + w[j]);
    return s;
}

Prediction CaseScorer::predict(int query_unit) const {
    const int K = params_.dims.rating_levels;
    const auto hit = std::lower_bound(
        observed_.active.begin(), observed_.active.end(), query_unit,
        [](const ActiveUnit& a, int unit) { return a.unit < unit; });
    if (hit != observed_.active.end() && hit->unit == query_unit)
        throw ValidationError("query unit " + std::to_string(query_unit) +
                              " is observed in the case");

    Prediction out;
    out.distribution.resize(K);
    if (observed_.active.empty()) {
        for (int k = 0; k < K; ++k)
            out.distribution[k] =
                params_.vis_bias[static_cast<size_t>(query_unit) * K + k];
    } else {
        for (int k = 0; k < K; ++k) out.distribution[k] = score(query_unit, k);
    }
    softmax_inplace(out.distribution);

    double expected = 0.0;
    int best = 0;
    for (int k = 0; k < K; ++k) {
        expected += (k + 1) * out.distribution[k];
        if (out.distribution[k] > out.distribution[best]) best = k;
    }
    out.expected_rating = expected;
    out.argmax_rating = best + 1;
    return out;
}

double score_unnormalized(const ModelParams& params, const TrainingCase& observed,
                          int query_unit, int level) {
    return CaseScorer(params, observed).score(query_unit, level);
}

Prediction predict(const ModelParams& params, const TrainingCase& observed,
                   int query_unit) {
    return CaseScorer(params, observed).predict(query_unit);
}

} // namespace lcrbm
