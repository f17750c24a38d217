#include "lcrbm/oracle.hpp"

#include <cmath>

#include "lcrbm/errors.hpp"
#include "lcrbm/numeric.hpp"

namespace lcrbm::oracle {

namespace {

double pow_size(double base, int exp) {
    double v = 1;
    for (int i = 0; i < exp; ++i) v *= base;
    return v;
}

} // namespace

std::vector<LabelConfig> enumerate_label_configs(const ModelDims& dims) {
    std::vector<LabelConfig> configs;
    switch (dims.variant) {
        case LabelVariant::none:
            configs.push_back({});
            break;
        case LabelVariant::item_genre:
            for (int g = 0; g < dims.genre_count; ++g) {
                LabelConfig c;
                c.genre = g;
                configs.push_back(c);
            }
            break;
        case LabelVariant::user_demographic:
            for (int o = 0; o < dims.occupation_count; ++o)
                for (int a = 0; a < dims.age_groups; ++a)
                    for (int s = 0; s < dims.gender_count; ++s) {
                        LabelConfig c;
                        c.occupation = o;
                        c.age_group = a;
                        c.gender = s;
                        configs.push_back(c);
                    }
            break;
    }
    return configs;
}

double config_energy(const ModelParams& p, std::span<const ActiveUnit> assignment,
                     const LabelConfig& label, uint32_t hidden_bits) {
    const int F = p.dims.hidden_units;
    const int K = p.dims.rating_levels;

    double e = 0.0;
    for (int j = 0; j < F; ++j) {
        if (!((hidden_bits >> j) & 1u)) continue;
        e -= p.hid_bias[j];
        for (const auto& a : assignment)
            e -= p.weights[(static_cast<size_t>(a.unit) * K + a.level) * F + j];
        if (label.genre >= 0)
            e -= p.labels.genre_w[static_cast<size_t>(label.genre) * F + j];
        if (label.occupation >= 0)
            e -= p.labels.occupation_w[static_cast<size_t>(label.occupation) * F + j];
        if (label.age_group >= 0)
            e -= p.labels.age_w[static_cast<size_t>(label.age_group) * F + j];
        if (label.gender >= 0)
            e -= p.labels.gender_w[static_cast<size_t>(label.gender) * F + j];
    }
    for (const auto& a : assignment)
        e -= p.vis_bias[static_cast<size_t>(a.unit) * K + a.level];
    if (label.genre >= 0) e -= p.labels.genre_bias[label.genre];
    if (label.occupation >= 0) e -= p.labels.occupation_bias[label.occupation];
    if (label.age_group >= 0) e -= p.labels.age_bias[label.age_group];
    if (label.gender >= 0) e -= p.labels.gender_bias[label.gender];
    return e;
}

size_t check_budget(const ModelParams& p, const TrainingCase& structure) {
    const int n = static_cast<int>(structure.active.size());
    const double total = pow_size(p.dims.rating_levels, n) *
                         pow_size(2.0, p.dims.hidden_units) *
                         static_cast<double>(enumerate_label_configs(p.dims).size());
    if (!(total <= 1e7))
        throw ValidationError("enumeration budget exceeded: " + std::to_string(total) +
                              " joint configurations (limit 1e7)");
    return static_cast<size_t>(total);
}

void for_each_config(const ModelParams& p, const TrainingCase& structure,
                     const ConfigVisitor& visit) {
    check_budget(p, structure);
    const int K = p.dims.rating_levels;
    const int n = static_cast<int>(structure.active.size());
    const uint32_t h_count = 1u << p.dims.hidden_units;
    const auto labels = enumerate_label_configs(p.dims);

    std::vector<ActiveUnit> assignment = structure.active;
    for (auto& a : assignment) a.level = 0;

    while (true) {
        for (const auto& label : labels)
            for (uint32_t h = 0; h < h_count; ++h)
                visit(assignment, label, h, config_energy(p, assignment, label, h));

        // advance base-K counter over the levels, first unit fastest
        int d = 0;
        while (d < n) {
            if (++assignment[d].level < K) break;
            assignment[d].level = 0;
            ++d;
        }
        if (d == n) break;
    }
}

double exact_log_partition_direct(const ModelParams& p, const TrainingCase& structure) {
    LogSumExp lse;
    for_each_config(p, structure,
                    [&](std::span<const ActiveUnit>, const LabelConfig&, uint32_t,
                        double energy) { lse.add(-energy); });
    return lse.value();
}

double exact_log_partition(const ModelParams& p, const TrainingCase& structure) {
    check_budget(p, structure);
    const int K = p.dims.rating_levels;
    const int F = p.dims.hidden_units;
    const int n = static_cast<int>(structure.active.size());
    const auto labels = enumerate_label_configs(p.dims);

    std::vector<ActiveUnit> assignment = structure.active;
    for (auto& a : assignment) a.level = 0;

    LogSumExp lse;
    while (true) {
        for (const auto& label : labels) {
            // sum over the hidden layer analytically: each unit contributes
            // an independent factor (1 + exp(input_j))
            double log_term = 0.0;
            for (const auto& a : assignment)
                log_term += p.vis_bias[static_cast<size_t>(a.unit) * K + a.level];
            if (label.genre >= 0) log_term += p.labels.genre_bias[label.genre];
            if (label.occupation >= 0)
                log_term += p.labels.occupation_bias[label.occupation];
            if (label.age_group >= 0) log_term += p.labels.age_bias[label.age_group];
            if (label.gender >= 0) log_term += p.labels.gender_bias[label.gender];
            for (int j = 0; j < F; ++j) {
                double input = p.hid_bias[j];
                for (const auto& a : assignment)
                    input += p.weights[(static_cast<size_t>(a.unit) * K + a.level) * F + j];
                if (label.genre >= 0)
                    input += p.labels.genre_w[static_cast<size_t>(label.genre) * F + j];
                if (label.occupation >= 0)
                    input += p.labels.occupation_w[static_cast<size_t>(label.occupation) * F + j];
                if (label.age_group >= 0)
                    input += p.labels.age_w[static_cast<size_t>(label.age_group) * F + j];
                if (label.gender >= 0)
                    input += p.labels.gender_w[static_cast<size_t>(label.gender) * F + j];
                log_term += softplus(input);
            }
            lse.add(log_term);
        }

        int d = 0;
        while (d < n) {
            if (++assignment[d].level < K) break;
            assignment[d].level = 0;
            ++d;
        }
        if (d == n) break;
    }
    return lse.value();
}

namespace {

LabelConfig case_label_config(const TrainingCase& data) {
    LabelConfig label;
    label.genre = hot_index(data.genre);
    label.occupation = data.occupation;
    label.age_group = data.age_group;
    label.gender = data.gender;
    return label;
}

} // namespace

std::vector<double> exact_hidden_conditional(const ModelParams& p,
                                             const TrainingCase& data) {
    const int F = p.dims.hidden_units;
    if (F > 24) throw ValidationError("hidden enumeration limited to F <= 24");
    const LabelConfig label = case_label_config(data);
    const uint32_t h_count = 1u << F;

    LogSumExp denom;
    std::vector<LogSumExp> numer(F);
    for (uint32_t h = 0; h < h_count; ++h) {
        const double log_w = -config_energy(p, data.active, label, h);
        denom.add(log_w);
        for (int j = 0; j < F; ++j)
            if ((h >> j) & 1u) numer[j].add(log_w);
    }
    std::vector<double> probs(F);
    for (int j = 0; j < F; ++j) probs[j] = std::exp(numer[j].value() - denom.value());
    return probs;
}

std::vector<double> exact_visible_conditional(const ModelParams& p,
                                              const TrainingCase& structure,
                                              uint32_t hidden_bits, int unit) {
    const int K = p.dims.rating_levels;
    const LabelConfig label = case_label_config(structure);
    std::vector<ActiveUnit> assignment = structure.active;
    size_t pos = assignment.size();
    for (size_t t = 0; t < assignment.size(); ++t)
        if (assignment[t].unit == unit) pos = t;
    if (pos == assignment.size())
        throw ValidationError("query unit not active in the structure case");

    std::vector<double> log_w(K);
    for (int k = 0; k < K; ++k) {
        assignment[pos].level = k;
        log_w[k] = -config_energy(p, assignment, label, hidden_bits);
    }
    softmax_inplace(log_w);
    return log_w;
}

namespace {

// marginal of one label block given hidden bits, everything else summed out
std::vector<double> label_marginal(const ModelParams& p, uint32_t hidden_bits,
                                   int block_size, int LabelConfig::* field) {
    const auto configs = enumerate_label_configs(p.dims);
    // visible assignment fixed arbitrarily: labels are independent of the
    // visible layer given hidden, so any constant assignment cancels
    const std::vector<ActiveUnit> none;
    std::vector<LogSumExp> bucket(block_size);
    LogSumExp total;
    for (const auto& label : configs) {
        const double log_w = -config_energy(p, none, label, hidden_bits);
        bucket[label.*field].add(log_w);
        total.add(log_w);
    }
    std::vector<double> probs(block_size);
    for (int b = 0; b < block_size; ++b)
        probs[b] = std::exp(bucket[b].value() - total.value());
    return probs;
}

} // namespace

std::vector<double> exact_genre_conditional(const ModelParams& p, uint32_t hidden_bits) {
    return label_marginal(p, hidden_bits, p.dims.genre_count, &LabelConfig::genre);
}
std::vector<double> exact_occupation_conditional(const ModelParams& p,
                                                 uint32_t hidden_bits) {
    return label_marginal(p, hidden_bits, p.dims.occupation_count,
                          &LabelConfig::occupation);
}
std::vector<double> exact_age_conditional(const ModelParams& p, uint32_t hidden_bits) {
    return label_marginal(p, hidden_bits, p.dims.age_groups, &LabelConfig::age_group);
}
std::vector<double> exact_gender_conditional(const ModelParams& p, uint32_t hidden_bits) {
    return label_marginal(p, hidden_bits, p.dims.gender_count, &LabelConfig::gender);
}

std::vector<double> exact_query_conditional(const ModelParams& p,
                                            const TrainingCase& observed,
                                            int query_unit) {
    const int K = p.dims.rating_levels;
    const int F = p.dims.hidden_units;
    if (F > 24) throw ValidationError("hidden enumeration limited to F <= 24");
    for (const auto& a : observed.active)
        if (a.unit == query_unit)
            throw ValidationError("query unit already observed in the case");

    const LabelConfig label = case_label_config(observed);
    std::vector<ActiveUnit> assignment = observed.active;
    assignment.push_back({query_unit, 0});
    const uint32_t h_count = 1u << F;

    std::vector<double> log_w(K);
    for (int k = 0; k < K; ++k) {
        assignment.back().level = k;
        LogSumExp lse;
        for (uint32_t h = 0; h < h_count; ++h)
            lse.add(-config_energy(p, assignment, label, h));
        log_w[k] = lse.value();
    }
    softmax_inplace(log_w);
    return log_w;
}

double exact_case_loglik(const ModelParams& p, const TrainingCase& data) {
    const int F = p.dims.hidden_units;
    if (F > 24) throw ValidationError("hidden enumeration limited to F <= 24");
    const LabelConfig label = case_label_config(data);
    LogSumExp numer;
    for (uint32_t h = 0; h < (1u << F); ++h)
        numer.add(-config_energy(p, data.active, label, h));
    return numer.value() - exact_log_partition_direct(p, data);
}

ModelParams exact_loglik_gradient(const ModelParams& p, const TrainingCase& data) {
    const int K = p.dims.rating_levels;
    const int F = p.dims.hidden_units;

    ModelParams grad;
    grad.dims = p.dims;
    grad.weights.assign(p.weights.size(), 0.0);
    grad.vis_bias.assign(p.vis_bias.size(), 0.0);
    grad.hid_bias.assign(p.hid_bias.size(), 0.0);
    grad.labels.genre_w.assign(p.labels.genre_w.size(), 0.0);
    grad.labels.genre_bias.assign(p.labels.genre_bias.size(), 0.0);
    grad.labels.occupation_w.assign(p.labels.occupation_w.size(), 0.0);
    grad.labels.occupation_bias.assign(p.labels.occupation_bias.size(), 0.0);
    grad.labels.age_w.assign(p.labels.age_w.size(), 0.0);
    grad.labels.age_bias.assign(p.labels.age_bias.size(), 0.0);
    grad.labels.gender_w.assign(p.labels.gender_w.size(), 0.0);
    grad.labels.gender_bias.assign(p.labels.gender_bias.size(), 0.0);

    // data term: hidden marginals given the clamped case
    const std::vector<double> h_data = exact_hidden_conditional(p, data);
    const LabelConfig data_label = case_label_config(data);
    for (const auto& a : data.active) {
        grad.vis_bias[static_cast<size_t>(a.unit) * K + a.level] += 1.0;
        auto w = grad.w_block(a.unit, a.level);
        for (int j = 0; j < F; ++j) w[j] += h_data[j];
    }
    for (int j = 0; j < F; ++j) grad.hid_bias[j] += h_data[j];
    auto add_label_data = [&](int idx, std::vector<double>& w_g, std::vector<double>& b_g) {
        if (idx < 0) return;
        b_g[idx] += 1.0;
        for (int j = 0; j < F; ++j) w_g[static_cast<size_t>(idx) * F + j] += h_data[j];
    };
    add_label_data(data_label.genre, grad.labels.genre_w, grad.labels.genre_bias);
    add_label_data(data_label.occupation, grad.labels.occupation_w,
                   grad.labels.occupation_bias);
    add_label_data(data_label.age_group, grad.labels.age_w, grad.labels.age_bias);
    add_label_data(data_label.gender, grad.labels.gender_w, grad.labels.gender_bias);

    // model term: expectation over the full joint
    const double log_z = exact_log_partition_direct(p, data);
    for_each_config(p, data,
                    [&](std::span<const ActiveUnit> assignment, const LabelConfig& label,
                        uint32_t h, double energy) {
                        const double w = std::exp(-energy - log_z);
                        for (const auto& a : assignment) {
                            grad.vis_bias[static_cast<size_t>(a.unit) * K + a.level] -= w;
                            auto wb = grad.w_block(a.unit, a.level);
                            for (int j = 0; j < F; ++j)
                                if ((h >> j) & 1u) wb[j] -= w;
                        }
                        for (int j = 0; j < F; ++j)
                            if ((h >> j) & 1u) grad.hid_bias[j] -= w;
                        auto sub_label = [&](int idx, std::vector<double>& w_g,
                                             std::vector<double>& b_g) {
                            if (idx < 0) return;
                            b_g[idx] -= w;
                            for (int j = 0; j < F; ++j)
                                if ((h >> j) & 1u)
                                    w_g[static_cast<size_t>(idx) * F + j] -= w;
                        };
                        sub_label(label.genre, grad.labels.genre_w, grad.labels.genre_bias);
                        sub_label(label.occupation, grad.labels.occupation_w,
                                  grad.labels.occupation_bias);
                        sub_label(label.age_group, grad.labels.age_w, grad.labels.age_bias);
                        sub_label(label.gender, grad.labels.gender_w,
                                  grad.labels.gender_bias);
                    });
    return grad;
}

} // namespace lcrbm::oracle
