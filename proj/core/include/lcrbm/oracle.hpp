#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lcrbm/model.hpp"

// Brute-force enumeration oracle for tiny models. Everything here recomputes
// energies and distributions straight from the stored tensors, independent of
// the closed-form implementations in model.cpp, so the two sides can check
// each other.
namespace lcrbm::oracle {

/// One joint assignment of the label blocks; -1 marks an absent block.
struct LabelConfig {
    int genre = -1;
    int occupation = -1;
    int age_group = -1;
    int gender = -1;
};

/// All label configurations of the variant: plain has exactly one (all -1),
/// item has G, user has O*A*S.
std::vector<LabelConfig> enumerate_label_configs(const ModelDims& dims);

/// Joint energy of one full configuration. `assignment` fixes a level for
/// each of the structure's active units; hidden units are the bits of
/// `hidden_bits` (bit j = h_j).
double config_energy(const ModelParams& p, std::span<const ActiveUnit> assignment,
                     const LabelConfig& label, uint32_t hidden_bits);

/// Number of joint configurations: K^(active units) * 2^F * label configs.
/// Throws ValidationError when it exceeds the enumeration budget of 1e7.
size_t check_budget(const ModelParams& p, const TrainingCase& structure);

/// Visits every joint configuration once, in a fixed documented order:
/// visible levels as base-K digits (first active unit = fastest digit), then
/// label configs, then hidden bits (innermost).
using ConfigVisitor = std::function<void(std::span<const ActiveUnit> assignment,
                                         const LabelConfig& label, uint32_t hidden_bits,
                                         double energy)>;
void for_each_config(const ModelParams& p, const TrainingCase& structure,
                     const ConfigVisitor& visit);

/// log Z over the structure's active units, summing exp(-E) over every joint
/// configuration directly.
double exact_log_partition_direct(const ModelParams& p, const TrainingCase& structure);

/// log Z again, hidden layer summed analytically per (visible, label) config.
/// Independent summation order; must agree with the direct route.
double exact_log_partition(const ModelParams& p, const TrainingCase& structure);

/// p(h_j = 1 | case's visible levels and labels) per hidden unit, by
/// enumerating hidden configurations.
std::vector<double> exact_hidden_conditional(const ModelParams& p,
                                             const TrainingCase& data);

/// p(v_unit = k | hidden bits) over K levels, by enumerating the unit's
/// levels with everything else held fixed at the structure's assignment.
std::vector<double> exact_visible_conditional(const ModelParams& p,
                                              const TrainingCase& structure,
                                              uint32_t hidden_bits, int unit);

/// Label-block conditionals given hidden bits, marginalizing the other
/// blocks by full enumeration.
std::vector<double> exact_genre_conditional(const ModelParams& p, uint32_t hidden_bits);
std::vector<double> exact_occupation_conditional(const ModelParams& p,
                                                 uint32_t hidden_bits);
std::vector<double> exact_age_conditional(const ModelParams& p, uint32_t hidden_bits);
std::vector<double> exact_gender_conditional(const ModelParams& p, uint32_t hidden_bits);

/// p(v_query = k | observed units and labels of `observed`), marginalizing
/// the hidden layer; the query unit must not be active in `observed`.
std::vector<double> exact_query_conditional(const ModelParams& p,
                                            const TrainingCase& observed,
                                            int query_unit);

/// Exact log p(case's visible levels and labels) under the model.
double exact_case_loglik(const ModelParams& p, const TrainingCase& data);

/// Exact gradient of log p(data) with respect to every parameter, returned
/// in parameter shapes (dims copied, gradient values in the tensors).
ModelParams exact_loglik_gradient(const ModelParams& p, const TrainingCase& data);

} // namespace lcrbm::oracle
