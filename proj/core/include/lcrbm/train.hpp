#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lcrbm/model.hpp"

namespace lcrbm {

struct TrainConfig {
    double learning_rate = 0.0005;
    int epochs = 100;
    int hidden_units = 100;
    int cd_steps = 1;
    int minibatch_size = 100; // cases per update
    double weight_decay = 0.0002;
    double momentum = 0.5;
    double momentum_late = 0.9;
    int momentum_switch_epoch = 5; // epochs after this one use momentum_late
    double sparsity_weight = 0.01; // applied only when sparse
    double sparsity_target = 0.05;
    LabelVariant variant = LabelVariant::none;
    bool sparse = false;
    uint64_t seed = 1;
    int threads = 1;
};

/// Throws ValidationError on out-of-range values.
void validate_config(const TrainConfig& cfg);

/// Flat "key = value" serialization, one key per line.
std::string config_to_kv(const TrainConfig& cfg);

/// Parses the same format; unknown keys and malformed lines are ParseErrors.
/// Missing keys keep their defaults.
TrainConfig config_from_kv(const std::string& text, const std::string& origin);

/// Zero tensors shaped like `like`; shared by gradients and velocities.
ModelParams zero_like(const ModelParams& like);

/// Minibatch gradient sums plus the bookkeeping the sparsity penalty needs.
struct GradientAccumulator {
    ModelParams g; // gradient sums in parameter shapes
    std::vector<double> hidden_prob_sum;  // data-phase activation sums per hidden unit
    std::vector<double> data_level_count; // observed (unit, level) counts, [m*K]
    int64_t case_count = 0;

    void reset();
    void merge(const GradientAccumulator& other);
};

GradientAccumulator make_accumulator(const ModelParams& params);

/// Adds one case's CD-T contribution. The positive phase uses hidden
/// probabilities given the data; the negative phase runs T Gibbs sweeps from
/// the data and uses the chain-end hidden probabilities against the T-th
/// reconstruction. Returns the case's summed |sampled level - data level|
/// reconstruction error.
double cd_gradient(const ModelParams& params, const TrainingCase& c, int cd_steps,
                   Rng& rng, GradientAccumulator& acc, ChainState& workspace);

/// Target-activation penalty: with q_j the minibatch-mean data activation of
/// hidden unit j, subtracts s_j = weight * (q_j - target) from the hidden
/// bias gradient, and s_j scaled by the observed (unit, level) data count
/// from each weight row feeding unit j. weight = 0 is a no-op.
void sparsity_gradient(GradientAccumulator& acc, double target, double weight);

/// Momentum SGD step: velocity = momentum * velocity
/// + lr * (grad / case_count - weight_decay * param); param += velocity.
/// Weight decay touches weight matrices only, never biases. Throws
/// NumericAbort when any parameter leaves the finite range.
void apply_update(ModelParams& params, const GradientAccumulator& acc,
                  double learning_rate, double momentum, double weight_decay,
                  ModelParams& velocity);

struct EpochRecord {
    int epoch = 0; // 1-based
    double recon_error = 0.0; // mean |sampled - observed| in rating units
    double mean_hidden_activation = 0.0;
    double wall_seconds = 0.0;
};

struct TrainResult {
    ModelParams params;
    std::vector<EpochRecord> log;
};

/// Full training run: init_params, then config.epochs passes of shuffled
/// minibatches; each case draws from an RNG stream derived from (seed, epoch,
/// case id) so the result is independent of scheduling. Bit-reproducible for
/// threads = 1.
TrainResult train(const CaseSet& cases, const TrainConfig& cfg,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

} // namespace lcrbm
