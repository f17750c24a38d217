#include "lcrbm/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

#include "lcrbm/errors.hpp"

namespace lcrbm {

void validate_config(const TrainConfig& cfg) {
    if (!(cfg.learning_rate > 0)) throw ValidationError("learning_rate must be > 0");
    if (cfg.epochs < 0) throw ValidationError("epochs must be >= 0");
    if (cfg.hidden_units < 1) throw ValidationError("hidden_units must be >= 1");
    if (cfg.cd_steps < 1) throw ValidationError("cd_steps must be >= 1");
    if (cfg.minibatch_size < 1) throw ValidationError("minibatch_size must be >= 1");
    if (cfg.weight_decay < 0) throw ValidationError("weight_decay must be >= 0");
    if (cfg.momentum < 0 || cfg.momentum >= 1 || cfg.momentum_late < 0 ||
        cfg.momentum_late >= 1)
        throw ValidationError("momentum must lie in [0, 1)");
    if (cfg.sparsity_weight < 0) throw ValidationError("sparsity_weight must be >= 0");
    if (!(cfg.sparsity_target > 0 && cfg.sparsity_target < 1))
        throw ValidationError("sparsity_target must lie in (0, 1)");
    if (cfg.threads < 1) throw ValidationError("threads must be >= 1");
}

std::string config_to_kv(const TrainConfig& cfg) {
    std::ostringstream out;
    out.precision(17);
    out << "learning_rate = " << cfg.learning_rate << "\n"
        << "epochs = " << cfg.epochs << "\n"
        << "hidden_units = " << cfg.hidden_units << "\n"
        << "cd_steps = " << cfg.cd_steps << "\n"
        << "minibatch_size = " << cfg.minibatch_size << "\n"
        << "weight_decay = " << cfg.weight_decay << "\n"
        << "momentum = " << cfg.momentum << "\n"
        << "momentum_late = " << cfg.momentum_late << "\n"
        << "momentum_switch_epoch = " << cfg.momentum_switch_epoch << "\n"
        << "sparsity_weight = " << cfg.sparsity_weight << "\n"
        << "sparsity_target = " << cfg.sparsity_target << "\n"
        << "variant = " << variant_name(cfg.variant) << "\n"
        << "sparse = " << (cfg.sparse ? "true" : "false") << "\n"
        << "seed = " << cfg.seed << "\n"
        << "threads = " << cfg.threads << "\n";
    return out.str();
}

TrainConfig config_from_kv(const std::string& text, const std::string& origin) {
    TrainConfig cfg;
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ParseError(origin, line_no, "expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        try {
            if (key == "learning_rate") cfg.learning_rate = std::stod(value);
            else if (key == "epochs") cfg.epochs = std::stoi(value);
            else if (key == "hidden_units") cfg.hidden_units = std::stoi(value);
            else if (key == "cd_steps") cfg.cd_steps = std::stoi(value);
            else if (key == "minibatch_size") cfg.minibatch_size = std::stoi(value);
            else if (key == "weight_decay") cfg.weight_decay = std::stod(value);
            else if (key == "momentum") cfg.momentum = std::stod(value);
            else if (key == "momentum_late") cfg.momentum_late = std::stod(value);
            else if (key == "momentum_switch_epoch") cfg.momentum_switch_epoch = std::stoi(value);
            else if (key == "sparsity_weight") cfg.sparsity_weight = std::stod(value);
            else if (key == "sparsity_target") cfg.sparsity_target = std::stod(value);
            else if (key == "variant") cfg.variant = variant_from_name(value);
            else if (key == "sparse") {
                if (value == "true") cfg.sparse = true;
                else if (value == "false") cfg.sparse = false;
                else throw ParseError(origin, line_no, "sparse must be true or false");
            }
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "threads") cfg.threads = std::stoi(value);
            else throw ParseError(origin, line_no, "unknown key \"" + key + "\"");
        } catch (const ParseError&) {
            throw;
        } catch (const ValidationError& e) {
            throw ParseError(origin, line_no, e.what());
        } catch (const std::exception&) {
            throw ParseError(origin, line_no, "bad value \"" + value + "\" for " + key);
        }
    }
    return cfg;
}

ModelParams zero_like(const ModelParams& like) {
    ModelParams z;
    z.dims = like.dims;
    z.weights.assign(like.weights.size(), 0.0);
    z.vis_bias.assign(like.vis_bias.size(), 0.0);
    z.hid_bias.assign(like.hid_bias.size(), 0.0);
    z.labels.genre_w.assign(like.labels.genre_w.size(), 0.0);
    z.labels.genre_bias.assign(like.labels.genre_bias.size(), 0.0);
    z.labels.occupation_w.assign(like.labels.occupation_w.size(), 0.0);
    z.labels.occupation_bias.assign(like.labels.occupation_bias.size(), 0.0);
    z.labels.age_w.assign(like.labels.age_w.size(), 0.0);
    z.labels.age_bias.assign(like.labels.age_bias.size(), 0.0);
    z.labels.gender_w.assign(like.labels.gender_w.size(), 0.0);
    z.labels.gender_bias.assign(like.labels.gender_bias.size(), 0.0);
    return z;
}

GradientAccumulator make_accumulator(const ModelParams& params) {
    GradientAccumulator acc;
    acc.g = zero_like(params);
    acc.hidden_prob_sum.assign(params.hid_bias.size(), 0.0);
    acc.data_level_count.assign(params.vis_bias.size(), 0.0);
    return acc;
}

void GradientAccumulator::reset() {
    auto zero = [](std::vector<double>& v) { std::fill(v.begin(), v.end(), 0.0); };
    zero(g.weights);
    zero(g.vis_bias);
    zero(g.hid_bias);
    zero(g.labels.genre_w);
    zero(g.labels.genre_bias);
    zero(g.labels.occupation_w);
    zero(g.labels.occupation_bias);
    zero(g.labels.age_w);
    zero(g.labels.age_bias);
    zero(g.labels.gender_w);
    zero(g.labels.gender_bias);
    zero(hidden_prob_sum);
    zero(data_level_count);
    case_count = 0;
}

void GradientAccumulator::merge(const GradientAccumulator& other) {
    auto add = [](std::vector<double>& dst, const std::vector<double>& src) {
        for (size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    };
    add(g.weights, other.g.weights);
    add(g.vis_bias, other.g.vis_bias);
    add(g.hid_bias, other.g.hid_bias);
    add(g.labels.genre_w, other.g.labels.genre_w);
    add(g.labels.genre_bias, other.g.labels.genre_bias);
    add(g.labels.occupation_w, other.g.labels.occupation_w);
    add(g.labels.occupation_bias, other.g.labels.occupation_bias);
    add(g.labels.age_w, other.g.labels.age_w);
    add(g.labels.age_bias, other.g.labels.age_bias);
    add(g.labels.gender_w, other.g.labels.gender_w);
    add(g.labels.gender_bias, other.g.labels.gender_bias);
    add(hidden_prob_sum, other.hidden_prob_sum);
    add(data_level_count, other.data_level_count);
    case_count += other.case_count;
}

double cd_gradient(const ModelParams& params, const TrainingCase& c, int cd_steps,
                   Rng& rng, GradientAccumulator& acc, ChainState& state) {
    const int F = params.dims.hidden_units;
    const int K = params.dims.rating_levels;

    start_chain(params, c, state, rng);

    // positive phase: data levels and labels against p(h | data)
    const std::vector<double>& pos = state.hidden.probs;
    for (const auto& a : c.active) {
        auto w = acc.g.w_block(a.unit, a.level);
        for (int j = 0; j < F; ++j) w[j] += pos[j];
        acc.g.vis_bias[static_cast<size_t>(a.unit) * K + a.level] += 1.0;
        acc.data_level_count[static_cast<size_t>(a.unit) * K + a.level] += 1.0;
    }
    for (int j = 0; j < F; ++j) {
        acc.g.hid_bias[j] += pos[j];
        acc.hidden_prob_sum[j] += pos[j];
    }
    if (params.dims.variant == LabelVariant::item_genre) {
        for (size_t gi = 0; gi < c.genre.size(); ++gi) {
            if (!c.genre[gi]) continue;
            acc.g.labels.genre_bias[gi] += 1.0;
            for (int j = 0; j < F; ++j)
                acc.g.labels.genre_w[gi * F + j] += pos[j];
        }
    } else if (params.dims.variant == LabelVariant::user_demographic) {
        auto add_pos = [&](int idx, std::vector<double>& w, std::vector<double>& b) {
            if (idx < 0) return;
            b[idx] += 1.0;
            for (int j = 0; j < F; ++j) w[static_cast<size_t>(idx) * F + j] += pos[j];
        };
        add_pos(c.occupation, acc.g.labels.occupation_w, acc.g.labels.occupation_bias);
        add_pos(c.age_group, acc.g.labels.age_w, acc.g.labels.age_bias);
        add_pos(c.gender, acc.g.labels.gender_w, acc.g.labels.gender_bias);
    }

    for (int t = 0; t < cd_steps; ++t) gibbs_step(params, c, state, rng);

    // negative phase: T-th reconstruction against its hidden probabilities
    const std::vector<double>& neg = state.hidden.probs;
    double recon_error = 0.0;
    for (size_t idx = 0; idx < state.visible.size(); ++idx) {
        const auto& a = state.visible[idx];
        auto w = acc.g.w_block(a.unit, a.level);
        for (int j = 0; j < F; ++j) w[j] -= neg[j];
        acc.g.vis_bias[static_cast<size_t>(a.unit) * K + a.level] -= 1.0;
        recon_error += std::abs(a.level - c.active[idx].level);
    }
    for (int j = 0; j < F; ++j) acc.g.hid_bias[j] -= neg[j];
    if (params.dims.variant == LabelVariant::item_genre) {
        if (state.genre >= 0) {
            acc.g.labels.genre_bias[state.genre] -= 1.0;
            for (int j = 0; j < F; ++j)
                acc.g.labels.genre_w[static_cast<size_t>(state.genre) * F + j] -= neg[j];
        }
    } else if (params.dims.variant == LabelVariant::user_demographic) {
        auto sub_neg = [&](int idx, std::vector<double>& w, std::vector<double>& b) {
            if (idx < 0) return;
            b[idx] -= 1.0;
            for (int j = 0; j < F; ++j) w[static_cast<size_t>(idx) * F + j] -= neg[j];
        };
        sub_neg(state.occupation, acc.g.labels.occupation_w, acc.g.labels.occupation_bias);
        sub_neg(state.age_group, acc.g.labels.age_w, acc.g.labels.age_bias);
        sub_neg(state.gender, acc.g.labels.gender_w, acc.g.labels.gender_bias);
    }

    ++acc.case_count;
    return recon_error;
}

void sparsity_gradient(GradientAccumulator& acc, double target, double weight) {
    if (weight == 0.0 || acc.case_count == 0) return;
    const int F = static_cast<int>(acc.hidden_prob_sum.size());
    std::vector<double> push(F);
    for (int j = 0; j < F; ++j) {
        const double q = acc.hidden_prob_sum[j] / static_cast<double>(acc.case_count);
        push[j] = weight * (q - target);
        acc.g.hid_bias[j] -= push[j] * static_cast<double>(acc.case_count);
    }
    // weight rows feeding a too-active unit are pushed down in proportion to
    // how often their (unit, level) fired in the data
    for (size_t ik = 0; ik < acc.data_level_count.size(); ++ik) {
        const double count = acc.data_level_count[ik];
        if (count == 0.0) continue;
        double* w = acc.g.weights.data() + ik * F;
        for (int j = 0; j < F; ++j) w[j] -= push[j] * count;
    }
}

namespace {

// velocity = momentum * velocity + lr * (grad / n - decay * param);
// param += velocity. Returns the running sum of the updated params so the
// caller can detect divergence with one check.
double update_tensor(std::vector<double>& param, const std::vector<double>& grad,
                     std::vector<double>& velocity, double lr, double momentum,
                     double decay, double inv_n) {
    double sum = 0.0;
    for (size_t i = 0; i < param.size(); ++i) {
        velocity[i] = momentum * velocity[i] + lr * (grad[i] * inv_n - decay * param[i]);
        param[i] += velocity[i];
        sum += param[i];
    }
    return sum;
}

double max_abs(const ModelParams& g) {
    double m = 0.0;
    auto scan = [&m](const std::vector<double>& v) {
        for (double x : v) m = std::max(m, std::abs(x));
    };
    scan(g.weights);
    scan(g.vis_bias);
    scan(g.hid_bias);
    scan(g.labels.genre_w);
    scan(g.labels.genre_bias);
    scan(g.labels.occupation_w);
    scan(g.labels.occupation_bias);
    scan(g.labels.age_w);
    scan(g.labels.age_bias);
    scan(g.labels.gender_w);
    scan(g.labels.gender_bias);
    return m;
}

} // namespace

void apply_update(ModelParams& params, const GradientAccumulator& acc,
                  double learning_rate, double momentum, double weight_decay,
                  ModelParams& velocity) {
    if (acc.case_count < 1) throw ValidationError("apply_update without accumulated cases");
    const double inv_n = 1.0 / static_cast<double>(acc.case_count);
    double sum = 0.0;
    sum += update_tensor(params.weights, acc.g.weights, velocity.weights, learning_rate,
                         momentum, weight_decay, inv_n);
    sum += update_tensor(params.vis_bias, acc.g.vis_bias, velocity.vis_bias,
                         learning_rate, momentum, 0.0, inv_n);
    sum += update_tensor(params.hid_bias, acc.g.hid_bias, velocity.hid_bias,
                         learning_rate, momentum, 0.0, inv_n);
    sum += update_tensor(params.labels.genre_w, acc.g.labels.genre_w,
                         velocity.labels.genre_w, learning_rate, momentum, weight_decay,
                         inv_n);
    sum += update_tensor(params.labels.genre_bias, acc.g.labels.genre_bias,
                         velocity.labels.genre_bias, learning_rate, momentum, 0.0, inv_n);
    sum += update_tensor(params.labels.occupation_w, acc.g.labels.occupation_w,
                         velocity.labels.occupation_w, learning_rate, momentum,
                         weight_decay, inv_n);
    sum += update_tensor(params.labels.occupation_bias, acc.g.labels.occupation_bias,
                         velocity.labels.occupation_bias, learning_rate, momentum, 0.0,
                         inv_n);
    sum += update_tensor(params.labels.age_w, acc.g.labels.age_w, velocity.labels.age_w,
                         learning_rate, momentum, weight_decay, inv_n);
    sum += update_tensor(params.labels.age_bias, acc.g.labels.age_bias,
                         velocity.labels.age_bias, learning_rate, momentum, 0.0, inv_n);
    sum += update_tensor(params.labels.gender_w, acc.g.labels.gender_w,
                         velocity.labels.gender_w, learning_rate, momentum, weight_decay,
                         inv_n);
    sum += update_tensor(params.labels.gender_bias, acc.g.labels.gender_bias,
                         velocity.labels.gender_bias, learning_rate, momentum, 0.0,
                         inv_n);
    if (!std::isfinite(sum))
        throw NumericAbort("non-finite parameters after update, max |grad| = " +
                           std::to_string(max_abs(acc.g)));
}

TrainResult train(const CaseSet& cases, const TrainConfig& cfg,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
    validate_config(cfg);
    if (cases.cases.empty()) throw ValidationError("training needs at least one case");
    if (cases.dims.variant != cfg.variant)
        throw ValidationError("case set was built for a different variant");

    TrainResult result;
    result.params = init_params(cases.dims, cases, cfg.seed);
    ModelParams velocity = zero_like(result.params);

    const size_t n = cases.cases.size();
    const double effective_sparsity = cfg.sparse ? cfg.sparsity_weight : 0.0;
    const int threads = std::max(1, cfg.threads);

    std::vector<uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    std::vector<GradientAccumulator> accs;
    for (int t = 0; t < threads; ++t) accs.push_back(make_accumulator(result.params));
    std::vector<ChainState> chains(threads);

    size_t rating_count = 0;
    for (const auto& c : cases.cases) rating_count += c.active.size();

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto epoch_start = std::chrono::steady_clock::now();
        Rng shuffle_rng(Rng::mix(cfg.seed, 0x73687566ULL, static_cast<uint64_t>(epoch)));
        shuffle_rng.shuffle(std::span<uint32_t>(order));
        const double momentum = epoch > cfg.momentum_switch_epoch ? cfg.momentum_late
                                                                  : cfg.momentum;

        double epoch_recon = 0.0;
        double epoch_activation = 0.0;

        for (size_t start = 0; start < n; start += cfg.minibatch_size) {
            const size_t stop = std::min(n, start + cfg.minibatch_size);
            const size_t batch = stop - start;

            auto run_span = [&](int tid, size_t lo, size_t hi) {
                GradientAccumulator& acc = accs[tid];
                for (size_t idx = lo; idx < hi; ++idx) {
                    const TrainingCase& c = cases.cases[order[idx]];
                    Rng case_rng(Rng::mix(cfg.seed, static_cast<uint64_t>(epoch),
                                          static_cast<uint64_t>(c.case_id)));
                    epoch_recon +=
                        cd_gradient(result.params, c, cfg.cd_steps, case_rng, acc,
                                    chains[tid]);
                }
            };

            for (auto& acc : accs) acc.reset();
            if (threads == 1 || batch < 2 * static_cast<size_t>(threads)) {
                run_span(0, start, stop);
            } else {
                // contiguous subchunks, merged in order: reproducible per
                // thread count
                std::vector<double> recon_parts(threads, 0.0);
                std::vector<std::thread> pool;
                const size_t per = (batch + threads - 1) / threads;
                for (int t = 0; t < threads; ++t) {
                    const size_t lo = start + t * per;
                    const size_t hi = std::min(stop, lo + per);
                    if (lo >= hi) break;
                    pool.emplace_back([&, t, lo, hi] {
                        GradientAccumulator& acc = accs[t];
                        double recon = 0.0;
                        for (size_t idx = lo; idx < hi; ++idx) {
                            const TrainingCase& c = cases.cases[order[idx]];
                            Rng case_rng(Rng::mix(cfg.seed, static_cast<uint64_t>(epoch),
                                                  static_cast<uint64_t>(c.case_id)));
                            recon += cd_gradient(result.params, c, cfg.cd_steps,
                                                 case_rng, acc, chains[t]);
                        }
                        recon_parts[t] = recon;
                    });
                }
                for (auto& th : pool) th.join();
                for (int t = 1; t < threads; ++t) accs[0].merge(accs[t]);
                for (double r : recon_parts) epoch_recon += r;
            }

            for (double q : accs[0].hidden_prob_sum) epoch_activation += q;
            sparsity_gradient(accs[0], cfg.sparsity_target, effective_sparsity);
            try {
                apply_update(result.params, accs[0], cfg.learning_rate, momentum,
                             cfg.weight_decay, velocity);
            } catch (const NumericAbort& e) {
                throw NumericAbort("epoch " + std::to_string(epoch) + ", minibatch " +
                                   std::to_string(start / cfg.minibatch_size) + ": " +
                                   e.what());
            }
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.recon_error = rating_count ? epoch_recon / static_cast<double>(rating_count) : 0.0;
        rec.mean_hidden_activation =
            epoch_activation /
            (static_cast<double>(n) * static_cast<double>(cases.dims.hidden_units));
        rec.wall_seconds = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - epoch_start)
                               .count();
        result.log.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }
    return result;
}

} // namespace lcrbm
