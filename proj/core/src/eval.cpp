#include "lcrbm/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "lcrbm/errors.hpp"
#include "lcrbm/numeric.hpp"
#include "lcrbm/predict.hpp"

namespace lcrbm {

double mae(std::span<const double> predictions, std::span<const double> truths) {
    if (predictions.empty() || predictions.size() != truths.size())
        throw ValidationError("mae needs equal non-empty prediction/truth lists");
    double sum = 0.0;
    for (size_t i = 0; i < predictions.size(); ++i)
        sum += std::abs(predictions[i] - truths[i]);
    return sum / static_cast<double>(predictions.size());
}

double rmse(std::span<const double> predictions, std::span<const double> truths) {
    if (predictions.empty() || predictions.size() != truths.size())
        throw ValidationError("rmse needs equal non-empty prediction/truth lists");
    double sum = 0.0;
    for (size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - truths[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(predictions.size()));
}

double PairMetrics::mae() const {
    return count ? abs_err_sum / static_cast<double>(count) : 0.0;
}
double PairMetrics::rmse() const {
    return count ? std::sqrt(sq_err_sum / static_cast<double>(count)) : 0.0;
}
void PairMetrics::add(const PairMetrics& other) {
    abs_err_sum += other.abs_err_sum;
    sq_err_sum += other.sq_err_sum;
    count += other.count;
    bias_only += other.bias_only;
    global_fallback += other.global_fallback;
}

namespace {

double global_train_mean(const RatingDataset& train) {
    if (train.triples.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& t : train.triples) sum += t.rating;
    return sum / static_cast<double>(train.triples.size());
}

// expected rating of softmax(vis_bias) at one unit
double bias_only_expected(const ModelParams& params, int unit) {
    const int K = params.dims.rating_levels;
    std::vector<double> probs(K);
    for (int k = 0; k < K; ++k)
        probs[k] = params.vis_bias[static_cast<size_t>(unit) * K + k];
    softmax_inplace(probs);
    double expected = 0.0;
    for (int k = 0; k < K; ++k) expected += (k + 1) * probs[k];
    return expected;
}

void tally(PairMetrics& m, double predicted, double truth) {
    const double err = predicted - truth;
    m.abs_err_sum += std::abs(err);
    m.sq_err_sum += err * err;
    ++m.count;
}

} // namespace

PairMetrics evaluate_pairs(const ModelParams& params, const CaseSet& train_cases,
                           const RatingDataset& train, const RatingDataset& test) {
    const bool item_oriented = train_cases.item_oriented;
    const int32_t case_domain = item_oriented ? train.num_items : train.num_users;
    const int32_t unit_domain = item_oriented ? train.num_users : train.num_items;

    std::vector<int32_t> case_of(case_domain, -1);
    for (size_t c = 0; c < train_cases.cases.size(); ++c)
        case_of[train_cases.cases[c].case_id] = static_cast<int32_t>(c);

    std::vector<uint8_t> unit_rated(unit_domain, 0);
    for (const auto& t : train.triples)
        unit_rated[item_oriented ? t.user_id : t.item_id] = 1;

    const double fallback = global_train_mean(train);

    // group test triples by case so each scorer is built once
    std::vector<uint32_t> order(test.triples.size());
    for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    auto case_key = [&](const RatingTriple& t) {
        return item_oriented ? t.item_id : t.user_id;
    };
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        return case_key(test.triples[a]) < case_key(test.triples[b]);
    });

    PairMetrics metrics;
    size_t pos = 0;
    while (pos < order.size()) {
        const int32_t key = case_key(test.triples[order[pos]]);
        size_t end = pos;
        while (end < order.size() && case_key(test.triples[order[end]]) == key) ++end;

        const int32_t case_idx = case_of[key];
        if (case_idx >= 0) {
            CaseScorer scorer(params, train_cases.cases[case_idx]);
            for (size_t i = pos; i < end; ++i) {
                const auto& t = test.triples[order[i]];
                const int unit = item_oriented ? t.user_id : t.item_id;
                tally(metrics, scorer.predict(unit).expected_rating, t.rating);
            }
        } else {
            for (size_t i = pos; i < end; ++i) {
                const auto& t = test.triples[order[i]];
                const int unit = item_oriented ? t.user_id : t.item_id;
                if (unit_rated[unit]) {
                    tally(metrics, bias_only_expected(params, unit), t.rating);
                    ++metrics.bias_only;
                } else {
                    tally(metrics, fallback, t.rating);
                    ++metrics.global_fallback;
                }
            }
        }
        pos = end;
    }
    return metrics;
}

PairMetrics baseline_item_mean(const RatingDataset& train, const RatingDataset& test) {
    std::vector<double> sum(train.num_items, 0.0);
    std::vector<int64_t> cnt(train.num_items, 0);
    for (const auto& t : train.triples) {
        sum[t.item_id] += t.rating;
        ++cnt[t.item_id];
    }
    const double fallback = global_train_mean(train);

    PairMetrics metrics;
    for (const auto& t : test.triples) {
        double predicted;
        if (cnt[t.item_id] > 0) {
            predicted = sum[t.item_id] / static_cast<double>(cnt[t.item_id]);
        } else {
            predicted = fallback;
            ++metrics.global_fallback;
        }
        tally(metrics, predicted, t.rating);
    }
    return metrics;
}

std::string model_label(const TrainConfig& cfg) {
    std::string label;
    switch (cfg.variant) {
        case LabelVariant::none: label = "RBM"; break;
        case LabelVariant::item_genre: label = "LC-RBM (Item)"; break;
        case LabelVariant::user_demographic: label = "LC-RBM (User)"; break;
    }
    if (cfg.sparse) label = "Sparse " + label;
    return label;
}

EvalReport run_cv(const std::vector<FoldSplit>& folds, const TrainConfig& cfg,
                  const std::string& dataset_id, uint64_t dataset_checksum,
                  const CvCallbacks& callbacks) {
    validate_config(cfg);
    if (folds.empty()) throw ValidationError("run_cv needs at least one fold");

    EvalReport report;
    report.dataset_id = dataset_id;
    report.dataset_checksum = dataset_checksum;
    report.config = cfg;
    const auto started = std::chrono::steady_clock::now();

    PairMetrics pooled;
    for (const auto& fold : folds) {
        TrainConfig fold_cfg = cfg;
        fold_cfg.seed = Rng::mix(cfg.seed, static_cast<uint64_t>(fold.fold_index));

        CaseSet cases = cfg.variant == LabelVariant::item_genre
                            ? build_item_cases(fold.train, cfg.hidden_units)
                            : build_user_cases(fold.train, cfg.variant, cfg.hidden_units);

        TrainResult trained;
        try {
            trained = train(cases, fold_cfg, [&](const EpochRecord& rec) {
                if (callbacks.on_epoch) callbacks.on_epoch(fold.fold_index, rec);
            });
        } catch (const NumericAbort& e) {
            throw NumericAbort("fold " + std::to_string(fold.fold_index) + ": " + e.what());
        }

        const PairMetrics pairs =
            evaluate_pairs(trained.params, cases, fold.train, fold.test);
        const PairMetrics base = baseline_item_mean(fold.train, fold.test);
        pooled.add(pairs);

        FoldMetrics fm;
        fm.fold_index = fold.fold_index;
        fm.mae = pairs.mae();
        fm.rmse = pairs.rmse();
        fm.test_count = pairs.count;
        fm.bias_only = pairs.bias_only;
        fm.global_fallback = pairs.global_fallback;
        fm.baseline_mae = base.mae();
        fm.baseline_rmse = base.rmse();
        for (const auto& rec : trained.log) fm.train_seconds += rec.wall_seconds;
        report.folds.push_back(fm);
        if (callbacks.on_fold) callbacks.on_fold(fm);
    }

    for (const auto& fm : report.folds) {
        report.mean_mae += fm.mae;
        report.mean_rmse += fm.rmse;
    }
    report.mean_mae /= static_cast<double>(report.folds.size());
    report.mean_rmse /= static_cast<double>(report.folds.size());
    report.pooled_mae = pooled.mae();
    report.pooled_rmse = pooled.rmse();
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

std::string report_payload_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["dataset"] = report.dataset_id;
    char checksum[32];
    std::snprintf(checksum, sizeof checksum, "%016llx",
                  static_cast<unsigned long long>(report.dataset_checksum));
    j["dataset_checksum"] = checksum;
    j["model"] = model_label(report.config);

    nlohmann::ordered_json cfg;
    cfg["learning_rate"] = report.config.learning_rate;
    cfg["epochs"] = report.config.epochs;
    cfg["hidden_units"] = report.config.hidden_units;
    cfg["cd_steps"] = report.config.cd_steps;
    cfg["minibatch_size"] = report.config.minibatch_size;
    cfg["weight_decay"] = report.config.weight_decay;
    cfg["momentum"] = report.config.momentum;
    cfg["momentum_late"] = report.config.momentum_late;
    cfg["momentum_switch_epoch"] = report.config.momentum_switch_epoch;
    cfg["sparsity_weight"] = report.config.sparsity_weight;
    cfg["sparsity_target"] = report.config.sparsity_target;
    cfg["variant"] = variant_name(report.config.variant);
    cfg["sparse"] = report.config.sparse;
    cfg["seed"] = report.config.seed;
    cfg["threads"] = report.config.threads;
    j["config"] = cfg;

    nlohmann::ordered_json folds = nlohmann::ordered_json::array();
    for (const auto& fm : report.folds) {
        nlohmann::ordered_json f;
        f["fold"] = fm.fold_index;
        f["mae"] = fm.mae;
        f["rmse"] = fm.rmse;
        f["test_count"] = fm.test_count;
        f["bias_only"] = fm.bias_only;
        f["global_fallback"] = fm.global_fallback;
        f["baseline_mae"] = fm.baseline_mae;
        f["baseline_rmse"] = fm.baseline_rmse;
        folds.push_back(f);
    }
    j["folds"] = folds;

    nlohmann::ordered_json agg;
    agg["mean_mae"] = report.mean_mae;
    agg["mean_rmse"] = report.mean_rmse;
    agg["pooled_mae"] = report.pooled_mae;
    agg["pooled_rmse"] = report.pooled_rmse;
    j["aggregate"] = agg;
    return j.dump(2) + "\n";
}

std::string report_table(const EvalReport& report) {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof line, "%s on %s\n", model_label(report.config).c_str(),
                  report.dataset_id.c_str());
    out += line;
    std::snprintf(line, sizeof line, "%-8s %8s %8s %10s %12s %12s\n", "fold", "MAE",
                  "RMSE", "pairs", "base MAE", "base RMSE");
    out += line;
    for (const auto& fm : report.folds) {
        std::snprintf(line, sizeof line, "%-8d %8.4f %8.4f %10zu %12.4f %12.4f\n",
                      fm.fold_index, fm.mae, fm.rmse, fm.test_count, fm.baseline_mae,
                      fm.baseline_rmse);
        out += line;
    }
    std::snprintf(line, sizeof line, "%-8s %8.4f %8.4f\n", "mean", report.mean_mae,
                  report.mean_rmse);
    out += line;
    std::snprintf(line, sizeof line, "%-8s %8.4f %8.4f\n", "pooled", report.pooled_mae,
                  report.pooled_rmse);
    out += line;
    return out;
}

std::string summary_table(std::span<const EvalReport> reports) {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof line, "%-26s %8s %8s\n", "model", "MAE", "RMSE");
    out += line;
    for (const auto& r : reports) {
        std::snprintf(line, sizeof line, "%-26s %8.4f %8.4f\n",
                      model_label(r.config).c_str(), r.mean_mae, r.mean_rmse);
        out += line;
    }
    return out;
}

} // namespace lcrbm
