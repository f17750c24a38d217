#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lcrbm/dataset.hpp"
#include "lcrbm/model.hpp"
#include "lcrbm/train.hpp"

namespace lcrbm {

double mae(std::span<const double> predictions, std::span<const double> truths);
double rmse(std::span<const double> predictions, std::span<const double> truths);

/// Error sums over a set of evaluated pairs; aggregates across folds by
/// plain addition.
struct PairMetrics {
    double abs_err_sum = 0.0;
    double sq_err_sum = 0.0;
    size_t count = 0;
    size_t bias_only = 0;       // case unseen in train: bias-only prediction
    size_t global_fallback = 0; // user and item both unseen: global train mean

    double mae() const;
    double rmse() const;
    void add(const PairMetrics& other);
};

/// Predicts the expected rating for every test triple against a trained
/// model. Orientation follows train_cases: queries address the user's case
/// and the item's unit, or the reverse for item-oriented sets.
PairMetrics evaluate_pairs(const ModelParams& params, const CaseSet& train_cases,
                           const RatingDataset& train, const RatingDataset& test);

/// Per-item train-mean predictor with global-mean fallback; the sanity floor
/// every trained model must beat.
PairMetrics baseline_item_mean(const RatingDataset& train, const RatingDataset& test);

struct FoldMetrics {
    int fold_index = 0;
    double mae = 0.0;
    double rmse = 0.0;
    size_t test_count = 0;
    size_t bias_only = 0;
    size_t global_fallback = 0;
    double baseline_mae = 0.0;
    double baseline_rmse = 0.0;
    double train_seconds = 0.0; // volatile, excluded from the payload
};

struct EvalReport {
    std::string dataset_id;
    uint64_t dataset_checksum = 0;
    TrainConfig config;
    std::vector<FoldMetrics> folds;
    // aggregates: unweighted fold means (headline) and pooled over all pairs
    double mean_mae = 0.0;
    double mean_rmse = 0.0;
    double pooled_mae = 0.0;
    double pooled_rmse = 0.0;
    double wall_seconds = 0.0; // volatile, excluded from the payload
};

/// "RBM", "LC-RBM (Item)", "Sparse LC-RBM (User)", ...
std::string model_label(const TrainConfig& cfg);

/// Deterministic machine-readable report: config echo, per-fold metrics,
/// aggregates. No timestamps or durations, so equal runs serialize
/// byte-identically.
std::string report_payload_json(const EvalReport& report);

/// Aligned per-fold table with aggregate rows.
std::string report_table(const EvalReport& report);

/// One row per report (MAE / RMSE columns), the cross-model comparison view.
std::string summary_table(std::span<const EvalReport> reports);

struct CvCallbacks {
    std::function<void(int fold, const EpochRecord&)> on_epoch;
    std::function<void(const FoldMetrics&)> on_fold;
};

/// Full protocol: per fold, build cases for the variant, train with a seed
/// derived from (config seed, fold index), evaluate every test triple.
EvalReport run_cv(const std::vector<FoldSplit>& folds, const TrainConfig& cfg,
                  const std::string& dataset_id, uint64_t dataset_checksum,
                  const CvCallbacks& callbacks = {});

} // namespace lcrbm
