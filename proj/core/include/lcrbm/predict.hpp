#pragma once

#include <vector>

#include "lcrbm/model.hpp"

namespace lcrbm {

struct Prediction {
    std::vector<double> distribution; // over the K levels, sums to 1
    double expected_rating = 0.0;     // sum of (k+1) * p_k, in [1, K]
    int argmax_rating = 0;            // 1..K, ties break to the lower rating
};

/// Precomputed hidden inputs of one case's observed ratings and labels,
/// reused across query units. Scoring one query level costs O(F).
class CaseScorer {
  public:
    CaseScorer(const ModelParams& params, const TrainingCase& observed);

    /// Log-domain unnormalized score of (query_unit = level | observed):
    /// vis_bias[query, level] plus the softplus sum over hidden units. The
    /// query unit must not be observed in the case.
    double score(int query_unit, int level) const;

    /// Softmax of the K scores, max-subtracted. For a case with no observed
    /// ratings this degenerates to the bias-only distribution
    /// softmax(vis_bias[query]), the cold-start rule.
    Prediction predict(int query_unit) const;

  private:
    const ModelParams& params_;
    const TrainingCase& observed_;
    std::vector<double> base_; // hid_bias + observed couplings + label couplings
};

/// One-shot wrappers around CaseScorer.
double score_unnormalized(const ModelParams& params, const TrainingCase& observed,
                          int query_unit, int level);
Prediction predict(const ModelParams& params, const TrainingCase& observed,
                   int query_unit);

} // namespace lcrbm
