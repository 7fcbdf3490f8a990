#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nlcm/model.hpp"
#include "nlcm/tree.hpp"

namespace nlcm {

/// 1 - sum|estimate - truth| / (2 (1 - min truth)). Requires C >= 2 and
/// equal lengths.
double csmf_accuracy(const Vector& estimate, const Vector& truth);

struct TopCauseResult {
    double accuracy = 0.0;
    std::size_t correct = 0;
    std::size_t total = 0;
    /// Rows whose k-th place was decided by a tie (smallest index wins).
    std::size_t tied_rows = 0;
};

/// Fraction of rows whose true cause is among the k highest probabilities.
TopCauseResult top_cause_accuracy(const Matrix& cause_probs, const std::vector<std::size_t>& truth,
                                  std::size_t k = 1);

/// Path length between the target leaf (rank 0) and source leaf `source`
/// under edge weights p_u * w_u, where `slab_prob` has one entry per node.
double cophenetic_dissimilarity(const RootedWeightedTree& domain_tree, const Vector& slab_prob,
                                std::size_t source);

/// C x (G+1) table; column 0 (target to itself) is zero.
Matrix cophenetic_table(const RootedWeightedTree& domain_tree, const Matrix& slab_prob);

/// Per-cause sqrt(mean over replicates of (estimate_c - truth_c)^2).
Vector csmf_rmse(const std::vector<Vector>& estimates, const std::vector<Vector>& truths);

struct EvaluationReport {
    std::vector<std::string> cause_labels;
    std::vector<std::string> domain_labels;
    std::optional<double> csmf_accuracy;
    std::optional<TopCauseResult> top_cause;
    std::optional<Vector> abs_errors;  // per cause
    Vector pi0_estimate;
    std::optional<Vector> pi0_truth;
    Matrix cophenetic;  // C x (G+1)

    std::string to_json() const;
    /// One row per cause: label, estimate, truth, abs error, distances.
    std::string to_csv() const;
};

}  // namespace nlcm
