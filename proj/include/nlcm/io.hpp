#pragma once

#include <string>
#include <vector>

#include "nlcm/dataset.hpp"
#include "nlcm/tree.hpp"
#include "nlcm/vi.hpp"

namespace nlcm {

/// Fitted quantities read back from a result document, enough for
/// evaluation without refitting.
struct FitSummary {
    std::vector<std::string> cause_labels;
    std::vector<std::string> domain_labels;
    std::vector<std::string> domain_nodes;
    Vector pi0_mean;
    std::vector<std::string> target_subjects;
    Matrix target_cause_probs;  // rows follow target_subjects
    Matrix slab_prob;           // C x P, columns follow domain_nodes
    std::string domain_tree;    // serialized tree document
    std::string mode;
    bool converged = false;
};

/// Result document: trace, convergence, target CSMF, target cause
/// probabilities, slab table, K, seed, comparator metadata.
std::string fit_result_json(const FitResult& result, const VbProblem& problem);
FitSummary parse_fit_result(const std::string& document);

/// id,domain,<cause labels...> for every subject.
std::string e_matrix_csv(const FitResult& result, const Dataset& data);
/// domain,cause,dirichlet,mean per (domain, cause).
std::string pi_summary_csv(const FitResult& result, const Dataset& data);
/// cause,<source domain labels...>
std::string cophenetic_csv(const Matrix& table, const Dataset& data);
std::string elbo_trace_csv(const std::vector<double>& trace);

/// Writes text to path, creating parent directories. Throws on failure.
void write_text(const std::string& path, const std::string& text);

}  // namespace nlcm
