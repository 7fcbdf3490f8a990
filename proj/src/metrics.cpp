#include "nlcm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "text.hpp"

namespace nlcm {

double csmf_accuracy(const Vector& estimate, const Vector& truth) {
    if (estimate.size() != truth.size()) throw std::invalid_argument("CSMF length mismatch");
    if (truth.size() < 2) throw std::invalid_argument("CSMF accuracy needs at least two causes");
    for (const Vector* v : {&estimate, &truth})
        if (v->minCoeff() < 0.0 || std::abs(v->sum() - 1.0) > 1e-6)
            throw std::invalid_argument("CSMF accuracy needs two probability vectors");
    // between two simplices the L1 distance is twice the total excess, and
    // summing one side keeps exact cases like a point mass vs uniform at 0
    const double excess = (estimate - truth).cwiseMax(0.0).sum();
    return 1.0 - excess / (1.0 - truth.minCoeff());
}

TopCauseResult top_cause_accuracy(const Matrix& cause_probs, const std::vector<std::size_t>& truth,
                                  std::size_t k) {
    if (std::size_t(cause_probs.rows()) != truth.size())
        throw std::invalid_argument("cause probability rows and labels differ in length");
    const std::size_t C = std::size_t(cause_probs.cols());
    if (k < 1 || k > C) throw std::invalid_argument("top-k needs 1 <= k <= C");
    TopCauseResult out;
    out.total = truth.size();
    std::vector<std::size_t> order(C);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        for (std::size_t c = 0; c < C; ++c) order[c] = c;
        const auto row = cause_probs.row(Eigen::Index(i));
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
        if (k < C && row[order[k - 1]] == row[order[k]]) ++out.tied_rows;
        if (std::find(order.begin(), order.begin() + long(k), truth[i]) != order.begin() + long(k))
            ++out.correct;
    }
    out.accuracy = out.total ? double(out.correct) / double(out.total) : 0.0;
    return out;
}

double cophenetic_dissimilarity(const RootedWeightedTree& tree, const Vector& slab_prob,
                                std::size_t source) {
    if (source == 0 || source >= tree.num_leaves())
        throw std::invalid_argument("source must be a source leaf rank in [1, G]");
    if (std::size_t(slab_prob.size()) != tree.size())
        throw std::invalid_argument("slab probabilities need one entry per node");
    std::vector<double> w(tree.size());
    for (std::size_t u = 0; u < tree.size(); ++u) w[u] = slab_prob[Eigen::Index(u)] * tree.weight(u);
    return tree.path_distance(tree.leaf(0), tree.leaf(source), w);
}

Matrix cophenetic_table(const RootedWeightedTree& tree, const Matrix& slab_prob) {
    Matrix out = Matrix::Zero(slab_prob.rows(), Eigen::Index(tree.num_leaves()));
    for (Eigen::Index c = 0; c < slab_prob.rows(); ++c) {
        const Vector row = slab_prob.row(c).transpose();
        for (std::size_t g = 1; g < tree.num_leaves(); ++g)
            out(c, Eigen::Index(g)) = cophenetic_dissimilarity(tree, row, g);
    }
    return out;
}

Vector csmf_rmse(const std::vector<Vector>& estimates, const std::vector<Vector>& truths) {
    if (estimates.empty() || estimates.size() != truths.size())
        throw std::invalid_argument("RMSE needs matching, non-empty replicate lists");
    Vector acc = Vector::Zero(truths[0].size());
    for (std::size_t r = 0; r < estimates.size(); ++r) {
        if (estimates[r].size() != acc.size() || truths[r].size() != acc.size())
            throw std::invalid_argument("CSMF length mismatch");
        acc += (estimates[r] - truths[r]).cwiseAbs2();
    }
    return (acc / double(estimates.size())).cwiseSqrt();
}

namespace {

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

std::string EvaluationReport::to_json() const {
    nlohmann::ordered_json j;
    j["cause_labels"] = cause_labels;
    j["domain_labels"] = domain_labels;
    j["pi0_estimate"] = to_std(pi0_estimate);
    if (pi0_truth) j["pi0_truth"] = to_std(*pi0_truth);
    if (csmf_accuracy) j["csmf_accuracy"] = *csmf_accuracy;
    if (abs_errors) j["abs_errors"] = to_std(*abs_errors);
    if (top_cause) {
        j["top_cause_accuracy"] = top_cause->accuracy;
        j["top_cause_correct"] = top_cause->correct;
        j["top_cause_total"] = top_cause->total;
        j["top_cause_tied_rows"] = top_cause->tied_rows;
    }
    auto& cop = j["cophenetic"];
    cop = nlohmann::ordered_json::object();
    for (Eigen::Index c = 0; c < cophenetic.rows(); ++c) {
        nlohmann::ordered_json row = nlohmann::ordered_json::object();
        for (Eigen::Index g = 1; g < cophenetic.cols(); ++g)
            row[domain_labels.at(std::size_t(g))] = cophenetic(c, g);
        cop[cause_labels.at(std::size_t(c))] = row;
    }
    return j.dump(2) + "\n";
}

std::string EvaluationReport::to_csv() const {
    using detail::format_double;
    std::ostringstream out;
    out << "cause,pi0_estimate,pi0_truth,abs_error";
    for (std::size_t g = 1; g < domain_labels.size(); ++g) out << ",dist_" << domain_labels[g];
    out << "\n";
    for (std::size_t c = 0; c < cause_labels.size(); ++c) {
        const auto ci = Eigen::Index(c);
        out << cause_labels[c] << ',' << format_double(pi0_estimate[ci]) << ','
            << (pi0_truth ? format_double((*pi0_truth)[ci]) : "") << ','
            << (abs_errors ? format_double((*abs_errors)[ci]) : "");
        for (Eigen::Index g = 1; g < cophenetic.cols(); ++g) out << ',' << format_double(cophenetic(ci, g));
        out << "\n";
    }
    return out.str();
}

}  // namespace nlcm
