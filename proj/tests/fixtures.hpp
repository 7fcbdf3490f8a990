#pragma once
// Random instances shared by the unit tests and the acceptance binary.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nlcm/dataset.hpp"
#include "nlcm/model.hpp"
#include "nlcm/rng.hpp"
#include "nlcm/tree.hpp"

namespace fixture {

struct Instance {
    nlcm::RootedWeightedTree domain_tree;
    nlcm::RootedWeightedTree cause_tree;
    nlcm::Dataset data;
};

/// Domain tree over `leaves` leaves "0".."leaves-1". With `nested`, the first
/// two leaves hang below an internal node; the rest attach to the root.
inline nlcm::RootedWeightedTree domain_tree(std::size_t leaves, bool nested = true) {
    std::string doc = "id,parent,weight,level\nroot,,1,1\n";
    if (nested && leaves >= 3) doc += "m,root,1,2\n";
    for (std::size_t g = 0; g < leaves; ++g) {
        const bool below = nested && leaves >= 3 && g < 2;
        doc += std::to_string(g) + (below ? ",m,1,2\n" : ",root,1,2\n");
    }
    return nlcm::parse_tree(doc);
}

/// Cause tree over `causes` leaves; with `nested` and C >= 3, c1 and c2
/// share an internal node on a third level.
inline nlcm::RootedWeightedTree cause_tree(std::size_t causes, bool nested = false) {
    std::string doc = "id,parent,weight,level\nroot,,1,1\n";
    const bool deep = nested && causes >= 3;
    if (deep) doc += "k,root,1,2\n";
    std::string order = "# leaves: ";
    for (std::size_t c = 1; c <= causes; ++c) {
        const std::string id = "c" + std::to_string(c);
        doc += id + ((deep && c <= 2) ? ",k,1,3\n" : (deep ? ",root,1,3\n" : ",root,1,2\n"));
        order += (c > 1 ? "," : "") + id;
    }
    return nlcm::parse_tree(doc + order + "\n");
}

struct InstanceOptions {
    std::size_t N = 200, J = 10, C = 3, K = 2, leaves = 4;
    double missing_rate = 0.05;
    /// Probability that a source-domain subject also has its cause hidden.
    double source_unlabelled = 0.1;
    bool nested_domains = true;
    bool nested_causes = false;
};

/// Data drawn from a nested latent class model with random cause-specific
/// profiles; target (rank 0) causes are hidden.
inline Instance random_instance(std::uint64_t seed, const InstanceOptions& o = {}) {
    Instance inst{domain_tree(o.leaves, o.nested_domains), cause_tree(o.C, o.nested_causes), {}};
    nlcm::Rng rng = nlcm::make_rng(seed, "fixture");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::vector<double>> theta(o.C * o.K, std::vector<double>(o.J));
    for (auto& row : theta)
        for (auto& t : row) t = unif(rng) < 0.5 ? 0.1 + 0.2 * unif(rng) : 0.7 + 0.2 * unif(rng);
    std::vector<double> lambda(o.C * o.leaves * o.K);
    for (std::size_t cg = 0; cg < o.C * o.leaves; ++cg) {
        double s = 0.0;
        for (std::size_t k = 0; k < o.K; ++k) s += lambda[cg * o.K + k] = 0.2 + unif(rng);
        for (std::size_t k = 0; k < o.K; ++k) lambda[cg * o.K + k] /= s;
    }
    std::vector<std::string> ids;
    std::vector<std::size_t> dom;
    std::vector<std::optional<std::size_t>> cause;
    std::vector<int> values;
    for (std::size_t i = 0; i < o.N; ++i) {
        ids.push_back("s" + std::to_string(i));
        const std::size_t g = i % o.leaves;
        const std::size_t c = std::size_t(unif(rng) * double(o.C)) % o.C;
        double u = unif(rng);
        std::size_t k = 0;
        while (k + 1 < o.K && u > lambda[(c * o.leaves + g) * o.K + k]) u -= lambda[(c * o.leaves + g) * o.K + k++];
        dom.push_back(g);
        const bool hidden = g == 0 || unif(rng) < o.source_unlabelled;
        cause.push_back(hidden ? std::nullopt : std::optional<std::size_t>(c));
        for (std::size_t j = 0; j < o.J; ++j) {
            const bool miss = unif(rng) < o.missing_rate;
            const int x = unif(rng) < theta[c * o.K + k][j] ? 1 : 0;
            values.push_back(miss ? -1 : x);
        }
    }
    inst.data = nlcm::make_dataset(ids, dom, cause, values, o.J, inst.domain_tree, inst.cause_tree);
    return inst;
}

}  // namespace fixture
