#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nlcm/tree.hpp"

namespace nlcm {

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Multi-domain binary response data.
///
/// Domains and causes are stored as leaf ranks of the domain and cause
/// trees: domain 0 is the target, causes are 0-based internally and 1-based
/// in files and reports. Missing entries of X keep whatever placeholder was
/// stored; they are only reachable through `observed`, never through the
/// index sets used by the model.
struct Dataset {
    std::size_t num_subjects = 0;
    std::size_t num_items = 0;
    std::size_t num_domains = 0;  // G + 1
    std::size_t num_causes = 0;   // C

    std::vector<std::string> subject_ids;
    std::vector<std::string> item_names;
    std::vector<std::string> domain_labels;  // leaf ids of the domain tree, by rank
    std::vector<std::string> cause_labels;   // leaf ids of the cause tree, by rank

    std::vector<std::uint8_t> x;         // row-major N x J, 0/1 where observed
    std::vector<std::uint8_t> observed;  // row-major N x J mask
    std::vector<std::size_t> domain;     // length N
    std::vector<std::optional<std::size_t>> cause;  // length N

    /// J_i: observed items per subject, ascending.
    std::vector<std::vector<std::size_t>> items_of;
    /// I_j: subjects with item j observed, ascending.
    std::vector<std::vector<std::size_t>> subjects_of;
    /// Subjects per domain rank, ascending.
    std::vector<std::vector<std::size_t>> domain_members;

    bool is_observed(std::size_t i, std::size_t j) const {
        return observed[i * num_items + j] != 0;
    }
    /// Response value; only meaningful when is_observed(i, j).
    std::uint8_t value(std::size_t i, std::size_t j) const { return x[i * num_items + j]; }
    /// X*_ij = 2 X_ij - 1 for an observed entry.
    double signed_value(std::size_t i, std::size_t j) const { return value(i, j) ? 1.0 : -1.0; }

    std::size_t num_observed_entries() const;
    bool cause_missing(std::size_t i) const { return !cause[i].has_value(); }

    /// Rebuilds items_of / subjects_of from the mask and domain_members from
    /// the domain column.
    void rebuild_index();
};

/// Assembles a dataset from in-memory columns. `values` is row-major N x J
/// with -1 marking a missing entry.
Dataset make_dataset(std::vector<std::string> subject_ids, std::vector<std::size_t> domain,
                     std::vector<std::optional<std::size_t>> cause,
                     const std::vector<int>& values, std::size_t num_items,
                     const RootedWeightedTree& domain_tree, const RootedWeightedTree& cause_tree,
                     std::vector<std::string> item_names = {});

/// CSV with header `id,domain,cause,item_1,...,item_J`. Domain and cause
/// fields hold leaf ids of the respective trees; an empty cause means
/// unobserved; `NA` marks a missing response.
Dataset load_dataset(std::string_view document, const RootedWeightedTree& domain_tree,
                     const RootedWeightedTree& cause_tree);
Dataset read_dataset_file(const std::string& path, const RootedWeightedTree& domain_tree,
                          const RootedWeightedTree& cause_tree);
std::string serialize_dataset(const Dataset& data);

enum class ScenarioTag { I1, I2, II, III };

const char* to_string(ScenarioTag tag);

struct MissingnessScenario {
    ScenarioTag tag = ScenarioTag::III;
    std::set<std::size_t> domains_with_missing;
};

MissingnessScenario detect_scenario(const Dataset& data);

}  // namespace nlcm
