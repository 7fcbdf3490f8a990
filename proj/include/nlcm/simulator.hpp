#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlcm/dataset.hpp"
#include "nlcm/model.hpp"
#include "nlcm/rng.hpp"
#include "nlcm/tree.hpp"

namespace nlcm {

class DesignError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Allocation { Balanced, Unbalanced };
enum class Signal { Strong, Weak };
enum class CsmfPattern { Balanced, Unbalanced };

/// How the class-specific response profiles vary over causes.
enum class ProfileMode {
    /// theta_j1 = hi, theta_j2 = lo for every item and cause.
    Shared,
    /// Items are split into C blocks; on the block of cause c the two classes
    /// swap their probabilities, so causes are distinguishable from X.
    CauseBlocks,
};

const char* to_string(Allocation v);
const char* to_string(Signal v);
const char* to_string(CsmfPattern v);
const char* to_string(ProfileMode v);
Allocation allocation_from_string(const std::string& s);
Signal signal_from_string(const std::string& s);
CsmfPattern csmf_pattern_from_string(const std::string& s);
ProfileMode profile_mode_from_string(const std::string& s);

/// The six-leaf domain tree with two internal nodes. Leaf "0" is the target.
RootedWeightedTree sim1_domain_tree();
/// Root with C leaves c1..cC, unit weights.
RootedWeightedTree flat_cause_tree(std::size_t num_causes);

/// Slab patterns on sim1_domain_tree for the fixed-grouping comparators.
std::map<std::string, int> sim1_true_grouping();
std::map<std::string, int> sim1_ad_hoc_grouping();

struct SimulationDesign {
    std::size_t num_subjects = 1000;
    std::size_t num_items = 20;
    std::size_t num_causes = 3;
    std::size_t num_classes = 2;
    Allocation allocation = Allocation::Balanced;
    Signal signal = Signal::Strong;
    CsmfPattern csmf = CsmfPattern::Unbalanced;
    ProfileMode profiles = ProfileMode::Shared;
    /// Domain tree; the leaf of rank 0 is the target.
    RootedWeightedTree domain_tree = sim1_domain_tree();
    /// Fixed increments added to every stick coordinate below a node.
    std::map<std::string, double> offsets = {{"n2", -2.0}, {"n3", 2.0}};
    /// Dirichlet concentration for the root mixing weights.
    double root_concentration = 2.0;
    /// Independent per-entry probability of a missing response.
    double missing_rate = 0.0;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SimulationTruth {
    std::vector<std::size_t> cause;  // full Y, target included
    std::vector<std::size_t> z;
    std::vector<Matrix> lambda;      // [c] (G+1) x K
    std::vector<Matrix> theta;       // [c] J x K
    Matrix pi;                       // (G+1) x C

    std::string to_json(const Dataset& data) const;
};

struct SimulatedData {
    Dataset data;  // target-domain causes masked
    SimulationTruth truth;
    RootedWeightedTree domain_tree;
    RootedWeightedTree cause_tree;
};

/// Per-domain CSMFs of the design, one row per domain rank.
Matrix design_csmfs(std::size_t num_domains, std::size_t num_causes, CsmfPattern pattern);

/// Subjects per domain rank. Unbalanced allocation pairs consecutive leaves
/// and gives one of each pair four times the other's share.
std::vector<std::size_t> allocate_subjects(const SimulationDesign& design, Rng& rng);

SimulatedData simulate_dataset(const SimulationDesign& design);

enum class MaskMode { Uniform, BetaMixture };
MaskMode mask_mode_from_string(const std::string& s);

struct MaskedData {
    Dataset data;
    RootedWeightedTree domain_tree;
    std::vector<std::size_t> target_subjects;  // indices into `data`
    std::vector<std::size_t> target_truth;     // their causes
    std::vector<double> cause_fractions;       // beta-mixture draws; empty for uniform
};

/// Rebuilds the domain tree with a new target leaf under the root placed at
/// equal distance from every original leaf. The target takes rank 0.
RootedWeightedTree add_equidistant_target(const RootedWeightedTree& tree, const std::string& id = "target");

/// Moves a subset of fully labelled subjects into a new target domain and
/// hides their causes.
MaskedData mask_semi_synthetic(const Dataset& full, const RootedWeightedTree& domain_tree,
                               const RootedWeightedTree& cause_tree, double fraction, MaskMode mode,
                               std::uint64_t seed);

}  // namespace nlcm
