#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace nlcm {

/// Unknown node id or out-of-range node index.
class LookupError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

enum class TreeErrorKind {
    Syntax,
    Cycle,
    DuplicateNode,
    UnknownParent,
    Disconnected,
    NoRoot,
    MultipleRoots,
    NonPositiveWeight,
    BadLevel,
    LeafOrderMismatch,
};

const char* to_string(TreeErrorKind kind);

class TreeParseError : public std::runtime_error {
public:
    TreeParseError(TreeErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
    TreeErrorKind kind() const noexcept { return kind_; }

private:
    TreeErrorKind kind_;
};

/// One node as written in a tree document, before validation.
struct NodeSpec {
    std::string id;
    std::optional<std::string> parent;
    double weight = 1.0;
    std::optional<int> level;
};

/// Rooted weighted tree with dense node indices.
///
/// Node 0 is the root. Indices follow a depth-first preorder in which the
/// children of every node appear in document order, so every parent index is
/// smaller than the indices of its children. Leaves are additionally ranked
/// by `leaf_order`, which maps them onto external labels (domains 0..G,
/// causes 1..C).
///
/// The root carries weight 1 and the edge weight of a non-root node `u` is
/// the length of the edge `parent(u) -> u`.
class RootedWeightedTree {
public:
    /// Validates and builds a tree. `leaf_order` may be empty, in which case
    /// leaves are ranked in index order.
    static RootedWeightedTree build(std::vector<NodeSpec> nodes,
                                    std::vector<std::string> leaf_order = {});

    std::size_t size() const noexcept { return ids_.size(); }
    std::size_t num_leaves() const noexcept { return leaves_.size(); }
    int num_levels() const noexcept { return num_levels_; }

    std::size_t root() const noexcept { return 0; }
    std::size_t index(std::string_view id) const;
    std::optional<std::size_t> find(std::string_view id) const;
    const std::string& id(std::size_t u) const { return ids_.at(u); }

    /// Parent index; nullopt for the root.
    std::optional<std::size_t> parent(std::size_t u) const;
    const std::vector<std::size_t>& children(std::size_t u) const { return children_.at(u); }
    double weight(std::size_t u) const { return weights_.at(u); }
    int level(std::size_t u) const { return levels_.at(u); }
    const std::vector<double>& weights() const noexcept { return weights_; }
    const std::vector<int>& levels() const noexcept { return levels_; }
    bool is_leaf(std::size_t u) const { return children_.at(u).empty(); }

    /// Leaf node indices ranked by leaf_order.
    const std::vector<std::size_t>& leaves() const noexcept { return leaves_; }
    std::size_t leaf(std::size_t rank) const { return leaves_.at(rank); }
    /// Rank of a leaf in leaf_order; nullopt for internal nodes.
    std::optional<std::size_t> leaf_rank(std::size_t u) const;

    /// a(u): root first, ending at u.
    std::vector<std::size_t> ancestors(std::size_t u) const;
    /// d(u): u followed by its proper descendants in preorder.
    std::vector<std::size_t> descendants(std::size_t u) const;
    /// Leaf ranks below u (u included when it is a leaf), ascending.
    std::vector<std::size_t> leaf_ranks_below(std::size_t u) const;
    bool is_ancestor(std::size_t a, std::size_t u) const;
    std::size_t lowest_common_ancestor(std::size_t u, std::size_t v) const;

    /// Sum of edge weights on the unique path between u and v. When
    /// `weight_override` is non-empty it replaces the stored weights and must
    /// have one entry per node.
    double path_distance(std::size_t u, std::size_t v,
                         std::span<const double> weight_override = {}) const;

    /// Nodes per level, indexed by level - 1.
    std::vector<std::vector<std::size_t>> nodes_by_level() const;

    /// Node records in index order (parents before children).
    std::vector<NodeSpec> node_specs() const;
    std::vector<std::string> leaf_order() const;

    friend bool operator==(const RootedWeightedTree&, const RootedWeightedTree&) = default;

private:
    std::vector<std::string> ids_;
    std::vector<std::optional<std::size_t>> parents_;
    std::vector<std::vector<std::size_t>> children_;
    std::vector<double> weights_;
    std::vector<int> levels_;
    std::vector<std::size_t> leaves_;
    std::vector<std::optional<std::size_t>> leaf_rank_;
    std::vector<std::size_t> depth_;
    std::vector<std::size_t> subtree_end_;
    std::unordered_map<std::string, std::size_t> index_;
    int num_levels_ = 1;
};

/// Parses the edge-list format:
///
///     id,parent,weight,level
///     root,,1,1
///     a,root,1,2
///     # leaves: a,...
///
/// An empty parent marks the root. Empty weight defaults to 1; empty level
/// defaults to 1 for the root and 2 elsewhere. `#` starts a comment line; a
/// `# leaves:` comment declares leaf_order unless `leaf_order` is given.
RootedWeightedTree parse_tree(std::string_view document,
                              std::vector<std::string> leaf_order = {});
RootedWeightedTree read_tree_file(const std::string& path,
                                  std::vector<std::string> leaf_order = {});
std::string serialize_tree(const RootedWeightedTree& tree);

}  // namespace nlcm
