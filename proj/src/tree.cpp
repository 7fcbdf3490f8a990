#include "nlcm/tree.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "text.hpp"

namespace nlcm {

const char* to_string(TreeErrorKind kind) {
    switch (kind) {
        case TreeErrorKind::Syntax: return "syntax error";
        case TreeErrorKind::Cycle: return "cycle detected";
        case TreeErrorKind::DuplicateNode: return "node listed twice (two parents)";
        case TreeErrorKind::UnknownParent: return "unknown parent";
        case TreeErrorKind::Disconnected: return "disconnected node";
        case TreeErrorKind::NoRoot: return "no root";
        case TreeErrorKind::MultipleRoots: return "multiple roots";
        case TreeErrorKind::NonPositiveWeight: return "nonpositive weight";
        case TreeErrorKind::BadLevel: return "level out of range";
        case TreeErrorKind::LeafOrderMismatch: return "leaf order mismatch";
    }
    return "tree error";
}

RootedWeightedTree RootedWeightedTree::build(std::vector<NodeSpec> nodes,
                                             std::vector<std::string> leaf_order) {
    const std::size_t n = nodes.size();
    std::unordered_map<std::string, std::size_t> doc_index;
    for (std::size_t i = 0; i < n; ++i) {
        if (nodes[i].id.empty())
            throw TreeParseError(TreeErrorKind::Syntax, "empty node id");
        if (!doc_index.emplace(nodes[i].id, i).second)
            throw TreeParseError(TreeErrorKind::DuplicateNode, nodes[i].id);
    }

    std::optional<std::size_t> root;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& spec = nodes[i];
        if (spec.parent && *spec.parent == spec.id)
            throw TreeParseError(TreeErrorKind::Cycle, spec.id + " is its own parent");
        if (!spec.parent) {
            if (root)
                throw TreeParseError(TreeErrorKind::MultipleRoots,
                                     nodes[*root].id + " and " + spec.id);
            root = i;
        } else if (!doc_index.contains(*spec.parent)) {
            throw TreeParseError(TreeErrorKind::UnknownParent,
                                 spec.id + " -> " + *spec.parent);
        }
        if (!(spec.weight > 0.0) || !std::isfinite(spec.weight))
            throw TreeParseError(TreeErrorKind::NonPositiveWeight, spec.id);
    }
    if (!root) {
        // every node has a parent, so the parent graph must contain a cycle
        throw TreeParseError(n == 0 ? TreeErrorKind::NoRoot : TreeErrorKind::Cycle,
                             n == 0 ? "empty tree" : "no parentless node");
    }
    if (nodes[*root].weight != 1.0)
        throw TreeParseError(TreeErrorKind::NonPositiveWeight, "root weight must be 1");

    std::vector<std::vector<std::size_t>> doc_children(n);
    for (std::size_t i = 0; i < n; ++i)
        if (nodes[i].parent) doc_children[doc_index.at(*nodes[i].parent)].push_back(i);

    // Preorder from the root; anything not reached sits on a cycle or hangs
    // off one.
    std::vector<std::size_t> order;
    order.reserve(n);
    std::vector<std::size_t> stack{*root};
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        order.push_back(u);
        const auto& ch = doc_children[u];
        for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
    }
    if (order.size() != n) {
        std::vector<bool> seen(n, false);
        for (auto u : order) seen[u] = true;
        // Distinguish a cycle from a component that is merely detached.
        for (std::size_t i = 0; i < n; ++i) {
            if (seen[i]) continue;
            std::unordered_set<std::size_t> path;
            std::size_t cur = i;
            while (!seen[cur] && nodes[cur].parent) {
                if (!path.insert(cur).second)
                    throw TreeParseError(TreeErrorKind::Cycle, "through " + nodes[cur].id);
                cur = doc_index.at(*nodes[cur].parent);
            }
        }
        throw TreeParseError(TreeErrorKind::Disconnected, "node not reachable from root");
    }

    RootedWeightedTree t;
    std::vector<std::size_t> new_index(n);
    for (std::size_t k = 0; k < n; ++k) new_index[order[k]] = k;

    t.ids_.resize(n);
    t.parents_.resize(n);
    t.children_.resize(n);
    t.weights_.resize(n);
    t.levels_.resize(n);
    t.depth_.assign(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& spec = nodes[order[k]];
        t.ids_[k] = spec.id;
        t.weights_[k] = spec.weight;
        t.levels_[k] = spec.level.value_or(k == 0 ? 1 : 2);
        if (t.levels_[k] < 1)
            throw TreeParseError(TreeErrorKind::BadLevel, spec.id);
        if (spec.parent) {
            const std::size_t p = new_index[doc_index.at(*spec.parent)];
            t.parents_[k] = p;
            t.children_[p].push_back(k);
            t.depth_[k] = t.depth_[p] + 1;
        }
        t.index_.emplace(spec.id, k);
    }
    t.num_levels_ = *std::max_element(t.levels_.begin(), t.levels_.end());
    // Levels must cover 1..L; an unused level would leave a hyperparameter
    // with no nodes.
    std::vector<bool> used(static_cast<std::size_t>(t.num_levels_), false);
    for (int l : t.levels_) used[static_cast<std::size_t>(l - 1)] = true;
    for (std::size_t l = 0; l < used.size(); ++l)
        if (!used[l])
            throw TreeParseError(TreeErrorKind::BadLevel,
                                 "level " + std::to_string(l + 1) + " has no nodes");

    // preorder: the subtree of u is the contiguous range [u, subtree_end)
    t.subtree_end_.assign(n, 0);
    for (std::size_t k = n; k-- > 0;) {
        std::size_t end = k + 1;
        for (auto c : t.children_[k]) end = std::max(end, t.subtree_end_[c]);
        t.subtree_end_[k] = end;
    }

    std::vector<std::size_t> natural_leaves;
    for (std::size_t k = 0; k < n; ++k)
        if (t.children_[k].empty()) natural_leaves.push_back(k);
    if (n == 1)
        throw TreeParseError(TreeErrorKind::LeafOrderMismatch, "tree has no leaves below the root");

    t.leaf_rank_.assign(n, std::nullopt);
    if (leaf_order.empty()) {
        t.leaves_ = natural_leaves;
    } else {
        if (leaf_order.size() != natural_leaves.size())
            throw TreeParseError(TreeErrorKind::LeafOrderMismatch,
                                 "expected " + std::to_string(natural_leaves.size()) +
                                     " leaves, got " + std::to_string(leaf_order.size()));
        for (const auto& id : leaf_order) {
            auto it = t.index_.find(id);
            if (it == t.index_.end() || !t.children_[it->second].empty())
                throw TreeParseError(TreeErrorKind::LeafOrderMismatch, id + " is not a leaf");
            if (t.leaf_rank_[it->second])
                throw TreeParseError(TreeErrorKind::LeafOrderMismatch, id + " listed twice");
            t.leaf_rank_[it->second] = t.leaves_.size();
            t.leaves_.push_back(it->second);
        }
    }
    for (std::size_t r = 0; r < t.leaves_.size(); ++r) t.leaf_rank_[t.leaves_[r]] = r;
    return t;
}

std::size_t RootedWeightedTree::index(std::string_view id) const {
    auto found = find(id);
    if (!found) throw LookupError("unknown node id: " + std::string(id));
    return *found;
}

std::optional<std::size_t> RootedWeightedTree::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> RootedWeightedTree::parent(std::size_t u) const {
    if (u >= size()) throw LookupError("node index out of range");
    return parents_[u];
}

std::optional<std::size_t> RootedWeightedTree::leaf_rank(std::size_t u) const {
    if (u >= size()) throw LookupError("node index out of range");
    return leaf_rank_[u];
}

std::vector<std::size_t> RootedWeightedTree::ancestors(std::size_t u) const {
    if (u >= size()) throw LookupError("node index out of range");
    std::vector<std::size_t> out(depth_[u] + 1);
    std::size_t cur = u;
    for (std::size_t k = out.size(); k-- > 0;) {
        out[k] = cur;
        if (parents_[cur]) cur = *parents_[cur];
    }
    return out;
}

std::vector<std::size_t> RootedWeightedTree::descendants(std::size_t u) const {
    if (u >= size()) throw LookupError("node index out of range");
    std::vector<std::size_t> out(subtree_end_[u] - u);
    std::iota(out.begin(), out.end(), u);
    return out;
}

std::vector<std::size_t> RootedWeightedTree::leaf_ranks_below(std::size_t u) const {
    std::vector<std::size_t> out;
    for (auto v : descendants(u))
        if (leaf_rank_[v]) out.push_back(*leaf_rank_[v]);
    std::sort(out.begin(), out.end());
    return out;
}

bool RootedWeightedTree::is_ancestor(std::size_t a, std::size_t u) const {
    if (a >= size() || u >= size()) throw LookupError("node index out of range");
    return a <= u && u < subtree_end_[a];
}

std::size_t RootedWeightedTree::lowest_common_ancestor(std::size_t u, std::size_t v) const {
    if (u >= size() || v >= size()) throw LookupError("node index out of range");
    while (depth_[u] > depth_[v]) u = *parents_[u];
    while (depth_[v] > depth_[u]) v = *parents_[v];
    while (u != v) {
        u = *parents_[u];
        v = *parents_[v];
    }
    return u;
}

double RootedWeightedTree::path_distance(std::size_t u, std::size_t v,
                                         std::span<const double> weight_override) const {
    if (u >= size() || v >= size()) throw LookupError("node index out of range");
    if (!weight_override.empty() && weight_override.size() != size())
        throw std::invalid_argument("weight override must have one entry per node");
    const auto w = [&](std::size_t x) {
        return weight_override.empty() ? weights_[x] : weight_override[x];
    };
    const std::size_t top = lowest_common_ancestor(u, v);
    double total = 0.0;
    for (std::size_t x = u; x != top; x = *parents_[x]) total += w(x);
    for (std::size_t x = v; x != top; x = *parents_[x]) total += w(x);
    return total;
}

std::vector<std::vector<std::size_t>> RootedWeightedTree::nodes_by_level() const {
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(num_levels_));
    for (std::size_t u = 0; u < size(); ++u)
        out[static_cast<std::size_t>(levels_[u] - 1)].push_back(u);
    return out;
}

std::vector<NodeSpec> RootedWeightedTree::node_specs() const {
    std::vector<NodeSpec> out(size());
    for (std::size_t u = 0; u < size(); ++u) {
        out[u].id = ids_[u];
        if (parents_[u]) out[u].parent = ids_[*parents_[u]];
        out[u].weight = weights_[u];
        out[u].level = levels_[u];
    }
    return out;
}

std::vector<std::string> RootedWeightedTree::leaf_order() const {
    std::vector<std::string> out;
    out.reserve(leaves_.size());
    for (auto v : leaves_) out.push_back(ids_[v]);
    return out;
}

RootedWeightedTree parse_tree(std::string_view document, std::vector<std::string> leaf_order) {
    std::vector<NodeSpec> nodes;
    std::vector<std::string> declared_leaves;
    bool header_seen = false;
    std::size_t line_no = 0;
    for (auto raw : detail::split_lines(document)) {
        ++line_no;
        const std::string_view line = detail::trim(raw);
        if (line.empty()) continue;
        if (line.front() == '#') {
            auto body = detail::trim(line.substr(1));
            constexpr std::string_view tag = "leaves:";
            if (body.starts_with(tag)) {
                for (auto f : detail::split(body.substr(tag.size()), ','))
                    if (auto id = detail::trim(f); !id.empty()) declared_leaves.emplace_back(id);
            }
            continue;
        }
        auto fields = detail::split(line, ',');
        for (auto& f : fields) f = detail::trim(f);
        if (!header_seen) {
            if (fields.size() < 2 || fields[0] != "id" || fields[1] != "parent")
                throw TreeParseError(TreeErrorKind::Syntax,
                                     "expected header id,parent,weight,level");
            header_seen = true;
            continue;
        }
        if (fields.size() < 2 || fields.size() > 4)
            throw TreeParseError(TreeErrorKind::Syntax,
                                 "line " + std::to_string(line_no) + ": expected 2-4 fields");
        NodeSpec spec;
        spec.id = std::string(fields[0]);
        if (!fields[1].empty()) spec.parent = std::string(fields[1]);
        if (fields.size() > 2 && !fields[2].empty()) {
            auto w = detail::parse_double(fields[2]);
            if (!w)
                throw TreeParseError(TreeErrorKind::Syntax,
                                     "line " + std::to_string(line_no) + ": bad weight");
            spec.weight = *w;
        }
        if (fields.size() > 3 && !fields[3].empty()) {
            auto l = detail::parse_int(fields[3]);
            if (!l)
                throw TreeParseError(TreeErrorKind::BadLevel,
                                     "line " + std::to_string(line_no) + ": bad level");
            spec.level = *l;
        }
        nodes.push_back(std::move(spec));
    }
    if (!header_seen) throw TreeParseError(TreeErrorKind::Syntax, "missing header");
    if (leaf_order.empty()) leaf_order = std::move(declared_leaves);
    return RootedWeightedTree::build(std::move(nodes), std::move(leaf_order));
}

RootedWeightedTree read_tree_file(const std::string& path, std::vector<std::string> leaf_order) {
    return parse_tree(detail::read_file(path), std::move(leaf_order));
}

std::string serialize_tree(const RootedWeightedTree& tree) {
    std::ostringstream out;
    out << "id,parent,weight,level\n";
    for (const auto& spec : tree.node_specs()) {
        out << spec.id << ',' << spec.parent.value_or("") << ','
            << detail::format_double(spec.weight) << ',' << *spec.level << '\n';
    }
    out << "# leaves: ";
    const auto leaves = tree.leaf_order();
    for (std::size_t r = 0; r < leaves.size(); ++r) out << (r ? "," : "") << leaves[r];
    out << '\n';
    return out.str();
}

}  // namespace nlcm
