#include "nlcm/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "json.hpp"

namespace nlcm {

namespace {

using Idx = Eigen::Index;

template <class E, std::size_t N>
E parse_enum(const std::string& s, const std::pair<const char*, E> (&table)[N], const char* what) {
    for (const auto& [name, value] : table)
        if (s == name) return value;
    throw DesignError(std::string("unknown ") + what + ": " + s);
}

constexpr std::pair<const char*, Allocation> kAllocations[] = {{"balanced", Allocation::Balanced},
                                                               {"unbalanced", Allocation::Unbalanced}};
constexpr std::pair<const char*, Signal> kSignals[] = {{"strong", Signal::Strong}, {"weak", Signal::Weak}};
constexpr std::pair<const char*, CsmfPattern> kCsmfs[] = {{"balanced", CsmfPattern::Balanced},
                                                          {"unbalanced", CsmfPattern::Unbalanced}};
constexpr std::pair<const char*, ProfileMode> kProfiles[] = {{"shared", ProfileMode::Shared},
                                                             {"cause-blocks", ProfileMode::CauseBlocks}};
constexpr std::pair<const char*, MaskMode> kMasks[] = {{"uniform", MaskMode::Uniform},
                                                       {"beta-mixture", MaskMode::BetaMixture}};

template <class E, std::size_t N>
const char* enum_name(E v, const std::pair<const char*, E> (&table)[N]) {
    for (const auto& [name, value] : table)
        if (v == value) return name;
    return "?";
}

Vector dirichlet_draw(Rng& rng, std::size_t k, double concentration) {
    std::gamma_distribution<double> gamma(concentration, 1.0);
    Vector v(static_cast<Idx>(k));
    for (std::size_t i = 0; i < k; ++i) v[Idx(i)] = gamma(rng);
    return v / v.sum();
}

std::size_t categorical_draw(Rng& rng, const Eigen::Ref<const Vector>& probs) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    double acc = 0.0;
    for (Idx k = 0; k < probs.size(); ++k) {
        acc += probs[k];
        if (u < acc) return std::size_t(k);
    }
    return std::size_t(probs.size() - 1);
}

double root_distance(const RootedWeightedTree& tree, std::size_t u) {
    double d = 0.0;
    for (auto w : tree.ancestors(u))
        if (w != tree.root()) d += tree.weight(w);
    return d;
}

}  // namespace

const char* to_string(Allocation v) { return enum_name(v, kAllocations); }
const char* to_string(Signal v) { return enum_name(v, kSignals); }
const char* to_string(CsmfPattern v) { return enum_name(v, kCsmfs); }
const char* to_string(ProfileMode v) { return enum_name(v, kProfiles); }
Allocation allocation_from_string(const std::string& s) { return parse_enum(s, kAllocations, "allocation"); }
Signal signal_from_string(const std::string& s) { return parse_enum(s, kSignals, "signal"); }
CsmfPattern csmf_pattern_from_string(const std::string& s) { return parse_enum(s, kCsmfs, "CSMF pattern"); }
ProfileMode profile_mode_from_string(const std::string& s) { return parse_enum(s, kProfiles, "profile mode"); }
MaskMode mask_mode_from_string(const std::string& s) { return parse_enum(s, kMasks, "mask mode"); }

RootedWeightedTree sim1_domain_tree() {
    std::vector<NodeSpec> nodes = {
        {"root", std::nullopt, 1.0, 1}, {"n2", "root", 1.0, 2}, {"0", "n2", 1.0, 2},
        {"1", "n2", 1.0, 2},            {"n3", "root", 1.0, 2}, {"2", "n3", 1.0, 2},
        {"3", "n3", 1.0, 2},            {"4", "root", 1.0, 2},  {"5", "root", 1.0, 2},
    };
    return RootedWeightedTree::build(std::move(nodes), {"0", "1", "2", "3", "4", "5"});
}

RootedWeightedTree flat_cause_tree(std::size_t num_causes) {
    std::vector<NodeSpec> nodes = {{"root", std::nullopt, 1.0, 1}};
    for (std::size_t c = 1; c <= num_causes; ++c) nodes.push_back({"c" + std::to_string(c), "root", 1.0, 2});
    return RootedWeightedTree::build(std::move(nodes));
}

std::map<std::string, int> sim1_true_grouping() {
    return {{"root", 1}, {"n2", 1}, {"n3", 1}, {"0", 0}, {"1", 0},
            {"2", 0},    {"3", 0},  {"4", 1},  {"5", 1}};
}

std::map<std::string, int> sim1_ad_hoc_grouping() {
    auto p = sim1_true_grouping();
    p["0"] = 1;
    p["1"] = 1;
    return p;
}

void SimulationDesign::validate() const {
    if (num_subjects == 0 || num_items == 0) throw DesignError("N and J must be positive");
    if (num_causes < 2) throw DesignError("at least two causes are required");
    if (num_classes < 1) throw DesignError("K must be at least 1");
    if (domain_tree.num_leaves() < 2) throw DesignError("domain tree needs a target and a source leaf");
    if (allocation == Allocation::Unbalanced && domain_tree.num_leaves() % 2 != 0)
        throw DesignError("unbalanced allocation pairs domain leaves; the tree has an odd number (" +
                          std::to_string(domain_tree.num_leaves()) + ")");
    if (!(root_concentration > 0)) throw DesignError("root concentration must be positive");
    if (!(missing_rate >= 0 && missing_rate < 1)) throw DesignError("missing rate must lie in [0, 1)");
    for (const auto& [id, v] : offsets) {
        if (!domain_tree.find(id)) throw DesignError("offset for unknown node: " + id);
        if (!std::isfinite(v)) throw DesignError("non-finite offset at node " + id);
    }
}

Matrix design_csmfs(std::size_t num_domains, std::size_t num_causes, CsmfPattern pattern) {
    Matrix pi(static_cast<Idx>(num_domains), static_cast<Idx>(num_causes));
    if (pattern == CsmfPattern::Balanced) {
        pi.setConstant(1.0 / double(num_causes));
        return pi;
    }
    // raw scores 5 for the first cause, 1 for multiples of C, 3 otherwise
    Vector raw(static_cast<Idx>(num_causes));
    for (std::size_t c = 1; c <= num_causes; ++c)
        raw[Idx(c - 1)] = c == 1 ? 5.0 : (c % num_causes == 0 ? 1.0 : 3.0);
    raw /= raw.sum();
    // score vector m (1-based) is raw shifted by m-1; the target takes the third
    auto shifted = [&](std::size_t m) {
        Vector v(raw.size());
        for (Idx c = 0; c < raw.size(); ++c) v[c] = raw[Idx((std::size_t(c) + m - 1) % num_causes)];
        return v;
    };
    std::vector<std::size_t> order = {3};
    for (std::size_t m = 1; order.size() < num_domains; ++m)
        if (m != 3) order.push_back(m);
    for (std::size_t g = 0; g < num_domains; ++g) pi.row(Idx(g)) = shifted(order[g]).transpose();
    return pi;
}

std::vector<std::size_t> allocate_subjects(const SimulationDesign& design, Rng& rng) {
    const std::size_t G1 = design.domain_tree.num_leaves();
    const std::size_t N = design.num_subjects;
    auto even_split = [](std::size_t total, std::size_t parts) {
        std::vector<std::size_t> out(parts, total / parts);
        for (std::size_t i = 0; i < total % parts; ++i) ++out[i];
        return out;
    };
    if (design.allocation == Allocation::Balanced) return even_split(N, G1);
    const auto pairs = even_split(N, G1 / 2);
    std::bernoulli_distribution coin(0.5);
    std::vector<std::size_t> out(G1);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto big = static_cast<std::size_t>(std::llround(0.8 * double(pairs[p])));
        const bool first_big = coin(rng);
        out[2 * p] = first_big ? big : pairs[p] - big;
        out[2 * p + 1] = pairs[p] - out[2 * p];
    }
    return out;
}

SimulatedData simulate_dataset(const SimulationDesign& design) {
    design.validate();
    const auto& tree = design.domain_tree;
    const std::size_t G1 = tree.num_leaves(), C = design.num_causes, K = design.num_classes,
                      J = design.num_items;
    SimulatedData out{Dataset{}, SimulationTruth{}, tree, flat_cause_tree(C)};
    SimulationTruth& truth = out.truth;

    Rng alloc_rng = make_rng(design.seed, "allocation");
    const auto sizes = allocate_subjects(design, alloc_rng);
    truth.pi = design_csmfs(G1, C, design.csmf);

    // mixing weights: root draw plus fixed offsets down the tree
    Rng mix_rng = make_rng(design.seed, "mixing");
    truth.lambda.assign(C, Matrix(Idx(G1), Idx(K)));
    for (std::size_t c = 0; c < C; ++c) {
        Vector root_eta = Vector::Zero(Idx(K - 1));
        if (K > 1) root_eta = stick_break_inverse(dirichlet_draw(mix_rng, K, design.root_concentration));
        for (std::size_t g = 0; g < G1; ++g) {
            Vector eta = root_eta;
            for (auto u : tree.ancestors(tree.leaf(g))) {
                auto it = design.offsets.find(tree.id(u));
                if (it != design.offsets.end() && u != tree.root()) eta.array() += it->second;
            }
            truth.lambda[c].row(Idx(g)) = stick_break(eta).transpose();
        }
    }

    const double hi = design.signal == Signal::Strong ? 0.95 : 0.8;
    const double lo = 1.0 - hi;
    truth.theta.assign(C, Matrix(Idx(J), Idx(K)));
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t j = 0; j < J; ++j) {
            bool swap = false;
            if (design.profiles == ProfileMode::CauseBlocks) swap = (j * C / J) == c;
            for (std::size_t k = 0; k < K; ++k) {
                // classes alternate between the high and low profile
                const bool high = (k % 2 == 0) != swap;
                truth.theta[c](Idx(j), Idx(k)) = high ? hi : lo;
            }
        }

    Rng cause_rng = make_rng(design.seed, "cause");
    Rng z_rng = make_rng(design.seed, "class");
    Rng x_rng = make_rng(design.seed, "response");
    Rng miss_rng = make_rng(design.seed, "missing");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::bernoulli_distribution miss(design.missing_rate);

    std::vector<std::string> ids;
    std::vector<std::size_t> domain;
    std::vector<std::optional<std::size_t>> observed_cause;
    std::vector<int> values;
    std::size_t subject = 0;
    for (std::size_t g = 0; g < G1; ++g) {
        for (std::size_t n = 0; n < sizes[g]; ++n, ++subject) {
            const std::size_t c = categorical_draw(cause_rng, truth.pi.row(Idx(g)).transpose());
            const std::size_t z = categorical_draw(z_rng, truth.lambda[c].row(Idx(g)).transpose());
            ids.push_back("s" + std::to_string(subject + 1));
            domain.push_back(g);
            truth.cause.push_back(c);
            truth.z.push_back(z);
            observed_cause.push_back(g == 0 ? std::nullopt : std::optional<std::size_t>(c));
            for (std::size_t j = 0; j < J; ++j) {
                const int x = unif(x_rng) < truth.theta[c](Idx(j), Idx(z)) ? 1 : 0;
                const bool missing = design.missing_rate > 0 && miss(miss_rng);
                values.push_back(missing ? -1 : x);
            }
        }
    }
    out.data = make_dataset(std::move(ids), std::move(domain), std::move(observed_cause), values, J,
                            out.domain_tree, out.cause_tree);
    return out;
}

std::string SimulationTruth::to_json(const Dataset& data) const {
    nlohmann::ordered_json j;
    j["cause_labels"] = data.cause_labels;
    j["domain_labels"] = data.domain_labels;
    auto matrix = [](const Matrix& m) {
        std::vector<std::vector<double>> rows(std::size_t(m.rows()));
        for (Idx r = 0; r < m.rows(); ++r)
            for (Idx c = 0; c < m.cols(); ++c) rows[std::size_t(r)].push_back(m(r, c));
        return rows;
    };
    j["pi"] = matrix(pi);
    auto& lam = j["lambda"];
    lam = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < lambda.size(); ++c) lam[data.cause_labels[c]] = matrix(lambda[c]);
    auto& th = j["theta"];
    th = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < theta.size(); ++c) th[data.cause_labels[c]] = matrix(theta[c]);
    std::vector<std::string> ycol;
    for (auto c : cause) ycol.push_back(data.cause_labels[c]);
    j["subject_ids"] = data.subject_ids;
    j["cause"] = ycol;
    std::vector<std::size_t> zcol;
    for (auto k : z) zcol.push_back(k + 1);
    j["class"] = zcol;
    return j.dump(2) + "\n";
}

RootedWeightedTree add_equidistant_target(const RootedWeightedTree& tree, const std::string& id) {
    if (tree.find(id)) throw DesignError("tree already has a node named " + id);
    double deepest = 0.0;
    for (auto leaf : tree.leaves()) deepest = std::max(deepest, root_distance(tree, leaf));
    auto specs = tree.node_specs();
    for (std::size_t u = 0; u < specs.size(); ++u)
        if (tree.is_leaf(u)) specs[u].weight += deepest - root_distance(tree, u);
    specs.push_back({id, tree.id(tree.root()), deepest, 2});
    std::vector<std::string> order = {id};
    for (const auto& leaf : tree.leaf_order()) order.push_back(leaf);
    return RootedWeightedTree::build(std::move(specs), std::move(order));
}

MaskedData mask_semi_synthetic(const Dataset& full, const RootedWeightedTree& domain_tree,
                               const RootedWeightedTree& cause_tree, double fraction, MaskMode mode,
                               std::uint64_t seed) {
    for (std::size_t i = 0; i < full.num_subjects; ++i)
        if (!full.cause[i]) throw DesignError("masking needs every cause observed");
    if (mode == MaskMode::Uniform && !(fraction > 0.0 && fraction < 1.0))
        throw DesignError("split fraction must lie in (0, 1)");

    Rng rng = make_rng(seed, "mask");
    std::vector<char> chosen(full.num_subjects, 0);
    MaskedData out;
    if (mode == MaskMode::Uniform) {
        for (const auto& members : full.domain_members) {
            std::vector<std::size_t> pool = members;
            std::shuffle(pool.begin(), pool.end(), rng);
            const auto take = static_cast<std::size_t>(std::llround(fraction * double(pool.size())));
            for (std::size_t n = 0; n < take; ++n) chosen[pool[n]] = 1;
        }
    } else {
        std::gamma_distribution<double> g1(1.0, 1.0), g5(5.0, 1.0), g20(20.0, 1.0);
        std::bernoulli_distribution pick(0.5);
        std::vector<std::vector<std::size_t>> by_cause(full.num_causes);
        for (std::size_t i = 0; i < full.num_subjects; ++i) by_cause[*full.cause[i]].push_back(i);
        for (auto& pool : by_cause) {
            const double a = g1(rng);
            const double b = pick(rng) ? g5(rng) : g20(rng);
            const double phi = a / (a + b);
            out.cause_fractions.push_back(phi);
            std::shuffle(pool.begin(), pool.end(), rng);
            const auto take = static_cast<std::size_t>(std::llround(phi * double(pool.size())));
            for (std::size_t n = 0; n < take; ++n) chosen[pool[n]] = 1;
        }
    }

    out.domain_tree = add_equidistant_target(domain_tree);
    std::vector<std::string> ids = full.subject_ids;
    std::vector<std::size_t> domain(full.num_subjects);
    std::vector<std::optional<std::size_t>> cause(full.num_subjects);
    std::vector<int> values(full.num_subjects * full.num_items);
    for (std::size_t i = 0; i < full.num_subjects; ++i) {
        if (chosen[i]) {
            domain[i] = 0;
            out.target_subjects.push_back(i);
            out.target_truth.push_back(*full.cause[i]);
        } else {
            domain[i] = full.domain[i] + 1;
            cause[i] = full.cause[i];
        }
        for (std::size_t j = 0; j < full.num_items; ++j)
            values[i * full.num_items + j] = full.is_observed(i, j) ? full.value(i, j) : -1;
    }
    if (out.target_subjects.empty()) throw DesignError("masking produced an empty target domain");
    out.data = make_dataset(std::move(ids), std::move(domain), std::move(cause), values, full.num_items,
                            out.domain_tree, cause_tree, full.item_names);
    return out;
}

}  // namespace nlcm
