// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. Pass criterion numbers as arguments to
// run a subset.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fixtures.hpp"
#include "nlcm/metrics.hpp"
#include "nlcm/model.hpp"
#include "nlcm/parallel.hpp"
#include "nlcm/simulator.hpp"
#include "nlcm/vi.hpp"
#include "optimality.hpp"

using namespace nlcm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int worker_count() { return int(std::max(1u, std::thread::hardware_concurrency())); }

std::string fmt(double v, int precision = 4) {
    std::ostringstream s;
    s.precision(precision);
    s << v;
    return s.str();
}

// --- 1 -----------------------------------------------------------------------

Outcome elbo_monotonicity() {
    constexpr int kInstances = 20;
    std::vector<double> worst_drop(kInstances, 0.0);
    std::vector<int> iterations(kInstances, 0), updates(kInstances, 0);
    std::vector<char> converged(kInstances, 0);
    parallel_for(kInstances, worker_count(), [&](std::size_t n) {
        const auto inst = fixture::random_instance(1000 + n);
        const VbProblem pb(inst.data, inst.domain_tree, inst.cause_tree, ModelConfig{});
        const std::uint64_t seed = 77 + n;
        double prev = compute_elbo(init_state(pb, seed), pb);
        FitControls ctl;
        ctl.on_update = [&](const char*, const VariationalState& s) {
            const double now = compute_elbo(s, pb);
            worst_drop[n] = std::min(worst_drop[n], now - prev);
            ++updates[n];
            prev = now;
        };
        const FitResult r = fit_single(pb, ctl, seed);
        iterations[n] = r.iterations;
        converged[n] = r.converged;
    });
    const double drop = *std::min_element(worst_drop.begin(), worst_drop.end());
    const int n_conv = int(std::count(converged.begin(), converged.end(), 1));
    const int total_updates = std::accumulate(updates.begin(), updates.end(), 0);
    Outcome o;
    o.pass = drop >= -1e-10 && n_conv == kInstances;
    o.detail = "worst per-update change " + fmt(drop, 3) + " over " + std::to_string(total_updates) +
               " updates; converged " + std::to_string(n_conv) + "/" + std::to_string(kInstances) +
               ", max sweeps " + std::to_string(*std::max_element(iterations.begin(), iterations.end()));
    return o;
}

// --- 2 -----------------------------------------------------------------------

Outcome update_optimality() {
    double elbo_gap = 0.0, param_gap = 0.0;
    std::size_t flat = 0;
    std::string worst;
    for (std::uint64_t n = 0; n < 10; ++n) {
        fixture::InstanceOptions o;
        o.N = 4 + n % 3, o.J = 2 + n % 2, o.C = 2, o.K = 2, o.leaves = 2;
        o.nested_domains = false;
        o.missing_rate = 0.1;
        o.source_unlabelled = 0.2;
        const auto inst = fixture::random_instance(500 + n, o);
        for (const auto& c : oracle::check_update_optimality(inst, 900 + n)) {
            if (std::max(c.elbo_gap, c.param_gap) > std::max(elbo_gap, param_gap)) worst = c.factor;
            elbo_gap = std::max(elbo_gap, c.elbo_gap);
            param_gap = std::max(param_gap, c.param_gap);
            flat += c.flat;
        }
    }
    Outcome o;
    o.pass = elbo_gap <= 1e-3 && param_gap <= 1e-3;
    o.detail = "max ELBO gain by numerical search " + fmt(elbo_gap, 3) + ", max parameter gap " + fmt(param_gap, 3) +
               " (worst factor: " + worst + "); " + std::to_string(flat) +
               " zero-weight bounds with a constant ELBO excluded from the parameter gap";
    return o;
}

// --- 3 -----------------------------------------------------------------------

CompleteParams random_complete(const fixture::Instance& inst, std::size_t K, std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> unif(0.05, 0.95);
    const auto& dt = inst.domain_tree;
    const auto& ct = inst.cause_tree;
    const std::size_t C = inst.data.num_causes, G1 = inst.data.num_domains;
    CompleteParams p;
    p.mixing = DomainMixingParams::zeros(C, dt.size(), std::size_t(dt.num_levels()), K);
    for (auto& a : p.mixing.alpha)
        for (auto& v : a.reshaped()) v = 1.5 * n01(rng);
    for (auto& s : p.mixing.slab)
        for (std::size_t u = 1; u < s.size(); ++u) s[u] = unif(rng) < 0.5;
    for (auto& v : p.mixing.rho.reshaped()) v = unif(rng);
    p.profiles = ResponseProfileParams::zeros(ct.size(), inst.data.num_items, K);
    for (auto& g : p.profiles.gamma)
        for (auto& v : g.reshaped()) v = 1.5 * n01(rng);
    p.csmf.pi = Matrix(Eigen::Index(G1), Eigen::Index(C));
    for (Eigen::Index g = 0; g < p.csmf.pi.rows(); ++g) {
        for (Eigen::Index c = 0; c < p.csmf.pi.cols(); ++c) p.csmf.pi(g, c) = unif(rng);
        p.csmf.pi.row(g) /= p.csmf.pi.row(g).sum();
    }
    for (std::size_t i = 0; i < inst.data.num_subjects; ++i) {
        p.cause.push_back(inst.data.cause[i].value_or(std::size_t(unif(rng) * double(C)) % C));
        p.z.push_back(std::size_t(unif(rng) * double(K)) % K);
    }
    return p;
}

Outcome bound_validity() {
    // excess is compared with 1e-12, the rounding level at the touching points x = +-psi
    double worst_excess = -1.0, worst_tight = 0.0;
    for (int a = 0; a < 200; ++a) {
        const double x = -6.0 + 12.0 * a / 199.0;
        for (int b = 0; b < 200; ++b) {
            const double psi = -6.0 + 12.0 * b / 199.0;
            worst_excess = std::max(worst_excess, jj_lower_bound(x, psi) - sigmoid(x));
        }
        const double psi = x;
        worst_tight = std::max(worst_tight, std::abs(jj_lower_bound(psi, psi) - sigmoid(psi)));
        worst_tight = std::max(worst_tight, std::abs(jj_lower_bound(-psi, psi) - sigmoid(-psi)));
    }

    double worst_gap = -1e300;  // log H - log joint, should stay <= 1e-9
    double worst_tight_lik = 0.0;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unif(0.0, 3.0);
    for (std::uint64_t n = 0; n < 50; ++n) {
        fixture::InstanceOptions o;
        o.N = 5 + n % 4, o.J = 2 + n % 3, o.C = 2 + n % 2, o.K = 2 + n % 3, o.leaves = 2 + n % 3;
        const auto inst = fixture::random_instance(3000 + n, o);
        const auto p = random_complete(inst, o.K, rng);
        const auto hyper = Hyperparameters::defaults(o.C, inst.data.num_domains, inst.domain_tree, inst.cause_tree);
        LocalBounds random_bounds, tight;
        for (std::size_t c = 0; c < o.C; ++c) {
            Matrix phi(Eigen::Index(inst.data.num_domains), Eigen::Index(o.K - 1));
            for (auto& v : phi.reshaped()) v = unif(rng);
            random_bounds.phi.push_back(phi);
            Matrix psi(Eigen::Index(o.J), Eigen::Index(o.K));
            for (auto& v : psi.reshaped()) v = unif(rng);
            random_bounds.psi.push_back(psi);
            for (std::size_t g = 0; g < inst.data.num_domains; ++g)
                phi.row(Eigen::Index(g)) = eta_for_domain(p.mixing, inst.domain_tree, g, c).cwiseAbs().transpose();
            tight.phi.push_back(phi);
            tight.psi.push_back(beta_from_gamma(p.profiles, inst.cause_tree, inst.cause_tree.leaf(c)).cwiseAbs());
        }
        const double exact = log_joint(inst.data, inst.domain_tree, inst.cause_tree, p, hyper).total();
        const auto bounded = log_h(inst.data, inst.domain_tree, inst.cause_tree, p, random_bounds, hyper);
        worst_gap = std::max(worst_gap, bounded.total() - exact);
        const auto at_tight = log_h(inst.data, inst.domain_tree, inst.cause_tree, p, tight, hyper);
        const auto ref = log_joint(inst.data, inst.domain_tree, inst.cause_tree, p, hyper);
        worst_tight_lik = std::max(worst_tight_lik, std::abs(at_tight.likelihood() - ref.likelihood()));
    }
    Outcome o;
    o.pass = worst_excess <= 1e-12 && worst_tight <= 1e-12 && worst_gap <= 1e-9 && worst_tight_lik <= 1e-9;
    o.detail = "max h - sigmoid on grid " + fmt(worst_excess, 3) + ", max |h - sigmoid| at x=+-psi " +
               fmt(worst_tight, 3) + ", max log H - log joint " + fmt(worst_gap, 3) +
               ", tight-bound likelihood error " + fmt(worst_tight_lik, 3);
    return o;
}

// --- 4 -----------------------------------------------------------------------

Outcome stick_breaking() {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> draw(0.0, 2.0);
    double worst_trip = 0.0, worst_sum = 0.0;
    for (int K = 2; K <= 6; ++K)
        for (int rep = 0; rep < 1000; ++rep) {
            Vector eta(K - 1);
            for (auto& v : eta) v = draw(rng);
            const Vector lambda = stick_break(eta);
            worst_sum = std::max(worst_sum, std::abs(lambda.sum() - 1.0));
            worst_trip = std::max(worst_trip, (stick_break_inverse(lambda) - eta).cwiseAbs().maxCoeff());
        }
    Outcome o;
    o.pass = worst_trip <= 1e-10 && worst_sum <= 1e-12;
    o.detail = "5000 round trips, max |inverse(lambda) - eta| " + fmt(worst_trip, 3) + ", max |sum - 1| " +
               fmt(worst_sum, 3);
    return o;
}

// --- 5 -----------------------------------------------------------------------

struct Comparator {
    std::string name;
    ModelConfig config;
};

std::vector<Comparator> sim1_comparators() {
    std::vector<Comparator> out(5);
    out[0].name = "domain-adaptive";
    out[1].name = "true-grouping";
    out[1].config.mode = ComparatorMode::FixedGrouping;
    out[1].config.slab_pattern = sim1_true_grouping();
    out[2].name = "ad-hoc-grouping";
    out[2].config.mode = ComparatorMode::FixedGrouping;
    out[2].config.slab_pattern = sim1_ad_hoc_grouping();
    out[3].name = "no-grouping";
    out[3].config.mode = ComparatorMode::NoDomainGrouping;
    out[4].name = "complete-pooling";
    out[4].config.mode = ComparatorMode::CompletePooling;
    return out;
}

Outcome simulation_one() {
    constexpr std::size_t kReplicates = 50;
    const auto comparators = sim1_comparators();
    const std::size_t M = comparators.size();
    std::vector<double> accuracy(kReplicates * M, 0.0);
    std::vector<char> converged(kReplicates * M, 0);
    parallel_for(kReplicates * M, worker_count(), [&](std::size_t task) {
        const std::size_t rep = task / M, m = task % M;
        SimulationDesign design;  // N = 1000, J = 20, strong signal, balanced allocation
        design.seed = derive_seed(20240, "sim1-replicate", rep);
        const auto sim = simulate_dataset(design);
        FitControls ctl;
        ctl.seed = derive_seed(design.seed, "fit");
        const auto r = fit(sim.data, sim.domain_tree, sim.cause_tree, comparators[m].config, ctl);
        const Vector truth = sim.truth.pi.row(0).transpose();
        accuracy[task] = csmf_accuracy(csmf_mean(r.state, 0), truth);
        converged[task] = r.converged;
    });
    std::vector<double> mean(M, 0.0), sd(M, 0.0);
    for (std::size_t m = 0; m < M; ++m) {
        for (std::size_t rep = 0; rep < kReplicates; ++rep) mean[m] += accuracy[rep * M + m] / double(kReplicates);
        for (std::size_t rep = 0; rep < kReplicates; ++rep)
            sd[m] += std::pow(accuracy[rep * M + m] - mean[m], 2) / double(kReplicates - 1);
        sd[m] = std::sqrt(sd[m]);
    }
    const bool ordering = mean[0] >= mean[2] && mean[0] >= mean[3] && mean[0] >= mean[4];
    const bool close = std::abs(mean[0] - mean[1]) <= 0.05;
    Outcome o;
    o.pass = ordering && close;
    std::ostringstream d;
    d << "mean (sd) target CSMF accuracy over " << kReplicates << " replicates:";
    for (std::size_t m = 0; m < M; ++m) d << ' ' << comparators[m].name << ' ' << fmt(mean[m], 3) << " (" << fmt(sd[m], 2) << ")";
    d << "; ordering " << (ordering ? "holds" : "violated") << ", |DA - TG| = " << fmt(std::abs(mean[0] - mean[1]), 3)
      << "; converged " << std::count(converged.begin(), converged.end(), 1) << "/" << converged.size();
    o.detail = d.str();
    return o;
}

// --- 6 -----------------------------------------------------------------------

Outcome comparator_construction() {
    SimulationDesign design;
    design.num_subjects = 300;
    design.seed = 61;
    const auto sim = simulate_dataset(design);
    FitControls ctl;
    ctl.n_restarts = 2;
    ctl.max_iters = 300;

    ModelConfig pool;
    pool.mode = ComparatorMode::CompletePooling;
    const VbProblem pb(sim.data, sim.domain_tree, sim.cause_tree, pool);
    const auto pooled = fit(sim.data, sim.domain_tree, sim.cause_tree, pool, ctl);
    double max_diff = 0.0;
    for (std::size_t c = 0; c < pb.C(); ++c)
        for (std::size_t g = 0; g < pb.G1(); ++g)
            for (std::size_t h = 0; h < pb.G1(); ++h)
                max_diff = std::max(max_diff, (lambda_at_mean(pooled.state, pb, c, g) - lambda_at_mean(pooled.state, pb, c, h))
                                                  .cwiseAbs()
                                                  .maxCoeff());

    ModelConfig all;
    all.mode = ComparatorMode::NoDomainGrouping;
    const auto ungrouped = fit(sim.data, sim.domain_tree, sim.cause_tree, all, ctl);
    const Matrix table = cophenetic_table(sim.domain_tree, ungrouped.state.slab_prob);
    double max_dist_err = 0.0;
    for (Eigen::Index c = 0; c < table.rows(); ++c)
        for (std::size_t g = 1; g < sim.domain_tree.num_leaves(); ++g)
            max_dist_err = std::max(max_dist_err, std::abs(table(c, Eigen::Index(g)) -
                                                           sim.domain_tree.path_distance(sim.domain_tree.leaf(0),
                                                                                         sim.domain_tree.leaf(g))));
    Outcome o;
    o.pass = max_diff == 0.0 && max_dist_err == 0.0;
    o.detail = "complete pooling max |lambda(c,g) - lambda(c,g')| = " + fmt(max_diff, 3) +
               "; no grouping max |cophenetic - tree distance| = " + fmt(max_dist_err, 3);
    return o;
}

// --- 7 -----------------------------------------------------------------------

Outcome metric_exactness() {
    auto v = [](std::initializer_list<double> x) {
        Vector out(Eigen::Index(x.size()));
        std::copy(x.begin(), x.end(), out.data());
        return out;
    };
    const double a1 = csmf_accuracy(v({0.2, 0.3, 0.5}), v({0.2, 0.3, 0.5}));
    const double a2 = csmf_accuracy(v({1.0, 0.0, 0.0}), v({1.0 / 3, 1.0 / 3, 1.0 / 3}));
    const double a3 = csmf_accuracy(v({0.4, 0.4, 0.2}), v({0.5, 0.3, 0.2}));
    const bool csmf_ok = a1 == 1.0 && a2 == 0.0 && a3 == 0.875;

    // the eight-node tree: 1 -> {2, 3, 4}, 2 -> {5, 6}, 3 -> {7, 8}; target leaf 5
    const auto tree = parse_tree(
        "id,parent,weight,level\n1,,1,1\n2,1,1,2\n3,1,1,2\n4,1,1,2\n5,2,1,2\n6,2,1,2\n7,3,1,2\n8,3,1,2\n"
        "# leaves: 5,6,7,8,4\n");
    Matrix slab = Matrix::Ones(2, Eigen::Index(tree.size()));
    auto at = [&](const char* id) { return Eigen::Index(tree.index(id)); };
    // second cause: p = 0.5 on 5, 0.25 on 3, 0.75 on 4, 0 on 6, 0.125 on 8
    slab(1, at("5")) = 0.5;
    slab(1, at("3")) = 0.25;
    slab(1, at("4")) = 0.75;
    slab(1, at("6")) = 0.0;
    slab(1, at("8")) = 0.125;
    const Matrix table = cophenetic_table(tree, slab);
    // sources in rank order 6, 7, 8, 4; paths 5-2-6, 5-2-1-3-7, 5-2-1-3-8, 5-2-1-4
    const double expected[2][4] = {{2.0, 4.0, 4.0, 3.0}, {0.5, 2.75, 1.875, 2.25}};
    bool tree_ok = true;
    for (int c = 0; c < 2; ++c)
        for (int g = 0; g < 4; ++g) tree_ok = tree_ok && table(c, g + 1) == expected[c][g];
    Outcome o;
    o.pass = csmf_ok && tree_ok;
    o.detail = "csmf accuracy " + fmt(a1, 17) + ", " + fmt(a2, 17) + ", " + fmt(a3, 17) + "; eight-node tree distances " +
               (tree_ok ? "exact" : "mismatch");
    return o;
}

// --- 8 -----------------------------------------------------------------------

void append_bytes(std::string& out, const Matrix& m) {
    out.append(reinterpret_cast<const char*>(m.data()), sizeof(double) * std::size_t(m.size()));
}

std::string state_bytes(const VariationalState& s) {
    std::string out;
    for (const Matrix* m : {&s.e, &s.r, &s.dirichlet, &s.slab_prob, &s.rho_a, &s.rho_b}) append_bytes(out, *m);
    for (const auto* group : {&s.alpha_mean, &s.alpha_var, &s.gamma_mean, &s.gamma_var, &s.phi, &s.psi})
        for (const auto& m : *group) append_bytes(out, m);
    append_bytes(out, s.tau);
    append_bytes(out, s.tau_star);
    return out;
}

std::vector<std::string> update_trail(const fixture::Instance& inst, const Dataset& data) {
    const VbProblem pb(data, inst.domain_tree, inst.cause_tree, ModelConfig{});
    std::vector<std::string> trail;
    FitControls ctl;
    ctl.max_iters = 25;
    ctl.hyper_interval = 5;
    ctl.on_update = [&](const char* step, const VariationalState& s) {
        const double elbo = compute_elbo(s, pb);
        trail.push_back(std::string(step) + std::string(reinterpret_cast<const char*>(&elbo), sizeof elbo) +
                        state_bytes(s));
    };
    const auto r = fit_single(pb, ctl, 5);
    for (double e : r.elbo_trace) trail.push_back(std::string(reinterpret_cast<const char*>(&e), sizeof e));
    return trail;
}

Outcome missingness() {
    fixture::InstanceOptions o;
    o.N = 60, o.J = 6, o.missing_rate = 0.15;
    const auto inst = fixture::random_instance(88, o);
    std::size_t hidden = 0;
    for (std::size_t k = 0; k < inst.data.x.size(); ++k) hidden += inst.data.observed[k] == 0;

    const auto base = update_trail(inst, inst.data);
    bool identical = !base.empty() && hidden > 0;
    for (std::uint8_t placeholder : {std::uint8_t(0), std::uint8_t(1), std::uint8_t(255)}) {
        Dataset perturbed = inst.data;
        for (std::size_t k = 0; k < perturbed.x.size(); ++k)
            if (!perturbed.observed[k]) perturbed.x[k] = placeholder;
        identical = identical && update_trail(inst, perturbed) == base;
    }
    Outcome out;
    out.pass = identical;
    out.detail = std::to_string(hidden) + " missing entries set to 0, 1 and 255; " + std::to_string(base.size()) +
                 " recorded updates and ELBO values " + (identical ? "bit-identical" : "differ");
    return out;
}

// --- 9 -----------------------------------------------------------------------

Outcome k_selection() {
    constexpr std::size_t kReplicates = 20;
    const std::vector<std::size_t> candidates{2, 3, 4};
    std::vector<std::size_t> chosen(kReplicates, 0);
    std::vector<double> margin(kReplicates, 0.0);
    parallel_for(kReplicates, worker_count(), [&](std::size_t rep) {
        SimulationDesign design;  // two true classes
        design.seed = derive_seed(9090, "k-replicate", rep);
        const auto sim = simulate_dataset(design);
        FitControls ctl;
        ctl.seed = derive_seed(design.seed, "fit");
        const auto sel = select_k(sim.data, sim.domain_tree, sim.cause_tree, ModelConfig{}, ctl, candidates);
        chosen[rep] = sel.selected_k;
        margin[rep] = sel.criterion[0] - std::max(sel.criterion[1], sel.criterion[2]);
    });
    std::map<std::size_t, int> counts;
    for (auto k : chosen) ++counts[k];
    Outcome o;
    o.pass = counts[2] * 10 >= int(kReplicates) * 8;
    std::ostringstream d;
    d << "selected K over " << kReplicates << " replicates:";
    for (auto [k, n] : counts) d << " K=" << k << " x" << n;
    std::sort(margin.begin(), margin.end());
    d << "; median criterion margin of K=2 " << fmt(margin[kReplicates / 2], 4);
    o.detail = d.str();
    return o;
}

// --- 10 ----------------------------------------------------------------------

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(NLCM_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

Outcome determinism() {
    const fs::path work = fs::temp_directory_path() / ("nlcm_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(work);
    const fs::path log = work / "log.txt";
    Outcome o;
    const auto sim = (work / "sim").string();
    if (run_cli("simulate --design sim1 --n 600 --seed 7 --out " + sim, log) != 0) {
        o.detail = "simulate failed: " + slurp(log);
        fs::remove_all(work);
        return o;
    }
    const std::string fit = "fit --data " + sim + "/data.csv --domain-tree " + sim + "/domain_tree.csv --cause-tree " +
                            sim + "/cause_tree.csv --seed 11 --restarts 3 --out ";
    const int a = run_cli(fit + (work / "run1").string(), log);
    const int b = run_cli(fit + (work / "run2").string(), log);
    const int c = run_cli(fit + (work / "run3").string() + " --jobs 3", log);
    const std::string j1 = slurp(work / "run1/result.json");
    const bool ran = (a == 0 || a == 2) && a == b && b == c && !j1.empty();
    bool same = ran && j1 == slurp(work / "run2/result.json") && j1 == slurp(work / "run3/result.json");
    for (const char* f : {"e_matrix.csv", "pi_summary.csv", "cophenetic.csv", "elbo_trace.csv"})
        same = same && slurp(work / "run1" / f) == slurp(work / "run2" / f);
    o.pass = same;
    o.detail = "three fits (jobs 1, 1, 3), exit codes " + std::to_string(a) + "/" + std::to_string(b) + "/" +
               std::to_string(c) + ", result.json " + std::to_string(j1.size()) + " bytes, " +
               (same ? "byte-identical" : "differ");
    fs::remove_all(work);
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"ELBO monotonicity and convergence", elbo_monotonicity},
        {"update optimality against numerical maximization", update_optimality},
        {"bound validity", bound_validity},
        {"stick-breaking bijection", stick_breaking},
        {"simulation I replication", simulation_one},
        {"comparator construction", comparator_construction},
        {"metric exactness", metric_exactness},
        {"missingness correctness", missingness},
        {"K selection", k_selection},
        {"determinism", determinism},
    };
    std::set<int> selected;
    for (int a = 1; a < argc; ++a) selected.insert(std::atoi(argv[a]));
    int failures = 0;
    for (std::size_t n = 0; n < criteria.size(); ++n) {
        const int id = int(n) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[n].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[n].first << ", "
                  << fmt(secs, 3) << " s): " << o.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
