// nlcm: simulate, fit, evaluate and select-k front end.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nlcm/dataset.hpp"
#include "nlcm/io.hpp"
#include "nlcm/metrics.hpp"
#include "nlcm/simulator.hpp"
#include "nlcm/tree.hpp"
#include "nlcm/vi.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using namespace nlcm;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kNotConverged = 2;

/// Input problems surfaced with exit code 1.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot read " + path);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::vector<std::string> split_list(const std::string& s, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream in(s);
    for (std::string item; std::getline(in, item, sep);)
        if (!item.empty()) out.push_back(item);
    return out;
}

std::map<std::string, int> parse_slab_pattern(const std::string& spec) {
    if (spec == "sim1-true") return sim1_true_grouping();
    if (spec == "sim1-adhoc") return sim1_ad_hoc_grouping();
    std::map<std::string, int> out;
    for (const auto& item : split_list(spec)) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw InputError("slab pattern entries look like node=0 or node=1");
        const std::string value = item.substr(eq + 1);
        if (value != "0" && value != "1") throw InputError("slab pattern value must be 0 or 1: " + item);
        out[item.substr(0, eq)] = value == "1";
    }
    return out;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

void write_manifest(const std::string& dir, const CLI::App& sub, const std::string& command,
                    std::uint64_t seed) {
    Json m;
    m["tool"] = "nlcm";
    m["version"] = kVersion;
    m["command"] = command;
    m["seed"] = seed;
    Json opts = Json::object();
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt->get_single_name() == "help" || opt->get_single_name().empty()) continue;
        const auto& res = opt->results();
        if (res.empty()) continue;
        opts[opt->get_single_name()] = res.size() == 1 ? Json(res[0]) : Json(res);
    }
    m["options"] = opts;
    // the same options as a config file for `--config`
    m["config"] = sub.config_to_str(false, false);
    write_text((fs::path(dir) / "manifest.json").string(), m.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::string design = "sim1";
    std::string out = "sim_out";
    std::size_t n = 1000;
    std::size_t items = 20;
    std::size_t causes = 3;
    std::size_t classes = 2;
    std::string allocation = "balanced";
    std::string signal = "strong";
    std::string csmf = "unbalanced";
    std::string profiles = "shared";
    std::string domain_tree;
    double missing_rate = 0.0;
    std::uint64_t seed = 1;
    // semi-synthetic masking
    std::string data;
    std::string cause_tree;
    double fraction = 0.2;
    std::string mask_mode = "uniform";
};

int run_simulate(const SimulateArgs& a, const CLI::App& sub) {
    fs::create_directories(a.out);
    if (a.design == "sim1") {
        SimulationDesign d;
        d.num_subjects = a.n;
        d.num_items = a.items;
        d.num_causes = a.causes;
        d.num_classes = a.classes;
        d.allocation = allocation_from_string(a.allocation);
        d.signal = signal_from_string(a.signal);
        d.csmf = csmf_pattern_from_string(a.csmf);
        d.profiles = profile_mode_from_string(a.profiles);
        d.missing_rate = a.missing_rate;
        d.seed = a.seed;
        if (!a.domain_tree.empty()) {
            d.domain_tree = read_tree_file(a.domain_tree);
            std::map<std::string, double> kept;
            for (const auto& [id, v] : d.offsets)
                if (d.domain_tree.find(id)) kept[id] = v;
            d.offsets = kept;
        }
        const SimulatedData sim = simulate_dataset(d);
        write_text((fs::path(a.out) / "data.csv").string(), serialize_dataset(sim.data));
        write_text((fs::path(a.out) / "truth.json").string(), sim.truth.to_json(sim.data));
        write_text((fs::path(a.out) / "domain_tree.csv").string(), serialize_tree(sim.domain_tree));
        write_text((fs::path(a.out) / "cause_tree.csv").string(), serialize_tree(sim.cause_tree));
        std::cout << "subjects per domain:";
        for (std::size_t g = 0; g < sim.data.num_domains; ++g)
            std::cout << ' ' << sim.data.domain_labels[g] << '=' << sim.data.domain_members[g].size();
        std::cout << "\ntarget CSMF:";
        for (Eigen::Index c = 0; c < sim.truth.pi.cols(); ++c) std::cout << ' ' << sim.truth.pi(0, c);
        std::cout << '\n';
    } else if (a.design == "semi") {
        if (a.data.empty() || a.domain_tree.empty() || a.cause_tree.empty())
            throw InputError("--design semi needs --data, --domain-tree and --cause-tree");
        const auto dtree = read_tree_file(a.domain_tree);
        const auto ctree = read_tree_file(a.cause_tree);
        const Dataset full = read_dataset_file(a.data, dtree, ctree);
        const MaskedData m =
            mask_semi_synthetic(full, dtree, ctree, a.fraction, mask_mode_from_string(a.mask_mode), a.seed);
        write_text((fs::path(a.out) / "data.csv").string(), serialize_dataset(m.data));
        write_text((fs::path(a.out) / "domain_tree.csv").string(), serialize_tree(m.domain_tree));
        write_text((fs::path(a.out) / "cause_tree.csv").string(), serialize_tree(ctree));
        Json t;
        t["cause_labels"] = m.data.cause_labels;
        t["domain_labels"] = m.data.domain_labels;
        Vector pi0 = Vector::Zero(Eigen::Index(m.data.num_causes));
        for (auto c : m.target_truth) pi0[Eigen::Index(c)] += 1.0;
        pi0 /= pi0.sum();
        t["pi"] = std::vector<std::vector<double>>{to_std(pi0)};
        std::vector<std::string> ids, causes;
        for (std::size_t n = 0; n < m.target_subjects.size(); ++n) {
            ids.push_back(m.data.subject_ids[m.target_subjects[n]]);
            causes.push_back(m.data.cause_labels[m.target_truth[n]]);
        }
        t["subject_ids"] = ids;
        t["cause"] = causes;
        if (!m.cause_fractions.empty()) t["cause_fractions"] = m.cause_fractions;
        write_text((fs::path(a.out) / "truth.json").string(), t.dump(2) + "\n");
        std::cout << "target subjects: " << m.target_subjects.size() << '\n';
    } else {
        throw InputError("unknown design: " + a.design);
    }
    write_manifest(a.out, sub, "simulate", a.seed);
    return kOk;
}

// ---------------------------------------------------------------------------
// fit / select-k

struct FitArgs {
    std::string data;
    std::string domain_tree;
    std::string cause_tree;
    std::string out = "fit_out";
    std::size_t k = 2;
    std::string candidates;
    std::string mode = "domain-adaptive";
    std::string slab_pattern;
    double slab_a = 1.0;
    double slab_b = 1.0;
    double dirichlet_d = 1.0;
    double tol = 1e-8;
    double hyper_tol = 1e-4;
    int hyper_interval = 10;
    bool relative_tol = false;
    bool bounds_on_hyper_only = false;
    bool fixed_hyper = false;
    int max_iters = 2000;
    int restarts = 5;
    std::uint64_t seed = 1;
    int jobs = 1;
};

int run_fit(const FitArgs& a, const CLI::App& sub, bool selecting) {
    const auto dtree = read_tree_file(a.domain_tree);
    const auto ctree = read_tree_file(a.cause_tree);
    const Dataset data = read_dataset_file(a.data, dtree, ctree);

    ModelConfig cfg;
    cfg.num_classes = a.k;
    cfg.mode = comparator_from_string(a.mode);
    if (!a.slab_pattern.empty()) cfg.slab_pattern = parse_slab_pattern(a.slab_pattern);
    if (cfg.mode == ComparatorMode::FixedGrouping && cfg.slab_pattern.empty())
        throw InputError("fixed-grouping needs --slab-pattern");
    for (const auto& [id, v] : cfg.slab_pattern)
        if (!dtree.find(id)) throw InputError("slab pattern names unknown domain node: " + id);
    cfg.slab_a = a.slab_a;
    cfg.slab_b = a.slab_b;
    cfg.dirichlet_d = a.dirichlet_d;

    FitControls fc;
    fc.tol = a.tol;
    fc.hyper_tol = a.hyper_tol;
    fc.hyper_interval = a.hyper_interval;
    fc.relative_tol = a.relative_tol;
    fc.local_bounds_every_sweep = !a.bounds_on_hyper_only;
    fc.update_hyper = !a.fixed_hyper;
    fc.max_iters = a.max_iters;
    fc.n_restarts = a.restarts;
    fc.seed = a.seed;
    fc.jobs = a.jobs;
    if (!(fc.tol > 0) || fc.hyper_interval < 1 || fc.max_iters < 1 || fc.n_restarts < 1)
        throw InputError("need tol > 0, hyper-interval >= 1, max-iters >= 1, restarts >= 1");

    fs::create_directories(a.out);
    FitResult result;
    if (selecting) {
        std::vector<std::size_t> ks;
        for (const auto& s : split_list(a.candidates)) {
            const int v = std::stoi(s);
            if (v < 2) throw InputError("K candidates must be at least 2");
            ks.push_back(std::size_t(v));
        }
        if (ks.empty()) throw InputError("empty K candidate list");
        KSelection sel = select_k(data, dtree, ctree, cfg, fc, ks);
        std::ostringstream csv;
        csv << "k,elbo,criterion,converged,selected\n";
        for (std::size_t i = 0; i < ks.size(); ++i)
            csv << ks[i] << ',' << Json(sel.elbo[i]).dump() << ',' << Json(sel.criterion[i]).dump() << ','
                << (sel.fits[i].converged ? 1 : 0) << ',' << (ks[i] == sel.selected_k ? 1 : 0) << '\n';
        write_text((fs::path(a.out) / "k_selection.csv").string(), csv.str());
        std::cout << csv.str();
        const auto it = std::find(ks.begin(), ks.end(), sel.selected_k);
        result = std::move(sel.fits[std::size_t(it - ks.begin())]);
        cfg.num_classes = sel.selected_k;
    } else {
        result = fit(data, dtree, ctree, cfg, fc);
    }

    const VbProblem problem(data, dtree, ctree, cfg);
    write_text((fs::path(a.out) / "result.json").string(), fit_result_json(result, problem));
    write_text((fs::path(a.out) / "e_matrix.csv").string(), e_matrix_csv(result, data));
    write_text((fs::path(a.out) / "pi_summary.csv").string(), pi_summary_csv(result, data));
    write_text((fs::path(a.out) / "cophenetic.csv").string(),
               cophenetic_csv(cophenetic_table(dtree, result.state.slab_prob), data));
    write_text((fs::path(a.out) / "elbo_trace.csv").string(), elbo_trace_csv(result.elbo_trace));
    write_manifest(a.out, sub, selecting ? "select-k" : "fit", a.seed);

    const Vector pi0 = csmf_mean(result.state, 0);
    std::cout << "K=" << result.num_classes << " mode=" << to_string(result.mode)
              << " converged=" << (result.converged ? "yes" : "no") << " iterations=" << result.iterations
              << " elbo=" << Json(result.final_elbo()).dump() << "\ntarget CSMF:";
    for (Eigen::Index c = 0; c < pi0.size(); ++c) std::cout << ' ' << data.cause_labels[std::size_t(c)] << '=' << pi0[c];
    std::cout << '\n';
    if (!result.converged) {
        std::cerr << "warning: no convergence within " << fc.max_iters << " sweeps\n";
        return kNotConverged;
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// evaluate

struct Truth {
    std::optional<Vector> pi0;
    std::map<std::string, std::string> cause_of;  // subject id -> cause label
};

Truth read_truth(const std::string& path, const std::vector<std::string>& cause_labels) {
    const Json j = Json::parse(read_text(path));
    Truth t;
    if (j.contains("cause_labels") && j["cause_labels"].get<std::vector<std::string>>() != cause_labels)
        throw InputError("truth and result disagree on the cause labels");
    if (j.contains("pi")) {
        const auto rows = j["pi"].get<std::vector<std::vector<double>>>();
        if (rows.empty() || rows[0].size() != cause_labels.size())
            throw InputError("truth CSMF length differs from the cause count");
        t.pi0 = Eigen::Map<const Vector>(rows[0].data(), Eigen::Index(rows[0].size()));
    }
    if (j.contains("subject_ids") && j.contains("cause")) {
        const auto ids = j["subject_ids"].get<std::vector<std::string>>();
        const auto causes = j["cause"].get<std::vector<std::string>>();
        if (ids.size() != causes.size()) throw InputError("truth subject and cause columns differ in length");
        for (std::size_t i = 0; i < ids.size(); ++i) t.cause_of[ids[i]] = causes[i];
    }
    return t;
}

EvaluationReport evaluate_one(const FitSummary& fit, const std::optional<Truth>& truth, std::size_t top_k) {
    EvaluationReport rep;
    rep.cause_labels = fit.cause_labels;
    rep.domain_labels = fit.domain_labels;
    rep.pi0_estimate = fit.pi0_mean;
    const auto tree = parse_tree(fit.domain_tree);
    rep.cophenetic = cophenetic_table(tree, fit.slab_prob);
    if (!truth) return rep;
    if (truth->pi0) {
        rep.pi0_truth = truth->pi0;
        rep.csmf_accuracy = csmf_accuracy(fit.pi0_mean, *truth->pi0);
        rep.abs_errors = (fit.pi0_mean - *truth->pi0).cwiseAbs();
    }
    if (!truth->cause_of.empty() && !fit.target_subjects.empty()) {
        std::vector<std::size_t> labels;
        for (const auto& id : fit.target_subjects) {
            const auto it = truth->cause_of.find(id);
            if (it == truth->cause_of.end()) throw InputError("truth lacks target subject " + id);
            const auto pos = std::find(fit.cause_labels.begin(), fit.cause_labels.end(), it->second);
            if (pos == fit.cause_labels.end()) throw InputError("unknown cause label in truth: " + it->second);
            labels.push_back(std::size_t(pos - fit.cause_labels.begin()));
        }
        rep.top_cause = top_cause_accuracy(fit.target_cause_probs, labels, top_k);
    }
    return rep;
}

struct EvaluateArgs {
    std::string result;
    std::string truth;
    std::vector<std::string> replicates;
    std::string out = "eval_out";
    std::size_t top_k = 1;
};

/// Replicate layout: <rep>/truth.json and <rep>/<comparator>/result.json.
int run_replicates(const EvaluateArgs& a) {
    struct Row {
        std::string replicate, comparator;
        double csmf = 0.0;
        std::optional<double> top;
        Vector estimate, truth;
    };
    std::vector<Row> rows;
    std::vector<std::string> replicates = a.replicates;
    std::sort(replicates.begin(), replicates.end());
    for (const auto& rep : replicates) {
        const fs::path dir(rep);
        if (!fs::is_directory(dir)) throw InputError("not a replicate directory: " + rep);
        std::vector<fs::path> comparators;
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.is_directory() && fs::exists(entry.path() / "result.json")) comparators.push_back(entry.path());
        std::sort(comparators.begin(), comparators.end());
        for (const auto& cdir : comparators) {
            const FitSummary fit = parse_fit_result(read_text((cdir / "result.json").string()));
            const Truth truth = read_truth((dir / "truth.json").string(), fit.cause_labels);
            if (!truth.pi0) throw InputError("replicate truth lacks a CSMF: " + rep);
            const EvaluationReport r = evaluate_one(fit, truth, a.top_k);
            Row row{dir.filename().string(), cdir.filename().string(), *r.csmf_accuracy, std::nullopt,
                    fit.pi0_mean, *truth.pi0};
            if (r.top_cause) row.top = r.top_cause->accuracy;
            rows.push_back(row);
        }
    }
    if (rows.empty()) throw InputError("no replicate results found");

    std::ostringstream lng;
    lng << "replicate,comparator,csmf_accuracy,top_cause_accuracy\n";
    for (const auto& r : rows)
        lng << r.replicate << ',' << r.comparator << ',' << Json(r.csmf).dump() << ','
            << (r.top ? Json(*r.top).dump() : "") << '\n';
    write_text((fs::path(a.out) / "replicates_long.csv").string(), lng.str());

    std::map<std::string, std::vector<const Row*>> by_comp;
    for (const auto& r : rows) by_comp[r.comparator].push_back(&r);
    std::ostringstream sum;
    sum << "comparator,n,mean_csmf_accuracy,sd_csmf_accuracy";
    const std::size_t C = std::size_t(rows.front().truth.size());
    for (std::size_t c = 0; c < C; ++c) sum << ",rmse_" << c + 1;
    sum << '\n';
    for (const auto& [name, list] : by_comp) {
        double mean = 0.0;
        for (const Row* r : list) mean += r->csmf;
        mean /= double(list.size());
        double var = 0.0;
        for (const Row* r : list) var += (r->csmf - mean) * (r->csmf - mean);
        const double sd = list.size() > 1 ? std::sqrt(var / double(list.size() - 1)) : 0.0;
        std::vector<Vector> est, tru;
        for (const Row* r : list) {
            est.push_back(r->estimate);
            tru.push_back(r->truth);
        }
        const Vector rmse = csmf_rmse(est, tru);
        sum << name << ',' << list.size() << ',' << Json(mean).dump() << ',' << Json(sd).dump();
        for (Eigen::Index c = 0; c < rmse.size(); ++c) sum << ',' << Json(rmse[c]).dump();
        sum << '\n';
    }
    write_text((fs::path(a.out) / "replicates_summary.csv").string(), sum.str());
    std::cout << sum.str();
    return kOk;
}

int run_evaluate(const EvaluateArgs& a, const CLI::App& sub) {
    fs::create_directories(a.out);
    int code = kOk;
    if (!a.replicates.empty()) {
        code = run_replicates(a);
    } else {
        if (a.result.empty()) throw InputError("evaluate needs --result or --replicates");
        const FitSummary fit = parse_fit_result(read_text(a.result));
        std::optional<Truth> truth;
        if (!a.truth.empty()) truth = read_truth(a.truth, fit.cause_labels);
        const EvaluationReport rep = evaluate_one(fit, truth, a.top_k);
        write_text((fs::path(a.out) / "report.json").string(), rep.to_json());
        write_text((fs::path(a.out) / "report.csv").string(), rep.to_csv());
        if (rep.csmf_accuracy) std::cout << "csmf_accuracy " << *rep.csmf_accuracy << '\n';
        if (rep.top_cause) std::cout << "top_cause_accuracy " << rep.top_cause->accuracy << '\n';
    }
    write_manifest(a.out, sub, "evaluate", 0);
    return code;
}

void add_fit_options(CLI::App* sub, FitArgs& a, bool selecting) {
    sub->add_option("--data", a.data, "dataset CSV")->required()->check(CLI::ExistingFile);
    sub->add_option("--domain-tree", a.domain_tree, "domain tree CSV")->required()->check(CLI::ExistingFile);
    sub->add_option("--cause-tree", a.cause_tree, "cause tree CSV")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", a.out, "output directory")->capture_default_str();
    if (selecting)
        sub->add_option("--candidates", a.candidates, "comma-separated K values")->required();
    else {
        sub->add_option("--k", a.k, "latent classes per cause")->capture_default_str();
        sub->add_option("--select-k", a.candidates, "fit each listed K and keep the best criterion");
    }
    sub->add_option("--mode", a.mode, "domain-adaptive | fixed-grouping | complete-pooling | no-domain-grouping")
        ->capture_default_str();
    sub->add_option("--slab-pattern", a.slab_pattern, "node=0|1 list, or sim1-true / sim1-adhoc");
    sub->add_option("--slab-a", a.slab_a)->capture_default_str();
    sub->add_option("--slab-b", a.slab_b)->capture_default_str();
    sub->add_option("--dirichlet-d", a.dirichlet_d)->capture_default_str();
    sub->add_option("--tol", a.tol)->capture_default_str();
    sub->add_option("--hyper-tol", a.hyper_tol)->capture_default_str();
    sub->add_option("--hyper-interval", a.hyper_interval)->capture_default_str();
    sub->add_flag("--relative-tol", a.relative_tol, "scale tol by |ELBO|");
    sub->add_flag("--bounds-on-hyper-only", a.bounds_on_hyper_only, "update local bounds only on hyper sweeps");
    sub->add_flag("--fixed-hyper", a.fixed_hyper, "keep tau and tau* at their starting values");
    sub->add_option("--max-iters", a.max_iters)->capture_default_str();
    sub->add_option("--restarts", a.restarts)->capture_default_str();
    sub->add_option("--seed", a.seed)->capture_default_str();
    sub->add_option("--jobs", a.jobs, "threads for restarts")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tree-informed nested latent class models for multi-source domain adaptation"};
    app.set_version_flag("--version", kVersion);
    app.set_config("--config", "", "TOML config file; flags override it");
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic dataset and its ground truth");
    simulate->add_option("--design", sim.design, "sim1 | semi")->capture_default_str();
    simulate->add_option("--out", sim.out)->capture_default_str();
    simulate->add_option("--n", sim.n, "total subjects")->capture_default_str();
    simulate->add_option("--items", sim.items)->capture_default_str();
    simulate->add_option("--causes", sim.causes)->capture_default_str();
    simulate->add_option("--classes", sim.classes)->capture_default_str();
    simulate->add_option("--allocation", sim.allocation, "balanced | unbalanced")->capture_default_str();
    simulate->add_option("--signal", sim.signal, "strong | weak")->capture_default_str();
    simulate->add_option("--csmf", sim.csmf, "balanced | unbalanced")->capture_default_str();
    simulate->add_option("--profiles", sim.profiles, "shared | cause-blocks")->capture_default_str();
    simulate->add_option("--domain-tree", sim.domain_tree, "domain tree CSV (sim1: replaces the default tree)");
    simulate->add_option("--missing-rate", sim.missing_rate)->capture_default_str();
    simulate->add_option("--seed", sim.seed)->capture_default_str();
    simulate->add_option("--data", sim.data, "fully labelled dataset to mask (semi)");
    simulate->add_option("--cause-tree", sim.cause_tree, "cause tree CSV (semi)");
    simulate->add_option("--fraction", sim.fraction, "uniform split fraction (semi)")->capture_default_str();
    simulate->add_option("--mask-mode", sim.mask_mode, "uniform | beta-mixture (semi)")->capture_default_str();

    FitArgs fit_args;
    auto* fit_cmd = app.add_subcommand("fit", "fit the model and write results");
    add_fit_options(fit_cmd, fit_args, false);

    FitArgs sel_args;
    auto* sel_cmd = app.add_subcommand("select-k", "fit several K and pick the best penalized ELBO");
    add_fit_options(sel_cmd, sel_args, true);

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "score fitted results against ground truth");
    evaluate->add_option("--result", ev.result, "result.json from fit")->check(CLI::ExistingFile);
    evaluate->add_option("--truth", ev.truth, "truth.json from simulate")->check(CLI::ExistingFile);
    evaluate->add_option("--replicates", ev.replicates, "replicate directories");
    evaluate->add_option("--out", ev.out)->capture_default_str();
    evaluate->add_option("--top-k", ev.top_k, "count a hit when the true cause is among the top k")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (*simulate) return run_simulate(sim, *simulate);
        if (*fit_cmd) return run_fit(fit_args, *fit_cmd, !fit_args.candidates.empty());
        if (*sel_cmd) return run_fit(sel_args, *sel_cmd, true);
        if (*evaluate) return run_evaluate(ev, *evaluate);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const TreeParseError& e) {
        std::cerr << "error: tree: " << e.what() << '\n';
        return kInputError;
    } catch (const DatasetError& e) {
        std::cerr << "error: data: " << e.what() << '\n';
        return kInputError;
    } catch (const DesignError& e) {
        std::cerr << "error: design: " << e.what() << '\n';
        return kInputError;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: json: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    }
    return kInputError;
}
