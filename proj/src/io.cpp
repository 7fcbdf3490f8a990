#include "nlcm/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "nlcm/metrics.hpp"
#include "text.hpp"

namespace nlcm {

namespace {

using Idx = Eigen::Index;
using Json = nlohmann::ordered_json;
using detail::format_double;

std::vector<double> row_vector(const Matrix& m, Idx r) {
    std::vector<double> out;
    for (Idx c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
    return out;
}

}  // namespace

std::string fit_result_json(const FitResult& result, const VbProblem& problem) {
    const Dataset& data = problem.data();
    const auto& tree = problem.domain_tree();
    const auto& s = result.state;
    Json j;
    j["num_classes"] = result.num_classes;
    j["mode"] = to_string(result.mode);
    j["slab_pattern"] = result.slab_pattern;
    j["seed"] = result.seed;
    j["best_restart"] = result.best_restart;
    j["converged"] = result.converged;
    j["iterations"] = result.iterations;
    j["final_elbo"] = result.final_elbo();
    j["cause_labels"] = data.cause_labels;
    j["domain_labels"] = data.domain_labels;

    const Vector pi0 = csmf_mean(s, 0);
    j["pi0_mean"] = std::vector<double>(pi0.data(), pi0.data() + pi0.size());
    j["pi0_dirichlet_params"] = row_vector(s.dirichlet, 0);

    Json target = Json::array();
    for (auto i : data.domain_members[0]) {
        Json row;
        row["id"] = data.subject_ids[i];
        row["probs"] = row_vector(s.e, Idx(i));
        target.push_back(row);
    }
    j["target_cause_probs"] = target;

    std::vector<std::string> nodes;
    for (std::size_t u = 0; u < tree.size(); ++u) nodes.push_back(tree.id(u));
    j["domain_nodes"] = nodes;
    j["domain_tree"] = serialize_tree(tree);
    Json slab = Json::object();
    for (std::size_t c = 0; c < problem.C(); ++c) slab[data.cause_labels[c]] = row_vector(s.slab_prob, Idx(c));
    j["slab_prob"] = slab;
    j["tau"] = std::vector<double>(s.tau.data(), s.tau.data() + s.tau.size());
    j["tau_star"] = std::vector<double>(s.tau_star.data(), s.tau_star.data() + s.tau_star.size());

    Json restarts = Json::array();
    for (const auto& r : result.restarts) {
        Json row;
        row["seed"] = r.seed;
        row["final_elbo"] = r.final_elbo;
        row["iterations"] = r.iterations;
        row["converged"] = r.converged;
        if (r.failed) row["failure"] = r.failure;
        restarts.push_back(row);
    }
    j["restarts"] = restarts;
    j["elbo_trace"] = result.elbo_trace;
    return j.dump(2) + "\n";
}

FitSummary parse_fit_result(const std::string& document) {
    const Json j = Json::parse(document);
    FitSummary out;
    out.cause_labels = j.at("cause_labels").get<std::vector<std::string>>();
    out.domain_labels = j.at("domain_labels").get<std::vector<std::string>>();
    out.domain_nodes = j.at("domain_nodes").get<std::vector<std::string>>();
    out.converged = j.at("converged").get<bool>();
    out.domain_tree = j.at("domain_tree").get<std::string>();
    out.mode = j.at("mode").get<std::string>();
    const auto pi = j.at("pi0_mean").get<std::vector<double>>();
    out.pi0_mean = Eigen::Map<const Vector>(pi.data(), Idx(pi.size()));
    const std::size_t C = out.cause_labels.size();
    if (pi.size() != C) throw std::runtime_error("pi0_mean length differs from the cause count");

    const auto& target = j.at("target_cause_probs");
    out.target_cause_probs.resize(Idx(target.size()), Idx(C));
    for (std::size_t i = 0; i < target.size(); ++i) {
        out.target_subjects.push_back(target[i].at("id").get<std::string>());
        const auto probs = target[i].at("probs").get<std::vector<double>>();
        if (probs.size() != C) throw std::runtime_error("cause probability row has the wrong length");
        for (std::size_t c = 0; c < C; ++c) out.target_cause_probs(Idx(i), Idx(c)) = probs[c];
    }
    out.slab_prob.resize(Idx(C), Idx(out.domain_nodes.size()));
    const auto& slab = j.at("slab_prob");
    for (std::size_t c = 0; c < C; ++c) {
        const auto row = slab.at(out.cause_labels[c]).get<std::vector<double>>();
        if (row.size() != out.domain_nodes.size()) throw std::runtime_error("slab row has the wrong length");
        for (std::size_t u = 0; u < row.size(); ++u) out.slab_prob(Idx(c), Idx(u)) = row[u];
    }
    return out;
}

std::string e_matrix_csv(const FitResult& result, const Dataset& data) {
    std::ostringstream out;
    out << "id,domain";
    for (const auto& c : data.cause_labels) out << ',' << c;
    out << '\n';
    for (std::size_t i = 0; i < data.num_subjects; ++i) {
        out << data.subject_ids[i] << ',' << data.domain_labels[data.domain[i]];
        for (std::size_t c = 0; c < data.num_causes; ++c)
            out << ',' << format_double(result.state.e(Idx(i), Idx(c)));
        out << '\n';
    }
    return out.str();
}

std::string pi_summary_csv(const FitResult& result, const Dataset& data) {
    std::ostringstream out;
    out << "domain,cause,dirichlet,mean\n";
    for (std::size_t g = 0; g < data.num_domains; ++g) {
        const Vector mean = csmf_mean(result.state, g);
        for (std::size_t c = 0; c < data.num_causes; ++c)
            out << data.domain_labels[g] << ',' << data.cause_labels[c] << ','
                << format_double(result.state.dirichlet(Idx(g), Idx(c))) << ','
                << format_double(mean[Idx(c)]) << '\n';
    }
    return out.str();
}

std::string cophenetic_csv(const Matrix& table, const Dataset& data) {
    std::ostringstream out;
    out << "cause";
    for (std::size_t g = 1; g < data.num_domains; ++g) out << ',' << data.domain_labels[g];
    out << '\n';
    for (std::size_t c = 0; c < data.num_causes; ++c) {
        out << data.cause_labels[c];
        for (std::size_t g = 1; g < data.num_domains; ++g) out << ',' << format_double(table(Idx(c), Idx(g)));
        out << '\n';
    }
    return out.str();
}

std::string elbo_trace_csv(const std::vector<double>& trace) {
    std::ostringstream out;
    out << "iteration,elbo\n";
    for (std::size_t t = 0; t < trace.size(); ++t) out << t << ',' << format_double(trace[t]) << '\n';
    return out.str();
}

void write_text(const std::string& path, const std::string& text) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
    if (!f) throw std::runtime_error("failed writing " + path);
}

}  // namespace nlcm
