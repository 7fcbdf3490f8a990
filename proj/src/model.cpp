#include "nlcm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace nlcm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double log_beta_fn(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

double log_multivariate_beta(const Eigen::Ref<const Vector>& d) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < d.size(); ++c) s += std::lgamma(d[c]);
    return s - std::lgamma(d.sum());
}

double gaussian_logpdf_zero_mean(double x, double var) {
    return -0.5 * (kLog2Pi + std::log(var)) - 0.5 * x * x / var;
}

}  // namespace

double sigmoid(double x) {
    x = std::clamp(x, -kSigmoidClamp, kSigmoidClamp);
    return 1.0 / (1.0 + std::exp(-x));
}

double log_sigmoid(double x) {
    return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

double jj_g(double psi) {
    const double a = std::abs(psi);
    if (a < 1e-4) {
        const double a2 = a * a;
        return 0.125 - a2 / 96.0 + a2 * a2 / 960.0;
    }
    return std::tanh(0.5 * a) / (4.0 * a);
}

double jj_log_lower_bound(double x, double psi) {
    return log_sigmoid(psi) + 0.5 * (x - psi) - jj_g(psi) * (x * x - psi * psi);
}

double jj_lower_bound(double x, double psi) { return std::exp(jj_log_lower_bound(x, psi)); }

double log_sum_exp(std::span<const double> v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

Vector stick_break(std::span<const double> eta) {
    Vector lambda(static_cast<Eigen::Index>(eta.size() + 1));
    double remaining = 1.0;
    for (std::size_t k = 0; k < eta.size(); ++k) {
        if (!std::isfinite(eta[k])) throw DomainError("stick_break: non-finite input");
        lambda[Eigen::Index(k)] = remaining * sigmoid(eta[k]);
        remaining *= sigmoid(-eta[k]);
    }
    lambda[Eigen::Index(eta.size())] = remaining;
    return lambda;
}

Vector log_stick_break(std::span<const double> eta) {
    Vector out(static_cast<Eigen::Index>(eta.size() + 1));
    double acc = 0.0;
    for (std::size_t k = 0; k < eta.size(); ++k) {
        if (!std::isfinite(eta[k])) throw DomainError("stick_break: non-finite input");
        out[Eigen::Index(k)] = acc + log_sigmoid(eta[k]);
        acc += log_sigmoid(-eta[k]);
    }
    out[Eigen::Index(eta.size())] = acc;
    return out;
}

Vector stick_break_inverse(std::span<const double> lambda) {
    if (lambda.empty()) throw DomainError("stick_break_inverse: empty input");
    const std::size_t K = lambda.size();
    Vector eta(static_cast<Eigen::Index>(K - 1));
    // tail[k] = sum_{m >= k} lambda_m, accumulated from the end for accuracy
    std::vector<double> tail(K + 1, 0.0);
    for (std::size_t k = K; k-- > 0;) {
        if (!(lambda[k] >= 0.0) || !std::isfinite(lambda[k]))
            throw DomainError("stick_break_inverse: entries must be finite and nonnegative");
        tail[k] = tail[k + 1] + lambda[k];
    }
    for (std::size_t k = 0; k + 1 < K; ++k) {
        if (lambda[k] <= 0.0 || tail[k + 1] <= 0.0)
            throw DomainError("stick_break_inverse: point on the simplex boundary");
        eta[Eigen::Index(k)] = std::log(lambda[k]) - std::log(tail[k + 1]);
    }
    return eta;
}

DomainMixingParams DomainMixingParams::zeros(std::size_t num_causes, std::size_t num_nodes,
                                             std::size_t num_levels, std::size_t num_classes) {
    DomainMixingParams p;
    p.alpha.assign(num_causes, Matrix::Zero(Eigen::Index(num_nodes), Eigen::Index(num_classes - 1)));
    p.slab.assign(num_causes, std::vector<std::uint8_t>(num_nodes, 1));
    p.rho = Matrix::Constant(Eigen::Index(num_causes), Eigen::Index(num_levels), 0.5);
    return p;
}

Vector eta_from_tree(const DomainMixingParams& params, const RootedWeightedTree& tree,
                     std::size_t leaf_node, std::size_t cause) {
    if (!tree.is_leaf(leaf_node)) throw DomainError("eta_from_tree: node is not a leaf");
    const Matrix& alpha = params.alpha.at(cause);
    Vector eta = Vector::Zero(alpha.cols());
    for (auto u : tree.ancestors(leaf_node))
        if (params.slab[cause][u]) eta += alpha.row(Eigen::Index(u)).transpose();
    return eta;
}

Vector eta_for_domain(const DomainMixingParams& params, const RootedWeightedTree& tree,
                      std::size_t domain, std::size_t cause) {
    return eta_from_tree(params, tree, tree.leaf(domain), cause);
}

ResponseProfileParams ResponseProfileParams::zeros(std::size_t num_nodes, std::size_t num_items,
                                                   std::size_t num_classes) {
    ResponseProfileParams p;
    p.gamma.assign(num_nodes, Matrix::Zero(Eigen::Index(num_items), Eigen::Index(num_classes)));
    return p;
}

Matrix beta_from_gamma(const ResponseProfileParams& params, const RootedWeightedTree& cause_tree,
                       std::size_t leaf_node) {
    if (!cause_tree.is_leaf(leaf_node)) throw DomainError("theta_from_gamma: node is not a leaf");
    Matrix beta = Matrix::Zero(params.gamma.at(0).rows(), params.gamma.at(0).cols());
    for (auto u : cause_tree.ancestors(leaf_node)) beta += params.gamma.at(u);
    return beta;
}

Matrix theta_from_gamma(const ResponseProfileParams& params, const RootedWeightedTree& cause_tree,
                        std::size_t leaf_node) {
    return beta_from_gamma(params, cause_tree, leaf_node).unaryExpr([](double b) { return sigmoid(b); });
}

Hyperparameters Hyperparameters::defaults(std::size_t num_causes, std::size_t num_domains,
                                          const RootedWeightedTree& domain_tree,
                                          const RootedWeightedTree& cause_tree) {
    Hyperparameters h;
    const auto C = Eigen::Index(num_causes);
    h.a = Matrix::Ones(C, domain_tree.num_levels());
    h.b = Matrix::Ones(C, domain_tree.num_levels());
    h.d = Matrix::Ones(Eigen::Index(num_domains), C);
    h.tau = Vector::Ones(domain_tree.num_levels());
    h.tau_star = Vector::Ones(cause_tree.num_levels());
    return h;
}

double class_conditional_loglik(std::span<const std::uint8_t> x_row,
                                std::span<const std::size_t> observed_items, const Matrix& theta,
                                const Vector& lambda) {
    const Eigen::Index K = theta.cols();
    if (lambda.size() != K) throw std::invalid_argument("lambda and theta disagree on K");
    std::vector<double> terms(static_cast<std::size_t>(K));
    for (Eigen::Index k = 0; k < K; ++k) {
        double s = std::log(lambda[k]);
        for (auto j : observed_items) {
            const double t = theta(Eigen::Index(j), k);
            if (!(t > 0.0 && t < 1.0)) throw DomainError("theta outside (0,1)");
            s += x_row[j] ? std::log(t) : std::log1p(-t);
        }
        terms[std::size_t(k)] = s;
    }
    return log_sum_exp(terms);
}

namespace {

struct PriorBlocks {
    double domain_gauss = 0.0, cause_gauss = 0.0, slab = 0.0, beta = 0.0, dirichlet = 0.0;
};

PriorBlocks prior_blocks(const RootedWeightedTree& domain_tree, const RootedWeightedTree& cause_tree,
                         const CompleteParams& params, const Hyperparameters& hyper) {
    PriorBlocks out;
    const auto& mix = params.mixing;
    const std::size_t C = mix.num_causes();
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t u = 0; u < domain_tree.size(); ++u) {
            const double var = hyper.tau[domain_tree.level(u) - 1] * domain_tree.weight(u);
            for (Eigen::Index k = 0; k < mix.alpha[c].cols(); ++k)
                out.domain_gauss += gaussian_logpdf_zero_mean(mix.alpha[c](Eigen::Index(u), k), var);
            const double rho = mix.rho(Eigen::Index(c), domain_tree.level(u) - 1);
            out.slab += mix.slab[c][u] ? std::log(rho) : std::log1p(-rho);
        }
        for (Eigen::Index l = 0; l < mix.rho.cols(); ++l) {
            const double rho = mix.rho(Eigen::Index(c), l);
            const double a = hyper.a(Eigen::Index(c), l), b = hyper.b(Eigen::Index(c), l);
            out.beta += (a - 1.0) * std::log(rho) + (b - 1.0) * std::log1p(-rho) - log_beta_fn(a, b);
        }
    }
    for (std::size_t u = 0; u < cause_tree.size(); ++u) {
        const double var = hyper.tau_star[cause_tree.level(u) - 1] * cause_tree.weight(u);
        const Matrix& g = params.profiles.gamma[u];
        for (Eigen::Index j = 0; j < g.rows(); ++j)
            for (Eigen::Index k = 0; k < g.cols(); ++k)
                out.cause_gauss += gaussian_logpdf_zero_mean(g(j, k), var);
    }
    const Matrix& pi = params.csmf.pi;
    for (Eigen::Index g = 0; g < pi.rows(); ++g) {
        for (Eigen::Index c = 0; c < pi.cols(); ++c)
            out.dirichlet += (hyper.d(g, c) - 1.0) * std::log(pi(g, c));
        out.dirichlet -= log_multivariate_beta(hyper.d.row(g).transpose());
    }
    return out;
}

template <class MixingTerm, class ResponseTerm>
LogJointTerms assemble(const Dataset& data, const RootedWeightedTree& domain_tree,
                       const RootedWeightedTree& cause_tree, const CompleteParams& params,
                       const Hyperparameters& hyper, MixingTerm mixing_term,
                       ResponseTerm response_term) {
    const std::size_t C = params.mixing.num_causes();
    const std::size_t G1 = data.num_domains;
    if (params.cause.size() != data.num_subjects || params.z.size() != data.num_subjects)
        throw std::invalid_argument("completed Y / Z must have one entry per subject");
    if (std::size_t(params.csmf.pi.rows()) != G1 || std::size_t(params.csmf.pi.cols()) != C)
        throw std::invalid_argument("pi has the wrong shape");

    std::vector<Vector> eta(C * G1);
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t g = 0; g < G1; ++g) eta[c * G1 + g] = eta_for_domain(params.mixing, domain_tree, g, c);
    std::vector<Matrix> beta(C);
    for (std::size_t c = 0; c < C; ++c) beta[c] = beta_from_gamma(params.profiles, cause_tree, cause_tree.leaf(c));

    LogJointTerms t;
    for (std::size_t i = 0; i < data.num_subjects; ++i) {
        const std::size_t g = data.domain[i], c = params.cause[i], z = params.z[i];
        t.cause += std::log(params.csmf.pi(Eigen::Index(g), Eigen::Index(c)));
        t.mixing += mixing_term(eta[c * G1 + g], c, g, z);
        for (auto j : data.items_of[i])
            t.response += response_term(data.signed_value(i, j) * beta[c](Eigen::Index(j), Eigen::Index(z)), c, j, z);
    }
    const auto prior = prior_blocks(domain_tree, cause_tree, params, hyper);
    t.domain_gauss = prior.domain_gauss;
    t.cause_gauss = prior.cause_gauss;
    t.slab = prior.slab;
    t.beta = prior.beta;
    t.dirichlet = prior.dirichlet;
    return t;
}

}  // namespace

LogJointTerms log_joint(const Dataset& data, const RootedWeightedTree& domain_tree,
                        const RootedWeightedTree& cause_tree, const CompleteParams& params,
                        const Hyperparameters& hyper) {
    return assemble(
        data, domain_tree, cause_tree, params, hyper,
        [](const Vector& eta, std::size_t, std::size_t, std::size_t z) {
            return log_stick_break(std::span<const double>(eta.data(), std::size_t(eta.size())))[Eigen::Index(z)];
        },
        [](double signed_beta, std::size_t, std::size_t, std::size_t) { return log_sigmoid(signed_beta); });
}

LogJointTerms log_h(const Dataset& data, const RootedWeightedTree& domain_tree,
                    const RootedWeightedTree& cause_tree, const CompleteParams& params,
                    const LocalBounds& bounds, const Hyperparameters& hyper) {
    return assemble(
        data, domain_tree, cause_tree, params, hyper,
        [&](const Vector& eta, std::size_t c, std::size_t g, std::size_t z) {
            const Matrix& phi = bounds.phi.at(c);
            const auto Km1 = std::size_t(eta.size());
            double s = 0.0;
            for (std::size_t m = 0; m < std::min(z, Km1); ++m)
                s += jj_log_lower_bound(-eta[Eigen::Index(m)], phi(Eigen::Index(g), Eigen::Index(m)));
            if (z < Km1) s += jj_log_lower_bound(eta[Eigen::Index(z)], phi(Eigen::Index(g), Eigen::Index(z)));
            return s;
        },
        [&](double signed_beta, std::size_t c, std::size_t j, std::size_t z) {
            return jj_log_lower_bound(signed_beta, bounds.psi.at(c)(Eigen::Index(j), Eigen::Index(z)));
        });
}

double prior_correlation(const RootedWeightedTree& tree, std::size_t v, std::size_t v2) {
    if (!tree.is_leaf(v) || !tree.is_leaf(v2)) throw DomainError("prior_correlation: leaves only");
    const auto av = tree.ancestors(v);
    const auto av2 = tree.ancestors(v2);
    double dv = 0.0, dv2 = 0.0, shared = 0.0;
    for (auto u : av) dv += tree.weight(u);
    for (auto u : av2) dv2 += tree.weight(u);
    // both lists are root-first, so the shared prefix is a(v) ∩ a(v2)
    for (std::size_t k = 0; k < std::min(av.size(), av2.size()) && av[k] == av2[k]; ++k)
        shared += tree.weight(av[k]);
    return shared / std::sqrt(dv * dv2);
}

}  // namespace nlcm
