#include "nlcm/vi.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/special_functions/digamma.hpp>

#include "nlcm/rng.hpp"

namespace nlcm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

using Idx = Eigen::Index;

inline Idx ix(std::size_t v) { return static_cast<Idx>(v); }

double digamma(double x) { return boost::math::digamma(x); }

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

double log_multivariate_beta(const Eigen::Ref<const Vector>& v) {
    double s = 0.0;
    for (Idx k = 0; k < v.size(); ++k) s += std::lgamma(v[k]);
    return s - std::lgamma(v.sum());
}

/// E[log pi_c^(g)] for every (g, c).
Matrix expected_log_pi(const Matrix& dirichlet) {
    Matrix out(dirichlet.rows(), dirichlet.cols());
    for (Idx g = 0; g < dirichlet.rows(); ++g) {
        const double total = digamma(dirichlet.row(g).sum());
        for (Idx c = 0; c < dirichlet.cols(); ++c) out(g, c) = digamma(dirichlet(g, c)) - total;
    }
    return out;
}

/// Softmax of `logits` written into `row`; log-sum-exp normalized.
template <class Row>
void normalize_into(Row&& row, const std::vector<double>& logits) {
    const double lse = log_sum_exp(logits);
    for (std::size_t k = 0; k < logits.size(); ++k) row[ix(k)] = std::exp(logits[k] - lse);
}

/// F_{ik}^{(c, D_i)} for every subject, cause and class, laid out as
/// N x (C*K) with column c*K + k.
Matrix compute_f(const VariationalState& s, const VbProblem& pb, const Moments& m) {
    const std::size_t N = pb.N(), C = pb.C(), K = pb.K(), G1 = pb.G1(), J = pb.J();
    const Dataset& data = pb.data();

    // stick-breaking block, per (c, g, k)
    std::vector<Matrix> stick(C, Matrix::Zero(ix(G1), ix(K)));
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t g = 0; g < G1; ++g) {
            double acc = 0.0;  // sum_{m<k} of the h(-eta_m) terms
            for (std::size_t k = 0; k < K; ++k) {
                double val = acc;
                if (k + 1 < K) {
                    const double phi = s.phi[c](ix(g), ix(k));
                    const double mean = m.eta_mean[c](ix(g), ix(k));
                    const double quad = jj_g(phi) * (m.eta_second[c](ix(g), ix(k)) - phi * phi);
                    const double common = log_sigmoid(phi) - 0.5 * phi - quad;
                    val += common + 0.5 * mean;
                    acc += common - 0.5 * mean;
                }
                stick[c](ix(g), ix(k)) = val;
            }
        }
    }

    // response block: base_jk + X*_ij * half_beta_jk summed over observed items
    std::vector<Matrix> base(C, Matrix(ix(J), ix(K)));
    std::vector<Matrix> half(C, Matrix(ix(J), ix(K)));
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t j = 0; j < J; ++j)
            for (std::size_t k = 0; k < K; ++k) {
                const double psi = s.psi[c](ix(j), ix(k));
                base[c](ix(j), ix(k)) = log_sigmoid(psi) - 0.5 * psi -
                                        jj_g(psi) * (m.beta_second[c](ix(j), ix(k)) - psi * psi);
                half[c](ix(j), ix(k)) = 0.5 * m.beta_mean[c](ix(j), ix(k));
            }

    Matrix f(ix(N), ix(C * K));
    for (std::size_t i = 0; i < N; ++i) {
        const std::size_t g = data.domain[i];
        for (std::size_t c = 0; c < C; ++c) {
            for (std::size_t k = 0; k < K; ++k) {
                double v = stick[c](ix(g), ix(k));
                for (auto j : data.items_of[i])
                    v += base[c](ix(j), ix(k)) + data.signed_value(i, j) * half[c](ix(j), ix(k));
                f(ix(i), ix(c * K + k)) = v;
            }
        }
    }
    return f;
}

void update_e_with(VariationalState& s, const VbProblem& pb, const Matrix& f) {
    const std::size_t C = pb.C(), K = pb.K();
    const Dataset& data = pb.data();
    const Matrix elog_pi = expected_log_pi(s.dirichlet);
    std::vector<double> logits(C);
    for (std::size_t i = 0; i < pb.N(); ++i) {
        if (!data.cause_missing(i)) continue;
        const std::size_t g = data.domain[i];
        for (std::size_t c = 0; c < C; ++c) {
            double v = elog_pi(ix(g), ix(c));
            for (std::size_t k = 0; k < K; ++k) v += s.r(ix(i), ix(k)) * f(ix(i), ix(c * K + k));
            logits[c] = v;
        }
        normalize_into(s.e.row(ix(i)), logits);
    }
}

void update_r_with(VariationalState& s, const VbProblem& pb, const Matrix& f) {
    const std::size_t C = pb.C(), K = pb.K();
    std::vector<double> logits(K);
    for (std::size_t i = 0; i < pb.N(); ++i) {
        for (std::size_t k = 0; k < K; ++k) {
            double v = 0.0;
            for (std::size_t c = 0; c < C; ++c) {
                const double ec = s.e(ix(i), ix(c));
                if (ec != 0.0) v += ec * f(ix(i), ix(c * K + k));
            }
            logits[k] = v;
        }
        normalize_into(s.r.row(ix(i)), logits);
    }
}

/// Soft counts feeding the spike-and-slab update, per cause:
///   tail(g,k)   = sum_{i in g} e_ic sum_{m>=k} r_im
///   linear(g,k) = sum_{i in g} e_ic (r_ik / 2 - sum_{m>k} r_im / 2)
struct SlabSums {
    std::vector<Matrix> tail;
    std::vector<Matrix> linear;
};

SlabSums slab_sums(const VariationalState& s, const VbProblem& pb) {
    const std::size_t C = pb.C(), K = pb.K(), G1 = pb.G1();
    SlabSums out;
    out.tail.assign(C, Matrix::Zero(ix(G1), ix(K - 1)));
    out.linear.assign(C, Matrix::Zero(ix(G1), ix(K - 1)));
    std::vector<double> tail(K + 1);
    for (std::size_t i = 0; i < pb.N(); ++i) {
        const std::size_t g = pb.data().domain[i];
        tail[K] = 0.0;
        for (std::size_t k = K; k-- > 0;) tail[k] = tail[k + 1] + s.r(ix(i), ix(k));
        for (std::size_t c = 0; c < C; ++c) {
            const double ec = s.e(ix(i), ix(c));
            if (ec == 0.0) continue;
            for (std::size_t k = 0; k + 1 < K; ++k) {
                out.tail[c](ix(g), ix(k)) += ec * tail[k];
                out.linear[c](ix(g), ix(k)) += ec * 0.5 * (s.r(ix(i), ix(k)) - tail[k + 1]);
            }
        }
    }
    return out;
}

double eta_mean_at(const VariationalState& s, const VbProblem& pb, std::size_t c, std::size_t g,
                   std::size_t k) {
    double v = 0.0;
    for (auto w : pb.domain_ancestors(g)) v += s.slab_prob(ix(c), ix(w)) * s.alpha_mean[c](ix(w), ix(k));
    return v;
}

void update_spike_slab_with(VariationalState& s, const VbProblem& pb, const SlabSums& sums,
                            std::size_t c, std::size_t u) {
    const std::size_t K = pb.K();
    const auto& tree = pb.domain_tree();
    const double prior_var = spike_variance(s, pb, u);
    const Idx level = tree.level(u) - 1;
    double eps = digamma(s.rho_a(ix(c), level)) - digamma(s.rho_b(ix(c), level));
    const double p_old = s.slab_prob(ix(c), ix(u));
    for (std::size_t k = 0; k + 1 < K; ++k) {
        double precision = 1.0 / prior_var;
        double linear = 0.0;
        const double own = p_old * s.alpha_mean[c](ix(u), ix(k));
        for (auto g : pb.domains_below(u)) {
            const double curv = jj_g(s.phi[c](ix(g), ix(k)));
            const double tail = sums.tail[c](ix(g), ix(k));
            precision += 2.0 * curv * tail;
            const double rest = eta_mean_at(s, pb, c, g, k) - own;
            linear += sums.linear[c](ix(g), ix(k)) - 2.0 * curv * tail * rest;
        }
        s.alpha_mean[c](ix(u), ix(k)) = linear / precision;
        s.alpha_var[c](ix(u), ix(k)) = 1.0 / precision;
        eps += linear * linear / (2.0 * precision) - 0.5 * (std::log(prior_var) + std::log(precision));
    }
    if (auto fixed = pb.clamp(c, u)) s.slab_prob(ix(c), ix(u)) = *fixed;
    else s.slab_prob(ix(c), ix(u)) = sigmoid(eps);
}

/// Soft counts feeding the gamma update, per cause:
///   count(j,k)  = sum_{i in I_j} e_ic r_ik
///   signed(j,k) = sum_{i in I_j} e_ic r_ik X*_ij
struct GammaSums {
    std::vector<Matrix> count;
    std::vector<Matrix> signed_count;
};

GammaSums gamma_sums(const VariationalState& s, const VbProblem& pb) {
    const std::size_t C = pb.C(), K = pb.K(), J = pb.J();
    const Dataset& data = pb.data();
    GammaSums out;
    out.count.assign(C, Matrix::Zero(ix(J), ix(K)));
    out.signed_count.assign(C, Matrix::Zero(ix(J), ix(K)));
    for (std::size_t i = 0; i < pb.N(); ++i) {
        for (std::size_t c = 0; c < C; ++c) {
            const double ec = s.e(ix(i), ix(c));
            if (ec == 0.0) continue;
            for (auto j : data.items_of[i]) {
                const double xs = data.signed_value(i, j);
                for (std::size_t k = 0; k < K; ++k) {
                    const double w = ec * s.r(ix(i), ix(k));
                    out.count[c](ix(j), ix(k)) += w;
                    out.signed_count[c](ix(j), ix(k)) += w * xs;
                }
            }
        }
    }
    return out;
}

void update_gamma_with(VariationalState& s, const VbProblem& pb, const GammaSums& sums,
                       std::size_t u) {
    const auto& tree = pb.cause_tree();
    const double prior_var = s.tau_star[tree.level(u) - 1] * tree.weight(u);
    const Idx J = ix(pb.J()), K = ix(pb.K());
    Matrix precision = Matrix::Constant(J, K, 1.0 / prior_var);
    Matrix linear = Matrix::Zero(J, K);
    for (auto c : pb.causes_below(u)) {
        Matrix rest = Matrix::Zero(J, K);
        for (auto w : pb.cause_ancestors(c))
            if (w != u) rest += s.gamma_mean[w];
        const Matrix curv = s.psi[c].unaryExpr([](double v) { return jj_g(v); });
        const Matrix weighted = (curv.array() * sums.count[c].array()).matrix();
        precision += 2.0 * weighted;
        linear += 0.5 * sums.signed_count[c] - 2.0 * (weighted.array() * rest.array()).matrix();
    }
    s.gamma_mean[u] = (linear.array() / precision.array()).matrix();
    s.gamma_var[u] = precision.cwiseInverse();
}

}  // namespace

const char* to_string(ComparatorMode mode) {
    switch (mode) {
        case ComparatorMode::DomainAdaptive: return "domain-adaptive";
        case ComparatorMode::FixedGrouping: return "fixed-grouping";
        case ComparatorMode::CompletePooling: return "complete-pooling";
        case ComparatorMode::NoDomainGrouping: return "no-domain-grouping";
    }
    return "?";
}

ComparatorMode comparator_from_string(const std::string& name) {
    for (auto m : {ComparatorMode::DomainAdaptive, ComparatorMode::FixedGrouping,
                   ComparatorMode::CompletePooling, ComparatorMode::NoDomainGrouping})
        if (name == to_string(m)) return m;
    throw std::invalid_argument("unknown comparator mode: " + name);
}

VbProblem::VbProblem(const Dataset& data, const RootedWeightedTree& domain_tree,
                     const RootedWeightedTree& cause_tree, ModelConfig config)
    : data_(&data), domain_tree_(&domain_tree), cause_tree_(&cause_tree), config_(std::move(config)) {
    if (data.num_domains != domain_tree.num_leaves())
        throw std::invalid_argument("dataset and domain tree disagree on the number of domains");
    if (data.num_causes != cause_tree.num_leaves())
        throw std::invalid_argument("dataset and cause tree disagree on the number of causes");
    if (config_.num_classes < 1) throw std::invalid_argument("K must be at least 1");
    if (config_.num_classes < 2 && !config_.diagnostic)
        throw std::invalid_argument("K < 2 requires diagnostic mode");
    if (!(config_.slab_a > 0 && config_.slab_b > 0 && config_.dirichlet_d > 0 &&
          config_.tau_init > 0 && config_.tau_star_init > 0))
        throw std::invalid_argument("hyperparameters must be positive");

    hyper_ = Hyperparameters::defaults(C(), G1(), domain_tree, cause_tree);
    hyper_.a.setConstant(config_.slab_a);
    hyper_.b.setConstant(config_.slab_b);
    hyper_.d.setConstant(config_.dirichlet_d);
    hyper_.tau.setConstant(config_.tau_init);
    hyper_.tau_star.setConstant(config_.tau_star_init);

    std::vector<std::int8_t> pattern(P(), -1);
    switch (config_.mode) {
        case ComparatorMode::DomainAdaptive: break;
        case ComparatorMode::CompletePooling: std::fill(pattern.begin(), pattern.end(), 0); break;
        case ComparatorMode::NoDomainGrouping: std::fill(pattern.begin(), pattern.end(), 1); break;
        case ComparatorMode::FixedGrouping:
            for (const auto& [id, v] : config_.slab_pattern) {
                if (v != 0 && v != 1) throw std::invalid_argument("slab pattern values must be 0 or 1");
                pattern[domain_tree.index(id)] = static_cast<std::int8_t>(v);
            }
            if (pattern[domain_tree.root()] == 0)
                throw std::invalid_argument("slab pattern must keep the root indicator at 1");
            break;
    }
    pattern[domain_tree.root()] = 1;
    clamp_.assign(C(), pattern);

    domains_below_.resize(P());
    for (std::size_t u = 0; u < P(); ++u) domains_below_[u] = domain_tree.leaf_ranks_below(u);
    causes_below_.resize(Pstar());
    for (std::size_t u = 0; u < Pstar(); ++u) causes_below_[u] = cause_tree.leaf_ranks_below(u);
    for (std::size_t g = 0; g < G1(); ++g) domain_anc_.push_back(domain_tree.ancestors(domain_tree.leaf(g)));
    for (std::size_t c = 0; c < C(); ++c) cause_anc_.push_back(cause_tree.ancestors(cause_tree.leaf(c)));
}

std::optional<std::uint8_t> VbProblem::clamp(std::size_t c, std::size_t u) const {
    const auto v = clamp_.at(c).at(u);
    if (v < 0) return std::nullopt;
    return static_cast<std::uint8_t>(v);
}

double spike_variance(const VariationalState& state, const VbProblem& problem, std::size_t u) {
    const auto& tree = problem.domain_tree();
    return state.tau[tree.level(u) - 1] * tree.weight(u);
}

double alpha_second_moment(const VariationalState& state, const VbProblem& problem, std::size_t c,
                           std::size_t u, std::size_t k) {
    const double p = state.slab_prob(ix(c), ix(u));
    const double mu = state.alpha_mean[c](ix(u), ix(k));
    const double var = state.alpha_var[c](ix(u), ix(k));
    return p * (var + mu * mu) + (1.0 - p) * spike_variance(state, problem, u);
}

Moments compute_moments(const VariationalState& s, const VbProblem& pb) {
    const std::size_t C = pb.C(), K = pb.K(), G1 = pb.G1(), P = pb.P();
    Moments m;
    m.eta_mean.assign(C, Matrix::Zero(ix(G1), ix(K - 1)));
    m.eta_second.assign(C, Matrix::Zero(ix(G1), ix(K - 1)));
    for (std::size_t c = 0; c < C; ++c) {
        Matrix xi_mean(ix(P), ix(K - 1)), xi_var(ix(P), ix(K - 1));
        for (std::size_t u = 0; u < P; ++u) {
            const double p = s.slab_prob(ix(c), ix(u));
            for (std::size_t k = 0; k + 1 < K; ++k) {
                const double mu = s.alpha_mean[c](ix(u), ix(k));
                xi_mean(ix(u), ix(k)) = p * mu;
                xi_var(ix(u), ix(k)) = p * s.alpha_var[c](ix(u), ix(k)) + p * (1.0 - p) * mu * mu;
            }
        }
        for (std::size_t g = 0; g < G1; ++g) {
            for (std::size_t k = 0; k + 1 < K; ++k) {
                double mean = 0.0, var = 0.0;
                for (auto w : pb.domain_ancestors(g)) {
                    mean += xi_mean(ix(w), ix(k));
                    var += xi_var(ix(w), ix(k));
                }
                m.eta_mean[c](ix(g), ix(k)) = mean;
                m.eta_second[c](ix(g), ix(k)) = var + mean * mean;
            }
        }
    }
    m.beta_mean.resize(C);
    m.beta_second.resize(C);
    for (std::size_t c = 0; c < C; ++c) {
        Matrix mean = Matrix::Zero(ix(pb.J()), ix(K));
        Matrix var = Matrix::Zero(ix(pb.J()), ix(K));
        for (auto w : pb.cause_ancestors(c)) {
            mean += s.gamma_mean[w];
            var += s.gamma_var[w];
        }
        m.beta_second[c] = var + mean.cwiseProduct(mean);
        m.beta_mean[c] = std::move(mean);
    }
    return m;
}

VariationalState init_state(const VbProblem& pb, std::uint64_t seed) {
    const std::size_t N = pb.N(), C = pb.C(), K = pb.K(), G1 = pb.G1(), P = pb.P(), J = pb.J();
    const auto& cfg = pb.config();
    const auto& dtree = pb.domain_tree();
    const auto& ctree = pb.cause_tree();
    const Dataset& data = pb.data();
    Rng rng(seed);
    std::normal_distribution<double> noise(0.0, cfg.init_sd);

    VariationalState s;
    s.tau = pb.hyper().tau;
    s.tau_star = pb.hyper().tau_star;

    s.e = Matrix::Constant(ix(N), ix(C), 1.0 / double(C));
    for (std::size_t i = 0; i < N; ++i)
        if (data.cause[i]) {
            s.e.row(ix(i)).setZero();
            s.e(ix(i), ix(*data.cause[i])) = 1.0;
        }
    s.r = Matrix::Constant(ix(N), ix(K), 1.0 / double(K));

    s.dirichlet = pb.hyper().d;
    for (std::size_t i = 0; i < N; ++i) s.dirichlet.row(ix(data.domain[i])) += s.e.row(ix(i));

    s.slab_prob = Matrix::Constant(ix(C), ix(P), 0.5);
    s.alpha_mean.assign(C, Matrix(ix(P), ix(K - 1)));
    s.alpha_var.assign(C, Matrix(ix(P), ix(K - 1)));
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t u = 0; u < P; ++u) {
            if (auto fixed = pb.clamp(c, u)) s.slab_prob(ix(c), ix(u)) = *fixed;
            for (std::size_t k = 0; k + 1 < K; ++k) {
                s.alpha_mean[c](ix(u), ix(k)) = noise(rng);
                s.alpha_var[c](ix(u), ix(k)) = spike_variance(s, pb, u);
            }
        }
    }
    s.gamma_mean.assign(ctree.size(), Matrix(ix(J), ix(K)));
    s.gamma_var.assign(ctree.size(), Matrix(ix(J), ix(K)));
    for (std::size_t u = 0; u < ctree.size(); ++u) {
        const double var = s.tau_star[ctree.level(u) - 1] * ctree.weight(u);
        for (std::size_t j = 0; j < J; ++j)
            for (std::size_t k = 0; k < K; ++k) {
                s.gamma_mean[u](ix(j), ix(k)) = noise(rng);
                s.gamma_var[u](ix(j), ix(k)) = var;
            }
    }
    s.rho_a = pb.hyper().a;
    s.rho_b = pb.hyper().b;
    (void)dtree;

    s.phi.assign(C, Matrix::Zero(ix(G1), ix(K - 1)));
    s.psi.assign(C, Matrix::Zero(ix(J), ix(K)));
    update_local_bounds(s, pb);
    return s;
}

void update_e(VariationalState& s, const VbProblem& pb) {
    update_e_with(s, pb, compute_f(s, pb, compute_moments(s, pb)));
}

void update_r(VariationalState& s, const VbProblem& pb) {
    update_r_with(s, pb, compute_f(s, pb, compute_moments(s, pb)));
}

void update_pi(VariationalState& s, const VbProblem& pb) {
    s.dirichlet = pb.hyper().d;
    for (std::size_t i = 0; i < pb.N(); ++i) s.dirichlet.row(ix(pb.data().domain[i])) += s.e.row(ix(i));
}

void update_spike_slab(VariationalState& s, const VbProblem& pb, std::size_t c, std::size_t u) {
    update_spike_slab_with(s, pb, slab_sums(s, pb), c, u);
}

namespace {

// The sums depend on e, r and phi only, so one evaluation serves every node.
template <class After>
void spike_slab_pass(VariationalState& s, const VbProblem& pb, After&& after) {
    // with K < 2 there are no mixing weights and the indicators see only their prior
    const SlabSums sums = pb.K() < 2 ? SlabSums{} : slab_sums(s, pb);
    for (std::size_t c = 0; c < pb.C(); ++c)
        for (std::size_t u = 0; u < pb.P(); ++u) {
            update_spike_slab_with(s, pb, sums, c, u);
            after();
        }
}

template <class After>
void gamma_pass(VariationalState& s, const VbProblem& pb, After&& after) {
    const GammaSums sums = gamma_sums(s, pb);
    for (std::size_t u = 0; u < pb.Pstar(); ++u) {
        update_gamma_with(s, pb, sums, u);
        after();
    }
}

}  // namespace

void update_spike_slab_all(VariationalState& s, const VbProblem& pb) {
    spike_slab_pass(s, pb, [] {});
}

void update_gamma(VariationalState& s, const VbProblem& pb, std::size_t u) {
    update_gamma_with(s, pb, gamma_sums(s, pb), u);
}

void update_gamma_all(VariationalState& s, const VbProblem& pb) {
    gamma_pass(s, pb, [] {});
}

void update_rho(VariationalState& s, const VbProblem& pb) {
    const auto& tree = pb.domain_tree();
    s.rho_a = pb.hyper().a;
    s.rho_b = pb.hyper().b;
    for (std::size_t c = 0; c < pb.C(); ++c)
        for (std::size_t u = 0; u < pb.P(); ++u) {
            const double p = s.slab_prob(ix(c), ix(u));
            s.rho_a(ix(c), tree.level(u) - 1) += p;
            s.rho_b(ix(c), tree.level(u) - 1) += 1.0 - p;
        }
}

void update_local_bounds(VariationalState& s, const VbProblem& pb) {
    const Moments m = compute_moments(s, pb);
    for (std::size_t c = 0; c < pb.C(); ++c) {
        s.phi[c] = m.eta_second[c].cwiseSqrt();
        s.psi[c] = m.beta_second[c].cwiseSqrt();
    }
}

void update_hyperparams(VariationalState& s, const VbProblem& pb) {
    const std::size_t C = pb.C(), K = pb.K(), J = pb.J();
    const auto& dtree = pb.domain_tree();
    const auto& ctree = pb.cause_tree();
    if (K >= 2) {
        Vector next = s.tau;
        const auto levels = dtree.nodes_by_level();
        for (std::size_t l = 0; l < levels.size(); ++l) {
            if (levels[l].empty()) continue;  // keep tau_l
            double total = 0.0, mass = 0.0;
            for (auto u : levels[l])
                for (std::size_t c = 0; c < C; ++c)
                    for (std::size_t k = 0; k + 1 < K; ++k) {
                        const double p = s.slab_prob(ix(c), ix(u));
                        const double mu = s.alpha_mean[c](ix(u), ix(k));
                        total += p * (s.alpha_var[c](ix(u), ix(k)) + mu * mu) / dtree.weight(u);
                        mass += p;
                    }
            if (mass > 0.0) next[ix(l)] = total / mass;
        }
        s.tau = next;
    }
    const auto levels = ctree.nodes_by_level();
    for (std::size_t l = 0; l < levels.size(); ++l) {
        if (levels[l].empty()) continue;
        double total = 0.0;
        for (auto u : levels[l]) {
            const Matrix second = s.gamma_var[u] + s.gamma_mean[u].cwiseProduct(s.gamma_mean[u]);
            total += second.sum() / ctree.weight(u);
        }
        s.tau_star[ix(l)] = total / (double(J) * double(K) * double(levels[l].size()));
    }
}

ElboTerms elbo_terms(const VariationalState& s, const VbProblem& pb) {
    const std::size_t N = pb.N(), C = pb.C(), K = pb.K(), G1 = pb.G1(), P = pb.P();
    const Dataset& data = pb.data();
    const auto& dtree = pb.domain_tree();
    const auto& ctree = pb.cause_tree();
    const auto& hyper = pb.hyper();
    const Moments m = compute_moments(s, pb);
    const Matrix f = compute_f(s, pb, m);
    const Matrix elog_pi = expected_log_pi(s.dirichlet);

    ElboTerms t;
    for (std::size_t i = 0; i < N; ++i) {
        const std::size_t g = data.domain[i];
        for (std::size_t c = 0; c < C; ++c) {
            const double ec = s.e(ix(i), ix(c));
            if (ec == 0.0) continue;
            double v = elog_pi(ix(g), ix(c));
            for (std::size_t k = 0; k < K; ++k) v += s.r(ix(i), ix(k)) * f(ix(i), ix(c * K + k));
            t.likelihood += ec * v;
        }
        if (data.cause_missing(i))
            for (std::size_t c = 0; c < C; ++c) t.entropy_categorical -= xlogx(s.e(ix(i), ix(c)));
        for (std::size_t k = 0; k < K; ++k) t.entropy_categorical -= xlogx(s.r(ix(i), ix(k)));
    }

    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t u = 0; u < P; ++u) {
            const double v0 = spike_variance(s, pb, u);
            const double p = s.slab_prob(ix(c), ix(u));
            const Idx level = dtree.level(u) - 1;
            for (std::size_t k = 0; k + 1 < K; ++k) {
                t.domain_gauss += -0.5 * (kLog2Pi + std::log(v0)) -
                                  alpha_second_moment(s, pb, c, u, k) / (2.0 * v0);
                const double v1 = s.alpha_var[c](ix(u), ix(k));
                if (p > 0.0) t.entropy_alpha += 0.5 * p * (1.0 + kLog2Pi + std::log(v1));
                if (p < 1.0) t.entropy_alpha += 0.5 * (1.0 - p) * (1.0 + kLog2Pi + std::log(v0));
            }
            const double a = s.rho_a(ix(c), level), b = s.rho_b(ix(c), level);
            const double elog_rho = digamma(a) - digamma(a + b);
            const double elog_1m = digamma(b) - digamma(a + b);
            t.slab_prior += p * elog_rho + (1.0 - p) * elog_1m;
            if (!pb.clamp(c, u)) t.entropy_slab -= xlogx(p) + xlogx(1.0 - p);
        }
        for (Idx l = 0; l < s.rho_a.cols(); ++l) {
            const double a1 = s.rho_a(ix(c), l), b1 = s.rho_b(ix(c), l);
            const double a0 = hyper.a(ix(c), l), b0 = hyper.b(ix(c), l);
            const double elog_rho = digamma(a1) - digamma(a1 + b1);
            const double elog_1m = digamma(b1) - digamma(a1 + b1);
            t.beta_prior += (a0 - 1.0) * elog_rho + (b0 - 1.0) * elog_1m -
                            (std::lgamma(a0) + std::lgamma(b0) - std::lgamma(a0 + b0));
            t.entropy_beta -= (a1 - 1.0) * elog_rho + (b1 - 1.0) * elog_1m -
                              (std::lgamma(a1) + std::lgamma(b1) - std::lgamma(a1 + b1));
        }
    }

    for (std::size_t u = 0; u < ctree.size(); ++u) {
        const double v = s.tau_star[ctree.level(u) - 1] * ctree.weight(u);
        const Matrix second = s.gamma_var[u] + s.gamma_mean[u].cwiseProduct(s.gamma_mean[u]);
        const double count = double(second.size());
        t.cause_gauss += -0.5 * count * (kLog2Pi + std::log(v)) - second.sum() / (2.0 * v);
        t.entropy_gamma += 0.5 * (count * (1.0 + kLog2Pi) + s.gamma_var[u].array().log().sum());
    }

    for (std::size_t g = 0; g < G1; ++g) {
        const Vector prior = hyper.d.row(ix(g)).transpose();
        const Vector post = s.dirichlet.row(ix(g)).transpose();
        for (std::size_t c = 0; c < C; ++c) {
            t.dirichlet_prior += (prior[ix(c)] - 1.0) * elog_pi(ix(g), ix(c));
            t.entropy_dirichlet -= (post[ix(c)] - 1.0) * elog_pi(ix(g), ix(c));
        }
        t.dirichlet_prior -= log_multivariate_beta(prior);
        t.entropy_dirichlet += log_multivariate_beta(post);
    }
    return t;
}

double compute_elbo(const VariationalState& s, const VbProblem& pb) {
    const ElboTerms t = elbo_terms(s, pb);
    const std::pair<const char*, double> blocks[] = {
        {"likelihood", t.likelihood},           {"domain_gauss", t.domain_gauss},
        {"cause_gauss", t.cause_gauss},         {"slab_prior", t.slab_prior},
        {"beta_prior", t.beta_prior},           {"dirichlet_prior", t.dirichlet_prior},
        {"entropy_dirichlet", t.entropy_dirichlet}, {"entropy_alpha", t.entropy_alpha},
        {"entropy_gamma", t.entropy_gamma},
        {"entropy_categorical", t.entropy_categorical}, {"entropy_slab", t.entropy_slab},
        {"entropy_beta", t.entropy_beta}};
    for (const auto& [name, value] : blocks)
        if (!std::isfinite(value)) throw NumericalError(name, value);
    return t.total();
}

double sweep(VariationalState& s, const VbProblem& pb, const FitControls& controls, int t,
             bool force_hyper) {
    const auto note = [&](const char* step) {
        if (controls.on_update) controls.on_update(step, s);
    };
    {
        const Matrix f = compute_f(s, pb, compute_moments(s, pb));
        update_e_with(s, pb, f);
        note("e");
        update_r_with(s, pb, f);
        note("r");
    }
    update_pi(s, pb);
    note("pi");
    spike_slab_pass(s, pb, [&] { note("spike-slab"); });
    gamma_pass(s, pb, [&] { note("gamma"); });
    update_rho(s, pb);
    note("rho");
    const bool hyper_step = force_hyper || (controls.hyper_interval > 0 && t % controls.hyper_interval == 0);
    if (controls.local_bounds_every_sweep || hyper_step) {
        update_local_bounds(s, pb);
        note("local-bounds");
    }
    if (controls.update_hyper && hyper_step) {
        update_hyperparams(s, pb);
        note("hyperparameters");
    }
    const double elbo = compute_elbo(s, pb);
    s.elbo_trace.push_back(elbo);
    return elbo;
}

Vector csmf_mean(const VariationalState& s, std::size_t domain) {
    const Vector row = s.dirichlet.row(ix(domain)).transpose();
    return row / row.sum();
}

Vector lambda_at_mean(const VariationalState& s, const VbProblem& pb, std::size_t c, std::size_t g) {
    Vector eta(ix(pb.K() - 1));
    for (std::size_t k = 0; k + 1 < pb.K(); ++k) eta[ix(k)] = eta_mean_at(s, pb, c, g, k);
    return stick_break(eta);
}

}  // namespace nlcm
