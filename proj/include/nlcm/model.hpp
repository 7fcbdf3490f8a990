#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "nlcm/dataset.hpp"
#include "nlcm/tree.hpp"

namespace nlcm {

/// Input outside the domain of a reparameterization.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Scalar primitives

/// Sigmoids saturate at |x| = 35; beyond that exp overflows nothing but the
/// result is already 1 to double precision.
inline constexpr double kSigmoidClamp = 35.0;

double sigmoid(double x);
double log_sigmoid(double x);
double logit(double p);

/// Jaakkola-Jordan curvature g(psi) = (sigmoid(psi) - 1/2) / (2 psi); even in
/// psi, equal to 1/8 at 0.
double jj_g(double psi);
/// log h(x, psi) where h(x, psi) = sigmoid(psi) exp{(x - psi)/2 - g(psi)(x^2 - psi^2)}.
double jj_log_lower_bound(double x, double psi);
/// h(x, psi) <= sigmoid(x), with equality at x = +-psi.
double jj_lower_bound(double x, double psi);

/// log sum exp over a span; -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> v);

// ---------------------------------------------------------------------------
// Stick breaking

/// Logistic stick breaking: lambda_k = sigmoid(eta_k)^{1{k<K}} prod_{s<k} sigmoid(-eta_s).
/// Takes K-1 reals, returns a K-simplex vector.
Vector stick_break(std::span<const double> eta);
inline Vector stick_break(const Vector& eta) {
    return stick_break(std::span<const double>(eta.data(), static_cast<std::size_t>(eta.size())));
}
/// log lambda computed without forming lambda.
Vector log_stick_break(std::span<const double> eta);
/// Inverse of stick_break on the interior of the simplex.
Vector stick_break_inverse(std::span<const double> lambda);
inline Vector stick_break_inverse(const Vector& lambda) {
    return stick_break_inverse(
        std::span<const double>(lambda.data(), static_cast<std::size_t>(lambda.size())));
}

// ---------------------------------------------------------------------------
// Parameter containers

/// Domain-tree parameters of the class mixing weights.
///
/// alpha[c] is p x (K-1), slab[c][u] in {0,1} with the root fixed at 1, and
/// rho is C x L. The effective increments xi = s * alpha and the leaf sums
/// eta are derived on demand.
struct DomainMixingParams {
    std::vector<Matrix> alpha;
    std::vector<std::vector<std::uint8_t>> slab;
    Matrix rho;

    std::size_t num_causes() const { return alpha.size(); }
    std::size_t num_classes() const { return alpha.empty() ? 0 : std::size_t(alpha[0].cols()) + 1; }

    static DomainMixingParams zeros(std::size_t num_causes, std::size_t num_nodes,
                                    std::size_t num_levels, std::size_t num_classes);
};

/// eta^{(c,g)} for the leaf of rank `leaf`: ancestor sum of s * alpha.
Vector eta_from_tree(const DomainMixingParams& params, const RootedWeightedTree& tree,
                     std::size_t leaf_node, std::size_t cause);
/// Same, addressed by leaf rank (domain label).
Vector eta_for_domain(const DomainMixingParams& params, const RootedWeightedTree& tree,
                      std::size_t domain, std::size_t cause);

/// Cause-tree parameters of the response probabilities. gamma[u] is J x K.
struct ResponseProfileParams {
    std::vector<Matrix> gamma;

    static ResponseProfileParams zeros(std::size_t num_nodes, std::size_t num_items,
                                       std::size_t num_classes);
};

/// beta^{(c)} = ancestor sum of gamma along a(c), for cause-tree leaf node c.
Matrix beta_from_gamma(const ResponseProfileParams& params, const RootedWeightedTree& cause_tree,
                       std::size_t leaf_node);
/// theta^{(c)} = expit(beta^{(c)}).
Matrix theta_from_gamma(const ResponseProfileParams& params, const RootedWeightedTree& cause_tree,
                        std::size_t leaf_node);

/// CSMFs per domain, one C-simplex per row.
struct CsmfParams {
    Matrix pi;  // (G+1) x C
};

struct LatentAssignments {
    std::vector<std::size_t> z;
};

/// Fixed hyperparameters of the prior. a, b are C x L; d is (G+1) x C;
/// tau has one entry per domain-tree level and tau_star one per cause-tree
/// level.
struct Hyperparameters {
    Matrix a;
    Matrix b;
    Matrix d;
    Vector tau;
    Vector tau_star;

    /// a = b = 1, d = 1, tau = tau* = 1.
    static Hyperparameters defaults(std::size_t num_causes, std::size_t num_domains,
                                    const RootedWeightedTree& domain_tree,
                                    const RootedWeightedTree& cause_tree);
};

/// log sum_k lambda_k prod_{j in observed} theta_jk^{x_j} (1 - theta_jk)^{1 - x_j}.
/// `x_row` holds the full response row; only positions listed in
/// `observed_items` are read.
double class_conditional_loglik(std::span<const std::uint8_t> x_row,
                                std::span<const std::size_t> observed_items, const Matrix& theta,
                                const Vector& lambda);

/// A complete instantiation of every unknown, as used by the bounded and the
/// exact log-joint.
struct CompleteParams {
    DomainMixingParams mixing;
    ResponseProfileParams profiles;
    CsmfParams csmf;
    std::vector<std::size_t> cause;  // completed Y, length N
    std::vector<std::size_t> z;      // length N
};

/// Jaakkola-Jordan tuning parameters: phi[c] is (G+1) x (K-1), psi[c] is J x K.
struct LocalBounds {
    std::vector<Matrix> phi;
    std::vector<Matrix> psi;
};

/// Breakdown of a log-joint into its blocks.
struct LogJointTerms {
    double cause = 0.0;        // sum log pi
    double mixing = 0.0;       // sum log lambda (or its bound)
    double response = 0.0;     // sum log Bernoulli (or its bound)
    double domain_gauss = 0.0; // alpha priors
    double cause_gauss = 0.0;  // gamma priors
    double slab = 0.0;         // Bernoulli(s | rho)
    double beta = 0.0;         // Beta(rho)
    double dirichlet = 0.0;    // Dirichlet(pi)

    double likelihood() const { return cause + mixing + response; }
    double total() const {
        return cause + mixing + response + domain_gauss + cause_gauss + slab + beta + dirichlet;
    }
};

/// Exact complete-data log-joint log pr(D, Gamma), all normalizing constants
/// included.
LogJointTerms log_joint(const Dataset& data, const RootedWeightedTree& domain_tree,
                        const RootedWeightedTree& cause_tree, const CompleteParams& params,
                        const Hyperparameters& hyper);

/// log H: the log-joint with every sigmoid in the mixing weights and
/// responses replaced by its Jaakkola-Jordan bound. Prior blocks are
/// identical to log_joint, so log_h <= log_joint term by term.
LogJointTerms log_h(const Dataset& data, const RootedWeightedTree& domain_tree,
                    const RootedWeightedTree& cause_tree, const CompleteParams& params,
                    const LocalBounds& bounds, const Hyperparameters& hyper);

/// Prior correlation of two leaf parameters under a single-level diffusion
/// with every slab on. Root-to-leaf distances include the root's unit weight.
double prior_correlation(const RootedWeightedTree& tree, std::size_t v, std::size_t v2);

}  // namespace nlcm
