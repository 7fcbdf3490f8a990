#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlcm/dataset.hpp"
#include "nlcm/model.hpp"
#include "nlcm/tree.hpp"

namespace nlcm {

/// A non-finite ELBO term. `term()` names the offending block.
class NumericalError : public std::runtime_error {
public:
    NumericalError(std::string term, double value)
        : std::runtime_error("non-finite ELBO term '" + term + "' (" + std::to_string(value) + ")"),
          term_(std::move(term)) {}
    const std::string& term() const noexcept { return term_; }

private:
    std::string term_;
};

enum class ComparatorMode {
    DomainAdaptive,    // free spike-and-slab on every non-root node
    FixedGrouping,     // slab indicators clamped to a supplied 0/1 pattern
    CompletePooling,   // every non-root indicator clamped to 0
    NoDomainGrouping,  // every indicator clamped to 1
};

const char* to_string(ComparatorMode mode);
ComparatorMode comparator_from_string(const std::string& name);

struct ModelConfig {
    std::size_t num_classes = 2;
    ComparatorMode mode = ComparatorMode::DomainAdaptive;
    /// Domain-tree node id -> slab indicator, used by FixedGrouping. Nodes not
    /// listed stay free. Applies to every cause.
    std::map<std::string, int> slab_pattern;
    /// Beta(a, b) prior on the slab probabilities and Dirichlet(d) on CSMFs.
    double slab_a = 1.0;
    double slab_b = 1.0;
    double dirichlet_d = 1.0;
    /// Starting diffusion variances.
    double tau_init = 1.0;
    double tau_star_init = 1.0;
    /// Standard deviation of the random initial means.
    double init_sd = 0.1;
    /// Permits K = 1, which removes the mixing weights altogether.
    bool diagnostic = false;
};

struct VariationalState;

struct FitControls {
    double tol = 1e-8;
    double hyper_tol = 1e-4;
    int hyper_interval = 10;
    bool relative_tol = false;
    /// Step 2 every sweep (true) or only on hyperparameter sweeps.
    bool local_bounds_every_sweep = true;
    bool update_hyper = true;
    int max_iters = 2000;
    int n_restarts = 5;
    std::uint64_t seed = 1;
    int jobs = 1;
    /// Called after every individual coordinate update inside a sweep, with
    /// the step name. Used for diagnostics; leave empty in normal runs.
    std::function<void(const char* step, const VariationalState& state)> on_update;
};

/// Fixed inputs of a fit with derived lookup tables.
class VbProblem {
public:
    VbProblem(const Dataset& data, const RootedWeightedTree& domain_tree,
              const RootedWeightedTree& cause_tree, ModelConfig config);

    const Dataset& data() const { return *data_; }
    const RootedWeightedTree& domain_tree() const { return *domain_tree_; }
    const RootedWeightedTree& cause_tree() const { return *cause_tree_; }
    const ModelConfig& config() const { return config_; }
    const Hyperparameters& hyper() const { return hyper_; }

    std::size_t N() const { return data_->num_subjects; }
    std::size_t J() const { return data_->num_items; }
    std::size_t C() const { return data_->num_causes; }
    std::size_t K() const { return config_.num_classes; }
    std::size_t G1() const { return data_->num_domains; }
    std::size_t P() const { return domain_tree_->size(); }
    std::size_t Pstar() const { return cause_tree_->size(); }

    /// Clamped slab value for (c, u), or nullopt when the indicator is free.
    std::optional<std::uint8_t> clamp(std::size_t c, std::size_t u) const;
    /// Domain ranks below domain-tree node u.
    const std::vector<std::size_t>& domains_below(std::size_t u) const { return domains_below_[u]; }
    /// Cause ranks below cause-tree node u.
    const std::vector<std::size_t>& causes_below(std::size_t u) const { return causes_below_[u]; }
    const std::vector<std::size_t>& domain_ancestors(std::size_t g) const { return domain_anc_[g]; }
    const std::vector<std::size_t>& cause_ancestors(std::size_t c) const { return cause_anc_[c]; }

private:
    const Dataset* data_;
    const RootedWeightedTree* domain_tree_;
    const RootedWeightedTree* cause_tree_;
    ModelConfig config_;
    Hyperparameters hyper_;
    std::vector<std::vector<std::int8_t>> clamp_;  // [c][u], -1 free
    std::vector<std::vector<std::size_t>> domains_below_;
    std::vector<std::vector<std::size_t>> causes_below_;
    std::vector<std::vector<std::size_t>> domain_anc_;
    std::vector<std::vector<std::size_t>> cause_anc_;
};

/// Parameters of the factorized variational family.
struct VariationalState {
    Matrix e;                          // N x C, q(Y_i)
    Matrix r;                          // N x K, q(Z_i)
    Matrix dirichlet;                  // (G+1) x C, q(pi^(g))
    Matrix slab_prob;                  // C x P, p_cu
    std::vector<Matrix> alpha_mean;    // [c] P x (K-1), slab-conditional mean
    std::vector<Matrix> alpha_var;     // [c] P x (K-1), slab-conditional variance
    std::vector<Matrix> gamma_mean;    // [u] J x K
    std::vector<Matrix> gamma_var;     // [u] J x K
    Matrix rho_a;                      // C x L
    Matrix rho_b;                      // C x L
    std::vector<Matrix> phi;           // [c] (G+1) x (K-1)
    std::vector<Matrix> psi;           // [c] J x K
    Vector tau;                        // L
    Vector tau_star;                   // L*
    std::vector<double> elbo_trace;
};

/// First and second moments of the tree sums under q.
struct Moments {
    std::vector<Matrix> eta_mean;     // [c] (G+1) x (K-1)
    std::vector<Matrix> eta_second;   // [c] (G+1) x (K-1)
    std::vector<Matrix> beta_mean;    // [c] J x K
    std::vector<Matrix> beta_second;  // [c] J x K
};

Moments compute_moments(const VariationalState& state, const VbProblem& problem);

/// Spike variance tau_{l_u} w_u of alpha^(c,u) given s_cu = 0.
double spike_variance(const VariationalState& state, const VbProblem& problem, std::size_t u);
/// E[alpha_k^(c,u)^2] under the two-component mixture.
double alpha_second_moment(const VariationalState& state, const VbProblem& problem, std::size_t c,
                           std::size_t u, std::size_t k);

VariationalState init_state(const VbProblem& problem, std::uint64_t seed);

// Individual coordinate updates. Each maximizes the ELBO over its factor with
// everything else held fixed.
void update_e(VariationalState& state, const VbProblem& problem);
void update_r(VariationalState& state, const VbProblem& problem);
void update_pi(VariationalState& state, const VbProblem& problem);
void update_spike_slab(VariationalState& state, const VbProblem& problem, std::size_t c, std::size_t u);
void update_spike_slab_all(VariationalState& state, const VbProblem& problem);
void update_gamma(VariationalState& state, const VbProblem& problem, std::size_t u);
void update_gamma_all(VariationalState& state, const VbProblem& problem);
void update_rho(VariationalState& state, const VbProblem& problem);
void update_local_bounds(VariationalState& state, const VbProblem& problem);
void update_hyperparams(VariationalState& state, const VbProblem& problem);

/// ELBO blocks: expected log H minus the entropy of q.
struct ElboTerms {
    double likelihood = 0.0;
    double domain_gauss = 0.0;
    double cause_gauss = 0.0;
    double slab_prior = 0.0;
    double beta_prior = 0.0;
    double dirichlet_prior = 0.0;
    double entropy_dirichlet = 0.0;
    double entropy_alpha = 0.0;
    double entropy_gamma = 0.0;
    double entropy_categorical = 0.0;
    double entropy_slab = 0.0;
    double entropy_beta = 0.0;

    double total() const {
        return likelihood + domain_gauss + cause_gauss + slab_prior + beta_prior + dirichlet_prior +
               entropy_dirichlet + entropy_alpha + entropy_gamma + entropy_categorical + entropy_slab + entropy_beta;
    }
};

ElboTerms elbo_terms(const VariationalState& state, const VbProblem& problem);
/// Throws NumericalError on a non-finite term.
double compute_elbo(const VariationalState& state, const VbProblem& problem);

/// Runs one sweep in the fixed step order; `t` is the 1-based sweep index.
/// Returns the ELBO after the sweep.
double sweep(VariationalState& state, const VbProblem& problem, const FitControls& controls, int t,
             bool force_hyper = false);

struct RestartSummary {
    std::uint64_t seed = 0;
    double final_elbo = 0.0;
    int iterations = 0;
    bool converged = false;
    bool failed = false;
    std::string failure;
};

struct FitResult {
    VariationalState state;
    std::size_t num_classes = 0;
    ComparatorMode mode = ComparatorMode::DomainAdaptive;
    std::map<std::string, int> slab_pattern;
    std::uint64_t seed = 0;
    std::size_t best_restart = 0;
    bool converged = false;
    int iterations = 0;
    std::vector<double> elbo_trace;
    std::vector<RestartSummary> restarts;

    double final_elbo() const { return elbo_trace.empty() ? 0.0 : elbo_trace.back(); }
};

/// Posterior mean of pi^(g).
Vector csmf_mean(const VariationalState& state, std::size_t domain);
/// lambda^(c,g) evaluated at the posterior mean of eta.
Vector lambda_at_mean(const VariationalState& state, const VbProblem& problem, std::size_t c,
                      std::size_t g);

/// One coordinate-ascent run from a single initialization.
FitResult fit_single(const VbProblem& problem, const FitControls& controls, std::uint64_t seed);

/// Multiple restarts; keeps the highest final ELBO. Restart r uses the seed
/// derived from (controls.seed, r).
FitResult fit(const Dataset& data, const RootedWeightedTree& domain_tree,
              const RootedWeightedTree& cause_tree, const ModelConfig& config,
              const FitControls& controls);

struct KSelection {
    std::size_t selected_k = 0;
    std::vector<std::size_t> candidates;
    std::vector<double> elbo;       // best final ELBO per candidate
    std::vector<double> criterion;  // elbo + log(K!)
    std::vector<FitResult> fits;
};

KSelection select_k(const Dataset& data, const RootedWeightedTree& domain_tree,
                    const RootedWeightedTree& cause_tree, const ModelConfig& config,
                    const FitControls& controls, const std::vector<std::size_t>& k_candidates);

}  // namespace nlcm
