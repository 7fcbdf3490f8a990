#include <cmath>
#include <limits>

#include "nlcm/parallel.hpp"
#include "nlcm/rng.hpp"
#include "nlcm/vi.hpp"

namespace nlcm {

FitResult fit_single(const VbProblem& problem, const FitControls& controls, std::uint64_t seed) {
    FitResult out;
    out.num_classes = problem.K();
    out.mode = problem.config().mode;
    out.slab_pattern = problem.config().slab_pattern;
    out.seed = seed;

    VariationalState state = init_state(problem, seed);
    double prev = compute_elbo(state, problem);
    state.elbo_trace.push_back(prev);

    // Convergence needs a small ELBO change and, when hyperparameters are
    // learned, a recent hyperparameter sweep that gained less than hyper_tol.
    bool force_hyper = false;
    double last_hyper_gain = std::numeric_limits<double>::infinity();
    int t = 1;
    for (; t <= controls.max_iters; ++t) {
        const bool hyper_step =
            controls.update_hyper &&
            (force_hyper || (controls.hyper_interval > 0 && t % controls.hyper_interval == 0));
        const double elbo = sweep(state, problem, controls, t, force_hyper);
        force_hyper = false;
        const double delta = elbo - prev;
        if (hyper_step) last_hyper_gain = std::abs(delta);
        const double scale = controls.relative_tol ? std::max(std::abs(prev), 1.0) : 1.0;
        prev = elbo;
        if (std::abs(delta) < controls.tol * scale) {
            if (!controls.update_hyper || last_hyper_gain < controls.hyper_tol) {
                out.converged = true;
                break;
            }
            force_hyper = true;
        }
    }
    out.iterations = std::min(t, controls.max_iters);
    out.elbo_trace = state.elbo_trace;
    out.state = std::move(state);
    return out;
}

FitResult fit(const Dataset& data, const RootedWeightedTree& domain_tree,
              const RootedWeightedTree& cause_tree, const ModelConfig& config,
              const FitControls& controls) {
    const VbProblem problem(data, domain_tree, cause_tree, config);
    const std::size_t n = static_cast<std::size_t>(std::max(controls.n_restarts, 1));
    std::vector<std::optional<FitResult>> runs(n);
    std::vector<RestartSummary> summaries(n);
    parallel_for(n, controls.jobs, [&](std::size_t r) {
        RestartSummary& s = summaries[r];
        s.seed = derive_seed(controls.seed, "restart", r);
        try {
            FitResult res = fit_single(problem, controls, s.seed);
            s.final_elbo = res.final_elbo();
            s.iterations = res.iterations;
            s.converged = res.converged;
            runs[r] = std::move(res);
        } catch (const NumericalError& err) {
            s.failed = true;
            s.failure = err.what();
        }
    });

    std::optional<std::size_t> best;
    for (std::size_t r = 0; r < n; ++r)
        if (runs[r] && (!best || summaries[r].final_elbo > summaries[*best].final_elbo)) best = r;
    if (!best) throw NumericalError("all restarts", std::numeric_limits<double>::quiet_NaN());

    FitResult out = std::move(*runs[*best]);
    out.best_restart = *best;
    out.restarts = std::move(summaries);
    return out;
}

KSelection select_k(const Dataset& data, const RootedWeightedTree& domain_tree,
                    const RootedWeightedTree& cause_tree, const ModelConfig& config,
                    const FitControls& controls, const std::vector<std::size_t>& k_candidates) {
    if (k_candidates.empty()) throw std::invalid_argument("no candidate K values");
    KSelection out;
    out.candidates = k_candidates;
    std::optional<std::size_t> best;
    for (std::size_t idx = 0; idx < k_candidates.size(); ++idx) {
        ModelConfig cfg = config;
        cfg.num_classes = k_candidates[idx];
        FitResult res = fit(data, domain_tree, cause_tree, cfg, controls);
        const double elbo = res.final_elbo();
        // K! relabelings of the classes give equivalent optima
        const double crit = elbo + std::lgamma(double(k_candidates[idx]) + 1.0);
        out.elbo.push_back(elbo);
        out.criterion.push_back(crit);
        out.fits.push_back(std::move(res));
        if (!best || crit > out.criterion[*best] ||
            (crit == out.criterion[*best] && k_candidates[idx] < k_candidates[*best]))
            best = idx;
    }
    out.selected_k = k_candidates[*best];
    return out;
}

}  // namespace nlcm
