#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pucl {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;  // deterministic: no timing, no addresses
};

enum class VerifyLevel { fast, full };

// Individual oracle checks. Each is deterministic under its seed and returns
// a self-describing result instead of throwing on a violated invariant.

// Recovers the negative density from derived unlabeled + positive densities on
// random discrete scenarios; max entrywise error must stay below 1e-12.
CheckResult check_density_identity(int n_scenarios, std::uint64_t seed);

// The similarity-mean estimator never reports below exp(-1/tau).
CheckResult check_estimator_floor(int n_draws, std::uint64_t seed);

// Batch-level reductions: the corrected loss at c=1 matches the uncorrected
// objective bit for bit, and at c=0 matches the debiased objective.
CheckResult check_batch_reductions(int n_batches, std::uint64_t seed);

// Trainer-level version of the same reductions: whole trajectories (parameters
// and per-epoch stats) must be bit-identical under matched seeds.
CheckResult check_trajectory_reductions(int epochs, std::uint64_t seed);

// Analytic gradients against central finite differences on a two-layer
// encoder; max relative error must stay below 1e-5 with the clamp inactive.
CheckResult check_gradient_fd(int n_batches, std::uint64_t seed);

// Monte-Carlo gap between the ideal loss and its mean-similarity approximation
// stays within the (e^2-1)/(2 sqrt(N)) bound plus 3 MC standard errors for
// every random encoder state and every N; with several N values the mean gap
// must also shrink monotonically.
CheckResult check_bound_gap(int n_states, const std::vector<int>& n_eff_values,
                            std::uint64_t seed);

// A short real training run keeps every logged estimator mean at or above the
// clamp floor and reports a finite clamp rate.
CheckResult check_training_floor(std::uint64_t seed);

// The fixed suite: fast keeps a single-N bound spot check, full runs the
// 20-state, 4-N bound sweep as well.
std::vector<CheckResult> run_verification(VerifyLevel level);

// One line per check plus a summary line; byte-stable across runs.
std::string render_report(const std::vector<CheckResult>& results);

}  // namespace pucl
