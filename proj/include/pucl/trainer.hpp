#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pucl/encoder.hpp"
#include "pucl/scenario.hpp"

namespace pucl {

enum class Objective { stacl, pucl, deb, ideal_oracle };

const char* objective_name(Objective o);
Objective objective_from_name(const std::string& name);

struct TrainConfig {
    Objective objective = Objective::pucl;
    double alpha = 0.1;
    double c = 0.1;
    int m_u = 32;
    int m_plus = 1;
    int n_effective = 0;  // 0 means "use m_u"
    double tau = 1.0;
    int batch_size = 64;
    int epochs = 10;
    double lr = 0.1;
    double momentum = 0.9;
    std::uint64_t seed = 1;
    std::vector<int> hidden = {64, 64};
    int emb_dim = 16;
    Activation activation = Activation::tanh_fn;
    AugmentationSpec augmentation;
    // Two-view symmetric variant (anchor and first positive swap roles and the
    // two losses are averaged). Off by default: the objective is one-directional.
    bool symmetrize = false;

    int effective_n() const { return n_effective > 0 ? n_effective : m_u; }
    void validate() const;
    // Applies the objective rules: deb forces c = 0. Returns the config that
    // actually trains; callers that care warn about the rewrite themselves.
    TrainConfig normalized() const;
};

struct EpochRecord {
    int epoch = 0;
    double loss = 0.0;
    double clamp_rate = 0.0;
    double mean_mu_hat = 0.0;
    double min_mu_hat = 0.0;  // diagnostic; not part of the epoch CSV
    double wall_ms = 0.0;     // measured, excluded from determinism comparisons
};

struct TrainResult {
    EncoderParams params;
    std::vector<EpochRecord> log;
};

// Estimator coefficients each objective trains with. The uncorrected
// objectives reuse the corrected path at c = 1, where the coefficients
// collapse to exactly (1, 0); deb drops the positive term via c = 0.
PuCoefficients effective_coefficients(const TrainConfig& config);

// Full training loop: fresh batches per epoch from a split seed, one SGD step
// per anchor group, divergence abort on non-finite loss or loss > 1e3.
TrainResult train(const TrainConfig& config, const PuDataset& dataset);

struct GapEstimate {
    double gap_abs = 0.0;
    double bound = 0.0;
    double mc_stderr = 0.0;  // paired standard error of the mean gap
    double l_ideal = 0.0;
    double l_decl = 0.0;
};

// Monte-Carlo comparison of the oracle-negative loss against the corrected
// form with the *exact* per-anchor mean similarity over the true-negative
// pool. The dataset is treated as the population: anchors and i.i.d. negative
// draws come from it, so the deviation bound applies verbatim. Uses the
// encoder built from the config, or `params` when given.
GapEstimate estimate_loss_gap(const TrainConfig& config, const PuDataset& dataset, int n_mc,
                              const EncoderParams* params = nullptr);

}  // namespace pucl
