#include "pucl/trainer.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "pucl/errors.hpp"
#include "pucl/rng.hpp"

namespace pucl {

PuCoefficients effective_coefficients(const TrainConfig& cfg) {
    switch (cfg.objective) {
        case Objective::stacl:
        case Objective::ideal_oracle:
            // c = 1 collapses the correction to coefficients (1, 0) exactly,
            // so the uncorrected objectives ride the same code path.
            return PuCoefficients(0.5, 1.0);
        case Objective::deb:
            return PuCoefficients(cfg.alpha, 0.0);
        case Objective::pucl:
            return PuCoefficients(cfg.alpha, cfg.c);
    }
    throw ContractViolation("unknown objective");
}

namespace {

constexpr double kDivergenceThreshold = 1e3;

ContrastiveBatch swap_first_positive(const ContrastiveBatch& b) {
    ContrastiveBatch out = b;
    std::swap(out.anchor, out.positives[0]);
    return out;
}

}  // namespace

const char* objective_name(Objective o) {
    switch (o) {
        case Objective::stacl: return "stacl";
        case Objective::pucl: return "pucl";
        case Objective::deb: return "deb";
        case Objective::ideal_oracle: return "ideal_oracle";
    }
    return "?";
}

Objective objective_from_name(const std::string& name) {
    if (name == "stacl") return Objective::stacl;
    if (name == "pucl") return Objective::pucl;
    if (name == "deb") return Objective::deb;
    if (name == "ideal_oracle") return Objective::ideal_oracle;
    throw ContractViolation("unknown objective '" + name + "'");
}

void TrainConfig::validate() const {
    if (objective == Objective::pucl || objective == Objective::deb)
        require(alpha > 0.0 && alpha < 1.0, "train config: alpha must be in (0,1)");
    if (objective == Objective::pucl)
        require(c >= 0.0 && c <= 1.0, "train config: c must be in [0,1]");
    require(m_u >= 1, "train config: m_u must be >= 1");
    require(m_plus >= 1, "train config: m_plus must be >= 1");
    require(n_effective >= 0, "train config: n_effective must be >= 0");
    require(tau > 0.0, "train config: tau must be positive");
    require(batch_size >= 1, "train config: batch_size must be >= 1");
    require(epochs >= 0, "train config: epochs must be >= 0");
    require(lr >= 0.0, "train config: lr must be nonnegative");
    require(momentum >= 0.0 && momentum < 1.0, "train config: momentum must be in [0,1)");
    require(emb_dim >= 2, "train config: embedding dimension must be >= 2");
    for (int h : hidden) require(h >= 1, "train config: hidden widths must be positive");
}

TrainConfig TrainConfig::normalized() const {
    TrainConfig out = *this;
    if (out.objective == Objective::deb) out.c = 0.0;
    return out;
}

TrainResult train(const TrainConfig& config_in, const PuDataset& dataset) {
    TrainConfig config = config_in.normalized();
    config.validate();
    require(!dataset.samples.empty(), "train: empty dataset");

    std::vector<int> dims;
    dims.push_back(static_cast<int>(dataset.samples[0].x.size()));
    for (int h : config.hidden) dims.push_back(h);
    dims.push_back(config.emb_dim);

    TrainResult result;
    result.params = init_encoder(dims, config.activation,
                                 Rng(config.seed).split("init").next_u64());

    PuCoefficients coeffs = effective_coefficients(config);
    ContrastSource source = config.objective == Objective::ideal_oracle
                                ? ContrastSource::oracle_negatives
                                : ContrastSource::unlabeled_pool;
    AugmentationSpec aug = config.augmentation;
    aug.emit_oracle_negatives = source == ContrastSource::oracle_negatives;
    int n_eff = config.effective_n();
    double floor = clamp_floor(config.tau);

    OptState opt;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        auto t0 = std::chrono::steady_clock::now();
        std::uint64_t epoch_seed =
            Rng(config.seed).split("epoch", static_cast<std::uint64_t>(epoch)).next_u64();
        auto batches = make_contrastive_batches(dataset, config.batch_size, config.m_u,
                                                config.m_plus, aug, epoch_seed);

        double loss_sum = 0.0;
        double mu_sum = 0.0;
        double mu_min = floor + 1e300;
        long clamp_count = 0, anchor_count = 0;
        std::size_t steps = batches.size() / config.batch_size;
        for (std::size_t s = 0; s < steps; ++s) {
            std::vector<ContrastiveBatch> group(
                batches.begin() + s * config.batch_size,
                batches.begin() + (s + 1) * config.batch_size);
            GradientBundle grads =
                backward_pucl(result.params, group, coeffs, n_eff, config.tau, source);
            if (config.symmetrize) {
                std::vector<ContrastiveBatch> swapped;
                swapped.reserve(group.size());
                for (const auto& b : group) swapped.push_back(swap_first_positive(b));
                GradientBundle back =
                    backward_pucl(result.params, swapped, coeffs, n_eff, config.tau, source);
                for (std::size_t l = 0; l < grads.d_weights.size(); ++l) {
                    for (std::size_t i = 0; i < grads.d_weights[l].a.size(); ++i)
                        grads.d_weights[l].a[i] =
                            0.5 * (grads.d_weights[l].a[i] + back.d_weights[l].a[i]);
                    for (std::size_t i = 0; i < grads.d_biases[l].size(); ++i)
                        grads.d_biases[l][i] =
                            0.5 * (grads.d_biases[l][i] + back.d_biases[l][i]);
                }
                grads.loss_value = 0.5 * (grads.loss_value + back.loss_value);
                grads.report.clamp_active_count += back.report.clamp_active_count;
                for (double m : back.report.mu_hat_per_anchor)
                    grads.report.mu_hat_per_anchor.push_back(m);
            }

            if (!std::isfinite(grads.loss_value) || grads.loss_value > kDivergenceThreshold)
                throw TrainingDivergence("training diverged at epoch " + std::to_string(epoch) +
                                         ", step " + std::to_string(s) + ": loss " +
                                         std::to_string(grads.loss_value));
            sgd_step(result.params, grads, config.lr, config.momentum, opt);

            loss_sum += grads.loss_value;
            clamp_count += grads.report.clamp_active_count;
            for (double m : grads.report.mu_hat_per_anchor) {
                mu_sum += m;
                if (m < mu_min) mu_min = m;
                ++anchor_count;
            }
        }
        require(steps >= 1, "train: batch_size larger than the usable dataset");

        EpochRecord rec;
        rec.epoch = epoch;
        rec.loss = loss_sum / static_cast<double>(steps);
        rec.clamp_rate = static_cast<double>(clamp_count) / static_cast<double>(anchor_count);
        rec.mean_mu_hat = mu_sum / static_cast<double>(anchor_count);
        rec.min_mu_hat = mu_min;
        rec.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        result.log.push_back(rec);
    }
    return result;
}

GapEstimate estimate_loss_gap(const TrainConfig& config_in, const PuDataset& dataset, int n_mc,
                              const EncoderParams* params_in) {
    TrainConfig config = config_in.normalized();
    config.validate();
    require(config.tau == 1.0, "loss-gap estimate: the deviation bound is stated at tau = 1");
    require(n_mc >= 1000, "loss-gap estimate: n_mc must be >= 1000");
    require(dataset.has_truth(), "loss-gap estimate: needs recorded classes");
    int n = static_cast<int>(dataset.samples.size());
    require(n >= 2, "loss-gap estimate: dataset too small");

    EncoderParams local;
    const EncoderParams* params = params_in;
    if (!params) {
        std::vector<int> dims;
        dims.push_back(static_cast<int>(dataset.samples[0].x.size()));
        for (int h : config.hidden) dims.push_back(h);
        dims.push_back(config.emb_dim);
        local = init_encoder(dims, config.activation,
                             Rng(config.seed).split("init").next_u64());
        params = &local;
    }

    // The dataset is the population: embed it once, then draw anchors,
    // same-component positives, and i.i.d. other-component negatives from it.
    std::vector<Vec> emb(n);
    for (int i = 0; i < n; ++i) emb[i] = forward_trace(*params, dataset.samples[i].x).embedding;

    std::vector<std::vector<int>> same, other;
    {
        int max_cls = 0;
        for (const auto& smp : dataset.samples) {
            require(smp.cls >= 0, "loss-gap estimate: needs recorded component ids");
            if (smp.cls > max_cls) max_cls = smp.cls;
        }
        std::vector<std::vector<int>> by_cls(max_cls + 1);
        for (int i = 0; i < n; ++i) by_cls[dataset.samples[i].cls].push_back(i);
        same.resize(max_cls + 1);
        other.resize(max_cls + 1);
        for (int cls = 0; cls <= max_cls; ++cls) {
            same[cls] = by_cls[cls];
            for (int c2 = 0; c2 <= max_cls; ++c2)
                if (c2 != cls)
                    other[cls].insert(other[cls].end(), by_cls[c2].begin(), by_cls[c2].end());
        }
    }

    int n_eff = config.effective_n();
    double n_eff_d = static_cast<double>(n_eff);

    // Per-anchor similarity rows and exact pool means, filled on first use.
    std::vector<std::vector<double>> h_row(n);
    std::vector<double> mu_exact(n, -1.0);
    auto ensure_anchor = [&](int a) {
        if (!h_row[a].empty()) return;
        h_row[a].resize(n);
        for (int j = 0; j < n; ++j) h_row[a][j] = std::exp(dot(emb[a], emb[j]));
        const auto& pool = other[dataset.samples[a].cls];
        require(!pool.empty(), "loss-gap estimate: a component has no true negatives");
        double s = 0.0;
        for (int j : pool) s += h_row[a][j];
        mu_exact[a] = s / static_cast<double>(pool.size());
    };

    Rng rng = Rng(config.seed).split("gap");
    double sum_ideal = 0.0, sum_decl = 0.0, sum_g = 0.0, sum_g2 = 0.0;
    for (int t = 0; t < n_mc; ++t) {
        int a = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
        ensure_anchor(a);
        const auto& mates = same[dataset.samples[a].cls];
        require(mates.size() >= 2, "loss-gap estimate: a component has a single sample");
        int p = a;
        while (p == a) p = mates[rng.next_below(mates.size())];
        double h_pos = h_row[a][p];

        const auto& pool = other[dataset.samples[a].cls];
        double sum_neg = 0.0;
        for (int k = 0; k < n_eff; ++k) sum_neg += h_row[a][pool[rng.next_below(pool.size())]];

        double l_ideal = std::log1p(sum_neg / h_pos);
        double l_decl = std::log1p(n_eff_d * mu_exact[a] / h_pos);
        double g = l_ideal - l_decl;
        sum_ideal += l_ideal;
        sum_decl += l_decl;
        sum_g += g;
        sum_g2 += g * g;
    }

    double inv = 1.0 / static_cast<double>(n_mc);
    GapEstimate est;
    est.l_ideal = sum_ideal * inv;
    est.l_decl = sum_decl * inv;
    est.gap_abs = std::abs(sum_g * inv);
    est.bound = theorem1_bound(n_eff);
    double var = (sum_g2 - sum_g * sum_g * inv) * inv;  // population variance of g
    est.mc_stderr = std::sqrt(var < 0.0 ? 0.0 : var * inv);
    return est;
}

}  // namespace pucl
