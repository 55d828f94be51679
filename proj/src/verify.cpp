#include "pucl/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pucl/core_loss.hpp"
#include "pucl/encoder.hpp"
#include "pucl/errors.hpp"
#include "pucl/io.hpp"
#include "pucl/rng.hpp"
#include "pucl/scenario.hpp"
#include "pucl/trainer.hpp"

namespace pucl {

namespace {

std::vector<double> random_density(Rng& rng, int k) {
    std::vector<double> p(k);
    double total = 0.0;
    for (double& v : p) {
        v = -std::log(1.0 - rng.next_double());  // exponential spacings
        total += v;
    }
    for (double& v : p) v /= total;
    return p;
}

UnitEmbedding random_unit(Rng& rng, int d) {
    Vec v(d);
    for (double& e : v) e = rng.next_gaussian();
    return UnitEmbedding::normalized(v);
}

std::vector<UnitEmbedding> random_units(Rng& rng, int d, int count) {
    std::vector<UnitEmbedding> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) out.push_back(random_unit(rng, d));
    return out;
}

ContrastiveBatch random_raw_batch(Rng& rng, int d, int m_plus, int m_u) {
    ContrastiveBatch b;
    b.anchor.resize(d);
    for (double& e : b.anchor) e = rng.next_gaussian();
    for (int j = 0; j < m_plus; ++j) {
        Vec v(d);
        for (double& e : v) e = rng.next_gaussian();
        b.positives.push_back(std::move(v));
    }
    for (int i = 0; i < m_u; ++i) {
        Vec v(d);
        for (double& e : v) e = rng.next_gaussian();
        b.unlabeled.push_back(std::move(v));
    }
    return b;
}

double group_loss(const EncoderParams& params, const std::vector<ContrastiveBatch>& batches,
                  const PuCoefficients& coeffs, int n_eff, double tau) {
    std::vector<EncodedBatch> enc;
    for (const auto& b : batches) enc.push_back(encode_batch(params, b));
    return pucl_batch_loss(enc, coeffs, n_eff, tau).loss;
}

bool params_bit_equal(const EncoderParams& a, const EncoderParams& b) {
    if (a.num_layers() != b.num_layers()) return false;
    for (std::size_t l = 0; l < a.num_layers(); ++l)
        if (a.weights[l].a != b.weights[l].a || a.biases[l] != b.biases[l]) return false;
    return true;
}

bool logs_bit_equal(const std::vector<EpochRecord>& a, const std::vector<EpochRecord>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const EpochRecord &x = a[i], &y = b[i];
        // wall_ms is measured, everything else must match exactly
        if (x.epoch != y.epoch || x.loss != y.loss || x.clamp_rate != y.clamp_rate ||
            x.mean_mu_hat != y.mean_mu_hat || x.min_mu_hat != y.min_mu_hat)
            return false;
    }
    return true;
}

PuDataset verification_mixture(int n, std::uint64_t seed) {
    PuScenario scenario = PuScenario::make_gauss_clusters(0.1, 0.1, 10, 8, 3.0, 0.5, 31);
    return apply_scar(sample_population(scenario, n, seed));
}

TrainConfig small_train_config() {
    TrainConfig cfg;
    cfg.alpha = 0.2;
    cfg.c = 0.3;
    cfg.m_u = 8;
    cfg.batch_size = 25;
    cfg.lr = 0.05;
    cfg.momentum = 0.5;
    cfg.hidden = {16};
    cfg.emb_dim = 8;
    cfg.seed = 5;
    return cfg;
}

}  // namespace

CheckResult check_density_identity(int n_scenarios, std::uint64_t seed) {
    Rng root(seed);
    double max_err = 0.0;
    for (int i = 0; i < n_scenarios; ++i) {
        Rng r = root.split("scenario", i);
        double alpha = 0.01 + 0.89 * r.next_double();
        double c = r.next_double();
        PuScenario s =
            PuScenario::make_discrete(alpha, c, random_density(r, 16), random_density(r, 16));
        std::vector<double> p_u = derive_unlabeled_density(s);
        std::vector<double> recovered =
            negative_density_from_pu(p_u, s.p_pos, PuCoefficients(alpha, c));
        for (std::size_t k = 0; k < recovered.size(); ++k)
            max_err = std::max(max_err, std::abs(recovered[k] - s.p_neg[k]));
    }
    return {"density-identity", max_err < 1e-12,
            "max entrywise error " + format_double(max_err) + " over " +
                std::to_string(n_scenarios) + " scenarios (limit 1e-12)"};
}

CheckResult check_estimator_floor(int n_draws, std::uint64_t seed) {
    Rng root(seed);
    double min_margin = 1e300;
    for (int i = 0; i < n_draws; ++i) {
        Rng r = root.split("draw", i);
        double alpha = 0.05 + 0.85 * r.next_double();
        double c = r.next_double();
        double tau = i % 2 == 0 ? 1.0 : 0.5;
        PuCoefficients coeffs(alpha, c);
        UnitEmbedding anchor = random_unit(r, 5);
        double value = mu_hat(anchor, random_units(r, 5, 6), random_units(r, 5, 2), coeffs, tau);
        min_margin = std::min(min_margin, value - clamp_floor(tau));
    }
    return {"estimator-floor", min_margin >= -1e-12,
            "min margin above exp(-1/tau) was " + format_double(min_margin) + " over " +
                std::to_string(n_draws) + " draws"};
}

CheckResult check_batch_reductions(int n_batches, std::uint64_t seed) {
    Rng root(seed);
    TrainConfig uncorrected;
    uncorrected.objective = Objective::stacl;
    TrainConfig debiased;
    debiased.objective = Objective::deb;
    int mismatches = 0;
    for (int i = 0; i < n_batches; ++i) {
        Rng r = root.split("batch", i);
        double alpha = 0.05 + 0.85 * r.next_double();
        int m_u = 4 + static_cast<int>(r.next_below(8));
        std::vector<EncodedBatch> group;
        int n_anchors = 1 + static_cast<int>(r.next_below(3));
        for (int a = 0; a < n_anchors; ++a)
            group.push_back(EncodedBatch{random_unit(r, 6), random_units(r, 6, 2),
                                         random_units(r, 6, m_u)});

        // Corrected loss at c=1 against the uncorrected objective's path.
        double full_correction = pucl_batch_loss(group, PuCoefficients(alpha, 1.0), m_u).loss;
        double plain = pucl_batch_loss(group, effective_coefficients(uncorrected), m_u).loss;
        // Corrected loss at c=0 against the debiased objective's path.
        debiased.alpha = alpha;
        double zero_c = pucl_batch_loss(group, PuCoefficients(alpha, 0.0), m_u).loss;
        double deb = pucl_batch_loss(group, effective_coefficients(debiased.normalized()), m_u).loss;
        if (full_correction != plain || zero_c != deb) ++mismatches;
    }
    return {"batch-reductions", mismatches == 0,
            std::to_string(mismatches) + " of " + std::to_string(n_batches) +
                " random batches broke the c=1 / c=0 bit-identities"};
}

CheckResult check_trajectory_reductions(int epochs, std::uint64_t seed) {
    PuDataset dataset = verification_mixture(150, seed);
    TrainConfig base = small_train_config();
    base.epochs = epochs;

    TrainConfig corrected = base;
    corrected.objective = Objective::pucl;
    corrected.alpha = 0.3;
    corrected.c = 1.0;
    TrainConfig uncorrected = base;
    uncorrected.objective = Objective::stacl;
    uncorrected.alpha = 0.9;  // must be irrelevant to the uncorrected path
    TrainResult a = train(corrected, dataset);
    TrainResult b = train(uncorrected, dataset);
    bool stacl_ok = params_bit_equal(a.params, b.params) && logs_bit_equal(a.log, b.log);

    TrainConfig zero_c = base;
    zero_c.objective = Objective::pucl;
    zero_c.alpha = 0.25;
    zero_c.c = 0.0;
    TrainConfig deb = base;
    deb.objective = Objective::deb;
    deb.alpha = 0.25;
    deb.c = 0.7;  // normalized() must squash this to 0
    TrainResult x = train(zero_c, dataset);
    TrainResult y = train(deb.normalized(), dataset);
    bool deb_ok = params_bit_equal(x.params, y.params) && logs_bit_equal(x.log, y.log);

    std::string detail = std::string("c=1 vs uncorrected ") + (stacl_ok ? "identical" : "DIFFER") +
                         ", c=0 vs debiased " + (deb_ok ? "identical" : "DIFFER") + " over " +
                         std::to_string(epochs) + " epochs";
    return {"trajectory-reductions", stacl_ok && deb_ok, detail};
}

CheckResult check_gradient_fd(int n_batches, std::uint64_t seed) {
    Rng root(seed);
    PuCoefficients coeffs(0.2, 0.3);
    const int n_eff = 16;
    const double tau = 1.0;
    const double h = 1e-5;
    double max_rel = 0.0;
    int redraws = 0;
    for (int i = 0; i < n_batches; ++i) {
        // The comparison is only meaningful off the clamp kink, so redraw any
        // batch group that happens to activate it.
        EncoderParams params;
        std::vector<ContrastiveBatch> batches;
        GradientBundle g;
        for (int attempt = 0;; ++attempt) {
            require(attempt < 50, "gradient check could not draw a clamp-inactive batch");
            Rng r = root.split("fd", i).split("try", attempt);
            params = init_encoder({5, 8, 4}, Activation::tanh_fn, r.split("init").next_u64());
            batches.clear();
            for (int b = 0; b < 2; ++b) batches.push_back(random_raw_batch(r, 5, 2, 4));
            g = backward_pucl(params, batches, coeffs, n_eff, tau);
            if (g.report.clamp_active_count == 0) break;
            ++redraws;
        }
        auto probe = [&](std::vector<double>& slot, std::size_t idx, double analytic) {
            double kept = slot[idx];
            slot[idx] = kept + h;
            double up = group_loss(params, batches, coeffs, n_eff, tau);
            slot[idx] = kept - h;
            double down = group_loss(params, batches, coeffs, n_eff, tau);
            slot[idx] = kept;
            double numeric = (up - down) / (2.0 * h);
            double rel = std::abs(analytic - numeric) /
                         std::max({std::abs(analytic), std::abs(numeric), 1e-4});
            max_rel = std::max(max_rel, rel);
        };
        for (std::size_t l = 0; l < params.num_layers(); ++l) {
            for (std::size_t t = 0; t < params.weights[l].a.size(); ++t)
                probe(params.weights[l].a, t, g.d_weights[l].a[t]);
            for (std::size_t t = 0; t < params.biases[l].size(); ++t)
                probe(params.biases[l], t, g.d_biases[l][t]);
        }
    }
    return {"gradient-check", max_rel < 1e-5,
            "max relative error " + format_double(max_rel) + " over " +
                std::to_string(n_batches) + " clamp-inactive batch groups (" +
                std::to_string(redraws) + " redraws; limit 1e-5)"};
}

CheckResult check_bound_gap(int n_states, const std::vector<int>& n_eff_values,
                            std::uint64_t seed) {
    PuDataset dataset = verification_mixture(600, seed);
    TrainConfig cfg;
    cfg.hidden = {64, 64};
    cfg.emb_dim = 16;

    double worst_excess = -1e300;
    std::vector<double> mean_gap(n_eff_values.size(), 0.0);
    for (int s = 0; s < n_states; ++s) {
        EncoderParams state = init_encoder({8, 64, 64, 16}, Activation::tanh_fn,
                                           Rng(seed).split("state", s).next_u64());
        for (std::size_t k = 0; k < n_eff_values.size(); ++k) {
            cfg.n_effective = n_eff_values[k];
            cfg.seed = Rng(seed).split("mc", s * 97 + static_cast<int>(k)).next_u64();
            GapEstimate est = estimate_loss_gap(cfg, dataset, 4000, &state);
            worst_excess =
                std::max(worst_excess, est.gap_abs - (est.bound + 3.0 * est.mc_stderr));
            mean_gap[k] += est.gap_abs / n_states;
        }
    }
    bool within = worst_excess <= 0.0;
    bool monotone = true;
    for (std::size_t k = 1; k < mean_gap.size(); ++k)
        if (!(mean_gap[k] < mean_gap[k - 1])) monotone = false;

    std::ostringstream detail;
    detail << "worst gap minus (bound + 3 se) " << format_double(worst_excess) << "; mean gaps";
    for (std::size_t k = 0; k < mean_gap.size(); ++k)
        detail << " N=" << n_eff_values[k] << ":" << format_double(mean_gap[k]);
    if (!monotone) detail << " (not monotone)";
    return {n_eff_values.size() > 1 ? "bound-gap-sweep" : "bound-gap-spot",
            within && monotone, detail.str()};
}

CheckResult check_training_floor(std::uint64_t seed) {
    PuDataset dataset = verification_mixture(200, seed);
    TrainConfig cfg = small_train_config();
    cfg.alpha = 0.4;  // heavy correction: the clamp must actually engage safely
    cfg.c = 0.05;
    cfg.epochs = 5;
    TrainResult result = train(cfg, dataset);
    double floor = clamp_floor(cfg.tau);
    double min_margin = 1e300;
    double max_clamp_rate = 0.0;
    bool finite = true;
    for (const auto& rec : result.log) {
        min_margin = std::min(min_margin, rec.min_mu_hat - floor);
        max_clamp_rate = std::max(max_clamp_rate, rec.clamp_rate);
        if (!std::isfinite(rec.loss) || !std::isfinite(rec.clamp_rate)) finite = false;
    }
    bool pass = finite && min_margin >= -1e-12 && max_clamp_rate <= 1.0;
    return {"training-floor", pass,
            "min logged estimator margin " + format_double(min_margin) + ", max clamp rate " +
                format_double(max_clamp_rate)};
}

std::vector<CheckResult> run_verification(VerifyLevel level) {
    std::vector<CheckResult> results;
    results.push_back(check_density_identity(100, 2001));
    results.push_back(check_estimator_floor(500, 2002));
    results.push_back(check_batch_reductions(1000, 2003));
    results.push_back(check_trajectory_reductions(10, 2004));
    results.push_back(check_gradient_fd(50, 2005));
    results.push_back(check_training_floor(2006));
    if (level == VerifyLevel::full)
        results.push_back(check_bound_gap(20, {16, 64, 256, 1024}, 2007));
    else
        results.push_back(check_bound_gap(3, {64}, 2007));
    return results;
}

std::string render_report(const std::vector<CheckResult>& results) {
    std::ostringstream out;
    std::size_t passed = 0;
    for (const auto& r : results) {
        out << (r.pass ? "PASS" : "FAIL") << " " << r.name << ": " << r.detail << "\n";
        if (r.pass) ++passed;
    }
    out << passed << "/" << results.size() << " checks passed\n";
    return out.str();
}

}  // namespace pucl
