#include "pucl/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pucl/errors.hpp"

namespace pucl {

namespace {

void validate_density(const std::vector<double>& p, const std::string& what) {
    require(!p.empty(), what + " is empty");
    double sum = 0.0;
    for (double v : p) {
        require(v >= 0.0, what + " has a negative entry");
        sum += v;
    }
    require(std::abs(sum - 1.0) <= 1e-12, what + " does not sum to 1");
}

int draw_categorical(Rng& rng, const std::vector<double>& p) {
    double u = rng.next_double();
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(p.size()) - 1;  // u landed in rounding slack at the top
}

Vec gaussian_vec(Rng& rng, int d) {
    Vec v(d);
    for (double& e : v) e = rng.next_gaussian();
    return v;
}

// First k entries of a random permutation of pool, via partial Fisher-Yates.
std::vector<int> sample_without_replacement(Rng& rng, std::vector<int> pool, int k) {
    require(k >= 0 && static_cast<std::size_t>(k) <= pool.size(),
            "draw count exceeds pool size");
    int n = static_cast<int>(pool.size());
    for (int i = 0; i < k; ++i) {
        int j = i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

}  // namespace

int PuScenario::dim() const {
    switch (kind) {
        case ScenarioKind::discrete: return 1;
        case ScenarioKind::two_moons: return 2;
        case ScenarioKind::gauss_mixture:
            return pos_components.empty() ? 0 : static_cast<int>(pos_components[0].mean.size());
    }
    return 0;
}

int PuScenario::num_components() const {
    switch (kind) {
        case ScenarioKind::discrete: return 2;
        case ScenarioKind::two_moons: return 2;
        case ScenarioKind::gauss_mixture:
            return static_cast<int>(pos_components.size() + neg_components.size());
    }
    return 0;
}

void PuScenario::validate() const {
    // alpha = 1 is admitted as a degenerate all-positive population; the
    // correction coefficients themselves still require alpha < 1.
    require(alpha > 0.0 && alpha <= 1.0, "alpha must be in (0, 1]");
    require(c >= 0.0 && c <= 1.0, "c must be in [0, 1]");
    switch (kind) {
        case ScenarioKind::discrete:
            validate_density(p_pos, "positive density");
            validate_density(p_neg, "negative density");
            require(p_pos.size() == p_neg.size(), "densities disagree on support size");
            break;
        case ScenarioKind::two_moons:
            require(moon_noise >= 0.0, "moon noise must be nonnegative");
            break;
        case ScenarioKind::gauss_mixture: {
            require(!pos_components.empty() && !neg_components.empty(),
                    "mixture needs components for both classes");
            std::size_t d = pos_components[0].mean.size();
            require(d >= 1, "component dimension must be at least 1");
            for (const auto& comp : pos_components) {
                require(comp.mean.size() == d, "component dimensions disagree");
                require(comp.sigma > 0.0, "component sigma must be positive");
            }
            for (const auto& comp : neg_components) {
                require(comp.mean.size() == d, "component dimensions disagree");
                require(comp.sigma > 0.0, "component sigma must be positive");
            }
            break;
        }
    }
}

PuScenario PuScenario::make_discrete(double alpha, double c, std::vector<double> p_pos,
                                     std::vector<double> p_neg) {
    PuScenario s;
    s.kind = ScenarioKind::discrete;
    s.alpha = alpha;
    s.c = c;
    s.p_pos = std::move(p_pos);
    s.p_neg = std::move(p_neg);
    s.validate();
    return s;
}

PuScenario PuScenario::make_two_moons(double alpha, double c, double noise) {
    PuScenario s;
    s.kind = ScenarioKind::two_moons;
    s.alpha = alpha;
    s.c = c;
    s.moon_noise = noise;
    s.validate();
    return s;
}

PuScenario PuScenario::make_gauss_clusters(double alpha, double c, int n_clusters, int dim,
                                           double radius, double sigma, std::uint64_t seed) {
    require(n_clusters >= 2, "need at least one cluster per class");
    require(dim >= 1, "dimension must be at least 1");
    require(radius > 0.0 && sigma > 0.0, "radius and sigma must be positive");
    PuScenario s;
    s.kind = ScenarioKind::gauss_mixture;
    s.alpha = alpha;
    s.c = c;
    Rng rng(seed);
    for (int k = 0; k < n_clusters; ++k) {
        Rng cr = rng.split("cluster", static_cast<std::uint64_t>(k));
        Vec mean = gaussian_vec(cr, dim);
        double n2 = norm2(mean);
        if (n2 < 1e-12) mean[0] = 1.0, n2 = 1.0;  // vanishing draw; pick an axis
        for (double& e : mean) e *= radius / n2;
        GaussianComponent comp{std::move(mean), sigma};
        if (k == 0)
            s.pos_components.push_back(std::move(comp));
        else
            s.neg_components.push_back(std::move(comp));
    }
    s.validate();
    return s;
}

bool PuDataset::has_truth() const {
    for (const auto& smp : samples)
        if (smp.y == -1) return false;
    return true;
}

PuDataset sample_population(const PuScenario& scenario, int n, std::uint64_t seed) {
    scenario.validate();
    require(n >= 1, "sample count must be at least 1");
    PuDataset ds;
    ds.scenario = scenario;
    ds.seed = seed;
    ds.samples.resize(n);
    Rng root(seed);
    int n_pos_comp = scenario.kind == ScenarioKind::gauss_mixture
                         ? static_cast<int>(scenario.pos_components.size())
                         : 1;
    for (int i = 0; i < n; ++i) {
        Rng r = root.split("sample", static_cast<std::uint64_t>(i));
        PuSample& smp = ds.samples[i];
        bool positive = r.next_double() < scenario.alpha;
        smp.y = positive ? 1 : 0;
        smp.s = false;
        switch (scenario.kind) {
            case ScenarioKind::discrete: {
                int idx = draw_categorical(r, positive ? scenario.p_pos : scenario.p_neg);
                smp.x = {static_cast<double>(idx)};
                smp.cls = positive ? 0 : 1;
                break;
            }
            case ScenarioKind::two_moons: {
                double t = std::numbers::pi * r.next_double();
                if (positive)
                    smp.x = {std::cos(t), std::sin(t)};
                else
                    smp.x = {1.0 - std::cos(t), 0.5 - std::sin(t)};
                if (scenario.moon_noise > 0.0) {
                    smp.x[0] += scenario.moon_noise * r.next_gaussian();
                    smp.x[1] += scenario.moon_noise * r.next_gaussian();
                }
                smp.cls = positive ? 0 : 1;
                break;
            }
            case ScenarioKind::gauss_mixture: {
                const auto& comps = positive ? scenario.pos_components : scenario.neg_components;
                int k = static_cast<int>(r.next_below(comps.size()));
                const auto& comp = comps[k];
                smp.x = comp.mean;
                for (double& e : smp.x) e += comp.sigma * r.next_gaussian();
                smp.cls = positive ? k : n_pos_comp + k;
                break;
            }
        }
    }
    return ds;
}

PuDataset apply_scar(const PuDataset& dataset) {
    for (const auto& smp : dataset.samples)
        require(smp.y != -1, "SCAR labeling needs recorded true classes");
    PuDataset out = dataset;
    Rng root = Rng(dataset.seed).split("scar");
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        PuSample& smp = out.samples[i];
        if (smp.y == 1) {
            Rng r = root.split("flip", static_cast<std::uint64_t>(i));
            smp.s = r.next_double() < dataset.scenario.c;
        } else {
            smp.s = false;
        }
    }
    return out;
}

std::vector<double> negative_density_from_pu(const std::vector<double>& p_unlabeled,
                                             const std::vector<double>& p_positive,
                                             const PuCoefficients& coeffs) {
    validate_density(p_unlabeled, "unlabeled density");
    validate_density(p_positive, "positive density");
    require(p_unlabeled.size() == p_positive.size(), "densities disagree on support size");
    std::vector<double> out(p_unlabeled.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double v = coeffs.coef_unlabeled * p_unlabeled[i] - coeffs.coef_positive * p_positive[i];
        if (v < -1e-9)
            throw ContractViolation("inconsistent densities: negative mass " +
                                    std::to_string(v) + " at support point " +
                                    std::to_string(i));
        out[i] = std::max(v, 0.0);
    }
    return out;
}

std::vector<double> derive_unlabeled_density(const PuScenario& scenario) {
    scenario.validate();
    require(scenario.kind == ScenarioKind::discrete, "needs a discrete scenario");
    double ac = scenario.alpha * scenario.c;
    if (ac >= 1.0) throw ContractViolation("alpha*c = 1 leaves no unlabeled mass");
    std::vector<double> out(scenario.p_pos.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (scenario.alpha * (1.0 - scenario.c) * scenario.p_pos[i] +
                  (1.0 - scenario.alpha) * scenario.p_neg[i]) /
                 (1.0 - ac);
    return out;
}

std::vector<double> discrete_population_density(const PuScenario& scenario) {
    scenario.validate();
    require(scenario.kind == ScenarioKind::discrete, "needs a discrete scenario");
    std::vector<double> out(scenario.p_pos.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = scenario.alpha * scenario.p_pos[i] + (1.0 - scenario.alpha) * scenario.p_neg[i];
    return out;
}

Vec feature_stddev(const PuDataset& dataset) {
    require(!dataset.samples.empty(), "empty dataset");
    std::size_t d = dataset.samples[0].x.size();
    Vec mean(d, 0.0), var(d, 0.0);
    for (const auto& smp : dataset.samples) {
        require(smp.x.size() == d, "ragged feature dimensions");
        for (std::size_t k = 0; k < d; ++k) mean[k] += smp.x[k];
    }
    for (double& m : mean) m /= static_cast<double>(dataset.samples.size());
    for (const auto& smp : dataset.samples)
        for (std::size_t k = 0; k < d; ++k) {
            double dk = smp.x[k] - mean[k];
            var[k] += dk * dk;
        }
    Vec out(d, 0.0);
    if (dataset.samples.size() > 1)
        for (std::size_t k = 0; k < d; ++k)
            out[k] = std::sqrt(var[k] / static_cast<double>(dataset.samples.size() - 1));
    return out;
}

std::vector<ContrastiveBatch> make_contrastive_batches(const PuDataset& dataset, int batch_size,
                                                       int m_u, int m_plus,
                                                       const AugmentationSpec& augmentation,
                                                       std::uint64_t seed) {
    int n = static_cast<int>(dataset.samples.size());
    require(n >= 2, "dataset too small to form batches");
    require(batch_size >= 1 && batch_size <= n, "batch size must be in [1, n]");
    require(m_plus >= 1, "need at least one positive view");
    require(augmentation.sigma_scale >= 0.0, "augmentation scale must be nonnegative");
    if (m_u < 1 || m_u > n - 1)
        throw ContractViolation("unlabeled draw count must be in [1, n-1]");
    bool needs_truth = augmentation.class_resample || augmentation.emit_oracle_negatives;
    if (needs_truth)
        require(dataset.has_truth(), "oracle mode needs recorded classes");

    Vec noise_scale = feature_stddev(dataset);
    for (double& s : noise_scale) s *= augmentation.sigma_scale;

    // Per-component index pools, only built when oracle mode needs them.
    std::vector<std::vector<int>> by_cls;
    if (needs_truth) {
        for (int i = 0; i < n; ++i) {
            int cls = dataset.samples[i].cls;
            require(cls >= 0, "oracle mode needs recorded component ids");
            if (static_cast<std::size_t>(cls) >= by_cls.size()) by_cls.resize(cls + 1);
            by_cls[cls].push_back(i);
        }
    }

    Rng root(seed);
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    {
        Rng r = root.split("order");
        r.shuffle(order);
    }
    // Drop the ragged tail so the trainer always sees full anchor groups.
    int count = n - n % batch_size;

    std::vector<ContrastiveBatch> out(count);
    for (int j = 0; j < count; ++j) {
        Rng r = root.split("anchor", static_cast<std::uint64_t>(j));
        int idx = order[j];
        const PuSample& smp = dataset.samples[idx];
        ContrastiveBatch& b = out[j];
        b.anchor = smp.x;
        b.anchor_cls = smp.cls;

        b.positives.reserve(m_plus);
        for (int k = 0; k < m_plus; ++k) {
            if (augmentation.class_resample) {
                std::vector<int> pool;
                pool.reserve(by_cls[smp.cls].size());
                for (int cand : by_cls[smp.cls])
                    if (cand != idx) pool.push_back(cand);
                require(!pool.empty(), "class resampling needs another sample of the component");
                int pick = pool[r.next_below(pool.size())];
                b.positives.push_back(dataset.samples[pick].x);
            } else {
                Vec view = smp.x;
                for (std::size_t t = 0; t < view.size(); ++t)
                    view[t] += noise_scale[t] * r.next_gaussian();
                b.positives.push_back(std::move(view));
            }
        }

        std::vector<int> pool;
        pool.reserve(n - 1);
        for (int i = 0; i < n; ++i)
            if (i != idx) pool.push_back(i);
        for (int pick : sample_without_replacement(r, pool, m_u))
            b.unlabeled.push_back(dataset.samples[pick].x);

        if (augmentation.emit_oracle_negatives) {
            std::vector<int> negs;
            negs.reserve(n);
            for (int i = 0; i < n; ++i)
                if (dataset.samples[i].cls != smp.cls) negs.push_back(i);
            if (static_cast<int>(negs.size()) < m_u)
                throw ContractViolation("not enough true negatives for oracle batches");
            for (int pick : sample_without_replacement(r, negs, m_u))
                b.oracle_negatives.push_back(dataset.samples[pick].x);
        }
    }
    return out;
}

}  // namespace pucl
