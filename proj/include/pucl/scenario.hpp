#pragma once

#include <cstdint>
#include <vector>

#include "pucl/core_loss.hpp"
#include "pucl/linalg.hpp"
#include "pucl/rng.hpp"

namespace pucl {

enum class ScenarioKind { discrete, two_moons, gauss_mixture };

struct GaussianComponent {
    Vec mean;
    double sigma = 1.0;
};

// Generative model of the population p = alpha * p_pos + (1 - alpha) * p_neg,
// with SCAR labeling at frequency c. Discrete scenarios carry exact densities
// on a shared support and exist for the density-identity oracles; continuous
// ones drive the training experiments.
struct PuScenario {
    ScenarioKind kind = ScenarioKind::discrete;
    double alpha = 0.5;
    double c = 0.5;

    // kind == discrete: densities over support {0, ..., K-1}.
    std::vector<double> p_pos;
    std::vector<double> p_neg;

    // kind == gauss_mixture: equal-weight components per class.
    std::vector<GaussianComponent> pos_components;
    std::vector<GaussianComponent> neg_components;

    // kind == two_moons.
    double moon_noise = 0.1;

    int dim() const;
    int num_components() const;
    void validate() const;

    static PuScenario make_discrete(double alpha, double c, std::vector<double> p_pos,
                                    std::vector<double> p_neg);
    static PuScenario make_two_moons(double alpha, double c, double noise = 0.1);
    // One positive cluster plus (n_clusters - 1) negative clusters with means
    // drawn on a sphere of the given radius.
    static PuScenario make_gauss_clusters(double alpha, double c, int n_clusters, int dim,
                                          double radius, double sigma, std::uint64_t seed);
};

struct PuSample {
    Vec x;
    int y = -1;      // 1 positive, 0 negative, -1 unknown
    bool s = false;  // labeled flag; implies y == 1
    int cls = -1;    // generating component id, -1 unknown
};

struct PuDataset {
    std::vector<PuSample> samples;
    PuScenario scenario;
    std::uint64_t seed = 0;

    bool has_truth() const;
    std::size_t size() const { return samples.size(); }
};

struct AugmentationSpec {
    // Additive Gaussian noise, scaled per dimension by this fraction of the
    // data's per-dimension standard deviation.
    double sigma_scale = 0.1;
    // Draw positives as fresh samples of the anchor's component instead
    // (needs recorded component ids).
    bool class_resample = false;
    // Also emit m_u true negatives per anchor for oracle-loss evaluation.
    bool emit_oracle_negatives = false;
};

// One anchor's raw-feature views, ready for encoding.
struct ContrastiveBatch {
    Vec anchor;
    int anchor_cls = -1;
    std::vector<Vec> positives;
    std::vector<Vec> unlabeled;
    std::vector<Vec> oracle_negatives;
};

// n i.i.d. draws from the population, true class recorded, nothing labeled.
PuDataset sample_population(const PuScenario& scenario, int n, std::uint64_t seed);

// Labels each true positive independently with probability c.
PuDataset apply_scar(const PuDataset& dataset);

// Recovers the negative density from the unlabeled and positive ones via the
// affine combination cu * p_u - cp * p_pos. Entries below -1e-9 mean the
// inputs are not a consistent scenario and raise an error.
std::vector<double> negative_density_from_pu(const std::vector<double>& p_unlabeled,
                                             const std::vector<double>& p_positive,
                                             const PuCoefficients& coeffs);

// p_u = (alpha*(1-c)*p_pos + (1-alpha)*p_neg) / (1 - alpha*c), exactly.
std::vector<double> derive_unlabeled_density(const PuScenario& scenario);

// p = alpha * p_pos + (1 - alpha) * p_neg on the discrete support.
std::vector<double> discrete_population_density(const PuScenario& scenario);

// Groups the dataset into anchor batches with augmented positives and
// uniformly drawn unlabeled samples (anchor excluded, draws distinct).
std::vector<ContrastiveBatch> make_contrastive_batches(const PuDataset& dataset, int batch_size,
                                                       int m_u, int m_plus,
                                                       const AugmentationSpec& augmentation,
                                                       std::uint64_t seed);

// Per-dimension standard deviation of the dataset features.
Vec feature_stddev(const PuDataset& dataset);

}  // namespace pucl
