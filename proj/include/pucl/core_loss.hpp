#pragma once

#include <cstddef>
#include <vector>

#include "pucl/errors.hpp"
#include "pucl/linalg.hpp"

namespace pucl {

// Point on the unit sphere S^{d-1}; the codomain of the encoder.
class UnitEmbedding {
public:
    static constexpr double kNormTolerance = 1e-9;

    explicit UnitEmbedding(Vec values);

    // Projects an arbitrary nonzero vector onto the sphere.
    static UnitEmbedding normalized(const Vec& raw);

    const Vec& values() const { return values_; }
    std::size_t dim() const { return values_.size(); }

private:
    Vec values_;
};

// Exponentiated inner-product similarity between two sphere points.
class SimilarityValue {
public:
    SimilarityValue(double value, double tau);
    double value() const { return value_; }
    double tau() const { return tau_; }

private:
    double value_;
    double tau_;
};

// Mixture coefficients that express the negative distribution through the
// unlabeled and positive ones: coef_unlabeled = (1-alpha*c)/(1-alpha),
// coef_positive = alpha*(1-c)/(1-alpha). Their difference is always 1.
struct PuCoefficients {
    double alpha;
    double c;
    double coef_unlabeled;
    double coef_positive;

    PuCoefficients(double alpha_in, double c_in);
};

// One anchor with its encoded positives and unlabeled samples.
struct EncodedBatch {
    UnitEmbedding anchor;
    std::vector<UnitEmbedding> positives;
    std::vector<UnitEmbedding> unlabeled;
};

// Batch loss plus the per-anchor estimator diagnostics.
struct LossReport {
    double loss = 0.0;
    std::vector<double> mu_hat_per_anchor;
    int clamp_active_count = 0;
    int n_effective = 0;
};

struct MuHatDetail {
    double value;    // after the floor
    double raw;      // affine combination before the floor
    bool clamped;    // raw fell below exp(-1/tau)
};

// Lower admissible value of both a similarity and the corrected estimator.
double clamp_floor(double tau);

// h(a, b) = exp(a.b / tau).
SimilarityValue similarity(const UnitEmbedding& a, const UnitEmbedding& b, double tau = 1.0);

// Per-anchor summand -log[h+ / (h+ + sum_i h_i)] over samples drawn as
// negatives from the unlabeled pool.
double standard_cl_loss(const UnitEmbedding& anchor, const UnitEmbedding& positive,
                        const std::vector<UnitEmbedding>& unlabeled, double tau = 1.0);

// Same summand over true negatives; the oracle target for bound checks.
double ideal_cl_loss(const UnitEmbedding& anchor, const UnitEmbedding& positive,
                     const std::vector<UnitEmbedding>& negatives, double tau = 1.0);

// Clamped estimate of the mean anchor-negative similarity:
// max{ cu * mean(h_unlabeled) - cp * mean(h_positive), exp(-1/tau) }.
MuHatDetail mu_hat_detail(const UnitEmbedding& anchor,
                          const std::vector<UnitEmbedding>& unlabeled,
                          const std::vector<UnitEmbedding>& positives,
                          const PuCoefficients& coeffs, double tau = 1.0);

double mu_hat(const UnitEmbedding& anchor, const std::vector<UnitEmbedding>& unlabeled,
              const std::vector<UnitEmbedding>& positives, const PuCoefficients& coeffs,
              double tau = 1.0);

// -log[h+ / (h+ + n_effective * mu)], evaluated as log1p for stability.
double decl_loss(const UnitEmbedding& anchor, const UnitEmbedding& positive, double mu,
                 int n_effective, double tau = 1.0);

// Mean corrected loss over a batch of anchors; positives[0] is the numerator
// positive, all positives feed the estimator's positive mean.
LossReport pucl_batch_loss(const std::vector<EncodedBatch>& batch, const PuCoefficients& coeffs,
                           int n_effective, double tau = 1.0);

// Worst-case gap (e^2 - 1) / (2 sqrt(N)) between the ideal loss and its
// mean-similarity approximation. Stated for tau = 1 only.
double theorem1_bound(int n_effective);

}  // namespace pucl
