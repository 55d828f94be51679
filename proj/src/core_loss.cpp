#include "pucl/core_loss.hpp"

#include <cmath>
#include <string>

namespace pucl {

namespace {

void check_pair(const UnitEmbedding& a, const UnitEmbedding& b) {
    require(a.dim() == b.dim(), "similarity: dimension mismatch (" + std::to_string(a.dim()) +
                                    " vs " + std::to_string(b.dim()) + ")");
}

double h_value(const UnitEmbedding& a, const UnitEmbedding& b, double tau) {
    check_pair(a, b);
    return std::exp(dot(a.values(), b.values()) / tau);
}

double mean_similarity(const UnitEmbedding& anchor, const std::vector<UnitEmbedding>& others,
                       double tau) {
    double s = 0.0;
    for (const auto& o : others) s += h_value(anchor, o, tau);
    return s / static_cast<double>(others.size());
}

// Shared NCE form: -log(h+ / (h+ + v)) computed as log1p(v / h+).
double nce_loss_from(double h_pos, double v) { return std::log1p(v / h_pos); }

}  // namespace

UnitEmbedding::UnitEmbedding(Vec values) : values_(std::move(values)) {
    require(values_.size() >= 2, "UnitEmbedding: dimension must be >= 2");
    double n = norm2(values_);
    require(std::fabs(n - 1.0) <= kNormTolerance,
            "UnitEmbedding: norm " + std::to_string(n) + " not unit within tolerance");
}

UnitEmbedding UnitEmbedding::normalized(const Vec& raw) {
    require(raw.size() >= 2, "UnitEmbedding: dimension must be >= 2");
    double n = norm2(raw);
    require(n >= 1e-12, "UnitEmbedding: degenerate vector, norm below 1e-12");
    Vec v(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) v[i] = raw[i] / n;
    return UnitEmbedding(std::move(v));
}

SimilarityValue::SimilarityValue(double value, double tau) : value_(value), tau_(tau) {
    require(tau > 0.0, "SimilarityValue: tau must be positive");
    // Unit inputs put the value in [e^{-1/tau}, e^{1/tau}]; allow for the
    // norm tolerance of the operands.
    const double slack = 1e-8;
    require(value >= std::exp(-1.0 / tau) * (1.0 - slack) &&
                value <= std::exp(1.0 / tau) * (1.0 + slack),
            "SimilarityValue: " + std::to_string(value) + " outside admissible range");
}

PuCoefficients::PuCoefficients(double alpha_in, double c_in) : alpha(alpha_in), c(c_in) {
    require(alpha > 0.0 && alpha < 1.0, "PuCoefficients: alpha must be in (0,1)");
    require(c >= 0.0 && c <= 1.0, "PuCoefficients: c must be in [0,1]");
    coef_unlabeled = (1.0 - alpha * c) / (1.0 - alpha);
    coef_positive = alpha * (1.0 - c) / (1.0 - alpha);
}

double clamp_floor(double tau) {
    require(tau > 0.0, "clamp_floor: tau must be positive");
    return std::exp(-1.0 / tau);
}

SimilarityValue similarity(const UnitEmbedding& a, const UnitEmbedding& b, double tau) {
    require(tau > 0.0, "similarity: tau must be positive");
    check_pair(a, b);
    return SimilarityValue(h_value(a, b, tau), tau);
}

double standard_cl_loss(const UnitEmbedding& anchor, const UnitEmbedding& positive,
                        const std::vector<UnitEmbedding>& unlabeled, double tau) {
    require(!unlabeled.empty(), "standard_cl_loss: unlabeled list must be nonempty");
    double h_pos = h_value(anchor, positive, tau);
    double v = 0.0;
    for (const auto& u : unlabeled) v += h_value(anchor, u, tau);
    return nce_loss_from(h_pos, v);
}

double ideal_cl_loss(const UnitEmbedding& anchor, const UnitEmbedding& positive,
                     const std::vector<UnitEmbedding>& negatives, double tau) {
    require(!negatives.empty(), "ideal_cl_loss: negative list must be nonempty");
    return standard_cl_loss(anchor, positive, negatives, tau);
}

MuHatDetail mu_hat_detail(const UnitEmbedding& anchor, const std::vector<UnitEmbedding>& unlabeled,
                          const std::vector<UnitEmbedding>& positives,
                          const PuCoefficients& coeffs, double tau) {
    require(!unlabeled.empty(), "mu_hat: unlabeled list must be nonempty");
    require(!positives.empty(), "mu_hat: positive list must be nonempty");
    double mean_u = mean_similarity(anchor, unlabeled, tau);
    double mean_p = mean_similarity(anchor, positives, tau);
    double raw = coeffs.coef_unlabeled * mean_u - coeffs.coef_positive * mean_p;
    double floor = clamp_floor(tau);
    bool clamped = raw < floor;
    return MuHatDetail{clamped ? floor : raw, raw, clamped};
}

double mu_hat(const UnitEmbedding& anchor, const std::vector<UnitEmbedding>& unlabeled,
              const std::vector<UnitEmbedding>& positives, const PuCoefficients& coeffs,
              double tau) {
    return mu_hat_detail(anchor, unlabeled, positives, coeffs, tau).value;
}

double decl_loss(const UnitEmbedding& anchor, const UnitEmbedding& positive, double mu,
                 int n_effective, double tau) {
    require(n_effective >= 1, "decl_loss: n_effective must be >= 1");
    require(mu >= clamp_floor(tau) - 1e-12,
            "decl_loss: mu " + std::to_string(mu) + " below the clamp floor");
    double h_pos = h_value(anchor, positive, tau);
    return nce_loss_from(h_pos, static_cast<double>(n_effective) * mu);
}

LossReport pucl_batch_loss(const std::vector<EncodedBatch>& batch, const PuCoefficients& coeffs,
                           int n_effective, double tau) {
    require(!batch.empty(), "pucl_batch_loss: batch must be nonempty");
    require(n_effective >= 1, "pucl_batch_loss: n_effective must be >= 1");
    LossReport report;
    report.n_effective = n_effective;
    report.mu_hat_per_anchor.reserve(batch.size());
    double total = 0.0;
    for (const auto& entry : batch) {
        MuHatDetail mu = mu_hat_detail(entry.anchor, entry.unlabeled, entry.positives, coeffs, tau);
        report.mu_hat_per_anchor.push_back(mu.value);
        if (mu.clamped) ++report.clamp_active_count;
        total += decl_loss(entry.anchor, entry.positives.front(), mu.value, n_effective, tau);
    }
    report.loss = total / static_cast<double>(batch.size());
    return report;
}

double theorem1_bound(int n_effective) {
    require(n_effective >= 1, "theorem1_bound: n_effective must be >= 1");
    const double e2m1 = std::exp(2.0) - 1.0;
    return e2m1 / (2.0 * std::sqrt(static_cast<double>(n_effective)));
}

}  // namespace pucl
