#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "pucl/encoder.hpp"
#include "pucl/errors.hpp"
#include "pucl/rng.hpp"

using namespace pucl;

namespace {

EncoderParams identity_encoder(int d) {
    EncoderParams p;
    Matrix w(d, d);
    for (int i = 0; i < d; ++i) w(i, i) = 1.0;
    p.weights.push_back(w);
    p.biases.emplace_back(d, 0.0);
    return p;
}

Vec random_vec(Rng& rng, int d, double scale = 1.0) {
    Vec v(d);
    for (double& e : v) e = scale * rng.next_gaussian();
    return v;
}

ContrastiveBatch random_batch(Rng& rng, int d, int m_plus, int m_u) {
    ContrastiveBatch b;
    b.anchor = random_vec(rng, d);
    for (int j = 0; j < m_plus; ++j) b.positives.push_back(random_vec(rng, d));
    for (int i = 0; i < m_u; ++i) b.unlabeled.push_back(random_vec(rng, d));
    return b;
}

double batch_loss_of(const EncoderParams& params, const std::vector<ContrastiveBatch>& batches,
                     const PuCoefficients& coeffs, int n_eff, double tau) {
    std::vector<EncodedBatch> enc;
    for (const auto& b : batches) enc.push_back(encode_batch(params, b));
    return pucl_batch_loss(enc, coeffs, n_eff, tau).loss;
}

}  // namespace

TEST_CASE("forward through an identity layer is the sphere projection") {
    EncoderParams p = identity_encoder(3);
    UnitEmbedding out = forward(p, {1.0, 0.0, 0.0});
    CHECK(out.values() == Vec{1.0, 0.0, 0.0});

    Rng rng(5);
    for (int i = 0; i < 20; ++i) {
        Vec x = random_vec(rng, 3, 2.0);
        UnitEmbedding e = forward(p, x);
        double n = norm2(x);
        for (int k = 0; k < 3; ++k) CHECK(std::abs(e.values()[k] - x[k] / n) <= 1e-12);
    }
}

TEST_CASE("forward always lands on the unit sphere") {
    EncoderParams p = init_encoder({6, 16, 8}, Activation::tanh_fn, 99);
    Rng rng(17);
    for (int i = 0; i < 100; ++i) {
        UnitEmbedding e = forward(p, random_vec(rng, 6, 3.0));
        CHECK(std::abs(norm2(e.values()) - 1.0) <= 1e-9);
    }
}

TEST_CASE("forward is invariant to positive rescaling before projection") {
    EncoderParams p = init_encoder({4, 8, 5}, Activation::tanh_fn, 3);
    EncoderParams scaled = p;
    for (double& v : scaled.weights.back().a) v *= 7.5;
    for (double& v : scaled.biases.back()) v *= 7.5;
    Rng rng(29);
    for (int i = 0; i < 30; ++i) {
        Vec x = random_vec(rng, 4);
        Vec a = forward(p, x).values();
        Vec b = forward(scaled, x).values();
        for (int k = 0; k < 5; ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-12);
    }
}

TEST_CASE("degenerate projections and bad inputs are errors") {
    EncoderParams zero;
    zero.weights.emplace_back(3, 3);  // all-zero map
    zero.biases.emplace_back(3, 0.0);
    CHECK_THROWS_AS(forward(zero, {1.0, 2.0, 3.0}), ContractViolation);

    EncoderParams p = init_encoder({4, 6, 3}, Activation::tanh_fn, 1);
    CHECK_THROWS_AS(forward(p, {1.0, 2.0}), ContractViolation);  // wrong input dim
    CHECK_THROWS_AS(init_encoder({4}, Activation::tanh_fn, 1), ContractViolation);
    CHECK_THROWS_AS(init_encoder({4, 1}, Activation::tanh_fn, 1), ContractViolation);
}

TEST_CASE("initialization is seeded and respects the fan bound") {
    EncoderParams a = init_encoder({5, 8, 4}, Activation::tanh_fn, 42);
    EncoderParams b = init_encoder({5, 8, 4}, Activation::tanh_fn, 42);
    EncoderParams c = init_encoder({5, 8, 4}, Activation::tanh_fn, 43);
    CHECK(a.weights[0].a == b.weights[0].a);
    CHECK(a.weights[1].a == b.weights[1].a);
    CHECK(a.weights[0].a != c.weights[0].a);

    double bound0 = std::sqrt(6.0 / (5 + 8));
    for (double v : a.weights[0].a) CHECK(std::abs(v) <= bound0);
    for (double v : a.biases[0]) CHECK(v == 0.0);
    for (double v : a.biases[1]) CHECK(v == 0.0);
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(1234);
    EncoderParams params = init_encoder({5, 8, 4}, Activation::tanh_fn, 555);
    PuCoefficients coeffs(0.2, 0.3);
    const int n_eff = 16;
    const double tau = 1.0;

    std::vector<ContrastiveBatch> batches;
    for (int i = 0; i < 3; ++i) batches.push_back(random_batch(rng, 5, 2, 4));

    GradientBundle g = backward_pucl(params, batches, coeffs, n_eff, tau);
    REQUIRE(g.report.clamp_active_count == 0);
    for (double m : g.report.mu_hat_per_anchor)
        REQUIRE(m >= clamp_floor(tau) + 1e-3);  // keep clear of the kink

    const double h = 1e-5;
    double max_rel = 0.0;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        for (std::size_t i = 0; i < params.weights[l].a.size(); ++i) {
            EncoderParams pp = params, pm = params;
            pp.weights[l].a[i] += h;
            pm.weights[l].a[i] -= h;
            double num = (batch_loss_of(pp, batches, coeffs, n_eff, tau) -
                          batch_loss_of(pm, batches, coeffs, n_eff, tau)) /
                         (2.0 * h);
            double ana = g.d_weights[l].a[i];
            double rel = std::abs(ana - num) / std::max({std::abs(ana), std::abs(num), 1e-4});
            if (rel > max_rel) max_rel = rel;
        }
        for (std::size_t i = 0; i < params.biases[l].size(); ++i) {
            EncoderParams pp = params, pm = params;
            pp.biases[l][i] += h;
            pm.biases[l][i] -= h;
            double num = (batch_loss_of(pp, batches, coeffs, n_eff, tau) -
                          batch_loss_of(pm, batches, coeffs, n_eff, tau)) /
                         (2.0 * h);
            double ana = g.d_biases[l][i];
            double rel = std::abs(ana - num) / std::max({std::abs(ana), std::abs(num), 1e-4});
            if (rel > max_rel) max_rel = rel;
        }
    }
    CHECK(max_rel < 1e-5);
}

TEST_CASE("gradients flow through the estimator's positive views") {
    // With more than one positive, non-numerator positives touch the loss only
    // through the estimator mean; their gradient must still be nonzero.
    Rng rng(77);
    EncoderParams params = init_encoder({4, 6, 3}, Activation::tanh_fn, 7);
    std::vector<ContrastiveBatch> batches{random_batch(rng, 4, 3, 5)};
    PuCoefficients coeffs(0.3, 0.2);
    GradientBundle g = backward_pucl(params, batches, coeffs, 8, 1.0);
    REQUIRE(g.report.clamp_active_count == 0);
    double norm = 0.0;
    for (const auto& m : g.d_weights) for (double v : m.a) norm += v * v;
    CHECK(norm > 0.0);

    // Against finite differences on one weight for the same batch.
    EncoderParams pp = params, pm = params;
    pp.weights[0].a[1] += 1e-5;
    pm.weights[0].a[1] -= 1e-5;
    double num = (batch_loss_of(pp, batches, coeffs, 8, 1.0) -
                  batch_loss_of(pm, batches, coeffs, 8, 1.0)) / 2e-5;
    CHECK(std::abs(g.d_weights[0].a[1] - num) <=
          1e-5 * std::max({std::abs(num), std::abs(g.d_weights[0].a[1]), 1e-4}));
}

TEST_CASE("clamped anchors contribute nothing through the estimator") {
    // Two batches that differ only in their unlabeled views, both clamped:
    // the unlabeled views' only gradient path is through the estimator, so
    // the full gradient bundles must coincide exactly.
    EncoderParams p = identity_encoder(3);
    PuCoefficients k(0.5, 0.0);
    ContrastiveBatch a;
    a.anchor = {1.0, 0.0, 0.0};
    a.positives = {{1.0, 0.0, 0.0}};
    a.unlabeled = {{-1.0, 0.0, 0.0}};
    ContrastiveBatch b = a;
    b.unlabeled = {{0.0, -1.0, 0.0}};

    GradientBundle ga = backward_pucl(p, {a}, k, 4, 1.0);
    GradientBundle gb = backward_pucl(p, {b}, k, 4, 1.0);
    REQUIRE(ga.report.clamp_active_count == 1);
    REQUIRE(gb.report.clamp_active_count == 1);
    CHECK(ga.loss_value == gb.loss_value);
    for (std::size_t l = 0; l < ga.d_weights.size(); ++l) {
        CHECK(ga.d_weights[l].a == gb.d_weights[l].a);
        CHECK(ga.d_biases[l] == gb.d_biases[l]);
    }
}

TEST_CASE("backward loss value equals the loss module's batch loss") {
    Rng rng(31);
    EncoderParams params = init_encoder({4, 10, 6}, Activation::tanh_fn, 11);
    PuCoefficients coeffs(0.15, 0.1);
    std::vector<ContrastiveBatch> batches;
    for (int i = 0; i < 4; ++i) batches.push_back(random_batch(rng, 4, 2, 6));
    GradientBundle g = backward_pucl(params, batches, coeffs, 12, 1.0);
    CHECK(g.loss_value == batch_loss_of(params, batches, coeffs, 12, 1.0));

    CHECK_THROWS_AS(backward_pucl(params, {}, coeffs, 12, 1.0), ContractViolation);
}

TEST_CASE("relu activation gradients also match finite differences") {
    Rng rng(91);
    EncoderParams params = init_encoder({4, 7, 3}, Activation::relu, 21);
    PuCoefficients coeffs(0.2, 0.5);
    std::vector<ContrastiveBatch> batches{random_batch(rng, 4, 1, 4)};
    GradientBundle g = backward_pucl(params, batches, coeffs, 8, 1.0);
    const double h = 1e-6;
    double max_rel = 0.0;
    for (std::size_t i = 0; i < params.weights[0].a.size(); ++i) {
        EncoderParams pp = params, pm = params;
        pp.weights[0].a[i] += h;
        pm.weights[0].a[i] -= h;
        double num = (batch_loss_of(pp, batches, coeffs, 8, 1.0) -
                      batch_loss_of(pm, batches, coeffs, 8, 1.0)) /
                     (2.0 * h);
        double rel = std::abs(g.d_weights[0].a[i] - num) /
                     std::max({std::abs(num), std::abs(g.d_weights[0].a[i]), 1e-4});
        if (rel > max_rel) max_rel = rel;
    }
    CHECK(max_rel < 1e-4);  // relu kinks allow a slightly looser band
}

TEST_CASE("sgd step: plain, zero-lr, and momentum updates") {
    EncoderParams p = init_encoder({3, 4, 2}, Activation::tanh_fn, 8);
    EncoderParams orig = p;
    GradientBundle g;
    for (const auto& w : p.weights) {
        Matrix m(w.rows, w.cols);
        for (double& v : m.a) v = 0.25;
        g.d_weights.push_back(m);
    }
    for (const auto& b : p.biases) g.d_biases.emplace_back(b.size(), 0.5);
    g.loss_value = 1.0;

    OptState st;
    sgd_step(p, g, 0.1, 0.0, st);
    for (std::size_t l = 0; l < p.weights.size(); ++l)
        for (std::size_t i = 0; i < p.weights[l].a.size(); ++i)
            CHECK(p.weights[l].a[i] == orig.weights[l].a[i] - 0.1 * 0.25);

    EncoderParams q = orig;
    OptState st2;
    sgd_step(q, g, 0.0, 0.0, st2);
    for (std::size_t l = 0; l < q.weights.size(); ++l)
        CHECK(q.weights[l].a == orig.weights[l].a);

    // v1 = g, v2 = 0.9 v1 + g: two steps move by lr(g + 1.9 g) = 2.9 lr g.
    EncoderParams r = orig;
    OptState st3;
    sgd_step(r, g, 0.1, 0.9, st3);
    sgd_step(r, g, 0.1, 0.9, st3);
    for (std::size_t l = 0; l < r.weights.size(); ++l)
        for (std::size_t i = 0; i < r.weights[l].a.size(); ++i)
            CHECK(std::abs(r.weights[l].a[i] - (orig.weights[l].a[i] - 0.1 * 2.9 * 0.25)) <=
                  1e-15);

    GradientBundle bad = g;
    bad.d_weights[0].a[0] = std::numeric_limits<double>::quiet_NaN();
    EncoderParams s = orig;
    OptState st4;
    CHECK_THROWS_AS(sgd_step(s, bad, 0.1, 0.0, st4), TrainingDivergence);

    GradientBundle wrong = g;
    wrong.d_weights.pop_back();
    CHECK_THROWS_AS(sgd_step(s, wrong, 0.1, 0.0, st4), ContractViolation);
}
