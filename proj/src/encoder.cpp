#include "pucl/encoder.hpp"

#include <cmath>
#include <string>

#include "pucl/errors.hpp"
#include "pucl/rng.hpp"

namespace pucl {

namespace {

double activate(Activation act, double z) {
    return act == Activation::tanh_fn ? std::tanh(z) : (z > 0.0 ? z : 0.0);
}

// Derivative in terms of pre-activation z and activation output a.
double activate_grad(Activation act, double z, double a) {
    return act == Activation::tanh_fn ? 1.0 - a * a : (z > 0.0 ? 1.0 : 0.0);
}

// Accumulates one view's embedding gradient into the parameter gradients.
void backprop_view(const EncoderParams& params, const ForwardTrace& trace, const Vec& g_emb,
                   std::vector<Matrix>& d_weights, std::vector<Vec>& d_biases) {
    std::size_t last = params.num_layers() - 1;
    // Sphere projection e = z/r pulls back as (g - (g.e)e)/r.
    double ge = dot(g_emb, trace.embedding);
    Vec g(trace.embedding.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = (g_emb[i] - ge * trace.embedding[i]) / trace.raw_norm;

    for (std::size_t l = last + 1; l-- > 0;) {
        const Vec& in = trace.inputs[l];
        Matrix& dw = d_weights[l];
        Vec& db = d_biases[l];
        for (std::size_t i = 0; i < dw.rows; ++i) {
            double gi = g[i];
            db[i] += gi;
            double* row = &dw.a[i * dw.cols];
            for (std::size_t j = 0; j < dw.cols; ++j) row[j] += gi * in[j];
        }
        if (l == 0) break;
        Vec g_in = matvec_t(params.weights[l], g);
        // Through the hidden activation of the previous layer.
        const Vec& z = trace.pre[l - 1];
        const Vec& a = trace.inputs[l];
        for (std::size_t i = 0; i < g_in.size(); ++i)
            g_in[i] *= activate_grad(params.activation, z[i], a[i]);
        g = std::move(g_in);
    }
}

}  // namespace

int EncoderParams::input_dim() const {
    return weights.empty() ? 0 : static_cast<int>(weights.front().cols);
}

int EncoderParams::output_dim() const {
    return weights.empty() ? 0 : static_cast<int>(weights.back().rows);
}

void EncoderParams::validate() const {
    require(!weights.empty() && weights.size() == biases.size(),
            "encoder: weights/biases must be nonempty and aligned");
    for (std::size_t l = 0; l < weights.size(); ++l) {
        require(weights[l].rows >= 1 && weights[l].cols >= 1, "encoder: empty layer");
        require(biases[l].size() == weights[l].rows, "encoder: bias shape mismatch");
        if (l > 0)
            require(weights[l].cols == weights[l - 1].rows,
                    "encoder: layer dimensions do not chain");
        for (double v : weights[l].a)
            require(std::isfinite(v), "encoder: non-finite weight");
        for (double v : biases[l])
            require(std::isfinite(v), "encoder: non-finite bias");
    }
    require(output_dim() >= 2, "encoder: output dimension must be >= 2");
}

EncoderParams init_encoder(const std::vector<int>& dims, Activation activation,
                           std::uint64_t seed) {
    require(dims.size() >= 2, "init_encoder: need at least input and output dims");
    for (int d : dims) require(d >= 1, "init_encoder: dims must be positive");
    require(dims.back() >= 2, "init_encoder: output dimension must be >= 2");
    EncoderParams p;
    p.activation = activation;
    Rng root(seed);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        int fan_in = dims[l], fan_out = dims[l + 1];
        double bound = std::sqrt(6.0 / (fan_in + fan_out));
        Matrix w(fan_out, fan_in);
        Rng r = root.split("layer", static_cast<std::uint64_t>(l));
        for (double& v : w.a) v = (2.0 * r.next_double() - 1.0) * bound;
        p.weights.push_back(std::move(w));
        p.biases.emplace_back(fan_out, 0.0);
    }
    p.validate();
    return p;
}

ForwardTrace forward_trace(const EncoderParams& params, const Vec& x) {
    require(static_cast<int>(x.size()) == params.input_dim(),
            "forward: input dimension " + std::to_string(x.size()) + " != " +
                std::to_string(params.input_dim()));
    ForwardTrace t;
    Vec a = x;
    for (std::size_t l = 0; l < params.num_layers(); ++l) {
        t.inputs.push_back(a);
        Vec z = matvec(params.weights[l], a);
        axpy(1.0, params.biases[l], z);
        t.pre.push_back(z);
        if (l + 1 < params.num_layers()) {
            for (double& v : z) v = activate(params.activation, v);
            a = std::move(z);
        } else {
            a = std::move(z);
        }
    }
    t.raw_norm = norm2(a);
    require(t.raw_norm >= 1e-12, "forward: degenerate pre-projection output (norm ~ 0)");
    t.embedding = a;
    for (double& v : t.embedding) v /= t.raw_norm;
    return t;
}

UnitEmbedding forward(const EncoderParams& params, const Vec& x) {
    return UnitEmbedding(forward_trace(params, x).embedding);
}

bool GradientBundle::finite() const {
    for (const auto& m : d_weights)
        for (double v : m.a)
            if (!std::isfinite(v)) return false;
    for (const auto& b : d_biases)
        for (double v : b)
            if (!std::isfinite(v)) return false;
    return std::isfinite(loss_value);
}

EncodedBatch encode_batch(const EncoderParams& params, const ContrastiveBatch& batch,
                          ContrastSource source) {
    const auto& contrast =
        source == ContrastSource::unlabeled_pool ? batch.unlabeled : batch.oracle_negatives;
    require(!contrast.empty(), source == ContrastSource::unlabeled_pool
                                   ? "encode_batch: no unlabeled views"
                                   : "encode_batch: no oracle negatives in batch");
    EncodedBatch out{forward(params, batch.anchor), {}, {}};
    out.positives.reserve(batch.positives.size());
    for (const auto& v : batch.positives) out.positives.push_back(forward(params, v));
    out.unlabeled.reserve(contrast.size());
    for (const auto& v : contrast) out.unlabeled.push_back(forward(params, v));
    return out;
}

GradientBundle backward_pucl(const EncoderParams& params,
                             const std::vector<ContrastiveBatch>& batches,
                             const PuCoefficients& coeffs, int n_effective, double tau,
                             ContrastSource source) {
    params.validate();
    require(!batches.empty(), "backward_pucl: batch must be nonempty");
    require(n_effective >= 1, "backward_pucl: n_effective must be >= 1");
    require(tau > 0.0, "backward_pucl: tau must be positive");

    GradientBundle out;
    for (const auto& w : params.weights) out.d_weights.emplace_back(w.rows, w.cols);
    for (const auto& b : params.biases) out.d_biases.emplace_back(b.size(), 0.0);

    double floor = clamp_floor(tau);
    double inv_b = 1.0 / static_cast<double>(batches.size());
    double n_eff = static_cast<double>(n_effective);

    std::vector<EncodedBatch> encoded;
    encoded.reserve(batches.size());

    for (const auto& raw : batches) {
        const auto& contrast =
            source == ContrastSource::unlabeled_pool ? raw.unlabeled : raw.oracle_negatives;
        require(!raw.positives.empty(), "backward_pucl: batch entry without positives");
        require(!contrast.empty(), "backward_pucl: batch entry without contrast views");

        ForwardTrace anchor = forward_trace(params, raw.anchor);
        std::vector<ForwardTrace> pos, con;
        pos.reserve(raw.positives.size());
        con.reserve(contrast.size());
        for (const auto& v : raw.positives) pos.push_back(forward_trace(params, v));
        for (const auto& v : contrast) con.push_back(forward_trace(params, v));

        std::size_t m_p = pos.size(), m_u = con.size();

        // Same arithmetic as the loss module: per-pair h, then index-order means.
        std::vector<double> h_p(m_p), h_u(m_u);
        for (std::size_t j = 0; j < m_p; ++j)
            h_p[j] = std::exp(dot(anchor.embedding, pos[j].embedding) / tau);
        for (std::size_t i = 0; i < m_u; ++i)
            h_u[i] = std::exp(dot(anchor.embedding, con[i].embedding) / tau);
        double sum_p = 0.0, sum_u = 0.0;
        for (double h : h_p) sum_p += h;
        for (double h : h_u) sum_u += h;
        double mean_p = sum_p / static_cast<double>(m_p);
        double mean_u = sum_u / static_cast<double>(m_u);
        double raw_mu = coeffs.coef_unlabeled * mean_u - coeffs.coef_positive * mean_p;
        bool clamped = raw_mu < floor;
        double mu = clamped ? floor : raw_mu;
        double h_num = h_p[0];
        double denom = h_num + n_eff * mu;

        // d(loss)/d(h) terms, already carrying the 1/B batch-mean factor.
        double dmu = clamped ? 0.0 : inv_b * n_eff / denom;
        double d_hu = dmu * coeffs.coef_unlabeled / static_cast<double>(m_u);
        double d_hp_est = -dmu * coeffs.coef_positive / static_cast<double>(m_p);
        double d_hnum = inv_b * (1.0 / denom - 1.0 / h_num);

        // Chain through h = exp(s/tau): dL/de_a += (dL/dh)(h/tau) e_b and
        // symmetrically for the other endpoint of each pair.
        Vec g_anchor(anchor.embedding.size(), 0.0);
        std::vector<Vec> g_pos(m_p, Vec(anchor.embedding.size(), 0.0));
        std::vector<Vec> g_con(m_u, Vec(anchor.embedding.size(), 0.0));
        for (std::size_t j = 0; j < m_p; ++j) {
            double d_h = d_hp_est + (j == 0 ? d_hnum : 0.0);
            double w = d_h * h_p[j] / tau;
            axpy(w, pos[j].embedding, g_anchor);
            axpy(w, anchor.embedding, g_pos[j]);
        }
        for (std::size_t i = 0; i < m_u; ++i) {
            double w = d_hu * h_u[i] / tau;
            axpy(w, con[i].embedding, g_anchor);
            axpy(w, anchor.embedding, g_con[i]);
        }

        backprop_view(params, anchor, g_anchor, out.d_weights, out.d_biases);
        for (std::size_t j = 0; j < m_p; ++j)
            backprop_view(params, pos[j], g_pos[j], out.d_weights, out.d_biases);
        for (std::size_t i = 0; i < m_u; ++i)
            backprop_view(params, con[i], g_con[i], out.d_weights, out.d_biases);

        EncodedBatch enc{UnitEmbedding(anchor.embedding), {}, {}};
        for (auto& t : pos) enc.positives.push_back(UnitEmbedding(std::move(t.embedding)));
        for (auto& t : con) enc.unlabeled.push_back(UnitEmbedding(std::move(t.embedding)));
        encoded.push_back(std::move(enc));
    }

    out.report = pucl_batch_loss(encoded, coeffs, n_effective, tau);
    out.loss_value = out.report.loss;
    return out;
}

void sgd_step(EncoderParams& params, const GradientBundle& grads, double lr, double momentum,
              OptState& state) {
    require(lr >= 0.0, "sgd_step: lr must be nonnegative");
    require(momentum >= 0.0 && momentum < 1.0, "sgd_step: momentum must be in [0,1)");
    require(grads.d_weights.size() == params.weights.size() &&
                grads.d_biases.size() == params.biases.size(),
            "sgd_step: gradient shapes do not match parameters");
    if (!grads.finite()) throw TrainingDivergence("sgd_step: non-finite gradient");

    if (state.vel_weights.empty()) {
        for (const auto& w : params.weights) state.vel_weights.emplace_back(w.rows, w.cols);
        for (const auto& b : params.biases) state.vel_biases.emplace_back(b.size(), 0.0);
    }
    require(state.vel_weights.size() == params.weights.size(),
            "sgd_step: optimizer state shape mismatch");

    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        require(grads.d_weights[l].rows == params.weights[l].rows &&
                    grads.d_weights[l].cols == params.weights[l].cols &&
                    grads.d_biases[l].size() == params.biases[l].size(),
                "sgd_step: gradient shapes do not match parameters");
        auto& vw = state.vel_weights[l];
        for (std::size_t i = 0; i < vw.a.size(); ++i) {
            vw.a[i] = momentum * vw.a[i] + grads.d_weights[l].a[i];
            params.weights[l].a[i] -= lr * vw.a[i];
        }
        auto& vb = state.vel_biases[l];
        for (std::size_t i = 0; i < vb.size(); ++i) {
            vb[i] = momentum * vb[i] + grads.d_biases[l][i];
            params.biases[l][i] -= lr * vb[i];
        }
    }
}

}  // namespace pucl
