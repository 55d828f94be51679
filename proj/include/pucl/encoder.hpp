#pragma once

#include <cstdint>
#include <vector>

#include "pucl/core_loss.hpp"
#include "pucl/linalg.hpp"
#include "pucl/scenario.hpp"

namespace pucl {

enum class Activation { tanh_fn, relu };

// Feed-forward encoder mapping raw features to the unit sphere. Hidden layers
// apply the activation; the final linear output is sphere-projected.
struct EncoderParams {
    std::vector<Matrix> weights;  // layer l maps dims[l] -> dims[l+1]
    std::vector<Vec> biases;
    Activation activation = Activation::tanh_fn;

    int input_dim() const;
    int output_dim() const;
    std::size_t num_layers() const { return weights.size(); }
    void validate() const;
};

// Xavier-uniform weights, zero biases. dims = {input, hidden..., output}.
EncoderParams init_encoder(const std::vector<int>& dims, Activation activation,
                           std::uint64_t seed);

// Everything forward() computed, kept for the backward pass.
struct ForwardTrace {
    std::vector<Vec> inputs;  // input to each layer
    std::vector<Vec> pre;     // each layer's linear output
    double raw_norm = 0.0;    // norm of the last linear output
    Vec embedding;            // sphere-projected output
};

UnitEmbedding forward(const EncoderParams& params, const Vec& x);
ForwardTrace forward_trace(const EncoderParams& params, const Vec& x);

// Gradients with the same shapes as EncoderParams, plus the loss they belong
// to and the estimator diagnostics observed while computing it.
struct GradientBundle {
    std::vector<Matrix> d_weights;
    std::vector<Vec> d_biases;
    double loss_value = 0.0;
    LossReport report;

    bool finite() const;
};

// Which views play the contrast role in the loss.
enum class ContrastSource { unlabeled_pool, oracle_negatives };

// Encodes one raw batch; the chosen contrast views land in the unlabeled slot.
EncodedBatch encode_batch(const EncoderParams& params, const ContrastiveBatch& batch,
                          ContrastSource source = ContrastSource::unlabeled_pool);

// Analytic gradient of the batch loss (mean over anchors) with respect to all
// encoder parameters. Gradients flow through every view — anchor, positives
// (both roles), and contrast samples; a clamped estimator contributes zero
// through the clamp, matching the subgradient convention of the loss.
GradientBundle backward_pucl(const EncoderParams& params,
                             const std::vector<ContrastiveBatch>& batches,
                             const PuCoefficients& coeffs, int n_effective, double tau = 1.0,
                             ContrastSource source = ContrastSource::unlabeled_pool);

struct OptState {
    std::vector<Matrix> vel_weights;
    std::vector<Vec> vel_biases;
};

// Classical momentum: v = momentum*v + g; p -= lr*v. State is created on
// first use and must keep matching shapes afterwards.
void sgd_step(EncoderParams& params, const GradientBundle& grads, double lr, double momentum,
              OptState& state);

}  // namespace pucl
