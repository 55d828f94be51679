#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pucl/core_loss.hpp"
#include "pucl/linalg.hpp"

namespace pucl {

struct ProbeResult {
    double accuracy = 0.0;
    std::vector<int> class_labels;          // sorted distinct labels
    std::vector<double> per_class_accuracy; // aligned with class_labels
    std::uint64_t split_seed = 0;
    int iterations = 0;
};

// Multinomial logistic regression on frozen embeddings: stratified
// train/test split, L2-regularized full-batch gradient descent from zero
// initialization, test-set accuracy. Zero init keeps the whole trajectory
// equivariant under orthogonal rotations of the embedding space.
ProbeResult linear_probe(const std::vector<UnitEmbedding>& embeddings,
                         const std::vector<int>& labels, double split_fraction = 0.8,
                         std::uint64_t seed = 0);

// Centered PCA projection onto the top-2 principal components. Sign
// convention: the first nonzero loading of each component is positive.
std::vector<std::array<double, 2>> project_2d(const std::vector<UnitEmbedding>& embeddings);

}  // namespace pucl
