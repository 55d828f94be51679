#pragma once

#include <cstdint>
#include <vector>

#include "pucl/io.hpp"
#include "pucl/scenario.hpp"
#include "pucl/trainer.hpp"

namespace pucl {

// Cartesian ablation grid over the estimator knobs. Every axis must be
// non-empty; the base config supplies everything else.
struct SweepSpec {
    std::vector<double> alphas;
    std::vector<double> cs;
    std::vector<int> m_us;
    std::vector<std::uint64_t> seeds;
    TrainConfig base;
    double probe_split_fraction = 0.8;
    // 0 resolves to the hardware count; the PUCL_THREADS environment variable
    // caps whatever was requested.
    int threads = 0;
};

// Trains one model per grid cell, probes the frozen embeddings, and returns
// one row per cell in fixed grid order (alpha, then c, then m_u, then seed),
// independent of how the cells were scheduled across threads.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const PuDataset& dataset);

// Probe targets for a dataset: component ids when recorded, else binary
// truth. Errors out when neither is available.
std::vector<int> probe_labels(const PuDataset& dataset);

}  // namespace pucl
