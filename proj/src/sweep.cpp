#include "pucl/sweep.hpp"

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "pucl/errors.hpp"
#include "pucl/eval.hpp"

namespace pucl {

namespace {

int thread_budget(int requested) {
    int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("PUCL_THREADS")) {
        int cap = 0;
        std::string_view text(env);
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), cap);
        require(ec == std::errc() && ptr == text.data() + text.size() && cap >= 1,
                "PUCL_THREADS must be a positive integer");
        if (cap < n) n = cap;
    }
    return n;
}

}  // namespace

std::vector<int> probe_labels(const PuDataset& dataset) {
    bool all_cls = !dataset.samples.empty();
    for (const auto& smp : dataset.samples)
        if (smp.cls < 0) all_cls = false;
    std::vector<int> labels;
    labels.reserve(dataset.size());
    if (all_cls) {
        for (const auto& smp : dataset.samples) labels.push_back(smp.cls);
        return labels;
    }
    require(dataset.has_truth(), "probe needs class labels (component ids or binary truth)");
    for (const auto& smp : dataset.samples) labels.push_back(smp.y);
    return labels;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const PuDataset& dataset) {
    require(!spec.alphas.empty(), "sweep: alpha axis is empty");
    require(!spec.cs.empty(), "sweep: c axis is empty");
    require(!spec.m_us.empty(), "sweep: m_u axis is empty");
    require(!spec.seeds.empty(), "sweep: seed axis is empty");

    // Materialize the grid up front so row order is the loop order, not the
    // completion order.
    struct Cell {
        TrainConfig config;
        SweepRow row;
    };
    std::vector<Cell> cells;
    for (double alpha : spec.alphas)
        for (double c : spec.cs)
            for (int m_u : spec.m_us)
                for (std::uint64_t seed : spec.seeds) {
                    Cell cell;
                    cell.config = spec.base;
                    cell.config.alpha = alpha;
                    cell.config.c = c;
                    cell.config.m_u = m_u;
                    cell.config.seed = seed;
                    cell.config = cell.config.normalized();
                    cell.config.validate();
                    cell.row = {alpha, c, m_u, seed, 0.0, 0.0, 0.0};
                    cells.push_back(std::move(cell));
                }
    std::vector<int> labels = probe_labels(dataset);

    auto run_cell = [&](Cell& cell) {
        TrainResult result = train(cell.config, dataset);
        std::vector<UnitEmbedding> embeddings;
        embeddings.reserve(dataset.size());
        for (const auto& smp : dataset.samples)
            embeddings.push_back(forward(result.params, smp.x));
        ProbeResult probe =
            linear_probe(embeddings, labels, spec.probe_split_fraction, cell.config.seed);
        cell.row.probe_acc = probe.accuracy;
        if (!result.log.empty()) {
            cell.row.final_loss = result.log.back().loss;
            cell.row.clamp_rate = result.log.back().clamp_rate;
        }
    };

    int n_threads = thread_budget(spec.threads);
    if (n_threads > static_cast<int>(cells.size())) n_threads = static_cast<int>(cells.size());
    if (n_threads <= 1) {
        for (Cell& cell : cells) run_cell(cell);
    } else {
        std::atomic<std::size_t> next{0};
        std::mutex fail_mutex;
        std::exception_ptr failure;
        auto worker = [&] {
            while (true) {
                std::size_t idx = next.fetch_add(1);
                if (idx >= cells.size()) return;
                try {
                    run_cell(cells[idx]);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(fail_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    std::vector<SweepRow> rows;
    rows.reserve(cells.size());
    for (const Cell& cell : cells) rows.push_back(cell.row);
    return rows;
}

}  // namespace pucl
