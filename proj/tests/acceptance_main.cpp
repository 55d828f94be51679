// Acceptance gate: exercises every promised property end to end and prints
// exactly one PASS/FAIL line per criterion.  Exits nonzero if any line fails.
//
// The downstream experiments (criteria 6 and 7) run on a fixed 10-component
// mixture with a deliberately narrow embedding: with only four output
// dimensions the encoder cannot afford to waste capacity pushing same-cluster
// samples apart, so the collision correction shows up in probe accuracy
// instead of disappearing into slack dimensions.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "pucl/core_loss.hpp"
#include "pucl/encoder.hpp"
#include "pucl/errors.hpp"
#include "pucl/eval.hpp"
#include "pucl/scenario.hpp"
#include "pucl/stats.hpp"
#include "pucl/sweep.hpp"
#include "pucl/trainer.hpp"
#include "pucl/verify.hpp"

namespace {

using namespace pucl;
namespace fs = std::filesystem;

struct Criterion {
    const char* label = "";
    bool pass = false;
    std::string detail;
};

class Stopwatch {
  public:
    long long ms() const {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

// ---- fixed downstream experiment ------------------------------------------
// Mixture and optimizer settings shared by criteria 5-7.  Frozen: the paired
// comparison and the ablation location are only meaningful against one
// declared configuration, not a tuned-per-run one.

constexpr double kAlpha = 0.1;
constexpr double kLabelFreq = 0.1;
constexpr int kClusters = 10;
constexpr int kDim = 8;
constexpr double kRadius = 3.0;
constexpr double kClusterSigma = 1.0;
constexpr std::uint64_t kScenarioSeed = 31;
constexpr int kSamples = 1200;
constexpr int kSeeds = 10;
constexpr double kProbeSplit = 0.8;

TrainConfig downstream_config(Objective objective, std::uint64_t seed) {
    TrainConfig cfg;
    cfg.objective = objective;
    cfg.alpha = kAlpha;
    cfg.c = kLabelFreq;
    cfg.m_u = 48;
    cfg.tau = 0.3;
    cfg.batch_size = 64;
    cfg.epochs = 24;
    cfg.lr = 0.05;
    cfg.momentum = 0.9;
    cfg.seed = seed;
    cfg.hidden = {32};
    cfg.emb_dim = 4;
    cfg.augmentation.sigma_scale = 0.6;
    return cfg;
}

std::vector<PuDataset> downstream_datasets() {
    PuScenario scen = PuScenario::make_gauss_clusters(kAlpha, kLabelFreq, kClusters, kDim,
                                                      kRadius, kClusterSigma, kScenarioSeed);
    std::vector<PuDataset> out;
    out.reserve(kSeeds);
    for (int s = 1; s <= kSeeds; ++s)
        out.push_back(apply_scar(sample_population(scen, kSamples, 1000 + s)));
    return out;
}

double probe_accuracy(const EncoderParams& params, const PuDataset& dataset,
                      std::uint64_t seed) {
    std::vector<UnitEmbedding> emb;
    emb.reserve(dataset.size());
    std::vector<int> labels;
    labels.reserve(dataset.size());
    for (const PuSample& s : dataset.samples) {
        emb.push_back(forward(params, s.x));
        labels.push_back(s.cls);
    }
    return linear_probe(emb, labels, kProbeSplit, seed).accuracy;
}

// Every training run the suite performs leaves its epoch log here so the
// clamp-floor audit (criterion 5) can sweep over all of them.
struct LoggedRun {
    std::string name;
    double tau = 1.0;
    std::vector<EpochRecord> log;
};

// ---- criteria --------------------------------------------------------------

Criterion oracle_criterion(const char* label, CheckResult result, long long elapsed_ms,
                           long long limit_ms) {
    Criterion c;
    c.label = label;
    bool in_time = elapsed_ms < limit_ms;
    c.pass = result.pass && in_time;
    c.detail = result.detail + "; " + std::to_string(elapsed_ms) + " ms (limit " +
               std::to_string(limit_ms) + ")";
    if (!in_time) c.detail += " EXCEEDED";
    return c;
}

Criterion criterion_density() {
    Stopwatch watch;
    CheckResult r = check_density_identity(100, 3001);
    return oracle_criterion("density-recovery", std::move(r), watch.ms(), 1000);
}

Criterion criterion_bound() {
    Stopwatch watch;
    CheckResult r = check_bound_gap(20, {16, 64, 256, 1024}, 3002);
    return oracle_criterion("bias-bound", std::move(r), watch.ms(), 120000);
}

Criterion criterion_reductions() {
    Criterion c;
    c.label = "objective-reductions";
    CheckResult batches = check_batch_reductions(1000, 3003);
    CheckResult trajectories = check_trajectory_reductions(10, 3004);
    c.pass = batches.pass && trajectories.pass;
    c.detail = batches.detail + "; " + trajectories.detail;
    return c;
}

Criterion criterion_gradients() {
    Criterion c;
    c.label = "gradient-check";
    CheckResult r = check_gradient_fd(50, 3005);
    c.pass = r.pass;
    c.detail = std::move(r.detail);
    return c;
}

struct DownstreamOutcome {
    Criterion comparison;   // criterion 6
    Criterion ablation;     // criterion 7
    std::vector<LoggedRun> runs;
    std::vector<SweepRow> sweep_rows;
};

DownstreamOutcome run_downstream() {
    DownstreamOutcome out;
    std::vector<PuDataset> datasets = downstream_datasets();

    // Paired comparison: same dataset, same init, same batch stream per seed;
    // the objective is the only difference.
    Stopwatch pair_watch;
    int wins = 0;
    int ties = 0;
    double pucl_total = 0.0;
    double stacl_total = 0.0;
    for (int s = 1; s <= kSeeds; ++s) {
        const PuDataset& ds = datasets[s - 1];
        TrainConfig pucl_cfg = downstream_config(Objective::pucl, s);
        TrainConfig stacl_cfg = downstream_config(Objective::stacl, s);
        TrainResult pucl_run = train(pucl_cfg, ds);
        TrainResult stacl_run = train(stacl_cfg, ds);
        out.runs.push_back({"pucl seed " + std::to_string(s), pucl_cfg.tau, pucl_run.log});
        out.runs.push_back({"stacl seed " + std::to_string(s), stacl_cfg.tau, stacl_run.log});
        double pucl_acc = probe_accuracy(pucl_run.params, ds, s);
        double stacl_acc = probe_accuracy(stacl_run.params, ds, s);
        pucl_total += pucl_acc;
        stacl_total += stacl_acc;
        if (pucl_acc > stacl_acc) ++wins;
        else if (pucl_acc == stacl_acc) ++ties;
    }
    long long pair_ms = pair_watch.ms();
    int trials = kSeeds - ties;
    double p_value = trials > 0 ? sign_test_pvalue(wins, trials) : 1.0;
    double mean_pucl = pucl_total / kSeeds;
    double mean_stacl = stacl_total / kSeeds;

    Criterion& cmp = out.comparison;
    cmp.label = "downstream-probe";
    bool in_time = pair_ms < 300000;
    cmp.pass = mean_pucl > mean_stacl && p_value < 0.05 && in_time;
    cmp.detail = std::to_string(wins) + (wins == 1 ? " win, " : " wins, ") +
                 std::to_string(ties) + (ties == 1 ? " tie over " : " ties over ") +
                 std::to_string(kSeeds) + " seeds; mean accuracy " + fmt("%.4f", mean_pucl) +
                 " vs " + fmt("%.4f", mean_stacl) + "; sign-test p " + fmt("%.4f", p_value) +
                 "; " + std::to_string(pair_ms) + " ms (limit 300000)";
    if (!in_time) cmp.detail += " EXCEEDED";

    // Ablation: per seed, the best cell of the alpha sweep should sit in the
    // interval around the true prior.
    const std::vector<double> grid{0.05, 0.1, 0.12, 0.15, 0.20};
    int in_window = 0;
    std::vector<int> best_counts(grid.size(), 0);
    for (int s = 1; s <= kSeeds; ++s) {
        SweepSpec spec;
        spec.alphas = grid;
        spec.cs = {kLabelFreq};
        spec.m_us = {48};
        spec.seeds = {static_cast<std::uint64_t>(s)};
        spec.base = downstream_config(Objective::pucl, s);
        spec.probe_split_fraction = kProbeSplit;
        std::vector<SweepRow> rows = run_sweep(spec, datasets[s - 1]);
        std::size_t best = 0;
        for (std::size_t k = 1; k < rows.size(); ++k)
            if (rows[k].probe_acc > rows[best].probe_acc) best = k;
        ++best_counts[best];
        if (rows[best].alpha >= 0.1 && rows[best].alpha <= 0.15) ++in_window;
        out.sweep_rows.insert(out.sweep_rows.end(), rows.begin(), rows.end());
    }

    Criterion& abl = out.ablation;
    abl.label = "alpha-ablation";
    abl.pass = in_window >= 7;
    std::ostringstream hist;
    for (std::size_t k = 0; k < grid.size(); ++k)
        hist << (k ? " " : "") << grid[k] << ":" << best_counts[k];
    abl.detail = "best alpha in [0.1,0.15] for " + std::to_string(in_window) + "/" +
                 std::to_string(kSeeds) + " seeds (histogram " + hist.str() + ")";
    return out;
}

Criterion criterion_clamp(std::vector<LoggedRun> runs, const std::vector<SweepRow>& rows) {
    Criterion c;
    c.label = "clamp-floor";

    // A few off-path configurations so the audit also covers the debiased and
    // oracle objectives plus a prior/frequency pair that keeps the clamp busy.
    PuScenario scen = PuScenario::make_gauss_clusters(kAlpha, kLabelFreq, kClusters, kDim,
                                                      kRadius, 0.5, kScenarioSeed);
    PuDataset ds = apply_scar(sample_population(scen, 300, 77));
    struct Extra {
        const char* name;
        Objective objective;
        double alpha, c, tau;
    };
    const Extra extras[] = {
        {"heavy clamp", Objective::pucl, 0.4, 0.05, 1.0},
        {"debiased", Objective::deb, 0.25, 0.0, 0.7},
        {"oracle negatives", Objective::ideal_oracle, kAlpha, kLabelFreq, 0.5},
    };
    for (const Extra& e : extras) {
        TrainConfig cfg;
        cfg.objective = e.objective;
        cfg.alpha = e.alpha;
        cfg.c = e.c;
        cfg.tau = e.tau;
        cfg.m_u = 16;
        cfg.batch_size = 50;
        cfg.epochs = 4;
        cfg.lr = 0.05;
        cfg.seed = 11;
        cfg.hidden = {16};
        cfg.emb_dim = 8;
        runs.push_back({e.name, cfg.tau, train(cfg, ds).log});
    }

    double min_margin = HUGE_VAL;
    int records = 0;
    bool ok = true;
    for (const LoggedRun& run : runs) {
        double floor = clamp_floor(run.tau);
        for (const EpochRecord& rec : run.log) {
            ++records;
            double margin = rec.min_mu_hat - floor;
            if (margin < min_margin) min_margin = margin;
            if (!(margin >= -1e-12) || !std::isfinite(rec.clamp_rate) ||
                rec.clamp_rate < 0.0 || rec.clamp_rate > 1.0 || !std::isfinite(rec.loss))
                ok = false;
        }
    }
    for (const SweepRow& row : rows)
        if (!std::isfinite(row.clamp_rate) || row.clamp_rate < 0.0 || row.clamp_rate > 1.0)
            ok = false;

    c.pass = ok && records > 0;
    c.detail = "audited " + std::to_string(records) + " epoch records from " +
               std::to_string(runs.size()) + " runs plus " + std::to_string(rows.size()) +
               " sweep cells; min floor margin " + fmt("%.3e", min_margin);
    return c;
}

// ---- criterion 8: the shipped binary behaves deterministically -------------

int run_command(const std::string& command) {
    int status = std::system(command.c_str());
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Criterion criterion_determinism() {
    Criterion c;
    c.label = "determinism";
    const std::string cli = PUCL_CLI_PATH;
    std::string dir_template = (fs::temp_directory_path() / "pucl-acceptance-XXXXXX").string();
    std::vector<char> raw(dir_template.begin(), dir_template.end());
    raw.push_back('\0');
    if (!mkdtemp(raw.data())) {
        c.detail = "could not create a scratch directory";
        return c;
    }
    fs::path dir(raw.data());

    std::vector<std::string> problems;
    auto expect = [&](bool ok, const std::string& what) {
        if (!ok) problems.push_back(what);
    };

    fs::path report_a = dir / "verify-a.txt";
    fs::path report_b = dir / "verify-b.txt";
    expect(run_command(cli + " verify --fast > " + report_a.string() + " 2>&1") == 0,
           "first verify run failed");
    expect(run_command(cli + " verify --fast > " + report_b.string() + " 2>&1") == 0,
           "second verify run failed");
    expect(slurp(report_a) == slurp(report_b), "verify reports differ between runs");

    fs::path data = dir / "moons.csv";
    expect(run_command(cli + " generate --preset two-moons --n 240 --alpha 0.3 --c 0.5"
                             " --seed 7 --out " + data.string() + " > /dev/null 2>&1") == 0,
           "generate failed");
    fs::path run_dir = dir / "run";
    expect(run_command(cli + " train " + data.string() +
                       " --epochs 2 --batch-size 24 --m-u 8 --hidden 12 --emb-dim 6 --seed 3"
                       " --run-dir " + run_dir.string() + " > /dev/null 2>&1") == 0,
           "train failed");
    fs::path replay_log = dir / "replay.txt";
    expect(run_command(cli + " train --from-manifest " + (run_dir / "manifest.json").string() +
                       " > " + replay_log.string() + " 2>&1") == 0,
           "manifest replay failed");
    expect(slurp(replay_log).find("reproduced: output hashes match the manifest") !=
               std::string::npos,
           "replay did not confirm matching hashes");

    std::error_code ec;
    fs::remove_all(dir, ec);

    c.pass = problems.empty();
    if (c.pass) {
        c.detail = "verify reports byte-identical; manifest replay reproduced both hashes";
    } else {
        for (std::size_t i = 0; i < problems.size(); ++i)
            c.detail += (i ? "; " : "") + problems[i];
    }
    return c;
}

Criterion guarded(const char* label, Criterion (*make)()) {
    try {
        return make();
    } catch (const std::exception& e) {
        return {label, false, std::string("unexpected error: ") + e.what()};
    }
}

}  // namespace

int main() {
    std::vector<Criterion> results(8);
    results[0] = guarded("density-recovery", criterion_density);
    results[1] = guarded("bias-bound", criterion_bound);
    results[2] = guarded("objective-reductions", criterion_reductions);
    results[3] = guarded("gradient-check", criterion_gradients);
    try {
        DownstreamOutcome downstream = run_downstream();
        results[5] = downstream.comparison;
        results[6] = downstream.ablation;
        results[4] = criterion_clamp(std::move(downstream.runs), downstream.sweep_rows);
    } catch (const std::exception& e) {
        std::string why = std::string("unexpected error: ") + e.what();
        results[4] = {"clamp-floor", false, why};
        results[5] = {"downstream-probe", false, why};
        results[6] = {"alpha-ablation", false, why};
    }
    results[7] = guarded("determinism", criterion_determinism);

    bool all = true;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const Criterion& c = results[i];
        std::printf("%s criterion %zu (%s): %s\n", c.pass ? "PASS" : "FAIL", i + 1, c.label,
                    c.detail.c_str());
        all = all && c.pass;
    }
    return all ? 0 : 1;
}
