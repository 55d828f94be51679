#include <charconv>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pucl/encoder.hpp"
#include "pucl/errors.hpp"
#include "pucl/eval.hpp"
#include "pucl/io.hpp"
#include "pucl/scenario.hpp"
#include "pucl/sweep.hpp"
#include "pucl/trainer.hpp"
#include "pucl/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pucl;

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t pos = text.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(text.substr(start));
            break;
        }
        out.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
    require(!text.empty(), what + ": empty list");
    std::vector<double> out;
    for (const auto& tok : split_list(text)) out.push_back(parse_double(tok));
    return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
    require(!text.empty(), what + ": empty list");
    std::vector<int> out;
    for (const auto& tok : split_list(text)) {
        int v = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        require(ec == std::errc() && ptr == tok.data() + tok.size(),
                what + ": bad integer '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    require(!text.empty(), "seed list: empty");
    std::vector<std::uint64_t> out;
    for (const auto& tok : split_list(text)) {
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        require(ec == std::errc() && ptr == tok.data() + tok.size(),
                "seed list: bad seed '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

std::string utc_stamp() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
    return buf;
}

Activation activation_from_name(const std::string& name) {
    if (name == "tanh") return Activation::tanh_fn;
    if (name == "relu") return Activation::relu;
    throw ContractViolation("unknown activation '" + name + "' (want tanh or relu)");
}

const char* activation_name(Activation a) {
    return a == Activation::relu ? "relu" : "tanh";
}

// Bundles every flag the train/sweep commands share, in CLI form.
struct TrainFlags {
    std::string objective = "pucl";
    double alpha = 0.1;
    double c = 0.1;
    int m_u = 32;
    int m_plus = 1;
    int n_effective = 0;
    double tau = 1.0;
    int batch_size = 64;
    int epochs = 10;
    double lr = 0.1;
    double momentum = 0.9;
    std::uint64_t seed = 1;
    std::string hidden = "64,64";
    int emb_dim = 16;
    std::string activation = "tanh";
    double sigma_aug = 0.1;
    bool class_resample = false;
    bool symmetrize = false;
    std::string config_path;

    TrainConfig to_config() const {
        TrainConfig cfg;
        cfg.objective = objective_from_name(objective);
        cfg.alpha = alpha;
        cfg.c = c;
        cfg.m_u = m_u;
        cfg.m_plus = m_plus;
        cfg.n_effective = n_effective;
        cfg.tau = tau;
        cfg.batch_size = batch_size;
        cfg.epochs = epochs;
        cfg.lr = lr;
        cfg.momentum = momentum;
        cfg.seed = seed;
        cfg.hidden = hidden.empty() ? std::vector<int>{} : parse_int_list(hidden, "hidden");
        cfg.emb_dim = emb_dim;
        cfg.activation = activation_from_name(activation);
        cfg.augmentation.sigma_scale = sigma_aug;
        cfg.augmentation.class_resample = class_resample;
        cfg.symmetrize = symmetrize;
        return cfg;
    }
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
    cmd->add_option("--objective", f.objective, "stacl, pucl, deb or ideal_oracle");
    cmd->add_option("--alpha", f.alpha, "positive-class prior");
    cmd->add_option("--c", f.c, "labeling frequency");
    cmd->add_option("--m-u", f.m_u, "unlabeled samples per anchor");
    cmd->add_option("--m-plus", f.m_plus, "positive views per anchor");
    cmd->add_option("--n-effective", f.n_effective, "negative count N in the loss (0: use m_u)");
    cmd->add_option("--tau", f.tau, "softmax temperature");
    cmd->add_option("--batch-size", f.batch_size, "anchors per optimizer step");
    cmd->add_option("--epochs", f.epochs, "training epochs");
    cmd->add_option("--lr", f.lr, "learning rate");
    cmd->add_option("--momentum", f.momentum, "SGD momentum");
    cmd->add_option("--seed", f.seed, "training seed");
    cmd->add_option("--hidden", f.hidden, "hidden layer widths, comma separated");
    cmd->add_option("--emb-dim", f.emb_dim, "embedding dimension");
    cmd->add_option("--activation", f.activation, "tanh or relu");
    cmd->add_option("--sigma-aug", f.sigma_aug, "augmentation noise as a fraction of feature sd");
    cmd->add_flag("--class-resample", f.class_resample,
                  "draw positives as fresh same-component samples");
    cmd->add_flag("--symmetrize", f.symmetrize, "average the two view directions");
    cmd->add_option("--config", f.config_path,
                    "key=value file of training flags; explicit flags override it");
}

std::string trimmed(const std::string& text) {
    std::size_t start = text.find_first_not_of(" \t");
    if (start == std::string::npos) return "";
    std::size_t end = text.find_last_not_of(" \t");
    return text.substr(start, end - start + 1);
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ContractViolation("config key '" + key + "': expected true/false, got '" + value + "'");
}

// Fills train flags from a key=value file, skipping any key whose flag was
// given on the command line (explicit flags win).
void apply_config_file(const CLI::App* cmd, TrainFlags& f) {
    if (f.config_path.empty()) return;
    std::string text = read_text_file(f.config_path);
    auto given = [&](const std::string& flag) { return cmd->get_option(flag)->count() > 0; };
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string line = trimmed(text.substr(start, end - start));
        start = end + 1;
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::size_t eq = line.find('=');
        require(eq != std::string::npos, f.config_path + ":" + std::to_string(line_no) +
                                             ": expected key=value, got '" + line + "'");
        std::string key = trimmed(line.substr(0, eq));
        std::string value = trimmed(line.substr(eq + 1));
        if (key == "objective") {
            if (!given("--objective")) f.objective = value;
        } else if (key == "alpha") {
            if (!given("--alpha")) f.alpha = parse_double(value);
        } else if (key == "c") {
            if (!given("--c")) f.c = parse_double(value);
        } else if (key == "m-u") {
            if (!given("--m-u")) f.m_u = parse_int_list(value, key).at(0);
        } else if (key == "m-plus") {
            if (!given("--m-plus")) f.m_plus = parse_int_list(value, key).at(0);
        } else if (key == "n-effective") {
            if (!given("--n-effective")) f.n_effective = parse_int_list(value, key).at(0);
        } else if (key == "tau") {
            if (!given("--tau")) f.tau = parse_double(value);
        } else if (key == "batch-size") {
            if (!given("--batch-size")) f.batch_size = parse_int_list(value, key).at(0);
        } else if (key == "epochs") {
            if (!given("--epochs")) f.epochs = parse_int_list(value, key).at(0);
        } else if (key == "lr") {
            if (!given("--lr")) f.lr = parse_double(value);
        } else if (key == "momentum") {
            if (!given("--momentum")) f.momentum = parse_double(value);
        } else if (key == "seed") {
            if (!given("--seed")) f.seed = parse_seed_list(value).at(0);
        } else if (key == "hidden") {
            if (!given("--hidden")) f.hidden = value;
        } else if (key == "emb-dim") {
            if (!given("--emb-dim")) f.emb_dim = parse_int_list(value, key).at(0);
        } else if (key == "activation") {
            if (!given("--activation")) f.activation = value;
        } else if (key == "sigma-aug") {
            if (!given("--sigma-aug")) f.sigma_aug = parse_double(value);
        } else if (key == "class-resample") {
            if (!given("--class-resample")) f.class_resample = parse_bool(value, key);
        } else if (key == "symmetrize") {
            if (!given("--symmetrize")) f.symmetrize = parse_bool(value, key);
        } else {
            throw ContractViolation(f.config_path + ":" + std::to_string(line_no) +
                                    ": unknown config key '" + key + "'");
        }
    }
}

json config_to_json(const TrainConfig& cfg) {
    json j;
    j["objective"] = objective_name(cfg.objective);
    j["alpha"] = cfg.alpha;
    j["c"] = cfg.c;
    j["m_u"] = cfg.m_u;
    j["m_plus"] = cfg.m_plus;
    j["n_effective"] = cfg.n_effective;
    j["tau"] = cfg.tau;
    j["batch_size"] = cfg.batch_size;
    j["epochs"] = cfg.epochs;
    j["lr"] = cfg.lr;
    j["momentum"] = cfg.momentum;
    j["seed"] = cfg.seed;
    j["hidden"] = cfg.hidden;
    j["emb_dim"] = cfg.emb_dim;
    j["activation"] = activation_name(cfg.activation);
    j["sigma_aug"] = cfg.augmentation.sigma_scale;
    j["class_resample"] = cfg.augmentation.class_resample;
    j["symmetrize"] = cfg.symmetrize;
    return j;
}

TrainConfig config_from_json(const json& j) {
    TrainConfig cfg;
    cfg.objective = objective_from_name(j.at("objective").get<std::string>());
    cfg.alpha = j.at("alpha").get<double>();
    cfg.c = j.at("c").get<double>();
    cfg.m_u = j.at("m_u").get<int>();
    cfg.m_plus = j.at("m_plus").get<int>();
    cfg.n_effective = j.at("n_effective").get<int>();
    cfg.tau = j.at("tau").get<double>();
    cfg.batch_size = j.at("batch_size").get<int>();
    cfg.epochs = j.at("epochs").get<int>();
    cfg.lr = j.at("lr").get<double>();
    cfg.momentum = j.at("momentum").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.hidden = j.at("hidden").get<std::vector<int>>();
    cfg.emb_dim = j.at("emb_dim").get<int>();
    cfg.activation = activation_from_name(j.at("activation").get<std::string>());
    cfg.augmentation.sigma_scale = j.at("sigma_aug").get<double>();
    cfg.augmentation.class_resample = j.at("class_resample").get<bool>();
    cfg.symmetrize = j.at("symmetrize").get<bool>();
    return cfg;
}

PuDataset load_any_dataset(const std::string& path, bool features) {
    return features ? read_feature_csv(path) : read_dataset(path);
}

// Class labels for exports: component ids when recorded, else binary truth,
// else unknown ('?' in the CSVs).
std::vector<int> export_labels(const PuDataset& dataset) {
    bool all_cls = !dataset.samples.empty();
    for (const auto& smp : dataset.samples)
        if (smp.cls < 0) all_cls = false;
    std::vector<int> labels;
    labels.reserve(dataset.size());
    for (const auto& smp : dataset.samples)
        labels.push_back(all_cls ? smp.cls : (dataset.has_truth() ? smp.y : -1));
    return labels;
}

std::vector<UnitEmbedding> embed_dataset(const EncoderParams& params, const PuDataset& dataset) {
    std::vector<UnitEmbedding> out;
    out.reserve(dataset.size());
    for (const auto& smp : dataset.samples) out.push_back(forward(params, smp.x));
    return out;
}

fs::path fresh_run_dir(const std::string& out_dir, const std::string& run_dir,
                       const std::string& config_hash8) {
    if (!run_dir.empty()) {
        fs::create_directories(run_dir);
        return run_dir;
    }
    std::string base = utc_stamp() + "-" + config_hash8;
    fs::path dir = fs::path(out_dir) / base;
    for (int k = 2; fs::exists(dir); ++k) dir = fs::path(out_dir) / (base + "-" + std::to_string(k));
    fs::create_directories(dir);
    return dir;
}

// ---- subcommand drivers ----

struct GenerateArgs {
    std::string preset;
    int n = 1000;
    double alpha = 0.1;
    double c = 0.1;
    std::uint64_t seed = 1;
    double moon_noise = 0.1;
    int clusters = 10;
    int dim = 8;
    double radius = 3.0;
    double sigma = 0.5;
    std::uint64_t scenario_seed = 31;
    std::string out;
    bool force = false;
};

int run_generate(const GenerateArgs& a) {
    PuScenario scenario;
    if (a.preset == "two-moons") {
        scenario = PuScenario::make_two_moons(a.alpha, a.c, a.moon_noise);
    } else if (a.preset == "clusters") {
        scenario = PuScenario::make_gauss_clusters(a.alpha, a.c, a.clusters, a.dim, a.radius,
                                                   a.sigma, a.scenario_seed);
    } else {
        throw ContractViolation("unknown preset '" + a.preset + "' (want two-moons or clusters)");
    }
    PuDataset dataset = apply_scar(sample_population(scenario, a.n, a.seed));
    write_dataset(dataset, a.out, a.force);
    std::size_t labeled = 0;
    for (const auto& smp : dataset.samples) labeled += smp.s ? 1 : 0;
    std::cout << "wrote " << a.out << ": " << dataset.size() << " samples, " << labeled
              << " labeled positives\n";
    return 0;
}

struct TrainArgs {
    TrainFlags flags;
    std::string data;
    bool features = false;
    std::string out_dir = "runs";
    std::string run_dir;
    std::string from_manifest;
    bool force = false;
};

int run_train(const TrainArgs& a) {
    TrainConfig requested;
    std::string data_path = a.data;
    bool features = a.features;
    json expected_outputs;
    std::string expected_dataset_hash;
    if (!a.from_manifest.empty()) {
        json manifest = json::parse(read_text_file(a.from_manifest));
        requested = config_from_json(manifest.at("config"));
        data_path = manifest.at("dataset").at("path").get<std::string>();
        features = manifest.at("dataset").at("features").get<bool>();
        expected_dataset_hash = manifest.at("dataset").at("hash").get<std::string>();
        expected_outputs = manifest.at("outputs");
    } else {
        require(!data_path.empty(), "train: dataset path is required");
        requested = a.flags.to_config();
    }

    std::string raw = read_text_file(data_path);
    std::string dataset_hash = content_hash_hex(raw);
    if (!expected_dataset_hash.empty())
        require(dataset_hash == expected_dataset_hash,
                "dataset at " + data_path + " no longer matches the manifest hash");
    PuDataset dataset = load_any_dataset(data_path, features);

    std::vector<std::string> notes;
    if (requested.objective == Objective::deb && requested.c != 0.0) {
        notes.push_back("deb objective ignores c: forced to 0 (was " +
                        format_double(requested.c) + ")");
        std::cerr << "warning: " << notes.back() << "\n";
    }
    TrainConfig cfg = requested.normalized();
    cfg.validate();

    TrainResult result = train(cfg, dataset);

    json config_json = config_to_json(cfg);
    std::string config_hash = content_hash_hex(config_json.dump());
    fs::path dir = fresh_run_dir(a.out_dir, a.run_dir, config_hash.substr(0, 8));

    std::string ckpt_path = (dir / "checkpoint.ckpt").string();
    save_checkpoint(result.params, ckpt_path, a.force);
    std::string csv = epoch_csv(result.log);
    write_text_file((dir / "epochs.csv").string(), csv, a.force);

    std::string ckpt_hash = content_hash_hex(read_text_file(ckpt_path));
    std::string epochs_hash = epoch_csv_canonical_hash(csv);

    json manifest;
    manifest["command"] = "train";
    manifest["created_utc"] = utc_stamp();
    manifest["config"] = config_json;
    manifest["dataset"] = {{"path", fs::absolute(data_path).string()},
                           {"hash", dataset_hash},
                           {"features", features}};
    manifest["outputs"] = {
        {"checkpoint", {{"file", "checkpoint.ckpt"}, {"hash", ckpt_hash}}},
        {"epochs", {{"file", "epochs.csv"}, {"canonical_hash", epochs_hash}}}};
    manifest["notes"] = notes;
    write_text_file((dir / "manifest.json").string(), manifest.dump(2) + "\n", a.force);

    std::cout << "run dir " << dir.string() << "\n";
    if (!result.log.empty()) {
        const EpochRecord& last = result.log.back();
        std::cout << "final loss " << format_double(last.loss) << ", clamp rate "
                  << format_double(last.clamp_rate) << "\n";
    }
    std::cout << "checkpoint hash " << ckpt_hash << "\n";
    std::cout << "epoch log hash " << epochs_hash << "\n";

    if (!a.from_manifest.empty()) {
        std::string want_ckpt = expected_outputs.at("checkpoint").at("hash").get<std::string>();
        std::string want_epochs =
            expected_outputs.at("epochs").at("canonical_hash").get<std::string>();
        if (ckpt_hash != want_ckpt || epochs_hash != want_epochs)
            throw VerificationFailure("re-run diverged from the manifest (checkpoint " +
                                      ckpt_hash + " vs " + want_ckpt + ", epochs " + epochs_hash +
                                      " vs " + want_epochs + ")");
        std::cout << "reproduced: output hashes match the manifest\n";
    }
    return 0;
}

struct EvalArgs {
    std::string checkpoint;
    std::string data;
    bool features = false;
    std::string out_embeddings;
    double split_fraction = 0.8;
    std::uint64_t probe_seed = 0;
    bool force = false;
};

int run_eval(const EvalArgs& a) {
    EncoderParams params = load_checkpoint(a.checkpoint);
    PuDataset dataset = load_any_dataset(a.data, a.features);
    std::vector<UnitEmbedding> embeddings = embed_dataset(params, dataset);
    std::vector<int> labels = export_labels(dataset);

    if (!a.out_embeddings.empty()) {
        write_text_file(a.out_embeddings, embedding_csv(embeddings, labels), a.force);
        std::cout << "wrote " << a.out_embeddings << "\n";
    }

    bool have_labels = false;
    for (int l : labels) have_labels = have_labels || l >= 0;
    if (!have_labels) {
        std::cout << "probe skipped: dataset carries no class labels\n";
        return 0;
    }
    ProbeResult probe = linear_probe(embeddings, probe_labels(dataset), a.split_fraction,
                                     a.probe_seed);
    std::cout << "probe accuracy " << format_double(probe.accuracy) << " over "
              << probe.class_labels.size() << " classes (" << probe.iterations
              << " iterations)\n";
    return 0;
}

struct ProjectArgs {
    std::string checkpoint;
    std::string data;
    bool features = false;
    std::string out;
    bool force = false;
};

int run_project(const ProjectArgs& a) {
    EncoderParams params = load_checkpoint(a.checkpoint);
    PuDataset dataset = load_any_dataset(a.data, a.features);
    std::vector<UnitEmbedding> embeddings = embed_dataset(params, dataset);
    write_text_file(a.out, projection_csv(project_2d(embeddings), export_labels(dataset)),
                    a.force);
    std::cout << "wrote " << a.out << "\n";
    return 0;
}

struct SweepArgs {
    TrainFlags flags;
    std::string data;
    bool features = false;
    std::string alpha_list;
    std::string c_list;
    std::string m_u_list;
    std::string seed_list;
    double split_fraction = 0.8;
    int threads = 0;
    std::string out;
    bool force = false;
};

int run_sweep_cmd(const SweepArgs& a) {
    SweepSpec spec;
    spec.alphas = parse_double_list(a.alpha_list, "alpha list");
    spec.cs = parse_double_list(a.c_list, "c list");
    spec.m_us = parse_int_list(a.m_u_list, "m_u list");
    spec.seeds = parse_seed_list(a.seed_list);
    spec.base = a.flags.to_config();
    spec.probe_split_fraction = a.split_fraction;
    spec.threads = a.threads;
    PuDataset dataset = load_any_dataset(a.data, a.features);
    std::vector<SweepRow> rows = run_sweep(spec, dataset);
    write_text_file(a.out, sweep_csv(rows), a.force);
    std::cout << "wrote " << a.out << " (" << rows.size() << " rows)\n";
    return 0;
}

int run_verify_cmd(bool full) {
    std::vector<CheckResult> results =
        run_verification(full ? VerifyLevel::full : VerifyLevel::fast);
    std::cout << render_report(results);
    for (const auto& r : results)
        if (!r.pass) return 3;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Corrected contrastive learning under positive-unlabeled supervision"};
    app.require_subcommand(1);
    int exit_code = 0;

    GenerateArgs gen;
    CLI::App* g = app.add_subcommand("generate", "Sample a dataset and write it to disk");
    g->add_option("--preset", gen.preset, "two-moons or clusters")->required();
    g->add_option("--n", gen.n, "number of samples")->required();
    g->add_option("--alpha", gen.alpha, "positive-class prior");
    g->add_option("--c", gen.c, "labeling frequency");
    g->add_option("--seed", gen.seed, "sampling seed");
    g->add_option("--moon-noise", gen.moon_noise, "two-moons: additive noise sd");
    g->add_option("--clusters", gen.clusters, "clusters: total component count");
    g->add_option("--dim", gen.dim, "clusters: feature dimension");
    g->add_option("--radius", gen.radius, "clusters: component mean radius");
    g->add_option("--sigma", gen.sigma, "clusters: within-component sd");
    g->add_option("--scenario-seed", gen.scenario_seed, "clusters: component layout seed");
    g->add_option("--out", gen.out, "output dataset path")->required();
    g->add_flag("--force", gen.force, "overwrite an existing file");
    g->callback([&] { exit_code = run_generate(gen); });

    TrainArgs tr;
    CLI::App* t = app.add_subcommand("train", "Train an encoder on a dataset");
    t->add_option("data", tr.data, "dataset path");
    add_train_flags(t, tr.flags);
    t->add_flag("--features", tr.features, "treat the input as a plain feature matrix");
    t->add_option("--out-dir", tr.out_dir, "parent directory for run directories");
    t->add_option("--run-dir", tr.run_dir, "exact run directory (instead of --out-dir)");
    t->add_option("--from-manifest", tr.from_manifest,
                  "replay a recorded run and compare output hashes");
    t->add_flag("--force", tr.force, "overwrite existing outputs");
    t->callback([&, t] {
        if (!tr.from_manifest.empty())
            require(tr.data.empty(), "train: pass either a dataset or --from-manifest, not both");
        apply_config_file(t, tr.flags);
        exit_code = run_train(tr);
    });

    EvalArgs ev;
    CLI::App* e = app.add_subcommand("eval", "Probe a trained encoder's embeddings");
    e->add_option("--checkpoint", ev.checkpoint, "encoder checkpoint")->required();
    e->add_option("--data", ev.data, "dataset path")->required();
    e->add_flag("--features", ev.features, "treat the input as a plain feature matrix");
    e->add_option("--out-embeddings", ev.out_embeddings, "write the embedding CSV here");
    e->add_option("--split-fraction", ev.split_fraction, "probe train fraction");
    e->add_option("--probe-seed", ev.probe_seed, "probe split seed");
    e->add_flag("--force", ev.force, "overwrite existing outputs");
    e->callback([&] { exit_code = run_eval(ev); });

    ProjectArgs pr;
    CLI::App* p = app.add_subcommand("project", "Export a 2-D projection of the embeddings");
    p->add_option("--checkpoint", pr.checkpoint, "encoder checkpoint")->required();
    p->add_option("--data", pr.data, "dataset path")->required();
    p->add_flag("--features", pr.features, "treat the input as a plain feature matrix");
    p->add_option("--out", pr.out, "output CSV path")->required();
    p->add_flag("--force", pr.force, "overwrite existing outputs");
    p->callback([&] { exit_code = run_project(pr); });

    SweepArgs sw;
    CLI::App* s = app.add_subcommand("sweep", "Train and probe over an ablation grid");
    s->add_option("data", sw.data, "dataset path")->required();
    add_train_flags(s, sw.flags);
    s->add_flag("--features", sw.features, "treat the input as a plain feature matrix");
    s->add_option("--alpha-list", sw.alpha_list, "comma-separated alpha axis")->required();
    s->add_option("--c-list", sw.c_list, "comma-separated c axis")->required();
    s->add_option("--m-u-list", sw.m_u_list, "comma-separated m_u axis")->required();
    s->add_option("--seed-list", sw.seed_list, "comma-separated seed axis")->required();
    s->add_option("--split-fraction", sw.split_fraction, "probe train fraction");
    s->add_option("--threads", sw.threads, "worker threads (0: hardware, capped by PUCL_THREADS)");
    s->add_option("--out", sw.out, "results CSV path")->required();
    s->add_flag("--force", sw.force, "overwrite existing outputs");
    s->callback([&, s] {
        apply_config_file(s, sw.flags);
        exit_code = run_sweep_cmd(sw);
    });

    bool verify_full = false;
    bool verify_fast = false;
    CLI::App* v = app.add_subcommand("verify", "Run the oracle-backed self checks");
    v->add_flag("--full", verify_full, "include the long bound sweep");
    v->add_flag("--fast", verify_fast, "fast level (the default)");
    v->callback([&] {
        require(!(verify_full && verify_fast), "verify: pick one of --fast / --full");
        exit_code = run_verify_cmd(verify_full);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const ContractViolation& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const TrainingDivergence& e) {
        std::cerr << "training diverged: " << e.what() << "\n";
        return 2;
    } catch (const VerificationFailure& e) {
        std::cerr << "verification failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return exit_code;
}
