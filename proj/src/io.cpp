#include "pucl/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "pucl/errors.hpp"
#include "pucl/rng.hpp"

namespace pucl {

namespace {

namespace fs = std::filesystem;

std::vector<std::string> split_on(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            return out;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

// Pulls `<key>=` off a header token and parses the remainder.
std::string_view header_value(std::string_view token, std::string_view key,
                              const std::string& path) {
    require(token.size() > key.size() + 1 && token.substr(0, key.size()) == key &&
                token[key.size()] == '=',
            path + ": malformed dataset header near '" + std::string(token) + "'");
    return token.substr(key.size() + 1);
}

std::uint64_t parse_u64(std::string_view text, const std::string& what) {
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    require(ec == std::errc() && ptr == text.data() + text.size(),
            "not an unsigned integer in " + what + ": '" + std::string(text) + "'");
    return value;
}

int parse_int(std::string_view text, const std::string& what) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    require(ec == std::errc() && ptr == text.data() + text.size(),
            "not an integer in " + what + ": '" + std::string(text) + "'");
    return value;
}

std::string label_token(int label) { return label < 0 ? "?" : std::to_string(label); }

void refuse_existing(const std::string& path, bool force) {
    require(force || !fs::exists(path), path + ": already exists (pass force to overwrite)");
}

std::ofstream open_for_write(const std::string& path, bool force) {
    refuse_existing(path, force);
    fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    std::ofstream out(path, std::ios::binary);  // binary: keep LF endings everywhere
    require(out.good(), path + ": cannot open for writing");
    return out;
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    require(ec == std::errc(), "double formatting failed");
    return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    require(ec == std::errc() && ptr == text.data() + text.size(),
            "not a number: '" + std::string(text) + "'");
    return value;
}

void write_dataset(const PuDataset& dataset, const std::string& path, bool force) {
    require(!dataset.samples.empty(), "refusing to write an empty dataset");
    std::size_t d = dataset.samples[0].x.size();
    std::ofstream out = open_for_write(path, force);
    out << "# pucl-dataset v1 d=" << d << " alpha=" << format_double(dataset.scenario.alpha)
        << " c=" << format_double(dataset.scenario.c) << " seed=" << dataset.seed << "\n";
    for (const auto& smp : dataset.samples) {
        require(smp.x.size() == d, "dataset rows have mixed dimensions");
        for (double v : smp.x) out << format_double(v) << ",";
        out << (smp.y < 0 ? "?" : std::to_string(smp.y)) << "," << (smp.s ? 1 : 0) << "\n";
    }
    require(out.good(), path + ": write failed");
}

PuDataset read_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), path + ": cannot open");
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), path + ": empty file");

    std::vector<std::string> head = split_on(line, ' ');
    require(head.size() == 7 && head[0] == "#" && head[1] == "pucl-dataset" && head[2] == "v1",
            path + ": not a pucl-dataset v1 file");
    int d = parse_int(header_value(head[3], "d", path), "header d");
    double alpha = parse_double(header_value(head[4], "alpha", path));
    double c = parse_double(header_value(head[5], "c", path));
    std::uint64_t seed = parse_u64(header_value(head[6], "seed", path), "header seed");
    require(d >= 1, path + ": header d must be positive");

    PuDataset dataset;
    // The generative components are not serialized; a placeholder scenario
    // carries the mixing parameters forward.
    dataset.scenario = PuScenario::make_discrete(alpha, c, {1.0}, {1.0});
    dataset.seed = seed;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells = split_on(line, ',');
        require(cells.size() == static_cast<std::size_t>(d) + 2,
                path + ":" + std::to_string(line_no) + ": expected " + std::to_string(d + 2) +
                    " columns, got " + std::to_string(cells.size()));
        PuSample smp;
        smp.x.resize(d);
        for (int j = 0; j < d; ++j) smp.x[j] = parse_double(cells[j]);
        const std::string& y_cell = cells[d];
        if (y_cell == "?") {
            smp.y = -1;
        } else {
            smp.y = parse_int(y_cell, "y column");
            require(smp.y == 0 || smp.y == 1,
                    path + ":" + std::to_string(line_no) + ": y must be 0, 1 or ?");
        }
        int s_val = parse_int(cells[d + 1], "s column");
        require(s_val == 0 || s_val == 1,
                path + ":" + std::to_string(line_no) + ": s must be 0 or 1");
        smp.s = s_val == 1;
        require(!smp.s || smp.y == 1,
                path + ":" + std::to_string(line_no) + ": labeled sample must have y=1");
        smp.cls = smp.y;  // best class resolution the file format can offer
        dataset.samples.push_back(std::move(smp));
    }
    require(!dataset.samples.empty(), path + ": no samples");
    return dataset;
}

PuDataset read_feature_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), path + ": cannot open");
    PuDataset dataset;
    dataset.scenario = PuScenario::make_discrete(0.5, 0.5, {1.0}, {1.0});
    std::string line;
    std::size_t line_no = 0;
    std::size_t d = 0;
    bool first_data_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells = split_on(line, ',');
        if (first_data_line) {
            // Accept one leading header row of column names.
            bool numeric = true;
            for (const auto& cell : cells) {
                double v;
                auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
                if (ec != std::errc() || ptr != cell.data() + cell.size()) {
                    numeric = false;
                    break;
                }
            }
            first_data_line = false;
            if (!numeric) continue;
            d = cells.size();
        }
        if (d == 0) d = cells.size();
        require(cells.size() == d, path + ":" + std::to_string(line_no) +
                                       ": ragged row (expected " + std::to_string(d) + " columns)");
        PuSample smp;
        smp.x.resize(d);
        for (std::size_t j = 0; j < d; ++j) smp.x[j] = parse_double(cells[j]);
        dataset.samples.push_back(std::move(smp));
    }
    require(!dataset.samples.empty(), path + ": no feature rows");
    return dataset;
}

void save_checkpoint(const EncoderParams& params, const std::string& path, bool force) {
    params.validate();
    std::ofstream out = open_for_write(path, force);
    out << "pucl-ckpt v1\n";
    out << "activation " << (params.activation == Activation::relu ? "relu" : "tanh") << "\n";
    out << "layers " << params.num_layers() << "\n";
    for (std::size_t l = 0; l < params.num_layers(); ++l) {
        const Matrix& w = params.weights[l];
        out << "layer " << w.rows << " " << w.cols << "\n";
        for (std::size_t i = 0; i < w.rows; ++i) {
            for (std::size_t j = 0; j < w.cols; ++j)
                out << (j ? " " : "") << format_double(w(i, j));
            out << "\n";
        }
        for (std::size_t i = 0; i < w.rows; ++i)
            out << (i ? " " : "") << format_double(params.biases[l][i]);
        out << "\n";
    }
    require(out.good(), path + ": write failed");
}

EncoderParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), path + ": cannot open");
    std::string line;
    require(static_cast<bool>(std::getline(in, line)) && line == "pucl-ckpt v1",
            path + ": not a pucl-ckpt v1 file");

    EncoderParams params;
    require(static_cast<bool>(std::getline(in, line)), path + ": truncated checkpoint");
    std::vector<std::string> tok = split_on(line, ' ');
    require(tok.size() == 2 && tok[0] == "activation" && (tok[1] == "tanh" || tok[1] == "relu"),
            path + ": bad activation line");
    params.activation = tok[1] == "relu" ? Activation::relu : Activation::tanh_fn;

    require(static_cast<bool>(std::getline(in, line)), path + ": truncated checkpoint");
    tok = split_on(line, ' ');
    require(tok.size() == 2 && tok[0] == "layers", path + ": bad layers line");
    int n_layers = parse_int(tok[1], "layer count");
    require(n_layers >= 1, path + ": checkpoint needs at least one layer");

    for (int l = 0; l < n_layers; ++l) {
        require(static_cast<bool>(std::getline(in, line)), path + ": truncated checkpoint");
        tok = split_on(line, ' ');
        require(tok.size() == 3 && tok[0] == "layer", path + ": bad layer header");
        int rows = parse_int(tok[1], "layer rows");
        int cols = parse_int(tok[2], "layer cols");
        require(rows >= 1 && cols >= 1, path + ": bad layer shape");
        Matrix w(rows, cols);
        for (int i = 0; i < rows; ++i) {
            require(static_cast<bool>(std::getline(in, line)), path + ": truncated checkpoint");
            tok = split_on(line, ' ');
            require(tok.size() == static_cast<std::size_t>(cols), path + ": bad weight row width");
            for (int j = 0; j < cols; ++j) w(i, j) = parse_double(tok[j]);
        }
        require(static_cast<bool>(std::getline(in, line)), path + ": truncated checkpoint");
        tok = split_on(line, ' ');
        require(tok.size() == static_cast<std::size_t>(rows), path + ": bad bias row width");
        Vec b(rows);
        for (int i = 0; i < rows; ++i) b[i] = parse_double(tok[i]);
        params.weights.push_back(std::move(w));
        params.biases.push_back(std::move(b));
    }
    params.validate();
    return params;
}

std::string epoch_csv(const std::vector<EpochRecord>& log) {
    std::ostringstream out;
    out << "epoch,loss,clamp_rate,mean_mu_hat,wall_ms\n";
    for (const auto& rec : log)
        out << rec.epoch << "," << format_double(rec.loss) << ","
            << format_double(rec.clamp_rate) << "," << format_double(rec.mean_mu_hat) << ","
            << format_double(rec.wall_ms) << "\n";
    return out.str();
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "alpha,c,m_u,seed,probe_acc,final_loss,clamp_rate\n";
    for (const auto& row : rows)
        out << format_double(row.alpha) << "," << format_double(row.c) << "," << row.m_u << ","
            << row.seed << "," << format_double(row.probe_acc) << ","
            << format_double(row.final_loss) << "," << format_double(row.clamp_rate) << "\n";
    return out.str();
}

std::string embedding_csv(const std::vector<UnitEmbedding>& embeddings,
                          const std::vector<int>& labels) {
    require(embeddings.size() == labels.size(), "embedding_csv: size mismatch");
    require(!embeddings.empty(), "embedding_csv: nothing to write");
    std::size_t d = embeddings[0].dim();
    std::ostringstream out;
    for (std::size_t j = 1; j <= d; ++j) out << "emb_" << j << ",";
    out << "label\n";
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        for (double v : embeddings[i].values()) out << format_double(v) << ",";
        out << label_token(labels[i]) << "\n";
    }
    return out.str();
}

std::string projection_csv(const std::vector<std::array<double, 2>>& points,
                           const std::vector<int>& labels) {
    require(points.size() == labels.size(), "projection_csv: size mismatch");
    std::ostringstream out;
    out << "px,py,label\n";
    for (std::size_t i = 0; i < points.size(); ++i)
        out << format_double(points[i][0]) << "," << format_double(points[i][1]) << ","
            << label_token(labels[i]) << "\n";
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content, bool force) {
    std::ofstream out = open_for_write(path, force);
    out << content;
    require(out.good(), path + ": write failed");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), path + ": cannot open");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string content_hash_hex(std::string_view data) {
    std::uint64_t h = Rng::fnv1a(data);
    char buf[17];
    static const char* digits = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = digits[h & 0xF];
        h >>= 4;
    }
    return std::string(buf, 16);
}

std::string epoch_csv_canonical_hash(const std::string& csv) {
    std::string canonical;
    canonical.reserve(csv.size());
    std::size_t start = 0;
    while (start < csv.size()) {
        std::size_t end = csv.find('\n', start);
        if (end == std::string::npos) end = csv.size();
        std::string_view line(csv.data() + start, end - start);
        std::size_t last_comma = line.rfind(',');
        require(last_comma != std::string_view::npos, "epoch CSV line without columns");
        canonical.append(line.substr(0, last_comma));
        canonical.push_back('\n');
        start = end + 1;
    }
    return content_hash_hex(canonical);
}

}  // namespace pucl
