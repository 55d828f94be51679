#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pucl/core_loss.hpp"
#include "pucl/encoder.hpp"
#include "pucl/scenario.hpp"
#include "pucl/trainer.hpp"

namespace pucl {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);
double parse_double(std::string_view text);

// One sample per line `x_1,...,x_d,y,s` under a `# pucl-dataset v1 ...`
// header. Component ids are in-memory only; reading back recovers classes at
// the coarse positive/negative granularity of the y column.
void write_dataset(const PuDataset& dataset, const std::string& path, bool force = false);
PuDataset read_dataset(const std::string& path);

// Plain feature matrix, no truth columns: y and s come back unknown, which
// disables every oracle-dependent code path downstream.
PuDataset read_feature_csv(const std::string& path);

void save_checkpoint(const EncoderParams& params, const std::string& path, bool force = false);
EncoderParams load_checkpoint(const std::string& path);

struct SweepRow {
    double alpha = 0.0;
    double c = 0.0;
    int m_u = 0;
    std::uint64_t seed = 0;
    double probe_acc = 0.0;
    double final_loss = 0.0;
    double clamp_rate = 0.0;
};

// CSV renderers. All use '.' decimals, ',' separators, LF endings; labels of
// -1 are written as '?'.
std::string epoch_csv(const std::vector<EpochRecord>& log);
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string embedding_csv(const std::vector<UnitEmbedding>& embeddings,
                          const std::vector<int>& labels);
std::string projection_csv(const std::vector<std::array<double, 2>>& points,
                           const std::vector<int>& labels);

// Creates parent directories; refuses to overwrite unless forced.
void write_text_file(const std::string& path, const std::string& content, bool force = false);
std::string read_text_file(const std::string& path);

// FNV-1a64 content hash as fixed-width hex, for manifests and reproducibility
// comparisons.
std::string content_hash_hex(std::string_view data);
// Epoch-log hash with the wall-clock column stripped, so timing jitter never
// breaks determinism comparisons.
std::string epoch_csv_canonical_hash(const std::string& csv);

}  // namespace pucl
