#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace calib {

// One classifier output: labels, top-label confidence, and optionally the full
// probability vector and a sensitive-group label.
struct PredictionRecord {
    std::string id;
    int y_true = 0;
    int y_pred = 0;
    double conf = 0.0;
    std::vector<double> probs;  // empty when only the top-label confidence is known
    std::optional<std::string> group;

    bool correct() const { return y_true == y_pred; }
    bool has_probs() const { return !probs.empty(); }
};

// Row-major n x d matrix of finite reals.
struct FeatureMatrix {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> values;

    FeatureMatrix() = default;
    FeatureMatrix(std::size_t rows, std::size_t cols) : n(rows), d(cols), values(rows * cols, 0.0) {}

    std::span<const double> row(std::size_t i) const { return {values.data() + i * d, d}; }
    std::span<double> row(std::size_t i) { return {values.data() + i * d, d}; }
    double operator()(std::size_t i, std::size_t j) const { return values[i * d + j]; }
    double& operator()(std::size_t i, std::size_t j) { return values[i * d + j]; }

    bool operator==(const FeatureMatrix&) const = default;
};

// Records and their feature rows, aligned one-to-one in record order.
struct Dataset {
    std::vector<PredictionRecord> records;
    FeatureMatrix features;
    int num_classes = 2;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
};

// Checks the per-record invariants (bounds, simplex, argmax consistency).
void validate_record(const PredictionRecord& r, int num_classes);

// Validates cross-record invariants and alignment; throws on violation.
Dataset make_dataset(std::vector<PredictionRecord> records, FeatureMatrix features,
                     std::optional<int> num_classes = std::nullopt);

// Class count implied by the records: probability-vector width when present,
// otherwise max label + 1 (at least 2).
int infer_num_classes(const std::vector<PredictionRecord>& records);

// Index of the first maximal entry.
std::size_t argmax(std::span<const double> v);

// -- ingestion ---------------------------------------------------------------

// Header `id,y_true,y_pred,conf[,group][,p0..p{m-1}]`; columns matched by name.
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path,
                                               std::optional<int> num_classes = std::nullopt);
std::vector<PredictionRecord> parse_predictions(std::string_view text,
                                                std::optional<int> num_classes = std::nullopt);

// Header `id,f0..f{d-1}`. Rows are reordered to match `records`.
FeatureMatrix load_features_csv(const std::filesystem::path& path,
                                const std::vector<PredictionRecord>& records);
FeatureMatrix parse_features_csv(std::string_view text, const std::vector<PredictionRecord>& records);

// Row-major little-endian float32 payload; the descriptor is `{"n":N,"d":D}`.
// Rows are taken to be in record order.
FeatureMatrix load_features_raw(const std::filesystem::path& path,
                                const std::filesystem::path& descriptor);
FeatureMatrix decode_features_raw(std::span<const unsigned char> bytes, std::size_t n, std::size_t d);

// Convenience: predictions plus features. A `.f32` features path selects the raw
// format with descriptor `<path>.json`.
Dataset load_dataset(const std::filesystem::path& predictions, const std::filesystem::path& features,
                     std::optional<int> num_classes = std::nullopt);

// -- output ------------------------------------------------------------------

std::string format_predictions(const Dataset& d);
std::string format_features_csv(const Dataset& d);
std::vector<unsigned char> encode_features_raw(const FeatureMatrix& m);

}  // namespace calib
