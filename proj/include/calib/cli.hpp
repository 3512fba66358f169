#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace calib::cli {

// Everything a subcommand can be configured with. Unset fields fall back to a
// documented default at the point of use; command-line flags override values
// from a config file.
struct RunConfig {
    std::string subcommand;

    std::optional<std::string> preds;
    std::optional<std::string> features;
    std::optional<std::string> recal;
    std::optional<std::string> recal_features;
    std::optional<std::string> eval;
    std::optional<std::string> eval_features;
    std::optional<std::string> recal_preds;
    std::optional<std::string> embed;
    std::optional<std::string> load_state;

    std::optional<std::string> out;
    std::optional<std::string> lce_csv;
    std::optional<std::string> save_state;
    std::optional<std::string> out_preds;
    std::optional<std::string> out_feats;
    std::optional<std::string> out_truth;

    std::optional<std::size_t> bins;           // default 15
    std::optional<std::string> bin_kind;       // default equal-width
    std::optional<std::string> kernel;         // default laplacian
    std::optional<double> gamma;               // required for metrics/sweep/fairness/landscape
    std::optional<std::size_t> pca;
    std::optional<std::size_t> threads;        // default $CALIB_THREADS, else 1
    std::optional<std::uint64_t> seed;         // default 0
    std::optional<std::string> method;         // recalibrate: lore|hb|ts|ir|group-hb|group-ts
    std::optional<std::vector<double>> gammas;
    std::optional<std::vector<double>> ratios;  // default 2,5,10,20,50
    std::optional<double> u;                    // default 1
    std::optional<std::size_t> n;               // synth defaults: 1000, 3, 4, 0.2, 0.1
    std::optional<std::size_t> d;
    std::optional<std::size_t> clusters;
    std::optional<double> bias;
    std::optional<double> scale;
    std::optional<std::string> embedding;       // pca|tsne: selects LoRe's default bandwidth

    bool stamp = false;
};

// Parses line-oriented `key = value` text; `#` starts a comment. Keys are the
// long flag names (`bin-kind` and `bin_kind` are equivalent). Unknown keys and
// bad values raise ConfigError naming the key and line.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

// Fields set in `primary` win; the rest come from `fallback`.
RunConfig merge(const RunConfig& primary, const RunConfig& fallback);

// Full command-line entry point. Exit codes: 0 success, 1 validation or data
// error, 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace calib::cli
