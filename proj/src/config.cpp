#include <algorithm>
#include <charconv>
#include <type_traits>

#include "calib/cli.hpp"
#include "calib/error.hpp"
#include "calib/text.hpp"
#include "config_fields.hpp"

namespace calib::cli {

namespace detail {

namespace {

template <class T>
    requires std::is_unsigned_v<T>
T parse_unsigned(std::string_view raw) {
    raw = text::trim(raw);
    T v = 0;
    auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (raw.empty() || ec != std::errc{} || ptr != raw.data() + raw.size()) {
        throw ValidationError("expected a non-negative integer, got '" + std::string(raw) + "'");
    }
    return v;
}

template <class T>
T parse_value(std::string_view raw) {
    return parse_unsigned<T>(raw);
}

template <>
std::string parse_value<std::string>(std::string_view raw) {
    return std::string(text::trim(raw));
}

template <>
double parse_value<double>(std::string_view raw) {
    return text::parse_double(raw, "number");
}

template <>
std::vector<double> parse_value<std::vector<double>>(std::string_view raw) {
    auto v = text::parse_double_list(raw, "list entry");
    if (v.empty()) {
        throw ValidationError("expected a comma-separated list of numbers");
    }
    return v;
}

template <class T>
FieldDef field(std::string name, std::optional<T> RunConfig::*member, std::string help) {
    return FieldDef{std::move(name), std::move(help),
                    [member](RunConfig& c, std::string_view raw) { c.*member = parse_value<T>(raw); },
                    [member](RunConfig& dst, const RunConfig& src) {
                        if (!(dst.*member)) {
                            dst.*member = src.*member;
                        }
                    }};
}

}  // namespace

const std::vector<FieldDef>& fields() {
    static const std::vector<FieldDef> defs = {
        field("preds", &RunConfig::preds, "predictions CSV"),
        field("features", &RunConfig::features, "features CSV, or .f32 with a .f32.json descriptor"),
        field("recal", &RunConfig::recal, "recalibration-split predictions CSV"),
        field("recal-features", &RunConfig::recal_features, "recalibration-split features"),
        field("eval", &RunConfig::eval, "evaluation-split predictions CSV"),
        field("eval-features", &RunConfig::eval_features, "evaluation-split features"),
        field("recal-preds", &RunConfig::recal_preds, "recalibrated predictions CSV to compare against"),
        field("embed", &RunConfig::embed, "2-D embedding CSV (id,f0,f1) for the landscape export"),
        field("load-state", &RunConfig::load_state, "apply a saved recalibrator instead of fitting"),
        field("out", &RunConfig::out, "output path (stdout when omitted)"),
        field("lce-csv", &RunConfig::lce_csv, "per-sample LCE CSV output"),
        field("save-state", &RunConfig::save_state, "write the fitted recalibrator here"),
        field("out-preds", &RunConfig::out_preds, "synthetic predictions output"),
        field("out-feats", &RunConfig::out_feats, "synthetic features output"),
        field("out-truth", &RunConfig::out_truth, "synthetic ground-truth output"),
        field("bins", &RunConfig::bins, "confidence bin count (default 15)"),
        field("bin-kind", &RunConfig::bin_kind, "equal-width | equal-mass (default equal-width)"),
        field("kernel", &RunConfig::kernel, "laplacian | gaussian | group (default laplacian)"),
        field("gamma", &RunConfig::gamma, "kernel bandwidth"),
        field("pca", &RunConfig::pca, "reduce features to this many principal components"),
        field("threads", &RunConfig::threads, "worker threads (default $CALIB_THREADS or 1)"),
        field("seed", &RunConfig::seed, "random seed (default 0)"),
        field("method", &RunConfig::method, "lore | hb | ts | ir | group-hb | group-ts"),
        field("gammas", &RunConfig::gammas, "comma-separated bandwidths"),
        field("ratios", &RunConfig::ratios, "comma-separated w/u cost ratios (default 2,5,10,20,50)"),
        field("u", &RunConfig::u, "cost of abstaining (default 1)"),
        field("n", &RunConfig::n, "synthetic sample count (default 1000)"),
        field("d", &RunConfig::d, "synthetic feature dimension (default 3)"),
        field("clusters", &RunConfig::clusters, "synthetic cluster count (default 4)"),
        field("bias", &RunConfig::bias, "synthetic bias amplitude (default 0.2)"),
        field("scale", &RunConfig::scale, "synthetic length scale (default 0.1)"),
        field("embedding", &RunConfig::embedding, "pca | tsne: feature kind, picks LoRe's default bandwidth"),
    };
    return defs;
}

const FieldDef* find_field(std::string_view name) {
    std::string key(name);
    std::replace(key.begin(), key.end(), '_', '-');
    for (const auto& f : fields()) {
        if (f.name == key) {
            return &f;
        }
    }
    return nullptr;
}

}  // namespace detail

RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        ++line_no;
        auto line = text.substr(start, nl - start);
        start = nl + 1;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = text::trim(line);
        if (line.empty()) {
            if (nl == text.size()) {
                break;
            }
            continue;
        }
        const auto eq = line.find('=');
        const auto at = " at line " + std::to_string(line_no);
        if (eq == std::string_view::npos) {
            throw ConfigError("expected 'key = value'" + at);
        }
        const auto key = text::trim(line.substr(0, eq));
        const auto value = text::trim(line.substr(eq + 1));
        if (key == "stamp") {
            cfg.stamp = value == "true" || value == "1";
            continue;
        }
        const auto* f = detail::find_field(key);
        if (f == nullptr) {
            throw ConfigError("unknown config key '" + std::string(key) + "'" + at);
        }
        try {
            f->set(cfg, value);
        } catch (const Error& e) {
            throw ConfigError("bad value for '" + std::string(key) + "'" + at + ": " + e.what());
        }
        if (nl == text.size()) {
            break;
        }
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(text::read_file(path)); }

RunConfig merge(const RunConfig& primary, const RunConfig& fallback) {
    RunConfig out = primary;
    for (const auto& f : detail::fields()) {
        f.fill(out, fallback);
    }
    out.stamp = primary.stamp || fallback.stamp;
    return out;
}

}  // namespace calib::cli
