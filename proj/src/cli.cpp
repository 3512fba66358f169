#include "calib/cli.hpp"

#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "calib/binning.hpp"
#include "calib/dataset.hpp"
#include "calib/decision.hpp"
#include "calib/error.hpp"
#include "calib/kernel.hpp"
#include "calib/metrics.hpp"
#include "calib/persist.hpp"
#include "calib/recalib.hpp"
#include "calib/synth.hpp"
#include "calib/text.hpp"
#include "config_fields.hpp"

namespace calib::cli {

namespace {

// Missing required input after flags and config are merged.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr std::size_t kDefaultBins = 15;
constexpr double kLoReGammaPca = 0.4;
constexpr double kLoReGammaTsne = 0.2;

struct Subcommand {
    const char* name;
    const char* description;
    std::vector<const char*> options;
};

const std::vector<Subcommand>& subcommands() {
    static const std::vector<Subcommand> subs = {
        {"metrics", "global and local calibration report",
         {"preds", "features", "pca", "kernel", "gamma", "bins", "bin-kind", "out", "lce-csv"}},
        {"sweep", "MLCE and mean LCE across bandwidths (CSV)",
         {"preds", "features", "pca", "kernel", "gammas", "bins", "bin-kind", "out"}},
        {"recalibrate", "fit or load a recalibrator and apply it to an evaluation split",
         {"method", "recal", "recal-features", "eval", "eval-features", "kernel", "gamma", "bins", "bin-kind", "pca",
          "embedding", "out", "save-state", "load-state"}},
        {"fairness", "group-wise MCE report",
         {"preds", "features", "pca", "kernel", "gamma", "bins", "bin-kind", "out"}},
        {"decision", "abstention cost sweep and prediction rejection area ratio",
         {"preds", "recal-preds", "u", "ratios", "out"}},
        {"synth", "generate a synthetic dataset with controlled local miscalibration",
         {"n", "d", "clusters", "bias", "scale", "seed", "out-preds", "out-feats", "out-truth"}},
        {"landscape", "per-sample LCE next to a 2-D embedding (CSV)",
         {"preds", "features", "embed", "pca", "kernel", "gamma", "bins", "bin-kind", "out"}},
    };
    return subs;
}

template <class T>
const T& need(const std::optional<T>& v, const char* flag) {
    if (!v) {
        throw UsageError(std::string("missing required option --") + flag);
    }
    return *v;
}

std::size_t thread_count(const RunConfig& cfg) {
    if (cfg.threads) {
        return std::max<std::size_t>(1, *cfg.threads);
    }
    if (const char* env = std::getenv("CALIB_THREADS")) {
        try {
            return static_cast<std::size_t>(std::max(1LL, text::parse_int(env, "CALIB_THREADS")));
        } catch (const Error&) {
            throw ConfigError("CALIB_THREADS must be a positive integer");
        }
    }
    return 1;
}

Dataset load_split(const std::string& preds, const std::optional<std::string>& features) {
    if (features) {
        return load_dataset(preds, *features);
    }
    auto records = load_predictions(preds);
    const auto n = records.size();
    return make_dataset(std::move(records), FeatureMatrix(n, 0));
}

BinningScheme make_scheme(const RunConfig& cfg, const Dataset& d) {
    const auto k = cfg.bins.value_or(kDefaultBins);
    const auto kind = parse_bin_kind(cfg.bin_kind.value_or("equal-width"));
    if (kind == BinKind::EqualWidth) {
        return BinningScheme::equal_width(k);
    }
    std::vector<double> confs;
    for (const auto& r : d.records) {
        confs.push_back(r.conf);
    }
    return BinningScheme::equal_mass(k, confs);
}

KernelSpec make_kernel(const RunConfig& cfg, bool gamma_required) {
    KernelSpec spec;
    spec.family = parse_kernel_family(cfg.kernel.value_or("laplacian"));
    if (spec.uses_features()) {
        if (gamma_required) {
            spec.gamma = need(cfg.gamma, "gamma");
        } else if (cfg.gamma) {
            spec.gamma = *cfg.gamma;
        }
    }
    return spec;
}

// Applies the optional PCA reduction to the dataset's features in place.
void reduce_features(const RunConfig& cfg, Dataset& d) {
    if (cfg.pca) {
        d.features = apply_pca(fit_pca(d.features, *cfg.pca), d.features);
    }
}

void emit(const std::optional<std::string>& path, const std::string& contents, std::ostream& out) {
    if (path) {
        text::write_file_atomic(*path, contents);
    } else {
        out << contents;
    }
}

std::string header(const RunConfig& cfg) {
    std::string h = "# calib " + cfg.subcommand + "\n";
    if (cfg.stamp) {
        const auto now = std::time(nullptr);
        std::ostringstream ts;
        ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
        h += "generated: " + ts.str() + "\n";
    }
    return h;
}

std::string line(const std::string& key, const std::string& value) { return key + ": " + value + "\n"; }
std::string line(const std::string& key, double value) { return line(key, text::format_double(value)); }

std::string describe_binning(const BinningScheme& s) {
    return std::to_string(s.size()) + " (" + to_string(s.kind()) + ")";
}

std::string describe_kernel(const KernelSpec& k) {
    if (!k.uses_features()) {
        return to_string(k.family);
    }
    return to_string(k.family) + " gamma=" + text::format_double(k.gamma) + " dim=" + std::to_string(k.dim);
}

std::string lce_csv(const Dataset& d, const LceReport& r) {
    std::string out = "id,conf,correct,lce,slce\n";
    for (std::size_t i = 0; i < d.size(); ++i) {
        out += d.records[i].id + ',' + text::format_double(d.records[i].conf) + ',' +
               (d.records[i].correct() ? "1" : "0") + ',' + text::format_double(r.lce[i]) + ',' +
               text::format_double(r.slce[i]) + '\n';
    }
    return out;
}

bool has_groups(const Dataset& d) {
    return std::any_of(d.records.begin(), d.records.end(), [](const PredictionRecord& r) { return r.group.has_value(); });
}

int cmd_metrics(const RunConfig& cfg, std::ostream& out) {
    auto data = load_dataset(need(cfg.preds, "preds"), need(cfg.features, "features"));
    reduce_features(cfg, data);
    const auto scheme = make_scheme(cfg, data);
    const auto kernel = make_kernel(cfg, true);
    const auto report = mlce(data, kernel, scheme, thread_count(cfg));
    const auto nl = nll(data);

    std::string text = header(cfg);
    text += line("preds", *cfg.preds);
    text += line("features", *cfg.features);
    text += line("records", std::to_string(data.size()));
    text += line("classes", std::to_string(data.num_classes));
    text += line("bins", describe_binning(scheme));
    text += line("kernel", describe_kernel(report.kernel));
    text += line("pca", cfg.pca ? std::to_string(*cfg.pca) : "none");
    text += line("ece", ece(data, scheme));
    text += line("mce", mce(data, scheme));
    text += line("nll", nl.value);
    text += line("nll_clamped", std::to_string(nl.clamped));
    text += line("brier", brier(data));
    text += line("mlce", report.mlce);
    text += line("mean_lce", report.mean);
    if (has_groups(data)) {
        const auto g = group_mce(data, scheme);
        text += line("max_group_mce", g.max);
        text += line("worst_group", g.worst_group);
    }
    emit(cfg.out, text, out);
    if (cfg.lce_csv) {
        text::write_file_atomic(*cfg.lce_csv, lce_csv(data, report));
    }
    return 0;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
    auto data = load_dataset(need(cfg.preds, "preds"), need(cfg.features, "features"));
    reduce_features(cfg, data);
    const auto scheme = make_scheme(cfg, data);
    auto kernel = make_kernel(cfg, false);
    const auto threads = thread_count(cfg);
    std::string csv = "gamma,mlce,mean_lce\n";
    for (double g : need(cfg.gammas, "gammas")) {
        kernel.gamma = g;
        const auto r = mlce(data, kernel, scheme, threads);
        csv += text::format_double(g) + ',' + text::format_double(r.mlce) + ',' + text::format_double(r.mean) + '\n';
    }
    emit(cfg.out, csv, out);
    return 0;
}

RecalibratorState fit_method(const RunConfig& cfg, const std::string& method, const Dataset& recal) {
    const auto scheme = make_scheme(cfg, recal);
    if (method == "lore") {
        auto kernel = make_kernel(cfg, false);
        if (kernel.uses_features() && !cfg.gamma) {
            const auto embedding = cfg.embedding.value_or(cfg.pca ? "pca" : "");
            if (embedding == "pca") {
                kernel.gamma = kLoReGammaPca;
            } else if (embedding == "tsne") {
                kernel.gamma = kLoReGammaTsne;
            } else {
                throw UsageError("LoRe needs --gamma unless --pca or --embedding pca|tsne selects a default");
            }
        }
        if (kernel.uses_features() && recal.features.d == 0) {
            throw UsageError("LoRe with a feature kernel needs --recal-features");
        }
        return fit_lore(recal, kernel, scheme, cfg.pca);
    }
    if (method == "hb") {
        return fit_hb(recal, scheme);
    }
    if (method == "ts") {
        return fit_ts(recal);
    }
    if (method == "ir") {
        return fit_ir(recal);
    }
    if (method == "group-hb") {
        return fit_groupwise_hb(recal, scheme);
    }
    if (method == "group-ts") {
        return fit_groupwise_ts(recal);
    }
    throw UsageError("unknown --method '" + method + "'");
}

int cmd_recalibrate(const RunConfig& cfg, std::ostream& out) {
    RecalibratorState state;
    if (cfg.load_state) {
        state = load_recalibrator(*cfg.load_state);
    } else {
        const auto& method = need(cfg.method, "method");
        const auto recal = load_split(need(cfg.recal, "recal"), cfg.recal_features);
        state = fit_method(cfg, method, recal);
    }
    const auto eval = load_split(need(cfg.eval, "eval"), cfg.eval_features);
    const auto result = recalibrate_dataset(state, eval, thread_count(cfg));
    text::write_file_atomic(need(cfg.out, "out"), format_predictions(result.data));
    if (cfg.save_state) {
        save_recalibrator(state, *cfg.save_state);
    }
    out << "method: " << method_tag(state) << "\nrecords: " << result.data.size()
        << "\nfallback: " << result.fallback_count << "\n";
    return 0;
}

int cmd_fairness(const RunConfig& cfg, std::ostream& out) {
    auto data = load_split(need(cfg.preds, "preds"), cfg.features);
    const auto scheme = make_scheme(cfg, data);
    const auto g = group_mce(data, scheme);
    std::string text = header(cfg);
    text += line("preds", *cfg.preds);
    text += line("records", std::to_string(data.size()));
    text += line("bins", describe_binning(scheme));
    for (const auto& [name, v] : g.per_group) {
        text += line("group_mce[" + name + "]", v);
        text += line("group_size[" + name + "]", std::to_string(g.group_size.at(name)));
    }
    text += line("max_group_mce", g.max);
    text += line("worst_group", g.worst_group);
    if (cfg.features) {
        reduce_features(cfg, data);
        const auto kernel = make_kernel(cfg, true);
        const auto r = mlce(data, kernel, scheme, thread_count(cfg));
        text += line("kernel", describe_kernel(r.kernel));
        text += line("mlce", r.mlce);
    }
    emit(cfg.out, text, out);
    return 0;
}

int cmd_decision(const RunConfig& cfg, std::ostream& out) {
    const auto orig = load_split(need(cfg.preds, "preds"), std::nullopt);
    const auto ratios = cfg.ratios.value_or(std::vector<double>{2, 5, 10, 20, 50});
    const double u = cfg.u.value_or(1.0);
    const auto prr_line = [](const std::string& label, const Dataset& d) {
        try {
            return "# prr[" + label + "]: " + text::format_double(prr(d)) + "\n";
        } catch (const UndefinedError& e) {
            return "# prr[" + label + "]: undefined (" + std::string(e.what()) + ")\n";
        }
    };
    std::string csv = "# costs are positive: u per abstention, ratio*u per wrong prediction\n";
    csv += prr_line("orig", orig);
    if (cfg.recal_preds) {
        const auto recal = load_split(*cfg.recal_preds, std::nullopt);
        csv += prr_line("recal", recal);
        csv += format_cost_sweep(cost_sweep(orig, recal, ratios, u));
    } else {
        csv += "ratio,cost\n";
        for (double ratio : ratios) {
            csv += text::format_double(ratio) + ',' +
                   text::format_double(run_policy(orig, CostSpec{u, ratio * u}).total_cost) + '\n';
        }
    }
    emit(cfg.out, csv, out);
    return 0;
}

int cmd_synth(const RunConfig& cfg, std::ostream& out) {
    synth::SynthSpec spec;
    spec.n = cfg.n.value_or(1000);
    spec.d = cfg.d.value_or(3);
    spec.clusters = cfg.clusters.value_or(4);
    spec.bias = cfg.bias.value_or(0.2);
    spec.length_scale = cfg.scale.value_or(0.1);
    spec.seed = cfg.seed.value_or(0);
    const auto [data, truth] = synth::generate(spec);
    text::write_file_atomic(need(cfg.out_preds, "out-preds"), format_predictions(data));
    text::write_file_atomic(need(cfg.out_feats, "out-feats"), format_features_csv(data));
    if (cfg.out_truth) {
        text::write_file_atomic(*cfg.out_truth, synth::format_truth(data, truth));
    }
    out << "records: " << data.size() << "\n";
    return 0;
}

int cmd_landscape(const RunConfig& cfg, std::ostream& out) {
    auto data = load_dataset(need(cfg.preds, "preds"), need(cfg.features, "features"));
    const auto embed = load_features_csv(need(cfg.embed, "embed"), data.records);
    reduce_features(cfg, data);
    const auto scheme = make_scheme(cfg, data);
    const auto kernel = make_kernel(cfg, true);
    emit(cfg.out, format_landscape(lce_landscape(data, kernel, scheme, embed, thread_count(cfg))), out);
    return 0;
}

int dispatch(const RunConfig& cfg, std::ostream& out) {
    static const std::map<std::string, int (*)(const RunConfig&, std::ostream&)> table = {
        {"metrics", cmd_metrics},   {"sweep", cmd_sweep},       {"recalibrate", cmd_recalibrate},
        {"fairness", cmd_fairness}, {"decision", cmd_decision}, {"synth", cmd_synth},
        {"landscape", cmd_landscape},
    };
    return table.at(cfg.subcommand)(cfg, out);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Local calibration metrics, recalibration and downstream evaluation", "calib"};
    app.require_subcommand(1);

    RunConfig flags;
    std::optional<std::string> config_path;
    std::vector<std::string> errors;

    for (const auto& sub : subcommands()) {
        auto* cmd = app.add_subcommand(sub.name, sub.description);
        cmd->add_option_function<std::string>(
            "--config", [&](const std::string& v) { config_path = v; }, "key = value config file");
        cmd->add_option_function<std::size_t>(
            "--threads", [&](const std::size_t& v) { flags.threads = v; }, "worker threads");
        cmd->add_flag_callback("--stamp", [&] { flags.stamp = true; }, "add a timestamp to reports");
        for (const char* name : sub.options) {
            const auto* f = detail::find_field(name);
            cmd->add_option_function<std::string>(
                std::string("--") + name,
                [&flags, &errors, f](const std::string& v) {
                    try {
                        f->set(flags, v);
                    } catch (const Error& e) {
                        errors.push_back("--" + f->name + ": " + e.what());
                    }
                },
                f->help);
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }
    const auto* chosen = app.get_subcommands().front();
    flags.subcommand = chosen->get_name();
    if (!errors.empty()) {
        for (const auto& e : errors) {
            err << "error: " << e << "\n";
        }
        err << "\n" << chosen->help();
        return 2;
    }

    try {
        RunConfig cfg = config_path ? merge(flags, load_config(*config_path)) : flags;
        cfg.subcommand = flags.subcommand;
        return dispatch(cfg, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n\n" << chosen->help();
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace calib::cli
