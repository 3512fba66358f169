#include "calib/recalib.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "calib/error.hpp"
#include "calib/parallel.hpp"

namespace calib {

namespace {

constexpr double kProbFloor = 1e-12;
constexpr double kGoldenTolerance = 1e-6;

double accuracy_of(std::span<const PredictionRecord> records) {
    if (records.empty()) {
        return 0.0;
    }
    double hits = 0.0;
    for (const auto& r : records) {
        hits += r.correct() ? 1.0 : 0.0;
    }
    return hits / static_cast<double>(records.size());
}

std::vector<double> log_probs(std::span<const double> probs) {
    std::vector<double> z(probs.size());
    for (std::size_t c = 0; c < probs.size(); ++c) {
        z[c] = std::log(std::max(probs[c], kProbFloor));
    }
    return z;
}

void require_probs(std::span<const PredictionRecord> records) {
    for (const auto& r : records) {
        if (!r.has_probs()) {
            throw CapabilityError("temperature scaling needs full probability vectors; record '" + r.id +
                                  "' has none");
        }
    }
}

std::map<std::string, std::vector<PredictionRecord>> split_by_group(const Dataset& d) {
    std::map<std::string, std::vector<PredictionRecord>> out;
    for (const auto& r : d.records) {
        if (r.group) {
            out[*r.group].push_back(r);
        }
    }
    return out;
}

}  // namespace

// -- LoRe --------------------------------------------------------------------

LoReState fit_lore(const Dataset& recal, const KernelSpec& spec, const BinningScheme& scheme,
                   std::optional<std::size_t> pca_dim) {
    if (recal.empty()) {
        throw ArgumentError("LoRe needs a non-empty recalibration set");
    }
    LoReState s;
    s.scheme = scheme;
    s.ref_conf.reserve(recal.size());
    s.ref_correct.reserve(recal.size());
    s.ref_groups.reserve(recal.size());
    for (const auto& r : recal.records) {
        s.ref_conf.push_back(r.conf);
        s.ref_correct.push_back(r.correct() ? 1 : 0);
        s.ref_groups.push_back(r.group);
    }
    s.global_accuracy = accuracy_of(recal.records);
    if (spec.uses_features()) {
        if (pca_dim) {
            s.pca = fit_pca(recal.features, *pca_dim);
            s.ref_features = apply_pca(*s.pca, recal.features);
        } else {
            s.ref_features = recal.features;
        }
    }
    s.kernel = resolve_kernel(spec, s.ref_features.d);
    return s;
}

namespace {

std::vector<PredictionRecord> group_carriers(const std::vector<std::optional<std::string>>& groups) {
    std::vector<PredictionRecord> out(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i) {
        out[i].group = groups[i];
    }
    return out;
}

std::vector<double> as_values(const std::vector<std::uint8_t>& bits) {
    return {bits.begin(), bits.end()};
}

}  // namespace

LoReModel::LoReModel(const LoReState& state)
    : state_(&state),
      groups_(group_carriers(state.ref_groups)),
      smoother_(state.kernel, state.scheme, state.ref_features, state.ref_conf, groups_.reference_codes(),
                as_values(state.ref_correct)) {}

Recalibrated LoReModel::apply(double conf, std::span<const double> features,
                              const std::optional<std::string>& group) const {
    thread_local std::vector<double> scratch;
    thread_local std::vector<double> projected;
    BinnedKernelSmoother::Query q;
    q.bin = state_->scheme.bin_index(conf);
    q.group = groups_.code(group);
    if (state_->kernel.uses_features()) {
        if (state_->pca) {
            projected.resize(state_->pca->k);
            state_->pca->project(features, projected);
            q.features = projected;
        } else {
            q.features = features;
        }
    }
    if (auto v = smoother_.weighted_mean(q, scratch)) {
        return {std::clamp(*v, 0.0, 1.0), false};
    }
    return {state_->global_accuracy, true};
}

Recalibrated apply_lore(const LoReState& state, double conf, std::span<const double> features,
                        const std::optional<std::string>& group) {
    return LoReModel(state).apply(conf, features, group);
}

// -- histogram binning ----------------------------------------------------------

HbState fit_hb(std::span<const PredictionRecord> recal, const BinningScheme& scheme) {
    HbState s;
    s.scheme = scheme;
    s.accuracy.assign(scheme.size(), 0.0);
    s.count.assign(scheme.size(), 0);
    for (const auto& r : recal) {
        const auto b = scheme.bin_index(r.conf);
        ++s.count[b];
        s.accuracy[b] += r.correct() ? 1.0 : 0.0;
    }
    for (std::size_t b = 0; b < s.accuracy.size(); ++b) {
        if (s.count[b] > 0) {
            s.accuracy[b] /= static_cast<double>(s.count[b]);
        }
    }
    s.global_accuracy = accuracy_of(recal);
    return s;
}

Recalibrated apply_hb(const HbState& state, double conf) {
    const auto b = state.scheme.bin_index(conf);
    if (state.count[b] == 0) {
        return {state.global_accuracy, true};
    }
    return {state.accuracy[b], false};
}

// -- temperature scaling ----------------------------------------------------------

std::vector<double> softmax_with_temperature(std::span<const double> logits, double temperature) {
    if (!(temperature > 0.0)) {
        throw ArgumentError("temperature must be positive");
    }
    std::vector<double> out(logits.size());
    if (logits.empty()) {
        return out;
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < logits.size(); ++c) {
        out[c] = std::exp((logits[c] - top) / temperature);
        sum += out[c];
    }
    for (double& p : out) {
        p /= sum;
    }
    return out;
}

double temperature_nll(std::span<const PredictionRecord> records, double temperature) {
    require_probs(records);
    if (records.empty()) {
        throw ArgumentError("temperature scaling needs a non-empty recalibration set");
    }
    double total = 0.0;
    for (const auto& r : records) {
        const auto z = log_probs(r.probs);
        const double top = *std::max_element(z.begin(), z.end());
        double sum = 0.0;
        for (double v : z) {
            sum += std::exp((v - top) / temperature);
        }
        total += std::log(sum) - (z[static_cast<std::size_t>(r.y_true)] - top) / temperature;
    }
    return total / static_cast<double>(records.size());
}

TsState fit_ts(std::span<const PredictionRecord> recal) {
    require_probs(recal);
    if (recal.empty()) {
        throw ArgumentError("temperature scaling needs a non-empty recalibration set");
    }
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = kMinTemperature;
    double hi = kMaxTemperature;
    double a = hi - ratio * (hi - lo);
    double b = lo + ratio * (hi - lo);
    double fa = temperature_nll(recal, a);
    double fb = temperature_nll(recal, b);
    while (hi - lo > kGoldenTolerance) {
        if (fa <= fb) {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = temperature_nll(recal, a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = temperature_nll(recal, b);
        }
    }
    return TsState{0.5 * (lo + hi)};
}

std::vector<double> apply_ts(const TsState& state, std::span<const double> probs) {
    return softmax_with_temperature(log_probs(probs), state.temperature);
}

// -- isotonic regression ----------------------------------------------------------

IrState fit_ir(std::span<const PredictionRecord> recal) {
    std::vector<std::size_t> order(recal.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return recal[a].conf < recal[b].conf; });

    struct Block {
        double start;
        double sum;
        double weight;
        double mean() const { return sum / weight; }
    };
    std::vector<Block> blocks;
    for (std::size_t idx : order) {
        const auto& r = recal[idx];
        const double y = r.correct() ? 1.0 : 0.0;
        if (!blocks.empty() && blocks.back().start == r.conf) {
            blocks.back().sum += y;
            blocks.back().weight += 1.0;
        } else {
            blocks.push_back({r.conf, y, 1.0});
        }
        while (blocks.size() >= 2 && blocks[blocks.size() - 2].mean() >= blocks.back().mean()) {
            const Block last = blocks.back();
            blocks.pop_back();
            blocks.back().sum += last.sum;
            blocks.back().weight += last.weight;
        }
    }
    IrState s;
    for (const auto& b : blocks) {
        s.x.push_back(b.start);
        s.v.push_back(b.mean());
    }
    return s;
}

double apply_ir(const IrState& state, double conf) {
    if (state.x.empty()) {
        throw ArgumentError("isotonic regression was fitted on an empty set");
    }
    const auto it = std::upper_bound(state.x.begin(), state.x.end(), conf);
    const auto idx = it == state.x.begin() ? 0 : static_cast<std::size_t>(it - state.x.begin()) - 1;
    return state.v[idx];
}

// -- group-wise ----------------------------------------------------------------

GroupwiseHbState fit_groupwise_hb(const Dataset& recal, const BinningScheme& scheme) {
    GroupwiseHbState s;
    for (const auto& [name, members] : split_by_group(recal)) {
        s.groups.emplace(name, fit_hb(members, scheme));
    }
    if (s.groups.empty()) {
        throw ArgumentError("group-wise recalibration needs group labels on the recalibration set");
    }
    s.global = fit_hb(recal.records, scheme);
    return s;
}

GroupwiseTsState fit_groupwise_ts(const Dataset& recal) {
    GroupwiseTsState s;
    for (const auto& [name, members] : split_by_group(recal)) {
        s.groups.emplace(name, fit_ts(members));
    }
    if (s.groups.empty()) {
        throw ArgumentError("group-wise recalibration needs group labels on the recalibration set");
    }
    s.global = fit_ts(recal.records);
    return s;
}

Recalibrated apply_groupwise_hb(const GroupwiseHbState& state, double conf, const std::optional<std::string>& group) {
    if (group) {
        if (auto it = state.groups.find(*group); it != state.groups.end()) {
            return apply_hb(it->second, conf);
        }
    }
    return {apply_hb(state.global, conf).conf, true};
}

RecalibratedProbs apply_groupwise_ts(const GroupwiseTsState& state, std::span<const double> probs,
                                     const std::optional<std::string>& group) {
    if (group) {
        if (auto it = state.groups.find(*group); it != state.groups.end()) {
            return {apply_ts(it->second, probs), false};
        }
    }
    return {apply_ts(state.global, probs), true};
}

// -- dataset application ----------------------------------------------------------

std::string method_tag(const RecalibratorState& state) {
    struct Visitor {
        std::string operator()(const LoReState&) const { return "lore"; }
        std::string operator()(const HbState&) const { return "hb"; }
        std::string operator()(const TsState&) const { return "ts"; }
        std::string operator()(const IrState&) const { return "ir"; }
        std::string operator()(const GroupwiseHbState&) const { return "group-hb"; }
        std::string operator()(const GroupwiseTsState&) const { return "group-ts"; }
    };
    return std::visit(Visitor{}, state);
}

namespace {

void set_probs(PredictionRecord& r, std::vector<double> probs) {
    r.conf = probs[static_cast<std::size_t>(r.y_pred)];
    for (double p : probs) {
        r.conf = std::max(r.conf, p);
    }
    r.probs = std::move(probs);
}

}  // namespace

RecalibrationResult recalibrate_dataset(const RecalibratorState& state, const Dataset& eval, std::size_t threads) {
    RecalibrationResult out;
    out.data = eval;
    out.fallback.assign(eval.size(), 0);
    auto& records = out.data.records;

    if (const auto* ts = std::get_if<TsState>(&state)) {
        require_probs(eval.records);
        for (auto& r : records) {
            set_probs(r, apply_ts(*ts, r.probs));
        }
    } else if (const auto* gts = std::get_if<GroupwiseTsState>(&state)) {
        require_probs(eval.records);
        for (std::size_t i = 0; i < records.size(); ++i) {
            auto res = apply_groupwise_ts(*gts, records[i].probs, records[i].group);
            set_probs(records[i], std::move(res.probs));
            out.fallback[i] = res.fallback ? 1 : 0;
        }
    } else {
        std::vector<Recalibrated> values(records.size());
        if (const auto* lore = std::get_if<LoReState>(&state)) {
            if (lore->kernel.uses_features()) {
                const std::size_t expected = lore->pca ? lore->pca->input_dim() : lore->ref_features.d;
                if (eval.features.d != expected) {
                    throw ArgumentError("evaluation features have dimension " + std::to_string(eval.features.d) +
                                        ", LoRe references expect " + std::to_string(expected));
                }
            }
            const LoReModel model(*lore);
            parallel_for(records.size(), threads, [&](std::size_t begin, std::size_t end) {
                for (std::size_t i = begin; i < end; ++i) {
                    const auto feat = lore->kernel.uses_features() ? eval.features.row(i) : std::span<const double>{};
                    values[i] = model.apply(eval.records[i].conf, feat, eval.records[i].group);
                }
            });
        } else if (const auto* hb = std::get_if<HbState>(&state)) {
            for (std::size_t i = 0; i < records.size(); ++i) {
                values[i] = apply_hb(*hb, records[i].conf);
            }
        } else if (const auto* ir = std::get_if<IrState>(&state)) {
            for (std::size_t i = 0; i < records.size(); ++i) {
                values[i] = {apply_ir(*ir, records[i].conf), false};
            }
        } else if (const auto* ghb = std::get_if<GroupwiseHbState>(&state)) {
            for (std::size_t i = 0; i < records.size(); ++i) {
                values[i] = apply_groupwise_hb(*ghb, records[i].conf, records[i].group);
            }
        }
        for (std::size_t i = 0; i < records.size(); ++i) {
            records[i].conf = values[i].conf;
            records[i].probs.clear();
            out.fallback[i] = values[i].fallback ? 1 : 0;
        }
    }
    out.fallback_count = static_cast<std::size_t>(std::count(out.fallback.begin(), out.fallback.end(), 1));
    return out;
}

}  // namespace calib
