#include "calib/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "calib/error.hpp"
#include "calib/smoother.hpp"
#include "calib/text.hpp"

namespace calib::synth {

namespace {

constexpr double kConfLow = 0.05;
constexpr double kConfHigh = 0.95;
constexpr double kLogisticSlope = 2.5;

std::size_t grid_side(const SynthSpec& spec) {
    if (spec.d < 2) {
        return spec.clusters;
    }
    return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(spec.clusters)) - 1e-9));
}

}  // namespace

std::uint64_t CounterRng::mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t CounterRng::bits(std::uint64_t counter, std::uint64_t slot) const {
    return mix(mix(key_ ^ counter) + slot * 0xD1B54A32D192ED03ULL);
}

double CounterRng::uniform(std::uint64_t counter, std::uint64_t slot) const {
    // 53 random mantissa bits, shifted off zero.
    return (static_cast<double>(bits(counter, slot) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t counter, std::uint64_t slot) const {
    const double u1 = uniform(counter, 2 * slot);
    const double u2 = uniform(counter, 2 * slot + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void SynthSpec::validate() const {
    if (n < 1 || d < 1 || clusters < 1) {
        throw ArgumentError("synthetic data needs n, d and cluster count of at least 1");
    }
    if (!(bias >= 0.0 && bias <= 0.3)) {
        throw ArgumentError("bias amplitude must lie in [0, 0.3]");
    }
    if (!(length_scale > 0.0)) {
        throw ArgumentError("length scale must be positive");
    }
}

std::vector<double> cluster_mean(const SynthSpec& spec, std::size_t cluster) {
    std::vector<double> mu(spec.d, 0.0);
    const std::size_t side = grid_side(spec);
    mu[0] = static_cast<double>(cluster % side);
    if (spec.d >= 2) {
        mu[1] = static_cast<double>(cluster / side);
    }
    return mu;
}

int cluster_sign(const SynthSpec& spec, std::size_t cluster) {
    const std::size_t side = grid_side(spec);
    const std::size_t parity = spec.d >= 2 ? (cluster % side + cluster / side) : cluster;
    return parity % 2 == 0 ? 1 : -1;
}

double confidence_at_distance(const SynthSpec& spec, double distance) {
    // Centre the logistic near the typical distance of a d-dimensional Gaussian.
    const double centre = std::sqrt(std::max(0.5, static_cast<double>(spec.d) - 0.5));
    const double r = distance / spec.cluster_sigma();
    return kConfLow + (kConfHigh - kConfLow) / (1.0 + std::exp(kLogisticSlope * (r - centre)));
}

SynthSample draw_sample(const SynthSpec& spec, std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    const CounterRng rng(seed, stream);
    SynthSample s;
    s.cluster = static_cast<std::size_t>(index % spec.clusters);
    s.features = cluster_mean(spec, s.cluster);
    const double sigma = spec.cluster_sigma();
    double dist2 = 0.0;
    for (std::size_t j = 0; j < spec.d; ++j) {
        const double z = sigma * rng.normal(index, j);
        s.features[j] += z;
        dist2 += z * z;
    }
    const double base = confidence_at_distance(spec, std::sqrt(dist2));
    const double signed_bias = spec.bias * static_cast<double>(cluster_sign(spec, s.cluster));
    s.p_star = std::clamp(base - signed_bias, 0.0, 1.0);
    s.bias = base - s.p_star;
    s.conf = std::clamp(s.p_star + s.bias, kConfLow, kConfHigh);
    return s;
}

std::pair<Dataset, SynthTruth> generate(const SynthSpec& spec) {
    spec.validate();
    const CounterRng labels(spec.seed, kLabelStream);
    std::vector<PredictionRecord> records;
    records.reserve(spec.n);
    FeatureMatrix features(spec.n, spec.d);
    SynthTruth truth;
    truth.spec = spec;
    truth.p_star.reserve(spec.n);
    truth.bias.reserve(spec.n);
    truth.cluster.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const auto s = draw_sample(spec, spec.seed, kFeatureStream, i);
        std::copy(s.features.begin(), s.features.end(), features.row(i).begin());
        const bool correct = labels.uniform(i, 0) < s.p_star;
        PredictionRecord r;
        r.id = "s" + std::to_string(i);
        r.y_pred = 0;
        r.y_true = correct ? 0 : 1;
        r.conf = s.conf;
        r.group = "c" + std::to_string(s.cluster);
        records.push_back(std::move(r));
        truth.p_star.push_back(s.p_star);
        truth.bias.push_back(s.bias);
        truth.cluster.push_back(s.cluster);
    }
    return {make_dataset(std::move(records), std::move(features), 2), std::move(truth)};
}

std::vector<SlceTruth> true_slce_batch(const SynthSpec& spec, std::span<const SynthQuery> queries,
                                       const KernelSpec& kernel, const BinningScheme& scheme,
                                       std::size_t mc_samples, std::uint64_t seed) {
    if (mc_samples < 10000) {
        throw ArgumentError("Monte-Carlo ground truth needs at least 10^4 samples");
    }
    const KernelSpec k = resolve_kernel(kernel, spec.d);
    if (!k.uses_features()) {
        throw ArgumentError("ground-truth SLCE is defined for feature kernels only");
    }
    std::vector<std::size_t> query_bin;
    for (const auto& q : queries) {
        if (q.features.size() != spec.d) {
            throw ArgumentError("query feature dimension does not match the generator");
        }
        query_bin.push_back(scheme.bin_index(q.conf));
    }
    // Running sums of a_i = (conf - p*) k_i and b_i = k_i plus second moments for
    // the delta-method standard error of the ratio.
    struct Acc {
        double a = 0, b = 0, aa = 0, bb = 0, ab = 0;
        std::size_t support = 0;
    };
    std::vector<Acc> acc(queries.size());
    for (std::size_t m = 0; m < mc_samples; ++m) {
        const auto s = draw_sample(spec, seed, kMonteCarloStream, m);
        const auto bin = scheme.bin_index(s.conf);
        for (std::size_t qi = 0; qi < queries.size(); ++qi) {
            if (query_bin[qi] != bin) {
                continue;
            }
            const double w = eval_kernel(k, s.features, queries[qi].features);
            const double a = (s.conf - s.p_star) * w;
            auto& t = acc[qi];
            t.a += a;
            t.b += w;
            t.aa += a * a;
            t.bb += w * w;
            t.ab += a * w;
            ++t.support;
        }
    }
    std::vector<SlceTruth> out(queries.size());
    const auto count = static_cast<double>(mc_samples);
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        const auto& t = acc[qi];
        if (t.support == 0 || !(t.b > 0.0)) {
            throw UndefinedError("no Monte-Carlo draw landed in the query's confidence bin");
        }
        const double ma = t.a / count;
        const double mb = t.b / count;
        const double ratio = ma / mb;
        // Var(a - R b) / (M * mean(b)^2)
        const double var = (t.aa - 2.0 * ratio * t.ab + ratio * ratio * t.bb) / count -
                           (ma - ratio * mb) * (ma - ratio * mb);
        out[qi].value = ratio;
        out[qi].std_error = std::sqrt(std::max(0.0, var) / count) / mb;
        out[qi].support = t.support;
    }
    return out;
}

SlceTruth true_slce(const SynthTruth& truth, const SynthQuery& query, const KernelSpec& spec,
                    const BinningScheme& scheme, std::size_t mc_samples, std::uint64_t seed) {
    return true_slce_batch(truth.spec, std::span(&query, 1), spec, scheme, mc_samples, seed).front();
}

Dataset binary_probs_view(const Dataset& d, double logit_scale) {
    if (!(logit_scale > 0.0)) {
        throw ArgumentError("logit scale must be positive");
    }
    Dataset out = d;
    out.num_classes = 2;
    for (auto& r : out.records) {
        const double p0 = std::clamp(r.conf, 1e-12, 1.0 - 1e-12);
        // Class 0 is "the original prediction was right".
        const int label = r.correct() ? 0 : 1;
        const double z = logit_scale * std::log(p0 / (1.0 - p0));
        const double q0 = 1.0 / (1.0 + std::exp(-z));
        r.probs = {q0, 1.0 - q0};
        r.y_true = label;
        r.y_pred = static_cast<int>(argmax(r.probs));
        r.conf = r.probs[static_cast<std::size_t>(r.y_pred)];
    }
    return out;
}

std::string format_truth(const Dataset& d, const SynthTruth& truth) {
    std::string out = "id,cluster,p_star,bias\n";
    for (std::size_t i = 0; i < d.size(); ++i) {
        out += d.records[i].id + ',' + std::to_string(truth.cluster[i]) + ',' + text::format_double(truth.p_star[i]) +
               ',' + text::format_double(truth.bias[i]) + '\n';
    }
    return out;
}

}  // namespace calib::synth
