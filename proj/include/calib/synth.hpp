#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "calib/binning.hpp"
#include "calib/dataset.hpp"
#include "calib/kernel.hpp"

namespace calib::synth {

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter, slot), so draws never depend on how many were made
// before them.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix(seed ^ mix(stream + 0x9E3779B97F4A7C15ULL))) {}

    std::uint64_t bits(std::uint64_t counter, std::uint64_t slot) const;
    // Uniform on the open interval (0, 1).
    double uniform(std::uint64_t counter, std::uint64_t slot) const;
    // Standard normal via Box-Muller on slots (2*slot, 2*slot + 1).
    double normal(std::uint64_t counter, std::uint64_t slot) const;

    static std::uint64_t mix(std::uint64_t x);

private:
    std::uint64_t key_;
};

enum Stream : std::uint64_t {
    kFeatureStream = 1,
    kLabelStream = 2,
    kMonteCarloStream = 3,
};

// Gaussian clusters on a unit grid with alternating over/under-confidence.
struct SynthSpec {
    std::size_t n = 1000;
    std::size_t d = 3;
    std::size_t clusters = 4;
    std::uint64_t seed = 0;
    double bias = 0.0;          // amplitude in [0, 0.3]
    double length_scale = 0.1;  // cluster spread is 0.15 * length_scale

    void validate() const;
    double cluster_sigma() const { return 0.15 * length_scale; }
};

struct SynthTruth {
    SynthSpec spec;
    std::vector<double> p_star;  // probability that the prediction is correct
    std::vector<double> bias;    // conf - p_star
    std::vector<std::size_t> cluster;
};

// One draw from the generator distribution.
struct SynthSample {
    std::vector<double> features;
    std::size_t cluster = 0;
    double conf = 0.0;
    double p_star = 0.0;
    double bias = 0.0;
};

std::vector<double> cluster_mean(const SynthSpec& spec, std::size_t cluster);

// +1 for over-confident clusters, -1 for under-confident; adjacent grid cells differ.
int cluster_sign(const SynthSpec& spec, std::size_t cluster);

// Confidence as a decreasing logistic function of the distance to the cluster
// mean, measured in cluster standard deviations. Values lie in (0.05, 0.95).
double confidence_at_distance(const SynthSpec& spec, double distance);

// Sample `index` of stream `stream` under `seed`, with cluster index % clusters.
SynthSample draw_sample(const SynthSpec& spec, std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

// Records `s<i>`, y_pred = 0 and y_true = 0 exactly when the prediction is
// correct; group label `c<k>` is the cluster.
std::pair<Dataset, SynthTruth> generate(const SynthSpec& spec);

struct SlceTruth {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t support = 0;  // draws that landed in the query's bin
};

struct SynthQuery {
    std::vector<double> features;
    double conf = 0.0;
};

// Population signed local calibration error at `query`, by Monte Carlo over fresh
// generator draws, using E[correct | x] = p*(x) in the numerator. Throws
// UndefinedError when no draw lands in the query's bin.
SlceTruth true_slce(const SynthTruth& truth, const SynthQuery& query, const KernelSpec& spec,
                    const BinningScheme& scheme, std::size_t mc_samples, std::uint64_t seed);

// Same estimate for many queries sharing one set of draws.
std::vector<SlceTruth> true_slce_batch(const SynthSpec& spec, std::span<const SynthQuery> queries,
                                       const KernelSpec& kernel, const BinningScheme& scheme,
                                       std::size_t mc_samples, std::uint64_t seed);

// Re-expresses a binary-correctness dataset as a two-class classifier with full
// probability vectors: P(class 0) = conf, scaled in logit space by
// `logit_scale` (> 1 sharpens, < 1 softens). Labels and top-label confidence are
// re-derived from the new probabilities.
Dataset binary_probs_view(const Dataset& d, double logit_scale);

std::string format_truth(const Dataset& d, const SynthTruth& truth);

}  // namespace calib::synth
