#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"

#include "calib/dataset.hpp"
#include "calib/error.hpp"
#include "calib/metrics.hpp"
#include "calib/synth.hpp"

using namespace calib;
using namespace calib::synth;

namespace {
SynthSpec make(std::size_t n, double bias, std::uint64_t seed, std::size_t clusters = 4) {
    SynthSpec s;
    s.n = n;
    s.d = 3;
    s.clusters = clusters;
    s.bias = bias;
    s.seed = seed;
    return s;
}
}  // namespace

TEST_CASE("counter generator is a pure function of its coordinates") {
    const CounterRng a(1, kFeatureStream), b(1, kFeatureStream), c(1, kLabelStream);
    CHECK(a.bits(5, 0) == b.bits(5, 0));
    CHECK(a.bits(5, 0) != c.bits(5, 0));
    CHECK(a.bits(5, 0) != a.bits(6, 0));
    double lo = 1, hi = 0, sum = 0;
    for (std::uint64_t i = 0; i < 20000; ++i) {
        const double u = a.uniform(i, 0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += a.normal(i, 0);
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
    CHECK(std::fabs(sum / 20000) < 0.03);
}

TEST_CASE("generation is reproducible and prefix-stable") {
    const auto [d1, t1] = generate(make(500, 0.2, 9));
    const auto [d2, t2] = generate(make(500, 0.2, 9));
    CHECK(format_predictions(d1) == format_predictions(d2));
    CHECK(format_features_csv(d1) == format_features_csv(d2));
    CHECK(format_truth(d1, t1) == format_truth(d2, t2));

    const auto [big, tb] = generate(make(800, 0.2, 9));
    for (std::size_t i = 0; i < 500; ++i) {
        CHECK(big.records[i].conf == d1.records[i].conf);
        CHECK(big.records[i].y_true == d1.records[i].y_true);
    }
    const auto [other, to] = generate(make(500, 0.2, 10));
    CHECK(format_predictions(other) != format_predictions(d1));
}

TEST_CASE("generated records respect the encoding") {
    const auto [d, t] = generate(make(2000, 0.3, 3));
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& r = d.records[i];
        CHECK(r.y_pred == 0);
        CHECK(r.conf >= 0.05);
        CHECK(r.conf <= 0.95);
        CHECK(t.p_star[i] >= 0.0);
        CHECK(t.p_star[i] <= 1.0);
        CHECK(r.conf == doctest::Approx(std::clamp(t.p_star[i] + t.bias[i], 0.0, 1.0)));
        CHECK(r.group == std::optional<std::string>("c" + std::to_string(t.cluster[i])));
        CHECK(t.cluster[i] == i % 4);
    }
}

TEST_CASE("cluster layout") {
    const auto s = make(10, 0.2, 0);
    std::vector<std::vector<double>> means;
    for (std::size_t k = 0; k < 4; ++k) {
        means.push_back(cluster_mean(s, k));
    }
    std::sort(means.begin(), means.end());
    CHECK(std::adjacent_find(means.begin(), means.end()) == means.end());
    CHECK(cluster_sign(s, 0) != cluster_sign(s, 1));
    CHECK(cluster_sign(s, 0) != cluster_sign(s, 2));
    CHECK(cluster_sign(s, 0) == cluster_sign(s, 3));
    CHECK(confidence_at_distance(s, 0.0) > confidence_at_distance(s, 0.05));
    CHECK_THROWS_AS(make(10, 0.4, 0).validate(), Error);
}

TEST_CASE("unbiased generator is calibrated") {
    const auto [d, t] = generate(make(20000, 0.0, 5));
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(d.records[i].conf == t.p_star[i]);
    }
    CHECK(ece(d, BinningScheme::equal_width(15)) <= 0.03);
}

TEST_CASE("opposite clusters cancel globally but not per group") {
    const auto [d, t] = generate(make(20000, 0.2, 6, 2));
    std::map<std::size_t, double> mean_bias;
    for (std::size_t i = 0; i < d.size(); ++i) {
        mean_bias[t.cluster[i]] += t.bias[i] / (d.size() / 2.0);
    }
    CHECK(mean_bias[0] * mean_bias[1] < 0);
    const auto k = BinningScheme::equal_width(15);
    CHECK(group_mce(d, k).max >= 0.15);
    CHECK(ece(d, k) < 0.5 * std::fabs(mean_bias[0]));
}

TEST_CASE("Monte Carlo ground truth") {
    const auto k = BinningScheme::equal_width(15);
    const auto s0 = make(1, 0.0, 0);
    const auto q = draw_sample(s0, 17, kFeatureStream, 0);
    const KernelSpec lap{KernelFamily::Laplacian, 0.1, 3};
    const std::vector<SynthQuery> qs{{q.features, q.conf}};

    SUBCASE("unbiased generator has zero local error") {
        const auto t = true_slce_batch(s0, qs, lap, k, 200000, 1).front();
        CHECK(std::fabs(t.value) <= 3 * t.std_error + 1e-12);
    }
    SUBCASE("over-confident cluster centre shows the bias") {
        const auto s = make(1, 0.2, 0);
        std::size_t over = cluster_sign(s, 0) > 0 ? 0 : 1;
        const auto centre = cluster_mean(s, over);
        const std::vector<SynthQuery> c{{centre, confidence_at_distance(s, 0.0)}};
        const KernelSpec narrow{KernelFamily::Laplacian, 0.01, 3};
        const auto t = true_slce_batch(s, c, narrow, k, 400000, 2).front();
        CHECK(std::fabs(t.value - 0.2) <= 3 * t.std_error + 1e-9);
    }
    SUBCASE("wide kernel matches the bin-level gap") {
        const auto s = make(1, 0.2, 0);
        const KernelSpec wide{KernelFamily::Laplacian, 1e9, 3};
        const auto t = true_slce_batch(s, qs, wide, k, 200000, 3).front();
        // independent estimate of E[conf - p* | bin] from another stream of draws
        const auto bin = k.bin_index(q.conf);
        double sum = 0, sq = 0;
        std::size_t m = 0;
        for (std::uint64_t i = 0; i < 200000; ++i) {
            const auto x = draw_sample(s, 99, kFeatureStream, i);
            if (k.bin_index(x.conf) == bin) {
                sum += x.bias;
                sq += x.bias * x.bias;
                ++m;
            }
        }
        const double mean = sum / m;
        const double se = std::sqrt((sq / m - mean * mean) / m);
        CHECK(std::fabs(t.value - mean) <= 4 * std::hypot(se, t.std_error));
    }
    SUBCASE("too few draws") { CHECK_THROWS_AS(true_slce_batch(s0, qs, lap, k, 100, 1), Error); }
}

TEST_CASE("binary probability view") {
    const auto [d, t] = generate(make(200, 0.0, 8));
    const auto v = binary_probs_view(d, 2.0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& r = v.records[i];
        REQUIRE(r.probs.size() == 2);
        CHECK(r.conf == std::max(r.probs[0], r.probs[1]));
        // sharpening moves the class-0 probability away from 1/2
        const double p = d.records[i].conf;
        CHECK(std::fabs(r.probs[0] - 0.5) >= std::fabs(p - 0.5) - 1e-12);
        // correctness of the original prediction is kept in the labels
        CHECK(r.y_true == d.records[i].y_true);
    }
}
