#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "calib/binning.hpp"
#include "calib/metrics.hpp"
#include "calib/recalib.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace calib;

namespace {
std::vector<double> uniform(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> v(n);
    for (auto& x : v) {
        x = u(rng);
    }
    return v;
}
}  // namespace

TEST_CASE("bins partition [0,1] and are monotone in confidence") {
    std::mt19937_64 rng(1);
    for (std::size_t k : {1, 2, 7, 15, 40}) {
        auto confs = uniform(rng, 300);
        confs.push_back(0.0);
        confs.push_back(1.0);
        for (const auto& scheme : {BinningScheme::equal_width(k), BinningScheme::equal_mass(k, confs)}) {
            const auto& e = scheme.edges();
            CHECK(std::adjacent_find(e.begin(), e.end(), std::greater_equal<>()) == e.end());
            std::sort(confs.begin(), confs.end());
            std::size_t prev = 0;
            for (double c : confs) {
                const auto b = scheme.bin_index(c);
                CHECK(b < scheme.size());
                CHECK(b >= prev);
                CHECK(e[b] <= c);
                CHECK((c < e[b + 1] || (b + 1 == scheme.size() && c == 1.0)));
                prev = b;
            }
        }
    }
}

TEST_CASE("equal-mass bins hold roughly equal counts") {
    std::mt19937_64 rng(2);
    const auto confs = uniform(rng, 1000);
    const auto scheme = BinningScheme::equal_mass(10, confs);
    std::vector<std::size_t> count(scheme.size());
    for (double c : confs) {
        ++count[scheme.bin_index(c)];
    }
    for (auto n : count) {
        CHECK(n >= 99);
        CHECK(n <= 101);
    }
}

TEST_CASE("kernels are symmetric, bounded and grow with bandwidth") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 100; ++t) {
        const auto u = uniform(rng, 4), v = uniform(rng, 4);
        for (auto family : {KernelFamily::Laplacian, KernelFamily::Gaussian}) {
            double last = 0.0;
            for (double g : {0.01, 0.1, 1.0, 10.0}) {
                const KernelSpec k{family, g, 4};
                const double a = eval_kernel(k, u, v);
                CHECK(a == eval_kernel(k, v, u));
                CHECK(a > 0.0 - 1e-300);
                CHECK(a <= 1.0);
                CHECK(a >= last);
                last = a;
            }
        }
    }
}

TEST_CASE("library LCE matches the brute-force formula") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 60; ++t) {
        const std::size_t n = 1 + rng() % 50, d = 1 + rng() % 5, k = 1 + rng() % 20;
        const double gamma = std::exp(std::uniform_real_distribution<double>(-3, 1.5)(rng));
        const auto pts = oracle::random_points(rng, n, d);
        const auto data = fixture::from_points(pts);
        const auto scheme = BinningScheme::equal_width(k);
        const auto rep = mlce(data, {KernelFamily::Laplacian, gamma, d}, scheme);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(std::fabs(rep.slce[i] - oracle::slce(pts, i, gamma, k)) <= 1e-12);
            CHECK(rep.lce[i] == std::fabs(rep.slce[i]));
            CHECK(rep.lce[i] <= 1.0);
        }
        CHECK(std::fabs(ece(data, scheme) - oracle::ece(pts, k)) <= 1e-12);
        CHECK(std::fabs(mce(data, scheme) - oracle::mce(pts, k)) <= 1e-12);
    }
}

TEST_CASE("MLCE tends to MCE for very wide kernels") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 30; ++t) {
        const auto pts = oracle::random_points(rng, 5 + rng() % 60, 3);
        const auto data = fixture::from_points(pts);
        const auto scheme = BinningScheme::equal_width(1 + rng() % 15);
        CHECK(std::fabs(mlce(data, {KernelFamily::Laplacian, 1e9, 3}, scheme).mlce - mce(data, scheme)) <= 1e-6);
    }
}

TEST_CASE("LoRe under the group kernel is group-wise histogram binning") {
    std::mt19937_64 rng(6);
    auto pts = oracle::random_points(rng, 200, 1);
    std::vector<std::string> groups;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        groups.push_back("g" + std::to_string(i % 3));
    }
    std::vector<double> conf;
    std::vector<int> correct;
    for (const auto& p : pts) {
        conf.push_back(p.conf);
        correct.push_back(p.correct);
    }
    const auto d = fixture::simple(conf, correct, {}, groups);
    const auto scheme = BinningScheme::equal_width(5);
    const auto lore = fit_lore(d, {KernelFamily::GroupIndicator, 1.0, 0}, scheme);
    const auto ghb = fit_groupwise_hb(d, scheme);
    const std::vector<double> none;
    for (double c : uniform(rng, 50)) {
        for (const char* g : {"g0", "g1", "g2"}) {
            const auto a = apply_lore(lore, c, none, std::string(g));
            const auto b = apply_groupwise_hb(ghb, c, std::string(g));
            if (!b.fallback) {
                CHECK(a.conf == doctest::Approx(b.conf).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("isotonic fits are non-decreasing") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 20; ++t) {
        const auto pts = oracle::random_points(rng, 5 + rng() % 100, 1);
        std::vector<double> conf;
        std::vector<int> correct;
        for (const auto& p : pts) {
            conf.push_back(p.conf);
            correct.push_back(p.correct);
        }
        const auto ir = fit_ir(fixture::simple(conf, correct));
        double last = -1;
        for (int i = 0; i <= 100; ++i) {
            const double v = apply_ir(ir, i / 100.0);
            CHECK(v >= last);
            CHECK(v <= 1.0);
            last = v;
        }
    }
}

TEST_CASE("temperature scaling keeps the predicted class") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 50; ++t) {
        auto p = uniform(rng, 5);
        double s = 0;
        for (double v : p) {
            s += v;
        }
        for (auto& v : p) {
            v /= s;
        }
        for (double temp : {0.05, 0.5, 2.0, 20.0}) {
            const auto q = apply_ts(TsState{temp}, p);
            CHECK(argmax(q) == argmax(p));
        }
    }
}

TEST_CASE("results do not depend on the thread count") {
    std::mt19937_64 rng(9);
    const auto pts = oracle::random_points(rng, 500, 3);
    const auto d = fixture::from_points(pts);
    const auto scheme = BinningScheme::equal_width(15);
    const KernelSpec k{KernelFamily::Laplacian, 0.2, 3};
    const auto a = mlce(d, k, scheme, 1);
    const auto b = mlce(d, k, scheme, 7);
    CHECK(a.lce == b.lce);
    CHECK(a.mlce == b.mlce);
    CHECK(a.mean == b.mean);
    const auto s = fit_lore(d, k, scheme);
    const auto r1 = recalibrate_dataset(s, d, 1);
    const auto r2 = recalibrate_dataset(s, d, 5);
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(r1.data.records[i].conf == r2.data.records[i].conf);
    }
}
