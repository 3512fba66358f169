#pragma once

// Independent reference implementations used only by tests. They follow the
// textbook formulas with plain loops and share no code with the library.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

struct Point {
    std::vector<double> x;
    double conf = 0.0;
    bool correct = false;
};

// Equal-width bin membership by direct comparison against i/K.
inline bool in_bin(double c, std::size_t i, std::size_t k) {
    const double lo = static_cast<double>(i) / static_cast<double>(k);
    const double hi = static_cast<double>(i + 1) / static_cast<double>(k);
    if (i + 1 == k) {
        return c >= lo && c <= 1.0;
    }
    return c >= lo && c < hi;
}

inline std::size_t bin_of(double c, std::size_t k) {
    for (std::size_t i = 0; i < k; ++i) {
        if (in_bin(c, i, k)) {
            return i;
        }
    }
    return k;  // unreachable for c in [0,1]
}

inline double laplacian(const std::vector<double>& a, const std::vector<double>& b, double gamma) {
    double dist = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        dist += std::fabs(a[j] - b[j]);
    }
    return std::exp(-dist / (static_cast<double>(a.size()) * gamma));
}

// sum_i |B_i|/N |conf(B_i) - acc(B_i)|
inline double ece(const std::vector<Point>& pts, std::size_t k) {
    double total = 0.0;
    for (std::size_t b = 0; b < k; ++b) {
        double n = 0, c = 0, a = 0;
        for (const auto& p : pts) {
            if (in_bin(p.conf, b, k)) {
                n += 1;
                c += p.conf;
                a += p.correct ? 1 : 0;
            }
        }
        if (n > 0) {
            total += n / static_cast<double>(pts.size()) * std::fabs(c / n - a / n);
        }
    }
    return total;
}

inline double mce(const std::vector<Point>& pts, std::size_t k) {
    double worst = 0.0;
    for (std::size_t b = 0; b < k; ++b) {
        double n = 0, c = 0, a = 0;
        for (const auto& p : pts) {
            if (in_bin(p.conf, b, k)) {
                n += 1;
                c += p.conf;
                a += p.correct ? 1 : 0;
            }
        }
        if (n > 0) {
            worst = std::fmax(worst, std::fabs(c / n - a / n));
        }
    }
    return worst;
}

// Signed kernel-weighted gap at point i over every point sharing i's bin (i included).
inline double slce(const std::vector<Point>& pts, std::size_t i, double gamma, std::size_t k) {
    double num = 0.0;
    double den = 0.0;
    const auto bi = bin_of(pts[i].conf, k);
    for (const auto& p : pts) {
        if (bin_of(p.conf, k) != bi) {
            continue;
        }
        const double w = laplacian(pts[i].x, p.x, gamma);
        num += (p.conf - (p.correct ? 1.0 : 0.0)) * w;
        den += w;
    }
    return num / den;
}

inline double lce(const std::vector<Point>& pts, std::size_t i, double gamma, std::size_t k) {
    return std::fabs(slce(pts, i, gamma, k));
}

// Kernel-weighted accuracy of the references in the query's bin; returns -1 when
// the bin is empty.
inline double lore(const std::vector<Point>& refs, const Point& query, double gamma, std::size_t k) {
    double num = 0.0;
    double den = 0.0;
    const auto bq = bin_of(query.conf, k);
    for (const auto& p : refs) {
        if (bin_of(p.conf, k) != bq) {
            continue;
        }
        const double w = laplacian(query.x, p.x, gamma);
        num += (p.correct ? 1.0 : 0.0) * w;
        den += w;
    }
    return den > 0.0 ? num / den : -1.0;
}

// Rejection-curve PRR by enumerating every rejection count r = 0..N directly.
inline double prr(const std::vector<double>& conf, const std::vector<bool>& correct) {
    const std::size_t n = conf.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = i;
    }
    // insertion sort: ascending confidence, ties keep input order
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = i; j > 0 && conf[order[j - 1]] > conf[order[j]]; --j) {
            std::swap(order[j - 1], order[j]);
        }
    }
    std::vector<double> model(n + 1), rnd(n + 1), best(n + 1);
    double errors = 0;
    for (std::size_t i = 0; i < n; ++i) {
        errors += correct[i] ? 0 : 1;
    }
    for (std::size_t r = 0; r <= n; ++r) {
        double e = 0;
        for (std::size_t p = r; p < n; ++p) {
            e += correct[order[p]] ? 0 : 1;
        }
        model[r] = e;
        rnd[r] = errors * (1.0 - static_cast<double>(r) / static_cast<double>(n));
        best[r] = std::fmax(errors - static_cast<double>(r), 0.0);
    }
    auto area = [&](const std::vector<double>& y) {
        double s = 0;
        for (std::size_t r = 0; r < n; ++r) {
            s += (y[r] + y[r + 1]) / 2.0 / static_cast<double>(n);
        }
        return s;
    };
    return (area(rnd) - area(model)) / (area(rnd) - area(best));
}

// Random small instance: n points in [0,1]^d with uniform confidences.
inline std::vector<Point> random_points(std::mt19937_64& rng, std::size_t n, std::size_t d) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Point> pts(n);
    for (auto& p : pts) {
        p.x.resize(d);
        for (auto& v : p.x) {
            v = unit(rng);
        }
        p.conf = unit(rng);
        p.correct = unit(rng) < 0.6;
    }
    return pts;
}

}  // namespace oracle
