#include "calib/binning.hpp"

#include <algorithm>
#include <cmath>

#include "calib/error.hpp"
#include "calib/text.hpp"

namespace calib {

std::string to_string(BinKind kind) { return kind == BinKind::EqualWidth ? "equal-width" : "equal-mass"; }

BinKind parse_bin_kind(const std::string& s) {
    if (s == "equal-width") {
        return BinKind::EqualWidth;
    }
    if (s == "equal-mass") {
        return BinKind::EqualMass;
    }
    throw ArgumentError("unknown bin kind '" + s + "'");
}

BinningScheme::BinningScheme(BinKind kind, std::vector<double> edges) : kind_(kind), edges_(std::move(edges)) {
    if (edges_.size() < 2 || edges_.front() != 0.0 || edges_.back() != 1.0) {
        throw ArgumentError("bin edges must run from 0 to 1");
    }
    for (std::size_t i = 1; i < edges_.size(); ++i) {
        if (!(edges_[i] > edges_[i - 1])) {
            throw ArgumentError("bin edges must be strictly ascending");
        }
    }
}

BinningScheme BinningScheme::equal_width(std::size_t k) {
    if (k == 0) {
        throw ArgumentError("bin count must be at least 1");
    }
    std::vector<double> edges(k + 1);
    for (std::size_t i = 0; i <= k; ++i) {
        edges[i] = static_cast<double>(i) / static_cast<double>(k);
    }
    edges.back() = 1.0;
    return BinningScheme(BinKind::EqualWidth, std::move(edges));
}

BinningScheme BinningScheme::equal_mass(std::size_t k, std::span<const double> confs) {
    if (k == 0) {
        throw ArgumentError("bin count must be at least 1");
    }
    if (confs.empty()) {
        throw ArgumentError("equal-mass binning needs at least one confidence");
    }
    std::vector<double> sorted(confs.begin(), confs.end());
    std::sort(sorted.begin(), sorted.end());
    const auto quantile = [&](double q) {
        const double h = q * static_cast<double>(sorted.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const auto hi = std::min(lo + 1, sorted.size() - 1);
        return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    };

    // The 0- and 1-quantiles take part in de-duplication so that fully degenerate
    // data collapses to a single bin; they are then stretched to 0 and 1.
    std::vector<double> cuts;
    for (std::size_t j = 0; j <= k; ++j) {
        const double q = quantile(static_cast<double>(j) / static_cast<double>(k));
        if (cuts.empty() || q > cuts.back()) {
            cuts.push_back(q);
        }
    }
    std::vector<double> edges{0.0};
    for (std::size_t i = 1; i + 1 < cuts.size(); ++i) {
        if (cuts[i] > 0.0 && cuts[i] < 1.0) {
            edges.push_back(cuts[i]);
        }
    }
    edges.push_back(1.0);
    return BinningScheme(BinKind::EqualMass, std::move(edges));
}

std::size_t BinningScheme::bin_index(double conf) const {
    if (!(conf >= 0.0 && conf <= 1.0)) {
        throw ArgumentError("confidence " + text::format_double(conf) + " outside [0,1]");
    }
    const auto it = std::upper_bound(edges_.begin(), edges_.end(), conf);
    const auto idx = static_cast<std::size_t>(it - edges_.begin());
    return std::min(idx == 0 ? 0 : idx - 1, size() - 1);
}

}  // namespace calib
