#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace calib {

enum class BinKind { EqualWidth, EqualMass };

std::string to_string(BinKind kind);
BinKind parse_bin_kind(const std::string& s);

// Partition of [0,1] into half-open bins [e_i, e_{i+1}), the last bin closed at 1.
class BinningScheme {
public:
    BinningScheme() : BinningScheme(BinKind::EqualWidth, {0.0, 1.0}) {}

    // Builds from explicit edges (used by persistence); edges must start at 0,
    // end at 1, and be strictly ascending.
    BinningScheme(BinKind kind, std::vector<double> edges);

    static BinningScheme equal_width(std::size_t k);

    // Interior edges at the j/k quantiles of `confs` (linear interpolation between
    // order statistics). Coinciding quantiles merge their bins, so the effective
    // bin count can be smaller than k.
    static BinningScheme equal_mass(std::size_t k, std::span<const double> confs);

    std::size_t bin_index(double conf) const;
    std::size_t size() const { return edges_.size() - 1; }
    BinKind kind() const { return kind_; }
    const std::vector<double>& edges() const { return edges_; }

    bool operator==(const BinningScheme&) const = default;

private:
    BinKind kind_;
    std::vector<double> edges_;
};

}  // namespace calib
