#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "calib/binning.hpp"
#include "calib/dataset.hpp"
#include "calib/kernel.hpp"

namespace calib {

// Dense integer codes for group labels; -1 means "no group".
class GroupCodes {
public:
    GroupCodes() = default;
    explicit GroupCodes(const std::vector<PredictionRecord>& records);

    int code(const std::optional<std::string>& group) const;
    const std::vector<int>& reference_codes() const { return codes_; }

private:
    std::unordered_map<std::string, int> index_;
    std::vector<int> codes_;
};

// Returns `spec` with its dimension filled in from the feature width, or throws
// when an explicit dimension disagrees.
KernelSpec resolve_kernel(KernelSpec spec, std::size_t feature_dim);

// Reference points grouped by confidence bin. Answers, for a query point and
// bin, the kernel-weighted mean of a per-reference value over the references in
// that bin:
//
//     sum_j k(q, x_j) v_j / sum_j k(q, x_j),   j ranging over the bin
//
// This is the shared core of the local calibration error (v = conf - correct)
// and of local recalibration (v = correct). Weights are evaluated relative to
// the largest weight in the bin, which leaves the ratio unchanged and keeps it
// finite for vanishing bandwidths. Summation runs in reference order.
class BinnedKernelSmoother {
public:
    struct Query {
        std::span<const double> features;
        int group = -1;
        std::size_t bin = 0;
        // Reference index of the query itself when it belongs to the reference
        // set; under the group kernel it always receives weight 1.
        std::optional<std::size_t> self;
    };

    BinnedKernelSmoother(const KernelSpec& spec, const BinningScheme& scheme, const FeatureMatrix& features,
                         std::span<const double> confs, std::vector<int> group_codes,
                         std::span<const double> values);

    // nullopt when the bin has no reference with positive weight.
    std::optional<double> weighted_mean(const Query& q, std::vector<double>& scratch) const;

    const KernelSpec& kernel() const { return spec_; }
    const BinningScheme& scheme() const { return scheme_; }
    std::size_t bin_population(std::size_t bin) const { return bins_[bin].index.size(); }

private:
    struct Bin {
        std::vector<std::size_t> index;
        std::vector<double> features;  // members' rows, contiguous
        std::vector<double> values;
        std::vector<int> groups;
    };

    KernelSpec spec_;
    BinningScheme scheme_;
    std::vector<Bin> bins_;
};

}  // namespace calib
