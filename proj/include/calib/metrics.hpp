#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "calib/binning.hpp"
#include "calib/dataset.hpp"
#include "calib/kernel.hpp"
#include "calib/smoother.hpp"

namespace calib {

struct BinCell {
    std::size_t count = 0;
    double mean_conf = 0.0;
    double accuracy = 0.0;

    double gap() const { return mean_conf - accuracy; }
};

struct BinStats {
    std::vector<BinCell> bins;
    std::size_t total = 0;
};

BinStats bin_stats(std::span<const PredictionRecord> records, const BinningScheme& scheme);
inline BinStats bin_stats(const Dataset& d, const BinningScheme& scheme) { return bin_stats(d.records, scheme); }

// Expected calibration error; empty bins are skipped.
double ece(std::span<const PredictionRecord> records, const BinningScheme& scheme);
inline double ece(const Dataset& d, const BinningScheme& scheme) { return ece(d.records, scheme); }

// Maximum calibration error over non-empty bins.
double mce(std::span<const PredictionRecord> records, const BinningScheme& scheme);
inline double mce(const Dataset& d, const BinningScheme& scheme) { return mce(d.records, scheme); }

// Negative log-likelihood of the true label. Records without a probability
// vector contribute the binary log-loss of (conf, correct). Probabilities below
// 1e-12 are clamped and counted.
struct NllResult {
    double value = 0.0;
    std::size_t clamped = 0;
};
NllResult nll(const Dataset& d);

// Squared distance to the one-hot label; binary (conf - correct)^2 without probs.
double brier(const Dataset& d);

// Local calibration error over a dataset: per-record kernel-weighted
// confidence/accuracy gap within the record's confidence bin, with the record
// itself included in the sums.
class LocalCalibration {
public:
    LocalCalibration(const Dataset& d, const KernelSpec& spec, const BinningScheme& scheme);

    // Signed error in [-1, 1]; positive means over-confident.
    double slce_at(std::size_t i) const;
    double lce_at(std::size_t i) const;

    const KernelSpec& kernel() const { return smoother_.kernel(); }

private:
    const Dataset* data_;
    GroupCodes groups_;
    std::vector<std::size_t> bin_of_;
    BinnedKernelSmoother smoother_;
};

double lce_at(const Dataset& d, std::size_t i, const KernelSpec& spec, const BinningScheme& scheme);
double slce_at(const Dataset& d, std::size_t i, const KernelSpec& spec, const BinningScheme& scheme);

struct LceReport {
    std::vector<double> lce;   // aligned to record order
    std::vector<double> slce;
    double mlce = 0.0;         // max of lce
    double mean = 0.0;
    KernelSpec kernel;
    BinningScheme scheme;
};

// Per-record LCE for every record plus max/mean summary. Queries run in
// parallel; results do not depend on `threads`.
LceReport mlce(const Dataset& d, const KernelSpec& spec, const BinningScheme& scheme, std::size_t threads = 1);

struct GroupMceReport {
    std::map<std::string, double> per_group;
    std::map<std::string, std::size_t> group_size;
    double max = 0.0;
    std::string worst_group;
};

// MCE within each labeled group; unlabeled records are ignored.
GroupMceReport group_mce(const Dataset& d, const BinningScheme& scheme);

// Sample Pearson correlation.
double pearson(std::span<const double> xs, std::span<const double> ys);

struct LandscapeRow {
    std::string id;
    double ex = 0.0;
    double ey = 0.0;
    double conf = 0.0;
    std::size_t bin = 0;
    double lce = 0.0;
    double slce = 0.0;
};

// Per-record LCE alongside a 2-D embedding, for plotting outside the tool.
std::vector<LandscapeRow> lce_landscape(const Dataset& d, const KernelSpec& spec, const BinningScheme& scheme,
                                        const FeatureMatrix& embed2d, std::size_t threads = 1);

std::string format_landscape(const std::vector<LandscapeRow>& rows);

}  // namespace calib
