#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "calib/binning.hpp"
#include "calib/dataset.hpp"
#include "calib/kernel.hpp"
#include "calib/smoother.hpp"

namespace calib {

// A recalibrated confidence. `fallback` is set when the method had no data for
// the query (empty bin, unseen group) and answered with a global estimate.
struct Recalibrated {
    double conf = 0.0;
    bool fallback = false;
};

// -- local recalibration -----------------------------------------------------

// The recalibration set itself: LoRe does no fitting beyond storing it.
// Reference features are stored after the optional PCA projection.
struct LoReState {
    KernelSpec kernel;
    BinningScheme scheme;
    std::vector<double> ref_conf;
    std::vector<std::uint8_t> ref_correct;
    FeatureMatrix ref_features;
    std::vector<std::optional<std::string>> ref_groups;
    std::optional<PcaTransform> pca;
    double global_accuracy = 0.0;

    bool operator==(const LoReState&) const = default;
};

// `pca_dim`, when set, fits a PCA on the recalibration features and applies it
// to both references and later queries.
LoReState fit_lore(const Dataset& recal, const KernelSpec& spec, const BinningScheme& scheme,
                   std::optional<std::size_t> pca_dim = std::nullopt);

// Ready-to-query form of a LoReState: kernel-weighted accuracy of the
// references sharing the query's confidence bin.
class LoReModel {
public:
    explicit LoReModel(const LoReState& state);

    // `features` are raw (pre-PCA) query features; ignored under the group kernel.
    Recalibrated apply(double conf, std::span<const double> features,
                       const std::optional<std::string>& group = std::nullopt) const;

private:
    const LoReState* state_;
    GroupCodes groups_;
    BinnedKernelSmoother smoother_;
};

Recalibrated apply_lore(const LoReState& state, double conf, std::span<const double> features,
                        const std::optional<std::string>& group = std::nullopt);

// -- histogram binning -------------------------------------------------------

struct HbState {
    BinningScheme scheme;
    std::vector<double> accuracy;    // per bin; 0 for empty bins
    std::vector<std::size_t> count;  // 0 marks an empty bin
    double global_accuracy = 0.0;

    bool operator==(const HbState&) const = default;
};

HbState fit_hb(std::span<const PredictionRecord> recal, const BinningScheme& scheme);
inline HbState fit_hb(const Dataset& recal, const BinningScheme& scheme) { return fit_hb(recal.records, scheme); }
Recalibrated apply_hb(const HbState& state, double conf);

// -- temperature scaling -----------------------------------------------------

struct TsState {
    double temperature = 1.0;

    bool operator==(const TsState&) const = default;
};

inline constexpr double kMinTemperature = 0.05;
inline constexpr double kMaxTemperature = 20.0;

// softmax(logits / T)
std::vector<double> softmax_with_temperature(std::span<const double> logits, double temperature);

// Mean NLL of softmax(log p / T) on the records' probability vectors.
double temperature_nll(std::span<const PredictionRecord> records, double temperature);

// Golden-section search for the NLL-minimizing temperature on [0.05, 20].
// Every record must carry a probability vector.
TsState fit_ts(std::span<const PredictionRecord> recal);
inline TsState fit_ts(const Dataset& recal) { return fit_ts(recal.records); }
std::vector<double> apply_ts(const TsState& state, std::span<const double> probs);

// -- isotonic regression -----------------------------------------------------

// Non-decreasing step function: value v[i] on [x[i], x[i+1]); flat outside.
struct IrState {
    std::vector<double> x;
    std::vector<double> v;

    bool operator==(const IrState&) const = default;
};

// Pool-adjacent-violators on (conf, correct) sorted by confidence.
IrState fit_ir(std::span<const PredictionRecord> recal);
inline IrState fit_ir(const Dataset& recal) { return fit_ir(recal.records); }
double apply_ir(const IrState& state, double conf);

// -- group-wise wrappers -----------------------------------------------------

struct GroupwiseHbState {
    std::map<std::string, HbState> groups;
    HbState global;

    bool operator==(const GroupwiseHbState&) const = default;
};

struct GroupwiseTsState {
    std::map<std::string, TsState> groups;
    TsState global;

    bool operator==(const GroupwiseTsState&) const = default;
};

GroupwiseHbState fit_groupwise_hb(const Dataset& recal, const BinningScheme& scheme);
GroupwiseTsState fit_groupwise_ts(const Dataset& recal);

// Dispatches on the query's group; unlabeled or unseen groups use the global fit
// and are flagged.
Recalibrated apply_groupwise_hb(const GroupwiseHbState& state, double conf, const std::optional<std::string>& group);

struct RecalibratedProbs {
    std::vector<double> probs;
    bool fallback = false;
};
RecalibratedProbs apply_groupwise_ts(const GroupwiseTsState& state, std::span<const double> probs,
                                     const std::optional<std::string>& group);

// -- whole-dataset application ----------------------------------------------

using RecalibratorState =
    std::variant<LoReState, HbState, TsState, IrState, GroupwiseHbState, GroupwiseTsState>;

// "lore", "hb", "ts", "ir", "group-hb", "group-ts"
std::string method_tag(const RecalibratorState& state);

struct RecalibrationResult {
    Dataset data;
    std::vector<std::uint8_t> fallback;  // per record
    std::size_t fallback_count = 0;
};

// Replaces confidences record by record; labels, ids, groups, features and
// order are kept. Temperature scaling rewrites the probability vectors too;
// the other methods only produce a top-label confidence, so probability vectors
// are dropped from their output.
RecalibrationResult recalibrate_dataset(const RecalibratorState& state, const Dataset& eval,
                                        std::size_t threads = 1);

}  // namespace calib
