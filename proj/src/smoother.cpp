#include "calib/smoother.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>
#include <vector>

#include "calib/error.hpp"
#include "calib/parallel.hpp"

namespace calib {

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t, std::size_t)>& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads <= 1) {
        if (n > 0) {
            fn(0, n);
        }
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(threads);
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) {
            break;
        }
        workers.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& w : workers) {
        w.join();
    }
}

GroupCodes::GroupCodes(const std::vector<PredictionRecord>& records) {
    codes_.reserve(records.size());
    for (const auto& r : records) {
        if (!r.group) {
            codes_.push_back(-1);
            continue;
        }
        auto [it, inserted] = index_.try_emplace(*r.group, static_cast<int>(index_.size()));
        codes_.push_back(it->second);
    }
}

int GroupCodes::code(const std::optional<std::string>& group) const {
    if (!group) {
        return -1;
    }
    auto it = index_.find(*group);
    return it == index_.end() ? -2 : it->second;
}

KernelSpec resolve_kernel(KernelSpec spec, std::size_t feature_dim) {
    if (spec.uses_features()) {
        if (spec.dim == 0) {
            spec.dim = feature_dim;
        } else if (spec.dim != feature_dim) {
            throw ArgumentError("kernel dimension " + std::to_string(spec.dim) + " does not match feature width " +
                                std::to_string(feature_dim));
        }
    }
    spec.validate();
    return spec;
}

BinnedKernelSmoother::BinnedKernelSmoother(const KernelSpec& spec, const BinningScheme& scheme,
                                           const FeatureMatrix& features, std::span<const double> confs,
                                           std::vector<int> group_codes, std::span<const double> values)
    : spec_(resolve_kernel(spec, features.d)), scheme_(scheme), bins_(scheme.size()) {
    const std::size_t n = confs.size();
    if (values.size() != n || (spec_.uses_features() && features.n != n) ||
        (!spec_.uses_features() && group_codes.size() != n)) {
        throw ArgumentError("reference arrays have inconsistent lengths");
    }
    for (std::size_t i = 0; i < n; ++i) {
        Bin& bin = bins_[scheme_.bin_index(confs[i])];
        bin.index.push_back(i);
        bin.values.push_back(values[i]);
        if (spec_.uses_features()) {
            const auto row = features.row(i);
            bin.features.insert(bin.features.end(), row.begin(), row.end());
        } else {
            bin.groups.push_back(group_codes[i]);
        }
    }
}

std::optional<double> BinnedKernelSmoother::weighted_mean(const Query& q, std::vector<double>& scratch) const {
    const Bin& bin = bins_.at(q.bin);
    const std::size_t m = bin.index.size();
    if (m == 0) {
        return std::nullopt;
    }

    if (!spec_.uses_features()) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const bool same = (q.group >= 0 && bin.groups[j] == q.group) || (q.self && bin.index[j] == *q.self);
            if (same) {
                num += bin.values[j];
                den += 1.0;
            }
        }
        if (den == 0.0) {
            return std::nullopt;
        }
        return num / den;
    }

    const std::size_t dim = spec_.dim;
    if (q.features.size() != dim) {
        throw ArgumentError("query feature dimension does not match the reference features");
    }
    scratch.resize(m);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
        const double e = log_kernel(spec_, q.features, std::span<const double>(bin.features.data() + j * dim, dim));
        scratch[j] = e;
        top = std::max(top, e);
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double w = std::exp(scratch[j] - top);
        num += w * bin.values[j];
        den += w;
    }
    return num / den;
}

}  // namespace calib
