#include "calib/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "calib/error.hpp"
#include "calib/parallel.hpp"
#include "calib/text.hpp"

namespace calib {

namespace {

constexpr double kProbFloor = 1e-12;

std::vector<double> confidences(const Dataset& d) {
    std::vector<double> out;
    out.reserve(d.size());
    for (const auto& r : d.records) {
        out.push_back(r.conf);
    }
    return out;
}

std::vector<double> residuals(const Dataset& d) {
    std::vector<double> out;
    out.reserve(d.size());
    for (const auto& r : d.records) {
        out.push_back(r.conf - (r.correct() ? 1.0 : 0.0));
    }
    return out;
}

}  // namespace

BinStats bin_stats(std::span<const PredictionRecord> records, const BinningScheme& scheme) {
    BinStats s;
    s.bins.resize(scheme.size());
    s.total = records.size();
    std::vector<double> conf_sum(scheme.size(), 0.0);
    std::vector<double> hits(scheme.size(), 0.0);
    for (const auto& r : records) {
        const auto b = scheme.bin_index(r.conf);
        ++s.bins[b].count;
        conf_sum[b] += r.conf;
        hits[b] += r.correct() ? 1.0 : 0.0;
    }
    for (std::size_t b = 0; b < s.bins.size(); ++b) {
        if (s.bins[b].count > 0) {
            const auto c = static_cast<double>(s.bins[b].count);
            s.bins[b].mean_conf = conf_sum[b] / c;
            s.bins[b].accuracy = hits[b] / c;
        }
    }
    return s;
}

double ece(std::span<const PredictionRecord> records, const BinningScheme& scheme) {
    if (records.empty()) {
        throw ArgumentError("ECE of an empty dataset is undefined");
    }
    const auto s = bin_stats(records, scheme);
    double total = 0.0;
    for (const auto& b : s.bins) {
        if (b.count > 0) {
            total += static_cast<double>(b.count) / static_cast<double>(s.total) * std::abs(b.gap());
        }
    }
    return total;
}

double mce(std::span<const PredictionRecord> records, const BinningScheme& scheme) {
    if (records.empty()) {
        throw ArgumentError("MCE of an empty dataset is undefined");
    }
    const auto s = bin_stats(records, scheme);
    double worst = 0.0;
    for (const auto& b : s.bins) {
        if (b.count > 0) {
            worst = std::max(worst, std::abs(b.gap()));
        }
    }
    return worst;
}

NllResult nll(const Dataset& d) {
    if (d.empty()) {
        throw ArgumentError("NLL of an empty dataset is undefined");
    }
    NllResult out;
    double total = 0.0;
    const auto clamp = [&](double p) {
        if (p < kProbFloor) {
            ++out.clamped;
            return kProbFloor;
        }
        return p;
    };
    for (const auto& r : d.records) {
        const double p = r.has_probs() ? r.probs[static_cast<std::size_t>(r.y_true)]
                                       : (r.correct() ? r.conf : 1.0 - r.conf);
        total -= std::log(clamp(p));
    }
    out.value = total / static_cast<double>(d.size());
    return out;
}

double brier(const Dataset& d) {
    if (d.empty()) {
        throw ArgumentError("Brier score of an empty dataset is undefined");
    }
    double total = 0.0;
    for (const auto& r : d.records) {
        if (r.has_probs()) {
            for (std::size_t c = 0; c < r.probs.size(); ++c) {
                const double target = static_cast<int>(c) == r.y_true ? 1.0 : 0.0;
                total += (r.probs[c] - target) * (r.probs[c] - target);
            }
        } else {
            const double gap = r.conf - (r.correct() ? 1.0 : 0.0);
            total += gap * gap;
        }
    }
    return total / static_cast<double>(d.size());
}

LocalCalibration::LocalCalibration(const Dataset& d, const KernelSpec& spec, const BinningScheme& scheme)
    : data_(&d),
      groups_(d.records),
      bin_of_([&] {
          std::vector<std::size_t> bins;
          bins.reserve(d.size());
          for (const auto& r : d.records) {
              bins.push_back(scheme.bin_index(r.conf));
          }
          return bins;
      }()),
      smoother_(spec, scheme, d.features, confidences(d), groups_.reference_codes(), residuals(d)) {}

double LocalCalibration::slce_at(std::size_t i) const {
    if (i >= data_->size()) {
        throw ArgumentError("query index out of range");
    }
    thread_local std::vector<double> scratch;
    BinnedKernelSmoother::Query q;
    if (smoother_.kernel().uses_features()) {
        q.features = data_->features.row(i);
    }
    q.group = groups_.reference_codes()[i];
    q.bin = bin_of_[i];
    q.self = i;
    // The record itself is in its bin with weight 1, so a value always exists.
    return smoother_.weighted_mean(q, scratch).value();
}

double LocalCalibration::lce_at(std::size_t i) const { return std::abs(slce_at(i)); }

double lce_at(const Dataset& d, std::size_t i, const KernelSpec& spec, const BinningScheme& scheme) {
    return LocalCalibration(d, spec, scheme).lce_at(i);
}

double slce_at(const Dataset& d, std::size_t i, const KernelSpec& spec, const BinningScheme& scheme) {
    return LocalCalibration(d, spec, scheme).slce_at(i);
}

LceReport mlce(const Dataset& d, const KernelSpec& spec, const BinningScheme& scheme, std::size_t threads) {
    if (d.empty()) {
        throw ArgumentError("MLCE of an empty dataset is undefined");
    }
    const LocalCalibration local(d, spec, scheme);
    LceReport report;
    report.kernel = local.kernel();
    report.scheme = scheme;
    report.slce.resize(d.size());
    report.lce.resize(d.size());
    parallel_for(d.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            report.slce[i] = local.slce_at(i);
            report.lce[i] = std::abs(report.slce[i]);
        }
    });
    double sum = 0.0;
    for (double v : report.lce) {
        report.mlce = std::max(report.mlce, v);
        sum += v;
    }
    report.mean = sum / static_cast<double>(d.size());
    return report;
}

GroupMceReport group_mce(const Dataset& d, const BinningScheme& scheme) {
    std::map<std::string, std::vector<PredictionRecord>> by_group;
    for (const auto& r : d.records) {
        if (r.group) {
            by_group[*r.group].push_back(r);
        }
    }
    if (by_group.empty()) {
        throw ArgumentError("no record carries a group label");
    }
    GroupMceReport out;
    for (const auto& [name, members] : by_group) {
        const double v = mce(members, scheme);
        out.per_group[name] = v;
        out.group_size[name] = members.size();
        if (out.worst_group.empty() || v > out.max) {
            out.max = v;
            out.worst_group = name;
        }
    }
    return out;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2) {
        throw ArgumentError("Pearson correlation needs two equal-length samples of size >= 2");
    }
    const auto n = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw UndefinedError("Pearson correlation is undefined for a zero-variance sample");
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<LandscapeRow> lce_landscape(const Dataset& d, const KernelSpec& spec, const BinningScheme& scheme,
                                        const FeatureMatrix& embed2d, std::size_t threads) {
    if (embed2d.d != 2) {
        throw ArgumentError("landscape embedding must have exactly 2 columns");
    }
    if (embed2d.n != d.size()) {
        throw AlignmentError("landscape embedding has " + std::to_string(embed2d.n) + " rows for " +
                             std::to_string(d.size()) + " records");
    }
    const auto report = mlce(d, spec, scheme, threads);
    std::vector<LandscapeRow> rows(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        rows[i] = LandscapeRow{d.records[i].id,      embed2d(i, 0),  embed2d(i, 1), d.records[i].conf,
                               scheme.bin_index(d.records[i].conf), report.lce[i], report.slce[i]};
    }
    return rows;
}

std::string format_landscape(const std::vector<LandscapeRow>& rows) {
    std::string out = "id,ex,ey,conf,bin,lce,slce\n";
    for (const auto& r : rows) {
        out += r.id + ',' + text::format_double(r.ex) + ',' + text::format_double(r.ey) + ',' +
               text::format_double(r.conf) + ',' + std::to_string(r.bin) + ',' + text::format_double(r.lce) + ',' +
               text::format_double(r.slce) + '\n';
    }
    return out;
}

}  // namespace calib
