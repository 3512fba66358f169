#include "calib/decision.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "calib/error.hpp"
#include "calib/text.hpp"

namespace calib {

void CostSpec::validate() const {
    if (!(u > 0.0) || !(w > u)) {
        throw ArgumentError("costs must satisfy w > u > 0");
    }
}

PolicyOutcome run_policy(std::span<const PredictionRecord> records, const CostSpec& cost) {
    cost.validate();
    const double threshold = cost.threshold();
    PolicyOutcome out;
    for (const auto& r : records) {
        if (r.conf < threshold) {
            ++out.n_unsure;
        } else if (r.correct()) {
            ++out.n_correct;
        } else {
            ++out.n_wrong;
        }
    }
    out.total_cost = cost.u * static_cast<double>(out.n_unsure) + cost.w * static_cast<double>(out.n_wrong);
    return out;
}

namespace {

template <class Curve>
double trapezoid(const Curve& errors, std::size_t n) {
    double area = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        area += 0.5 * (static_cast<double>(errors[r]) + static_cast<double>(errors[r + 1]));
    }
    return area / static_cast<double>(n);
}

}  // namespace

RejectionCurve rejection_curve(std::span<const PredictionRecord> records) {
    const std::size_t n = records.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return records[a].conf < records[b].conf; });

    RejectionCurve c;
    c.model_errors.assign(n + 1, 0);
    for (std::size_t r = n; r-- > 0;) {
        c.model_errors[r] = c.model_errors[r + 1] + (records[order[r]].correct() ? 0 : 1);
    }
    const std::size_t total = c.model_errors[0];
    c.random_errors.resize(n + 1);
    c.oracle_errors.resize(n + 1);
    for (std::size_t r = 0; r <= n; ++r) {
        c.random_errors[r] = static_cast<double>(total) * (1.0 - static_cast<double>(r) / static_cast<double>(n));
        c.oracle_errors[r] = total > r ? total - r : 0;
    }
    if (n > 0) {
        c.area_model = trapezoid(c.model_errors, n);
        c.area_random = trapezoid(c.random_errors, n);
        c.area_oracle = trapezoid(c.oracle_errors, n);
    }
    return c;
}

double prr(std::span<const PredictionRecord> records) {
    if (records.size() < 2) {
        throw UndefinedError("PRR needs at least two predictions");
    }
    const auto c = rejection_curve(records);
    if (c.model_errors[0] == 0) {
        throw UndefinedError("PRR is undefined without any prediction errors");
    }
    const double denom = c.area_random - c.area_oracle;
    if (!(denom > 0.0)) {
        throw UndefinedError("PRR is undefined when every prediction is wrong");
    }
    return (c.area_random - c.area_model) / denom;
}

std::vector<CostSweepRow> cost_sweep(const Dataset& orig, const Dataset& recal, std::span<const double> ratios,
                                     double u) {
    if (orig.size() != recal.size()) {
        throw ArgumentError("cost sweep inputs have different sizes");
    }
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < recal.size(); ++i) {
        index.emplace(recal.records[i].id, i);
    }
    std::vector<PredictionRecord> aligned;
    aligned.reserve(orig.size());
    for (const auto& r : orig.records) {
        auto it = index.find(r.id);
        if (it == index.end()) {
            throw ArgumentError("record '" + r.id + "' is missing from the recalibrated predictions");
        }
        aligned.push_back(recal.records[it->second]);
    }
    std::vector<CostSweepRow> rows;
    for (double ratio : ratios) {
        const CostSpec cost{u, ratio * u};
        CostSweepRow row;
        row.ratio = ratio;
        row.cost_orig = run_policy(orig.records, cost).total_cost;
        row.cost_recal = run_policy(aligned, cost).total_cost;
        row.improvement = row.cost_orig - row.cost_recal;
        rows.push_back(row);
    }
    return rows;
}

std::string format_cost_sweep(const std::vector<CostSweepRow>& rows) {
    std::string out = "ratio,cost_orig,cost_recal,improvement\n";
    for (const auto& r : rows) {
        out += text::format_double(r.ratio) + ',' + text::format_double(r.cost_orig) + ',' +
               text::format_double(r.cost_recal) + ',' + text::format_double(r.improvement) + '\n';
    }
    return out;
}

}  // namespace calib
