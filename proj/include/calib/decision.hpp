#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "calib/dataset.hpp"

namespace calib {

// Costs of the predict-or-abstain policy: abstaining ("unsure") costs u, a wrong
// prediction costs w, a correct one costs nothing. Requires w > u > 0.
struct CostSpec {
    double u = 1.0;
    double w = 10.0;

    void validate() const;
    // Abstain strictly below this confidence.
    double threshold() const { return 1.0 - u / w; }
};

struct PolicyOutcome {
    double total_cost = 0.0;
    std::size_t n_unsure = 0;
    std::size_t n_wrong = 0;
    std::size_t n_correct = 0;
};

PolicyOutcome run_policy(std::span<const PredictionRecord> records, const CostSpec& cost);
inline PolicyOutcome run_policy(const Dataset& d, const CostSpec& cost) { return run_policy(d.records, cost); }

// Errors among the retained predictions after rejecting the r least confident,
// for r = 0..N, together with the trapezoid areas under the model, random and
// oracle curves over the rejection fraction.
struct RejectionCurve {
    std::vector<std::size_t> model_errors;
    std::vector<double> random_errors;
    std::vector<std::size_t> oracle_errors;
    double area_model = 0.0;
    double area_random = 0.0;
    double area_oracle = 0.0;
};

// Ascending confidence order, ties broken by record order.
RejectionCurve rejection_curve(std::span<const PredictionRecord> records);

// Prediction rejection area ratio: (A_random - A_model) / (A_random - A_oracle).
// 1 for an oracle ranking, 0 for random, negative when worse than random.
double prr(std::span<const PredictionRecord> records);
inline double prr(const Dataset& d) { return prr(d.records); }

struct CostSweepRow {
    double ratio = 0.0;
    double cost_orig = 0.0;
    double cost_recal = 0.0;
    double improvement = 0.0;  // cost_orig - cost_recal; positive is better
};

// One row per w/u ratio with w = ratio * u. `recal` is matched to `orig` by id.
std::vector<CostSweepRow> cost_sweep(const Dataset& orig, const Dataset& recal, std::span<const double> ratios,
                                     double u = 1.0);

std::string format_cost_sweep(const std::vector<CostSweepRow>& rows);

}  // namespace calib
