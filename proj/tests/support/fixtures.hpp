#pragma once

#include <string>
#include <vector>

#include "calib/dataset.hpp"
#include "oracles.hpp"

namespace fixture {

// Dataset over binary correctness: y_pred = 0, y_true = 0 exactly when correct.
inline calib::Dataset from_points(const std::vector<oracle::Point>& pts) {
    std::vector<calib::PredictionRecord> records;
    const std::size_t d = pts.empty() ? 0 : pts.front().x.size();
    calib::FeatureMatrix f(pts.size(), d);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        calib::PredictionRecord r;
        r.id = "r" + std::to_string(i);
        r.y_pred = 0;
        r.y_true = pts[i].correct ? 0 : 1;
        r.conf = pts[i].conf;
        records.push_back(r);
        for (std::size_t j = 0; j < d; ++j) {
            f(i, j) = pts[i].x[j];
        }
    }
    return calib::make_dataset(std::move(records), std::move(f), 2);
}

inline calib::Dataset simple(const std::vector<double>& conf, const std::vector<int>& correct,
                             const std::vector<std::vector<double>>& feats = {},
                             const std::vector<std::string>& groups = {}) {
    std::vector<oracle::Point> pts(conf.size());
    for (std::size_t i = 0; i < conf.size(); ++i) {
        pts[i].conf = conf[i];
        pts[i].correct = correct[i] != 0;
        pts[i].x = feats.empty() ? std::vector<double>{0.0} : feats[i];
    }
    auto d = from_points(pts);
    for (std::size_t i = 0; i < groups.size(); ++i) {
        if (!groups[i].empty()) {
            d.records[i].group = groups[i];
        }
    }
    return d;
}

}  // namespace fixture
