#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "calib/error.hpp"
#include "calib/kernel.hpp"

namespace calib {

void PcaTransform::project(std::span<const double> x, std::span<double> out) const {
    const std::size_t dim = mean.size();
    if (x.size() != dim || out.size() != k) {
        throw ArgumentError("PCA input dimension does not match the fitted transform");
    }
    for (std::size_t c = 0; c < k; ++c) {
        const double* w = components.data() + c * dim;
        double acc = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            acc += w[j] * (x[j] - mean[j]);
        }
        out[c] = acc;
    }
}

PcaTransform fit_pca(const FeatureMatrix& features, std::size_t k) {
    const std::size_t n = features.n;
    const std::size_t dim = features.d;
    if (n < 2) {
        throw ArgumentError("PCA needs at least two rows");
    }
    if (k == 0 || k > std::min(n, dim)) {
        throw ArgumentError("PCA target dimension " + std::to_string(k) + " must lie in [1, min(n, D)]");
    }

    using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::Map<const RowMatrix> x(features.values.data(), static_cast<Eigen::Index>(n),
                                        static_cast<Eigen::Index>(dim));
    const Eigen::RowVectorXd mu = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - mu;
    const Eigen::MatrixXd cov = (centered.adjoint() * centered) / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) {
        throw Error("covariance eigendecomposition failed");
    }
    // Eigen returns ascending eigenvalues; walk them from the top. Stable order
    // keeps equal-variance directions in a reproducible sequence.
    std::vector<Eigen::Index> order(dim);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return eig.eigenvalues()(a) > eig.eigenvalues()(b);
    });

    PcaTransform t;
    t.k = k;
    t.mean.assign(mu.data(), mu.data() + dim);
    t.components.resize(k * dim);
    t.variances.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        Eigen::VectorXd v = eig.eigenvectors().col(order[c]);
        Eigen::Index pivot = 0;
        for (Eigen::Index j = 1; j < v.size(); ++j) {
            if (std::abs(v(j)) > std::abs(v(pivot))) {
                pivot = j;
            }
        }
        if (v(pivot) < 0.0) {
            v = -v;
        }
        std::copy(v.data(), v.data() + dim, t.components.begin() + static_cast<std::ptrdiff_t>(c * dim));
        t.variances[c] = std::max(0.0, eig.eigenvalues()(order[c]));
    }
    return t;
}

FeatureMatrix apply_pca(const PcaTransform& t, const FeatureMatrix& features) {
    if (features.d != t.input_dim()) {
        throw ArgumentError("feature dimension " + std::to_string(features.d) + " does not match PCA input " +
                            std::to_string(t.input_dim()));
    }
    FeatureMatrix out(features.n, t.k);
    for (std::size_t i = 0; i < features.n; ++i) {
        t.project(features.row(i), out.row(i));
    }
    return out;
}

}  // namespace calib
