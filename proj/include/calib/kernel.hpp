#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "calib/dataset.hpp"

namespace calib {

enum class KernelFamily { Laplacian, Gaussian, GroupIndicator };

std::string to_string(KernelFamily family);
KernelFamily parse_kernel_family(const std::string& s);

// Similarity on the feature space.
//   laplacian: exp(-|u-v|_1 / (dim * gamma))
//   gaussian:  exp(-|u-v|_2^2 / (dim * gamma^2))
//   group:     1 when both points carry the same group label, else 0
// `dim` is the normalizer in the exponent and must equal the feature width.
struct KernelSpec {
    KernelFamily family = KernelFamily::Laplacian;
    double gamma = 1.0;
    std::size_t dim = 0;

    bool uses_features() const { return family != KernelFamily::GroupIndicator; }
    void validate() const;

    bool operator==(const KernelSpec&) const = default;
};

// Value of the exponent, log k(u, v). Always <= 0.
double log_kernel(const KernelSpec& spec, std::span<const double> u, std::span<const double> v);

double eval_kernel(const KernelSpec& spec, std::span<const double> u, std::span<const double> v);

double eval_group_kernel(const std::optional<std::string>& a, const std::optional<std::string>& b);

// Principal-component projection x -> components * (x - mean).
struct PcaTransform {
    std::vector<double> mean;        // length D
    std::vector<double> components;  // k x D, row-major, orthonormal rows
    std::vector<double> variances;   // length k, descending
    std::size_t k = 0;

    std::size_t input_dim() const { return mean.size(); }
    std::span<const double> component(std::size_t i) const {
        return {components.data() + i * mean.size(), mean.size()};
    }
    void project(std::span<const double> x, std::span<double> out) const;

    bool operator==(const PcaTransform&) const = default;
};

// Covariance eigendecomposition. Components are ordered by descending variance;
// each component's largest-magnitude entry (first on ties) is made positive.
PcaTransform fit_pca(const FeatureMatrix& features, std::size_t k);

FeatureMatrix apply_pca(const PcaTransform& t, const FeatureMatrix& features);

}  // namespace calib
