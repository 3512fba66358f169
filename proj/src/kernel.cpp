#include "calib/kernel.hpp"

#include <cmath>

#include "calib/error.hpp"

namespace calib {

std::string to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::Laplacian:
            return "laplacian";
        case KernelFamily::Gaussian:
            return "gaussian";
        case KernelFamily::GroupIndicator:
            return "group";
    }
    return "unknown";
}

KernelFamily parse_kernel_family(const std::string& s) {
    if (s == "laplacian") {
        return KernelFamily::Laplacian;
    }
    if (s == "gaussian") {
        return KernelFamily::Gaussian;
    }
    if (s == "group" || s == "group-indicator") {
        return KernelFamily::GroupIndicator;
    }
    throw ArgumentError("unknown kernel '" + s + "'");
}

void KernelSpec::validate() const {
    if (uses_features()) {
        if (!(gamma > 0.0) || !std::isfinite(gamma)) {
            throw ArgumentError("kernel bandwidth must be positive and finite");
        }
        if (dim == 0) {
            throw ArgumentError("kernel feature dimension must be positive");
        }
    }
}

double log_kernel(const KernelSpec& spec, std::span<const double> u, std::span<const double> v) {
    if (u.size() != spec.dim || v.size() != spec.dim) {
        throw ArgumentError("kernel input dimension does not match the kernel's dimension");
    }
    const double scale = static_cast<double>(spec.dim);
    switch (spec.family) {
        case KernelFamily::Laplacian: {
            double dist = 0.0;
            for (std::size_t j = 0; j < u.size(); ++j) {
                dist += std::abs(u[j] - v[j]);
            }
            return -dist / (scale * spec.gamma);
        }
        case KernelFamily::Gaussian: {
            double dist = 0.0;
            for (std::size_t j = 0; j < u.size(); ++j) {
                const double diff = u[j] - v[j];
                dist += diff * diff;
            }
            return -dist / (scale * spec.gamma * spec.gamma);
        }
        case KernelFamily::GroupIndicator:
            break;
    }
    throw ArgumentError("group-indicator kernel is evaluated on group labels, not features");
}

double eval_kernel(const KernelSpec& spec, std::span<const double> u, std::span<const double> v) {
    return std::exp(log_kernel(spec, u, v));
}

double eval_group_kernel(const std::optional<std::string>& a, const std::optional<std::string>& b) {
    return (a && b && *a == *b) ? 1.0 : 0.0;
}

}  // namespace calib
