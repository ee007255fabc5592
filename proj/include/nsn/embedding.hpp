#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "nsn/error.hpp"

namespace nsn {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    require(a.size() == b.size(), Errc::dim_mismatch,
            "vector dims differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

inline double l2_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Unit-norm f64 vector (the representation z of a sample). Construction
// enforces dim >= 2 and ||values|| within 1e-9 of 1; use normalized() to build
// one from an arbitrary raw vector.
class Embedding {
public:
    explicit Embedding(std::vector<double> values) : values_(std::move(values)) {
        require(values_.size() >= 2, Errc::invalid_argument, "embedding dim must be >= 2");
        const double n = l2_norm(values_);
        require(std::abs(n - 1.0) <= 1e-9, Errc::invalid_argument,
                "embedding is not unit-norm (|norm-1| = " + std::to_string(std::abs(n - 1.0)) +
                    ")");
    }

    static Embedding normalized(std::vector<double> raw) {
        require(raw.size() >= 2, Errc::invalid_argument, "embedding dim must be >= 2");
        const double n = l2_norm(raw);
        require(n > 1e-12, Errc::degenerate_output, "cannot normalize a (near-)zero vector");
        for (double& x : raw) x /= n;
        return Embedding(std::move(raw));
    }

    std::size_t dim() const noexcept { return values_.size(); }
    const std::vector<double>& values() const noexcept { return values_; }
    double operator[](std::size_t k) const { return values_[k]; }

    friend bool operator==(const Embedding&, const Embedding&) = default;

private:
    std::vector<double> values_;
};

inline double dot(const Embedding& a, const Embedding& b) { return dot(a.values(), b.values()); }

}  // namespace nsn
