#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "symortho/tensor.hpp"

namespace testing_support {

using symortho::Tensor;
using symortho::Vec;

inline Vec unit(std::size_t n, std::size_t i) {
    Vec v = Vec::Zero(static_cast<Eigen::Index>(n));
    v(static_cast<Eigen::Index>(i)) = 1.0;
    return v;
}

inline Vec random_unit(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Vec v(static_cast<Eigen::Index>(n));
    for (auto& x : v) {
        x = normal(rng);
    }
    return v / v.norm();
}

inline Tensor random_tensor(std::vector<std::size_t> dims, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Tensor t(std::move(dims));
    for (auto& x : t.data()) {
        x = normal(rng);
    }
    return t;
}

inline Tensor random_symmetric(std::size_t n, std::size_t d, std::mt19937_64& rng) {
    return symortho::symmetrize(random_tensor(std::vector<std::size_t>(d, n), rng));
}

inline Tensor power(const Vec& v, std::size_t d) {
    std::vector<Vec> f(d, v);
    return symortho::outer<double>(f);
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

} // namespace testing_support
