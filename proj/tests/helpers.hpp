#pragma once

#include "pdc/core.hpp"
#include "pdc/estimating.hpp"

#include <random>

namespace testutil {

inline pdc::Matrix randn(pdc::Index rows, pdc::Index cols, pdc::Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    pdc::Matrix m(rows, cols);
    for (pdc::Index i = 0; i < rows; ++i) {
        for (pdc::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    }
    return m;
}

inline pdc::Vector randv(pdc::Index n, pdc::Rng& rng) { return randn(n, 1, rng).col(0); }

inline pdc::Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    pdc::Matrix m(static_cast<pdc::Index>(rows.size()), static_cast<pdc::Index>(rows.begin()->size()));
    pdc::Index i = 0;
    for (const auto& r : rows) {
        pdc::Index j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

inline pdc::Vector vec(std::initializer_list<double> v) {
    pdc::Vector out(static_cast<pdc::Index>(v.size()));
    pdc::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

inline double max_abs(const pdc::Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace testutil
