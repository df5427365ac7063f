#pragma once

#include "pdc/baselines.hpp"

#include <cstdint>
#include <random>

namespace testutil {

struct CoordinateFixture {
    pdc::Matrix x;
    pdc::Vector y;
    pdc::Vector pred;
    pdc::Matrix xu;
    pdc::Vector pred_u;
};

// Two-coefficient regression whose predictor tracks one coordinate of the
// signal well and the other badly; the mix is drawn from `seed`.
inline CoordinateFixture coordinate_fixture(std::uint64_t seed, pdc::Index n = 300, pdc::Index N = 3000) {
    pdc::Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double rho = 2.0 * unit(rng) - 1.0;
    const double a1 = 2.0 * unit(rng);
    const double a2 = 2.0 * unit(rng) - 1.0;
    const double noise = 2.0 * unit(rng);
    const double hetero = 2.0 * unit(rng);
    auto draw = [&](pdc::Index rows, pdc::Matrix& x, pdc::Vector* y, pdc::Vector& pred) {
        x.resize(rows, 2);
        pred.resize(rows);
        if (y) y->resize(rows);
        for (pdc::Index i = 0; i < rows; ++i) {
            const double z1 = normal(rng);
            const double z2 = rho * z1 + std::sqrt(1.0 - rho * rho) * normal(rng);
            x(i, 0) = z1;
            x(i, 1) = z2;
            const double signal = z1 + z2 + hetero * z2 * z2;
            const double e = normal(rng);
            if (y) (*y)[i] = signal + e;
            pred[i] = a1 * z1 + a2 * z2 + hetero * z2 * z2 + 0.5 * e * (y != nullptr) + noise * normal(rng) * z2;
        }
    };
    CoordinateFixture fx;
    draw(n, fx.x, &fx.y, fx.pred);
    draw(N, fx.xu, nullptr, fx.pred_u);
    return fx;
}

inline pdc::PdcProblem coordinate_problem(const CoordinateFixture& fx) {
    const pdc::EstimatingFunction spec = pdc::linear_spec(2);
    const pdc::PredictiveScore f = pdc::score_from_columns(spec, 1);
    return pdc::PdcProblem(pdc::LabeledDataset(fx.x, fx.y), spec, pdc::BoundScore(f, fx.x, fx.pred),
                           pdc::BoundScore(f, fx.xu, fx.pred_u));
}

}  // namespace testutil
