#include "pdc/identities.hpp"

#include "pdc/baselines.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <functional>
#include <random>
#include <sstream>

namespace pdc {

namespace {

Matrix normal_matrix(Index rows, Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
    }
    return m;
}

Index uniform_index(Index lo, Index hi, Rng& rng) {
    return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

// f(x, theta) = the cached prediction columns themselves.
PredictiveScore raw_columns(Index q) {
    PredictiveScore::Part part;
    part.dim_q = q;
    part.n_predictions = q;
    part.draw = [](const Matrix&, Rng&) -> Matrix { throw InvalidArgument("raw_columns: no model to draw from"); };
    part.eval = [](const Matrix&, const Matrix& predictions, const Vector&) -> Matrix { return predictions; };
    return PredictiveScore({part});
}

Matrix features_of(const Matrix& x, const Matrix& w, Rng& rng) {
    Matrix out = (x * w).array().tanh().matrix();
    out += 0.3 * normal_matrix(out.rows(), out.cols(), rng);
    return out;
}

struct Instance {
    PdcProblem problem;
    Theta theta;
};

// Linear regression of y on d features with a q-dimensional f.
Instance random_instance(Rng& rng, Index d, Index q) {
    const Index n = uniform_index(30, 80, rng);
    const Index N = uniform_index(20, 120, rng);
    const Matrix x = normal_matrix(n, d, rng);
    const Matrix xu = normal_matrix(N, d, rng);
    const Vector b = normal_matrix(d, 1, rng).col(0);
    const Vector y = x * b + x.array().square().matrix().rowwise().sum() + normal_matrix(n, 1, rng).col(0);
    const Matrix w = normal_matrix(d, q, rng);
    const PredictiveScore f = raw_columns(q);
    const EstimatingFunction spec = linear_spec(d);
    LabeledDataset labeled(x, y);
    PdcProblem problem(labeled, spec, BoundScore(f, x, features_of(x, w, rng)),
                       BoundScore(f, xu, features_of(xu, w, rng)));
    Theta theta(b + 0.1 * normal_matrix(d, 1, rng).col(0));
    return Instance{std::move(problem), std::move(theta)};
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(3);
    s << std::scientific << v;
    return s.str();
}

CheckResult gamma_boundaries(Rng& rng) {
    for (int rep = 0; rep < 50; ++rep) {
        const Instance inst = random_instance(rng, uniform_index(1, 4, rng), uniform_index(1, 4, rng));
        const Matrix cov_s = sample_cov(inst.problem.s_rows(inst.theta));
        const double eta = inst.problem.eta();
        if (gamma_matrix_hat(inst.problem, inst.theta, 0.0) != cov_s) {
            return {"gamma_boundaries", false, "Gamma(0) != Cov_n(s) on instance " + std::to_string(rep)};
        }
        if (gamma_matrix_hat(inst.problem, inst.theta, -2.0 * eta) != cov_s) {
            return {"gamma_boundaries", false, "Gamma(-2 eta) != Cov_n(s) on instance " + std::to_string(rep)};
        }
    }
    return {"gamma_boundaries", true, "50 instances, bitwise equal"};
}

CheckResult safety_psd(Rng& rng) {
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const Instance inst = random_instance(rng, uniform_index(1, 4, rng), uniform_index(1, 4, rng));
        const double eta = inst.problem.eta();
        const Matrix g0 = gamma_matrix_hat(inst.problem, inst.theta, 0.0);
        const double scale = g0.trace();
        for (double frac : {0.05, 0.5, 1.0, 1.5, 1.95}) {
            const Matrix diff = g0 - gamma_matrix_hat(inst.problem, inst.theta, -frac * eta);
            const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(diff, Eigen::EigenvaluesOnly)
                                       .eigenvalues()
                                       .minCoeff();
            worst = std::min(worst, min_eig / scale);
            if (min_eig < -1e-9 * scale) {
                return {"safety_psd", false,
                        "min eigenvalue " + fmt(min_eig) + " on instance " + std::to_string(rep)};
            }
        }
    }
    return {"safety_psd", true, "100 instances x 5 gammas, worst relative eigenvalue " + fmt(worst)};
}

CheckResult gamma_grid_argmin(Rng& rng) {
    for (int rep = 0; rep < 50; ++rep) {
        const Instance inst = random_instance(rng, uniform_index(1, 4, rng), uniform_index(1, 4, rng));
        const double eta = inst.problem.eta();
        const double grid[] = {-2.0, -1.5, -1.0, -0.5, 0.0};
        int best = 0;
        double best_trace = 0.0;
        for (int g = 0; g < 5; ++g) {
            const double tr = gamma_matrix_hat(inst.problem, inst.theta, grid[g] * eta).trace();
            if (g == 0 || tr < best_trace) {
                best = g;
                best_trace = tr;
            }
        }
        if (best != 2) {
            return {"gamma_grid_argmin", false,
                    "argmin at " + std::to_string(grid[best]) + " eta on instance " + std::to_string(rep)};
        }
    }
    return {"gamma_grid_argmin", true, "50 instances, minimum at -eta"};
}

CheckResult basis_regression(Rng& rng) {
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const Index p = uniform_index(1, 4, rng);
        const BasisKind kind = rep % 2 == 0 ? BasisKind::linear : BasisKind::quadratic;
        const Index n = uniform_index(30, 80, rng);
        const Index N = uniform_index(20, 120, rng);
        const Matrix x = normal_matrix(n, p, rng);
        const Matrix xu = normal_matrix(N, p, rng);
        const Vector y = x.rowwise().sum() + x.array().square().matrix().rowwise().sum() +
                         normal_matrix(n, 1, rng).col(0);
        const EstimatingFunction spec = linear_spec(p);
        const LabeledDataset labeled(x, y);
        const UnlabeledDataset unlabeled(xu);
        const PredictiveScore f = basis_score(kind, p);
        Rng unused(0);
        const PdcProblem problem = PdcProblem::bind(labeled, unlabeled, spec, f, unused);
        const Theta theta(normal_matrix(p, 1, rng).col(0));
        const Vector got = s_hat(problem, theta, gamma_default(n, N));

        auto z_tilde = [&](const Matrix& rows) {
            Matrix z(rows.rows(), kind == BasisKind::linear ? 1 + p : 1 + 2 * p);
            z.col(0).setOnes();
            z.middleCols(1, p) = rows;
            if (kind == BasisKind::quadratic) z.rightCols(p) = rows.array().square().matrix();
            return z;
        };
        const Matrix zl = z_tilde(x);
        const Matrix zu = z_tilde(xu);
        const Matrix s = (x * theta.values() - y).asDiagonal() * x;
        const Matrix e_sz = s.transpose() * zl / static_cast<double>(n);
        const Matrix e_zz = zl.transpose() * zl / static_cast<double>(n);
        const Matrix u_n = e_zz.fullPivLu().solve(e_sz.transpose()).transpose();
        const Vector pooled = (zl.colwise().sum() + zu.colwise().sum()).transpose() / static_cast<double>(n + N);
        const Vector expected = u_n * pooled;
        const double err = (got - expected).cwiseAbs().maxCoeff();
        worst = std::max(worst, err);
        if (err > 1e-8) {
            return {"basis_regression", false, "max abs diff " + fmt(err) + " on instance " + std::to_string(rep)};
        }
    }
    return {"basis_regression", true, "50 instances, max abs diff " + fmt(worst)};
}

CheckResult mean_closed_form(Rng& rng) {
    double worst = 0.0;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        const Index n = uniform_index(10, 80, rng);
        const Index N = uniform_index(5, 120, rng);
        const Vector y = 3.0 + normal_matrix(n, 1, rng).col(0).array();
        const Vector mu_l = 0.8 * y + 0.5 * normal_matrix(n, 1, rng).col(0);
        const Vector mu_u = 2.5 + normal_matrix(N, 1, rng).col(0).array();
        const EstimatingFunction spec = mean_spec();
        const LabeledDataset labeled(Matrix(n, 0), y);
        const PredictiveScore f = score_from_columns(spec, 1);
        const PdcProblem problem(labeled, spec, BoundScore(f, Matrix(n, 0), mu_l), BoundScore(f, Matrix(N, 0), mu_u));
        const double gamma = rep % 2 == 0 ? gamma_default(n, N) : -2.0 * unit(rng);

        const double ybar = y.mean();
        const double ml = mu_l.mean();
        const double mu = mu_u.mean();
        const double cov_ym = ((y.array() - ybar) * (mu_l.array() - ml)).mean();
        const double var_m = (mu_l.array() - ml).square().mean();
        const double expected = ybar + gamma * cov_ym / var_m * (ml - mu);

        PdcConfig config;
        config.gamma = gamma;
        const PdcFit fit = pdc_one_step(problem, Theta(Vector::Constant(1, ybar)), config);
        const double err = std::abs(fit.theta_hat[0] - expected);
        worst = std::max(worst, err);
        if (err > 1e-10) {
            return {"mean_closed_form", false, "diff " + fmt(err) + " on instance " + std::to_string(rep)};
        }
    }
    return {"mean_closed_form", true, "50 instances, max abs diff " + fmt(worst)};
}

CheckResult scalar_ppi_pp(Rng& rng) {
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const Index n = uniform_index(10, 80, rng);
        const Index N = uniform_index(5, 120, rng);
        const bool mean = rep % 2 == 0;
        const Matrix x = mean ? Matrix(n, 0) : Matrix(1.0 + normal_matrix(n, 1, rng).array());
        const Matrix xu = mean ? Matrix(N, 0) : Matrix(1.0 + normal_matrix(N, 1, rng).array());
        const Vector y = mean ? Vector(normal_matrix(n, 1, rng).col(0))
                              : Vector(2.0 * x.col(0) + normal_matrix(n, 1, rng).col(0));
        const Vector mu_l = y + 0.7 * normal_matrix(n, 1, rng).col(0);
        const Vector mu_u = mean ? Vector(normal_matrix(N, 1, rng).col(0)) : Vector(2.0 * xu.col(0));
        const EstimatingFunction spec = mean ? mean_spec() : linear_spec(1);
        const LabeledDataset labeled(x, y);
        const PredictiveScore f = score_from_columns(spec, 1);
        const PdcProblem problem(labeled, spec, BoundScore(f, x, mu_l), BoundScore(f, xu, mu_u));
        const Theta theta0 = supervised_fit(labeled, spec);

        const PdcFit pdc = pdc_one_step(problem, theta0);
        const PdcFit pp = ppi_pp_one_step(problem, theta0);
        const double err = std::max(std::abs(pdc.theta_hat[0] - pp.theta_hat[0]), std::abs(pdc.v_hat(0, 0) - pp.v_hat(0, 0)));
        worst = std::max(worst, err);
        if (err > 1e-10) {
            return {"scalar_ppi_pp", false, "diff " + fmt(err) + " on instance " + std::to_string(rep)};
        }
    }
    return {"scalar_ppi_pp", true, "50 instances (mean and 1-d linear), max abs diff " + fmt(worst)};
}

CheckResult t_hat_lstsq(Rng& rng) {
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const Instance inst = random_instance(rng, uniform_index(1, 4, rng), uniform_index(1, 4, rng));
        const Matrix s = inst.problem.s_rows(inst.theta);
        const Matrix f = inst.problem.f_labeled().rows(inst.theta);
        const Matrix sc = s.rowwise() - s.colwise().mean();
        const Matrix fc = f.rowwise() - f.colwise().mean();
        const Matrix oracle = fc.householderQr().solve(sc).transpose();
        const Matrix got = t_hat(inst.problem, inst.theta);
        const double err = (got - oracle).cwiseAbs().maxCoeff() / std::max(1.0, oracle.cwiseAbs().maxCoeff());
        worst = std::max(worst, err);
        if (err > 1e-8) {
            return {"t_hat_lstsq", false, "relative diff " + fmt(err) + " on instance " + std::to_string(rep)};
        }
    }
    return {"t_hat_lstsq", true, "50 instances, max relative diff " + fmt(worst)};
}

}  // namespace

std::vector<CheckResult> run_identity_suite(std::uint64_t seed) {
    using Check = std::function<CheckResult(Rng&)>;
    const std::vector<std::pair<std::string, Check>> checks = {
        {"gamma_boundaries", gamma_boundaries}, {"safety_psd", safety_psd},
        {"gamma_grid_argmin", gamma_grid_argmin}, {"basis_regression", basis_regression},
        {"mean_closed_form", mean_closed_form}, {"scalar_ppi_pp", scalar_ppi_pp},
        {"t_hat_lstsq", t_hat_lstsq},
    };
    std::vector<CheckResult> out;
    std::uint32_t stream = 0;
    for (const auto& [name, check] : checks) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream++};
        Rng rng(seq);
        try {
            out.push_back(check(rng));
        } catch (const std::exception& e) {
            out.push_back({name, false, std::string("threw: ") + e.what()});
        }
    }
    return out;
}

}  // namespace pdc
