#include "pdc/decorrelated.hpp"

#include <cmath>
#include <utility>

namespace pdc {

namespace {

double resolve_gamma(const PdcProblem& problem, const PdcConfig& config) {
    return config.gamma ? *config.gamma : gamma_default(problem.n(), problem.N());
}

// Cov_n(s,f) Cov_n(f)^{-1} Cov_n(f,s), symmetrized.
Matrix explained_cov(const Matrix& s, const Matrix& f) {
    const Matrix c_sf = sample_cov(s, f);
    require_variation(f, "f");
    const Matrix c_ff = sample_cov(f);
    const Matrix p = c_sf * solve_spd(c_ff, c_sf.transpose());
    return 0.5 * (p + p.transpose());
}

}  // namespace

PdcProblem::PdcProblem(LabeledDataset labeled, EstimatingFunction spec, BoundScore f_labeled,
                       BoundScore f_unlabeled)
    : labeled_(std::move(labeled)),
      spec_(std::move(spec)),
      f_labeled_(std::move(f_labeled)),
      f_unlabeled_(std::move(f_unlabeled)) {
    if (f_labeled_.size() != labeled_.size()) {
        throw InvalidArgument("pdc problem: labeled predictive score has the wrong row count");
    }
    if (f_labeled_.dim() != f_unlabeled_.dim()) {
        throw InvalidArgument("pdc problem: labeled and unlabeled scores differ in dimension");
    }
    if (f_unlabeled_.size() > 0 && f_unlabeled_.x().cols() != labeled_.dim()) {
        throw InvalidArgument("pdc problem: unlabeled feature count differs from labeled");
    }
}

PdcProblem PdcProblem::bind(const LabeledDataset& labeled, const UnlabeledDataset& unlabeled,
                            const EstimatingFunction& spec, const PredictiveScore& f, Rng& noise) {
    if (unlabeled.size() > 0 && unlabeled.dim() != labeled.dim()) {
        throw InvalidArgument("pdc problem: unlabeled feature count differs from labeled");
    }
    BoundScore lab = BoundScore::bind(f, labeled.x(), noise);
    BoundScore unlab = BoundScore::bind(f, unlabeled.x(), noise);
    return PdcProblem(labeled, spec, std::move(lab), std::move(unlab));
}

double PdcProblem::eta() const {
    return static_cast<double>(N()) / static_cast<double>(n() + N());
}

Matrix PdcProblem::s_rows(const Theta& theta) const {
    if (theta.size() != spec_.dim) {
        throw InvalidArgument("theta dimension does not match the estimating function");
    }
    return spec_.rows(labeled_.y(), labeled_.x(), theta.values());
}

Matrix t_hat(const PdcProblem& problem, const Theta& theta) {
    const Matrix s = problem.s_rows(theta);
    const Matrix f = problem.f_labeled().rows(theta);
    require_variation(f, "f");
    const Matrix c_sf = sample_cov(s, f);
    return solve_spd(sample_cov(f), c_sf.transpose()).transpose();
}

double gamma_default(Index n, Index N) {
    if (n < 1 || N < 0) {
        throw InvalidArgument("gamma_default: need n >= 1 and N >= 0");
    }
    if (N == 0) {
        return 0.0;
    }
    return -static_cast<double>(N) / static_cast<double>(n + N);
}

Vector s_hat(const PdcProblem& problem, const Theta& theta, double gamma) {
    Vector out = sample_mean(problem.s_rows(theta));
    if (gamma == 0.0) {
        return out;
    }
    if (problem.N() < 1) {
        throw InsufficientData("s_hat: nonzero gamma needs unlabeled rows");
    }
    const Matrix f_lab = problem.f_labeled().rows(theta);
    const Vector gap = sample_mean(f_lab) - sample_mean(problem.f_unlabeled().rows(theta));
    out += gamma * (t_hat(problem, theta) * gap);
    return out;
}

Matrix gamma_matrix_hat(const PdcProblem& problem, const Theta& theta, double gamma) {
    const Matrix s = problem.s_rows(theta);
    Matrix out = sample_cov(s);
    if (gamma == 0.0) {
        return out;
    }
    if (problem.N() < 1) {
        throw InsufficientData("gamma_matrix_hat: nonzero gamma needs unlabeled rows");
    }
    // gamma * (gamma/eta + 2) is exactly zero at gamma = -2 eta.
    const double coefficient = gamma * (gamma / problem.eta() + 2.0);
    if (coefficient == 0.0) {
        return out;
    }
    out += coefficient * explained_cov(s, problem.f_labeled().rows(theta));
    return out;
}

Matrix asymptotic_cov(const Matrix& h_hat, const Matrix& gamma_hat) {
    if (h_hat.rows() != gamma_hat.rows() || gamma_hat.rows() != gamma_hat.cols()) {
        throw InvalidArgument("asymptotic_cov: dimension mismatch");
    }
    const Matrix left = solve_general(h_hat, gamma_hat);
    const Matrix v = solve_general(h_hat, left.transpose()).transpose();
    return 0.5 * (v + v.transpose());
}

PdcFit pdc_one_step(const PdcProblem& problem, const Theta& theta0, const PdcConfig& config) {
    if (config.iterate_steps < 1) {
        throw InvalidArgument("pdc_one_step: iterate_steps must be at least 1");
    }
    if (problem.n() < std::max<Index>(2, problem.dim_d())) {
        throw InsufficientData("pdc_one_step: too few labeled rows");
    }
    const double gamma = resolve_gamma(problem, config);

    Vector theta = theta0.values();
    for (int step = 0; step < config.iterate_steps; ++step) {
        const Theta current(theta);
        const Matrix h = estimate_H(problem.labeled(), problem.spec(), current);
        const Vector score = s_hat(problem, current, gamma);
        theta = theta - solve_general(h, score).col(0);
    }

    const Theta& at = config.variance_at ? *config.variance_at : theta0;
    const Matrix h = estimate_H(problem.labeled(), problem.spec(), at);
    Matrix v = asymptotic_cov(h, gamma_matrix_hat(problem, at, gamma));

    return PdcFit{Theta(std::move(theta)), gamma, std::move(v), problem.n(), problem.N(), config.method_label};
}

PdcFit pdc_one_step(const PdcProblem& problem, const PdcConfig& config) {
    return pdc_one_step(problem, supervised_fit(problem.labeled(), problem.spec()), config);
}

double contrast_sd(const PdcFit& fit, const Vector& contrast) {
    if (contrast.size() != fit.theta_hat.size()) {
        throw InvalidArgument("contrast length does not match theta");
    }
    const double var = std::max(0.0, contrast.dot(fit.v_hat * contrast));
    return std::sqrt(var / static_cast<double>(fit.n));
}

ConfidenceInterval confidence_interval(const PdcFit& fit, const Vector& contrast, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidArgument("confidence_interval: alpha must lie in (0, 1)");
    }
    const double centre = contrast.dot(fit.theta_hat.values());
    const double half = normal_quantile(1.0 - alpha / 2.0) * contrast_sd(fit, contrast);
    return ConfidenceInterval{centre - half, centre + half, 1.0 - alpha, contrast};
}

}  // namespace pdc
