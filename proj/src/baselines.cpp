#include "pdc/baselines.hpp"

#include <utility>

namespace pdc {

namespace {

const Theta& variance_point(const OneStepOptions& options, const Theta& theta0) {
    return options.variance_at ? *options.variance_at : theta0;
}

void require_score_shaped(const PdcProblem& problem, const char* who) {
    if (problem.dim_q() != problem.dim_d()) {
        throw InvalidArgument(std::string(who) + ": predictive score must have the dimension of s");
    }
    if (problem.N() < 1) {
        throw InsufficientData(std::string(who) + ": needs unlabeled rows");
    }
}

}  // namespace

BaselineFit supervised_one_step(const LabeledDataset& labeled, const EstimatingFunction& spec, const Theta& theta0,
                                const OneStepOptions& options) {
    const Matrix h0 = estimate_H(labeled, spec, theta0);
    Vector theta = theta0.values() - solve_general(h0, mean_score(labeled, spec, theta0)).col(0);

    const Theta& at = variance_point(options, theta0);
    const Matrix s = spec.rows(labeled.y(), labeled.x(), at.values());
    Matrix v = asymptotic_cov(estimate_H(labeled, spec, at), sample_cov(s));
    return BaselineFit{Theta(std::move(theta)), 0.0, std::move(v), labeled.size(), 0, "supervised"};
}

BaselineFit ppi_one_step(const PdcProblem& problem, const Theta& theta0, const OneStepOptions& options) {
    require_score_shaped(problem, "ppi_one_step");
    const Vector score = sample_mean(problem.s_rows(theta0)) - sample_mean(problem.f_labeled().rows(theta0)) +
                         sample_mean(problem.f_unlabeled().rows(theta0));
    const Matrix h0 = estimate_H(problem.labeled(), problem.spec(), theta0);
    Vector theta = theta0.values() - solve_general(h0, score).col(0);

    const Theta& at = variance_point(options, theta0);
    const Matrix s = problem.s_rows(at);
    const Matrix f = problem.f_labeled().rows(at);
    const double ratio = static_cast<double>(problem.n()) / static_cast<double>(problem.N());
    const Matrix gamma = sample_cov(s - f) + ratio * sample_cov(problem.f_unlabeled().rows(at));
    Matrix v = asymptotic_cov(estimate_H(problem.labeled(), problem.spec(), at), gamma);
    return BaselineFit{Theta(std::move(theta)), 0.0, std::move(v), problem.n(), problem.N(), "ppi"};
}

double ppi_pp_lambda(const PdcProblem& problem, const Theta& theta) {
    require_score_shaped(problem, "ppi_pp_lambda");
    const Matrix s = problem.s_rows(theta);
    const Matrix f = problem.f_labeled().rows(theta);
    const Matrix h = estimate_H(problem.labeled(), problem.spec(), theta);
    const Matrix c_sf = sample_cov(s, f);
    const Matrix cross = c_sf + c_sf.transpose();
    const double denominator = asymptotic_cov(h, sample_cov(f)).trace();
    if (denominator == 0.0) {
        return 0.0;
    }
    const double numerator = asymptotic_cov(h, cross).trace();
    return -problem.eta() * numerator / (2.0 * denominator);
}

Matrix ppi_pp_gamma_matrix(const PdcProblem& problem, const Theta& theta, double lambda) {
    const Matrix s = problem.s_rows(theta);
    Matrix out = sample_cov(s);
    if (lambda == 0.0) {
        return out;
    }
    const Matrix f = problem.f_labeled().rows(theta);
    const Matrix c_sf = sample_cov(s, f);
    out += lambda * (c_sf + c_sf.transpose()) + (lambda * lambda / problem.eta()) * sample_cov(f);
    return out;
}

BaselineFit ppi_pp_one_step(const PdcProblem& problem, const Theta& theta0, const OneStepOptions& options) {
    const double lambda = ppi_pp_lambda(problem, theta0);
    Vector score = sample_mean(problem.s_rows(theta0));
    if (lambda != 0.0) {
        score += lambda * (sample_mean(problem.f_labeled().rows(theta0)) -
                           sample_mean(problem.f_unlabeled().rows(theta0)));
    }
    const Matrix h0 = estimate_H(problem.labeled(), problem.spec(), theta0);
    Vector theta = theta0.values() - solve_general(h0, score).col(0);

    const Theta& at = variance_point(options, theta0);
    Matrix v = asymptotic_cov(estimate_H(problem.labeled(), problem.spec(), at),
                              ppi_pp_gamma_matrix(problem, at, lambda));
    return BaselineFit{Theta(std::move(theta)), lambda, std::move(v), problem.n(), problem.N(), "ppi_pp"};
}

BaselineFit semi_supervised_one_step(const LabeledDataset& labeled, const UnlabeledDataset& unlabeled,
                                     const EstimatingFunction& spec, BasisKind basis, const Theta& theta0,
                                     const OneStepOptions& options) {
    Rng unused(0);
    const PdcProblem problem =
        PdcProblem::bind(labeled, unlabeled, spec, basis_score(basis, labeled.dim()), unused);
    PdcConfig config;
    config.gamma = gamma_default(labeled.size(), unlabeled.size());
    config.variance_at = options.variance_at;
    config.method_label = "semi_supervised";
    return pdc_one_step(problem, theta0, config);
}

}  // namespace pdc
