#pragma once

#include "pdc/core.hpp"
#include "pdc/estimating.hpp"

#include <optional>
#include <string>

namespace pdc {

/// Labeled and unlabeled samples with the estimating function and a
/// predictive score whose predictions have been drawn on both samples.
class PdcProblem {
public:
    PdcProblem(LabeledDataset labeled, EstimatingFunction spec, BoundScore f_labeled, BoundScore f_unlabeled);

    /// Draws predictions for the labeled rows first, then the unlabeled rows.
    static PdcProblem bind(const LabeledDataset& labeled, const UnlabeledDataset& unlabeled,
                           const EstimatingFunction& spec, const PredictiveScore& f, Rng& noise);

    const LabeledDataset& labeled() const { return labeled_; }
    const EstimatingFunction& spec() const { return spec_; }
    const BoundScore& f_labeled() const { return f_labeled_; }
    const BoundScore& f_unlabeled() const { return f_unlabeled_; }

    Index n() const { return labeled_.size(); }
    Index N() const { return f_unlabeled_.size(); }
    Index dim_d() const { return spec_.dim; }
    Index dim_q() const { return f_labeled_.dim(); }
    /// N / (n + N).
    double eta() const;

    Matrix s_rows(const Theta& theta) const;

private:
    LabeledDataset labeled_;
    EstimatingFunction spec_;
    BoundScore f_labeled_;
    BoundScore f_unlabeled_;
};

struct PdcConfig {
    /// Weight on the de-correlation term; empty means -N/(n+N).
    std::optional<double> gamma;
    int iterate_steps = 1;
    /// Point at which H-hat and Gamma-hat are evaluated for v_hat. Empty
    /// means the initial estimate.
    std::optional<Theta> variance_at;
    std::string method_label = "pdc";
};

struct PdcFit {
    Theta theta_hat;
    double gamma_used = 0.0;
    /// Plug-in asymptotic covariance of sqrt(n) (theta_hat - theta*).
    Matrix v_hat;
    Index n = 0;
    Index N = 0;
    std::string method_label;
};

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.0;
    Vector contrast;

    double width() const { return upper - lower; }
    bool contains(double value) const { return lower <= value && value <= upper; }
};

/// Cov_n(s, f) Cov_n(f)^{-1}: the least-squares coefficient of the score on f.
Matrix t_hat(const PdcProblem& problem, const Theta& theta);

double gamma_default(Index n, Index N);

/// E_n[ s + gamma T-hat (f - E_N f) ]. Exactly E_n s when gamma == 0.
Vector s_hat(const PdcProblem& problem, const Theta& theta, double gamma);

/// Cov_n(s) + (gamma^2/eta + 2 gamma) Cov_n(s,f) Cov_n(f)^{-1} Cov_n(f,s).
Matrix gamma_matrix_hat(const PdcProblem& problem, const Theta& theta, double gamma);

/// H^{-1} Gamma H^{-T}, symmetrized.
Matrix asymptotic_cov(const Matrix& h_hat, const Matrix& gamma_hat);

/// One-step (or fixed-count iterated) prediction de-correlated estimator.
PdcFit pdc_one_step(const PdcProblem& problem, const Theta& theta0, const PdcConfig& config = {});
/// Same, starting from the supervised fit on the labeled data.
PdcFit pdc_one_step(const PdcProblem& problem, const PdcConfig& config = {});

/// c'theta_hat -/+ z_{1-alpha/2} / sqrt(n) * sqrt(c' V c).
ConfidenceInterval confidence_interval(const PdcFit& fit, const Vector& contrast, double alpha);

/// Standard deviation of c'theta_hat implied by the fit: sqrt(c' V c / n).
double contrast_sd(const PdcFit& fit, const Vector& contrast);

/// Inverse of the standard normal CDF.
double normal_quantile(double p);

}  // namespace pdc
