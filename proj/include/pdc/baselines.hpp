#pragma once

#include "pdc/decorrelated.hpp"

#include <optional>

namespace pdc {

// Competitor estimators. All are one Newton-type step from theta0 and report
// the same fields as a PDC fit.
using BaselineFit = PdcFit;

struct OneStepOptions {
    /// Where H-hat and the covariance pieces are evaluated; defaults to theta0.
    std::optional<Theta> variance_at;
};

/// theta0 - H^{-1} E_n s(theta0); V = H^{-1} Cov_n(s) H^{-T}.
BaselineFit supervised_one_step(const LabeledDataset& labeled, const EstimatingFunction& spec, const Theta& theta0,
                                const OneStepOptions& options = {});

/// Prediction-powered inference. `problem` must carry f = s(mu(x), x, theta).
/// Score: E_n s - E_n f + E_N f.
/// V = H^{-1} [Cov_n(s - f) + (n/N) Cov_N(f)] H^{-T}.
BaselineFit ppi_one_step(const PdcProblem& problem, const Theta& theta0, const OneStepOptions& options = {});

/// Trace-optimal scalar weight for the score E_n s + lambda (E_n f - E_N f).
///
/// With A = H^{-1}, the plug-in covariance of that score is
///   Gamma(lambda) = Cov_n(s) + lambda (C_sf + C_fs) + (lambda^2/eta) Cov_n(f),
/// and tr(A Gamma(lambda) A^T) is a quadratic in lambda with minimizer
///   lambda* = -eta tr(A (C_sf + C_fs) A^T) / (2 tr(A Cov_n(f) A^T)).
/// Returns 0 when Cov_n(f) vanishes.
double ppi_pp_lambda(const PdcProblem& problem, const Theta& theta);

/// Gamma(lambda) above, before the H sandwich.
Matrix ppi_pp_gamma_matrix(const PdcProblem& problem, const Theta& theta, double lambda);

BaselineFit ppi_pp_one_step(const PdcProblem& problem, const Theta& theta0, const OneStepOptions& options = {});

/// PDC with a deterministic basis of x and gamma = -N/(n+N).
BaselineFit semi_supervised_one_step(const LabeledDataset& labeled, const UnlabeledDataset& unlabeled,
                                     const EstimatingFunction& spec, BasisKind basis, const Theta& theta0,
                                     const OneStepOptions& options = {});

}  // namespace pdc
