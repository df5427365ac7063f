#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pdc {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Exact algebraic identities of the estimator, each checked on random
/// instances against an independently coded oracle:
///   gamma_boundaries    Gamma(0) and Gamma(-2 eta) equal Cov_n(s) bitwise
///   safety_psd          Gamma(0) - Gamma(gamma) is PSD for gamma in (-2 eta, 0)
///   gamma_grid_argmin   tr Gamma over {-2,-1.5,-1,-0.5,0} x eta is smallest at -eta
///   basis_regression    with a basis f, S-hat equals U_n times the pooled mean of (1, Z)
///   mean_closed_form    the mean estimator's closed form
///   scalar_ppi_pp       d = q = 1: PDC at gamma = -eta equals PPI++
///   t_hat_lstsq         T-hat against a QR least-squares fit of centred s on centred f
std::vector<CheckResult> run_identity_suite(std::uint64_t seed = 20240901);

}  // namespace pdc
