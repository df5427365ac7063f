#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <string>

namespace pdc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptySample : public Error {
public:
    using Error::Error;
};

class DegenerateSample : public Error {
public:
    using Error::Error;
};

/// Raised when a covariance (or H) needed for a solve is not invertible.
class SingularCovariance : public Error {
public:
    using Error::Error;
};

class NoConvergence : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// n labeled rows: features x (n x p) and responses y (n).
class LabeledDataset {
public:
    LabeledDataset(Matrix x, Vector y);

    const Matrix& x() const { return x_; }
    const Vector& y() const { return y_; }
    Index size() const { return y_.size(); }
    Index dim() const { return x_.cols(); }

    LabeledDataset subset(std::span<const Index> rows) const;

private:
    Matrix x_;
    Vector y_;
};

/// N unlabeled rows of features. N may be zero.
class UnlabeledDataset {
public:
    explicit UnlabeledDataset(Matrix x);

    const Matrix& x() const { return x_; }
    Index size() const { return x_.rows(); }
    Index dim() const { return x_.cols(); }

    UnlabeledDataset subset(std::span<const Index> rows) const;

private:
    Matrix x_;
};

/// A point in the parameter space. Always finite, at least one coordinate.
class Theta {
public:
    explicit Theta(Vector values);

    const Vector& values() const { return values_; }
    Index size() const { return values_.size(); }
    double operator[](Index i) const { return values_[i]; }

private:
    Vector values_;
};

struct SolveOptions {
    double ridge_scale = 1e-10;
};

// Empirical moments. Rows are observations; every divisor is the row count
// (1/n), never 1/(n-1).

Vector sample_mean(const Matrix& rows);

Matrix sample_cov(const Matrix& a_rows, const Matrix& b_rows);
inline Matrix sample_cov(const Matrix& rows) { return sample_cov(rows, rows); }

/// Solves m * Z = rhs for symmetric positive definite m.
///
/// A Cholesky factorization is tried first. If it fails or is numerically
/// rank deficient, one retry is made with m + ridge_scale * tr(m)/q * I; the
/// ridged solution is kept only when it still solves the original system to
/// 1e-10 * ||rhs||. Anything else throws SingularCovariance.
Matrix solve_spd(const Matrix& m, const Matrix& rhs, const SolveOptions& options = {});

/// Throws SingularCovariance if some column of `rows` is constant up to
/// rounding, i.e. its variance is below (64 eps)^2 times its mean square.
void require_variation(const Matrix& rows, const std::string& what);

/// Solves m * Z = rhs for a general square m (used for H-hat).
Matrix solve_general(const Matrix& m, const Matrix& rhs);

bool all_finite(const Matrix& m);

}  // namespace pdc
