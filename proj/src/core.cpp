#include "pdc/core.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace pdc {

namespace {

constexpr double kMinRcond = 1e-12;
constexpr double kRidgeResidualTol = 1e-10;

template <class M>
M take_rows(const M& src, std::span<const Index> rows) {
    M out(static_cast<Index>(rows.size()), src.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Index r = rows[i];
        if (r < 0 || r >= src.rows()) {
            throw InvalidArgument("row index out of range in subset");
        }
        out.row(static_cast<Index>(i)) = src.row(r);
    }
    return out;
}

}  // namespace

bool all_finite(const Matrix& m) {
    return m.allFinite();
}

LabeledDataset::LabeledDataset(Matrix x, Vector y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.rows() != y_.size()) {
        throw InvalidArgument("labeled dataset: x has " + std::to_string(x_.rows()) +
                              " rows but y has " + std::to_string(y_.size()) + " entries");
    }
    if (y_.size() < 2) {
        throw InsufficientData("labeled dataset needs at least 2 rows");
    }
    if (!x_.allFinite() || !y_.allFinite()) {
        throw InvalidArgument("labeled dataset contains non-finite entries");
    }
}

LabeledDataset LabeledDataset::subset(std::span<const Index> rows) const {
    Vector y(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        y[static_cast<Index>(i)] = y_[rows[i]];
    }
    return LabeledDataset(take_rows(x_, rows), std::move(y));
}

UnlabeledDataset::UnlabeledDataset(Matrix x) : x_(std::move(x)) {
    if (!x_.allFinite()) {
        throw InvalidArgument("unlabeled dataset contains non-finite entries");
    }
}

UnlabeledDataset UnlabeledDataset::subset(std::span<const Index> rows) const {
    return UnlabeledDataset(take_rows(x_, rows));
}

Theta::Theta(Vector values) : values_(std::move(values)) {
    if (values_.size() < 1) {
        throw InvalidArgument("theta must have at least one coordinate");
    }
    if (!values_.allFinite()) {
        throw InvalidArgument("theta contains non-finite entries");
    }
}

Vector sample_mean(const Matrix& rows) {
    if (rows.rows() == 0) {
        throw EmptySample("sample mean of an empty sample");
    }
    Vector out = Vector::Zero(rows.cols());
    for (Index j = 0; j < rows.cols(); ++j) {
        double acc = 0.0;
        for (Index k = 0; k < rows.rows(); ++k) {
            acc += rows(k, j);
        }
        out[j] = acc / static_cast<double>(rows.rows());
    }
    return out;
}

Matrix sample_cov(const Matrix& a_rows, const Matrix& b_rows) {
    if (a_rows.rows() != b_rows.rows()) {
        throw InvalidArgument("sample_cov: row counts differ");
    }
    const Index n = a_rows.rows();
    if (n < 2) {
        throw DegenerateSample("sample_cov needs at least 2 rows");
    }
    const Matrix a = a_rows.rowwise() - sample_mean(a_rows).transpose();
    const Matrix b = b_rows.rowwise() - sample_mean(b_rows).transpose();
    // Plain ordered dot products so that cov(a, b) == cov(b, a)^T bit for bit.
    Matrix out(a.cols(), b.cols());
    for (Index i = 0; i < a.cols(); ++i) {
        for (Index j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (Index k = 0; k < n; ++k) {
                acc += a(k, i) * b(k, j);
            }
            out(i, j) = acc / static_cast<double>(n);
        }
    }
    return out;
}

Matrix solve_spd(const Matrix& m, const Matrix& rhs, const SolveOptions& options) {
    const Index q = m.rows();
    if (m.cols() != q || rhs.rows() != q) {
        throw InvalidArgument("solve_spd: dimension mismatch");
    }
    if (!m.allFinite() || !rhs.allFinite()) {
        throw InvalidArgument("solve_spd: non-finite input");
    }
    if (options.ridge_scale < 0.0) {
        throw InvalidArgument("solve_spd: ridge_scale must be nonnegative");
    }

    Eigen::LLT<Matrix> llt(m);
    if (llt.info() == Eigen::Success && llt.rcond() >= kMinRcond) {
        return llt.solve(rhs);
    }

    const double ridge = options.ridge_scale * m.trace() / static_cast<double>(q);
    if (!(ridge > 0.0)) {
        throw SingularCovariance("covariance matrix is singular (zero trace)");
    }
    Matrix ridged = m;
    ridged.diagonal().array() += ridge;
    Eigen::LLT<Matrix> retry(ridged);
    if (retry.info() != Eigen::Success) {
        throw SingularCovariance("covariance matrix is singular after ridge retry");
    }
    Matrix z = retry.solve(rhs);
    const double residual = (m * z - rhs).norm();
    if (!(residual <= kRidgeResidualTol * rhs.norm())) {
        throw SingularCovariance("covariance matrix is singular: ridge solution residual " +
                                 std::to_string(residual));
    }
    return z;
}

void require_variation(const Matrix& rows, const std::string& what) {
    const Matrix c = sample_cov(rows);
    const double tol = 64.0 * std::numeric_limits<double>::epsilon();
    for (Index j = 0; j < rows.cols(); ++j) {
        const double ms = rows.col(j).squaredNorm() / static_cast<double>(rows.rows());
        if (!(c(j, j) > tol * tol * ms)) {
            throw SingularCovariance(what + " column " + std::to_string(j) + " has no variation");
        }
    }
}

Matrix solve_general(const Matrix& m, const Matrix& rhs) {
    if (m.rows() != m.cols() || rhs.rows() != m.rows()) {
        throw InvalidArgument("solve_general: dimension mismatch");
    }
    if (!m.allFinite()) {
        throw SingularCovariance("H-hat is not finite");
    }
    Eigen::FullPivLU<Matrix> lu(m);
    if (!lu.isInvertible()) {
        throw SingularCovariance("H-hat is singular");
    }
    return lu.solve(rhs);
}

}  // namespace pdc
