#pragma once

#include "pdc/core.hpp"

#include <functional>
#include <random>
#include <string>
#include <vector>

namespace pdc {

using Rng = std::mt19937_64;

enum class ScoreFamily { mean, linear, logistic, custom };

/// An estimating function s(y, x, theta) in R^d together with the per-sample
/// Jacobian used to estimate H. Both callables work on a whole sample at once:
/// `rows` returns the n x d matrix of scores, `jacobian_mean` the average of
/// the per-row d x d Jacobians.
struct EstimatingFunction {
    using RowsFn = std::function<Matrix(const Vector& y, const Matrix& x, const Vector& theta)>;
    using JacobianFn = std::function<Matrix(const Vector& y, const Matrix& x, const Vector& theta)>;

    std::string name;
    Index dim = 0;
    ScoreFamily family = ScoreFamily::custom;
    RowsFn rows;
    JacobianFn jacobian_mean;

    Vector score(double y, const Vector& x, const Vector& theta) const;
    Matrix h_contribution(double y, const Vector& x, const Vector& theta) const;
};

/// s(y, x, theta) = theta - y. H is identically 1.
EstimatingFunction mean_spec();
/// s(y, x, theta) = (x'theta - y) x, H-hat = E_n(x x').
EstimatingFunction linear_spec(Index p);
/// s(y, x, theta) = (sigmoid(x'theta) - y) x.
EstimatingFunction logistic_spec(Index p);

double sigmoid(double t);

/// Mean over all rows of `spec.rows`.
Vector mean_score(const LabeledDataset& labeled, const EstimatingFunction& spec, const Theta& theta);

Matrix estimate_H(const LabeledDataset& labeled, const EstimatingFunction& spec, const Theta& theta);

struct NewtonOptions {
    double tolerance = 1e-10;
    int max_iterations = 100;
};

/// Root of the empirical estimating equation on labeled data. Mean and linear
/// use closed forms; everything else runs full-step Newton from `init`.
Theta supervised_fit(const LabeledDataset& labeled, const EstimatingFunction& spec, const Theta& init,
                     const NewtonOptions& options = {});
Theta supervised_fit(const LabeledDataset& labeled, const EstimatingFunction& spec);

/// Black-box predictor mu. Stochastic models draw their noise from `noise`;
/// deterministic models must ignore it.
struct PredictiveModel {
    std::function<Vector(const Matrix& x, Rng& noise)> predict;
    bool deterministic = true;

    double predict_one(const Vector& x, Rng& noise) const;
};

enum class BasisKind { linear, quadratic };

/// The predictive estimating function f(x, theta) in R^q.
///
/// Evaluation is split in two phases. `draw` asks every underlying model for
/// one prediction per row; `eval` turns the cached predictions into f at any
/// theta. A stochastic model therefore contributes the same mu draw to a row
/// no matter how many thetas f is evaluated at.
class PredictiveScore {
public:
    struct Part {
        Index dim_q = 0;
        Index n_predictions = 0;
        std::function<Matrix(const Matrix& x, Rng& noise)> draw;
        std::function<Matrix(const Matrix& x, const Matrix& predictions, const Vector& theta)> eval;
    };

    explicit PredictiveScore(std::vector<Part> parts);

    Index dim() const { return dim_q_; }
    Index n_predictions() const { return n_predictions_; }

    Matrix draw(const Matrix& x, Rng& noise) const;
    Matrix eval(const Matrix& x, const Matrix& predictions, const Vector& theta) const;

    const std::vector<Part>& parts() const { return parts_; }

private:
    std::vector<Part> parts_;
    Index dim_q_ = 0;
    Index n_predictions_ = 0;
};

/// f(x, theta) = s(mu(x), x, theta).
PredictiveScore score_from_model(const EstimatingFunction& spec, PredictiveModel model);

/// Same as score_from_model but for predictions supplied externally (for
/// example CSV columns); one part per prediction column. `draw` throws.
PredictiveScore score_from_columns(const EstimatingFunction& spec, Index n_columns);

PredictiveScore concat_scores(const PredictiveScore& f1, const PredictiveScore& f2);

/// theta-independent basis: x (q = p) or (x, x*x) (q = 2p).
PredictiveScore basis_score(BasisKind kind, Index p);

/// A predictive score tied to one sample with its predictions already drawn.
class BoundScore {
public:
    BoundScore(PredictiveScore score, Matrix x, Matrix predictions);
    static BoundScore bind(const PredictiveScore& score, const Matrix& x, Rng& noise);

    Matrix rows(const Theta& theta) const;
    Index size() const { return x_.rows(); }
    Index dim() const { return score_.dim(); }
    const Matrix& predictions() const { return predictions_; }
    const Matrix& x() const { return x_; }

private:
    PredictiveScore score_;
    Matrix x_;
    Matrix predictions_;
};

}  // namespace pdc
