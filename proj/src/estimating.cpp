#include "pdc/estimating.hpp"

#include <cmath>
#include <utility>

namespace pdc {

namespace {

Matrix one_row(const Vector& x) {
    return x.transpose();
}

void check_theta_dim(const EstimatingFunction& spec, const Vector& theta) {
    if (theta.size() != spec.dim) {
        throw InvalidArgument(spec.name + ": theta has " + std::to_string(theta.size()) +
                              " coordinates, expected " + std::to_string(spec.dim));
    }
}

void check_design(const EstimatingFunction& spec, const Matrix& x) {
    if (spec.family != ScoreFamily::mean && x.cols() != spec.dim) {
        throw InvalidArgument(spec.name + ": design has " + std::to_string(x.cols()) +
                              " columns, expected " + std::to_string(spec.dim));
    }
}

}  // namespace

double sigmoid(double t) {
    if (t >= 0.0) {
        return 1.0 / (1.0 + std::exp(-t));
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
}

Vector EstimatingFunction::score(double y, const Vector& x, const Vector& theta) const {
    Vector yy(1);
    yy[0] = y;
    return rows(yy, one_row(x), theta).row(0).transpose();
}

Matrix EstimatingFunction::h_contribution(double y, const Vector& x, const Vector& theta) const {
    Vector yy(1);
    yy[0] = y;
    return jacobian_mean(yy, one_row(x), theta);
}

EstimatingFunction mean_spec() {
    EstimatingFunction spec;
    spec.name = "mean";
    spec.dim = 1;
    spec.family = ScoreFamily::mean;
    spec.rows = [](const Vector& y, const Matrix&, const Vector& theta) -> Matrix {
        return (theta[0] - y.array()).matrix();
    };
    spec.jacobian_mean = [](const Vector&, const Matrix&, const Vector&) -> Matrix {
        return Matrix::Ones(1, 1);
    };
    return spec;
}

EstimatingFunction linear_spec(Index p) {
    if (p < 1) {
        throw InvalidArgument("linear_spec: p must be at least 1");
    }
    EstimatingFunction spec;
    spec.name = "linear";
    spec.dim = p;
    spec.family = ScoreFamily::linear;
    spec.rows = [](const Vector& y, const Matrix& x, const Vector& theta) -> Matrix {
        const Vector residual = x * theta - y;
        return residual.asDiagonal() * x;
    };
    spec.jacobian_mean = [](const Vector&, const Matrix& x, const Vector&) -> Matrix {
        return (x.transpose() * x) / static_cast<double>(x.rows());
    };
    return spec;
}

EstimatingFunction logistic_spec(Index p) {
    if (p < 1) {
        throw InvalidArgument("logistic_spec: p must be at least 1");
    }
    EstimatingFunction spec;
    spec.name = "logistic";
    spec.dim = p;
    spec.family = ScoreFamily::logistic;
    spec.rows = [](const Vector& y, const Matrix& x, const Vector& theta) -> Matrix {
        const Vector eta = x * theta;
        Vector residual(eta.size());
        for (Index i = 0; i < eta.size(); ++i) {
            residual[i] = sigmoid(eta[i]) - y[i];
        }
        return residual.asDiagonal() * x;
    };
    spec.jacobian_mean = [](const Vector&, const Matrix& x, const Vector& theta) -> Matrix {
        const Vector eta = x * theta;
        Vector w(eta.size());
        for (Index i = 0; i < eta.size(); ++i) {
            const double pr = sigmoid(eta[i]);
            w[i] = pr * (1.0 - pr);
        }
        return (x.transpose() * w.asDiagonal() * x) / static_cast<double>(x.rows());
    };
    return spec;
}

Vector mean_score(const LabeledDataset& labeled, const EstimatingFunction& spec, const Theta& theta) {
    check_theta_dim(spec, theta.values());
    return sample_mean(spec.rows(labeled.y(), labeled.x(), theta.values()));
}

Matrix estimate_H(const LabeledDataset& labeled, const EstimatingFunction& spec, const Theta& theta) {
    check_theta_dim(spec, theta.values());
    return spec.jacobian_mean(labeled.y(), labeled.x(), theta.values());
}

Theta supervised_fit(const LabeledDataset& labeled, const EstimatingFunction& spec, const Theta& init,
                     const NewtonOptions& options) {
    check_theta_dim(spec, init.values());
    check_design(spec, labeled.x());
    if (labeled.size() < spec.dim) {
        throw InsufficientData("supervised_fit: fewer labeled rows than parameters");
    }

    switch (spec.family) {
        case ScoreFamily::mean: {
            Vector theta(1);
            theta[0] = labeled.y().mean();
            return Theta(std::move(theta));
        }
        case ScoreFamily::linear: {
            const Matrix& x = labeled.x();
            const double n = static_cast<double>(x.rows());
            const Matrix gram = (x.transpose() * x) / n;
            const Matrix xty = (x.transpose() * labeled.y()) / n;
            return Theta(solve_general(gram, xty).col(0));
        }
        case ScoreFamily::logistic:
        case ScoreFamily::custom:
            break;
    }

    Vector theta = init.values();
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        const Vector score = sample_mean(spec.rows(labeled.y(), labeled.x(), theta));
        if (!score.allFinite()) {
            break;
        }
        if (score.norm() <= options.tolerance) {
            return Theta(std::move(theta));
        }
        const Matrix h = spec.jacobian_mean(labeled.y(), labeled.x(), theta);
        theta -= solve_general(h, score).col(0);
        if (!theta.allFinite()) {
            break;
        }
    }
    const Vector score = sample_mean(spec.rows(labeled.y(), labeled.x(), theta));
    if (score.allFinite() && score.norm() <= options.tolerance) {
        return Theta(std::move(theta));
    }
    throw NoConvergence(spec.name + ": Newton iteration did not reach score tolerance within " +
                        std::to_string(options.max_iterations) + " steps");
}

Theta supervised_fit(const LabeledDataset& labeled, const EstimatingFunction& spec) {
    return supervised_fit(labeled, spec, Theta(Vector::Zero(spec.dim)));
}

double PredictiveModel::predict_one(const Vector& x, Rng& noise) const {
    return predict(x.transpose(), noise)[0];
}

PredictiveScore::PredictiveScore(std::vector<Part> parts) : parts_(std::move(parts)) {
    for (const auto& part : parts_) {
        dim_q_ += part.dim_q;
        n_predictions_ += part.n_predictions;
    }
    if (dim_q_ < 1) {
        throw InvalidArgument("predictive score must have at least one component");
    }
}

Matrix PredictiveScore::draw(const Matrix& x, Rng& noise) const {
    Matrix out(x.rows(), n_predictions_);
    Index col = 0;
    for (const auto& part : parts_) {
        if (part.n_predictions == 0) {
            continue;
        }
        out.middleCols(col, part.n_predictions) = part.draw(x, noise);
        col += part.n_predictions;
    }
    return out;
}

Matrix PredictiveScore::eval(const Matrix& x, const Matrix& predictions, const Vector& theta) const {
    if (predictions.rows() != x.rows() || predictions.cols() != n_predictions_) {
        throw InvalidArgument("predictive score: prediction cache has the wrong shape");
    }
    Matrix out(x.rows(), dim_q_);
    Index col = 0;
    Index pcol = 0;
    for (const auto& part : parts_) {
        out.middleCols(col, part.dim_q) =
            part.eval(x, predictions.middleCols(pcol, part.n_predictions), theta);
        col += part.dim_q;
        pcol += part.n_predictions;
    }
    return out;
}

PredictiveScore score_from_model(const EstimatingFunction& spec, PredictiveModel model) {
    PredictiveScore::Part part;
    part.dim_q = spec.dim;
    part.n_predictions = 1;
    part.draw = [model = std::move(model)](const Matrix& x, Rng& noise) -> Matrix {
        return model.predict(x, noise);
    };
    part.eval = [rows = spec.rows](const Matrix& x, const Matrix& predictions, const Vector& theta) {
        return rows(predictions.col(0), x, theta);
    };
    return PredictiveScore({std::move(part)});
}

PredictiveScore score_from_columns(const EstimatingFunction& spec, Index n_columns) {
    std::vector<PredictiveScore::Part> parts;
    for (Index k = 0; k < n_columns; ++k) {
        PredictiveScore::Part part;
        part.dim_q = spec.dim;
        part.n_predictions = 1;
        part.draw = [](const Matrix&, Rng&) -> Matrix {
            throw InvalidArgument("score_from_columns: predictions must be supplied by the caller");
        };
        part.eval = [rows = spec.rows](const Matrix& x, const Matrix& predictions, const Vector& theta) {
            return rows(predictions.col(0), x, theta);
        };
        parts.push_back(std::move(part));
    }
    return PredictiveScore(std::move(parts));
}

PredictiveScore concat_scores(const PredictiveScore& f1, const PredictiveScore& f2) {
    std::vector<PredictiveScore::Part> parts = f1.parts();
    parts.insert(parts.end(), f2.parts().begin(), f2.parts().end());
    return PredictiveScore(std::move(parts));
}

PredictiveScore basis_score(BasisKind kind, Index p) {
    if (p < 1) {
        throw InvalidArgument("basis_score: p must be at least 1");
    }
    PredictiveScore::Part part;
    part.n_predictions = 0;
    part.draw = [](const Matrix& x, Rng&) -> Matrix { return Matrix(x.rows(), 0); };
    if (kind == BasisKind::linear) {
        part.dim_q = p;
        part.eval = [](const Matrix& x, const Matrix&, const Vector&) -> Matrix { return x; };
    } else {
        part.dim_q = 2 * p;
        part.eval = [](const Matrix& x, const Matrix&, const Vector&) -> Matrix {
            Matrix out(x.rows(), 2 * x.cols());
            out.leftCols(x.cols()) = x;
            out.rightCols(x.cols()) = x.array().square().matrix();
            return out;
        };
    }
    return PredictiveScore({std::move(part)});
}

BoundScore::BoundScore(PredictiveScore score, Matrix x, Matrix predictions)
    : score_(std::move(score)), x_(std::move(x)), predictions_(std::move(predictions)) {
    if (predictions_.rows() != x_.rows() || predictions_.cols() != score_.n_predictions()) {
        throw InvalidArgument("bound score: prediction cache has the wrong shape");
    }
    if (!predictions_.allFinite()) {
        throw InvalidArgument("bound score: predictions contain non-finite values");
    }
}

BoundScore BoundScore::bind(const PredictiveScore& score, const Matrix& x, Rng& noise) {
    return BoundScore(score, x, score.draw(x, noise));
}

Matrix BoundScore::rows(const Theta& theta) const {
    return score_.eval(x_, predictions_, theta.values());
}

}  // namespace pdc
