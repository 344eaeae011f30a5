#include "sasse/ridge.hpp"

#include <string>

#include <Eigen/Cholesky>

#include "sasse/kernels.hpp"

namespace sasse {

RegressorModel fit_ridge(const Eigen::MatrixXd& x, const Eigen::MatrixXd& yc, double lambda) {
    if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
    if (x.rows() < 1) throw ConfigError("at least one training row is required");
    if (x.rows() != yc.rows())
        throw DimensionMismatch("X has " + std::to_string(x.rows()) + " rows, Yc has " +
                                std::to_string(yc.rows()));
    if (!x.allFinite() || !yc.allFinite())
        throw NonFiniteInput("ridge inputs contain NaN or Inf");

    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();

    RegressorModel model;
    model.lambda = lambda;
    if (n >= d) {
        Eigen::MatrixXd gram = x.transpose() * x;
        gram.diagonal().array() += lambda;
        model.w = Eigen::LDLT<Eigen::MatrixXd>(gram).solve(x.transpose() * yc);
    } else {
        // (X^T X + lI)^-1 X^T = X^T (X X^T + lI)^-1
        Eigen::MatrixXd kernel = x * x.transpose();
        kernel.diagonal().array() += lambda;
        model.w = x.transpose() * Eigen::LDLT<Eigen::MatrixXd>(kernel).solve(yc);
    }
    return model;
}

Eigen::VectorXd predict_reduced(const RegressorModel& model, std::span<const double> x) {
    const std::size_t d = static_cast<std::size_t>(model.w.rows());
    const std::size_t r = static_cast<std::size_t>(model.w.cols());
    if (x.size() != d)
        throw DimensionMismatch("descriptor dimension " + std::to_string(x.size()) +
                                " does not match regressor input dimension " + std::to_string(d));
    Eigen::VectorXd out(static_cast<Eigen::Index>(r));
    kernels::matvec_t(model.w.data(), d, r, x.data(), out.data());
    return out;
}

}  // namespace sasse
