#pragma once

#include <span>

#include "sasse/types.hpp"

namespace sasse {

struct RegressorModel {
    MatrixRM w;  // d x r
    double lambda = 0.1;
};

// Closed-form solution of min ||X W - Yc||_F^2 + lambda ||W||_F^2, solved
// through a Cholesky factorization of the d x d Gram matrix, or of the
// N x N kernel matrix when N < d (identical solution by the push-through
// identity). Throws NonFiniteInput when X or Yc contains NaN/Inf.
RegressorModel fit_ridge(const Eigen::MatrixXd& x, const Eigen::MatrixXd& yc, double lambda);

// W^T x.
Eigen::VectorXd predict_reduced(const RegressorModel& model, std::span<const double> x);

}  // namespace sasse
