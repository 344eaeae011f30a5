#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "sasse/posecodec.hpp"
#include "sasse/types.hpp"

namespace sasse {

// N x 7b {0,1} matrix from encoded pose labels (one row per pose).
Eigen::MatrixXd label_matrix(std::span<const BinaryLabel> labels);

// Moore-Penrose pseudo-inverse via SVD; singular values at or below
// max(rows, cols) * eps * sigma_max are treated as zero.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m);

// Frobenius norm of Y - Y_C Y_C^+ Y, the span residual of the selected
// column set.
double css_residual(const Eigen::MatrixXd& y, std::span<const std::uint32_t> columns);

// Column subset selection. greedy: deterministic forward selection by
// residual reduction (ties to the lowest index). sampled: best of 16
// random draws weighted by squared column norms. bruteforce: exhaustive,
// rejected when (cols choose r) exceeds 1e6.
std::vector<std::uint32_t> select_columns(const Eigen::MatrixXd& y, std::size_t r,
                                          CssStrategy strategy, std::uint64_t seed);

struct EmbeddingModel {
    std::vector<std::uint32_t> columns;  // ordered, |columns| = r
    MatrixRM z;                          // r x 7b, lifts reduced labels to full labels
};

struct ProjectionFit {
    EmbeddingModel model;
    Eigen::MatrixXd reduced;  // Y_C (N x r), the downstream regression targets
};

// Z = Y_C^+ Y together with the selected columns Y_C.
ProjectionFit fit_projection(const Eigen::MatrixXd& y, std::span<const std::uint32_t> columns);

// How many selected columns fall in each of the 7 pose components; a
// coverage diagnostic for the selection step.
std::array<std::size_t, 7> component_bit_coverage(std::span<const std::uint32_t> columns, int b);

}  // namespace sasse
