#include "sasse/label_embed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "sasse/util.hpp"

namespace sasse {

namespace {

void check_columns(const Eigen::MatrixXd& y, std::span<const std::uint32_t> columns) {
    std::vector<bool> seen(static_cast<std::size_t>(y.cols()), false);
    for (std::uint32_t c : columns) {
        if (c >= y.cols()) throw ConfigError("column index " + std::to_string(c) + " out of range");
        if (seen[c]) throw ConfigError("duplicate column index " + std::to_string(c));
        seen[c] = true;
    }
}

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& y, std::span<const std::uint32_t> columns) {
    Eigen::MatrixXd yc(y.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        yc.col(static_cast<Eigen::Index>(j)) = y.col(columns[j]);
    }
    return yc;
}

double svd_cutoff(const Eigen::JacobiSVD<Eigen::MatrixXd>& svd, Eigen::Index rows,
                  Eigen::Index cols) {
    const double sigma_max = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
    return static_cast<double>(std::max(rows, cols)) *
           std::numeric_limits<double>::epsilon() * sigma_max;
}

// Residual norm of Y after projecting out the span of Yc, via the
// rank-revealing left singular vectors of Yc.
double residual_after_projection(const Eigen::MatrixXd& y, const Eigen::MatrixXd& yc) {
    if (yc.cols() == 0) return y.norm();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(yc, Eigen::ComputeThinU);
    const double cutoff = svd_cutoff(svd, yc.rows(), yc.cols());
    Eigen::Index rank = 0;
    while (rank < svd.singularValues().size() && svd.singularValues()(rank) > cutoff) ++rank;
    if (rank == 0) return y.norm();
    const auto u = svd.matrixU().leftCols(rank);
    return (y - u * (u.transpose() * y)).norm();
}

std::vector<std::uint32_t> select_greedy(const Eigen::MatrixXd& y, std::size_t r) {
    const std::size_t cols = static_cast<std::size_t>(y.cols());
    Eigen::MatrixXd residual = y;  // columns are residualized in place
    std::vector<bool> taken(cols, false);
    std::vector<std::uint32_t> selected;
    selected.reserve(r);
    Eigen::MatrixXd basis(y.rows(), static_cast<Eigen::Index>(r));
    Eigen::Index nbasis = 0;

    const double negligible = 1e-12 * std::max(1.0, y.norm());

    for (std::size_t step = 0; step < r; ++step) {
        double best_score = 0.0;
        std::ptrdiff_t best = -1;
        for (std::size_t j = 0; j < cols; ++j) {
            if (taken[j]) continue;
            const auto rj = residual.col(static_cast<Eigen::Index>(j));
            const double norm2 = rj.squaredNorm();
            if (norm2 <= negligible * negligible) continue;
            // Frobenius reduction from adding column j: ||R^T r_j||^2 / ||r_j||^2.
            const double score = (residual.transpose() * rj).squaredNorm() / norm2;
            if (score > best_score) {
                best_score = score;
                best = static_cast<std::ptrdiff_t>(j);
            }
        }
        if (best < 0) {
            // Residual is spanned; pad with the lowest untaken indices.
            for (std::size_t j = 0; j < cols && selected.size() < r; ++j) {
                if (!taken[j]) {
                    taken[j] = true;
                    selected.push_back(static_cast<std::uint32_t>(j));
                }
            }
            break;
        }
        taken[static_cast<std::size_t>(best)] = true;
        selected.push_back(static_cast<std::uint32_t>(best));

        // Orthogonalize the chosen column against the basis (twice, to keep
        // the basis numerically orthonormal over many steps).
        Eigen::VectorXd q = y.col(best);
        for (int pass = 0; pass < 2; ++pass) {
            if (nbasis > 0) {
                const auto b = basis.leftCols(nbasis);
                q -= b * (b.transpose() * q);
            }
        }
        const double qnorm = q.norm();
        if (qnorm > negligible) {
            q /= qnorm;
            basis.col(nbasis++) = q;
            residual -= q * (q.transpose() * residual);
        }
    }
    return selected;
}

// Weighted sampling of r distinct columns, probability proportional to the
// squared column norms of Y (uniform fallback when all norms vanish).
std::vector<std::uint32_t> sample_subset(const Eigen::MatrixXd& y, std::size_t r, Rng& rng) {
    const std::size_t cols = static_cast<std::size_t>(y.cols());
    std::vector<double> weights(cols);
    double total = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
        weights[j] = y.col(static_cast<Eigen::Index>(j)).squaredNorm();
        total += weights[j];
    }
    if (total <= 0.0) {
        std::fill(weights.begin(), weights.end(), 1.0);
        total = static_cast<double>(cols);
    }
    std::vector<std::uint32_t> subset;
    subset.reserve(r);
    for (std::size_t pick = 0; pick < r; ++pick) {
        double target = rng.uniform() * total;
        std::size_t chosen = cols;
        for (std::size_t j = 0; j < cols; ++j) {
            if (weights[j] <= 0.0) continue;
            target -= weights[j];
            if (target < 0.0) {
                chosen = j;
                break;
            }
        }
        if (chosen == cols) {  // numerical tail: take the last weighted column
            for (std::size_t j = cols; j-- > 0;) {
                if (weights[j] > 0.0) {
                    chosen = j;
                    break;
                }
            }
        }
        subset.push_back(static_cast<std::uint32_t>(chosen));
        total -= weights[chosen];
        weights[chosen] = 0.0;
        if (total <= 0.0) {
            // Remaining weights exhausted; fall back to uniform over the rest.
            double rest = 0.0;
            for (std::size_t j = 0; j < cols; ++j) {
                if (weights[j] == 0.0 &&
                    std::find(subset.begin(), subset.end(), static_cast<std::uint32_t>(j)) ==
                        subset.end()) {
                    weights[j] = 1.0;
                }
                rest += weights[j];
            }
            total = rest;
        }
    }
    std::sort(subset.begin(), subset.end());
    return subset;
}

std::vector<std::uint32_t> select_sampled(const Eigen::MatrixXd& y, std::size_t r,
                                          std::uint64_t seed) {
    constexpr int kRestarts = 16;
    Rng rng(seed);
    std::vector<std::uint32_t> best;
    double best_residual = std::numeric_limits<double>::infinity();
    for (int m = 0; m < kRestarts; ++m) {
        auto candidate = sample_subset(y, r, rng);
        const double res = css_residual(y, candidate);
        if (res < best_residual) {
            best_residual = res;
            best = std::move(candidate);
        }
    }
    return best;
}

std::vector<std::uint32_t> select_bruteforce(const Eigen::MatrixXd& y, std::size_t r) {
    const std::size_t cols = static_cast<std::size_t>(y.cols());
    // (cols choose r) with early bail-out above the enumeration cap.
    constexpr double kMaxSubsets = 1e6;
    double count = 1.0;
    for (std::size_t i = 0; i < r; ++i) {
        count *= static_cast<double>(cols - i) / static_cast<double>(i + 1);
        if (count > kMaxSubsets) {
            throw BruteforceTooLarge("bruteforce selection over " + std::to_string(cols) +
                                     " choose " + std::to_string(r) + " exceeds 1e6 subsets");
        }
    }

    std::vector<std::uint32_t> current(r);
    std::iota(current.begin(), current.end(), 0u);
    std::vector<std::uint32_t> best = current;
    double best_residual = std::numeric_limits<double>::infinity();
    while (true) {
        const double res = css_residual(y, current);
        if (res < best_residual) {
            best_residual = res;
            best = current;
        }
        // Next lexicographic combination.
        std::ptrdiff_t i = static_cast<std::ptrdiff_t>(r) - 1;
        while (i >= 0 && current[static_cast<std::size_t>(i)] ==
                             static_cast<std::uint32_t>(cols - r + static_cast<std::size_t>(i))) {
            --i;
        }
        if (i < 0) break;
        ++current[static_cast<std::size_t>(i)];
        for (std::size_t j = static_cast<std::size_t>(i) + 1; j < r; ++j) {
            current[j] = current[j - 1] + 1;
        }
    }
    return best;
}

}  // namespace

Eigen::MatrixXd label_matrix(std::span<const BinaryLabel> labels) {
    if (labels.empty()) throw ConfigError("no labels");
    const std::size_t len = labels[0].length();
    Eigen::MatrixXd y(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(len));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i].length() != len) throw DimensionMismatch("label lengths differ");
        for (std::size_t j = 0; j < len; ++j) {
            const std::uint8_t bit = labels[i].bits[j];
            if (bit > 1) throw ConfigError("label entries must be 0 or 1");
            y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = bit;
        }
    }
    return y;
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double cutoff = svd_cutoff(svd, m.rows(), m.cols());
    Eigen::VectorXd inv = svd.singularValues();
    for (Eigen::Index i = 0; i < inv.size(); ++i) {
        inv(i) = inv(i) > cutoff ? 1.0 / inv(i) : 0.0;
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double css_residual(const Eigen::MatrixXd& y, std::span<const std::uint32_t> columns) {
    check_columns(y, columns);
    return residual_after_projection(y, gather_columns(y, columns));
}

std::vector<std::uint32_t> select_columns(const Eigen::MatrixXd& y, std::size_t r,
                                          CssStrategy strategy, std::uint64_t seed) {
    const std::size_t cols = static_cast<std::size_t>(y.cols());
    if (r < 1 || r > cols)
        throw ConfigError("embedding size r must satisfy 1 <= r <= " + std::to_string(cols));
    if (r == cols) {
        std::vector<std::uint32_t> all(cols);
        std::iota(all.begin(), all.end(), 0u);
        return all;
    }
    switch (strategy) {
        case CssStrategy::greedy: return select_greedy(y, r);
        case CssStrategy::sampled: return select_sampled(y, r, seed);
        case CssStrategy::bruteforce: return select_bruteforce(y, r);
    }
    throw ConfigError("unknown css strategy");
}

ProjectionFit fit_projection(const Eigen::MatrixXd& y, std::span<const std::uint32_t> columns) {
    check_columns(y, columns);
    ProjectionFit fit;
    fit.reduced = gather_columns(y, columns);
    fit.model.columns.assign(columns.begin(), columns.end());
    fit.model.z = pseudo_inverse(fit.reduced) * y;
    return fit;
}

std::array<std::size_t, 7> component_bit_coverage(std::span<const std::uint32_t> columns, int b) {
    if (!valid_precision(b)) throw ConfigError("precision must be 16, 32 or 64");
    std::array<std::size_t, 7> coverage{};
    for (std::uint32_t c : columns) {
        const std::size_t component = c / static_cast<std::size_t>(b);
        if (component >= 7) throw ConfigError("column index out of the 7b range");
        ++coverage[component];
    }
    return coverage;
}

}  // namespace sasse
