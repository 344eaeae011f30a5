#include "sasse/cluster_route.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sasse/kernels.hpp"
#include "sasse/util.hpp"

namespace sasse {

namespace {

constexpr int kMaxLloydIters = 100;
constexpr double kCentroidTol = 1e-6;

MatrixRM descriptor_matrix(const Dataset& dataset) {
    MatrixRM x(static_cast<Eigen::Index>(dataset.size()), static_cast<Eigen::Index>(dataset.d));
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        for (std::size_t j = 0; j < dataset.d; ++j) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                dataset.items[i].descriptor.values[j];
        }
    }
    return x;
}

// k-means++ seeding: first center uniform, the rest proportional to the
// squared distance to the nearest chosen center.
MatrixRM init_centroids(const MatrixRM& x, std::size_t k, Rng& rng) {
    const std::size_t n = static_cast<std::size_t>(x.rows());
    const std::size_t d = static_cast<std::size_t>(x.cols());
    MatrixRM centroids(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
    std::vector<double> dist2(n, std::numeric_limits<double>::infinity());

    std::size_t first = rng.index(n);
    centroids.row(0) = x.row(static_cast<Eigen::Index>(first));
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d2 = kernels::sqdist(x.row(static_cast<Eigen::Index>(i)).data(),
                                              centroids.row(static_cast<Eigen::Index>(c - 1)).data(), d);
            dist2[i] = std::min(dist2[i], d2);
            total += dist2[i];
        }
        std::size_t chosen = 0;
        if (total > 0.0) {
            double target = rng.uniform() * total;
            for (std::size_t i = 0; i < n; ++i) {
                target -= dist2[i];
                if (target < 0.0) {
                    chosen = i;
                    break;
                }
                chosen = i;
            }
        } else {
            chosen = rng.index(n);
        }
        centroids.row(static_cast<Eigen::Index>(c)) = x.row(static_cast<Eigen::Index>(chosen));
    }
    return centroids;
}

std::uint32_t nearest_centroid(const MatrixRM& centroids, const double* point, std::size_t d) {
    std::uint32_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
        const double d2 = kernels::sqdist(point, centroids.row(c).data(), d);
        if (d2 < best_d2) {
            best_d2 = d2;
            best = static_cast<std::uint32_t>(c);
        }
    }
    return best;
}

}  // namespace

Partition partition_data(const Dataset& dataset, std::size_t k, std::uint64_t seed) {
    dataset.validate();
    const std::size_t n = dataset.size();
    const std::size_t d = dataset.d;
    if (k < 1) throw ConfigError("cluster count k must be at least 1");
    if (k > n)
        throw KTooLarge("k = " + std::to_string(k) + " exceeds the dataset size " +
                        std::to_string(n));

    const MatrixRM x = descriptor_matrix(dataset);
    Partition part;
    part.k = k;
    part.assignments.assign(n, 0);

    if (k == 1) {
        part.centroids = x.colwise().mean();
        return part;
    }

    Rng rng(seed);
    MatrixRM centroids = init_centroids(x, k, rng);
    std::vector<std::size_t> counts(k, 0);

    for (int iter = 0; iter < kMaxLloydIters; ++iter) {
        // Assignment step.
        for (std::size_t i = 0; i < n; ++i) {
            part.assignments[i] = nearest_centroid(centroids, x.row(static_cast<Eigen::Index>(i)).data(), d);
        }

        // Repair empty clusters: move the farthest point of the largest
        // cluster onto the empty centroid.
        std::fill(counts.begin(), counts.end(), 0);
        for (std::uint32_t a : part.assignments) ++counts[a];
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            const std::size_t largest =
                static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) -
                                         counts.begin());
            double far_d2 = -1.0;
            std::size_t far_i = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (part.assignments[i] != largest) continue;
                const double d2 =
                    kernels::sqdist(x.row(static_cast<Eigen::Index>(i)).data(),
                                    centroids.row(static_cast<Eigen::Index>(largest)).data(), d);
                if (d2 > far_d2) {
                    far_d2 = d2;
                    far_i = i;
                }
            }
            part.assignments[far_i] = static_cast<std::uint32_t>(c);
            centroids.row(static_cast<Eigen::Index>(c)) = x.row(static_cast<Eigen::Index>(far_i));
            --counts[largest];
            ++counts[c];
        }

        // Update step.
        MatrixRM next = MatrixRM::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < n; ++i) {
            next.row(static_cast<Eigen::Index>(part.assignments[i])) +=
                x.row(static_cast<Eigen::Index>(i));
        }
        for (std::size_t c = 0; c < k; ++c) {
            next.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(counts[c]);
        }

        const double movement = (next - centroids).rowwise().norm().maxCoeff();
        centroids = std::move(next);
        if (movement < kCentroidTol) break;
    }

    // Final assignment against the converged centroids.
    for (std::size_t i = 0; i < n; ++i) {
        part.assignments[i] = nearest_centroid(centroids, x.row(static_cast<Eigen::Index>(i)).data(), d);
    }
    std::fill(counts.begin(), counts.end(), 0);
    for (std::uint32_t a : part.assignments) ++counts[a];
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] > 0) continue;
        const std::size_t largest = static_cast<std::size_t>(
            std::max_element(counts.begin(), counts.end()) - counts.begin());
        double far_d2 = -1.0;
        std::size_t far_i = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (part.assignments[i] != largest) continue;
            const double d2 = kernels::sqdist(x.row(static_cast<Eigen::Index>(i)).data(),
                                              centroids.row(static_cast<Eigen::Index>(largest)).data(), d);
            if (d2 > far_d2) {
                far_d2 = d2;
                far_i = i;
            }
        }
        part.assignments[far_i] = static_cast<std::uint32_t>(c);
        centroids.row(static_cast<Eigen::Index>(c)) = x.row(static_cast<Eigen::Index>(far_i));
        --counts[largest];
        ++counts[c];
    }

    part.centroids = std::move(centroids);
    return part;
}

namespace {

// Multinomial logistic loss with the last class as reference (score 0).
// theta is (k-1) x (d+1) row-major, bias last in each row; bias columns are
// not regularized.
struct LogisticProblem {
    const Eigen::MatrixXd& xa;  // N x (d+1), descriptors augmented with 1
    const std::vector<std::uint32_t>& labels;
    std::size_t k;
    double reg;

    double eval(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const {
        const Eigen::Index n = xa.rows();
        const Eigen::Index dp1 = xa.cols();
        const Eigen::Index rows = static_cast<Eigen::Index>(k) - 1;
        const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                             Eigen::RowMajor>>
            t(theta.data(), rows, dp1);

        Eigen::MatrixXd scores = xa * t.transpose();  // N x (k-1)
        double loss = 0.0;
        Eigen::MatrixXd resid(n, rows);  // p_j - [y == j]
        for (Eigen::Index i = 0; i < n; ++i) {
            double maxs = 0.0;  // implicit reference score
            for (Eigen::Index j = 0; j < rows; ++j) maxs = std::max(maxs, scores(i, j));
            double denom = std::exp(-maxs);  // reference class term
            for (Eigen::Index j = 0; j < rows; ++j) denom += std::exp(scores(i, j) - maxs);
            const double log_denom = std::log(denom) + maxs;
            const std::uint32_t y = labels[static_cast<std::size_t>(i)];
            const double score_y =
                y + 1 == k ? 0.0 : scores(i, static_cast<Eigen::Index>(y));
            loss += log_denom - score_y;
            for (Eigen::Index j = 0; j < rows; ++j) {
                const double p = std::exp(scores(i, j) - log_denom);
                resid(i, j) = p - (static_cast<Eigen::Index>(y) == j ? 1.0 : 0.0);
            }
        }
        loss /= static_cast<double>(n);

        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> g =
            (resid.transpose() * xa) / static_cast<double>(n);
        // L2 on weights only.
        for (Eigen::Index j = 0; j < rows; ++j) {
            for (Eigen::Index c = 0; c + 1 < dp1; ++c) {
                loss += 0.5 * reg * t(j, c) * t(j, c);
                g(j, c) += reg * t(j, c);
            }
        }
        grad = Eigen::Map<const Eigen::VectorXd>(g.data(), g.size());
        return loss;
    }
};

// Compact two-loop L-BFGS with Armijo backtracking.
Eigen::VectorXd minimize_lbfgs(const LogisticProblem& problem, Eigen::Index nparams) {
    constexpr int kHistory = 8;
    constexpr int kMaxIters = 500;
    constexpr double kGradTol = 1e-6;

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(nparams);
    Eigen::VectorXd grad(nparams);
    double loss = problem.eval(theta, grad);

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    for (int iter = 0; iter < kMaxIters; ++iter) {
        if (grad.lpNorm<Eigen::Infinity>() <= kGradTol) break;

        // Two-loop recursion.
        Eigen::VectorXd dir = -grad;
        std::vector<double> alpha(s_hist.size());
        for (std::size_t h = s_hist.size(); h-- > 0;) {
            alpha[h] = rho_hist[h] * s_hist[h].dot(dir);
            dir -= alpha[h] * y_hist[h];
        }
        if (!s_hist.empty()) {
            const auto& s = s_hist.back();
            const auto& y = y_hist.back();
            dir *= s.dot(y) / y.squaredNorm();
        }
        for (std::size_t h = 0; h < s_hist.size(); ++h) {
            const double beta = rho_hist[h] * y_hist[h].dot(dir);
            dir += (alpha[h] - beta) * s_hist[h];
        }
        if (dir.dot(grad) >= 0.0) dir = -grad;  // safeguard

        double step = 1.0;
        const double slope = grad.dot(dir);
        Eigen::VectorXd theta_next(nparams), grad_next(nparams);
        double loss_next = loss;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            theta_next = theta + step * dir;
            loss_next = problem.eval(theta_next, grad_next);
            if (loss_next <= loss + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        Eigen::VectorXd s = theta_next - theta;
        Eigen::VectorXd y = grad_next - grad;
        const double sy = s.dot(y);
        if (sy > 1e-12) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (s_hist.size() > kHistory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        theta = std::move(theta_next);
        grad = std::move(grad_next);
        loss = loss_next;
    }
    return theta;
}

}  // namespace

RoutingClassifier fit_classifier(const Dataset& dataset, const Partition& partition) {
    dataset.validate();
    if (partition.assignments.size() != dataset.size())
        throw DimensionMismatch("partition does not cover the dataset");
    const std::size_t k = partition.k;
    for (std::uint32_t a : partition.assignments) {
        if (a >= k) throw ConfigError("assignment index out of range");
    }

    RoutingClassifier clf;
    clf.k = k;
    clf.d = dataset.d;
    if (k == 1) {
        clf.hyperplanes.resize(0, static_cast<Eigen::Index>(dataset.d + 1));
        return clf;
    }

    const std::size_t n = dataset.size();
    Eigen::MatrixXd xa(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dataset.d + 1));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < dataset.d; ++j) {
            xa(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                dataset.items[i].descriptor.values[j];
        }
        xa(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(dataset.d)) = 1.0;
    }

    LogisticProblem problem{xa, partition.assignments, k, 1e-4};
    const Eigen::Index nparams =
        static_cast<Eigen::Index>((k - 1) * (dataset.d + 1));
    const Eigen::VectorXd theta = minimize_lbfgs(problem, nparams);

    clf.hyperplanes = Eigen::Map<const MatrixRM>(theta.data(), static_cast<Eigen::Index>(k - 1),
                                                 static_cast<Eigen::Index>(dataset.d + 1));
    return clf;
}

std::size_t classify(const RoutingClassifier& clf, std::span<const double> x) {
    if (x.size() != clf.d && clf.k > 1)
        throw DimensionMismatch("descriptor dimension " + std::to_string(x.size()) +
                                " does not match classifier dimension " + std::to_string(clf.d));
    if (clf.k == 1) return 0;

    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j + 1 < clf.k; ++j) {
        const double* row = clf.hyperplanes.row(static_cast<Eigen::Index>(j)).data();
        const double score = kernels::dot(row, x.data(), clf.d) + row[clf.d];
        if (score > best_score) {
            best_score = score;
            best = j;
        }
    }
    // Reference class: implicit score zero, lowest index wins ties.
    if (0.0 > best_score) best = clf.k - 1;
    return best;
}

}  // namespace sasse
