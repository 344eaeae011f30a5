#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sasse/errors.hpp"

namespace sasse {

// Row-major matrix used wherever raw storage order matters (model
// parameters, serialization, kernel calls).
using MatrixRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// 6-DOF camera pose: unit quaternion (qa, qb, qc, qd) plus camera center in
// meters. Canonical form means unit norm with the first nonzero quaternion
// component positive; q and -q describe the same rotation.
struct PoseVector {
    std::array<double, 4> q{1.0, 0.0, 0.0, 0.0};
    std::array<double, 3> t{0.0, 0.0, 0.0};

    std::array<double, 7> flat() const { return {q[0], q[1], q[2], q[3], t[0], t[1], t[2]}; }

    static PoseVector from_flat(const std::array<double, 7>& v) {
        return PoseVector{{v[0], v[1], v[2], v[3]}, {v[4], v[5], v[6]}};
    }
};

// Normalizes the quaternion and fixes its sign so the first nonzero
// component is positive. Throws DegenerateQuaternion when ||q|| <= 1e-9.
PoseVector canonicalize_pose(const PoseVector& p);

bool is_canonical(const PoseVector& p, double tol = 1e-6);

// Angular distance between two unit quaternions, degrees in [0, 180].
// Symmetric and invariant under sign flips of either argument.
double rotation_error_deg(const std::array<double, 4>& q1, const std::array<double, 4>& q2);

double translation_error_m(const std::array<double, 3>& a, const std::array<double, 3>& b);

// Global image descriptor, consumed from files or the synthetic generator.
struct Descriptor {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
};

struct DatasetItem {
    std::string id;
    Descriptor descriptor;
    PoseVector pose;
};

struct Dataset {
    std::vector<DatasetItem> items;
    std::size_t d = 0;

    std::size_t size() const { return items.size(); }

    // Unique ids, uniform descriptor dimension, finite entries, N >= 1.
    void validate() const;
};

enum class CssStrategy { greedy, sampled, bruteforce };

const char* to_string(CssStrategy s);
CssStrategy css_strategy_from_string(const std::string& s);  // throws ConfigError

struct TrainConfig {
    std::size_t r = 50;    // embedding size, 1 <= r <= 7b
    std::size_t k = 1;     // cluster count
    int b = 16;            // pose encoding precision, one of 16/32/64
    double lambda = 0.1;   // ridge regularizer
    double threshold = 0.5;  // bit decision threshold tau; 0 gives the strict sign rule
    std::uint64_t seed = 0;
    CssStrategy css = CssStrategy::greedy;
    bool standardize = false;  // scale descriptor columns to unit norm before the ridge fit

    std::size_t label_bits() const { return std::size_t(7) * std::size_t(b); }

    void validate() const;  // throws ConfigError
};

}  // namespace sasse
