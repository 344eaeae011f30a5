#include "sasse/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_set>

namespace sasse {

namespace {

double quat_norm(const std::array<double, 4>& q) {
    return std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
}

}  // namespace

PoseVector canonicalize_pose(const PoseVector& p) {
    for (double v : p.q) {
        if (!std::isfinite(v)) throw DegenerateQuaternion("quaternion has non-finite components");
    }
    const double norm = quat_norm(p.q);
    if (norm <= 1e-9) throw DegenerateQuaternion("quaternion norm below 1e-9");

    PoseVector out = p;
    // Skip the division near unit norm: keeps canonicalization exactly
    // idempotent and lets canonical poses round-trip through text untouched.
    if (std::abs(norm - 1.0) > 4.0 * std::numeric_limits<double>::epsilon()) {
        for (double& v : out.q) v /= norm;
    }
    // Resolve the double cover: flip so the first nonzero component is positive.
    for (double v : out.q) {
        if (v != 0.0) {
            if (v < 0.0) {
                for (double& w : out.q) w = -w;
            }
            break;
        }
    }
    // Normalize -0.0 so canonical poses encode identically.
    for (double& v : out.q) {
        if (v == 0.0) v = 0.0;
    }
    return out;
}

bool is_canonical(const PoseVector& p, double tol) {
    const double norm = quat_norm(p.q);
    if (std::abs(norm - 1.0) > tol) return false;
    for (double v : p.q) {
        if (v != 0.0) return v > 0.0;
    }
    return false;
}

double rotation_error_deg(const std::array<double, 4>& q1, const std::array<double, 4>& q2) {
    const double dot =
        q1[0] * q2[0] + q1[1] * q2[1] + q1[2] * q2[2] + q1[3] * q2[3];
    const double clamped = std::min(1.0, std::abs(dot));
    return 2.0 * std::acos(clamped) * 180.0 / std::numbers::pi;
}

double translation_error_m(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

void Dataset::validate() const {
    if (items.empty()) throw ConfigError("dataset is empty");
    if (d == 0) throw ConfigError("descriptor dimension must be positive");
    std::unordered_set<std::string> seen;
    seen.reserve(items.size());
    for (const auto& item : items) {
        if (!seen.insert(item.id).second) throw ConfigError("duplicate item id: " + item.id);
        if (item.descriptor.dim() != d)
            throw DimensionMismatch("item " + item.id + " has descriptor dimension " +
                                    std::to_string(item.descriptor.dim()) + ", expected " +
                                    std::to_string(d));
        for (double v : item.descriptor.values) {
            if (!std::isfinite(v)) throw NonFiniteInput("item " + item.id + " has a non-finite descriptor entry");
        }
        for (double v : item.pose.flat()) {
            if (!std::isfinite(v)) throw InvalidPose("item " + item.id + " has a non-finite pose component");
        }
    }
}

const char* to_string(CssStrategy s) {
    switch (s) {
        case CssStrategy::greedy: return "greedy";
        case CssStrategy::sampled: return "sampled";
        case CssStrategy::bruteforce: return "bruteforce";
    }
    return "unknown";
}

CssStrategy css_strategy_from_string(const std::string& s) {
    if (s == "greedy") return CssStrategy::greedy;
    if (s == "sampled") return CssStrategy::sampled;
    if (s == "bruteforce") return CssStrategy::bruteforce;
    throw ConfigError("unknown css strategy '" + s + "' (expected greedy, sampled or bruteforce)");
}

void TrainConfig::validate() const {
    if (b != 16 && b != 32 && b != 64) throw ConfigError("precision b must be 16, 32 or 64");
    if (r < 1 || r > label_bits())
        throw ConfigError("embedding size r must satisfy 1 <= r <= 7b (= " +
                          std::to_string(label_bits()) + ")");
    if (k < 1) throw ConfigError("cluster count k must be at least 1");
    if (!(lambda > 0.0)) throw ConfigError("ridge regularizer lambda must be positive");
    if (!std::isfinite(threshold)) throw ConfigError("bit threshold must be finite");
}

}  // namespace sasse
