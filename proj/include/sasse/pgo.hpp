#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "sasse/types.hpp"

namespace sasse {

// Relative pose of frame j expressed in frame i's coordinates, as produced
// by a visual odometry front end.
struct RelativePoseEdge {
    std::size_t i = 0;
    std::size_t j = 0;
    std::array<double, 3> t{0.0, 0.0, 0.0};
    std::array<double, 4> q{1.0, 0.0, 0.0, 0.0};  // unit quaternion within 1e-6
};

struct Window {
    std::vector<PoseVector> frames;       // T >= 2 consecutive predictions
    std::vector<RelativePoseEdge> edges;  // frame indices within [0, T)
};

// Translation-only refinement with rotations held fixed: minimizes
//   sum_edges ||t_j - t_i - R_i t_ij||^2 + sum_i ||t_i - t_hat_i||^2.
// The unary priors make the quadratic strictly convex, so the solution is
// the unique global optimum. Returns refined translations; rotations are
// the caller's inputs, unchanged.
std::vector<std::array<double, 3>> refine_window(const Window& w);

// Objective value of the window at the given translations.
double window_objective(const Window& w, std::span<const std::array<double, 3>> t);

// Non-overlapping [lo, hi) windows of window_size frames covering n frames.
// A trailing single frame is folded into the previous window so every
// window has at least 2 frames.
std::vector<std::pair<std::size_t, std::size_t>> window_spans(std::size_t n,
                                                              std::size_t window_size);

// Splits the trajectory into window_spans and refines each independently.
// Edges that cross a window boundary are dropped.
std::vector<PoseVector> refine_trajectory(std::span<const PoseVector> poses,
                                          std::span<const RelativePoseEdge> edges,
                                          std::size_t window_size);

// Edge file: one edge per line, "i j tx ty tz qa qb qc qd".
std::vector<RelativePoseEdge> load_edges(const std::filesystem::path& path);
void save_edges(std::span<const RelativePoseEdge> edges, const std::filesystem::path& path);

// The relative-pose residual rotation applied at frame i: R_i t_ij.
std::array<double, 3> rotate_by_quaternion(const std::array<double, 4>& q,
                                           const std::array<double, 3>& v);

}  // namespace sasse
