#include "sasse/pgo.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "sasse/util.hpp"

namespace sasse {

std::array<double, 3> rotate_by_quaternion(const std::array<double, 4>& q,
                                           const std::array<double, 3>& v) {
    // v' = v + 2 w (u x v) + 2 u x (u x v) with q = (w, u).
    const double w = q[0];
    const std::array<double, 3> u{q[1], q[2], q[3]};
    const std::array<double, 3> uxv{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2],
                                    u[0] * v[1] - u[1] * v[0]};
    const std::array<double, 3> uxuxv{u[1] * uxv[2] - u[2] * uxv[1], u[2] * uxv[0] - u[0] * uxv[2],
                                      u[0] * uxv[1] - u[1] * uxv[0]};
    return {v[0] + 2.0 * (w * uxv[0] + uxuxv[0]), v[1] + 2.0 * (w * uxv[1] + uxuxv[1]),
            v[2] + 2.0 * (w * uxv[2] + uxuxv[2])};
}

namespace {

void check_window(const Window& w) {
    const std::size_t frames = w.frames.size();
    if (frames < 2) throw ConfigError("a window needs at least 2 frames");
    for (const RelativePoseEdge& e : w.edges) {
        if (e.i >= frames || e.j >= frames)
            throw InvalidEdge("edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                              ") references a frame outside the window of " +
                              std::to_string(frames) + " frames");
        if (e.i == e.j) throw InvalidEdge("edge endpoints must differ");
        const double norm2 = e.q[0] * e.q[0] + e.q[1] * e.q[1] + e.q[2] * e.q[2] + e.q[3] * e.q[3];
        if (std::abs(norm2 - 1.0) > 2e-6)
            throw InvalidEdge("edge rotation is not orthonormal within 1e-6");
    }
}

}  // namespace

std::vector<std::array<double, 3>> refine_window(const Window& w) {
    check_window(w);
    const std::size_t frames = w.frames.size();
    const Eigen::Index t_count = static_cast<Eigen::Index>(frames);

    // The three coordinate axes decouple and share the same T x T normal
    // matrix: identity from the priors plus an incidence term per edge.
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(t_count, t_count);
    Eigen::MatrixXd rhs(t_count, 3);
    for (std::size_t i = 0; i < frames; ++i) {
        for (int a = 0; a < 3; ++a) {
            rhs(static_cast<Eigen::Index>(i), a) = w.frames[i].t[static_cast<std::size_t>(a)];
        }
    }
    for (const RelativePoseEdge& e : w.edges) {
        const Eigen::Index i = static_cast<Eigen::Index>(e.i);
        const Eigen::Index j = static_cast<Eigen::Index>(e.j);
        const std::array<double, 3> c = rotate_by_quaternion(w.frames[e.i].q, e.t);
        m(i, i) += 1.0;
        m(j, j) += 1.0;
        m(i, j) -= 1.0;
        m(j, i) -= 1.0;
        for (int a = 0; a < 3; ++a) {
            rhs(j, a) += c[static_cast<std::size_t>(a)];
            rhs(i, a) -= c[static_cast<std::size_t>(a)];
        }
    }

    const Eigen::MatrixXd solution = Eigen::LLT<Eigen::MatrixXd>(m).solve(rhs);
    std::vector<std::array<double, 3>> refined(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        for (int a = 0; a < 3; ++a) {
            refined[i][static_cast<std::size_t>(a)] = solution(static_cast<Eigen::Index>(i), a);
        }
    }
    return refined;
}

double window_objective(const Window& w, std::span<const std::array<double, 3>> t) {
    if (t.size() != w.frames.size()) throw DimensionMismatch("translation count mismatch");
    double objective = 0.0;
    for (std::size_t i = 0; i < w.frames.size(); ++i) {
        for (int a = 0; a < 3; ++a) {
            const double diff = t[i][static_cast<std::size_t>(a)] -
                                w.frames[i].t[static_cast<std::size_t>(a)];
            objective += diff * diff;
        }
    }
    for (const RelativePoseEdge& e : w.edges) {
        const std::array<double, 3> c = rotate_by_quaternion(w.frames[e.i].q, e.t);
        for (int a = 0; a < 3; ++a) {
            const std::size_t aa = static_cast<std::size_t>(a);
            const double diff = t[e.j][aa] - t[e.i][aa] - c[aa];
            objective += diff * diff;
        }
    }
    return objective;
}

std::vector<std::pair<std::size_t, std::size_t>> window_spans(std::size_t n,
                                                              std::size_t window_size) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (std::size_t lo = 0; lo < n; lo += window_size) {
        std::size_t hi = std::min(n, lo + window_size);
        // A trailing single frame joins the last window.
        if (n - lo == window_size + 1) hi = n;
        spans.emplace_back(lo, hi);
        if (hi == n) break;
    }
    return spans;
}

std::vector<PoseVector> refine_trajectory(std::span<const PoseVector> poses,
                                          std::span<const RelativePoseEdge> edges,
                                          std::size_t window_size) {
    const std::size_t n = poses.size();
    if (window_size < 2 || window_size > n)
        throw ConfigError("window size must be in [2, trajectory length]");
    for (std::size_t e = 1; e < edges.size(); ++e) {
        if (edges[e].i < edges[e - 1].i) throw ConfigError("edges must be sorted by frame index");
    }

    const auto spans = window_spans(n, window_size);

    std::vector<PoseVector> refined(poses.begin(), poses.end());
    parallel_for(spans.size(), [&](std::size_t s) {
        const auto [lo, hi] = spans[s];
        Window w;
        w.frames.assign(poses.begin() + static_cast<std::ptrdiff_t>(lo),
                        poses.begin() + static_cast<std::ptrdiff_t>(hi));
        for (const RelativePoseEdge& e : edges) {
            if (e.i >= lo && e.i < hi && e.j >= lo && e.j < hi) {
                RelativePoseEdge local = e;
                local.i -= lo;
                local.j -= lo;
                w.edges.push_back(local);
            }
        }
        const auto translations = refine_window(w);
        for (std::size_t i = lo; i < hi; ++i) {
            refined[i].t = translations[i - lo];  // rotations pass through untouched
        }
    });
    return refined;
}

std::vector<RelativePoseEdge> load_edges(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<RelativePoseEdge> edges;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        RelativePoseEdge e;
        row >> e.i >> e.j >> e.t[0] >> e.t[1] >> e.t[2] >> e.q[0] >> e.q[1] >> e.q[2] >> e.q[3];
        if (!row) throw ParseError(lineno, "expected 'i j tx ty tz qa qb qc qd'");
        edges.push_back(e);
    }
    return edges;
}

void save_edges(std::span<const RelativePoseEdge> edges, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    char buf[256];
    for (const RelativePoseEdge& e : edges) {
        std::snprintf(buf, sizeof(buf), "%zu %zu %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n",
                      e.i, e.j, e.t[0], e.t[1], e.t[2], e.q[0], e.q[1], e.q[2], e.q[3]);
        out << buf;
    }
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace sasse
