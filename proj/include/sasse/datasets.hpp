#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sasse/pgo.hpp"
#include "sasse/pipeline.hpp"
#include "sasse/types.hpp"

namespace sasse {

// Dataset CSV: header "id,qa,qb,qc,qd,t1,t2,t3,f0..f{d-1}", one item per
// row, full decimal precision. Poses are canonicalized on load.
Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

// Pose-only CSV ("id,qa,..,t3"), used for predictions and PGO input.
void save_poses(std::span<const std::pair<std::string, PoseVector>> poses,
                const std::filesystem::path& path);
std::vector<std::pair<std::string, PoseVector>> load_poses(const std::filesystem::path& path);

// Synthetic localization scene: k_true pose clusters with centers on a
// 10 m circle, per-cluster base orientations with small perturbations, and
// descriptors that are a cluster-specific affine image of the pose plus a
// one-hot cluster offset of magnitude 5 and Gaussian noise. Returns a
// deterministic 50/50 train/test split.
std::pair<Dataset, Dataset> generate_synthetic(std::size_t k_true, std::size_t n, std::size_t d,
                                               double noise_sigma, std::uint64_t seed);

struct QueryTimeStats {
    double median_ms = 0.0;
    double q1_ms = 0.0;
    double q3_ms = 0.0;
};

struct EvalReport {
    double median_translation_error_m = 0.0;
    double median_rotation_error_deg = 0.0;
    bool medians_defined = true;  // false when every decode failed
    double decode_failure_rate = 0.0;
    std::vector<double> per_cluster_routing_accuracy;  // empty without centroids
    QueryTimeStats query_time;
    std::size_t n_items = 0;
    std::size_t n_success = 0;
};

// Per-item prediction with optional windowed PGO refinement; medians are
// taken over successful decodes and the failure rate reported separately.
EvalReport evaluate(const ModelBundle& bundle, const Dataset& test,
                    std::span<const RelativePoseEdge> edges = {}, std::size_t window_size = 5);

void print_report(const EvalReport& report, std::ostream& out);
void write_report_kv(const EvalReport& report, std::ostream& out);

struct ScalingFit {
    double a = 0.0;      // exponent of S = N^a + b
    double b_off = 0.0;  // additive offset
    double mse = 0.0;
    std::vector<std::pair<double, double>> points;  // (N, S)
};

// Least-squares fit of S = N^a + b: golden-section search over a with the
// offset in closed form. Needs at least 3 points; throws DegenerateFit when
// every N coincides.
ScalingFit fit_scaling_curve(std::span<const std::pair<double, double>> points);

}  // namespace sasse
