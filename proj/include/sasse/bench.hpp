#pragma once

#include <iosfwd>
#include <optional>

#include "sasse/datasets.hpp"

namespace sasse {

struct BenchSpec {
    std::vector<std::size_t> n_list;  // strictly increasing training sizes
    double target_translation_m = 0.05;
    double target_rotation_deg = 1.0;
    std::vector<std::size_t> r_grid;  // empty: {10, 20, 50, 7b/2, 7b}
    std::vector<std::size_t> k_grid = {1, 2, 4, 8};
    std::size_t repetitions = 1;  // reseeded fits averaged per grid point
    std::uint64_t seed = 0;

    // Synthetic family the sweep runs on.
    std::size_t k_true = 4;
    std::size_t d = 64;
    double noise_sigma = 0.01;
    int b = 16;

    void validate() const;
    std::vector<std::size_t> effective_r_grid() const;
};

struct ScalingPoint {
    std::size_t n = 0;
    bool reached = false;  // false: TargetUnreachable at this N
    std::size_t r = 0;
    std::size_t k = 0;
    std::uint64_t storage = 0;
    double median_translation_m = 0.0;
    double median_rotation_deg = 0.0;
};

struct ScalingBenchResult {
    std::vector<ScalingPoint> points;
    ScalingFit fit;  // over (N, S in MB) of the reached points
};

// For each N: sweep the (r, k) grid in ascending storage order and record
// the first configuration meeting both error targets on held-out data, then
// fit S = N^a + b over the reached points. Throws DegenerateFit when fewer
// than 3 points remain. Progress rows go to *progress when given.
ScalingBenchResult bench_scaling(const BenchSpec& spec, std::ostream* progress = nullptr);

struct LatencyStats {
    double median_ms = 0.0;
    double q1_ms = 0.0;
    double q3_ms = 0.0;
    double min_ms = 0.0;
    double max_ms = 0.0;
    std::size_t repetitions = 0;
};

// Median and quartiles of single-threaded per-frame predict wall time,
// cycling through the dataset; the first 10 warmup calls are excluded.
LatencyStats bench_latency(const ModelBundle& bundle, const Dataset& data,
                           std::size_t repetitions);

}  // namespace sasse
