#include "sasse/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <set>
#include <string>

namespace sasse {

void BenchSpec::validate() const {
    if (n_list.empty()) throw ConfigError("bench spec needs at least one N");
    for (std::size_t i = 1; i < n_list.size(); ++i) {
        if (n_list[i] <= n_list[i - 1]) throw ConfigError("N list must be strictly increasing");
    }
    if (!(target_translation_m > 0.0) || !(target_rotation_deg > 0.0))
        throw ConfigError("error targets must be positive");
    if (!valid_precision(b)) throw ConfigError("precision b must be 16, 32 or 64");
    if (k_grid.empty()) throw ConfigError("k grid must not be empty");
    if (repetitions < 1) throw ConfigError("repetitions must be positive");
}

std::vector<std::size_t> BenchSpec::effective_r_grid() const {
    const std::size_t bits = std::size_t(7) * static_cast<std::size_t>(b);
    std::vector<std::size_t> grid = r_grid;
    if (grid.empty()) grid = {10, 20, 50, bits / 2, bits};
    std::set<std::size_t> unique;
    for (std::size_t r : grid) {
        if (r >= 1 && r <= bits) unique.insert(r);
    }
    if (unique.empty()) throw ConfigError("r grid has no entry in [1, 7b]");
    return {unique.begin(), unique.end()};
}

ScalingBenchResult bench_scaling(const BenchSpec& spec, std::ostream* progress) {
    spec.validate();
    const auto r_grid = spec.effective_r_grid();

    struct GridEntry {
        std::uint64_t storage;
        std::size_t r, k;
    };
    std::vector<GridEntry> grid;
    for (std::size_t r : r_grid) {
        for (std::size_t k : spec.k_grid) {
            grid.push_back({storage_bytes(spec.d, r, spec.b, k), r, k});
        }
    }
    std::sort(grid.begin(), grid.end(), [](const GridEntry& a, const GridEntry& b) {
        return a.storage != b.storage ? a.storage < b.storage
                                      : (a.r != b.r ? a.r < b.r : a.k < b.k);
    });

    ScalingBenchResult result;
    std::vector<std::pair<double, double>> fit_points;
    for (std::size_t ni = 0; ni < spec.n_list.size(); ++ni) {
        const std::size_t n = spec.n_list[ni];
        // generate_synthetic splits 50/50, so request 2N items to train on N.
        const auto [train_set, test_set] =
            generate_synthetic(spec.k_true, 2 * n, spec.d, spec.noise_sigma, spec.seed + ni);

        ScalingPoint point;
        point.n = n;
        for (const GridEntry& entry : grid) {
            if (entry.k > train_set.size()) continue;
            // Averaged over `repetitions` reseeded fits so borderline grid
            // points do not flip on training randomness.
            double sum_trans = 0.0, sum_rot = 0.0;
            bool usable = true;
            for (std::size_t rep = 0; rep < spec.repetitions && usable; ++rep) {
                TrainConfig cfg;
                cfg.r = entry.r;
                cfg.k = entry.k;
                cfg.b = spec.b;
                cfg.seed = spec.seed + 1000 * rep;
                try {
                    const ModelBundle bundle = train(train_set, cfg);
                    const EvalReport report = evaluate(bundle, test_set);
                    usable = report.medians_defined;
                    sum_trans += report.median_translation_error_m;
                    sum_rot += report.median_rotation_error_deg;
                } catch (const ClusterTooSmall&) {
                    usable = false;  // this k is too fine for the data at this N
                }
            }
            if (!usable) continue;
            const double trans = sum_trans / static_cast<double>(spec.repetitions);
            const double rot = sum_rot / static_cast<double>(spec.repetitions);
            if (trans <= spec.target_translation_m && rot <= spec.target_rotation_deg) {
                point.reached = true;
                point.r = entry.r;
                point.k = entry.k;
                point.storage = entry.storage;
                point.median_translation_m = trans;
                point.median_rotation_deg = rot;
                break;
            }
        }
        if (progress) {
            if (point.reached) {
                *progress << "N=" << n << " S_min=" << point.storage << " bytes (r=" << point.r
                          << ", k=" << point.k << ", " << point.median_translation_m << " m, "
                          << point.median_rotation_deg << " deg)\n";
            } else {
                *progress << "N=" << n << " TargetUnreachable: no grid point meets the targets\n";
            }
        }
        if (point.reached) {
            fit_points.emplace_back(static_cast<double>(n),
                                    static_cast<double>(point.storage) / (1024.0 * 1024.0));
        }
        result.points.push_back(point);
    }

    if (fit_points.size() < 3)
        throw DegenerateFit("fewer than 3 reachable points; cannot fit the scaling curve");
    result.fit = fit_scaling_curve(fit_points);
    return result;
}

LatencyStats bench_latency(const ModelBundle& bundle, const Dataset& data,
                           std::size_t repetitions) {
    if (repetitions == 0) throw ConfigError("repetitions must be positive");
    data.validate();
    if (data.d != bundle.d)
        throw DimensionMismatch("dataset dimension does not match the model");

    constexpr std::size_t kWarmup = 10;
    std::vector<double> times_ms;
    times_ms.reserve(repetitions);
    for (std::size_t call = 0; call < kWarmup + repetitions; ++call) {
        const auto& x = data.items[call % data.size()].descriptor.values;
        const auto t0 = std::chrono::steady_clock::now();
        const PoseOrFailure out = predict(bundle, x);
        const auto t1 = std::chrono::steady_clock::now();
        (void)out;
        if (call >= kWarmup)
            times_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    std::sort(times_ms.begin(), times_ms.end());

    const auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(times_ms.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, times_ms.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return times_ms[lo] * (1.0 - frac) + times_ms[hi] * frac;
    };

    LatencyStats stats;
    stats.repetitions = repetitions;
    stats.median_ms = quantile(0.5);
    stats.q1_ms = quantile(0.25);
    stats.q3_ms = quantile(0.75);
    stats.min_ms = times_ms.front();
    stats.max_ms = times_ms.back();
    return stats;
}

}  // namespace sasse
