// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion carries its runtime budget in the printed line.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sasse/bench.hpp"
#include "sasse/datasets.hpp"
#include "sasse/kernels.hpp"
#include "sasse/label_embed.hpp"
#include "sasse/model_io.hpp"
#include "sasse/pgo.hpp"
#include "sasse/pipeline.hpp"
#include "sasse/posecodec.hpp"
#include "sasse/ridge.hpp"
#include "sasse/util.hpp"

using namespace sasse;

namespace {

struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::string&)> run;
};

Eigen::MatrixXd random_binary(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Eigen::MatrixXd y(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) y(i, j) = rng.uniform() < 0.5 ? 0.0 : 1.0;
    }
    return y;
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.gaussian();
    }
    return m;
}

// ---- criterion 1: storage formula exactness --------------------------------

bool storage_formula(std::string& detail) {
    bool ok = storage_bytes(128, 50, 16, 1) == 96000 && storage_bytes(128, 50, 16, 4) == 387096;

    const auto [train_set, test_set] = generate_synthetic(2, 80, 16, 0.01, 1001);
    TrainConfig cfg;
    cfg.r = 12;
    cfg.k = 2;
    const ModelBundle bundle = train(train_set, cfg);

    // Byte-for-byte: sum the real-valued section sizes of a serialized file.
    std::ostringstream file;
    save_model(bundle, file);
    std::istringstream manifest(file.str());
    std::string line;
    std::uint64_t payload = 0;
    while (std::getline(manifest, line) && line != "end") {
        std::istringstream row(line);
        std::string key, name;
        std::uint64_t offset = 0, bytes = 0;
        row >> key;
        if (key != "section") continue;
        row >> name >> offset >> bytes;
        const bool is_index = name.size() > 4 && name.substr(name.size() - 4) == ".idx";
        if (!is_index && name != "centroids") payload += bytes;
    }
    const std::uint64_t expected = storage_bytes(train_set.d, cfg.r, cfg.b, cfg.k);
    ok = ok && payload == expected && parameter_payload_bytes(bundle) == expected;
    detail = "formula values 96000/387096; serialized payload " + std::to_string(payload) +
             " = " + std::to_string(expected) + " bytes";
    return ok;
}

// ---- criterion 2: codec round trips -----------------------------------------

bool codec_roundtrip(std::string& detail) {
    if (encode_scalar_pattern(1.5, 16) != 0x3E00 || value_of_pattern(0x3E00, 16) != 1.5) {
        detail = "1.5 <-> 0x3E00 failed";
        return false;
    }
    Rng rng(1002);
    std::size_t checked16 = 0, checked32 = 0, checked64 = 0;
    for (std::size_t trial = 0; trial < 100000; ++trial) {
        // b = 16: random finite half pattern, bit-exact round trip.
        std::uint16_t hp;
        do {
            hp = static_cast<std::uint16_t>(rng.next_u64());
        } while ((hp & 0x7C00) == 0x7C00);  // skip Inf/NaN patterns
        const double hv = value_of_pattern(hp, 16);
        if (encode_scalar_pattern(hv, 16) != hp) {
            detail = "binary16 round trip failed at pattern " + std::to_string(hp);
            return false;
        }
        ++checked16;

        // b = 32: random finite float pattern.
        std::uint32_t fp;
        float fv;
        do {
            fp = static_cast<std::uint32_t>(rng.next_u64());
            fv = std::bit_cast<float>(fp);
        } while (!std::isfinite(fv));
        if (encode_scalar_pattern(static_cast<double>(fv), 32) != fp) {
            detail = "binary32 round trip failed at pattern " + std::to_string(fp);
            return false;
        }
        ++checked32;

        // b = 64: any finite double is exact.
        const double dv = rng.gaussian() * std::pow(10.0, rng.uniform(-20.0, 20.0));
        const auto bits = encode_scalar(dv, 64);
        if (decode_scalar(bits, 64) != dv) {
            detail = "binary64 round trip failed";
            return false;
        }
        ++checked64;
    }
    detail = std::to_string(checked16) + "/" + std::to_string(checked32) + "/" +
             std::to_string(checked64) + " exact round trips for b=16/32/64";
    return true;
}

// ---- criterion 3: ridge solution quality ------------------------------------

bool ridge_quality(std::string& detail) {
    Rng rng(1003);
    const Eigen::MatrixXd x = random_matrix(200, 64, rng);
    const Eigen::MatrixXd yc = random_matrix(200, 10, rng);
    const double lambda = 0.1;
    const RegressorModel model = fit_ridge(x, yc, lambda);

    Eigen::MatrixXd gram = x.transpose() * x;
    gram.diagonal().array() += lambda;
    const Eigen::MatrixXd rhs = x.transpose() * yc;
    const double ne_resid = (gram * model.w - rhs).norm() / rhs.norm();

    // Central finite differences of the objective at the solution.
    const auto objective = [&](const Eigen::MatrixXd& w) {
        return (x * w - yc).squaredNorm() + lambda * w.squaredNorm();
    };
    Eigen::MatrixXd probe = model.w;
    double grad_norm2 = 0.0;
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < probe.rows(); ++i) {
        for (Eigen::Index j = 0; j < probe.cols(); ++j) {
            const double w0 = probe(i, j);
            probe(i, j) = w0 + h;
            const double up = objective(probe);
            probe(i, j) = w0 - h;
            const double down = objective(probe);
            probe(i, j) = w0;
            const double g = (up - down) / (2.0 * h);
            grad_norm2 += g * g;
        }
    }
    const double grad_rel = std::sqrt(grad_norm2) / (2.0 * rhs).norm();

    std::ostringstream ss;
    ss << "normal-equation residual " << ne_resid << " (< 1e-8), fd gradient " << grad_rel
       << " (< 1e-6 relative)";
    detail = ss.str();
    return ne_resid < 1e-8 && grad_rel < 1e-6;
}

// ---- criterion 4: CSS oracle equivalence ------------------------------------

bool css_oracle(std::string& detail) {
    Rng rng(1004);
    int greedy_matches = 0;
    for (int instance = 0; instance < 10; ++instance) {
        const Eigen::MatrixXd y = random_binary(20, 10, rng);
        const auto brute = select_columns(y, 3, CssStrategy::bruteforce, 0);
        const double brute_res = css_residual(y, brute);

        // Independent enumeration of all C(10, 3) = 120 subsets.
        double min_res = std::numeric_limits<double>::infinity();
        std::vector<std::uint32_t> subset(3);
        for (std::uint32_t a = 0; a < 10; ++a) {
            for (std::uint32_t b = a + 1; b < 10; ++b) {
                for (std::uint32_t c = b + 1; c < 10; ++c) {
                    subset = {a, b, c};
                    min_res = std::min(min_res, css_residual(y, subset));
                }
            }
        }
        if (brute_res > min_res + 1e-9) {
            detail = "bruteforce missed the enumeration minimum on instance " +
                     std::to_string(instance);
            return false;
        }

        const double greedy_res = css_residual(y, select_columns(y, 3, CssStrategy::greedy, 0));
        if (greedy_res < brute_res - 1e-9) {
            detail = "greedy beat bruteforce on instance " + std::to_string(instance);
            return false;
        }
        if (greedy_res <= brute_res + 1e-9) ++greedy_matches;
    }
    detail = "bruteforce minimal on 10/10; greedy matched the optimum on " +
             std::to_string(greedy_matches) + "/10 (diagnostic target >= 5)";
    return true;
}

// ---- criterion 5: memorization ------------------------------------------------

bool memorization(std::string& detail) {
    Rng rng(1005);
    Dataset ds;
    ds.d = 128;
    for (int i = 0; i < 64; ++i) {
        DatasetItem item;
        item.id = "mem-" + std::to_string(i);
        item.descriptor.values.resize(ds.d);
        for (double& v : item.descriptor.values) v = rng.gaussian();
        PoseVector p;
        for (double& v : p.q) v = rng.gaussian();
        for (double& v : p.t) v = rng.uniform(-8.0, 8.0);
        item.pose = canonicalize_pose(p);
        ds.items.push_back(std::move(item));
    }
    TrainConfig cfg;
    cfg.r = 112;
    cfg.k = 1;
    cfg.b = 16;
    cfg.lambda = 1e-8;
    const ModelBundle bundle = train(ds, cfg);

    const double t_bound = std::pow(2.0, -10) * 8.0;  // 2^-10 x pose magnitude bound
    std::size_t recovered = 0;
    double worst_t = 0.0, worst_r = 0.0;
    for (const auto& item : ds.items) {
        const PoseOrFailure out = predict(bundle, item.descriptor.values);
        if (!std::holds_alternative<PoseVector>(out)) continue;
        const PoseVector got = std::get<PoseVector>(out);
        const double terr = translation_error_m(got.t, item.pose.t);
        const double rerr = rotation_error_deg(got.q, item.pose.q);
        worst_t = std::max(worst_t, terr);
        worst_r = std::max(worst_r, rerr);
        if (terr <= t_bound && rerr <= 0.2) ++recovered;
    }
    std::ostringstream ss;
    ss << recovered << "/64 poses recovered; worst " << worst_t << " m / " << worst_r
       << " deg (bounds " << t_bound << " m, 0.2 deg)";
    detail = ss.str();
    return recovered == 64;
}

// ---- criterion 6: end-to-end synthetic generalization ------------------------

bool end_to_end(std::string& detail) {
    const auto [train_set, test_set] = generate_synthetic(4, 2000, 64, 0.01, 1006);
    TrainConfig cfg;
    cfg.r = 50;
    cfg.k = 4;
    cfg.seed = 1006;
    const ModelBundle bundle = train(train_set, cfg);
    const EvalReport report = evaluate(bundle, test_set);
    std::ostringstream ss;
    ss << "median " << report.median_translation_error_m << " m (<= 0.05), "
       << report.median_rotation_error_deg << " deg (<= 1.0), failure rate "
       << report.decode_failure_rate << " (<= 0.01)";
    detail = ss.str();
    return report.medians_defined && report.median_translation_error_m <= 0.05 &&
           report.median_rotation_error_deg <= 1.0 && report.decode_failure_rate <= 0.01;
}

// ---- criterion 7: monotone capacity in r --------------------------------------

bool monotone_capacity(std::string& detail) {
    const auto [train_set, test_set] = generate_synthetic(4, 2000, 64, 0.01, 1006);
    std::vector<double> errs;
    for (std::size_t r : {10u, 20u, 100u}) {
        TrainConfig cfg;
        cfg.r = r;
        cfg.k = 4;
        cfg.seed = 1006;
        const ModelBundle bundle = train(train_set, cfg);
        const EvalReport report = evaluate(bundle, test_set);
        if (!report.medians_defined) {
            detail = "all decodes failed at r=" + std::to_string(r);
            return false;
        }
        errs.push_back(report.median_translation_error_m);
    }
    std::ostringstream ss;
    ss << "median translation at r=10/20/100: " << errs[0] << " / " << errs[1] << " / " << errs[2]
       << " m (10% slack per comparison)";
    detail = ss.str();
    return errs[2] <= 1.1 * errs[1] && errs[1] <= 1.1 * errs[0];
}

// ---- criterion 8: PGO ---------------------------------------------------------

bool pgo_checks(std::string& detail) {
    Rng rng(1008);
    const auto random_pose = [&]() {
        PoseVector p;
        for (double& v : p.q) v = rng.gaussian();
        for (double& v : p.t) v = rng.uniform(-5.0, 5.0);
        return canonicalize_pose(p);
    };
    const auto chain = [&](const std::vector<PoseVector>& poses) {
        std::vector<RelativePoseEdge> edges;
        for (std::size_t i = 0; i + 1 < poses.size(); ++i) {
            RelativePoseEdge e;
            e.i = i;
            e.j = i + 1;
            e.q = {1, 0, 0, 0};
            const std::array<double, 4> conj{poses[i].q[0], -poses[i].q[1], -poses[i].q[2],
                                             -poses[i].q[3]};
            e.t = rotate_by_quaternion(conj, {poses[i + 1].t[0] - poses[i].t[0],
                                              poses[i + 1].t[1] - poses[i].t[1],
                                              poses[i + 1].t[2] - poses[i].t[2]});
            edges.push_back(e);
        }
        return edges;
    };

    // Consistent-edge fixpoint.
    Window fix;
    for (int i = 0; i < 7; ++i) fix.frames.push_back(random_pose());
    fix.edges = chain(fix.frames);
    const auto fixed = refine_window(fix);
    double fix_err = 0.0;
    for (std::size_t i = 0; i < fix.frames.size(); ++i) {
        for (int a = 0; a < 3; ++a) {
            fix_err = std::max(fix_err, std::abs(fixed[i][static_cast<std::size_t>(a)] -
                                                 fix.frames[i].t[static_cast<std::size_t>(a)]));
        }
    }
    if (fix_err > 1e-10) {
        detail = "fixpoint deviation " + std::to_string(fix_err);
        return false;
    }

    // 100 random noisy windows: objective non-increase plus dense-oracle match.
    double worst_oracle = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Window w;
        const std::size_t frames = 3 + rng.index(8);
        for (std::size_t i = 0; i < frames; ++i) w.frames.push_back(random_pose());
        w.edges = chain(w.frames);
        for (auto& e : w.edges) {
            for (double& v : e.t) v += 0.2 * rng.gaussian();
        }
        const auto refined = refine_window(w);

        std::vector<std::array<double, 3>> init;
        for (const auto& f : w.frames) init.push_back(f.t);
        const double before = window_objective(w, init);
        const double after = window_objective(w, refined);
        if (after > before + 1e-12 * std::max(1.0, before)) {
            detail = "objective increased on window " + std::to_string(trial);
            return false;
        }

        // Dense 3T x 3T normal equations, assembled independently.
        const Eigen::Index dim = static_cast<Eigen::Index>(3 * frames);
        Eigen::MatrixXd h = Eigen::MatrixXd::Identity(dim, dim);
        Eigen::VectorXd rhs(dim);
        for (std::size_t i = 0; i < frames; ++i) {
            for (int a = 0; a < 3; ++a)
                rhs(static_cast<Eigen::Index>(3 * i + static_cast<std::size_t>(a))) =
                    w.frames[i].t[static_cast<std::size_t>(a)];
        }
        for (const auto& e : w.edges) {
            const auto c = rotate_by_quaternion(w.frames[e.i].q, e.t);
            for (int a = 0; a < 3; ++a) {
                const Eigen::Index ri = static_cast<Eigen::Index>(3 * e.i + static_cast<std::size_t>(a));
                const Eigen::Index rj = static_cast<Eigen::Index>(3 * e.j + static_cast<std::size_t>(a));
                h(ri, ri) += 1.0;
                h(rj, rj) += 1.0;
                h(ri, rj) -= 1.0;
                h(rj, ri) -= 1.0;
                rhs(rj) += c[static_cast<std::size_t>(a)];
                rhs(ri) -= c[static_cast<std::size_t>(a)];
            }
        }
        const Eigen::VectorXd dense = Eigen::LDLT<Eigen::MatrixXd>(h).solve(rhs);
        for (std::size_t i = 0; i < frames; ++i) {
            for (int a = 0; a < 3; ++a) {
                worst_oracle = std::max(
                    worst_oracle,
                    std::abs(dense(static_cast<Eigen::Index>(3 * i + static_cast<std::size_t>(a))) -
                             refined[i][static_cast<std::size_t>(a)]));
            }
        }
    }
    std::ostringstream ss;
    ss << "fixpoint " << fix_err << " (<= 1e-10); 100 windows objective-safe; oracle gap "
       << worst_oracle << " (<= 1e-8)";
    detail = ss.str();
    return worst_oracle <= 1e-8;
}

// ---- criterion 9: sub-linear scaling ------------------------------------------

bool sublinear_scaling(std::string& detail) {
    BenchSpec spec;
    spec.n_list = {500, 1000, 2000, 4000, 8000};
    spec.target_translation_m = 0.05;
    spec.target_rotation_deg = 1.0;
    spec.seed = 1009;
    const ScalingBenchResult result = bench_scaling(spec);
    std::ostringstream ss;
    ss << "S_min bytes:";
    for (const auto& p : result.points) {
        ss << " " << (p.reached ? std::to_string(p.storage) : std::string("unreachable"));
    }
    ss << "; fitted a = " << result.fit.a << " (< 1.0), b = " << result.fit.b_off
       << ", MSE = " << result.fit.mse;
    detail = ss.str();
    return result.fit.a < 1.0;
}

// ---- criterion 10: latency -----------------------------------------------------

bool latency(std::string& detail) {
    const auto [train_set, test_set] = generate_synthetic(4, 600, 4096, 0.01, 1010);
    TrainConfig cfg;
    cfg.r = 50;
    cfg.k = 4;
    cfg.seed = 1010;
    const ModelBundle bundle = train(train_set, cfg);
    const LatencyStats stats = bench_latency(bundle, test_set, 200);
    std::ostringstream ss;
    ss << "median " << stats.median_ms << " ms/frame at d=4096, r=50, k=4 (<= 10 ms; "
       << kernels::name(kernels::active()) << " kernels)";
    detail = ss.str();
    return stats.median_ms <= 10.0;
}

// ---- criterion 11: curve-fit correctness ---------------------------------------

bool curve_fit(std::string& detail) {
    std::vector<std::pair<double, double>> points;
    for (double n : {300.0, 400.0, 550.0, 700.0, 850.0, 1000.0}) {
        points.emplace_back(n, std::pow(n, 0.28) - 4.8);
    }
    const ScalingFit fit = fit_scaling_curve(points);
    std::ostringstream ss;
    ss << "recovered a = " << fit.a << ", b = " << fit.b_off << " (targets 0.28, -4.8 within 1e-3)";
    detail = ss.str();
    return std::abs(fit.a - 0.28) <= 1e-3 && std::abs(fit.b_off + 4.8) <= 1e-3;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "storage formula exactness", storage_formula},
        {2, "codec round-trip exactness", codec_roundtrip},
        {3, "ridge normal equations and gradient", ridge_quality},
        {4, "CSS oracle equivalence", css_oracle},
        {5, "memorization at full embedding", memorization},
        {6, "end-to-end synthetic generalization", end_to_end},
        {7, "monotone capacity in r", monotone_capacity},
        {8, "pose-graph refinement", pgo_checks},
        {9, "sub-linear storage scaling", sublinear_scaling},
        {10, "predict latency", latency},
        {11, "scaling curve-fit recovery", curve_fit},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = criterion.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] criterion %2d: %s (%.2f s) -- %s\n", ok ? "PASS" : "FAIL", criterion.id,
                    criterion.name, seconds, detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
