#include "sasse/datasets.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "sasse/util.hpp"

namespace sasse {

namespace {

std::string format_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& token, std::size_t lineno, const char* what) {
    if (token.empty()) throw ParseError(lineno, std::string("empty ") + what + " field");
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size())
        throw ParseError(lineno, std::string("bad ") + what + " value '" + token + "'");
    if (!std::isfinite(v))
        throw ParseError(lineno, std::string("non-finite ") + what + " value '" + token + "'");
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream row(line);
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double median_of(std::vector<double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double quantile_of(std::vector<double> sorted, double q) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

// Hamilton product (w, u)(w', u').
std::array<double, 4> quat_mul(const std::array<double, 4>& a, const std::array<double, 4>& b) {
    return {a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
            a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
            a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
            a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]};
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw ParseError(1, "missing header row");
    const auto header = split_csv(line);
    static const char* kFixed[8] = {"id", "qa", "qb", "qc", "qd", "t1", "t2", "t3"};
    bool header_ok = header.size() >= 9;
    for (int i = 0; header_ok && i < 8; ++i) header_ok = header[static_cast<std::size_t>(i)] == kFixed[i];
    for (std::size_t j = 8; header_ok && j < header.size(); ++j) {
        header_ok = header[j] == "f" + std::to_string(j - 8);
    }
    if (!header_ok) throw ParseError(1, "expected header id,qa,qb,qc,qd,t1,t2,t3,f0..f{d-1}");
    const std::size_t d = header.size() - 8;

    Dataset dataset;
    dataset.d = d;
    std::size_t lineno = 1;
    std::size_t normalized = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 8 + d)
            throw ParseError(lineno, "expected " + std::to_string(8 + d) + " fields, got " +
                                         std::to_string(fields.size()));
        DatasetItem item;
        item.id = fields[0];
        PoseVector raw;
        for (int c = 0; c < 4; ++c) raw.q[static_cast<std::size_t>(c)] = parse_double(fields[1 + c], lineno, "quaternion");
        for (int c = 0; c < 3; ++c) raw.t[static_cast<std::size_t>(c)] = parse_double(fields[5 + c], lineno, "translation");
        const double norm = std::sqrt(raw.q[0] * raw.q[0] + raw.q[1] * raw.q[1] +
                                      raw.q[2] * raw.q[2] + raw.q[3] * raw.q[3]);
        try {
            item.pose = canonicalize_pose(raw);
        } catch (const DegenerateQuaternion& e) {
            throw InvalidPose("item " + item.id + ": " + e.what());
        }
        if (std::abs(norm - 1.0) > 1e-6) ++normalized;
        item.descriptor.values.reserve(d);
        for (std::size_t j = 0; j < d; ++j) {
            item.descriptor.values.push_back(parse_double(fields[8 + j], lineno, "descriptor"));
        }
        dataset.items.push_back(std::move(item));
    }
    if (normalized > 0) {
        std::fprintf(stderr, "warning: %zu pose(s) in %s were normalized on load\n", normalized,
                     path.string().c_str());
    }
    dataset.validate();
    return dataset;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "id,qa,qb,qc,qd,t1,t2,t3";
    for (std::size_t j = 0; j < dataset.d; ++j) out << ",f" << j;
    out << "\n";
    for (const DatasetItem& item : dataset.items) {
        out << item.id;
        for (double v : item.pose.flat()) out << "," << format_full(v);
        for (double v : item.descriptor.values) out << "," << format_full(v);
        out << "\n";
    }
    if (!out) throw IoError("failed writing " + path.string());
}

void save_poses(std::span<const std::pair<std::string, PoseVector>> poses,
                const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "id,qa,qb,qc,qd,t1,t2,t3\n";
    for (const auto& [id, pose] : poses) {
        out << id;
        for (double v : pose.flat()) out << "," << format_full(v);
        out << "\n";
    }
    if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::pair<std::string, PoseVector>> load_poses(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError(1, "missing header row");
    std::vector<std::pair<std::string, PoseVector>> poses;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 8) throw ParseError(lineno, "expected 8 fields");
        std::array<double, 7> flat{};
        for (int c = 0; c < 7; ++c) flat[static_cast<std::size_t>(c)] = parse_double(fields[1 + c], lineno, "pose");
        poses.emplace_back(fields[0], PoseVector::from_flat(flat));
    }
    return poses;
}

namespace {

// Within-cluster pose spread of the synthetic scene. Translations move
// inside a box around the cluster center; orientations wobble around the
// cluster base rotation. Spreads are sized so the bit targets stay
// learnable by thresholded linear regression at b = 16.
constexpr double kTranslationSpread = 0.01;  // meters, per axis
constexpr double kRotationSpreadDeg = 0.5;
// Circle plane height and angular offset keep every translation component
// well away from zero crossings inside a cluster.
constexpr double kCircleHeight = 5.0;
constexpr double kAngleOffset = 0.3;

}  // namespace

std::pair<Dataset, Dataset> generate_synthetic(std::size_t k_true, std::size_t n, std::size_t d,
                                               double noise_sigma, std::uint64_t seed) {
    if (k_true < 1) throw ConfigError("k_true must be at least 1");
    if (d < 8) throw ConfigError("descriptor dimension must be at least 8");
    if (n < 2) throw ConfigError("need at least 2 items for a split");
    if (noise_sigma < 0.0) throw ConfigError("noise sigma must be non-negative");

    Rng rng(seed);

    struct Cluster {
        std::array<double, 3> center;
        std::array<double, 4> base_q;
        MatrixRM map;  // d x 7
    };
    std::vector<Cluster> clusters(k_true);
    for (std::size_t c = 0; c < k_true; ++c) {
        const double theta = 2.0 * std::numbers::pi *
                             (static_cast<double>(c) + kAngleOffset) /
                             static_cast<double>(k_true);
        clusters[c].center = {10.0 * std::cos(theta), 10.0 * std::sin(theta), kCircleHeight};
        std::array<double, 4> q{};
        double norm = 0.0;
        for (double& v : q) {
            v = rng.gaussian();
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (double& v : q) v /= norm;
        clusters[c].base_q = canonicalize_pose(PoseVector{q, {0, 0, 0}}).q;
        clusters[c].map.resize(static_cast<Eigen::Index>(d), 7);
        for (Eigen::Index i = 0; i < clusters[c].map.rows(); ++i) {
            for (Eigen::Index j = 0; j < 7; ++j) clusters[c].map(i, j) = rng.gaussian();
        }
    }

    Dataset train, test;
    train.d = d;
    test.d = d;
    const double rot_spread = kRotationSpreadDeg * std::numbers::pi / 180.0;
    for (std::size_t i = 0; i < n; ++i) {
        // Consecutive items pair up under the even/odd split, so stepping the
        // cluster every second item keeps both splits covering all clusters.
        const std::size_t c = (i / 2) % k_true;
        const Cluster& cluster = clusters[c];

        PoseVector pose;
        for (int a = 0; a < 3; ++a) {
            pose.t[static_cast<std::size_t>(a)] =
                cluster.center[static_cast<std::size_t>(a)] +
                rng.uniform(-kTranslationSpread, kTranslationSpread);
        }
        std::array<double, 3> axis{};
        double axis_norm = 0.0;
        for (double& v : axis) {
            v = rng.gaussian();
            axis_norm += v * v;
        }
        axis_norm = std::sqrt(axis_norm);
        const double angle = rng.uniform(-rot_spread, rot_spread);
        const double s = std::sin(angle / 2.0) / (axis_norm > 0.0 ? axis_norm : 1.0);
        const std::array<double, 4> wobble{std::cos(angle / 2.0), s * axis[0], s * axis[1],
                                           s * axis[2]};
        pose.q = quat_mul(cluster.base_q, wobble);
        pose = canonicalize_pose(pose);

        DatasetItem item;
        item.pose = pose;
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "synth-%06zu", i);
        item.id = idbuf;
        item.descriptor.values.resize(d);
        const auto flat = pose.flat();
        Eigen::Map<Eigen::VectorXd> x(item.descriptor.values.data(), static_cast<Eigen::Index>(d));
        x = cluster.map * Eigen::Map<const Eigen::Matrix<double, 7, 1>>(flat.data());
        x(static_cast<Eigen::Index>(c % d)) += 5.0;  // one-hot cluster offset
        if (noise_sigma > 0.0) {
            for (Eigen::Index j = 0; j < x.size(); ++j) x(j) += noise_sigma * rng.gaussian();
        }

        if (i % 2 == 0) {
            train.items.push_back(std::move(item));
        } else {
            test.items.push_back(std::move(item));
        }
    }
    train.validate();
    test.validate();
    return {std::move(train), std::move(test)};
}

EvalReport evaluate(const ModelBundle& bundle, const Dataset& test,
                    std::span<const RelativePoseEdge> edges, std::size_t window_size) {
    test.validate();
    if (test.d != bundle.d)
        throw DimensionMismatch("test descriptor dimension does not match the model");

    const std::size_t n = test.size();
    std::vector<PoseOrFailure> predictions(n, DecodeFailure{});
    std::vector<double> times_ms(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        predictions[i] = predict(bundle, test.items[i].descriptor.values);
        const auto t1 = std::chrono::steady_clock::now();
        times_ms[i] = std::chrono::duration<double, std::milli>(t1 - t0).count();
    });

    // Optional windowed refinement over the test trajectory; windows that
    // contain a decode failure are left as predicted.
    if (!edges.empty() && n >= 2) {
        const std::size_t t = std::clamp<std::size_t>(window_size, 2, n);
        for (const auto& [lo, hi] : window_spans(n, t)) {
            bool complete = true;
            for (std::size_t i = lo; i < hi && complete; ++i) {
                complete = std::holds_alternative<PoseVector>(predictions[i]);
            }
            if (!complete) continue;
            Window w;
            for (std::size_t i = lo; i < hi; ++i) {
                w.frames.push_back(std::get<PoseVector>(predictions[i]));
            }
            for (const RelativePoseEdge& e : edges) {
                if (e.i >= lo && e.i < hi && e.j >= lo && e.j < hi) {
                    RelativePoseEdge local = e;
                    local.i -= lo;
                    local.j -= lo;
                    w.edges.push_back(local);
                }
            }
            const auto refined = refine_window(w);
            for (std::size_t i = lo; i < hi; ++i) {
                std::get<PoseVector>(predictions[i]).t = refined[i - lo];
            }
        }
    }

    EvalReport report;
    report.n_items = n;
    std::vector<double> terr, rerr;
    for (std::size_t i = 0; i < n; ++i) {
        if (const PoseVector* pose = std::get_if<PoseVector>(&predictions[i])) {
            const PoseVector truth = canonicalize_pose(test.items[i].pose);
            terr.push_back(translation_error_m(pose->t, truth.t));
            rerr.push_back(rotation_error_deg(pose->q, truth.q));
        }
    }
    report.n_success = terr.size();
    report.decode_failure_rate =
        n == 0 ? 0.0 : static_cast<double>(n - report.n_success) / static_cast<double>(n);
    report.medians_defined = !terr.empty();
    report.median_translation_error_m = median_of(terr);
    report.median_rotation_error_deg = median_of(rerr);

    std::sort(times_ms.begin(), times_ms.end());
    report.query_time.median_ms = quantile_of(times_ms, 0.5);
    report.query_time.q1_ms = quantile_of(times_ms, 0.25);
    report.query_time.q3_ms = quantile_of(times_ms, 0.75);

    // Routing accuracy against nearest-centroid reference assignments.
    if (bundle.centroids.rows() == static_cast<Eigen::Index>(bundle.config.k) &&
        bundle.config.k >= 1) {
        std::vector<std::size_t> total(bundle.config.k, 0), correct(bundle.config.k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* x = test.items[i].descriptor.values.data();
            std::size_t expected = 0;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < bundle.config.k; ++c) {
                double d2 = 0.0;
                const double* centroid = bundle.centroids.row(static_cast<Eigen::Index>(c)).data();
                for (std::size_t j = 0; j < bundle.d; ++j) {
                    const double diff = x[j] - centroid[j];
                    d2 += diff * diff;
                }
                if (d2 < best) {
                    best = d2;
                    expected = c;
                }
            }
            ++total[expected];
            if (classify(bundle.classifier, test.items[i].descriptor.values) == expected)
                ++correct[expected];
        }
        report.per_cluster_routing_accuracy.resize(bundle.config.k);
        for (std::size_t c = 0; c < bundle.config.k; ++c) {
            report.per_cluster_routing_accuracy[c] =
                total[c] == 0 ? std::numeric_limits<double>::quiet_NaN()
                              : static_cast<double>(correct[c]) / static_cast<double>(total[c]);
        }
    }
    return report;
}

void print_report(const EvalReport& report, std::ostream& out) {
    out << "items                 " << report.n_items << "\n";
    out << "successful decodes    " << report.n_success << "\n";
    if (report.medians_defined) {
        out << "median trans error    " << report.median_translation_error_m << " m\n";
        out << "median rot error      " << report.median_rotation_error_deg << " deg\n";
    } else {
        out << "median trans error    n/a (all decodes failed)\n";
        out << "median rot error      n/a (all decodes failed)\n";
    }
    out << "decode failure rate   " << report.decode_failure_rate << "\n";
    out << "query time median     " << report.query_time.median_ms << " ms ("
        << report.query_time.q1_ms << " / " << report.query_time.q3_ms << " quartiles)\n";
    for (std::size_t c = 0; c < report.per_cluster_routing_accuracy.size(); ++c) {
        out << "routing accuracy " << c << "    ";
        const double acc = report.per_cluster_routing_accuracy[c];
        if (std::isnan(acc)) {
            out << "n/a (no items)\n";
        } else {
            out << acc << "\n";
        }
    }
}

void write_report_kv(const EvalReport& report, std::ostream& out) {
    out << "n_items " << report.n_items << "\n";
    out << "n_success " << report.n_success << "\n";
    out << "medians_defined " << (report.medians_defined ? 1 : 0) << "\n";
    out << "median_translation_error_m " << format_full(report.median_translation_error_m) << "\n";
    out << "median_rotation_error_deg " << format_full(report.median_rotation_error_deg) << "\n";
    out << "decode_failure_rate " << format_full(report.decode_failure_rate) << "\n";
    out << "query_time_median_ms " << format_full(report.query_time.median_ms) << "\n";
    out << "query_time_q1_ms " << format_full(report.query_time.q1_ms) << "\n";
    out << "query_time_q3_ms " << format_full(report.query_time.q3_ms) << "\n";
    for (std::size_t c = 0; c < report.per_cluster_routing_accuracy.size(); ++c) {
        out << "routing_accuracy_" << c << " " << format_full(report.per_cluster_routing_accuracy[c])
            << "\n";
    }
}

ScalingFit fit_scaling_curve(std::span<const std::pair<double, double>> points) {
    if (points.size() < 3) throw ConfigError("scaling fit needs at least 3 points");
    bool all_equal = true;
    for (const auto& [n, s] : points) {
        if (!(n > 1.0)) throw ConfigError("scaling fit requires N > 1");
        if (!(s > 0.0)) throw ConfigError("scaling fit requires S > 0");
        if (n != points[0].first) all_equal = false;
    }
    if (all_equal) throw DegenerateFit("all N values coincide");

    const auto mse_at = [&](double a, double* b_out) {
        double mean = 0.0;
        for (const auto& [n, s] : points) mean += s - std::pow(n, a);
        mean /= static_cast<double>(points.size());
        double mse = 0.0;
        for (const auto& [n, s] : points) {
            const double resid = s - std::pow(n, a) - mean;
            mse += resid * resid;
        }
        mse /= static_cast<double>(points.size());
        if (b_out) *b_out = mean;
        return mse;
    };

    // Coarse scan over (0, 2], then golden-section refinement.
    constexpr int kGrid = 400;
    double best_a = 2.0 / kGrid;
    double best_mse = std::numeric_limits<double>::infinity();
    for (int g = 1; g <= kGrid; ++g) {
        const double a = 2.0 * static_cast<double>(g) / kGrid;
        const double mse = mse_at(a, nullptr);
        if (mse < best_mse) {
            best_mse = mse;
            best_a = a;
        }
    }
    double lo = std::max(1e-9, best_a - 2.0 / kGrid);
    double hi = std::min(2.0, best_a + 2.0 / kGrid);
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - golden * (hi - lo);
    double x2 = lo + golden * (hi - lo);
    double f1 = mse_at(x1, nullptr);
    double f2 = mse_at(x2, nullptr);
    for (int iter = 0; iter < 200 && hi - lo > 1e-12; ++iter) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - golden * (hi - lo);
            f1 = mse_at(x1, nullptr);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + golden * (hi - lo);
            f2 = mse_at(x2, nullptr);
        }
    }

    ScalingFit fit;
    fit.a = 0.5 * (lo + hi);
    fit.mse = mse_at(fit.a, &fit.b_off);
    fit.points.assign(points.begin(), points.end());
    return fit;
}

}  // namespace sasse
