// sasse command-line tool: training, prediction, evaluation, pose-graph
// refinement, synthetic data generation and the benchmark harness.

#include <chrono>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sasse/bench.hpp"
#include "sasse/datasets.hpp"
#include "sasse/kernels.hpp"
#include "sasse/model_io.hpp"
#include "sasse/pgo.hpp"
#include "sasse/pipeline.hpp"

namespace {

struct ConfigFlags {
    sasse::TrainConfig cfg;
    std::string css = "greedy";

    void attach(CLI::App* app) {
        app->add_option("--r", cfg.r, "embedding size (selected label bits)");
        app->add_option("--k", cfg.k, "number of clusters");
        app->add_option("--b", cfg.b, "pose encoding precision (16, 32 or 64)");
        app->add_option("--lambda", cfg.lambda, "ridge regularizer");
        app->add_option("--threshold", cfg.threshold, "bit decision threshold tau");
        app->add_option("--seed", cfg.seed, "RNG seed");
        app->add_option("--css", css, "column selection strategy: greedy|sampled|bruteforce");
        app->add_flag("--standardize", cfg.standardize,
                      "scale descriptor columns before the ridge fit");
    }

    sasse::TrainConfig resolve() const {
        sasse::TrainConfig out = cfg;
        out.css = sasse::css_strategy_from_string(css);
        out.validate();
        return out;
    }
};

std::ofstream open_report(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw sasse::IoError("cannot open report file " + path);
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"storage-bounded 6-DOF pose regression toolkit"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic scene");
    std::size_t synth_k_true = 4, synth_n = 2000, synth_d = 64;
    double synth_sigma = 0.01;
    std::uint64_t synth_seed = 0;
    std::string synth_train_out = "train.csv", synth_test_out = "test.csv";
    synth->add_option("--k-true", synth_k_true, "number of generator clusters");
    synth->add_option("--n", synth_n, "total items (split 50/50)");
    synth->add_option("--d", synth_d, "descriptor dimension");
    synth->add_option("--sigma", synth_sigma, "descriptor noise sigma");
    synth->add_option("--seed", synth_seed, "RNG seed");
    synth->add_option("--train-out", synth_train_out, "training CSV path");
    synth->add_option("--test-out", synth_test_out, "test CSV path");

    // train
    auto* train_cmd = app.add_subcommand("train", "train a model bundle");
    std::string train_data, train_model_out = "model.sasse", train_report;
    ConfigFlags train_flags;
    train_cmd->add_option("data", train_data, "training dataset CSV")->required();
    train_cmd->add_option("--model-out", train_model_out, "output model path");
    train_cmd->add_option("--report-file", train_report, "machine-readable report path");
    train_flags.attach(train_cmd);

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "predict poses for a dataset");
    std::string predict_model, predict_data, predict_out, predict_report;
    predict_cmd->add_option("--model", predict_model, "model bundle path")->required();
    predict_cmd->add_option("data", predict_data, "query dataset CSV")->required();
    predict_cmd->add_option("--out", predict_out, "pose CSV output (default stdout)");
    predict_cmd->add_option("--report-file", predict_report, "machine-readable report path");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a model on a dataset");
    std::string eval_model, eval_data, eval_edges, eval_report_file;
    std::size_t eval_window = 5;
    eval_cmd->add_option("--model", eval_model, "model bundle path")->required();
    eval_cmd->add_option("data", eval_data, "test dataset CSV")->required();
    eval_cmd->add_option("--edges", eval_edges, "relative pose edge file for PGO");
    eval_cmd->add_option("--window-size", eval_window, "PGO window size");
    eval_cmd->add_option("--report-file", eval_report_file, "machine-readable report path");

    // refine
    auto* refine_cmd = app.add_subcommand("refine", "refine a pose trajectory with PGO");
    std::string refine_poses, refine_edges, refine_out = "refined.csv";
    std::size_t refine_window = 5;
    refine_cmd->add_option("poses", refine_poses, "pose CSV (id,qa..t3)")->required();
    refine_cmd->add_option("--edges", refine_edges, "relative pose edge file")->required();
    refine_cmd->add_option("--window-size", refine_window, "window size");
    refine_cmd->add_option("--out", refine_out, "refined pose CSV path");

    // bench-scaling
    auto* scaling_cmd = app.add_subcommand("bench-scaling", "storage scaling sweep");
    sasse::BenchSpec spec;
    spec.n_list = {500, 1000, 2000, 4000, 8000};
    std::string scaling_report;
    scaling_cmd->add_option("--n-list", spec.n_list, "training sizes")->delimiter(',');
    scaling_cmd->add_option("--target-trans", spec.target_translation_m, "translation target (m)");
    scaling_cmd->add_option("--target-rot", spec.target_rotation_deg, "rotation target (deg)");
    scaling_cmd->add_option("--r-grid", spec.r_grid, "embedding sizes")->delimiter(',');
    scaling_cmd->add_option("--k-grid", spec.k_grid, "cluster counts")->delimiter(',');
    scaling_cmd->add_option("--b", spec.b, "pose encoding precision");
    scaling_cmd->add_option("--d", spec.d, "descriptor dimension");
    scaling_cmd->add_option("--k-true", spec.k_true, "generator cluster count");
    scaling_cmd->add_option("--sigma", spec.noise_sigma, "descriptor noise sigma");
    scaling_cmd->add_option("--seed", spec.seed, "RNG seed");
    scaling_cmd->add_option("--repetitions", spec.repetitions, "reseeded fits per grid point");
    scaling_cmd->add_option("--report-file", scaling_report, "machine-readable report path");

    // bench-latency
    auto* latency_cmd = app.add_subcommand("bench-latency", "per-frame predict latency");
    std::string latency_model, latency_data, latency_report;
    std::size_t latency_reps = 1000;
    latency_cmd->add_option("--model", latency_model, "model bundle path")->required();
    latency_cmd->add_option("data", latency_data, "dataset CSV")->required();
    latency_cmd->add_option("--repetitions", latency_reps, "timed predict calls");
    latency_cmd->add_option("--report-file", latency_report, "machine-readable report path");

    app.parse(argc, argv);

    if (*synth) {
        const auto [train_set, test_set] =
            sasse::generate_synthetic(synth_k_true, synth_n, synth_d, synth_sigma, synth_seed);
        sasse::save_dataset(train_set, synth_train_out);
        sasse::save_dataset(test_set, synth_test_out);
        std::cout << "wrote " << train_set.size() << " training and " << test_set.size()
                  << " test items (d=" << synth_d << ")\n";
        return 0;
    }

    if (*train_cmd) {
        const sasse::TrainConfig cfg = train_flags.resolve();
        const sasse::Dataset dataset = sasse::load_dataset(train_data);
        const auto t0 = std::chrono::steady_clock::now();
        const sasse::ModelBundle bundle = sasse::train(dataset, cfg);
        const auto t1 = std::chrono::steady_clock::now();
        const double seconds = std::chrono::duration<double>(t1 - t0).count();
        sasse::save_model(bundle, train_model_out);

        const std::uint64_t storage =
            sasse::storage_bytes(bundle.d, cfg.r, cfg.b, cfg.k);
        std::cout << "model written to " << train_model_out << "\n";
        std::cout << "parameter storage " << storage << " bytes\n";
        std::cout << "training time " << seconds << " s\n";
        if (!train_report.empty()) {
            auto out = open_report(train_report);
            out << "storage_bytes " << storage << "\n";
            out << "payload_bytes " << sasse::parameter_payload_bytes(bundle) << "\n";
            out << "training_seconds " << seconds << "\n";
            out << "kernel_backend " << sasse::kernels::name(sasse::kernels::active()) << "\n";
            // Selected-bit coverage per pose component, one diagnostic line
            // per cluster (qa qb qc qd t1 t2 t3).
            for (std::size_t c = 0; c < bundle.clusters.size(); ++c) {
                const auto coverage =
                    sasse::component_bit_coverage(bundle.clusters[c].embedding.columns, cfg.b);
                out << "bit_coverage_" << c;
                for (std::size_t count : coverage) out << " " << count;
                out << "\n";
            }
        }
        return 0;
    }

    if (*predict_cmd) {
        const sasse::ModelBundle bundle = sasse::load_model(predict_model);
        const sasse::Dataset dataset = sasse::load_dataset(predict_data);
        std::vector<std::pair<std::string, sasse::PoseVector>> out_poses;
        std::size_t failures = 0;
        for (const auto& item : dataset.items) {
            const sasse::PoseOrFailure result = sasse::predict(bundle, item.descriptor.values);
            if (const auto* pose = std::get_if<sasse::PoseVector>(&result)) {
                out_poses.emplace_back(item.id, *pose);
            } else {
                ++failures;
                std::cerr << item.id << ": decode failure (component "
                          << std::get<sasse::DecodeFailure>(result).component_index << ")\n";
            }
        }
        if (!predict_out.empty()) {
            sasse::save_poses(out_poses, predict_out);
        } else {
            std::cout << "id,qa,qb,qc,qd,t1,t2,t3\n";
            for (const auto& [id, pose] : out_poses) {
                std::cout << id;
                for (double v : pose.flat()) std::cout << "," << v;
                std::cout << "\n";
            }
        }
        std::cerr << out_poses.size() << " predictions, " << failures << " decode failures\n";
        if (!predict_report.empty()) {
            auto out = open_report(predict_report);
            out << "n_items " << dataset.size() << "\n";
            out << "n_predicted " << out_poses.size() << "\n";
            out << "n_decode_failures " << failures << "\n";
        }
        return 0;
    }

    if (*eval_cmd) {
        const sasse::ModelBundle bundle = sasse::load_model(eval_model);
        const sasse::Dataset dataset = sasse::load_dataset(eval_data);
        std::vector<sasse::RelativePoseEdge> edges;
        if (!eval_edges.empty()) edges = sasse::load_edges(eval_edges);
        const sasse::EvalReport report = sasse::evaluate(bundle, dataset, edges, eval_window);
        sasse::print_report(report, std::cout);
        if (!eval_report_file.empty()) {
            auto out = open_report(eval_report_file);
            sasse::write_report_kv(report, out);
        }
        return 0;
    }

    if (*refine_cmd) {
        const auto poses = sasse::load_poses(refine_poses);
        const auto edges = sasse::load_edges(refine_edges);
        std::vector<sasse::PoseVector> trajectory;
        trajectory.reserve(poses.size());
        for (const auto& [id, pose] : poses) trajectory.push_back(pose);
        const auto refined = sasse::refine_trajectory(trajectory, edges, refine_window);
        std::vector<std::pair<std::string, sasse::PoseVector>> out_poses;
        for (std::size_t i = 0; i < poses.size(); ++i) {
            out_poses.emplace_back(poses[i].first, refined[i]);
        }
        sasse::save_poses(out_poses, refine_out);
        std::cout << "refined " << refined.size() << " poses into " << refine_out << "\n";
        return 0;
    }

    if (*scaling_cmd) {
        const sasse::ScalingBenchResult result = sasse::bench_scaling(spec, &std::cout);
        std::cout << "fit: S = N^" << result.fit.a << " + " << result.fit.b_off
                  << " (S in MB, MSE " << result.fit.mse << ")\n";
        if (!scaling_report.empty()) {
            auto out = open_report(scaling_report);
            out << "fit_a " << result.fit.a << "\n";
            out << "fit_b " << result.fit.b_off << "\n";
            out << "fit_mse " << result.fit.mse << "\n";
            for (const auto& p : result.points) {
                out << "smin_" << p.n << " " << (p.reached ? std::to_string(p.storage) : "unreachable")
                    << "\n";
            }
        }
        return 0;
    }

    if (*latency_cmd) {
        const sasse::ModelBundle bundle = sasse::load_model(latency_model);
        const sasse::Dataset dataset = sasse::load_dataset(latency_data);
        const sasse::LatencyStats stats = sasse::bench_latency(bundle, dataset, latency_reps);
        std::cout << "kernel backend  " << sasse::kernels::name(sasse::kernels::active()) << "\n";
        std::cout << "median latency  " << stats.median_ms << " ms/frame\n";
        std::cout << "quartiles       " << stats.q1_ms << " / " << stats.q3_ms << " ms\n";
        std::cout << "min / max       " << stats.min_ms << " / " << stats.max_ms << " ms\n";
        if (!latency_report.empty()) {
            auto out = open_report(latency_report);
            out << "median_ms " << stats.median_ms << "\n";
            out << "q1_ms " << stats.q1_ms << "\n";
            out << "q3_ms " << stats.q3_ms << "\n";
            out << "min_ms " << stats.min_ms << "\n";
            out << "max_ms " << stats.max_ms << "\n";
            out << "repetitions " << stats.repetitions << "\n";
            out << "kernel_backend " << sasse::kernels::name(sasse::kernels::active()) << "\n";
        }
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::ParseError& e) {
        CLI::App dummy;
        const int code = dummy.exit(e);
        return code == 0 ? 0 : 2;  // usage problems map to exit 2, --help to 0
    } catch (const sasse::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
