#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "sasse/datasets.hpp"
#include "sasse/model_io.hpp"

using namespace sasse;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("sasse-test-" + std::to_string(::getpid()) + "-" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

ModelBundle small_bundle(std::uint64_t seed = 17) {
    const auto [train_set, test_set] = generate_synthetic(2, 100, 16, 0.01, seed);
    TrainConfig cfg;
    cfg.r = 21;
    cfg.k = 2;
    cfg.seed = seed;
    cfg.lambda = 0.25;
    cfg.threshold = 0.5;
    return train(train_set, cfg);
}

}  // namespace

TEST_SUITE("model-io") {

TEST_CASE("save/load round trip is bit exact") {
    TempDir tmp;
    const ModelBundle bundle = small_bundle();
    const auto path = tmp.path / "model.sasse";
    save_model(bundle, path);
    const ModelBundle loaded = load_model(path);

    CHECK(loaded.d == bundle.d);
    CHECK(loaded.config.r == bundle.config.r);
    CHECK(loaded.config.k == bundle.config.k);
    CHECK(loaded.config.b == bundle.config.b);
    CHECK(loaded.config.lambda == bundle.config.lambda);
    CHECK(loaded.config.threshold == bundle.config.threshold);
    CHECK(loaded.config.seed == bundle.config.seed);
    CHECK(loaded.classifier.hyperplanes == bundle.classifier.hyperplanes);
    CHECK(loaded.centroids == bundle.centroids);
    for (std::size_t c = 0; c < bundle.clusters.size(); ++c) {
        CHECK(loaded.clusters[c].embedding.columns == bundle.clusters[c].embedding.columns);
        CHECK(loaded.clusters[c].embedding.z == bundle.clusters[c].embedding.z);
        CHECK(loaded.clusters[c].regressor.w == bundle.clusters[c].regressor.w);
    }
}

TEST_CASE("loaded models predict identically") {
    TempDir tmp;
    const auto [train_set, test_set] = generate_synthetic(2, 100, 16, 0.01, 18);
    const ModelBundle bundle = small_bundle(18);
    const auto path = tmp.path / "model.sasse";
    save_model(bundle, path);
    const ModelBundle loaded = load_model(path);
    for (const auto& item : test_set.items) {
        const PoseOrFailure a = predict(bundle, item.descriptor.values);
        const PoseOrFailure b = predict(loaded, item.descriptor.values);
        REQUIRE(a.index() == b.index());
        if (const auto* pa = std::get_if<PoseVector>(&a)) {
            CHECK(pa->q == std::get<PoseVector>(b).q);
            CHECK(pa->t == std::get<PoseVector>(b).t);
        }
    }
}

TEST_CASE("binary payload in the file matches storage_bytes exactly") {
    TempDir tmp;
    const ModelBundle bundle = small_bundle(19);
    const auto path = tmp.path / "model.sasse";
    save_model(bundle, path);

    // Locate the end of the manifest and account for every section.
    std::ifstream in(path, std::ios::binary);
    std::string line;
    std::size_t manifest_bytes = 0;
    std::uint64_t real_payload = 0, index_bytes = 0, diagnostic_bytes = 0;
    while (std::getline(in, line)) {
        manifest_bytes += line.size() + 1;
        std::istringstream row(line);
        std::string key, name;
        std::uint64_t offset = 0, bytes = 0;
        row >> key;
        if (key == "section") {
            row >> name >> offset >> bytes;
            if (name == "centroids") {
                diagnostic_bytes += bytes;
            } else if (name.size() > 4 && name.substr(name.size() - 4) == ".idx") {
                index_bytes += bytes;
            } else {
                real_payload += bytes;
            }
        }
        if (line == "end") break;
    }
    const std::uint64_t expected =
        storage_bytes(bundle.d, bundle.config.r, bundle.config.b, bundle.config.k);
    CHECK(real_payload == expected);
    CHECK(parameter_payload_bytes(bundle) == expected);
    CHECK(index_bytes == 4ull * bundle.config.k * bundle.config.r);

    const std::uint64_t file_size = std::filesystem::file_size(path);
    CHECK(file_size == manifest_bytes + real_payload + index_bytes + diagnostic_bytes);
}

TEST_CASE("same seed produces identical model bytes") {
    TempDir tmp;
    const auto path_a = tmp.path / "a.sasse";
    const auto path_b = tmp.path / "b.sasse";
    save_model(small_bundle(21), path_a);
    save_model(small_bundle(21), path_b);

    std::ifstream a(path_a, std::ios::binary), b(path_b, std::ios::binary);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
}

TEST_CASE("malformed files are rejected") {
    TempDir tmp;
    const auto path = tmp.path / "bad.sasse";
    {
        std::ofstream out(path);
        out << "NOT-A-MODEL 1\n";
    }
    CHECK_THROWS_AS(load_model(path), IoError);
    {
        std::ofstream out(path);
        out << "SASSE-MODEL 99\nend\n";
    }
    CHECK_THROWS_AS(load_model(path), IoError);
    {
        // Valid manifest, truncated payload.
        std::ofstream out(path);
        out << "SASSE-MODEL 1\nd 4\nr 3\nb 16\nk 2\nlambda 0.1\nthreshold 0.5\nseed 0\n"
               "css greedy\nstandardize 0\npayload_bytes 7000\nend\n";
    }
    CHECK_THROWS_AS(load_model(path), IoError);
    CHECK_THROWS_AS(load_model(tmp.path / "missing.sasse"), IoError);
}

}  // TEST_SUITE
