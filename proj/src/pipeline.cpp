#include "sasse/pipeline.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "sasse/kernels.hpp"
#include "sasse/util.hpp"

namespace sasse {

void ModelBundle::validate() const {
    config.validate();
    if (clusters.size() != config.k) throw ConfigError("cluster model count does not match k");
    if (classifier.k != config.k || classifier.d != d)
        throw ConfigError("classifier shape does not match the bundle");
    if (classifier.hyperplanes.rows() != static_cast<Eigen::Index>(config.k) - 1 ||
        classifier.hyperplanes.cols() != static_cast<Eigen::Index>(d) + 1)
        throw ConfigError("classifier hyperplane matrix has the wrong shape");
    const Eigen::Index r = static_cast<Eigen::Index>(config.r);
    const Eigen::Index bits = static_cast<Eigen::Index>(config.label_bits());
    for (const ClusterModel& c : clusters) {
        if (c.embedding.z.rows() != r || c.embedding.z.cols() != bits)
            throw ConfigError("projection matrix Z has the wrong shape");
        if (c.embedding.columns.size() != config.r)
            throw ConfigError("selected column count does not match r");
        if (c.regressor.w.rows() != static_cast<Eigen::Index>(d) || c.regressor.w.cols() != r)
            throw ConfigError("regressor matrix W has the wrong shape");
    }
    if (centroids.rows() != 0 &&
        (centroids.rows() != static_cast<Eigen::Index>(config.k) ||
         centroids.cols() != static_cast<Eigen::Index>(d)))
        throw ConfigError("centroid matrix has the wrong shape");
}

namespace {

ClusterModel fit_cluster(const Eigen::MatrixXd& x, std::span<const PoseVector> poses,
                         const TrainConfig& cfg, std::uint64_t cluster_seed) {
    std::vector<BinaryLabel> labels;
    labels.reserve(poses.size());
    for (const PoseVector& p : poses) labels.push_back(encode_pose(p, cfg.b));
    const Eigen::MatrixXd y = label_matrix(labels);

    const auto columns = select_columns(y, cfg.r, cfg.css, cluster_seed);
    ProjectionFit projection = fit_projection(y, columns);

    ClusterModel model;
    model.embedding = std::move(projection.model);

    if (cfg.standardize) {
        // Scale descriptor columns to unit norm for the fit, then fold the
        // scaling back into W so the stored model stays a plain W^T x.
        Eigen::VectorXd scale = x.colwise().norm();
        for (Eigen::Index j = 0; j < scale.size(); ++j) {
            if (scale(j) <= 0.0) scale(j) = 1.0;
        }
        const Eigen::MatrixXd xs = x * scale.cwiseInverse().asDiagonal();
        RegressorModel fitted = fit_ridge(xs, projection.reduced, cfg.lambda);
        model.regressor.lambda = fitted.lambda;
        model.regressor.w = scale.cwiseInverse().asDiagonal() * fitted.w;
    } else {
        model.regressor = fit_ridge(x, projection.reduced, cfg.lambda);
    }
    return model;
}

}  // namespace

ModelBundle train(const Dataset& dataset, const TrainConfig& cfg) {
    dataset.validate();
    cfg.validate();
    if (cfg.k > dataset.size())
        throw KTooLarge("k = " + std::to_string(cfg.k) + " exceeds the dataset size " +
                        std::to_string(dataset.size()));

    const Partition partition = partition_data(dataset, cfg.k, cfg.seed);

    // Gather canonicalized poses and descriptors per cluster.
    std::vector<std::vector<PoseVector>> poses(cfg.k);
    std::vector<std::vector<std::size_t>> members(cfg.k);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const std::uint32_t c = partition.assignments[i];
        poses[c].push_back(canonicalize_pose(dataset.items[i].pose));
        members[c].push_back(i);
    }
    for (std::size_t c = 0; c < cfg.k; ++c) {
        if (members[c].size() < 2) throw ClusterTooSmall(c, members[c].size());
    }

    ModelBundle bundle;
    bundle.config = cfg;
    bundle.d = dataset.d;
    bundle.centroids = partition.centroids;
    bundle.clusters.resize(cfg.k);

    parallel_for(cfg.k, [&](std::size_t c) {
        Eigen::MatrixXd x(static_cast<Eigen::Index>(members[c].size()),
                          static_cast<Eigen::Index>(dataset.d));
        for (std::size_t row = 0; row < members[c].size(); ++row) {
            const auto& values = dataset.items[members[c][row]].descriptor.values;
            for (std::size_t j = 0; j < dataset.d; ++j) {
                x(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) = values[j];
            }
        }
        bundle.clusters[c] = fit_cluster(x, poses[c], cfg, cfg.seed + c);
    });

    bundle.classifier = fit_classifier(dataset, partition);
    bundle.validate();
    return bundle;
}

PoseOrFailure predict(const ModelBundle& bundle, std::span<const double> x) {
    if (x.size() != bundle.d)
        throw DimensionMismatch("descriptor dimension " + std::to_string(x.size()) +
                                " does not match model dimension " + std::to_string(bundle.d));

    const std::size_t j = classify(bundle.classifier, x);
    const ClusterModel& cluster = bundle.clusters[j];

    const std::size_t r = bundle.config.r;
    const std::size_t bits = bundle.config.label_bits();

    // Reduced label, lifted label, thresholded bits.
    std::vector<double> reduced(r);
    kernels::matvec_t(cluster.regressor.w.data(), bundle.d, r, x.data(), reduced.data());

    std::vector<double> lifted(bits);
    kernels::matvec_t(cluster.embedding.z.data(), r, bits, reduced.data(), lifted.data());

    BinaryLabel label;
    label.b = bundle.config.b;
    label.bits.resize(bits);
    kernels::threshold_bits(lifted.data(), bits, bundle.config.threshold, label.bits.data());

    return decode_pose(label);
}

std::uint64_t storage_bytes(std::size_t d, std::size_t r, int b, std::size_t k) {
    if (d < 1 || r < 1 || k < 1 || !valid_precision(b))
        throw ConfigError("storage_bytes requires positive d, r, k and b in {16, 32, 64}");
    const std::uint64_t bits7 = 7ull * static_cast<std::uint64_t>(b);
    return 8ull * (static_cast<std::uint64_t>(k) * r * (d + bits7) +
                   (static_cast<std::uint64_t>(k) - 1) * (d + 1));
}

std::uint64_t parameter_payload_bytes(const ModelBundle& bundle) {
    std::uint64_t reals = static_cast<std::uint64_t>(bundle.classifier.hyperplanes.size());
    for (const ClusterModel& c : bundle.clusters) {
        reals += static_cast<std::uint64_t>(c.embedding.z.size());
        reals += static_cast<std::uint64_t>(c.regressor.w.size());
    }
    return 8ull * reals;
}

}  // namespace sasse
