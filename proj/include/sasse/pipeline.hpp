#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sasse/cluster_route.hpp"
#include "sasse/label_embed.hpp"
#include "sasse/posecodec.hpp"
#include "sasse/ridge.hpp"
#include "sasse/types.hpp"

namespace sasse {

struct ClusterModel {
    EmbeddingModel embedding;
    RegressorModel regressor;
};

inline constexpr std::uint32_t kModelFormatVersion = 1;

// Everything needed at inference: the routing classifier plus one
// (embedding, regressor) pair per cluster. Centroids are kept as a routing
// diagnostic and are not part of the storage accounting.
struct ModelBundle {
    TrainConfig config;
    std::size_t d = 0;
    RoutingClassifier classifier;
    std::vector<ClusterModel> clusters;
    MatrixRM centroids;  // k x d, or empty
    std::uint32_t format_version = kModelFormatVersion;

    void validate() const;
};

// Full training pass: partition, per-cluster label encoding, column subset
// selection, projection and ridge fit, plus the routing classifier.
// Deterministic given cfg.seed. Throws ClusterTooSmall when a cluster ends
// up with fewer than 2 items.
ModelBundle train(const Dataset& dataset, const TrainConfig& cfg);

// Route, regress the reduced label, lift through Z, threshold to bits at
// tau, decode. Decode failures are returned as values, not thrown.
PoseOrFailure predict(const ModelBundle& bundle, std::span<const double> x);

// Storage model: 8 (k r (d + 7b) + (k - 1)(d + 1)) bytes.
std::uint64_t storage_bytes(std::size_t d, std::size_t r, int b, std::size_t k);

// Bytes of real-valued parameters a serialized bundle carries (hyperplanes
// plus per-cluster Z and W at 8 bytes each). Excludes the column indices,
// centroids and manifest, which are reported separately.
std::uint64_t parameter_payload_bytes(const ModelBundle& bundle);

}  // namespace sasse
