#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sasse/types.hpp"

namespace sasse {

struct Partition {
    std::vector<std::uint32_t> assignments;  // per-item cluster index in [0, k)
    MatrixRM centroids;                      // k x d
    std::size_t k = 0;
};

// Seeded k-means over descriptors: k-means++ initialization, at most 100
// Lloyd iterations, centroid-movement tolerance 1e-6, empty clusters
// repaired by splitting the largest cluster at its farthest point.
// Deterministic given the seed. Throws KTooLarge when k > N.
Partition partition_data(const Dataset& dataset, std::size_t k, std::uint64_t seed);

// Linear routing model with a reference class: k-1 stored hyperplanes of
// d+1 values each (weights then bias); the last class has implicit score 0.
struct RoutingClassifier {
    MatrixRM hyperplanes;  // (k-1) x (d+1)
    std::size_t k = 1;
    std::size_t d = 0;
};

// Multinomial logistic fit of the routing classifier on the partition
// labels (L-BFGS, gradient tolerance 1e-6). k = 1 yields an empty model.
RoutingClassifier fit_classifier(const Dataset& dataset, const Partition& partition);

// Argmax over the k class scores; ties resolve to the lowest index.
std::size_t classify(const RoutingClassifier& clf, std::span<const double> x);

}  // namespace sasse
