#pragma once

#include <vector>

#include <Eigen/Dense>

namespace scenalloc::prep {

// Dense partition of the samples: every point carries a label in 0..k-1.
// HDBSCAN noise points are reassigned to the nearest cluster medoid so that
// downstream conditioning always has a valid state.
struct ClusterLabels {
    std::vector<int> labels;
    int k = 0;
    int noise_reassigned = 0;
    bool single_cluster_fallback = false;  // everything was noise
};

// HDBSCAN over Euclidean distances: mutual-reachability graph, minimum
// spanning tree, condensed tree at min_cluster_size, excess-of-mass cluster
// selection. min_samples (for core distances) equals min_cluster_size.
ClusterLabels hdbscan_cluster(const Eigen::MatrixXd& points, int min_cluster_size);

}  // namespace scenalloc::prep
