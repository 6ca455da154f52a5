#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace scenalloc::prep {

// Exact (all-pairs) t-SNE. O(m^2) per iteration, which is fine at the sample
// counts this pipeline sees (roughly a thousand rows per window).
struct TsneParams {
    double perplexity = 30.0;
    int iterations = 1000;
    double exaggeration = 12.0;
    int exaggeration_iters = 250;
    double momentum_early = 0.5;
    double momentum_late = 0.8;
    int momentum_switch_iter = 250;
    double learning_rate = 200.0;
    uint64_t seed = 0;
};

struct TsneResult {
    Eigen::MatrixXd embedding;  // m x 2
    double initial_kl = 0.0;
    double final_kl = 0.0;
};

// rows = samples. Deterministic for a fixed seed.
TsneResult tsne_embed(const Eigen::MatrixXd& data, const TsneParams& params);

}  // namespace scenalloc::prep
