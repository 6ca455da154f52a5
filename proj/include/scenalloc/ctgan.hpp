#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scenalloc/hdbscan.hpp"
#include "scenalloc/market_data.hpp"
#include "scenalloc/nn.hpp"
#include "scenalloc/pca.hpp"
#include "scenalloc/vgm.hpp"

namespace scenalloc::sdg {

struct CtganConfig {
    int embedding_dim = 128;
    std::vector<int> generator_dims = {256, 256};
    std::vector<int> discriminator_dims = {256, 256};
    int pac_size = 10;
    double learning_rate = 1e-4;
    int epochs = 1500;
    int batch_size = 500;  // forced down to a multiple of pac_size
    double gumbel_tau = 0.2;
    double gp_weight = 10.0;
    uint64_t seed = 0;

    // Upstream pipeline knobs.
    int vgm_max_modes = 10;
    double vgm_prune_weight = 0.005;
    double tsne_perplexity = 30.0;
    int tsne_iterations = 1000;
    int hdbscan_min_cluster_size = 15;

    // Checks invariants and returns a copy with batch_size forced to a
    // multiple of pac_size.
    CtganConfig normalized() const;
};

// Mode-specific encoding of the PCA-score columns plus the cluster one-hot:
// [alpha_0, modes_0, alpha_1, modes_1, ..., cluster].
struct DataEncoder {
    std::vector<prep::VgmColumnModel> columns;
    int n_clusters = 1;

    Eigen::Index encoded_dim() const;
    std::vector<OutputSpan> spans() const;  // cluster block last
    OutputSpan cluster_span() const;

    Eigen::MatrixXd encode(const Eigen::MatrixXd& scores, const std::vector<int>& clusters) const;
    // Hardens mode blocks by argmax and inverts the alpha encoding.
    Eigen::MatrixXd decode_scores(const Eigen::MatrixXd& rows) const;
    std::vector<int> decode_clusters(const Eigen::MatrixXd& rows) const;
};

struct TrainingHistory {
    std::vector<double> loss_g;  // per-epoch means
    std::vector<double> loss_d;
    std::vector<double> gradient_penalty;
};

// The full trained pipeline: everything needed to generate and decode.
struct SdgModel {
    static constexpr int kSchemaVersion = 1;

    prep::PcaModel pca;
    DataEncoder encoder;
    prep::ClusterLabels clusters;
    Eigen::VectorXd cluster_counts;  // k entries, > 0
    CtganConfig config;
    Generator generator;
    Discriminator discriminator;
    TrainingHistory history;

    std::vector<std::string> tickers, tenors;
    Eigen::Index n_assets = 0;
    Eigen::Index n_features = 0;

    Eigen::Index condition_dim() const { return encoder.n_clusters; }
};

struct SyntheticDataset {
    Eigen::MatrixXd R;  // n x m_s
    Eigen::MatrixXd F;  // l x m_s
    std::vector<int> cluster_ids;
    std::vector<std::string> tickers, tenors;

    market::ScenarioTable as_table() const;
};

// Log-frequency condition sampling: P(j) proportional to log(1 + count_j).
std::pair<int, Eigen::VectorXd> sample_condition_vector(const Eigen::VectorXd& counts, Rng& rng);

// Full pipeline: z-score+PCA, t-SNE, HDBSCAN, per-column mixtures, adversarial
// training. Requires at least 200 scenarios.
SdgModel train_sdg_pipeline(const market::ScenarioTable& history, const CtganConfig& config);

// Adversarial training over pre-encoded rows; exposed separately for tests.
void ctgan_train(Generator& generator, Discriminator& discriminator, const Eigen::MatrixXd& encoded,
                 const std::vector<int>& cluster_labels, const Eigen::VectorXd& cluster_counts,
                 const std::vector<OutputSpan>& spans, const CtganConfig& config,
                 TrainingHistory* history);

// Single-row generator pass with gumbel-softmax sampling on the categorical
// blocks (batch-norm in eval mode).
Eigen::VectorXd generator_forward(SdgModel& model, const Eigen::VectorXd& noise,
                                  const Eigen::VectorXd& condition, Rng& rng);

SyntheticDataset generate_synthetic(SdgModel& model, Eigen::Index count, Rng& rng);

}  // namespace scenalloc::sdg
