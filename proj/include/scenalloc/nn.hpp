#pragma once

#include <vector>

#include <Eigen/Dense>

#include "scenalloc/rng.hpp"

namespace scenalloc::sdg {

// Minimal dense-network substrate with explicit reverse-mode gradients.
// Everything is double precision; batches are row-major (rows = samples).

struct AdamParams {
    double lr = 1e-4;
    double beta1 = 0.5;
    double beta2 = 0.9;
    double eps = 1e-8;
    double weight_decay = 0.0;  // L2 added to the gradient
};

class Adam {
  public:
    void attach(std::vector<Eigen::MatrixXd*> params, std::vector<Eigen::MatrixXd*> grads,
                const AdamParams& hp);
    void step();
    void zero_grad();

  private:
    std::vector<Eigen::MatrixXd*> params_;
    std::vector<Eigen::MatrixXd*> grads_;
    std::vector<Eigen::MatrixXd> m_, v_;
    AdamParams hp_;
    long t_ = 0;
};

struct Linear {
    Eigen::MatrixXd w;  // in x out
    Eigen::MatrixXd b;  // 1 x out
    Eigen::MatrixXd gw, gb;

    void init(Eigen::Index in, Eigen::Index out, Rng& rng);
    Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
    // dy -> dx; accumulates gw/gb from the cached input.
    Eigen::MatrixXd backward(const Eigen::MatrixXd& x_cache, const Eigen::MatrixXd& dy);
    Eigen::Index param_count() const { return w.size() + b.size(); }
};

struct BatchNorm {
    Eigen::MatrixXd gamma, beta;  // 1 x d
    Eigen::MatrixXd ggamma, gbeta;
    Eigen::VectorXd running_mean, running_var;
    double eps = 1e-5;
    double momentum = 0.1;

    struct Cache {
        Eigen::MatrixXd xhat;
        Eigen::VectorXd invstd;
    };

    void init(Eigen::Index d);
    Eigen::MatrixXd forward_train(const Eigen::MatrixXd& x, Cache& cache);
    Eigen::MatrixXd forward_eval(const Eigen::MatrixXd& x) const;
    Eigen::MatrixXd backward(const Cache& cache, const Eigen::MatrixXd& dy);
    Eigen::Index param_count() const { return gamma.size() + beta.size(); }
};

// CTGAN-style generator: residual blocks Linear -> BatchNorm -> ReLU whose
// outputs are concatenated onto the running input, then a final Linear.
class Generator {
  public:
    Generator() = default;
    Generator(Eigen::Index input_dim, const std::vector<Eigen::Index>& hidden, Eigen::Index output_dim,
              Rng& rng);

    struct Cache {
        std::vector<Eigen::MatrixXd> lin_in;   // input to each block's Linear
        std::vector<BatchNorm::Cache> bn;
        std::vector<Eigen::MatrixXd> relu_mask;  // 1/0 mask
        Eigen::MatrixXd final_in;
    };

    Eigen::MatrixXd forward(const Eigen::MatrixXd& input, bool train, Cache* cache);
    void backward(const Cache& cache, const Eigen::MatrixXd& d_output);

    std::vector<Eigen::MatrixXd*> parameters();
    std::vector<Eigen::MatrixXd*> gradients();
    Eigen::Index param_count() const;
    Eigen::Index input_dim() const { return input_dim_; }
    Eigen::Index output_dim() const { return output_dim_; }

    std::vector<Linear> blocks;
    std::vector<BatchNorm> norms;
    Linear final_layer;

  private:
    Eigen::Index input_dim_ = 0, output_dim_ = 0;
};

// WGAN critic over pac-flattened rows: Linear -> LeakyReLU(0.2) -> Dropout(0.5)
// per hidden layer, then Linear to a scalar.
class Discriminator {
  public:
    Discriminator() = default;
    Discriminator(Eigen::Index input_dim, const std::vector<Eigen::Index>& hidden, Rng& rng);

    struct Cache {
        std::vector<Eigen::MatrixXd> lin_in;
        // Combined elementwise multiplier leaky'(a) * dropout_mask / keep.
        std::vector<Eigen::MatrixXd> act_mult;
    };

    // dropout_rng == nullptr disables dropout (eval or frozen checks).
    Eigen::VectorXd forward(const Eigen::MatrixXd& x, Rng* dropout_rng, Cache* cache);
    // dy -> dx, optionally accumulating parameter gradients.
    Eigen::MatrixXd backward(const Cache& cache, const Eigen::VectorXd& dy, bool accumulate);

    // Adds the gradient of gp_weight * mean((||d D/d x|| - 1)^2) to the
    // parameter gradients (exact for the piecewise-linear critic) and returns
    // the penalty value. Dropout masks are drawn once per call.
    double gradient_penalty(const Eigen::MatrixXd& interpolated, double gp_weight, Rng* dropout_rng);

    std::vector<Eigen::MatrixXd*> parameters();
    std::vector<Eigen::MatrixXd*> gradients();
    Eigen::Index param_count() const;
    Eigen::Index input_dim() const { return input_dim_; }

    std::vector<Linear> layers;
    Linear final_layer;
    double leaky_slope = 0.2;
    double dropout_p = 0.5;

  private:
    Eigen::Index input_dim_ = 0;
};

// Output-head description: tanh for the scalar alpha slots, gumbel-softmax
// over each categorical block.
struct OutputSpan {
    Eigen::Index start = 0;
    Eigen::Index len = 0;
    bool categorical = false;
};

// raw logits -> activated row block; gumbel noise (same shape as raw) is
// added inside categorical blocks before the tempered softmax. Pass a zero
// matrix for noise-free (deterministic) activation.
Eigen::MatrixXd apply_activations(const Eigen::MatrixXd& raw, const std::vector<OutputSpan>& spans,
                                  double tau, const Eigen::MatrixXd& gumbel_noise);
// d(activated) -> d(raw) given the activated values.
Eigen::MatrixXd activations_backward(const Eigen::MatrixXd& activated,
                                     const std::vector<OutputSpan>& spans, double tau,
                                     const Eigen::MatrixXd& d_activated);

// Mean cross-entropy of a categorical block's raw logits against target
// indices; adds the gradient into d_raw.
double cross_entropy_block(const Eigen::MatrixXd& raw, const OutputSpan& span,
                           const std::vector<int>& targets, Eigen::MatrixXd& d_raw);

}  // namespace scenalloc::sdg
