#include "scenalloc/nn.hpp"

#include <cmath>

#include "scenalloc/errors.hpp"

namespace scenalloc::sdg {

// ---------------------------------------------------------------------------
// Adam

void Adam::attach(std::vector<Eigen::MatrixXd*> params, std::vector<Eigen::MatrixXd*> grads,
                  const AdamParams& hp) {
    params_ = std::move(params);
    grads_ = std::move(grads);
    hp_ = hp;
    m_.clear();
    v_.clear();
    for (auto* p : params_) {
        m_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
        v_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
    }
    t_ = 0;
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(hp_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(hp_.beta2, static_cast<double>(t_));
    for (size_t i = 0; i < params_.size(); ++i) {
        Eigen::MatrixXd g = *grads_[i];
        if (hp_.weight_decay > 0.0) g += hp_.weight_decay * (*params_[i]);
        m_[i] = hp_.beta1 * m_[i] + (1.0 - hp_.beta1) * g;
        v_[i] = hp_.beta2 * v_[i] + (1.0 - hp_.beta2) * g.cwiseProduct(g);
        Eigen::ArrayXXd mhat = m_[i].array() / bc1;
        Eigen::ArrayXXd vhat = v_[i].array() / bc2;
        params_[i]->array() -= hp_.lr * mhat / (vhat.sqrt() + hp_.eps);
    }
}

void Adam::zero_grad() {
    for (auto* g : grads_) g->setZero();
}

// ---------------------------------------------------------------------------
// Linear

void Linear::init(Eigen::Index in, Eigen::Index out, Rng& rng) {
    const double k = 1.0 / std::sqrt(static_cast<double>(in));
    w.resize(in, out);
    b.resize(1, out);
    for (Eigen::Index i = 0; i < in; ++i)
        for (Eigen::Index j = 0; j < out; ++j) w(i, j) = (2.0 * rng.uniform() - 1.0) * k;
    for (Eigen::Index j = 0; j < out; ++j) b(0, j) = (2.0 * rng.uniform() - 1.0) * k;
    gw = Eigen::MatrixXd::Zero(in, out);
    gb = Eigen::MatrixXd::Zero(1, out);
}

Eigen::MatrixXd Linear::forward(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd y = x * w;
    y.rowwise() += b.row(0);
    return y;
}

Eigen::MatrixXd Linear::backward(const Eigen::MatrixXd& x_cache, const Eigen::MatrixXd& dy) {
    gw.noalias() += x_cache.transpose() * dy;
    gb.row(0) += dy.colwise().sum();
    return dy * w.transpose();
}

// ---------------------------------------------------------------------------
// BatchNorm

void BatchNorm::init(Eigen::Index d) {
    gamma = Eigen::MatrixXd::Ones(1, d);
    beta = Eigen::MatrixXd::Zero(1, d);
    ggamma = Eigen::MatrixXd::Zero(1, d);
    gbeta = Eigen::MatrixXd::Zero(1, d);
    running_mean = Eigen::VectorXd::Zero(d);
    running_var = Eigen::VectorXd::Ones(d);
}

Eigen::MatrixXd BatchNorm::forward_train(const Eigen::MatrixXd& x, Cache& cache) {
    const double n = static_cast<double>(x.rows());
    Eigen::RowVectorXd mean = x.colwise().mean();
    Eigen::RowVectorXd var = (x.rowwise() - mean).array().square().colwise().mean();
    cache.invstd = (var.transpose().array() + eps).rsqrt();
    cache.xhat = (x.rowwise() - mean).array().rowwise() * cache.invstd.transpose().array();
    // Running stats use the unbiased variance, matching the usual convention.
    double unbias = n > 1.0 ? n / (n - 1.0) : 1.0;
    running_mean = (1.0 - momentum) * running_mean + momentum * mean.transpose();
    running_var = (1.0 - momentum) * running_var + momentum * (unbias * var.transpose());
    Eigen::MatrixXd y = cache.xhat.array().rowwise() * gamma.row(0).array();
    y.rowwise() += beta.row(0);
    return y;
}

Eigen::MatrixXd BatchNorm::forward_eval(const Eigen::MatrixXd& x) const {
    Eigen::ArrayXd invstd = (running_var.array() + eps).rsqrt();
    Eigen::MatrixXd xhat =
        (x.rowwise() - running_mean.transpose()).array().rowwise() * invstd.transpose();
    Eigen::MatrixXd y = xhat.array().rowwise() * gamma.row(0).array();
    y.rowwise() += beta.row(0);
    return y;
}

Eigen::MatrixXd BatchNorm::backward(const Cache& cache, const Eigen::MatrixXd& dy) {
    const double n = static_cast<double>(dy.rows());
    Eigen::RowVectorXd sum_dy = dy.colwise().sum();
    Eigen::RowVectorXd sum_dy_xhat = (dy.array() * cache.xhat.array()).colwise().sum();
    ggamma.row(0) += sum_dy_xhat;
    gbeta.row(0) += sum_dy;
    Eigen::ArrayXXd term = n * dy.array();
    term.rowwise() -= sum_dy.array();
    term -= cache.xhat.array().rowwise() * sum_dy_xhat.array();
    Eigen::ArrayXXd dx = term.rowwise() * (gamma.row(0).array() * cache.invstd.transpose().array()) / n;
    return dx.matrix();
}

// ---------------------------------------------------------------------------
// Generator

Generator::Generator(Eigen::Index input_dim, const std::vector<Eigen::Index>& hidden,
                     Eigen::Index output_dim, Rng& rng)
    : input_dim_(input_dim), output_dim_(output_dim) {
    Eigen::Index cur = input_dim;
    for (Eigen::Index h : hidden) {
        Linear lin;
        lin.init(cur, h, rng);
        blocks.push_back(std::move(lin));
        BatchNorm bn;
        bn.init(h);
        norms.push_back(std::move(bn));
        cur += h;  // residual concatenation
    }
    final_layer.init(cur, output_dim, rng);
}

Eigen::MatrixXd Generator::forward(const Eigen::MatrixXd& input, bool train, Cache* cache) {
    if (input.cols() != input_dim_) throw Error(ErrorKind::Shape, "generator input width mismatch");
    Eigen::MatrixXd h = input;
    for (size_t i = 0; i < blocks.size(); ++i) {
        if (cache) cache->lin_in.push_back(h);
        Eigen::MatrixXd a = blocks[i].forward(h);
        Eigen::MatrixXd bn_out;
        if (train) {
            BatchNorm::Cache bc;
            bn_out = norms[i].forward_train(a, bc);
            if (cache) cache->bn.push_back(std::move(bc));
        } else {
            bn_out = norms[i].forward_eval(a);
            if (cache) cache->bn.push_back({});
        }
        Eigen::MatrixXd mask = (bn_out.array() > 0.0).cast<double>();
        if (cache) cache->relu_mask.push_back(mask);
        Eigen::MatrixXd r = bn_out.cwiseProduct(mask);
        Eigen::MatrixXd next(h.rows(), h.cols() + r.cols());
        next << h, r;
        h = std::move(next);
    }
    if (cache) cache->final_in = h;
    return final_layer.forward(h);
}

void Generator::backward(const Cache& cache, const Eigen::MatrixXd& d_output) {
    Eigen::MatrixXd dh = final_layer.backward(cache.final_in, d_output);
    for (size_t i = blocks.size(); i-- > 0;) {
        const Eigen::Index prev_cols = cache.lin_in[i].cols();
        const Eigen::Index block_cols = dh.cols() - prev_cols;
        Eigen::MatrixXd d_r = dh.rightCols(block_cols);
        Eigen::MatrixXd d_prev = dh.leftCols(prev_cols);
        Eigen::MatrixXd d_bn = d_r.cwiseProduct(cache.relu_mask[i]);
        Eigen::MatrixXd d_a = norms[i].backward(cache.bn[i], d_bn);
        d_prev += blocks[i].backward(cache.lin_in[i], d_a);
        dh = std::move(d_prev);
    }
}

std::vector<Eigen::MatrixXd*> Generator::parameters() {
    std::vector<Eigen::MatrixXd*> out;
    for (auto& l : blocks) {
        out.push_back(&l.w);
        out.push_back(&l.b);
    }
    for (auto& n : norms) {
        out.push_back(&n.gamma);
        out.push_back(&n.beta);
    }
    out.push_back(&final_layer.w);
    out.push_back(&final_layer.b);
    return out;
}

std::vector<Eigen::MatrixXd*> Generator::gradients() {
    std::vector<Eigen::MatrixXd*> out;
    for (auto& l : blocks) {
        out.push_back(&l.gw);
        out.push_back(&l.gb);
    }
    for (auto& n : norms) {
        out.push_back(&n.ggamma);
        out.push_back(&n.gbeta);
    }
    out.push_back(&final_layer.gw);
    out.push_back(&final_layer.gb);
    return out;
}

Eigen::Index Generator::param_count() const {
    Eigen::Index total = final_layer.param_count();
    for (const auto& l : blocks) total += l.param_count();
    for (const auto& n : norms) total += n.param_count();
    return total;
}

// ---------------------------------------------------------------------------
// Discriminator

Discriminator::Discriminator(Eigen::Index input_dim, const std::vector<Eigen::Index>& hidden, Rng& rng)
    : input_dim_(input_dim) {
    Eigen::Index cur = input_dim;
    for (Eigen::Index h : hidden) {
        Linear lin;
        lin.init(cur, h, rng);
        layers.push_back(std::move(lin));
        cur = h;
    }
    final_layer.init(cur, 1, rng);
}

Eigen::VectorXd Discriminator::forward(const Eigen::MatrixXd& x, Rng* dropout_rng, Cache* cache) {
    if (x.cols() != input_dim_) throw Error(ErrorKind::Shape, "discriminator input width mismatch");
    Eigen::MatrixXd h = x;
    for (auto& layer : layers) {
        if (cache) cache->lin_in.push_back(h);
        Eigen::MatrixXd a = layer.forward(h);
        // LeakyReLU then dropout, folded into one elementwise multiplier.
        Eigen::MatrixXd mult =
            (a.array() > 0.0).select(Eigen::MatrixXd::Ones(a.rows(), a.cols()),
                                     Eigen::MatrixXd::Constant(a.rows(), a.cols(), leaky_slope));
        if (dropout_rng) {
            const double keep = 1.0 - dropout_p;
            for (Eigen::Index r = 0; r < mult.rows(); ++r)
                for (Eigen::Index c = 0; c < mult.cols(); ++c)
                    mult(r, c) = dropout_rng->uniform() < dropout_p ? 0.0 : mult(r, c) / keep;
        }
        if (cache) cache->act_mult.push_back(mult);
        h = a.cwiseProduct(mult);
    }
    if (cache) cache->lin_in.push_back(h);
    return final_layer.forward(h).col(0);
}

Eigen::MatrixXd Discriminator::backward(const Cache& cache, const Eigen::VectorXd& dy, bool accumulate) {
    Eigen::MatrixXd d = dy;
    if (accumulate) {
        d = final_layer.backward(cache.lin_in.back(), d);
    } else {
        d = d * final_layer.w.transpose();
    }
    for (size_t i = layers.size(); i-- > 0;) {
        d = d.cwiseProduct(cache.act_mult[i]);
        if (accumulate) {
            d = layers[i].backward(cache.lin_in[i], d);
        } else {
            d = d * layers[i].w.transpose();
        }
    }
    return d;
}

double Discriminator::gradient_penalty(const Eigen::MatrixXd& interpolated, double gp_weight,
                                       Rng* dropout_rng) {
    const Eigen::Index rows = interpolated.rows();
    Cache cache;
    forward(interpolated, dropout_rng, &cache);

    // Input gradient g per row, via backward with unit seed (no grads).
    Eigen::MatrixXd d = Eigen::MatrixXd::Ones(rows, 1) * final_layer.w.transpose();
    std::vector<Eigen::MatrixXd> delta(layers.size());
    for (size_t i = layers.size(); i-- > 0;) {
        d = d.cwiseProduct(cache.act_mult[i]);
        delta[i] = d;  // signal at layer i's pre-activation
        d = d * layers[i].w.transpose();
    }
    const Eigen::MatrixXd& g = d;  // rows x input_dim

    // Penalty and its derivative w.r.t. g.
    double penalty = 0.0;
    Eigen::MatrixXd u(rows, g.cols());
    for (Eigen::Index r = 0; r < rows; ++r) {
        double norm = g.row(r).norm();
        double diff = norm - 1.0;
        penalty += diff * diff;
        double coeff = norm > 1e-12 ? 2.0 * gp_weight * diff / (norm * static_cast<double>(rows)) : 0.0;
        u.row(r) = coeff * g.row(r);
    }
    penalty = gp_weight * penalty / static_cast<double>(rows);

    // Tangent pass: parameter gradients of <u, g>, exact because the critic
    // is piecewise linear (activation multipliers held fixed). Biases do not
    // appear in g and receive nothing.
    Eigen::MatrixXd t = u;
    for (size_t i = 0; i < layers.size(); ++i) {
        Eigen::MatrixXd s = t * layers[i].w;
        s = s.cwiseProduct(cache.act_mult[i]);
        layers[i].gw.noalias() += t.transpose() * delta[i];
        t = std::move(s);
    }
    final_layer.gw.noalias() += t.transpose() * Eigen::MatrixXd::Ones(rows, 1);
    return penalty;
}

std::vector<Eigen::MatrixXd*> Discriminator::parameters() {
    std::vector<Eigen::MatrixXd*> out;
    for (auto& l : layers) {
        out.push_back(&l.w);
        out.push_back(&l.b);
    }
    out.push_back(&final_layer.w);
    out.push_back(&final_layer.b);
    return out;
}

std::vector<Eigen::MatrixXd*> Discriminator::gradients() {
    std::vector<Eigen::MatrixXd*> out;
    for (auto& l : layers) {
        out.push_back(&l.gw);
        out.push_back(&l.gb);
    }
    out.push_back(&final_layer.gw);
    out.push_back(&final_layer.gb);
    return out;
}

Eigen::Index Discriminator::param_count() const {
    Eigen::Index total = final_layer.param_count();
    for (const auto& l : layers) total += l.param_count();
    return total;
}

// ---------------------------------------------------------------------------
// Output activations

Eigen::MatrixXd apply_activations(const Eigen::MatrixXd& raw, const std::vector<OutputSpan>& spans,
                                  double tau, const Eigen::MatrixXd& gumbel_noise) {
    Eigen::MatrixXd out(raw.rows(), raw.cols());
    for (const auto& span : spans) {
        if (!span.categorical) {
            out.block(0, span.start, raw.rows(), span.len) =
                raw.block(0, span.start, raw.rows(), span.len).array().tanh();
            continue;
        }
        for (Eigen::Index r = 0; r < raw.rows(); ++r) {
            Eigen::ArrayXd v = (raw.row(r).segment(span.start, span.len).transpose().array() +
                                gumbel_noise.row(r).segment(span.start, span.len).transpose().array()) /
                               tau;
            double vmax = v.maxCoeff();
            Eigen::ArrayXd e = (v - vmax).exp();
            out.row(r).segment(span.start, span.len) = (e / e.sum()).matrix().transpose();
        }
    }
    return out;
}

Eigen::MatrixXd activations_backward(const Eigen::MatrixXd& activated,
                                     const std::vector<OutputSpan>& spans, double tau,
                                     const Eigen::MatrixXd& d_activated) {
    Eigen::MatrixXd d_raw(activated.rows(), activated.cols());
    for (const auto& span : spans) {
        if (!span.categorical) {
            auto y = activated.block(0, span.start, activated.rows(), span.len).array();
            d_raw.block(0, span.start, activated.rows(), span.len) =
                (d_activated.block(0, span.start, activated.rows(), span.len).array() * (1.0 - y * y))
                    .matrix();
            continue;
        }
        for (Eigen::Index r = 0; r < activated.rows(); ++r) {
            Eigen::ArrayXd y = activated.row(r).segment(span.start, span.len).transpose().array();
            Eigen::ArrayXd dy = d_activated.row(r).segment(span.start, span.len).transpose().array();
            double dot = (y * dy).sum();
            d_raw.row(r).segment(span.start, span.len) = ((y * (dy - dot)) / tau).matrix().transpose();
        }
    }
    return d_raw;
}

double cross_entropy_block(const Eigen::MatrixXd& raw, const OutputSpan& span,
                           const std::vector<int>& targets, Eigen::MatrixXd& d_raw) {
    const Eigen::Index rows = raw.rows();
    double loss = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r) {
        Eigen::ArrayXd v = raw.row(r).segment(span.start, span.len).transpose().array();
        double vmax = v.maxCoeff();
        Eigen::ArrayXd e = (v - vmax).exp();
        double z = e.sum();
        Eigen::ArrayXd p = e / z;
        int target = targets[static_cast<size_t>(r)];
        loss -= std::log(std::max(p(target), 1e-300));
        Eigen::ArrayXd dp = p / static_cast<double>(rows);
        dp(target) -= 1.0 / static_cast<double>(rows);
        d_raw.row(r).segment(span.start, span.len) += dp.matrix().transpose();
    }
    return loss / static_cast<double>(rows);
}

}  // namespace scenalloc::sdg
