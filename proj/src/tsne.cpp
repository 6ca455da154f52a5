#include "scenalloc/tsne.hpp"

#include <cmath>

#include "scenalloc/errors.hpp"
#include "scenalloc/rng.hpp"

namespace scenalloc::prep {

namespace {

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x) {
    Eigen::VectorXd sq = x.rowwise().squaredNorm();
    Eigen::MatrixXd d2 = (-2.0 * x * x.transpose()).rowwise() + sq.transpose();
    d2.colwise() += sq;
    d2.diagonal().setZero();
    return d2.cwiseMax(0.0);
}

// Binary search of the Gaussian bandwidth for one row so that the conditional
// distribution hits the target entropy (log perplexity, in nats).
void fit_row_affinities(const Eigen::VectorXd& d2_row, Eigen::Index self, double target_entropy,
                        Eigen::VectorXd& p_row) {
    const Eigen::Index m = d2_row.size();
    double beta = 1.0, beta_lo = 0.0, beta_hi = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 64; ++iter) {
        double sum = 0.0, weighted = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (j == self) {
                p_row(j) = 0.0;
                continue;
            }
            double w = std::exp(-beta * d2_row(j));
            p_row(j) = w;
            sum += w;
            weighted += w * d2_row(j);
        }
        if (sum <= 0.0) {
            // All mass underflowed; spread uniformly over the others.
            p_row.setConstant(1.0 / static_cast<double>(m - 1));
            p_row(self) = 0.0;
            return;
        }
        double entropy = std::log(sum) + beta * weighted / sum;
        double diff = entropy - target_entropy;
        if (std::abs(diff) < 1e-7) break;
        if (diff > 0) {
            beta_lo = beta;
            beta = std::isfinite(beta_hi) ? 0.5 * (beta + beta_hi) : beta * 2.0;
        } else {
            beta_hi = beta;
            beta = 0.5 * (beta + beta_lo);
        }
    }
    double sum = p_row.sum();
    p_row /= sum;
}

double kl_divergence(const Eigen::MatrixXd& p, const Eigen::MatrixXd& y) {
    const Eigen::Index m = y.rows();
    double z = 0.0;
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i + 1; j < m; ++j)
            z += 2.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
    double kl = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            if (i == j) continue;
            double pij = p(i, j);
            if (pij <= 0.0) continue;
            double qij = std::max(1e-12, (1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm())) / z);
            kl += pij * std::log(pij / qij);
        }
    }
    return kl;
}

}  // namespace

TsneResult tsne_embed(const Eigen::MatrixXd& data, const TsneParams& params) {
    const Eigen::Index m = data.rows();
    if (m < 3) throw Error(ErrorKind::InsufficientData, "t-SNE needs at least 3 samples");
    if (params.perplexity < 1.0)
        throw Error(ErrorKind::Parameter, "perplexity must be at least 1");
    if (3.0 * params.perplexity > static_cast<double>(m))
        throw Error(ErrorKind::Parameter,
                    strfmt("perplexity %.3g too large for %lld samples (need m >= 3*perplexity)",
                           params.perplexity, static_cast<long long>(m)));
    if (!data.allFinite()) throw Error(ErrorKind::Numeric, "t-SNE input contains non-finite values");

    Eigen::MatrixXd d2 = squared_distances(data);
    const double target_entropy = std::log(params.perplexity);

    Eigen::MatrixXd p_cond(m, m);
    Eigen::VectorXd row(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        fit_row_affinities(d2.row(i).transpose(), i, target_entropy, row);
        p_cond.row(i) = row;
    }
    Eigen::MatrixXd p = (p_cond + p_cond.transpose()) / (2.0 * static_cast<double>(m));
    p = p.cwiseMax(1e-12);
    p.diagonal().setZero();

    Rng rng(derive_seed(params.seed, 0x7512e));
    Eigen::MatrixXd y(m, 2);
    for (Eigen::Index i = 0; i < m; ++i)
        for (int c = 0; c < 2; ++c) y(i, c) = 1e-2 * rng.normal();

    TsneResult result;
    result.initial_kl = kl_divergence(p, y);

    Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(m, 2);
    Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(m, 2);
    Eigen::MatrixXd grad(m, 2), qnum(m, m);

    for (int iter = 0; iter < params.iterations; ++iter) {
        const double exag = iter < params.exaggeration_iters ? params.exaggeration : 1.0;
        const double momentum = iter < params.momentum_switch_iter ? params.momentum_early : params.momentum_late;

        double z = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            qnum(i, i) = 0.0;
            for (Eigen::Index j = i + 1; j < m; ++j) {
                double q = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
                qnum(i, j) = q;
                qnum(j, i) = q;
                z += 2.0 * q;
            }
        }
        z = std::max(z, 1e-12);

        grad.setZero();
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index j = i + 1; j < m; ++j) {
                double mult = (exag * p(i, j) - std::max(1e-12, qnum(i, j) / z)) * qnum(i, j);
                double dx = y(i, 0) - y(j, 0);
                double dy = y(i, 1) - y(j, 1);
                grad(i, 0) += 4.0 * mult * dx;
                grad(i, 1) += 4.0 * mult * dy;
                grad(j, 0) -= 4.0 * mult * dx;
                grad(j, 1) -= 4.0 * mult * dy;
            }
        }

        for (Eigen::Index i = 0; i < m; ++i) {
            for (int c = 0; c < 2; ++c) {
                bool same_sign = (grad(i, c) > 0.0) == (velocity(i, c) > 0.0);
                gains(i, c) = same_sign ? std::max(0.01, gains(i, c) * 0.8) : gains(i, c) + 0.2;
                velocity(i, c) = momentum * velocity(i, c) - params.learning_rate * gains(i, c) * grad(i, c);
                y(i, c) += velocity(i, c);
            }
        }
        y.rowwise() -= y.colwise().mean();
    }

    if (!y.allFinite()) throw Error(ErrorKind::Numeric, "t-SNE produced non-finite coordinates");
    result.final_kl = kl_divergence(p, y);
    result.embedding = std::move(y);
    return result;
}

}  // namespace scenalloc::prep
