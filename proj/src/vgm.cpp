#include "scenalloc/vgm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "scenalloc/errors.hpp"

namespace scenalloc::prep {

namespace {

double digamma(double x) {
    // Recurrence to push the argument above 6, then the asymptotic series.
    double result = 0.0;
    while (x < 6.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    double inv = 1.0 / x;
    double inv2 = inv * inv;
    result += std::log(x) - 0.5 * inv -
              inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0));
    return result;
}

constexpr double kHalfLog2Pi = 0.918938533204672742;  // 0.5 * log(2*pi)

struct Component {
    double weight, mean, var;
};

// The variational fit leaves redundant components behind: stacks of
// near-identical Gaussians tiling one underlying mode, and occasionally a
// wide low-weight "background" spanning several modes. Neither constitutes a
// separate mode, so pairs whose mean gap is covered by twice the wider std
// are moment-match merged until stable.
void merge_overlapping(std::vector<Component>& comps) {
    bool merged = true;
    while (merged && comps.size() > 1) {
        merged = false;
        size_t bi = 0, bj = 0;
        double best = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < comps.size(); ++i) {
            for (size_t j = i + 1; j < comps.size(); ++j) {
                double si = std::sqrt(comps[i].var), sj = std::sqrt(comps[j].var);
                double gap = std::abs(comps[i].mean - comps[j].mean) / std::max(si, sj);
                if (gap <= 2.0 && gap < best) {
                    best = gap;
                    bi = i;
                    bj = j;
                    merged = true;
                }
            }
        }
        if (!merged) break;
        Component a = comps[bi], b = comps[bj];
        double w = a.weight + b.weight;
        double mean = (a.weight * a.mean + b.weight * b.mean) / w;
        double second = (a.weight * (a.var + a.mean * a.mean) + b.weight * (b.var + b.mean * b.mean)) / w;
        comps[bi] = {w, mean, std::max(0.0, second - mean * mean)};
        comps.erase(comps.begin() + static_cast<std::ptrdiff_t>(bj));
    }
}

}  // namespace

VgmColumnModel vgm_fit_column(const Eigen::VectorXd& column, const VgmFitParams& params) {
    const Eigen::Index m = column.size();
    const int K = params.max_modes;
    if (K < 1 || K > 64) throw Error(ErrorKind::Parameter, "max_modes must be in [1, 64]");
    if (m < 2 * K)
        throw Error(ErrorKind::InsufficientData,
                    strfmt("mixture fit needs at least %d samples, have %lld", 2 * K,
                           static_cast<long long>(m)));
    if (!column.allFinite()) throw Error(ErrorKind::Numeric, "mixture input contains non-finite values");

    const double data_mean = column.mean();
    const double data_var = (column.array() - data_mean).square().sum() / static_cast<double>(m);

    if (std::sqrt(std::max(0.0, data_var)) < 1e-12) {
        // Constant column: one mode centered on the value, std at the floor.
        VgmColumnModel model;
        model.means = Eigen::VectorXd::Constant(1, data_mean);
        model.stds = Eigen::VectorXd::Constant(1, VgmColumnModel::kStdFloor);
        model.weights = Eigen::VectorXd::Constant(1, 1.0);
        model.active_mode_indices = {0};
        return model;
    }

    // Variational Bayesian mixture, Dirichlet-process stick-breaking prior on
    // the weights. Priors: concentration 0.001, mean prior = sample mean with
    // precision 1, variance prior = sample variance with 1 degree of freedom.
    const double alpha0 = 0.001;
    const double beta0 = 1.0;
    const double m0 = data_mean;
    const double nu0 = 1.0;
    const double w0 = std::max(data_var, 1e-12);

    // Deterministic quantile init: equal-count bins over the sorted values.
    std::vector<Eigen::Index> order(static_cast<size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) order[static_cast<size_t>(i)] = i;
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return column(a) < column(b); });
    Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(m, K);
    for (Eigen::Index r = 0; r < m; ++r) {
        int bin = static_cast<int>((r * K) / m);
        resp(order[static_cast<size_t>(r)], bin) = 1.0;
    }

    Eigen::VectorXd nk(K), xbar(K), sk(K);
    Eigen::VectorXd beta_k(K), m_k(K), nu_k(K), cov_k(K);
    Eigen::VectorXd gamma1(K), gamma2(K), log_weights(K);
    bool converged = false;

    auto m_step = [&]() {
        for (int k = 0; k < K; ++k) {
            nk(k) = resp.col(k).sum() + 10.0 * std::numeric_limits<double>::epsilon();
            xbar(k) = resp.col(k).dot(column) / nk(k);
            sk(k) = (resp.col(k).array() * (column.array() - xbar(k)).square()).sum() / nk(k);
            beta_k(k) = beta0 + nk(k);
            m_k(k) = (beta0 * m0 + nk(k) * xbar(k)) / beta_k(k);
            nu_k(k) = nu0 + nk(k);
            double diff = xbar(k) - m0;
            cov_k(k) = (w0 + nk(k) * sk(k) + nk(k) * beta0 / beta_k(k) * diff * diff) / nu_k(k);
        }
        // Stick-breaking posterior for the weights.
        double tail = 0.0;
        for (int k = K - 1; k >= 0; --k) {
            gamma1(k) = 1.0 + nk(k);
            gamma2(k) = alpha0 + tail;
            tail += nk(k);
        }
        double acc = 0.0;
        for (int k = 0; k < K; ++k) {
            double dsum = digamma(gamma1(k) + gamma2(k));
            log_weights(k) = digamma(gamma1(k)) - dsum + acc;
            acc += digamma(gamma2(k)) - dsum;
        }
    };

    m_step();
    Eigen::MatrixXd logp(m, K);
    for (int iter = 0; iter < params.max_iterations; ++iter) {
        // E-step, vectorized per component.
        for (int k = 0; k < K; ++k) {
            double coef = 0.5 * (std::numbers::ln2 + digamma(0.5 * nu_k(k)) - std::log(nu_k(k))) -
                          0.5 / beta_k(k) - kHalfLog2Pi - 0.5 * std::log(cov_k(k)) + log_weights(k);
            logp.col(k) = coef - 0.5 / cov_k(k) * (column.array() - m_k(k)).square();
        }
        Eigen::VectorXd rowmax = logp.rowwise().maxCoeff();
        Eigen::MatrixXd expd = (logp.colwise() - rowmax).array().exp();
        Eigen::VectorXd denom = expd.rowwise().sum();
        expd.array().colwise() /= denom.array();
        double max_change = (expd - resp).cwiseAbs().maxCoeff();
        resp.swap(expd);
        m_step();
        if (max_change < params.tol) {
            converged = true;
            break;
        }
    }

    // Posterior expected weights under the stick-breaking representation.
    Eigen::VectorXd weights(K);
    double stick_remaining = 1.0;
    for (int k = 0; k < K; ++k) {
        double frac = gamma1(k) / (gamma1(k) + gamma2(k));
        weights(k) = frac * stick_remaining;
        stick_remaining *= 1.0 - frac;
    }
    weights /= weights.sum();

    std::vector<Component> comps;
    for (int k = 0; k < K; ++k) comps.push_back({weights(k), m_k(k), cov_k(k)});
    merge_overlapping(comps);

    std::vector<Component> active;
    for (const auto& c : comps)
        if (c.weight >= params.prune_weight) active.push_back(c);
    if (active.empty())
        active.push_back(*std::max_element(comps.begin(), comps.end(),
                                           [](const Component& a, const Component& b) { return a.weight < b.weight; }));
    std::sort(active.begin(), active.end(), [](const Component& a, const Component& b) { return a.mean < b.mean; });

    VgmColumnModel model;
    model.converged = converged;
    model.means.resize(static_cast<Eigen::Index>(active.size()));
    model.stds.resize(static_cast<Eigen::Index>(active.size()));
    model.weights.resize(static_cast<Eigen::Index>(active.size()));
    for (size_t j = 0; j < active.size(); ++j) {
        model.active_mode_indices.push_back(static_cast<int>(j));
        model.means(static_cast<Eigen::Index>(j)) = active[j].mean;
        model.stds(static_cast<Eigen::Index>(j)) =
            std::max(VgmColumnModel::kStdFloor, std::sqrt(active[j].var));
        model.weights(static_cast<Eigen::Index>(j)) = active[j].weight;
    }
    model.weights /= model.weights.sum();

    // Coverage pass: widen modes until every fitted sample sits within 4 std
    // of its most responsible mode, so the alpha encoding never clips on the
    // training data itself. Assignment is recomputed after each widening.
    for (int round = 0; round < 32; ++round) {
        Eigen::VectorXd needed = model.stds;
        for (Eigen::Index i = 0; i < m; ++i) {
            auto enc = mode_transform(model, column(i));
            double span = std::abs(column(i) - model.means(enc.mode)) / 4.0;
            needed(enc.mode) = std::max(needed(enc.mode), span);
        }
        if ((needed - model.stds).maxCoeff() <= 0.0) break;
        model.stds = needed;
    }
    return model;
}

ModeEncoding mode_transform(const VgmColumnModel& model, double value) {
    if (!std::isfinite(value)) throw Error(ErrorKind::Numeric, "mode_transform: non-finite value");
    const int K = model.n_modes();
    int best = 0;
    double best_logp = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
        double d = value - model.means(k);
        double lp = std::log(model.weights(k)) - std::log(model.stds(k)) -
                    0.5 * d * d / (model.stds(k) * model.stds(k));
        if (lp > best_logp) {
            best_logp = lp;
            best = k;
        }
    }
    ModeEncoding enc;
    enc.mode = best;
    enc.alpha = std::clamp((value - model.means(best)) / (4.0 * model.stds(best)), -1.0, 1.0);
    return enc;
}

double mode_inverse(const VgmColumnModel& model, double alpha, int mode) {
    if (mode < 0 || mode >= model.n_modes()) throw Error(ErrorKind::Parameter, "mode index out of range");
    return alpha * 4.0 * model.stds(mode) + model.means(mode);
}

}  // namespace scenalloc::prep
