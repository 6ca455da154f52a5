#include "scenalloc/ctgan.hpp"

#include <cmath>

#include "scenalloc/errors.hpp"
#include "scenalloc/tsne.hpp"
#include "scenalloc/zscore.hpp"

namespace scenalloc::sdg {

namespace {

std::vector<Eigen::Index> to_index(const std::vector<int>& dims) {
    std::vector<Eigen::Index> out;
    for (int d : dims) out.push_back(d);
    return out;
}

// Rows -> pac groups: group g is the concatenation of pac consecutive rows.
Eigen::MatrixXd pac_flatten(const Eigen::MatrixXd& rows, int pac) {
    const Eigen::Index groups = rows.rows() / pac;
    const Eigen::Index d = rows.cols();
    Eigen::MatrixXd out(groups, d * pac);
    for (Eigen::Index g = 0; g < groups; ++g)
        for (int s = 0; s < pac; ++s) out.block(g, s * d, 1, d) = rows.row(g * pac + s);
    return out;
}

Eigen::MatrixXd pac_unflatten(const Eigen::MatrixXd& groups_mat, int pac, Eigen::Index d) {
    const Eigen::Index groups = groups_mat.rows();
    Eigen::MatrixXd out(groups * pac, d);
    for (Eigen::Index g = 0; g < groups; ++g)
        for (int s = 0; s < pac; ++s) out.row(g * pac + s) = groups_mat.block(g, s * d, 1, d);
    return out;
}

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Eigen::MatrixXd out(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = rng.normal();
    return out;
}

Eigen::MatrixXd gumbel_matrix(const std::vector<OutputSpan>& spans, Eigen::Index rows,
                              Eigen::Index cols, Rng& rng) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
    for (const auto& span : spans) {
        if (!span.categorical) continue;
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = span.start; c < span.start + span.len; ++c) out(r, c) = rng.gumbel();
    }
    return out;
}

}  // namespace

CtganConfig CtganConfig::normalized() const {
    CtganConfig c = *this;
    if (c.pac_size < 1) throw Error(ErrorKind::Parameter, "pac_size must be >= 1");
    if (!(c.learning_rate > 0.0)) throw Error(ErrorKind::Parameter, "learning_rate must be > 0");
    if (c.epochs < 0) throw Error(ErrorKind::Parameter, "epochs must be >= 0");
    if (c.embedding_dim < 1) throw Error(ErrorKind::Parameter, "embedding_dim must be >= 1");
    if (c.batch_size < c.pac_size) c.batch_size = c.pac_size;
    c.batch_size -= c.batch_size % c.pac_size;
    return c;
}

// ---------------------------------------------------------------------------
// DataEncoder

Eigen::Index DataEncoder::encoded_dim() const {
    Eigen::Index d = 0;
    for (const auto& col : columns) d += 1 + col.n_modes();
    return d + n_clusters;
}

std::vector<OutputSpan> DataEncoder::spans() const {
    std::vector<OutputSpan> out;
    Eigen::Index pos = 0;
    for (const auto& col : columns) {
        out.push_back({pos, 1, false});
        pos += 1;
        out.push_back({pos, col.n_modes(), true});
        pos += col.n_modes();
    }
    out.push_back({pos, n_clusters, true});
    return out;
}

OutputSpan DataEncoder::cluster_span() const {
    return {encoded_dim() - n_clusters, static_cast<Eigen::Index>(n_clusters), true};
}

Eigen::MatrixXd DataEncoder::encode(const Eigen::MatrixXd& scores,
                                    const std::vector<int>& clusters) const {
    const Eigen::Index m = scores.rows();
    if (scores.cols() != static_cast<Eigen::Index>(columns.size()))
        throw Error(ErrorKind::Shape, "encode: column count mismatch");
    if (static_cast<Eigen::Index>(clusters.size()) != m)
        throw Error(ErrorKind::Shape, "encode: cluster labels do not match rows");
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, encoded_dim());
    Eigen::Index pos = 0;
    for (size_t c = 0; c < columns.size(); ++c) {
        for (Eigen::Index r = 0; r < m; ++r) {
            auto enc = prep::mode_transform(columns[c], scores(r, static_cast<Eigen::Index>(c)));
            out(r, pos) = enc.alpha;
            out(r, pos + 1 + enc.mode) = 1.0;
        }
        pos += 1 + columns[c].n_modes();
    }
    for (Eigen::Index r = 0; r < m; ++r) {
        int cl = clusters[static_cast<size_t>(r)];
        if (cl < 0 || cl >= n_clusters) throw Error(ErrorKind::Parameter, "cluster id out of range");
        out(r, pos + cl) = 1.0;
    }
    return out;
}

Eigen::MatrixXd DataEncoder::decode_scores(const Eigen::MatrixXd& rows) const {
    const Eigen::Index m = rows.rows();
    Eigen::MatrixXd out(m, static_cast<Eigen::Index>(columns.size()));
    Eigen::Index pos = 0;
    for (size_t c = 0; c < columns.size(); ++c) {
        const Eigen::Index k = columns[c].n_modes();
        for (Eigen::Index r = 0; r < m; ++r) {
            Eigen::Index mode;
            rows.row(r).segment(pos + 1, k).maxCoeff(&mode);
            double alpha = std::clamp(rows(r, pos), -1.0, 1.0);
            out(r, static_cast<Eigen::Index>(c)) =
                prep::mode_inverse(columns[c], alpha, static_cast<int>(mode));
        }
        pos += 1 + k;
    }
    return out;
}

std::vector<int> DataEncoder::decode_clusters(const Eigen::MatrixXd& rows) const {
    std::vector<int> out(static_cast<size_t>(rows.rows()));
    const Eigen::Index pos = encoded_dim() - n_clusters;
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        Eigen::Index id;
        rows.row(r).segment(pos, n_clusters).maxCoeff(&id);
        out[static_cast<size_t>(r)] = static_cast<int>(id);
    }
    return out;
}

// ---------------------------------------------------------------------------

std::pair<int, Eigen::VectorXd> sample_condition_vector(const Eigen::VectorXd& counts, Rng& rng) {
    const Eigen::Index k = counts.size();
    if (k < 1) throw Error(ErrorKind::Parameter, "need at least one cluster");
    Eigen::VectorXd mass(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        if (!(counts(j) > 0)) throw Error(ErrorKind::Parameter, "cluster counts must be positive");
        mass(j) = std::log1p(counts(j));
    }
    mass /= mass.sum();
    double u = rng.uniform();
    int chosen = static_cast<int>(k) - 1;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
        acc += mass(j);
        if (u < acc) {
            chosen = static_cast<int>(j);
            break;
        }
    }
    Eigen::VectorXd onehot = Eigen::VectorXd::Zero(k);
    onehot(chosen) = 1.0;
    return {chosen, onehot};
}

void ctgan_train(Generator& generator, Discriminator& discriminator, const Eigen::MatrixXd& encoded,
                 const std::vector<int>& cluster_labels, const Eigen::VectorXd& cluster_counts,
                 const std::vector<OutputSpan>& spans, const CtganConfig& raw_config,
                 TrainingHistory* history) {
    const CtganConfig config = raw_config.normalized();
    const Eigen::Index m = encoded.rows();
    const Eigen::Index d = encoded.cols();
    const int k = static_cast<int>(cluster_counts.size());
    const int pac = config.pac_size;
    const int batch = std::min<int>(config.batch_size, static_cast<int>(m) / pac * pac);
    if (batch < pac) throw Error(ErrorKind::InsufficientData, "fewer rows than one pac group");
    const int groups = batch / pac;
    if (static_cast<Eigen::Index>(cluster_labels.size()) != m)
        throw Error(ErrorKind::Shape, "cluster labels do not match encoded rows");

    std::vector<std::vector<Eigen::Index>> by_cluster(static_cast<size_t>(k));
    for (Eigen::Index r = 0; r < m; ++r)
        by_cluster[static_cast<size_t>(cluster_labels[static_cast<size_t>(r)])].push_back(r);
    for (int j = 0; j < k; ++j)
        if (by_cluster[static_cast<size_t>(j)].empty())
            throw Error(ErrorKind::Parameter, strfmt("cluster %d has no members", j));

    Rng rng(derive_seed(config.seed, 0xc76a11));

    AdamParams g_hp;
    g_hp.lr = config.learning_rate;
    g_hp.weight_decay = 1e-6;
    AdamParams d_hp;
    d_hp.lr = config.learning_rate;
    Adam g_opt, d_opt;
    g_opt.attach(generator.parameters(), generator.gradients(), g_hp);
    d_opt.attach(discriminator.parameters(), discriminator.gradients(), d_hp);

    const OutputSpan cond_span = spans.back();
    const int steps_per_epoch = std::max<int>(1, static_cast<int>(m) / batch);

    auto draw_batch = [&](Eigen::MatrixXd& cond, std::vector<int>& cond_ids) {
        cond = Eigen::MatrixXd::Zero(batch, k);
        cond_ids.resize(static_cast<size_t>(batch));
        for (int i = 0; i < batch; ++i) {
            auto [cid, onehot] = sample_condition_vector(cluster_counts, rng);
            cond_ids[static_cast<size_t>(i)] = cid;
            cond.row(i) = onehot.transpose();
        }
    };

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double epoch_loss_d = 0.0, epoch_loss_g = 0.0, epoch_gp = 0.0;
        for (int step = 0; step < steps_per_epoch; ++step) {
            // ---- critic update
            Eigen::MatrixXd cond;
            std::vector<int> cond_ids;
            draw_batch(cond, cond_ids);

            Eigen::MatrixXd real(batch, d);
            for (int i = 0; i < batch; ++i) {
                const auto& pool = by_cluster[static_cast<size_t>(cond_ids[static_cast<size_t>(i)])];
                real.row(i) = encoded.row(pool[rng.uniform_int(pool.size())]);
            }

            Eigen::MatrixXd z = gaussian_matrix(batch, config.embedding_dim, rng);
            Eigen::MatrixXd gen_in(batch, config.embedding_dim + k);
            gen_in << z, cond;
            Eigen::MatrixXd raw = generator.forward(gen_in, /*train=*/true, nullptr);
            Eigen::MatrixXd gnoise = gumbel_matrix(spans, batch, d, rng);
            Eigen::MatrixXd fake = apply_activations(raw, spans, config.gumbel_tau, gnoise);

            Eigen::MatrixXd real_cat(batch, d + k), fake_cat(batch, d + k);
            real_cat << real, cond;
            fake_cat << fake, cond;
            Eigen::MatrixXd real_pac = pac_flatten(real_cat, pac);
            Eigen::MatrixXd fake_pac = pac_flatten(fake_cat, pac);

            d_opt.zero_grad();
            Discriminator::Cache fc, rc;
            Eigen::VectorXd y_fake = discriminator.forward(fake_pac, &rng, &fc);
            Eigen::VectorXd y_real = discriminator.forward(real_pac, &rng, &rc);
            double loss_d = y_fake.mean() - y_real.mean();

            Eigen::VectorXd seed_pos = Eigen::VectorXd::Constant(groups, 1.0 / groups);
            Eigen::VectorXd seed_neg = Eigen::VectorXd::Constant(groups, -1.0 / groups);
            discriminator.backward(fc, seed_pos, /*accumulate=*/true);
            discriminator.backward(rc, seed_neg, /*accumulate=*/true);

            Eigen::MatrixXd interp(groups, real_pac.cols());
            for (int g = 0; g < groups; ++g) {
                double a = rng.uniform();
                interp.row(g) = a * real_pac.row(g) + (1.0 - a) * fake_pac.row(g);
            }
            double gp = discriminator.gradient_penalty(interp, config.gp_weight, &rng);
            d_opt.step();

            // ---- generator update
            draw_batch(cond, cond_ids);
            z = gaussian_matrix(batch, config.embedding_dim, rng);
            gen_in << z, cond;
            Generator::Cache gcache;
            raw = generator.forward(gen_in, /*train=*/true, &gcache);
            gnoise = gumbel_matrix(spans, batch, d, rng);
            fake = apply_activations(raw, spans, config.gumbel_tau, gnoise);
            fake_cat << fake, cond;
            fake_pac = pac_flatten(fake_cat, pac);

            Discriminator::Cache gc;
            Eigen::VectorXd y = discriminator.forward(fake_pac, &rng, &gc);
            double adv = -y.mean();

            Eigen::MatrixXd d_pac = discriminator.backward(gc, seed_neg, /*accumulate=*/false);
            Eigen::MatrixXd d_cat = pac_unflatten(d_pac, pac, d + k);
            Eigen::MatrixXd d_fake = d_cat.leftCols(d);
            Eigen::MatrixXd d_raw = activations_backward(fake, spans, config.gumbel_tau, d_fake);
            double ce = cross_entropy_block(raw, cond_span, cond_ids, d_raw);

            g_opt.zero_grad();
            generator.backward(gcache, d_raw);
            g_opt.step();

            double loss_g = adv + ce;
            if (!std::isfinite(loss_d) || !std::isfinite(loss_g) || !std::isfinite(gp))
                throw Error(ErrorKind::Numeric,
                            strfmt("non-finite loss at epoch %d (loss_d=%g loss_g=%g gp=%g)", epoch,
                                   loss_d, loss_g, gp));
            epoch_loss_d += loss_d;
            epoch_loss_g += loss_g;
            epoch_gp += gp;
        }
        if (history) {
            history->loss_d.push_back(epoch_loss_d / steps_per_epoch);
            history->loss_g.push_back(epoch_loss_g / steps_per_epoch);
            history->gradient_penalty.push_back(epoch_gp / steps_per_epoch);
        }
    }
}

SdgModel train_sdg_pipeline(const market::ScenarioTable& history, const CtganConfig& raw_config) {
    const CtganConfig config = raw_config.normalized();
    const Eigen::Index m = history.n_scenarios();
    if (m < 200)
        throw Error(ErrorKind::InsufficientData,
                    strfmt("pipeline needs at least 200 scenarios, have %lld", static_cast<long long>(m)));

    SdgModel model;
    model.config = config;
    model.tickers = history.tickers;
    model.tenors = history.tenors;
    model.n_assets = history.n_assets();
    model.n_features = history.n_features();

    Eigen::MatrixXd data(m, model.n_assets + model.n_features);
    data << history.R.transpose(), history.F.transpose();

    Eigen::MatrixXd scores;
    try {
        model.pca = prep::pca_fit(data);
        scores = prep::pca_transform(model.pca, data);
    } catch (const Error& e) {
        throw Error(e.kind(), strfmt("stage pca: %s", e.what()));
    }

    Eigen::MatrixXd embedding;
    try {
        prep::TsneParams tp;
        tp.perplexity = config.tsne_perplexity;
        tp.iterations = config.tsne_iterations;
        tp.seed = derive_seed(config.seed, 0x75e3);
        embedding = prep::tsne_embed(scores, tp).embedding;
    } catch (const Error& e) {
        throw Error(e.kind(), strfmt("stage tsne: %s", e.what()));
    }

    try {
        model.clusters = prep::hdbscan_cluster(embedding, config.hdbscan_min_cluster_size);
    } catch (const Error& e) {
        throw Error(e.kind(), strfmt("stage hdbscan: %s", e.what()));
    }

    try {
        prep::VgmFitParams vp;
        vp.max_modes = config.vgm_max_modes;
        vp.prune_weight = config.vgm_prune_weight;
        for (Eigen::Index c = 0; c < scores.cols(); ++c)
            model.encoder.columns.push_back(prep::vgm_fit_column(scores.col(c), vp));
    } catch (const Error& e) {
        throw Error(e.kind(), strfmt("stage vgm: %s", e.what()));
    }
    model.encoder.n_clusters = model.clusters.k;

    model.cluster_counts = Eigen::VectorXd::Zero(model.clusters.k);
    for (int lbl : model.clusters.labels) model.cluster_counts(lbl) += 1.0;

    Eigen::MatrixXd encoded = model.encoder.encode(scores, model.clusters.labels);

    Rng init_rng(derive_seed(config.seed, 0x1417));
    const Eigen::Index d = model.encoder.encoded_dim();
    const Eigen::Index k = model.encoder.n_clusters;
    model.generator = Generator(config.embedding_dim + k, to_index(config.generator_dims), d, init_rng);
    model.discriminator =
        Discriminator((d + k) * config.pac_size, to_index(config.discriminator_dims), init_rng);

    try {
        ctgan_train(model.generator, model.discriminator, encoded, model.clusters.labels,
                    model.cluster_counts, model.encoder.spans(), config, &model.history);
    } catch (const Error& e) {
        throw Error(e.kind(), strfmt("stage ctgan: %s", e.what()));
    }
    return model;
}

Eigen::VectorXd generator_forward(SdgModel& model, const Eigen::VectorXd& noise,
                                  const Eigen::VectorXd& condition, Rng& rng) {
    if (noise.size() != model.config.embedding_dim || condition.size() != model.condition_dim())
        throw Error(ErrorKind::Shape, "generator_forward: noise/condition dims do not match the model");
    Eigen::MatrixXd input(1, noise.size() + condition.size());
    input << noise.transpose(), condition.transpose();
    Eigen::MatrixXd raw = model.generator.forward(input, /*train=*/false, nullptr);
    auto spans = model.encoder.spans();
    Eigen::MatrixXd gnoise = gumbel_matrix(spans, 1, raw.cols(), rng);
    return apply_activations(raw, spans, model.config.gumbel_tau, gnoise).row(0).transpose();
}

SyntheticDataset generate_synthetic(SdgModel& model, Eigen::Index count, Rng& rng) {
    if (count < 1) throw Error(ErrorKind::Parameter, "need at least one synthetic sample");
    const Eigen::Index k = model.condition_dim();
    Eigen::MatrixXd cond = Eigen::MatrixXd::Zero(count, k);
    for (Eigen::Index i = 0; i < count; ++i) {
        auto [cid, onehot] = sample_condition_vector(model.cluster_counts, rng);
        cond.row(i) = onehot.transpose();
    }
    Eigen::MatrixXd z = gaussian_matrix(count, model.config.embedding_dim, rng);
    Eigen::MatrixXd input(count, model.config.embedding_dim + k);
    input << z, cond;
    Eigen::MatrixXd raw = model.generator.forward(input, /*train=*/false, nullptr);
    // Deterministic activation at sampling time: no gumbel noise, hardening
    // picks the argmax block entries.
    auto spans = model.encoder.spans();
    Eigen::MatrixXd zero_noise = Eigen::MatrixXd::Zero(count, raw.cols());
    Eigen::MatrixXd activated = apply_activations(raw, spans, model.config.gumbel_tau, zero_noise);

    Eigen::MatrixXd scores = model.encoder.decode_scores(activated);
    std::vector<int> cluster_ids = model.encoder.decode_clusters(activated);
    Eigen::MatrixXd decoded = prep::pca_inverse(model.pca, scores);
    if (!decoded.allFinite()) throw Error(ErrorKind::Numeric, "synthetic decode produced non-finite values");

    SyntheticDataset out;
    out.tickers = model.tickers;
    out.tenors = model.tenors;
    out.cluster_ids = std::move(cluster_ids);
    out.R = decoded.leftCols(model.n_assets).transpose();
    out.F = decoded.rightCols(model.n_features).transpose();
    return out;
}

market::ScenarioTable SyntheticDataset::as_table() const {
    market::ScenarioTable t;
    t.R = R;
    t.F = F;
    t.tickers = tickers;
    t.tenors = tenors;
    return t;
}

}  // namespace scenalloc::sdg
