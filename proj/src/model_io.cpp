#include "scenalloc/model_io.hpp"

#include <json.hpp>

#include "scenalloc/base64.hpp"
#include "scenalloc/csv.hpp"
#include "scenalloc/errors.hpp"

namespace scenalloc::sdg {

namespace {

using nlohmann::json;

json mat_to_json(const Eigen::MatrixXd& m) {
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", encode_matrix(m)}};
}

Eigen::MatrixXd mat_from_json(const json& j) {
    return decode_matrix(j.at("data").get<std::string>(), j.at("rows").get<Eigen::Index>(),
                         j.at("cols").get<Eigen::Index>());
}

json vec_to_json(const Eigen::VectorXd& v) {
    return json{{"rows", v.size()}, {"cols", 1}, {"data", encode_doubles(v.data(), static_cast<size_t>(v.size()))}};
}

Eigen::VectorXd vec_from_json(const json& j) {
    auto vals = decode_doubles(j.at("data").get<std::string>());
    if (static_cast<Eigen::Index>(vals.size()) != j.at("rows").get<Eigen::Index>())
        throw Error(ErrorKind::Data, "vector blob size mismatch");
    return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

json stats_to_json(const prep::NormalizationStats& s) {
    json flags = json::array();
    for (bool b : s.degenerate) flags.push_back(b);
    return json{{"means", vec_to_json(s.means)}, {"stds", vec_to_json(s.stds)}, {"degenerate", flags}};
}

prep::NormalizationStats stats_from_json(const json& j) {
    prep::NormalizationStats s;
    s.means = vec_from_json(j.at("means"));
    s.stds = vec_from_json(j.at("stds"));
    for (const auto& b : j.at("degenerate")) s.degenerate.push_back(b.get<bool>());
    return s;
}

json config_to_json(const CtganConfig& c) {
    return json{{"embedding_dim", c.embedding_dim},
                {"generator_dims", c.generator_dims},
                {"discriminator_dims", c.discriminator_dims},
                {"pac_size", c.pac_size},
                {"learning_rate", c.learning_rate},
                {"epochs", c.epochs},
                {"batch_size", c.batch_size},
                {"gumbel_tau", c.gumbel_tau},
                {"gp_weight", c.gp_weight},
                {"seed", c.seed},
                {"vgm_max_modes", c.vgm_max_modes},
                {"vgm_prune_weight", c.vgm_prune_weight},
                {"tsne_perplexity", c.tsne_perplexity},
                {"tsne_iterations", c.tsne_iterations},
                {"hdbscan_min_cluster_size", c.hdbscan_min_cluster_size}};
}

CtganConfig config_from_json(const json& j) {
    CtganConfig c;
    c.embedding_dim = j.at("embedding_dim").get<int>();
    c.generator_dims = j.at("generator_dims").get<std::vector<int>>();
    c.discriminator_dims = j.at("discriminator_dims").get<std::vector<int>>();
    c.pac_size = j.at("pac_size").get<int>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.epochs = j.at("epochs").get<int>();
    c.batch_size = j.at("batch_size").get<int>();
    c.gumbel_tau = j.at("gumbel_tau").get<double>();
    c.gp_weight = j.at("gp_weight").get<double>();
    c.seed = j.at("seed").get<uint64_t>();
    c.vgm_max_modes = j.at("vgm_max_modes").get<int>();
    c.vgm_prune_weight = j.at("vgm_prune_weight").get<double>();
    c.tsne_perplexity = j.at("tsne_perplexity").get<double>();
    c.tsne_iterations = j.at("tsne_iterations").get<int>();
    c.hdbscan_min_cluster_size = j.at("hdbscan_min_cluster_size").get<int>();
    return c;
}

std::vector<Eigen::Index> to_index(const std::vector<int>& dims) {
    std::vector<Eigen::Index> out;
    for (int d : dims) out.push_back(d);
    return out;
}

}  // namespace

void save_model(const SdgModel& model, const std::string& path) {
    json j;
    j["schema"] = "scenalloc.sdg_model";
    j["version"] = SdgModel::kSchemaVersion;
    j["config"] = config_to_json(model.config);

    j["stats"] = stats_to_json(model.pca.column_stats);
    j["pca"] = json{{"eigenvectors", mat_to_json(model.pca.eigenvectors)},
                    {"eigenvalues", vec_to_json(model.pca.eigenvalues)}};

    json mixtures = json::array();
    for (const auto& col : model.encoder.columns) {
        mixtures.push_back(json{{"means", vec_to_json(col.means)},
                                {"stds", vec_to_json(col.stds)},
                                {"weights", vec_to_json(col.weights)},
                                {"active", col.active_mode_indices},
                                {"converged", col.converged}});
    }
    j["mixtures"] = mixtures;

    j["labels"] = json{{"labels", model.clusters.labels},
                       {"k", model.clusters.k},
                       {"noise_reassigned", model.clusters.noise_reassigned},
                       {"single_cluster_fallback", model.clusters.single_cluster_fallback}};
    j["cluster_counts"] = vec_to_json(model.cluster_counts);

    json gblocks = json::array(), gnorms = json::array();
    for (const auto& l : model.generator.blocks)
        gblocks.push_back(json{{"w", mat_to_json(l.w)}, {"b", mat_to_json(l.b)}});
    for (const auto& n : model.generator.norms)
        gnorms.push_back(json{{"gamma", mat_to_json(n.gamma)},
                              {"beta", mat_to_json(n.beta)},
                              {"running_mean", vec_to_json(n.running_mean)},
                              {"running_var", vec_to_json(n.running_var)}});
    j["generator"] = json{{"blocks", gblocks},
                          {"norms", gnorms},
                          {"final", json{{"w", mat_to_json(model.generator.final_layer.w)},
                                         {"b", mat_to_json(model.generator.final_layer.b)}}}};

    json dlayers = json::array();
    for (const auto& l : model.discriminator.layers)
        dlayers.push_back(json{{"w", mat_to_json(l.w)}, {"b", mat_to_json(l.b)}});
    j["discriminator"] = json{{"layers", dlayers},
                              {"final", json{{"w", mat_to_json(model.discriminator.final_layer.w)},
                                             {"b", mat_to_json(model.discriminator.final_layer.b)}}}};

    j["history"] = json{{"loss_g", model.history.loss_g},
                        {"loss_d", model.history.loss_d},
                        {"gradient_penalty", model.history.gradient_penalty}};

    j["tickers"] = model.tickers;
    j["tenors"] = model.tenors;
    j["n_assets"] = model.n_assets;
    j["n_features"] = model.n_features;

    write_text_file(path, j.dump(1));
}

SdgModel load_model(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Data, strfmt("%s: %s", path.c_str(), e.what()));
    }
    if (j.value("schema", "") != "scenalloc.sdg_model")
        throw Error(ErrorKind::Schema, strfmt("%s: not a model file", path.c_str()));
    if (j.at("version").get<int>() != SdgModel::kSchemaVersion)
        throw Error(ErrorKind::Schema, strfmt("%s: unsupported model version %d", path.c_str(),
                                              j.at("version").get<int>()));

    SdgModel model;
    model.config = config_from_json(j.at("config"));
    model.pca.column_stats = stats_from_json(j.at("stats"));
    model.pca.eigenvectors = mat_from_json(j.at("pca").at("eigenvectors"));
    model.pca.eigenvalues = vec_from_json(j.at("pca").at("eigenvalues"));

    for (const auto& mj : j.at("mixtures")) {
        prep::VgmColumnModel col;
        col.means = vec_from_json(mj.at("means"));
        col.stds = vec_from_json(mj.at("stds"));
        col.weights = vec_from_json(mj.at("weights"));
        col.active_mode_indices = mj.at("active").get<std::vector<int>>();
        col.converged = mj.at("converged").get<bool>();
        model.encoder.columns.push_back(std::move(col));
    }

    model.clusters.labels = j.at("labels").at("labels").get<std::vector<int>>();
    model.clusters.k = j.at("labels").at("k").get<int>();
    model.clusters.noise_reassigned = j.at("labels").at("noise_reassigned").get<int>();
    model.clusters.single_cluster_fallback = j.at("labels").at("single_cluster_fallback").get<bool>();
    model.encoder.n_clusters = model.clusters.k;
    model.cluster_counts = vec_from_json(j.at("cluster_counts"));

    model.tickers = j.at("tickers").get<std::vector<std::string>>();
    model.tenors = j.at("tenors").get<std::vector<std::string>>();
    model.n_assets = j.at("n_assets").get<Eigen::Index>();
    model.n_features = j.at("n_features").get<Eigen::Index>();

    // Rebuild the networks with the stored dims, then overwrite every tensor.
    Rng dummy(0);
    const Eigen::Index d = model.encoder.encoded_dim();
    const Eigen::Index k = model.encoder.n_clusters;
    model.generator =
        Generator(model.config.embedding_dim + k, to_index(model.config.generator_dims), d, dummy);
    model.discriminator = Discriminator((d + k) * model.config.pac_size,
                                        to_index(model.config.discriminator_dims), dummy);

    const auto& gj = j.at("generator");
    if (gj.at("blocks").size() != model.generator.blocks.size())
        throw Error(ErrorKind::Data, "generator block count mismatch");
    for (size_t i = 0; i < model.generator.blocks.size(); ++i) {
        model.generator.blocks[i].w = mat_from_json(gj.at("blocks")[i].at("w"));
        model.generator.blocks[i].b = mat_from_json(gj.at("blocks")[i].at("b"));
        model.generator.norms[i].gamma = mat_from_json(gj.at("norms")[i].at("gamma"));
        model.generator.norms[i].beta = mat_from_json(gj.at("norms")[i].at("beta"));
        model.generator.norms[i].running_mean = vec_from_json(gj.at("norms")[i].at("running_mean"));
        model.generator.norms[i].running_var = vec_from_json(gj.at("norms")[i].at("running_var"));
    }
    model.generator.final_layer.w = mat_from_json(gj.at("final").at("w"));
    model.generator.final_layer.b = mat_from_json(gj.at("final").at("b"));

    const auto& dj = j.at("discriminator");
    for (size_t i = 0; i < model.discriminator.layers.size(); ++i) {
        model.discriminator.layers[i].w = mat_from_json(dj.at("layers")[i].at("w"));
        model.discriminator.layers[i].b = mat_from_json(dj.at("layers")[i].at("b"));
    }
    model.discriminator.final_layer.w = mat_from_json(dj.at("final").at("w"));
    model.discriminator.final_layer.b = mat_from_json(dj.at("final").at("b"));

    model.history.loss_g = j.at("history").at("loss_g").get<std::vector<double>>();
    model.history.loss_d = j.at("history").at("loss_d").get<std::vector<double>>();
    model.history.gradient_penalty = j.at("history").at("gradient_penalty").get<std::vector<double>>();
    return model;
}

}  // namespace scenalloc::sdg
