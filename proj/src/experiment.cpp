/* Copyright (c) 2026 gpssl contributors. All rights reserved.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the project root.
 */
#include "gpssl/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include "gpssl/eval.hpp"
#include "gpssl/format.hpp"

namespace gpssl {

using Eigen::MatrixXd;
using Eigen::VectorXi;

namespace fs = std::filesystem;

nlohmann::json DatasetSpec::to_json() const {
    nlohmann::json j;
    j["type"] = type;
    if (type == "csv") {
        j["path"] = path;
        if (label_column) j["label_column"] = *label_column;
    } else {
        j["seed"] = seed;
        if (type == "balanced_circles") {
            j["n_train"] = n_train;
            j["n_test"] = n_test;
        }
    }
    return j;
}

DatasetSpec DatasetSpec::from_json(const nlohmann::json& j) {
    DatasetSpec spec;
    spec.type = j.at("type").get<std::string>();
    if (spec.type == "csv") {
        spec.path = j.at("path").get<std::string>();
        if (j.contains("label_column")) spec.label_column = j.at("label_column").get<std::string>();
    } else if (spec.type == "quadrant_circles" || spec.type == "balanced_circles") {
        spec.seed = j.value("seed", 0ULL);
        spec.n_train = j.value("n_train", 50);
        spec.n_test = j.value("n_test", 500);
    } else {
        throw ConfigError("unknown dataset type: " + spec.type);
    }
    return spec;
}

Dataset build_dataset(const DatasetSpec& spec) {
    if (spec.type == "csv") {
        return load_csv(spec.path, spec.label_column);
    }
    if (spec.type == "quadrant_circles") {
        return gen_quadrant_circles(QuadrantCirclesConfig{}, spec.seed);
    }
    if (spec.type == "balanced_circles") {
        return gen_balanced_circles(spec.n_train, spec.n_test, spec.seed);
    }
    throw ConfigError("unknown dataset type: " + spec.type);
}

std::string dataset_name(const DatasetSpec& spec) {
    if (spec.type == "csv") {
        return fs::path(spec.path).stem().string();
    }
    return spec.type;
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["schema"] = "gpssl-experiment-v1";
    j["dataset"] = dataset.to_json();
    if (downstream_dataset) j["downstream_dataset"] = downstream_dataset->to_json();
    j["method"] = method;
    j["representation_dim"] = representation_dim;
    j["split_fractions"] = split_fractions;
    j["gpssl"] = {{"c_variance", gpssl_weights.c_variance},
                  {"c_covariance", gpssl_weights.c_covariance},
                  {"gamma", gpssl_weights.gamma},
                  {"epsilon", gpssl_weights.epsilon},
                  {"iterations", gpssl_iterations},
                  {"mc_samples", mc_samples},
                  {"num_inducing", num_inducing},
                  {"optimize_inducing", optimize_inducing}};
    j["vicreg"] = {{"c_covariance", vicreg_c_cov},
                   {"iterations", vicreg_iterations},
                   {"warmup_iterations", vicreg_warmup_iterations},
                   {"warmup_learning_rate", vicreg_warmup_lr}};
    j["grids"] = {{"k", grid_k},
                  {"learning_rate", grid_learning_rate},
                  {"vicreg_c", grid_vicreg_c},
                  {"vicreg_learning_rate", grid_vicreg_learning_rate},
                  {"noise_ratio", grid_noise_ratio}};
    j["classifier"] = {{"kind", use_mlp ? "mlp" : "blr"},
                       {"prior_precision", prior_precision},
                       {"blr_weight_samples", blr_weight_samples},
                       {"mlp_hidden", mlp_hidden},
                       {"mlp_epochs", mlp_epochs},
                       {"mlp_learning_rate", mlp_learning_rate}};
    j["num_embedding_samples"] = num_embedding_samples;
    j["prop1"] = {{"neighbor_k", prop1_neighbor_k}, {"c_grid", prop1_c_grid}};
    j["seed"] = seed;
    j["output_root"] = output_root;
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    if (j.value("schema", "gpssl-experiment-v1") != "gpssl-experiment-v1") {
        throw ConfigError("unknown config schema");
    }
    if (!j.contains("dataset")) throw ConfigError("config: missing dataset");
    c.dataset = DatasetSpec::from_json(j.at("dataset"));
    if (j.contains("downstream_dataset")) {
        c.downstream_dataset = DatasetSpec::from_json(j.at("downstream_dataset"));
    }
    c.method = j.value("method", c.method);
    c.representation_dim = j.value("representation_dim", c.representation_dim);
    if (j.contains("split_fractions")) {
        const auto f = j.at("split_fractions").get<std::vector<double>>();
        if (f.size() != 3) throw ConfigError("config: split_fractions needs 3 entries");
        c.split_fractions = {f[0], f[1], f[2]};
    }
    if (j.contains("gpssl")) {
        const auto& g = j.at("gpssl");
        c.gpssl_weights.c_variance = g.value("c_variance", c.gpssl_weights.c_variance);
        c.gpssl_weights.c_covariance = g.value("c_covariance", c.gpssl_weights.c_covariance);
        c.gpssl_weights.gamma = g.value("gamma", c.gpssl_weights.gamma);
        c.gpssl_weights.epsilon = g.value("epsilon", c.gpssl_weights.epsilon);
        c.gpssl_iterations = g.value("iterations", c.gpssl_iterations);
        c.mc_samples = g.value("mc_samples", c.mc_samples);
        c.num_inducing = g.value("num_inducing", c.num_inducing);
        c.optimize_inducing = g.value("optimize_inducing", c.optimize_inducing);
    }
    if (j.contains("vicreg")) {
        const auto& v = j.at("vicreg");
        c.vicreg_c_cov = v.value("c_covariance", c.vicreg_c_cov);
        c.vicreg_iterations = v.value("iterations", c.vicreg_iterations);
        c.vicreg_warmup_iterations = v.value("warmup_iterations", c.vicreg_warmup_iterations);
        c.vicreg_warmup_lr = v.value("warmup_learning_rate", c.vicreg_warmup_lr);
    }
    if (j.contains("grids")) {
        const auto& g = j.at("grids");
        if (g.contains("k")) c.grid_k = g.at("k").get<std::vector<int>>();
        if (g.contains("learning_rate"))
            c.grid_learning_rate = g.at("learning_rate").get<std::vector<double>>();
        if (g.contains("vicreg_c"))
            c.grid_vicreg_c = g.at("vicreg_c").get<std::vector<double>>();
        if (g.contains("vicreg_learning_rate"))
            c.grid_vicreg_learning_rate =
                g.at("vicreg_learning_rate").get<std::vector<double>>();
        if (g.contains("noise_ratio"))
            c.grid_noise_ratio = g.at("noise_ratio").get<std::vector<double>>();
    }
    if (j.contains("classifier")) {
        const auto& cl = j.at("classifier");
        const std::string kind = cl.value("kind", "blr");
        if (kind != "blr" && kind != "mlp") throw ConfigError("config: classifier kind");
        c.use_mlp = kind == "mlp";
        c.prior_precision = cl.value("prior_precision", c.prior_precision);
        c.blr_weight_samples = cl.value("blr_weight_samples", c.blr_weight_samples);
        c.mlp_hidden = cl.value("mlp_hidden", c.mlp_hidden);
        c.mlp_epochs = cl.value("mlp_epochs", c.mlp_epochs);
        c.mlp_learning_rate = cl.value("mlp_learning_rate", c.mlp_learning_rate);
    }
    c.num_embedding_samples = j.value("num_embedding_samples", c.num_embedding_samples);
    if (j.contains("prop1")) {
        c.prop1_neighbor_k = j.at("prop1").value("neighbor_k", c.prop1_neighbor_k);
        if (j.at("prop1").contains("c_grid"))
            c.prop1_c_grid = j.at("prop1").at("c_grid").get<std::vector<double>>();
    }
    c.seed = j.value("seed", c.seed);
    c.output_root = j.value("output_root", c.output_root);
    c.validate();
    return c;
}

void ExperimentConfig::validate() const {
    if (method != "gpssl" && method != "kpca" && method != "vicreg" && method != "original") {
        throw ConfigError("config: unknown method '" + method + "'");
    }
    if (representation_dim < 1) throw ConfigError("config: representation_dim must be >= 1");
    if (num_embedding_samples < 1) throw ConfigError("config: num_embedding_samples >= 1");
    if (gpssl_iterations < 1 || mc_samples < 1 || num_inducing < 1) {
        throw ConfigError("config: bad gpssl training settings");
    }
    gpssl_weights.validate();
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return ExperimentConfig::from_json(j);
}

std::string config_hash(const ExperimentConfig& config) {
    const std::string canonical = config.to_json().dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

std::string run_directory(const ExperimentConfig& config) {
    return (fs::path(config.output_root) /
            (config_hash(config) + "-s" + std::to_string(config.seed)))
        .string();
}

nlohmann::json Hyperparams::to_json() const {
    return {{"k", k},
            {"learning_rate", learning_rate},
            {"vicreg_c", vicreg_c},
            {"noise_ratio", noise_ratio}};
}

MatrixXd EmbeddingModel::embed(const MatrixXd& X) const {
    if (method == "original") return X;
    if (method == "gpssl") return predict(X, *gp).means;
    if (method == "kpca") return kpca_project(X, *kpca);
    if (method == "vicreg") return vicreg_embed(X, *vicreg_net);
    throw std::logic_error("EmbeddingModel: unknown method");
}

MatrixXd EmbeddingModel::embed_std(const MatrixXd& X) const {
    if (method == "gpssl") return predict(X, *gp).variances.cwiseSqrt();
    return MatrixXd::Zero(X.rows(), embed(X).cols());
}

namespace {

KernelSpec kernel_from_heuristic(const MatrixXd& Xtrain, int k, double jitter = 1e-6) {
    const int n = static_cast<int>(Xtrain.rows());
    int neighbors = k > 0 ? n / k : 1;
    neighbors = std::clamp(neighbors, 1, n - 1);
    KernelSpec spec;
    spec.signal_variance = 1.0;
    spec.lengthscales = lengthscale_heuristic(Xtrain, neighbors);
    spec.jitter = jitter;
    return spec;
}

}  // namespace

EmbeddingModel train_embedding(const std::string& method, const MatrixXd& Xtrain,
                               const ExperimentConfig& config, const Hyperparams& hp,
                               std::uint64_t seed) {
    EmbeddingModel model;
    model.method = method;
    if (method == "original") return model;

    if (method == "kpca") {
        model.kpca = kpca_fit(Xtrain, kernel_from_heuristic(Xtrain, hp.k),
                              config.representation_dim);
        return model;
    }
    if (method == "gpssl") {
        const KernelSpec kernel = kernel_from_heuristic(Xtrain, hp.k);
        SparseGPModel init =
            SparseGPModel::initialize(Xtrain, kernel, config.gpssl_weights,
                                      config.representation_dim, config.num_inducing, seed);
        TrainConfig tc;
        tc.iterations = config.gpssl_iterations;
        tc.learning_rate = hp.learning_rate;
        tc.mc_samples = config.mc_samples;
        tc.seed = seed;
        tc.optimize_inducing = config.optimize_inducing;
        TrainResult result = train(Xtrain, init, tc);
        model.gp = std::move(result.model);
        model.gp_trace = std::move(result.trace);
        return model;
    }
    if (method == "vicreg") {
        AugmentConfig aug;
        aug.noise_ratio = hp.noise_ratio;
        Eigen::VectorXd stds(Xtrain.cols());
        const Eigen::RowVectorXd mean = Xtrain.colwise().mean();
        for (Eigen::Index d = 0; d < Xtrain.cols(); ++d) {
            stds[d] = std::sqrt((Xtrain.col(d).array() - mean[d]).square().sum() /
                                static_cast<double>(Xtrain.rows()));
        }
        aug.feature_stds = stds;
        LossWeights w;
        w.c_invariance = hp.vicreg_c;
        w.c_variance = hp.vicreg_c;
        w.c_covariance = config.vicreg_c_cov;
        w.gamma = config.gpssl_weights.gamma;
        w.epsilon = config.gpssl_weights.epsilon;
        VicregTrainConfig vc;
        vc.representation_dim = config.representation_dim;
        vc.iterations = config.vicreg_iterations;
        vc.warmup_iterations = config.vicreg_warmup_iterations;
        vc.warmup_learning_rate = config.vicreg_warmup_lr;
        vc.learning_rate = hp.learning_rate;
        vc.seed = seed;
        model.vicreg_net = vicreg_train(Xtrain, aug, w, vc).net;
        return model;
    }
    throw ConfigError("train_embedding: unknown method " + method);
}

namespace {

std::vector<Hyperparams> grid_points(const ExperimentConfig& config) {
    std::vector<Hyperparams> points;
    if (config.method == "kpca") {
        for (int k : config.grid_k) {
            Hyperparams hp;
            hp.k = k;
            points.push_back(hp);
        }
    } else if (config.method == "gpssl") {
        for (int k : config.grid_k) {
            for (double lr : config.grid_learning_rate) {
                Hyperparams hp;
                hp.k = k;
                hp.learning_rate = lr;
                points.push_back(hp);
            }
        }
    } else if (config.method == "vicreg") {
        for (double c : config.grid_vicreg_c) {
            for (double lr : config.grid_vicreg_learning_rate) {
                for (double r : config.grid_noise_ratio) {
                    Hyperparams hp;
                    hp.vicreg_c = c;
                    hp.learning_rate = lr;
                    hp.noise_ratio = r;
                    points.push_back(hp);
                }
            }
        }
    }
    return points;
}

DownstreamConfig downstream_config(const ExperimentConfig& config, std::uint64_t seed) {
    DownstreamConfig dc;
    dc.use_mlp = config.use_mlp;
    dc.prior_precision = config.prior_precision;
    dc.blr_weight_samples = config.blr_weight_samples;
    dc.mlp.hidden = config.mlp_hidden;
    dc.mlp.epochs = config.mlp_epochs;
    dc.mlp.learning_rate = config.mlp_learning_rate;
    dc.seed = seed;
    return dc;
}

/// Mean validation log-likelihood of a single grid point.
double score_grid_point(const ExperimentConfig& config, const Dataset& dataset,
                        const Hyperparams& hp) {
    const MatrixXd x_train = dataset.standardized_rows(Split::Train);
    const MatrixXd x_val = dataset.standardized_rows(Split::Validation);
    const VectorXi y_val = dataset.labels_of(Split::Validation);

    const EmbeddingModel model =
        train_embedding(config.method, x_train, config, hp, config.seed);
    const MatrixXd z_val = model.embed(x_val);

    // 80/20 stratified split of the validation rows, shared across grid points.
    Dataset val;
    val.features = z_val;
    val.labels = y_val;
    split_dataset(val, {0.8, 0.2, 0.0}, config.seed ^ 0x9e3779b97f4a7c15ULL);
    const auto fit_idx = val.indices_of(Split::Train);
    const auto score_idx = val.indices_of(Split::Validation);
    MatrixXd z_fit(static_cast<Eigen::Index>(fit_idx.size()), z_val.cols());
    VectorXi y_fit(static_cast<Eigen::Index>(fit_idx.size()));
    for (std::size_t i = 0; i < fit_idx.size(); ++i) {
        z_fit.row(static_cast<Eigen::Index>(i)) = z_val.row(fit_idx[i]);
        y_fit[static_cast<Eigen::Index>(i)] = y_val[fit_idx[i]];
    }
    MatrixXd z_score(static_cast<Eigen::Index>(score_idx.size()), z_val.cols());
    VectorXi y_score(static_cast<Eigen::Index>(score_idx.size()));
    for (std::size_t i = 0; i < score_idx.size(); ++i) {
        z_score.row(static_cast<Eigen::Index>(i)) = z_val.row(score_idx[i]);
        y_score[static_cast<Eigen::Index>(i)] = y_val[score_idx[i]];
    }

    const DownstreamConfig dc = downstream_config(config, config.seed);
    MatrixXd probs;
    if (dc.use_mlp) {
        MlpClassifierConfig mc = dc.mlp;
        mc.seed = config.seed;
        probs = mlp_predict_proba(z_score, mlp_fit(z_fit, y_fit, mc));
    } else {
        probs = blr_predict(z_score, blr_fit(z_fit, y_fit, dc.prior_precision),
                            dc.blr_weight_samples, config.seed);
    }
    return mean_log_likelihood(probs, y_score);
}

void write_grid_csv(const GridSearchResult& grid, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_grid_csv: cannot open " + path);
    out << "k,learning_rate,vicreg_c,noise_ratio,score,error\n";
    for (const GridPointResult& p : grid.points) {
        out << p.params.k << ',' << format_double(p.params.learning_rate) << ','
            << format_double(p.params.vicreg_c) << ',' << format_double(p.params.noise_ratio)
            << ',' << format_double(p.score) << ',' << p.error << '\n';
    }
}

}  // namespace

GridSearchResult run_grid_search(const ExperimentConfig& config, const Dataset& dataset,
                                 int workers) {
    const std::vector<Hyperparams> points = grid_points(config);
    if (points.empty()) throw ConfigError("run_grid_search: empty grid for " + config.method);

    GridSearchResult result;
    result.points.resize(points.size());

    const int n_workers = std::max(1, workers);
    auto worker = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t i = begin; i < points.size(); i += stride) {
            GridPointResult& slot = result.points[i];
            slot.params = points[i];
            try {
                slot.score = score_grid_point(config, dataset, points[i]);
            } catch (const std::exception& e) {
                slot.score = -std::numeric_limits<double>::infinity();
                slot.error = e.what();
            }
        }
    };
    if (n_workers == 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(n_workers));
        for (int t = 0; t < n_workers; ++t) {
            threads.emplace_back(worker, static_cast<std::size_t>(t),
                                 static_cast<std::size_t>(n_workers));
        }
        for (std::thread& t : threads) t.join();
    }

    std::size_t best = 0;
    result.best_score = result.points[0].score;
    for (std::size_t i = 1; i < result.points.size(); ++i) {
        if (result.points[i].score > result.best_score) {  // ties keep the first point
            best = i;
            result.best_score = result.points[i].score;
        }
    }
    if (!std::isfinite(result.best_score)) {
        throw std::runtime_error("run_grid_search: every grid point failed");
    }
    result.best = result.points[best].params;
    return result;
}

namespace {

MetricsRow compute_metrics(const std::string& dataset, const std::string& method,
                           const MatrixXd& probs, const VectorXi& y) {
    MetricsRow row;
    row.dataset = dataset;
    row.method = method;
    row.accuracy = accuracy(probs, y);
    row.roc_auc = roc_auc(probs, y);
    row.aurc = risk_coverage(probs, y).aurc;
    row.log_likelihood = mean_log_likelihood(probs, y);
    return row;
}

}  // namespace

void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_metrics_csv: cannot open " + path);
    out << "dataset,method,accuracy,roc_auc,aurc,log_likelihood\n";
    for (const MetricsRow& r : rows) {
        out << r.dataset << ',' << r.method << ',' << format_double(r.accuracy) << ','
            << format_double(r.roc_auc) << ',' << format_double(r.aurc) << ','
            << format_double(r.log_likelihood) << '\n';
    }
}

void write_predictions_csv(const MatrixXd& probs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_predictions_csv: cannot open " + path);
    out << "id";
    for (Eigen::Index c = 0; c < probs.cols(); ++c) out << ",p_" << c;
    out << ",argmax,max_prob\n";
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        out << i;
        Eigen::Index best = 0;
        for (Eigen::Index c = 0; c < probs.cols(); ++c) {
            out << ',' << format_double(probs(i, c));
            if (probs(i, c) > probs(i, best)) best = c;
        }
        out << ',' << best << ',' << format_double(probs(i, best)) << '\n';
    }
}

ExperimentResult run_experiment(const ExperimentConfig& config, int workers) {
    config.validate();
    ExperimentResult result;
    result.run_dir = run_directory(config);
    fs::create_directories(result.run_dir);
    const fs::path dir(result.run_dir);

    {
        std::ofstream out(dir / "config.json");
        out << config.to_json().dump(2) << "\n";
    }

    // Embedding dataset: generators arrive pre-tagged, CSVs get the 40/20/40
    // protocol split.
    Dataset dataset = build_dataset(config.dataset);
    if (dataset.splits.empty()) {
        split_dataset(dataset, config.split_fractions, config.seed);
    }
    fit_standardizer(dataset);
    write_manifest(dataset, (dir / "manifest.json").string(), dataset_name(config.dataset));

    Hyperparams best;
    if (config.method != "original") {
        result.grid = run_grid_search(config, dataset, workers);
        best = result.grid.best;
        write_grid_csv(result.grid, (dir / "grid_results.csv").string());
        std::ofstream out(dir / "best_params.json");
        out << best.to_json().dump(2) << "\n";
    }

    const MatrixXd x_train = dataset.standardized_rows(Split::Train);
    const EmbeddingModel model =
        train_embedding(config.method, x_train, config, best, config.seed);
    if (model.gp) {
        save_model(*model.gp, (dir / "model_gpssl.json").string());
        write_trace_csv(model.gp_trace, (dir / "elbo_trace.csv").string());
    }
    if (model.vicreg_net) save_vicreg(*model.vicreg_net, (dir / "model_vicreg.json").string());

    // Downstream task: labeled fit set and test set, either from the embedding
    // dataset's protocol splits or from a separate downstream dataset run
    // through the same standardizer.
    MatrixXd x_fit, x_test;
    VectorXi y_fit, y_test;
    if (config.downstream_dataset) {
        Dataset dst = build_dataset(*config.downstream_dataset);
        if (dst.splits.empty()) split_dataset(dst, {0.1, 0.0, 0.9}, config.seed);
        x_fit = dataset.standardizer->transform(dst.raw_rows(Split::Train));
        x_test = dataset.standardizer->transform(dst.raw_rows(Split::Test));
        y_fit = dst.labels_of(Split::Train);
        y_test = dst.labels_of(Split::Test);
    } else {
        x_fit = dataset.standardized_rows(Split::Validation);
        x_test = dataset.standardized_rows(Split::Test);
        y_fit = dataset.labels_of(Split::Validation);
        y_test = dataset.labels_of(Split::Test);
    }

    const std::string name = dataset_name(config.dataset);
    const DownstreamConfig dc = downstream_config(config, config.seed);

    auto evaluate_variant = [&](const std::string& variant, const MatrixXd& probs) {
        result.metrics.push_back(compute_metrics(name, variant, probs, y_test));
        write_predictions_csv(probs, (dir / ("predictions_" + variant + ".csv")).string());
        write_risk_coverage_csv(risk_coverage(probs, y_test),
                                (dir / ("risk_coverage_" + variant + ".csv")).string());
    };

    if (config.method == "gpssl") {
        evaluate_variant("gpssl-mean",
                         gpssl_mean_pipeline(*model.gp, x_fit, y_fit, x_test, dc));
        evaluate_variant("gpssl-full",
                         gpssl_full_pipeline(*model.gp, x_fit, y_fit, x_test,
                                             config.num_embedding_samples, dc));
        write_embeddings_csv(model.embed(x_test), model.embed_std(x_test),
                             (dir / "embeddings_test.csv").string());
    } else {
        const MatrixXd z_fit = model.embed(x_fit);
        const MatrixXd z_test = model.embed(x_test);
        MatrixXd probs;
        if (dc.use_mlp) {
            MlpClassifierConfig mc = dc.mlp;
            mc.seed = config.seed;
            probs = mlp_predict_proba(z_test, mlp_fit(z_fit, y_fit, mc));
        } else {
            probs = blr_predict(z_test, blr_fit(z_fit, y_fit, dc.prior_precision),
                                dc.blr_weight_samples, config.seed);
        }
        evaluate_variant(config.method, probs);
        write_embeddings_csv(z_test, model.embed_std(x_test),
                             (dir / "embeddings_test.csv").string());
    }

    write_metrics_csv(result.metrics, (dir / "metrics.csv").string());
    return result;
}

Prop1Report run_prop1_check(const ExperimentConfig& config) {
    Dataset dataset = build_dataset(config.dataset);
    fit_standardizer(dataset);
    const MatrixXd x = dataset.standardized_all();
    const KernelSpec kernel = kernel_from_heuristic(x, config.prop1_neighbor_k);

    std::vector<double> c_grid = config.prop1_c_grid;
    if (c_grid.empty()) {
        // 15 fractions of the predicted critical weight, spanning past it
        const KpcaModel probe = kpca_fit(x, kernel, 1);
        const double critical =
            static_cast<double>(x.rows()) / (2.0 * probe.eigenvalues[0]);
        for (int i = 1; i <= 15; ++i) c_grid.push_back(critical * 0.1 * i);
    }
    const Prop1Report report = prop1_oracle(x, kernel, c_grid);

    const std::string run_dir = run_directory(config);
    fs::create_directories(run_dir);
    write_prop1_csv(report, (fs::path(run_dir) / "prop1_report.csv").string());
    return report;
}

}  // namespace gpssl
