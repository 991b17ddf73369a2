/* Copyright (c) 2026 gpssl contributors. All rights reserved.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the project root.
 */
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gpssl/eval.hpp"
#include "gpssl/experiment.hpp"
#include "gpssl/format.hpp"

namespace fs = std::filesystem;
using namespace gpssl;

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::string> method;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_root;
};

ExperimentConfig resolve_config(const CommonArgs& args) {
    if (args.config_path.empty()) throw ConfigError("missing --config");
    ExperimentConfig config = load_config(args.config_path);
    if (args.method) config.method = *args.method;
    if (args.seed) config.seed = *args.seed;
    if (args.output_root) config.output_root = *args.output_root;
    config.validate();
    return config;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config JSON");
    auto bind_opt = [cmd](const char* name, auto& slot, const char* help) {
        cmd->add_option_function<typename std::decay_t<decltype(slot)>::value_type>(
            name, [&slot](const auto& v) { slot = v; }, help);
    };
    bind_opt("--method", args.method, "override method (gpssl|kpca|vicreg|original)");
    bind_opt("--seed", args.seed, "override seed");
    bind_opt("--output-root", args.output_root, "override output root directory");
}

int cmd_generate(const std::string& generator, std::uint64_t seed, int n_train, int n_test,
                 const std::string& out_dir) {
    DatasetSpec spec;
    spec.type = generator;
    spec.seed = seed;
    spec.n_train = n_train;
    spec.n_test = n_test;
    Dataset ds = build_dataset(spec);
    fs::create_directories(out_dir);
    write_dataset_csv(ds, (fs::path(out_dir) / "dataset.csv").string());
    write_manifest(ds, (fs::path(out_dir) / "manifest.json").string(), generator);
    std::cout << "wrote " << ds.rows() << " rows to " << out_dir << "/dataset.csv\n";
    return 0;
}

int cmd_train(const CommonArgs& args, const Hyperparams& hp) {
    const ExperimentConfig config = resolve_config(args);
    const std::string run_dir = run_directory(config);
    fs::create_directories(run_dir);

    Dataset dataset = build_dataset(config.dataset);
    if (dataset.splits.empty()) split_dataset(dataset, config.split_fractions, config.seed);
    fit_standardizer(dataset);
    save_standardizer(*dataset.standardizer, (fs::path(run_dir) / "standardizer.json").string());
    write_manifest(dataset, (fs::path(run_dir) / "manifest.json").string(),
                   dataset_name(config.dataset));

    const Eigen::MatrixXd x_train = dataset.standardized_rows(Split::Train);
    const EmbeddingModel model =
        train_embedding(config.method, x_train, config, hp, config.seed);
    if (model.gp) {
        save_model(*model.gp, (fs::path(run_dir) / "model_gpssl.json").string());
        write_trace_csv(model.gp_trace, (fs::path(run_dir) / "elbo_trace.csv").string());
    }
    if (model.vicreg_net) {
        save_vicreg(*model.vicreg_net, (fs::path(run_dir) / "model_vicreg.json").string());
    }
    if (config.method == "kpca" || config.method == "original") {
        std::cout << "note: method " << config.method << " keeps no model file; "
                  << "use `evaluate` for the full pipeline\n";
    }
    std::cout << "run directory: " << run_dir << "\n";
    return 0;
}

int cmd_embed(const std::string& model_path, const std::string& data_path,
              const std::optional<std::string>& label_column,
              const std::string& standardizer_path, const std::string& out_path) {
    Dataset ds = load_csv(data_path, label_column);
    Eigen::MatrixXd x = ds.features;
    if (!standardizer_path.empty()) {
        x = load_standardizer(standardizer_path).transform(x);
    }

    std::ifstream probe(model_path);
    if (!probe) throw ConfigError("cannot open model file " + model_path);
    nlohmann::json j;
    probe >> j;
    const std::string schema = j.value("schema", "");
    Eigen::MatrixXd means, stds;
    if (schema == "gpssl-sparse-gp-v1") {
        const SparseGPModel model = load_model(model_path);
        const RepresentationPosterior post = predict(x, model);
        means = post.means;
        stds = post.variances.cwiseSqrt();
    } else if (schema == "gpssl-vicreg-net-v1") {
        const MlpNet net = load_vicreg(model_path);
        means = vicreg_embed(x, net);
        stds = Eigen::MatrixXd::Zero(means.rows(), means.cols());
    } else {
        throw ConfigError("unknown model schema in " + model_path);
    }
    write_embeddings_csv(means, stds, out_path);
    std::cout << "wrote " << means.rows() << " embeddings to " << out_path << "\n";
    return 0;
}

int cmd_classify(const std::string& train_embeddings, const std::string& train_data,
                 const std::string& label_column, const std::string& test_embeddings,
                 const std::string& classifier, double prior_precision, int weight_samples,
                 std::uint64_t seed, const std::string& out_path) {
    const EmbeddingsFile train = read_embeddings_csv(train_embeddings);
    const EmbeddingsFile test = read_embeddings_csv(test_embeddings);
    const Dataset labeled = load_csv(train_data, label_column);
    if (!labeled.labels) throw ConfigError("classify: label column missing");
    if (labeled.labels->size() != train.means.rows()) {
        throw ConfigError("classify: label count does not match train embeddings");
    }

    Eigen::MatrixXd probs;
    if (classifier == "blr") {
        probs = blr_predict(test.means, blr_fit(train.means, *labeled.labels, prior_precision),
                            weight_samples, seed);
    } else if (classifier == "mlp") {
        MlpClassifierConfig mc;
        mc.seed = seed;
        probs = mlp_predict_proba(test.means, mlp_fit(train.means, *labeled.labels, mc));
    } else {
        throw ConfigError("classify: classifier must be blr or mlp");
    }
    write_predictions_csv(probs, out_path);
    std::cout << "wrote predictions to " << out_path << "\n";
    return 0;
}

int cmd_evaluate(const CommonArgs& args, int workers, const std::string& predictions_path,
                 const std::string& data_path, const std::string& label_column) {
    if (!predictions_path.empty()) {
        // metrics from existing prediction and label files
        const Dataset preds = load_csv(predictions_path, std::nullopt);
        const Dataset labeled = load_csv(data_path, label_column);
        if (!labeled.labels) throw ConfigError("evaluate: label column missing");
        Eigen::Index classes = 0;
        for (const std::string& name : preds.feature_names) {
            if (name.rfind("p_", 0) == 0) ++classes;
        }
        if (classes < 2) throw ConfigError("evaluate: prediction file lacks p_* columns");
        const Eigen::MatrixXd probs = preds.features.middleCols(1, classes);
        MetricsRow row;
        row.dataset = fs::path(data_path).stem().string();
        row.method = "from-file";
        row.accuracy = accuracy(probs, *labeled.labels);
        row.roc_auc = roc_auc(probs, *labeled.labels);
        row.aurc = risk_coverage(probs, *labeled.labels).aurc;
        row.log_likelihood = mean_log_likelihood(probs, *labeled.labels);
        std::cout << "accuracy=" << format_double(row.accuracy)
                  << " roc_auc=" << format_double(row.roc_auc)
                  << " aurc=" << format_double(row.aurc)
                  << " log_likelihood=" << format_double(row.log_likelihood) << "\n";
        return 0;
    }
    const ExperimentConfig config = resolve_config(args);
    const ExperimentResult result = run_experiment(config, workers);
    std::cout << "run directory: " << result.run_dir << "\n";
    for (const MetricsRow& row : result.metrics) {
        std::cout << row.method << ": accuracy=" << format_double(row.accuracy)
                  << " roc_auc=" << format_double(row.roc_auc)
                  << " aurc=" << format_double(row.aurc) << "\n";
    }
    return 0;
}

int cmd_grid(const CommonArgs& args, int workers) {
    const ExperimentConfig config = resolve_config(args);
    Dataset dataset = build_dataset(config.dataset);
    if (dataset.splits.empty()) split_dataset(dataset, config.split_fractions, config.seed);
    fit_standardizer(dataset);
    const GridSearchResult grid = run_grid_search(config, dataset, workers);
    const std::string run_dir = run_directory(config);
    fs::create_directories(run_dir);
    {
        std::ofstream out(fs::path(run_dir) / "best_params.json");
        out << grid.best.to_json().dump(2) << "\n";
    }
    std::ofstream out(fs::path(run_dir) / "grid_results.csv");
    out << "k,learning_rate,vicreg_c,noise_ratio,score,error\n";
    for (const GridPointResult& p : grid.points) {
        out << p.params.k << ',' << format_double(p.params.learning_rate) << ','
            << format_double(p.params.vicreg_c) << ',' << format_double(p.params.noise_ratio)
            << ',' << format_double(p.score) << ',' << p.error << '\n';
    }
    std::cout << "best score " << format_double(grid.best_score) << " at "
              << grid.best.to_json().dump() << "\n";
    std::cout << "run directory: " << run_dir << "\n";
    return 0;
}

int cmd_prop1(const CommonArgs& args) {
    const ExperimentConfig config = resolve_config(args);
    const Prop1Report report = run_prop1_check(config);
    std::cout << "lambda1=" << format_double(report.lambda1)
              << " predicted_critical=" << format_double(report.predicted_critical) << "\n";
    for (const Prop1Row& row : report.rows) {
        std::cout << "c_V=" << format_double(row.c_variance)
                  << " cosine=" << format_double(row.cosine)
                  << " bounded=" << (row.bounded ? 1 : 0) << "\n";
    }
    std::cout << "run directory: " << run_directory(config) << "\n";
    return 0;
}

int cmd_trace(const CommonArgs& args, const Hyperparams& hp) {
    CommonArgs gpssl_args = args;
    gpssl_args.method = "gpssl";
    return cmd_train(gpssl_args, hp);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian-process self-supervised representation learning"};
    app.require_subcommand(1);

    // generate
    std::string gen_kind = "balanced_circles", gen_out = ".";
    std::uint64_t gen_seed = 0;
    int gen_train = 50, gen_test = 500;
    CLI::App* generate = app.add_subcommand("generate", "write a synthetic dataset CSV");
    generate->add_option("--generator", gen_kind, "quadrant_circles | balanced_circles");
    generate->add_option("--seed", gen_seed, "generator seed");
    generate->add_option("--n-train", gen_train, "train rows (balanced_circles)");
    generate->add_option("--n-test", gen_test, "test rows (balanced_circles)");
    generate->add_option("--out", gen_out, "output directory")->required();

    auto add_hp = [](CLI::App* cmd, Hyperparams& hp) {
        cmd->add_option("--k", hp.k, "lengthscale neighbor divisor k (K = floor(N/k))");
        cmd->add_option("--learning-rate", hp.learning_rate, "optimizer learning rate");
        cmd->add_option("--vicreg-c", hp.vicreg_c, "VICReg c_I = c_V weight");
        cmd->add_option("--noise-ratio", hp.noise_ratio, "VICReg augmentation noise ratio");
    };

    CommonArgs train_args;
    Hyperparams train_hp;
    CLI::App* train_cmd = app.add_subcommand("train", "train one embedding model");
    add_common(train_cmd, train_args);
    add_hp(train_cmd, train_hp);

    std::string embed_model, embed_data, embed_std, embed_out = "embeddings.csv";
    std::string embed_label_column;
    CLI::App* embed_cmd = app.add_subcommand("embed", "embed a CSV with a saved model");
    embed_cmd->add_option("--model", embed_model)->required();
    embed_cmd->add_option("--data", embed_data)->required();
    embed_cmd->add_option("--label-column", embed_label_column, "label column to drop");
    embed_cmd->add_option("--standardizer", embed_std, "standardizer JSON from training");
    embed_cmd->add_option("--out", embed_out);

    std::string cls_train_emb, cls_train_data, cls_label = "label", cls_test_emb;
    std::string cls_kind = "blr", cls_out = "predictions.csv";
    double cls_prior = 1.0;
    int cls_samples = 100;
    std::uint64_t cls_seed = 0;
    CLI::App* classify_cmd =
        app.add_subcommand("classify", "fit a downstream classifier on embeddings");
    classify_cmd->add_option("--train-embeddings", cls_train_emb)->required();
    classify_cmd->add_option("--train-data", cls_train_data, "CSV holding the labels")
        ->required();
    classify_cmd->add_option("--label-column", cls_label);
    classify_cmd->add_option("--test-embeddings", cls_test_emb)->required();
    classify_cmd->add_option("--classifier", cls_kind, "blr | mlp");
    classify_cmd->add_option("--prior-precision", cls_prior);
    classify_cmd->add_option("--weight-samples", cls_samples);
    classify_cmd->add_option("--seed", cls_seed);
    classify_cmd->add_option("--out", cls_out);

    CommonArgs eval_args;
    int eval_workers = 1;
    std::string eval_predictions, eval_data, eval_label = "label";
    CLI::App* evaluate_cmd = app.add_subcommand(
        "evaluate", "run the full pipeline from a config, or score a predictions file");
    add_common(evaluate_cmd, eval_args);
    evaluate_cmd->add_option("--workers", eval_workers, "parallel grid workers");
    evaluate_cmd->add_option("--predictions", eval_predictions, "existing predictions CSV");
    evaluate_cmd->add_option("--data", eval_data, "labeled CSV for --predictions mode");
    evaluate_cmd->add_option("--label-column", eval_label);

    CommonArgs grid_args;
    int grid_workers = 1;
    CLI::App* grid_cmd = app.add_subcommand("grid", "hyperparameter grid search");
    add_common(grid_cmd, grid_args);
    grid_cmd->add_option("--workers", grid_workers, "parallel grid workers");

    CommonArgs prop1_args;
    CLI::App* prop1_cmd =
        app.add_subcommand("prop1-check", "kernel-PCA equivalence report");
    add_common(prop1_cmd, prop1_args);

    CommonArgs trace_args;
    Hyperparams trace_hp;
    CLI::App* trace_cmd = app.add_subcommand("trace", "train and emit the ELBO trace CSV");
    add_common(trace_cmd, trace_args);
    add_hp(trace_cmd, trace_hp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (generate->parsed()) {
            return cmd_generate(gen_kind, gen_seed, gen_train, gen_test, gen_out);
        }
        if (train_cmd->parsed()) return cmd_train(train_args, train_hp);
        if (embed_cmd->parsed()) {
            std::optional<std::string> label;
            if (!embed_label_column.empty()) label = embed_label_column;
            return cmd_embed(embed_model, embed_data, label, embed_std, embed_out);
        }
        if (classify_cmd->parsed()) {
            return cmd_classify(cls_train_emb, cls_train_data, cls_label, cls_test_emb,
                                cls_kind, cls_prior, cls_samples, cls_seed, cls_out);
        }
        if (evaluate_cmd->parsed()) {
            return cmd_evaluate(eval_args, eval_workers, eval_predictions, eval_data,
                                eval_label);
        }
        if (grid_cmd->parsed()) return cmd_grid(grid_args, grid_workers);
        if (prop1_cmd->parsed()) return cmd_prop1(prop1_args);
        if (trace_cmd->parsed()) return cmd_trace(trace_args, trace_hp);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const TrainingDivergedError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
