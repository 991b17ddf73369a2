/* Copyright (c) 2026 gpssl contributors. All rights reserved.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the project root.
 */
#include "gpssl/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "gpssl/format.hpp"

namespace gpssl {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

Standardizer Standardizer::fit(const MatrixXd& rows) {
    if (rows.rows() < 1) throw std::invalid_argument("Standardizer: no rows");
    Standardizer s;
    s.means = rows.colwise().mean();
    const double n = static_cast<double>(rows.rows());
    s.stds.resize(rows.cols());
    for (Eigen::Index d = 0; d < rows.cols(); ++d) {
        const double var = (rows.col(d).array() - s.means[d]).square().sum() / n;
        const double sd = std::sqrt(var);
        s.stds[d] = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

MatrixXd Standardizer::transform(const MatrixXd& X) const {
    if (X.cols() != means.size()) throw std::invalid_argument("Standardizer: dim mismatch");
    return (X.rowwise() - means.transpose()).array().rowwise() /
           stds.transpose().array();
}

MatrixXd Standardizer::inverse(const MatrixXd& X) const {
    if (X.cols() != means.size()) throw std::invalid_argument("Standardizer: dim mismatch");
    return (X.array().rowwise() * stds.transpose().array()).matrix().rowwise() +
           means.transpose();
}

std::vector<Eigen::Index> Dataset::indices_of(Split s) const {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(splits.size()); ++i) {
        if (splits[static_cast<std::size_t>(i)] == s) idx.push_back(i);
    }
    return idx;
}

MatrixXd Dataset::raw_rows(Split s) const {
    const auto idx = indices_of(s);
    MatrixXd out(static_cast<Eigen::Index>(idx.size()), features.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = features.row(idx[i]);
    return out;
}

MatrixXd Dataset::standardized_rows(Split s) const {
    if (!standardizer) throw std::logic_error("Dataset: standardizer not fitted");
    return standardizer->transform(raw_rows(s));
}

MatrixXd Dataset::standardized_all() const {
    if (!standardizer) throw std::logic_error("Dataset: standardizer not fitted");
    return standardizer->transform(features);
}

VectorXi Dataset::labels_of(Split s) const {
    if (!labels) throw std::logic_error("Dataset: no labels");
    const auto idx = indices_of(s);
    VectorXi out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = (*labels)[idx[i]];
    return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size() && std::isfinite(out);
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

Dataset load_csv(const std::string& path, const std::optional<std::string>& label_column) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty file " + path);
    const auto header = split_line(line);
    if (header.empty()) throw std::runtime_error("load_csv: missing header in " + path);

    int label_idx = -1;
    Dataset ds;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string name = trim(header[c]);
        if (label_column && name == *label_column) {
            label_idx = static_cast<int>(c);
        } else {
            ds.feature_names.push_back(name);
        }
    }
    if (label_column && label_idx < 0) {
        throw std::runtime_error("load_csv: label column '" + *label_column + "' not found");
    }

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size()) {
            throw std::runtime_error("load_csv: row " + std::to_string(line_no) + " has " +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(header.size()));
        }
        std::vector<double> row;
        row.reserve(header.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string cell = trim(cells[c]);
            if (static_cast<int>(c) == label_idx) {
                if (cell.empty()) {
                    throw std::runtime_error("load_csv: missing label at row " +
                                             std::to_string(line_no));
                }
                auto it = std::find(ds.label_names.begin(), ds.label_names.end(), cell);
                if (it == ds.label_names.end()) {
                    ds.label_names.push_back(cell);
                    labels.push_back(static_cast<int>(ds.label_names.size()) - 1);
                } else {
                    labels.push_back(static_cast<int>(it - ds.label_names.begin()));
                }
                continue;
            }
            double v = 0.0;
            if (cell.empty() || !parse_number(cell, v)) {
                throw std::runtime_error("load_csv: missing or non-numeric value at row " +
                                         std::to_string(line_no) + ", column '" +
                                         trim(header[c]) + "'");
            }
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("load_csv: no data rows in " + path);

    ds.features.resize(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < rows[i].size(); ++c)
            ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    if (label_idx >= 0) {
        VectorXi y(static_cast<Eigen::Index>(labels.size()));
        for (std::size_t i = 0; i < labels.size(); ++i) y[static_cast<Eigen::Index>(i)] = labels[i];
        ds.labels = std::move(y);
    }
    return ds;
}

namespace {

/// Assigns `total` rows to splits with floor(f*total) each, remainders by
/// largest fractional part (ties by split order).
std::array<int, 3> split_counts(int total, const std::array<double, 3>& fractions) {
    std::array<int, 3> counts{};
    std::array<double, 3> rem{};
    int assigned = 0;
    for (int k = 0; k < 3; ++k) {
        const double exact = fractions[static_cast<std::size_t>(k)] * total;
        counts[static_cast<std::size_t>(k)] = static_cast<int>(std::floor(exact + 1e-12));
        rem[static_cast<std::size_t>(k)] = exact - counts[static_cast<std::size_t>(k)];
        assigned += counts[static_cast<std::size_t>(k)];
    }
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return rem[static_cast<std::size_t>(a)] > rem[static_cast<std::size_t>(b)]; });
    for (int k = 0; assigned < total; ++k) {
        counts[static_cast<std::size_t>(order[static_cast<std::size_t>(k % 3)])] += 1;
        ++assigned;
    }
    return counts;
}

}  // namespace

void split_dataset(Dataset& dataset, const std::array<double, 3>& fractions,
                   std::uint64_t seed) {
    const double sum = fractions[0] + fractions[1] + fractions[2];
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("split_dataset: fractions must sum to 1");
    }
    for (double f : fractions) {
        if (f < 0.0) throw std::invalid_argument("split_dataset: negative fraction");
    }
    const Eigen::Index n = dataset.rows();
    dataset.splits.assign(static_cast<std::size_t>(n), Split::Train);
    dataset.seed = seed;
    std::mt19937_64 rng(seed);

    int n_splits = 0;
    for (double f : fractions) {
        if (f > 0.0) ++n_splits;
    }

    auto assign_group = [&](std::vector<Eigen::Index>& idx) {
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto counts = split_counts(static_cast<int>(idx.size()), fractions);
        std::size_t pos = 0;
        for (int k = 0; k < 3; ++k) {
            for (int c = 0; c < counts[static_cast<std::size_t>(k)]; ++c) {
                dataset.splits[static_cast<std::size_t>(idx[pos++])] = static_cast<Split>(k);
            }
        }
    };

    if (dataset.labels) {
        const int n_classes = dataset.labels->size() > 0 ? dataset.labels->maxCoeff() + 1 : 0;
        for (int c = 0; c < n_classes; ++c) {
            std::vector<Eigen::Index> idx;
            for (Eigen::Index i = 0; i < n; ++i) {
                if ((*dataset.labels)[i] == c) idx.push_back(i);
            }
            if (static_cast<int>(idx.size()) < n_splits) {
                throw std::invalid_argument("split_dataset: class " + std::to_string(c) +
                                            " has fewer rows than splits");
            }
            assign_group(idx);
        }
    } else {
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        assign_group(idx);
    }
}

void fit_standardizer(Dataset& dataset) {
    const MatrixXd rows =
        dataset.splits.empty() ? dataset.features : dataset.raw_rows(Split::Train);
    dataset.standardizer = Standardizer::fit(rows);
}

namespace {

constexpr double kPi = 3.14159265358979323846;

void append_circle_points(std::vector<Split>& tags, int count, Split tag,
                          double angle_lo, double angle_hi,
                          const QuadrantCirclesConfig& cfg, std::mt19937_64& rng,
                          std::vector<Eigen::Vector2d>& pts, std::vector<int>& labels) {
    std::uniform_int_distribution<int> circle(0, 1);
    std::uniform_real_distribution<double> angle(angle_lo, angle_hi);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int i = 0; i < count; ++i) {
        const int c = circle(rng);
        const double r = cfg.radii[static_cast<std::size_t>(c)];
        const double a = angle(rng);
        Eigen::Vector2d p(r * std::cos(a), r * std::sin(a));
        p.x() += cfg.noise_std * noise(rng);
        p.y() += cfg.noise_std * noise(rng);
        pts.push_back(p);
        labels.push_back(c);
        tags.push_back(tag);
    }
}

Dataset assemble_circles(const std::vector<Eigen::Vector2d>& pts,
                         const std::vector<int>& labels, std::vector<Split> tags,
                         std::uint64_t seed) {
    Dataset ds;
    ds.features.resize(static_cast<Eigen::Index>(pts.size()), 2);
    VectorXi y(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
        ds.features.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
        y[static_cast<Eigen::Index>(i)] = labels[i];
    }
    ds.labels = std::move(y);
    ds.label_names = {"inner", "outer"};
    ds.feature_names = {"x1", "x2"};
    ds.splits = std::move(tags);
    ds.seed = seed;
    return ds;
}

}  // namespace

Dataset gen_quadrant_circles(const QuadrantCirclesConfig& config, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Eigen::Vector2d> pts;
    std::vector<int> labels;
    std::vector<Split> tags;
    // top-right, top-left, bottom-left, bottom-right
    const std::array<double, 4> lo{0.0, kPi / 2.0, kPi, 3.0 * kPi / 2.0};
    for (std::size_t q = 0; q < 4; ++q) {
        append_circle_points(tags, config.counts[q].train, Split::Train, lo[q],
                             lo[q] + kPi / 2.0, config, rng, pts, labels);
        append_circle_points(tags, config.counts[q].validation, Split::Validation,
                             lo[q], lo[q] + kPi / 2.0, config, rng, pts, labels);
    }
    return assemble_circles(pts, labels, std::move(tags), seed);
}

Dataset gen_balanced_circles(int n_train, int n_test, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    QuadrantCirclesConfig cfg;  // radii and noise shared with the quadrant variant
    std::vector<Eigen::Vector2d> pts;
    std::vector<int> labels;
    std::vector<Split> tags;
    append_circle_points(tags, n_train, Split::Train, 0.0, 2.0 * kPi, cfg, rng, pts,
                         labels);
    append_circle_points(tags, n_test, Split::Test, 0.0, 2.0 * kPi, cfg, rng, pts,
                         labels);
    return assemble_circles(pts, labels, std::move(tags), seed);
}

void write_dataset_csv(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_dataset_csv: cannot open " + path);
    for (std::size_t c = 0; c < dataset.feature_names.size(); ++c) {
        if (c > 0) out << ',';
        out << dataset.feature_names[c];
    }
    if (dataset.labels) out << ",label";
    if (!dataset.splits.empty()) out << ",split";
    out << '\n';
    static const char* kSplitNames[3] = {"train", "validation", "test"};
    for (Eigen::Index i = 0; i < dataset.rows(); ++i) {
        for (Eigen::Index c = 0; c < dataset.features.cols(); ++c) {
            if (c > 0) out << ',';
            out << format_double(dataset.features(i, c));
        }
        if (dataset.labels) out << ',' << (*dataset.labels)[i];
        if (!dataset.splits.empty())
            out << ',' << kSplitNames[static_cast<int>(dataset.splits[static_cast<std::size_t>(i)])];
        out << '\n';
    }
}

void write_manifest(const Dataset& dataset, const std::string& path,
                    const std::string& source_description) {
    nlohmann::json j;
    j["schema"] = "gpssl-dataset-manifest-v1";
    j["source"] = source_description;
    j["seed"] = dataset.seed;
    j["rows"] = dataset.rows();
    j["columns"] = dataset.features.cols();
    j["feature_names"] = dataset.feature_names;
    if (dataset.labels) j["label_names"] = dataset.label_names;
    if (!dataset.splits.empty()) {
        std::vector<std::string> tags;
        static const char* kSplitNames[3] = {"train", "validation", "test"};
        tags.reserve(dataset.splits.size());
        for (Split s : dataset.splits) tags.emplace_back(kSplitNames[static_cast<int>(s)]);
        j["splits"] = tags;
    }
    if (dataset.standardizer) {
        j["standardization"] = {
            {"means", std::vector<double>(dataset.standardizer->means.begin(),
                                          dataset.standardizer->means.end())},
            {"stds", std::vector<double>(dataset.standardizer->stds.begin(),
                                         dataset.standardizer->stds.end())}};
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_manifest: cannot open " + path);
    out << j.dump(2) << "\n";
}

EmbeddingsFile read_embeddings_csv(const std::string& path) {
    const Dataset raw = load_csv(path, std::nullopt);
    Eigen::Index j = 0;
    for (const std::string& name : raw.feature_names) {
        if (name.rfind("mean_", 0) == 0) ++j;
    }
    if (j == 0 || raw.feature_names.size() != static_cast<std::size_t>(1 + 2 * j)) {
        throw std::runtime_error("read_embeddings_csv: unexpected columns in " + path);
    }
    EmbeddingsFile f;
    f.means = raw.features.middleCols(1, j);
    f.stds = raw.features.middleCols(1 + j, j);
    return f;
}

void save_standardizer(const Standardizer& s, const std::string& path) {
    nlohmann::json j;
    j["schema"] = "gpssl-standardizer-v1";
    j["means"] = std::vector<double>(s.means.begin(), s.means.end());
    j["stds"] = std::vector<double>(s.stds.begin(), s.stds.end());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_standardizer: cannot open " + path);
    out << j.dump(2) << "\n";
}

Standardizer load_standardizer(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_standardizer: cannot open " + path);
    nlohmann::json j;
    in >> j;
    if (j.value("schema", "") != "gpssl-standardizer-v1") {
        throw std::runtime_error("load_standardizer: unknown schema in " + path);
    }
    Standardizer s;
    const auto means = j.at("means").get<std::vector<double>>();
    const auto stds = j.at("stds").get<std::vector<double>>();
    s.means = Eigen::Map<const VectorXd>(means.data(), static_cast<Eigen::Index>(means.size()));
    s.stds = Eigen::Map<const VectorXd>(stds.data(), static_cast<Eigen::Index>(stds.size()));
    return s;
}

void write_embeddings_csv(const MatrixXd& means, const MatrixXd& stds,
                          const std::string& path) {
    if (means.rows() != stds.rows() || means.cols() != stds.cols()) {
        throw std::invalid_argument("write_embeddings_csv: shape mismatch");
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_embeddings_csv: cannot open " + path);
    out << "id";
    for (Eigen::Index j = 0; j < means.cols(); ++j) out << ",mean_" << (j + 1);
    for (Eigen::Index j = 0; j < means.cols(); ++j) out << ",std_" << (j + 1);
    out << '\n';
    for (Eigen::Index i = 0; i < means.rows(); ++i) {
        out << i;
        for (Eigen::Index j = 0; j < means.cols(); ++j) out << ',' << format_double(means(i, j));
        for (Eigen::Index j = 0; j < means.cols(); ++j) out << ',' << format_double(stds(i, j));
        out << '\n';
    }
}

}  // namespace gpssl
