/* Copyright (c) 2026 gpssl contributors. All rights reserved.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the project root.
 */
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace gpssl {

enum class Split : std::uint8_t { Train = 0, Validation = 1, Test = 2 };

/// Per-feature affine transform fitted on training rows; zero-variance
/// features pass through unscaled.
struct Standardizer {
    Eigen::VectorXd means;
    Eigen::VectorXd stds;

    static Standardizer fit(const Eigen::MatrixXd& rows);
    Eigen::MatrixXd transform(const Eigen::MatrixXd& X) const;
    Eigen::MatrixXd inverse(const Eigen::MatrixXd& X) const;
};

struct Dataset {
    Eigen::MatrixXd features;  // raw, N x D
    std::optional<Eigen::VectorXi> labels;
    std::vector<std::string> label_names;    // for string labels, by first appearance
    std::vector<std::string> feature_names;
    std::vector<Split> splits;               // empty until assigned
    std::optional<Standardizer> standardizer;
    std::uint64_t seed = 0;

    Eigen::Index rows() const { return features.rows(); }
    std::vector<Eigen::Index> indices_of(Split s) const;
    Eigen::MatrixXd raw_rows(Split s) const;
    /// Rows of the given split after the train-fitted standardizer.
    Eigen::MatrixXd standardized_rows(Split s) const;
    Eigen::MatrixXd standardized_all() const;
    Eigen::VectorXi labels_of(Split s) const;
};

/// Header-row CSV with numeric features; an optional label column holds
/// integers or strings (mapped to 0,1,... by first appearance). Missing or
/// non-numeric cells are rejected with the offending row and column named.
Dataset load_csv(const std::string& path, const std::optional<std::string>& label_column);

/// Seeded shuffle then contiguous assignment; class-stratified when labels
/// are present. Fractions must sum to 1.
void split_dataset(Dataset& dataset, const std::array<double, 3>& fractions,
                   std::uint64_t seed);

/// Fits the standardizer on the training split (all rows when no splits).
void fit_standardizer(Dataset& dataset);

struct QuadrantCounts {
    int train = 0;
    int validation = 0;
};

struct QuadrantCirclesConfig {
    // top-right, top-left, bottom-left, bottom-right
    std::array<QuadrantCounts, 4> counts{{{300, 30}, {100, 10}, {50, 10}, {0, 0}}};
    double noise_std = 0.2;
    std::array<double, 2> radii{0.5, 1.0};
};

/// Two concentric circles sampled with quadrant-dependent intensity: the
/// radius is a fair draw from the two circles (the circle index is the
/// label), the angle is uniform within the quadrant, and isotropic Gaussian
/// noise is added to the coordinates.
Dataset gen_quadrant_circles(const QuadrantCirclesConfig& config, std::uint64_t seed);

/// Same radial/noise model with angles uniform over the full circle; rows are
/// tagged train/test.
Dataset gen_balanced_circles(int n_train, int n_test, std::uint64_t seed);

void write_dataset_csv(const Dataset& dataset, const std::string& path);
void write_manifest(const Dataset& dataset, const std::string& path,
                    const std::string& source_description);

/// Embeddings CSV: id, mean_1..mean_J, std_1..std_J.
void write_embeddings_csv(const Eigen::MatrixXd& means, const Eigen::MatrixXd& stds,
                          const std::string& path);

struct EmbeddingsFile {
    Eigen::MatrixXd means;
    Eigen::MatrixXd stds;
};
EmbeddingsFile read_embeddings_csv(const std::string& path);

void save_standardizer(const Standardizer& s, const std::string& path);
Standardizer load_standardizer(const std::string& path);

}  // namespace gpssl
