#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pnd/features.hpp"
#include "pnd/rng.hpp"

namespace pnd {

// Column-major numeric matrix with binary labels; missing values already
// imputed.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t rows, std::size_t columns)
        : rows_(rows), columns_(columns), data_(rows * columns, 0.0), labels_(rows, 0) {}

    std::size_t rows() const { return rows_; }
    std::size_t columns() const { return columns_; }
    double at(std::size_t row, std::size_t column) const { return data_[column * rows_ + row]; }
    double& at(std::size_t row, std::size_t column) { return data_[column * rows_ + row]; }
    std::span<const double> column(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }
    bool label(std::size_t row) const { return labels_[row] != 0; }
    void set_label(std::size_t row, bool v) { labels_[row] = v ? 1 : 0; }

private:
    std::size_t rows_ = 0;
    std::size_t columns_ = 0;
    std::vector<double> data_;
    std::vector<std::uint8_t> labels_;
};

// Per-feature median of present training values (0 when a feature is never
// present).
std::array<double, kFeatureCount> train_medians(const Dataset& dataset);

FeatureMatrix to_matrix(const Dataset& dataset, const std::array<double, kFeatureCount>& medians);

std::array<double, kFeatureCount> impute(const FeatureVector& fv,
                                         const std::array<double, kFeatureCount>& medians);

// Binary Gini impurity 2p(1-p) of weighted class counts.
double gini_impurity(double n_true, double n_false);

// A bootstrap draw collapsed to (row, multiplicity).
struct SampleRow {
    std::uint32_t row = 0;
    std::uint32_t count = 1;
};

struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;  // left child: value <= threshold
    double impurity_decrease = 0.0;
};

// Best axis-aligned split over candidate features and midpoints between
// distinct sorted values, by weighted Gini decrease. Both children need at
// least `min_leaf` weight. Ties go to the lower feature index, then the lower
// threshold; nullopt when nothing decreases impurity.
std::optional<Split> best_split(const FeatureMatrix& x, std::span<const SampleRow> rows,
                                std::span<const std::size_t> candidate_features,
                                double min_leaf = 1.0);

// Decreases closer than this are treated as equal when ranking splits.
inline constexpr double kSplitTieEpsilon = 1e-12;

// n_true draws with replacement from the true rows, then n_false from the
// false rows. Throws DataError when either class is empty.
std::vector<std::size_t> stratified_bootstrap(std::span<const std::size_t> true_rows,
                                              std::span<const std::size_t> false_rows,
                                              std::size_t n_true, std::size_t n_false, Rng& rng);

struct RFConfig {
    std::size_t n_true_per_tree = 60;
    std::size_t n_false_per_tree = 20000;
    std::size_t n_trees = 5000;
    std::size_t mtry = 7;  // floor(sqrt(54))
    std::size_t min_leaf = 1;
    std::optional<int> max_depth;
    std::uint64_t seed = 1;

    void validate() const;

    static RFConfig preset(std::size_t n_true, std::size_t n_false, std::size_t n_trees) {
        RFConfig c;
        c.n_true_per_tree = n_true;
        c.n_false_per_tree = n_false;
        c.n_trees = n_trees;
        return c;
    }
    static RFConfig rf1() { return preset(60, 20000, 5000); }
    static RFConfig rf2() { return preset(60, 5000, 10000); }
    static RFConfig rf3() { return preset(60, 1000, 20000); }
};

// Flat node arrays. feature < 0 marks a leaf.
struct DecisionTree {
    std::vector<std::int32_t> feature;
    std::vector<double> threshold;
    std::vector<std::int32_t> left;
    std::vector<std::int32_t> right;
    std::vector<double> n_true;
    std::vector<double> n_false;

    std::size_t size() const { return feature.size(); }
    bool is_leaf(std::size_t node) const { return feature[node] < 0; }
    // Leaf majority with ties counted as the true class.
    bool votes_true(std::span<const double> row) const;
    std::size_t leaf_for(std::span<const double> row) const;

    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

// Grows one tree on a collapsed bootstrap sample. Adds each split's
// impurity decrease, weighted by the node's share of the sample, to
// `importance` (size x.columns()).
DecisionTree grow_tree(const FeatureMatrix& x, std::vector<SampleRow> sample,
                       const RFConfig& cfg, Rng& rng, std::span<double> importance);

struct Forest {
    RFConfig config;
    std::vector<DecisionTree> trees;
    std::array<double, kFeatureCount> impurity_decrease_sums{};
    std::array<double, kFeatureCount> imputation_values{};

    // Mean decrease in Gini per feature.
    std::array<double, kFeatureCount> feature_importance() const;
};

// Tree i draws from the stream (cfg.seed, i), so the result does not depend
// on `threads`.
Forest train_forest(const Dataset& dataset, const RFConfig& cfg, unsigned threads = 1);

// Fraction of trees voting for the true class.
double predict_vote(const Forest& forest, const FeatureVector& fv);
double predict_vote(const Forest& forest, std::span<const double> row);

std::vector<double> predict_votes(const Forest& forest, const Dataset& dataset,
                                  unsigned threads = 1);

}  // namespace pnd
