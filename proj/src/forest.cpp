#include "pnd/forest.hpp"

#include <algorithm>
#include <numeric>

#include "pnd/parallel.hpp"

namespace pnd {

namespace {

struct SortItem {
    double value;
    std::uint32_t n_true;
    std::uint32_t n_false;
};

// Reusable scratch for split search inside one tree.
class SplitFinder {
public:
    explicit SplitFinder(const FeatureMatrix& x) : x_(x) {}

    std::optional<Split> find(std::span<const SampleRow> rows,
                              std::span<const std::size_t> features, double min_leaf) {
        double total_true = 0, total_false = 0;
        for (const auto& r : rows) (x_.label(r.row) ? total_true : total_false) += r.count;
        const double total = total_true + total_false;
        if (total <= 0) return std::nullopt;
        const double parent = gini_impurity(total_true, total_false);

        std::optional<Split> best;
        double best_decrease = kSplitTieEpsilon;  // must strictly decrease impurity
        for (std::size_t f : features) {
            auto col = x_.column(f);
            items_.clear();
            for (const auto& r : rows) {
                bool t = x_.label(r.row);
                items_.push_back({col[r.row], t ? r.count : 0u, t ? 0u : r.count});
            }
            std::sort(items_.begin(), items_.end(),
                      [](const SortItem& a, const SortItem& b) { return a.value < b.value; });
            double left_true = 0, left_false = 0;
            for (std::size_t i = 0; i + 1 < items_.size(); ++i) {
                left_true += items_[i].n_true;
                left_false += items_[i].n_false;
                double lo = items_[i].value;
                double hi = items_[i + 1].value;
                if (!(lo < hi)) continue;
                double left = left_true + left_false;
                double right = total - left;
                if (left < min_leaf || right < min_leaf) continue;
                double right_true = total_true - left_true;
                double right_false = total_false - left_false;
                double decrease = parent - (left / total) * gini_impurity(left_true, left_false) -
                                  (right / total) * gini_impurity(right_true, right_false);
                if (decrease > best_decrease + (best ? kSplitTieEpsilon : 0.0)) {
                    double mid = lo + (hi - lo) / 2;
                    if (!(mid < hi)) mid = lo;
                    best = Split{f, mid, decrease};
                    best_decrease = decrease;
                }
            }
        }
        return best;
    }

private:
    const FeatureMatrix& x_;
    std::vector<SortItem> items_;
};

double median_of(std::vector<double>& v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : v[n / 2 - 1] + (v[n / 2] - v[n / 2 - 1]) / 2;
}

}  // namespace

std::array<double, kFeatureCount> train_medians(const Dataset& dataset) {
    std::array<double, kFeatureCount> medians{};
    std::vector<double> values;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        values.clear();
        for (const auto& o : dataset.observations)
            if (o.features.present.test(f)) values.push_back(o.features.values[f]);
        medians[f] = median_of(values);
    }
    return medians;
}

std::array<double, kFeatureCount> impute(const FeatureVector& fv,
                                         const std::array<double, kFeatureCount>& medians) {
    std::array<double, kFeatureCount> row{};
    for (std::size_t f = 0; f < kFeatureCount; ++f)
        row[f] = fv.present.test(f) ? fv.values[f] : medians[f];
    return row;
}

FeatureMatrix to_matrix(const Dataset& dataset, const std::array<double, kFeatureCount>& medians) {
    FeatureMatrix x(dataset.size(), kFeatureCount);
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        const auto& o = dataset.observations[r];
        for (std::size_t f = 0; f < kFeatureCount; ++f)
            x.at(r, f) = o.features.present.test(f) ? o.features.values[f] : medians[f];
        x.set_label(r, o.label);
    }
    return x;
}

double gini_impurity(double n_true, double n_false) {
    double n = n_true + n_false;
    if (n <= 0) throw std::invalid_argument("gini_impurity: both class counts are zero");
    double p = n_true / n;
    return 2.0 * p * (1.0 - p);
}

std::optional<Split> best_split(const FeatureMatrix& x, std::span<const SampleRow> rows,
                                std::span<const std::size_t> candidate_features,
                                double min_leaf) {
    std::vector<std::size_t> features(candidate_features.begin(), candidate_features.end());
    std::sort(features.begin(), features.end());
    SplitFinder finder(x);
    return finder.find(rows, features, min_leaf);
}

std::vector<std::size_t> stratified_bootstrap(std::span<const std::size_t> true_rows,
                                              std::span<const std::size_t> false_rows,
                                              std::size_t n_true, std::size_t n_false, Rng& rng) {
    if (true_rows.empty()) throw DataError("stratified bootstrap: no TRUE observations");
    if (false_rows.empty()) throw DataError("stratified bootstrap: no FALSE observations");
    std::vector<std::size_t> sample;
    sample.reserve(n_true + n_false);
    for (std::size_t i = 0; i < n_true; ++i) sample.push_back(true_rows[rng.below(true_rows.size())]);
    for (std::size_t i = 0; i < n_false; ++i)
        sample.push_back(false_rows[rng.below(false_rows.size())]);
    return sample;
}

void RFConfig::validate() const {
    if (n_true_per_tree < 1) throw UsageError("n_true_per_tree must be >= 1");
    if (n_trees < 1) throw UsageError("n_trees must be >= 1");
    if (mtry < 1 || mtry > kFeatureCount) throw UsageError("mtry must be within 1..54");
    if (min_leaf < 1) throw UsageError("min_leaf must be >= 1");
    if (max_depth && *max_depth < 0) throw UsageError("max_depth must be >= 0");
}

std::size_t DecisionTree::leaf_for(std::span<const double> row) const {
    std::size_t node = 0;
    while (feature[node] >= 0)
        node = static_cast<std::size_t>(row[static_cast<std::size_t>(feature[node])] <= threshold[node]
                                            ? left[node]
                                            : right[node]);
    return node;
}

bool DecisionTree::votes_true(std::span<const double> row) const {
    std::size_t leaf = leaf_for(row);
    return n_true[leaf] >= n_false[leaf];
}

DecisionTree grow_tree(const FeatureMatrix& x, std::vector<SampleRow> sample, const RFConfig& cfg,
                       Rng& rng, std::span<double> importance) {
    DecisionTree tree;
    SplitFinder finder(x);
    const std::size_t p = x.columns();
    std::vector<std::size_t> feature_pool(p);
    std::vector<std::size_t> candidates;
    const double min_leaf = static_cast<double>(cfg.min_leaf);

    double root_weight = 0;
    for (const auto& r : sample) root_weight += r.count;

    auto add_node = [&] {
        tree.feature.push_back(-1);
        tree.threshold.push_back(0.0);
        tree.left.push_back(-1);
        tree.right.push_back(-1);
        tree.n_true.push_back(0.0);
        tree.n_false.push_back(0.0);
        return tree.size() - 1;
    };

    struct Task {
        std::size_t node, begin, end;
        int depth;
    };
    std::vector<Task> stack;
    stack.push_back({add_node(), 0, sample.size(), 0});
    while (!stack.empty()) {
        Task t = stack.back();
        stack.pop_back();
        std::span<SampleRow> rows(sample.data() + t.begin, t.end - t.begin);
        double n_true = 0, n_false = 0;
        for (const auto& r : rows) (x.label(r.row) ? n_true : n_false) += r.count;
        tree.n_true[t.node] = n_true;
        tree.n_false[t.node] = n_false;

        bool pure = n_true == 0 || n_false == 0;
        bool depth_capped = cfg.max_depth && t.depth >= *cfg.max_depth;
        if (pure || depth_capped || n_true + n_false < 2 * min_leaf) continue;

        // mtry features without replacement (partial Fisher-Yates), then
        // ascending order for the tie-break rule.
        std::iota(feature_pool.begin(), feature_pool.end(), std::size_t{0});
        std::size_t m = std::min(cfg.mtry, p);
        for (std::size_t i = 0; i < m; ++i)
            std::swap(feature_pool[i], feature_pool[i + rng.below(p - i)]);
        candidates.assign(feature_pool.begin(), feature_pool.begin() + static_cast<std::ptrdiff_t>(m));
        std::sort(candidates.begin(), candidates.end());

        auto split = finder.find(rows, candidates, min_leaf);
        if (!split) continue;

        importance[split->feature] += (n_true + n_false) / root_weight * split->impurity_decrease;
        auto col = x.column(split->feature);
        auto mid = std::stable_partition(rows.begin(), rows.end(), [&](const SampleRow& r) {
            return col[r.row] <= split->threshold;
        });
        std::size_t cut = t.begin + static_cast<std::size_t>(mid - rows.begin());

        tree.feature[t.node] = static_cast<std::int32_t>(split->feature);
        tree.threshold[t.node] = split->threshold;
        std::size_t l = add_node();
        std::size_t r = add_node();
        tree.left[t.node] = static_cast<std::int32_t>(l);
        tree.right[t.node] = static_cast<std::int32_t>(r);
        // Right pushed first so the left subtree is grown first.
        stack.push_back({r, cut, t.end, t.depth + 1});
        stack.push_back({l, t.begin, cut, t.depth + 1});
    }
    return tree;
}

std::array<double, kFeatureCount> Forest::feature_importance() const {
    std::array<double, kFeatureCount> out{};
    double n = static_cast<double>(std::max<std::size_t>(trees.size(), 1));
    for (std::size_t f = 0; f < kFeatureCount; ++f) out[f] = impurity_decrease_sums[f] / n;
    return out;
}

Forest train_forest(const Dataset& dataset, const RFConfig& cfg, unsigned threads) {
    cfg.validate();
    Forest forest;
    forest.config = cfg;
    forest.imputation_values = train_medians(dataset);
    FeatureMatrix x = to_matrix(dataset, forest.imputation_values);

    std::vector<std::size_t> true_rows, false_rows;
    for (std::size_t r = 0; r < x.rows(); ++r) (x.label(r) ? true_rows : false_rows).push_back(r);
    if (true_rows.empty() || false_rows.empty())
        throw DataError("training data must contain both classes");

    forest.trees.resize(cfg.n_trees);
    std::vector<std::array<double, kFeatureCount>> per_tree(cfg.n_trees);
    parallel_for(cfg.n_trees, threads, [&](std::size_t i) {
        Rng rng(cfg.seed, i);
        auto draws = stratified_bootstrap(true_rows, false_rows, cfg.n_true_per_tree,
                                          cfg.n_false_per_tree, rng);
        std::sort(draws.begin(), draws.end());
        std::vector<SampleRow> sample;
        for (std::size_t d : draws) {
            if (!sample.empty() && sample.back().row == d)
                ++sample.back().count;
            else
                sample.push_back({static_cast<std::uint32_t>(d), 1});
        }
        per_tree[i].fill(0.0);
        forest.trees[i] = grow_tree(x, std::move(sample), cfg, rng, per_tree[i]);
    });
    for (const auto& imp : per_tree)
        for (std::size_t f = 0; f < kFeatureCount; ++f) forest.impurity_decrease_sums[f] += imp[f];
    return forest;
}

double predict_vote(const Forest& forest, std::span<const double> row) {
    if (row.size() != kFeatureCount)
        throw ModelError("feature count mismatch: got " + std::to_string(row.size()) +
                         ", model expects " + std::to_string(kFeatureCount));
    if (forest.trees.empty()) throw ModelError("forest has no trees");
    std::size_t votes = 0;
    for (const auto& tree : forest.trees) votes += tree.votes_true(row) ? 1 : 0;
    return static_cast<double>(votes) / static_cast<double>(forest.trees.size());
}

double predict_vote(const Forest& forest, const FeatureVector& fv) {
    auto row = impute(fv, forest.imputation_values);
    return predict_vote(forest, row);
}

std::vector<double> predict_votes(const Forest& forest, const Dataset& dataset, unsigned threads) {
    std::vector<double> out(dataset.size());
    parallel_for(dataset.size(), threads, [&](std::size_t i) {
        out[i] = predict_vote(forest, dataset.observations[i].features);
    });
    return out;
}

}  // namespace pnd
