#pragma once

// Brute-force reference implementations. Deliberately naive: they recount
// everything from scratch and share no code with the library.

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "pnd/forest.hpp"

namespace pnd::test {

// Contiguous bools; std::vector<bool> cannot back a span.
class Labels {
public:
    explicit Labels(std::size_t n = 0) : n_(n), data_(std::make_unique<bool[]>(n)) {}
    Labels(std::initializer_list<bool> v) : Labels(v.size()) { std::copy(v.begin(), v.end(), data_.get()); }
    bool& operator[](std::size_t i) { return data_[i]; }
    bool operator[](std::size_t i) const { return data_[i]; }
    std::size_t size() const { return n_; }
    operator std::span<const bool>() const { return {data_.get(), n_}; }

private:
    std::size_t n_;
    std::unique_ptr<bool[]> data_;
};

struct OracleSplit {
    std::size_t feature;
    double threshold;
    double decrease;
};

inline double oracle_gini(double t, double f) {
    double n = t + f;
    return 1.0 - (t / n) * (t / n) - (f / n) * (f / n);
}

// Enumerate every (feature, midpoint); keep the largest decrease, earliest
// (feature, threshold) among near-equal ones.
inline std::optional<OracleSplit> oracle_best_split(const FeatureMatrix& x,
                                                    std::span<const SampleRow> rows,
                                                    std::span<const std::size_t> features,
                                                    double min_leaf) {
    struct Item {
        std::size_t row;
        bool label;
    };
    std::vector<Item> expanded;
    for (const auto& r : rows)
        for (std::uint32_t k = 0; k < r.count; ++k) expanded.push_back({r.row, x.label(r.row)});
    double n = static_cast<double>(expanded.size());
    if (n == 0) return std::nullopt;
    double nt = 0;
    for (const auto& e : expanded) nt += e.label;
    double parent = oracle_gini(nt, n - nt);

    std::vector<std::size_t> fs(features.begin(), features.end());
    std::sort(fs.begin(), fs.end());
    std::vector<OracleSplit> all;
    for (std::size_t f : fs) {
        std::set<double> distinct;
        for (const auto& e : expanded) distinct.insert(x.at(e.row, f));
        std::vector<double> v(distinct.begin(), distinct.end());
        for (std::size_t i = 0; i + 1 < v.size(); ++i) {
            double thr = (v[i] + v[i + 1]) / 2;
            if (thr >= v[i + 1]) thr = v[i];
            double lt = 0, lf = 0, rt = 0, rf = 0;
            for (const auto& e : expanded) {
                bool left = x.at(e.row, f) <= thr;
                (left ? (e.label ? lt : lf) : (e.label ? rt : rf)) += 1;
            }
            if (lt + lf < min_leaf || rt + rf < min_leaf) continue;
            double dec = parent - (lt + lf) / n * oracle_gini(lt, lf) - (rt + rf) / n * oracle_gini(rt, rf);
            all.push_back({f, thr, dec});
        }
    }
    double best = -1;
    for (const auto& s : all) best = std::max(best, s.decrease);
    if (best <= 1e-12) return std::nullopt;
    for (const auto& s : all)
        if (s.decrease >= best - 1e-9) return s;
    return std::nullopt;
}

// P(score+ > score-) + P(tie)/2 by counting every pair.
inline double oracle_auc(std::span<const bool> labels, std::span<const double> scores) {
    double wins = 0, pairs = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!labels[i]) continue;
        for (std::size_t j = 0; j < labels.size(); ++j) {
            if (labels[j]) continue;
            pairs += 1;
            if (scores[i] > scores[j]) wins += 1;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / pairs;
}

// Standardize columns (population std), then FISTA on
//   mean NLL + lambda * |beta|_1
// with intercept unpenalized. Returns {intercept, beta...} on the
// standardized scale. Constant columns stay at zero.
inline std::vector<double> oracle_lasso_std(std::span<const double> x, std::size_t p,
                                            std::span<const double> y, double lambda,
                                            int iterations = 200000) {
    std::size_t n = y.size();
    std::vector<double> z(n * p);
    std::vector<bool> constant(p, false);
    for (std::size_t j = 0; j < p; ++j) {
        double m = 0;
        for (std::size_t i = 0; i < n; ++i) m += x[i * p + j];
        m /= static_cast<double>(n);
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += (x[i * p + j] - m) * (x[i * p + j] - m);
        s = std::sqrt(s / static_cast<double>(n));
        constant[j] = s == 0;
        for (std::size_t i = 0; i < n; ++i) z[i * p + j] = constant[j] ? 0 : (x[i * p + j] - m) / s;
    }
    const double step = 1.0 / (0.25 * static_cast<double>(p + 1));
    std::vector<double> w(p + 1, 0.0), prev = w, v = w, grad(p + 1);
    double t = 1;
    for (int it = 0; it < iterations; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double eta = v[0];
            for (std::size_t j = 0; j < p; ++j) eta += z[i * p + j] * v[j + 1];
            double r = 1 / (1 + std::exp(-eta)) - y[i];
            grad[0] += r;
            for (std::size_t j = 0; j < p; ++j) grad[j + 1] += r * z[i * p + j];
        }
        prev = w;
        w[0] = v[0] - step * grad[0] / static_cast<double>(n);
        for (std::size_t j = 0; j < p; ++j) {
            double u = v[j + 1] - step * grad[j + 1] / static_cast<double>(n);
            double g = step * lambda;
            w[j + 1] = constant[j] ? 0 : (u > g ? u - g : (u < -g ? u + g : 0));
        }
        double t_next = (1 + std::sqrt(1 + 4 * t * t)) / 2;
        double diff = 0;
        for (std::size_t k = 0; k <= p; ++k) {
            v[k] = w[k] + (t - 1) / t_next * (w[k] - prev[k]);
            diff = std::max(diff, std::abs(w[k] - prev[k]));
        }
        t = t_next;
        if (it > 100 && diff < 1e-13) break;
    }
    return w;
}

}  // namespace pnd::test
