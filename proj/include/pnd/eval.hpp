#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace pnd {

struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const { return tp + fp + fn + tn; }
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// Predicted true iff score >= threshold.
ConfusionMatrix confusion(std::span<const bool> labels, std::span<const double> scores,
                          double threshold);

struct PrecisionRecallF1 {
    std::optional<double> precision;  // absent when nothing is predicted true
    double recall = 0.0;
    std::optional<double> f1;
};

PrecisionRecallF1 precision_recall_f1(const ConfusionMatrix& cm);

// Trapezoidal area under the ROC curve over all distinct thresholds. Tied
// scores form one diagonal step, so the result equals
// P(score+ > score-) + P(tie) / 2.
double roc_auc(std::span<const bool> labels, std::span<const double> scores);

struct ThresholdPoint {
    double threshold = 0.0;
    ConfusionMatrix cm;
    std::optional<double> precision;
    double recall = 0.0;
    std::optional<double> f1;
};

struct ThresholdCurve {
    std::vector<ThresholdPoint> points;  // ascending thresholds
};

// Grid 0, step, 2*step, ... up to 1 inclusive.
ThresholdCurve threshold_sweep(std::span<const bool> labels, std::span<const double> scores,
                               double step = 0.01);

// CSV `threshold,precision,recall,f1` (empty precision/f1 where absent),
// followed by an `auc,<value>` line.
void write_threshold_report(std::ostream& out, const ThresholdCurve& curve, double auc);

// Sample Pearson correlation. Throws std::invalid_argument on length
// mismatch, fewer than two points, or zero variance.
double pearson_correlation(std::span<const double> xs, std::span<const double> ys);

}  // namespace pnd
