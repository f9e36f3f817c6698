#include "pnd/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "pnd/common.hpp"

namespace pnd {

namespace {

void require_same_length(std::size_t a, std::size_t b) {
    if (a != b)
        throw std::invalid_argument("labels and scores differ in length (" + std::to_string(a) +
                                    " vs " + std::to_string(b) + ")");
}

}  // namespace

ConfusionMatrix confusion(std::span<const bool> labels, std::span<const double> scores,
                          double threshold) {
    require_same_length(labels.size(), scores.size());
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        bool predicted = scores[i] >= threshold;
        if (labels[i])
            predicted ? ++cm.tp : ++cm.fn;
        else
            predicted ? ++cm.fp : ++cm.tn;
    }
    return cm;
}

PrecisionRecallF1 precision_recall_f1(const ConfusionMatrix& cm) {
    PrecisionRecallF1 r;
    if (cm.tp + cm.fp > 0)
        r.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
    r.recall = cm.tp + cm.fn > 0
                   ? static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn)
                   : 0.0;
    if (r.precision) {
        double p = *r.precision;
        r.f1 = p + r.recall > 0 ? 2 * p * r.recall / (p + r.recall) : 0.0;
    }
    return r;
}

double roc_auc(std::span<const bool> labels, std::span<const double> scores) {
    require_same_length(labels.size(), scores.size());
    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    double positives = 0, negatives = 0;
    for (bool l : labels) (l ? positives : negatives) += 1;
    if (positives == 0 || negatives == 0)
        throw std::invalid_argument("roc_auc needs at least one positive and one negative");

    // Walk thresholds from high to low; each tie group moves the ROC point
    // diagonally and contributes a trapezoid.
    double area = 0.0, tp = 0.0, fp = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        double s = scores[order[i]];
        double group_tp = 0, group_fp = 0;
        while (i < order.size() && scores[order[i]] == s) {
            (labels[order[i]] ? group_tp : group_fp) += 1;
            ++i;
        }
        area += group_fp * (tp + group_tp / 2);
        tp += group_tp;
        fp += group_fp;
    }
    return area / (positives * negatives);
}

ThresholdCurve threshold_sweep(std::span<const bool> labels, std::span<const double> scores,
                               double step) {
    require_same_length(labels.size(), scores.size());
    if (!(step > 0) || step > 1) throw std::invalid_argument("sweep step must be in (0, 1]");
    auto steps = static_cast<std::size_t>(std::llround(1.0 / step));
    ThresholdCurve curve;
    for (std::size_t k = 0; k <= steps; ++k) {
        ThresholdPoint pt;
        pt.threshold = std::min(1.0, static_cast<double>(k) / static_cast<double>(steps));
        pt.cm = confusion(labels, scores, pt.threshold);
        auto prf = precision_recall_f1(pt.cm);
        pt.precision = prf.precision;
        pt.recall = prf.recall;
        pt.f1 = prf.f1;
        curve.points.push_back(pt);
    }
    return curve;
}

void write_threshold_report(std::ostream& out, const ThresholdCurve& curve, double auc) {
    out << "threshold,precision,recall,f1\n";
    for (const auto& p : curve.points) {
        out << format_decimal(p.threshold) << ',';
        if (p.precision) out << format_decimal(*p.precision);
        out << ',' << format_decimal(p.recall) << ',';
        if (p.f1) out << format_decimal(*p.f1);
        out << '\n';
    }
    out << "auc," << format_decimal(auc) << '\n';
}

double pearson_correlation(std::span<const double> xs, std::span<const double> ys) {
    require_same_length(xs.size(), ys.size());
    if (xs.size() < 2) throw std::invalid_argument("pearson_correlation needs >= 2 points");
    const double n = static_cast<double>(xs.size());
    double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double dx = xs[i] - mx, dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0 || syy == 0) throw std::invalid_argument("pearson_correlation: zero variance");
    double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

}  // namespace pnd
