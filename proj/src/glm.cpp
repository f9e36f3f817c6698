#include "pnd/glm.hpp"

#include <algorithm>
#include <cmath>

#include "pnd/forest.hpp"

namespace pnd {

namespace {

double softplus(double eta) {
    return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

constexpr double kMinWeight = 1e-5;

struct Standardized {
    std::size_t n = 0;
    std::size_t p = 0;
    std::vector<double> cols;  // column-major, standardized
    std::vector<double> means;
    std::vector<double> scales;
    double at(std::size_t i, std::size_t j) const { return cols[j * n + i]; }
};

Standardized standardize(std::span<const double> x, std::size_t p, std::size_t n) {
    Standardized s;
    s.n = n;
    s.p = p;
    s.cols.assign(n * p, 0.0);
    s.means.assign(p, 0.0);
    s.scales.assign(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += x[i * p + j];
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) ss += (x[i * p + j] - mean) * (x[i * p + j] - mean);
        double scale = std::sqrt(ss / static_cast<double>(n));
        // Columns whose spread is lost in rounding count as constant.
        if (!(scale > 1e-12 * std::max(1.0, std::fabs(mean)))) scale = 0.0;
        s.means[j] = mean;
        s.scales[j] = scale;
        if (scale == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) s.cols[j * n + i] = (x[i * p + j] - mean) / scale;
    }
    return s;
}

double penalized_objective(const Standardized& s, std::span<const double> y, double b0,
                           std::span<const double> beta, double lambda,
                           std::vector<double>& eta) {
    double nll = 0.0;
    for (std::size_t i = 0; i < s.n; ++i) {
        double e = b0;
        for (std::size_t j = 0; j < s.p; ++j)
            if (beta[j] != 0.0) e += s.at(i, j) * beta[j];
        eta[i] = e;
        nll += softplus(e) - y[i] * e;
    }
    double l1 = 0.0;
    for (double b : beta) l1 += std::fabs(b);
    return nll / static_cast<double>(s.n) + lambda * l1;
}

LassoLogitFit finish(const Standardized& s, double b0, const std::vector<double>& beta, int iters,
                     bool converged) {
    LassoLogitFit fit;
    fit.std_intercept = b0;
    fit.std_coefficients = beta;
    fit.means = s.means;
    fit.scales = s.scales;
    fit.coefficients.assign(s.p, 0.0);
    fit.intercept = b0;
    for (std::size_t j = 0; j < s.p; ++j) {
        if (s.scales[j] == 0.0 || beta[j] == 0.0) continue;
        fit.coefficients[j] = beta[j] / s.scales[j];
        fit.intercept -= beta[j] * s.means[j] / s.scales[j];
    }
    fit.iterations = iters;
    fit.converged = converged;
    return fit;
}

}  // namespace

double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

double logistic(double eta) {
    if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
    double e = std::exp(eta);
    return e / (1.0 + e);
}

void GlmConfig::validate() const {
    if (!(lambda >= 0)) throw UsageError("lambda must be >= 0");
    if (!(tolerance > 0)) throw UsageError("tolerance must be > 0");
    if (max_iterations < 1) throw UsageError("max_iterations must be >= 1");
}

LassoLogitFit fit_lasso_logit(std::span<const double> x, std::size_t p, std::span<const double> y,
                              const GlmConfig& cfg) {
    cfg.validate();
    const std::size_t n = y.size();
    if (n == 0 || x.size() != n * p) throw DataError("design matrix shape does not match labels");
    double ybar = 0.0;
    for (double v : y) ybar += v;
    ybar /= static_cast<double>(n);
    if (ybar <= 0.0 || ybar >= 1.0) throw DataError("GLM training data must contain both classes");

    const Standardized s = standardize(x, p, n);
    const double inv_n = 1.0 / static_cast<double>(n);

    double b0 = std::log(ybar / (1.0 - ybar));
    std::vector<double> beta(p, 0.0);
    std::vector<double> eta(n), w(n), r(n), xv(p);
    double objective = penalized_objective(s, y, b0, beta, cfg.lambda, eta);

    std::vector<double> trial_beta(p), new_beta(p), trial_eta(n);
    for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
        // Quadratic approximation at the current point.
        for (std::size_t i = 0; i < n; ++i) {
            double prob = logistic(eta[i]);
            w[i] = std::max(prob * (1.0 - prob), kMinWeight);
            r[i] = (y[i] - prob) / w[i];  // z - eta
        }
        double w_sum = 0.0;
        for (double wi : w) w_sum += wi;
        for (std::size_t j = 0; j < p; ++j) {
            double acc = 0.0;
            if (s.scales[j] != 0.0)
                for (std::size_t i = 0; i < n; ++i) acc += w[i] * s.at(i, j) * s.at(i, j);
            xv[j] = acc * inv_n;
        }

        // Cyclic coordinate descent on the weighted least-squares problem.
        double nb0 = b0;
        new_beta = beta;
        for (int cycle = 0; cycle < 100000; ++cycle) {
            double max_delta = 0.0;
            double wr = 0.0;
            for (std::size_t i = 0; i < n; ++i) wr += w[i] * r[i];
            double d0 = wr / w_sum;
            if (d0 != 0.0) {
                nb0 += d0;
                for (std::size_t i = 0; i < n; ++i) r[i] -= d0;
                max_delta = std::fabs(d0);
            }
            for (std::size_t j = 0; j < p; ++j) {
                if (s.scales[j] == 0.0 || xv[j] <= 0.0) continue;
                const double* col = &s.cols[j * n];
                double g = 0.0;
                for (std::size_t i = 0; i < n; ++i) g += w[i] * col[i] * r[i];
                g = g * inv_n + xv[j] * new_beta[j];
                double updated = soft_threshold(g, cfg.lambda) / xv[j];
                double delta = updated - new_beta[j];
                if (delta != 0.0) {
                    for (std::size_t i = 0; i < n; ++i) r[i] -= delta * col[i];
                    new_beta[j] = updated;
                    max_delta = std::max(max_delta, std::fabs(delta));
                }
            }
            if (max_delta < cfg.tolerance * 1e-2) break;
        }

        // Step halving on the penalized objective.
        double step = 1.0;
        double trial_b0 = nb0;
        double trial_objective = 0.0;
        for (int halving = 0;; ++halving) {
            trial_b0 = b0 + step * (nb0 - b0);
            for (std::size_t j = 0; j < p; ++j) trial_beta[j] = beta[j] + step * (new_beta[j] - beta[j]);
            trial_objective = penalized_objective(s, y, trial_b0, trial_beta, cfg.lambda, trial_eta);
            if (trial_objective <= objective + 1e-12 * std::fabs(objective) || halving >= 40) break;
            step *= 0.5;
        }

        double change = std::fabs(trial_b0 - b0);
        for (std::size_t j = 0; j < p; ++j)
            change = std::max(change, std::fabs(trial_beta[j] - beta[j]));
        b0 = trial_b0;
        beta = trial_beta;
        eta.swap(trial_eta);
        objective = trial_objective;
        if (change < cfg.tolerance) return finish(s, b0, beta, iter, true);
    }
    throw ConvergenceError("LASSO-logit did not converge within " +
                               std::to_string(cfg.max_iterations) + " iterations",
                           finish(s, b0, beta, cfg.max_iterations, false));
}

std::vector<double> logit_gradient(std::span<const double> x, std::size_t p,
                                   std::span<const double> y, double intercept,
                                   std::span<const double> beta) {
    const std::size_t n = y.size();
    std::vector<double> g(p + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double e = intercept;
        for (std::size_t j = 0; j < p; ++j) e += x[i * p + j] * beta[j];
        double resid = logistic(e) - y[i];
        g[0] += resid;
        for (std::size_t j = 0; j < p; ++j) g[j + 1] += resid * x[i * p + j];
    }
    for (double& v : g) v /= static_cast<double>(n);
    return g;
}

double logit_mean_nll(std::span<const double> x, std::size_t p, std::span<const double> y,
                      double intercept, std::span<const double> beta) {
    const std::size_t n = y.size();
    double nll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double e = intercept;
        for (std::size_t j = 0; j < p; ++j) e += x[i * p + j] * beta[j];
        nll += softplus(e) - y[i] * e;
    }
    return nll / static_cast<double>(n);
}

GlmModel fit_lasso_logit(const Dataset& dataset, const GlmConfig& cfg) {
    GlmModel model;
    model.config = cfg;
    model.imputation_values = train_medians(dataset);
    const std::size_t n = dataset.size();
    std::vector<double> x(n * kFeatureCount);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = impute(dataset.observations[i].features, model.imputation_values);
        std::copy(row.begin(), row.end(), x.begin() + static_cast<std::ptrdiff_t>(i * kFeatureCount));
        y[i] = dataset.observations[i].label ? 1.0 : 0.0;
    }
    LassoLogitFit fit = fit_lasso_logit(x, kFeatureCount, y, cfg);
    model.intercept = fit.intercept;
    model.std_intercept = fit.std_intercept;
    model.iterations = fit.iterations;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        model.coefficients[j] = fit.coefficients[j];
        model.std_coefficients[j] = fit.std_coefficients[j];
        model.means[j] = fit.means[j];
        model.scales[j] = fit.scales[j];
        if (fit.coefficients[j] != 0.0) model.active_set.push_back(j);
    }
    return model;
}

double predict_prob(const GlmModel& model, std::span<const double> row) {
    if (row.size() != kFeatureCount)
        throw ModelError("feature count mismatch: got " + std::to_string(row.size()) +
                         ", model expects " + std::to_string(kFeatureCount));
    double eta = model.intercept;
    for (std::size_t j = 0; j < kFeatureCount; ++j) eta += model.coefficients[j] * row[j];
    return logistic(eta);
}

double predict_prob(const GlmModel& model, const FeatureVector& fv) {
    auto row = impute(fv, model.imputation_values);
    return predict_prob(model, row);
}

double predict_prob_standardized(const GlmModel& model, std::span<const double> row) {
    if (row.size() != kFeatureCount) throw ModelError("feature count mismatch");
    double eta = model.std_intercept;
    for (std::size_t j = 0; j < kFeatureCount; ++j)
        if (model.scales[j] != 0.0)
            eta += model.std_coefficients[j] * (row[j] - model.means[j]) / model.scales[j];
    return logistic(eta);
}

std::vector<double> predict_probs(const GlmModel& model, const Dataset& dataset) {
    std::vector<double> out;
    out.reserve(dataset.size());
    for (const auto& o : dataset.observations) out.push_back(predict_prob(model, o.features));
    return out;
}

}  // namespace pnd
