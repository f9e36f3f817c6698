#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "pnd/common.hpp"
#include "pnd/features.hpp"

namespace pnd {

// sign(z) * max(|z| - gamma, 0)
double soft_threshold(double z, double gamma);

double logistic(double eta);

struct GlmConfig {
    double lambda = 1e-8;
    double tolerance = 1e-7;
    int max_iterations = 10000;
    std::uint64_t seed = 1;  // echoed only; the solver is deterministic

    void validate() const;

    static GlmConfig glm1() { return {1e-8}; }
    static GlmConfig glm2() { return {1e-3}; }
    static GlmConfig glm3() { return {5e-3}; }
};

// Solution of
//   (1/n) * NLL(intercept, beta) + lambda * sum_j |beta_j|
// on standardized columns. Coefficients are reported on both scales.
struct LassoLogitFit {
    double intercept = 0.0;             // raw feature scale
    std::vector<double> coefficients;   // raw feature scale
    double std_intercept = 0.0;
    std::vector<double> std_coefficients;
    std::vector<double> means;
    std::vector<double> scales;  // population std; 0 marks a constant column
    int iterations = 0;
    bool converged = false;
};

// Raised when the outer loop hits max_iterations; carries the last iterate.
class ConvergenceError : public ModelError {
public:
    ConvergenceError(const std::string& what, LassoLogitFit last)
        : ModelError(what), last_(std::move(last)) {}
    const LassoLogitFit& last_iterate() const { return last_; }

private:
    LassoLogitFit last_;
};

// Row-major x (n rows, p columns), labels y in {0, 1}. Proximal Newton:
// iteratively reweighted quadratic approximation solved by cyclic
// coordinate descent with soft-threshold updates, step halving when the
// penalized objective rises. Columns are visited in index order.
LassoLogitFit fit_lasso_logit(std::span<const double> x, std::size_t p,
                              std::span<const double> y, const GlmConfig& cfg);

// Gradient of (1/n) * NLL with respect to (intercept, beta) at the given
// point; used by the KKT checks.
std::vector<double> logit_gradient(std::span<const double> x, std::size_t p,
                                   std::span<const double> y, double intercept,
                                   std::span<const double> beta);

double logit_mean_nll(std::span<const double> x, std::size_t p, std::span<const double> y,
                      double intercept, std::span<const double> beta);

struct GlmModel {
    GlmConfig config;
    double intercept = 0.0;
    std::array<double, kFeatureCount> coefficients{};  // unstandardized
    double std_intercept = 0.0;
    std::array<double, kFeatureCount> std_coefficients{};
    std::array<double, kFeatureCount> means{};
    std::array<double, kFeatureCount> scales{};
    std::array<double, kFeatureCount> imputation_values{};
    std::vector<std::size_t> active_set;
    int iterations = 0;
};

// Median-imputes missing values, then fits on all 54 columns.
GlmModel fit_lasso_logit(const Dataset& dataset, const GlmConfig& cfg);

double predict_prob(const GlmModel& model, const FeatureVector& fv);
double predict_prob(const GlmModel& model, std::span<const double> row);
// Same probability via the standardized coefficients.
double predict_prob_standardized(const GlmModel& model, std::span<const double> row);

std::vector<double> predict_probs(const GlmModel& model, const Dataset& dataset);

}  // namespace pnd
