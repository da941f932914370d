#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "qinspired/fkv.hpp"
#include "qinspired/matrix_access.hpp"
#include "qinspired/random.hpp"

namespace qi {

/// Entrywise query access to a vector that is never materialized.
using EntryQuery = std::function<double(std::size_t)>;

enum class Aggregation { Mean, Median };

Aggregation parse_aggregation(const std::string& name);
std::string to_string(Aggregation aggregation);

struct EstimatorOptions {
    std::size_t samples = 10'000;
    std::size_t repetitions = 10;
    Aggregation aggregation = Aggregation::Median;
};

/// lambda_hat aggregates `n_repetitions` independent means of `n_samples`
/// draws each. empirical_variance is the per-draw variance of chi pooled
/// over all repetitions; repetition_means keeps the individual means.
struct CoefficientEstimate {
    double lambda_hat = 0.0;
    std::size_t n_samples = 0;
    double empirical_variance = 0.0;
    std::size_t n_repetitions = 0;
    Aggregation aggregation = Aggregation::Median;
    std::vector<double> repetition_means;

    /// sqrt(empirical_variance / n_samples): standard error of one mean.
    double standard_error() const;
};

/// Median of the values (mean of the middle pair for even counts).
double aggregate_repetitions(std::span<const double> estimates);

/// Monte Carlo estimate of <y, z>: indices are drawn from y's length-square
/// distribution and chi_i = y_i z_i / p_y(i) = ||y||^2 z_i / y_i.
CoefficientEstimate estimate_inner_product(const VectorSampler& y, const EntryQuery& z,
                                           const EstimatorOptions& options, Rng& rng);

/// Memoized ~v columns: each distinct column index costs O(r k) once.
/// Memory grows with the number of distinct sampled columns, never with n.
class RightVectorCache {
public:
    RightVectorCache(const FkvSketch& sketch, const SampleableMatrix& a)
        : sketch_(sketch), a_(a) {}

    const Eigen::VectorXd& column(std::size_t j);
    std::size_t size() const { return cache_.size(); }

private:
    const FkvSketch& sketch_;
    const SampleableMatrix& a_;
    std::unordered_map<std::size_t, Eigen::VectorXd> cache_;
};

/// lambda_l = <~v^(l), A^T b> / ~sigma_l^2, sampling entries (i,j) of A with
/// probability A_ij^2 / ||A||_F^2 and chi = ||A||_F^2 b_i ~v_j / (A_ij ~sigma_l^2).
/// `l` is zero-based.
CoefficientEstimate estimate_lambda_linear(const SampleableMatrix& a, const EntryQuery& b,
                                           const FkvSketch& sketch, std::size_t l,
                                           const EstimatorOptions& options, Rng& rng,
                                           RightVectorCache* cache = nullptr);

/// lambda_l = <A_i^T, ~v^(l)>, sampling j ~ q_i(j) and chi = ||A_i||^2 ~v_j / A_ij.
CoefficientEstimate estimate_lambda_recommendation(const SampleableMatrix& a, std::size_t user,
                                                   const FkvSketch& sketch, std::size_t l,
                                                   const EstimatorOptions& options, Rng& rng,
                                                   RightVectorCache* cache = nullptr);

enum class ProblemKind { Linear, Recommendation };

/// Inputs to the order-of-magnitude sample-count formulas. kappa_ratio is
/// kappa_beta for linear systems and kappa_nu for recommendations; kappa is
/// ignored for recommendations.
struct SampleBudget {
    double k = 1.0;
    double kappa = 1.0;
    double kappa_ratio = 1.0;
    double epsilon = 1.0;
};

/// k^2 kappa^2 kappa_beta^2 / eps^2 (linear) or k kappa_nu^2 / eps^2
/// (recommendation), with unit constant. A planning figure only.
double required_samples(const SampleBudget& budget, ProblemKind problem);

}  // namespace qi
