#include "qinspired/coeffs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qinspired/errors.hpp"

namespace qi {

Aggregation parse_aggregation(const std::string& name) {
    if (name == "mean") return Aggregation::Mean;
    if (name == "median") return Aggregation::Median;
    throw Error(ErrorCode::InvalidInput, "unknown aggregation '" + name + "'");
}

std::string to_string(Aggregation aggregation) {
    return aggregation == Aggregation::Mean ? "mean" : "median";
}

double CoefficientEstimate::standard_error() const {
    return n_samples == 0 ? 0.0 : std::sqrt(empirical_variance / static_cast<double>(n_samples));
}

double aggregate_repetitions(std::span<const double> estimates) {
    require(!estimates.empty(), ErrorCode::InvalidInput, "no estimates to aggregate");
    std::vector<double> v(estimates.begin(), estimates.end());
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    if (v.size() % 2 == 1) return v[mid];
    const double upper = v[mid];
    const double lower = *std::max_element(v.begin(), v.begin() + mid);
    return 0.5 * (lower + upper);
}

namespace {

// Runs `repetitions` means of `samples` draws of chi() and aggregates them.
template <typename Draw>
CoefficientEstimate run_estimator(const EstimatorOptions& options, Draw&& chi) {
    require(options.samples >= 1, ErrorCode::InvalidInput, "N must be at least 1");
    require(options.repetitions >= 1, ErrorCode::InvalidInput, "need at least one repetition");
    CoefficientEstimate out;
    out.n_samples = options.samples;
    out.n_repetitions = options.repetitions;
    out.aggregation = options.aggregation;
    double pooled_ss = 0.0;
    for (std::size_t rep = 0; rep < options.repetitions; ++rep) {
        // Welford keeps the variance stable when chi has a large mean.
        double mean = 0.0;
        double m2 = 0.0;
        for (std::size_t n = 1; n <= options.samples; ++n) {
            const double x = chi();
            const double delta = x - mean;
            mean += delta / static_cast<double>(n);
            m2 += delta * (x - mean);
        }
        out.repetition_means.push_back(mean);
        pooled_ss += m2;
    }
    const double dof = static_cast<double>(options.repetitions * options.samples) -
                       static_cast<double>(options.repetitions);
    out.empirical_variance = dof > 0 ? pooled_ss / dof : 0.0;
    if (options.aggregation == Aggregation::Median) {
        out.lambda_hat = aggregate_repetitions(out.repetition_means);
    } else {
        out.lambda_hat = std::accumulate(out.repetition_means.begin(), out.repetition_means.end(), 0.0) /
                         static_cast<double>(out.repetition_means.size());
    }
    require(std::isfinite(out.lambda_hat), ErrorCode::NumericalInstability,
            "coefficient estimate is not finite");
    return out;
}

}  // namespace

CoefficientEstimate estimate_inner_product(const VectorSampler& y, const EntryQuery& z,
                                           const EstimatorOptions& options, Rng& rng) {
    require(y.norm_squared() > 0.0, ErrorCode::DegenerateDistribution, "y is the zero vector");
    const double norm2 = y.norm_squared();
    return run_estimator(options, [&] {
        const std::size_t i = y.sample(rng);
        return norm2 * z(i) / y.value(i);
    });
}

const Eigen::VectorXd& RightVectorCache::column(std::size_t j) {
    auto it = cache_.find(j);
    if (it == cache_.end()) it = cache_.emplace(j, right_singular_column(sketch_, a_, j)).first;
    return it->second;
}

CoefficientEstimate estimate_lambda_linear(const SampleableMatrix& a, const EntryQuery& b,
                                           const FkvSketch& sketch, std::size_t l,
                                           const EstimatorOptions& options, Rng& rng,
                                           RightVectorCache* cache) {
    require(l < sketch.rank(), ErrorCode::InvalidInput, "coefficient index exceeds sketch rank");
    const double sigma = sketch.sigma(l);
    require(sigma >= kSingularValueCutoff * sketch.sigma(0) && sigma > 0.0,
            ErrorCode::NumericalInstability, "approximate singular value below threshold");
    const double fro2 = a.frobenius_norm() * a.frobenius_norm();
    const double scale = fro2 / (sigma * sigma);
    return run_estimator(options, [&] {
        const std::size_t i = a.sample_row(rng);
        const std::size_t j = a.sample_col_in_row(i, rng);
        const double aij = a.entry(i, j);
        require(aij != 0.0, ErrorCode::InternalInvariantViolation,
                "length-square sampling returned a zero entry");
        const double v = cache ? cache->column(j)(l) : right_singular_entry(sketch, a, l, j);
        return scale * b(i) * v / aij;
    });
}

CoefficientEstimate estimate_lambda_recommendation(const SampleableMatrix& a, std::size_t user,
                                                   const FkvSketch& sketch, std::size_t l,
                                                   const EstimatorOptions& options, Rng& rng,
                                                   RightVectorCache* cache) {
    require(user < a.rows(), ErrorCode::InvalidInput, "user row out of range");
    require(l < sketch.rank(), ErrorCode::InvalidInput, "coefficient index exceeds sketch rank");
    const double row_norm = a.row_norm(user);
    require(row_norm > 0.0, ErrorCode::EmptyUserHistory, "user has no ratings");
    const double norm2 = row_norm * row_norm;
    return run_estimator(options, [&] {
        const std::size_t j = a.sample_col_in_row(user, rng);
        const double aij = a.entry(user, j);
        require(aij != 0.0, ErrorCode::InternalInvariantViolation,
                "length-square sampling returned a zero entry");
        const double v = cache ? cache->column(j)(l) : right_singular_entry(sketch, a, l, j);
        return norm2 * v / aij;
    });
}

double required_samples(const SampleBudget& budget, ProblemKind problem) {
    require(budget.k > 0 && budget.kappa > 0 && budget.kappa_ratio > 0 && budget.epsilon > 0,
            ErrorCode::InvalidInput, "budget parameters must be positive");
    const double eps2 = budget.epsilon * budget.epsilon;
    const double ratio2 = budget.kappa_ratio * budget.kappa_ratio;
    if (problem == ProblemKind::Linear)
        return budget.k * budget.k * budget.kappa * budget.kappa * ratio2 / eps2;
    return budget.k * ratio2 / eps2;
}

}  // namespace qi
