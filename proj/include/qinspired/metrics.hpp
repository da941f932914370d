#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace qi {

enum class ErrorMode { Mean, Median };

/// Entrywise |x - x~| / |x| aggregated over the compared entries. Entries
/// where the exact value is zero are skipped and counted.
struct RelativeError {
    double value = 0.0;
    std::size_t compared = 0;
    std::size_t skipped = 0;
};

RelativeError relative_error(std::span<const double> exact, std::span<const double> approx,
                             ErrorMode mode, std::optional<std::size_t> first_L = std::nullopt);

inline double relative_error_vector(std::span<const double> exact, std::span<const double> approx,
                                    ErrorMode mode,
                                    std::optional<std::size_t> first_L = std::nullopt) {
    return relative_error(exact, approx, mode, first_L).value;
}

/// ||A~ - A||_F / ||A||_F.
double frobenius_relative_error(const Eigen::MatrixXd& exact, const Eigen::MatrixXd& approx);

/// For each column l, +1 or -1, whichever makes approx.col(l) closer to
/// exact.col(l) in mean relative error over the first `first_L` rows.
std::vector<double> sign_alignment(const Eigen::MatrixXd& exact, const Eigen::MatrixXd& approx,
                                   std::optional<std::size_t> first_L = std::nullopt);

/// eta_v: mean relative error over the first L entries of every vector,
/// each approximate vector sign-aligned to its exact partner first.
/// Columns are vectors, paired in order.
RelativeError vector_error_up_to_sign(const Eigen::MatrixXd& exact, const Eigen::MatrixXd& approx,
                                      std::optional<std::size_t> first_L = std::nullopt);

/// eta_sigma over the first min(|exact|, |approx|) pairs (descending order).
double singular_value_error(std::span<const double> exact, std::span<const double> approx);

/// eta_lambda with approx[l] multiplied by signs[l] before comparison.
double coefficient_error(std::span<const double> exact, std::span<const double> approx,
                         std::span<const double> signs);

/// 0.5 * sum |p_i - q_i|.
double total_variation_distance(std::span<const double> p, std::span<const double> q);

/// Pearson correlation coefficient.
double pearson_correlation(std::span<const double> x, std::span<const double> y);

/// Least-squares slope of log(y) against log(x).
double log_log_slope(std::span<const double> x, std::span<const double> y);

inline constexpr double kNotComputed = std::numeric_limits<double>::quiet_NaN();

/// Metrics from one repetition. Unset metrics stay NaN.
struct RepetitionErrors {
    double eta_sigma = kNotComputed;
    double eta_lambda = kNotComputed;
    double eta_v = kNotComputed;
    double eta_x_mean_firstL = kNotComputed;
    double eta_x_median = kNotComputed;
    double eta_A = kNotComputed;
    double eta_A_plus = kNotComputed;
    std::size_t skipped_entries = 0;
};

struct MetricSummary {
    double mean = kNotComputed;
    double stddev = kNotComputed;
    double median = kNotComputed;
    std::size_t count = 0;
};

/// Per-repetition errors plus summaries taken across repetitions.
struct ErrorReport {
    std::size_t L = 0;
    std::vector<RepetitionErrors> repetitions;

    std::size_t n_repetitions() const { return repetitions.size(); }
    MetricSummary summary(double RepetitionErrors::*metric) const;
};

/// Metric names in output order, paired with their member pointers.
struct MetricField {
    const char* name;
    double RepetitionErrors::*member;
};
std::span<const MetricField> metric_fields();

MetricSummary summarize(std::span<const double> values);

void to_json(nlohmann::json& j, const RepetitionErrors& e);
void to_json(nlohmann::json& j, const MetricSummary& s);
void to_json(nlohmann::json& j, const ErrorReport& report);

}  // namespace qi
