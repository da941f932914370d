#include "qinspired/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "qinspired/coeffs.hpp"
#include "qinspired/errors.hpp"

namespace qi {

namespace {

double median_of(std::vector<double> v) { return aggregate_repetitions(v); }

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

RelativeError relative_error(std::span<const double> exact, std::span<const double> approx,
                             ErrorMode mode, std::optional<std::size_t> first_L) {
    require(exact.size() == approx.size(), ErrorCode::InvalidInput,
            "relative error needs vectors of equal length");
    const std::size_t n = std::min(exact.size(), first_L.value_or(exact.size()));
    RelativeError out;
    std::vector<double> terms;
    terms.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (exact[i] == 0.0) {
            ++out.skipped;
            continue;
        }
        terms.push_back(std::abs(exact[i] - approx[i]) / std::abs(exact[i]));
    }
    require(!terms.empty(), ErrorCode::UndefinedMetric, "no nonzero exact entries to compare");
    out.compared = terms.size();
    out.value = mode == ErrorMode::Mean ? mean_of(terms) : median_of(std::move(terms));
    return out;
}

double frobenius_relative_error(const Eigen::MatrixXd& exact, const Eigen::MatrixXd& approx) {
    require(exact.rows() == approx.rows() && exact.cols() == approx.cols(),
            ErrorCode::InvalidInput, "matrix shapes differ");
    const double norm = exact.norm();
    require(norm > 0.0, ErrorCode::UndefinedMetric, "exact matrix is zero");
    return (approx - exact).norm() / norm;
}

namespace {

std::span<const double> column_span(const Eigen::MatrixXd& m, Eigen::Index l) {
    return {m.col(l).data(), static_cast<std::size_t>(m.rows())};
}

}  // namespace

std::vector<double> sign_alignment(const Eigen::MatrixXd& exact, const Eigen::MatrixXd& approx,
                                   std::optional<std::size_t> first_L) {
    require(exact.rows() == approx.rows(), ErrorCode::InvalidInput, "vector lengths differ");
    const Eigen::Index k = std::min(exact.cols(), approx.cols());
    std::vector<double> signs(static_cast<std::size_t>(k), 1.0);
    for (Eigen::Index l = 0; l < k; ++l) {
        const Eigen::VectorXd flipped = -approx.col(l);
        const double plus = relative_error(column_span(exact, l), column_span(approx, l),
                                           ErrorMode::Mean, first_L).value;
        const double minus = relative_error(column_span(exact, l),
                                            {flipped.data(), static_cast<std::size_t>(flipped.size())},
                                            ErrorMode::Mean, first_L).value;
        if (minus < plus) signs[static_cast<std::size_t>(l)] = -1.0;
    }
    return signs;
}

RelativeError vector_error_up_to_sign(const Eigen::MatrixXd& exact, const Eigen::MatrixXd& approx,
                                      std::optional<std::size_t> first_L) {
    const std::vector<double> signs = sign_alignment(exact, approx, first_L);
    RelativeError out;
    double total = 0.0;
    for (std::size_t l = 0; l < signs.size(); ++l) {
        const Eigen::VectorXd aligned = signs[l] * approx.col(static_cast<Eigen::Index>(l));
        const RelativeError e = relative_error(
            column_span(exact, static_cast<Eigen::Index>(l)),
            {aligned.data(), static_cast<std::size_t>(aligned.size())}, ErrorMode::Mean, first_L);
        total += e.value * static_cast<double>(e.compared);
        out.compared += e.compared;
        out.skipped += e.skipped;
    }
    require(out.compared > 0, ErrorCode::UndefinedMetric, "no vectors to compare");
    out.value = total / static_cast<double>(out.compared);
    return out;
}

double singular_value_error(std::span<const double> exact, std::span<const double> approx) {
    const std::size_t k = std::min(exact.size(), approx.size());
    return relative_error(exact.first(k), approx.first(k), ErrorMode::Mean).value;
}

double coefficient_error(std::span<const double> exact, std::span<const double> approx,
                         std::span<const double> signs) {
    const std::size_t k = std::min({exact.size(), approx.size(), signs.size()});
    std::vector<double> aligned(k);
    for (std::size_t l = 0; l < k; ++l) aligned[l] = signs[l] * approx[l];
    return relative_error(exact.first(k), aligned, ErrorMode::Mean).value;
}

double total_variation_distance(std::span<const double> p, std::span<const double> q) {
    require(p.size() == q.size(), ErrorCode::InvalidInput, "distributions differ in support");
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
    return 0.5 * d;
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size() && x.size() >= 2, ErrorCode::InvalidInput,
            "correlation needs two equal-length series of length >= 2");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    require(sxx > 0.0 && syy > 0.0, ErrorCode::UndefinedMetric, "constant series");
    return sxy / std::sqrt(sxx * syy);
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size() && x.size() >= 2, ErrorCode::InvalidInput,
            "slope needs two equal-length series of length >= 2");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        require(x[i] > 0.0 && y[i] > 0.0, ErrorCode::UndefinedMetric, "log of a non-positive value");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    const double mx = mean_of(lx);
    const double my = mean_of(ly);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    require(sxx > 0.0, ErrorCode::UndefinedMetric, "x values are all equal");
    return sxy / sxx;
}

MetricSummary summarize(std::span<const double> values) {
    std::vector<double> v;
    for (double x : values)
        if (!std::isnan(x)) v.push_back(x);
    MetricSummary s;
    s.count = v.size();
    if (v.empty()) return s;
    s.mean = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stddev = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    s.median = median_of(std::move(v));
    return s;
}

MetricSummary ErrorReport::summary(double RepetitionErrors::*metric) const {
    std::vector<double> values;
    for (const auto& rep : repetitions) values.push_back(rep.*metric);
    return summarize(values);
}

std::span<const MetricField> metric_fields() {
    static constexpr std::array<MetricField, 7> fields{{
        {"eta_sigma", &RepetitionErrors::eta_sigma},
        {"eta_lambda", &RepetitionErrors::eta_lambda},
        {"eta_v", &RepetitionErrors::eta_v},
        {"eta_x_mean_firstL", &RepetitionErrors::eta_x_mean_firstL},
        {"eta_x_median", &RepetitionErrors::eta_x_median},
        {"eta_A", &RepetitionErrors::eta_A},
        {"eta_A_plus", &RepetitionErrors::eta_A_plus},
    }};
    return fields;
}

namespace {

nlohmann::json number_or_null(double x) { return std::isnan(x) ? nlohmann::json() : nlohmann::json(x); }

}  // namespace

void to_json(nlohmann::json& j, const RepetitionErrors& e) {
    j = nlohmann::json::object();
    for (const auto& f : metric_fields()) j[f.name] = number_or_null(e.*f.member);
    j["skipped_entries"] = e.skipped_entries;
}

void to_json(nlohmann::json& j, const MetricSummary& s) {
    j = nlohmann::json{{"mean", number_or_null(s.mean)},
                       {"std", number_or_null(s.stddev)},
                       {"median", number_or_null(s.median)},
                       {"count", s.count}};
}

void to_json(nlohmann::json& j, const ErrorReport& report) {
    j = nlohmann::json{{"L", report.L}, {"n_repetitions", report.n_repetitions()}};
    for (const auto& f : metric_fields()) j["summary"][f.name] = report.summary(f.member);
    j["repetitions"] = report.repetitions;
}

}  // namespace qi
