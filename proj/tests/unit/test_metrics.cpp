#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "qinspired/errors.hpp"
#include "qinspired/metrics.hpp"
#include "qinspired/random.hpp"
#include "support.hpp"

using namespace qi;

using V = std::vector<double>;

TEST_CASE("relative error examples") {
    CHECK(relative_error_vector(V{1, 2, 3}, V{1, 2, 3}, ErrorMode::Mean) == 0.0);
    CHECK(relative_error_vector(V{2, 1}, V{2, 2}, ErrorMode::Mean) == doctest::Approx(0.5));
    CHECK(relative_error_vector(V{1, 1, 1}, V{1, 1, 100}, ErrorMode::Median) == 0.0);
    CHECK(relative_error_vector(V{1, 2, 4, 8}, V{2, 2, 4, 4}, ErrorMode::Mean, 2) == doctest::Approx(0.5));
}

TEST_CASE("zero exact entries are skipped and counted") {
    const RelativeError e = relative_error(V{0, 2, 0}, V{5, 3, 1}, ErrorMode::Mean);
    CHECK(e.compared == 1);
    CHECK(e.skipped == 2);
    CHECK(e.value == doctest::Approx(0.5));
    try {
        (void)relative_error(V{0, 0}, V{1, 1}, ErrorMode::Mean);
        FAIL("expected throw");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::UndefinedMetric);
    }
    CHECK_THROWS_AS(relative_error(V{1, 2}, V{1}, ErrorMode::Mean), Error);
}

TEST_CASE("frobenius relative error examples") {
    const Eigen::MatrixXd i2 = Eigen::MatrixXd::Identity(2, 2);
    CHECK(frobenius_relative_error(i2, i2) == 0.0);
    CHECK(frobenius_relative_error(i2, 2 * i2) == doctest::Approx(1.0));
    Eigen::MatrixXd a(2, 2), b(2, 2);
    a << 3, 0, 0, 4;
    b << 3, 0, 0, 0;
    CHECK(frobenius_relative_error(a, b) == doctest::Approx(0.8));
    CHECK_THROWS_AS(frobenius_relative_error(Eigen::MatrixXd::Zero(2, 2), i2), Error);
}

TEST_CASE("vector error up to sign") {
    Rng rng(1);
    const Eigen::MatrixXd v = test::random_matrix(20, 3, rng);
    CHECK(vector_error_up_to_sign(v, v).value == 0.0);
    Eigen::MatrixXd flipped = v;
    flipped.col(1) *= -1;
    flipped.col(2) *= -1;
    CHECK(vector_error_up_to_sign(v, flipped).value == 0.0);
    const auto signs = sign_alignment(v, flipped);
    CHECK(signs == V{1, -1, -1});
}

TEST_CASE("singular value and coefficient errors") {
    CHECK(singular_value_error(V{4, 2}, V{5, 2}) == doctest::Approx(0.125));
    CHECK(singular_value_error(V{4, 2, 1}, V{4, 2}) == 0.0);
    CHECK(coefficient_error(V{1, -2}, V{-1, -2}, V{-1, 1}) == 0.0);
    CHECK(coefficient_error(V{1, 2}, V{1.5, 2}, V{1, 1}) == doctest::Approx(0.25));
}

TEST_CASE("total variation, correlation and slopes") {
    CHECK(total_variation_distance(V{0.5, 0.5}, V{1, 0}) == doctest::Approx(0.5));
    CHECK(pearson_correlation(V{1, 2, 3}, V{2, 4, 6}) == doctest::Approx(1.0));
    CHECK(pearson_correlation(V{1, 2, 3}, V{3, 2, 1}) == doctest::Approx(-1.0));
    CHECK(log_log_slope(V{1, 10, 100}, V{1, 0.1, 0.01}) == doctest::Approx(-1.0));
    CHECK(log_log_slope(V{2, 4, 8}, V{3, 6, 12}) == doctest::Approx(1.0));
}

TEST_CASE("property: metrics are permutation consistent") {
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + uniform_index(rng, 30);
        V exact(n), approx(n);
        std::normal_distribution<double> normal;
        for (std::size_t i = 0; i < n; ++i) exact[i] = normal(rng), approx[i] = exact[i] + 0.1 * normal(rng);
        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        V pe(n), pa(n);
        for (std::size_t i = 0; i < n; ++i) pe[i] = exact[perm[i]], pa[i] = approx[perm[i]];
        for (auto mode : {ErrorMode::Mean, ErrorMode::Median})
            CHECK(relative_error_vector(exact, approx, mode) == doctest::Approx(relative_error_vector(pe, pa, mode)));
        CHECK(pearson_correlation(exact, approx) == doctest::Approx(pearson_correlation(pe, pa)));
    }
}

TEST_CASE("property: median mode ignores corruption of fewer than half the entries") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 5 + uniform_index(rng, 40);
        V exact(n), approx(n);
        for (std::size_t i = 0; i < n; ++i) {
            exact[i] = 1.0 + uniform01(rng);
            approx[i] = exact[i] * (1.0 + 0.01 * (uniform01(rng) - 0.5));
        }
        const double clean = relative_error_vector(exact, approx, ErrorMode::Median);
        V corrupted = approx;
        const std::size_t bad = (n - 1) / 2;
        for (std::size_t i = 0; i < bad; ++i) corrupted[uniform_index(rng, n)] = 1e9;
        const double dirty = relative_error_vector(exact, corrupted, ErrorMode::Median);
        // Bounded by the clean order statistics around the median.
        V errs(n);
        for (std::size_t i = 0; i < n; ++i) errs[i] = std::abs(exact[i] - approx[i]) / exact[i];
        std::sort(errs.begin(), errs.end());
        CHECK(dirty <= errs.back() + 1e-15);
        CHECK(clean <= 0.005 + 1e-15);
        CHECK(dirty <= 0.005 + 1e-15);
    }
}

TEST_CASE("summaries use the across-repetition spread") {
    const MetricSummary s = summarize(V{1, 2, 3, 4});
    CHECK(s.mean == 2.5);
    CHECK(s.median == 2.5);
    CHECK(s.stddev == doctest::Approx(std::sqrt(5.0 / 3)));
    CHECK(s.count == 4);

    ErrorReport report;
    report.L = 10;
    report.repetitions.resize(3);
    report.repetitions[0].eta_sigma = 0.1;
    report.repetitions[1].eta_sigma = 0.3;
    report.repetitions[2].eta_sigma = 0.2;
    const MetricSummary es = report.summary(&RepetitionErrors::eta_sigma);
    CHECK(es.mean == doctest::Approx(0.2));
    CHECK(es.count == 3);
    CHECK(report.summary(&RepetitionErrors::eta_A).count == 0);

    const nlohmann::json j = report;
    CHECK(j["L"] == 10);
    CHECK(j["n_repetitions"] == 3);
    CHECK(j["summary"]["eta_sigma"]["mean"].get<double>() == doctest::Approx(0.2));
}
