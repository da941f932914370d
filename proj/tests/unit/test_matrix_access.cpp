#include <doctest.h>

#include <chrono>

#include "qinspired/errors.hpp"
#include "qinspired/matrix_access.hpp"
#include "qinspired/metrics.hpp"
#include "qinspired/synthetic.hpp"
#include "support.hpp"

using namespace qi;

TEST_CASE("2x2 identity: uniform rows, q_0 = (1,0)") {
    for (auto backend : {SamplerBackend::Direct, SamplerBackend::Tree}) {
        const DenseSampleableMatrix a(RowMajorMatrix::Identity(2, 2), backend);
        CHECK(a.row_probability(0) == doctest::Approx(0.5));
        CHECK(a.row_probability(1) == doctest::Approx(0.5));
        Rng rng(1);
        for (int t = 0; t < 200; ++t) CHECK(a.sample_col_in_row(0, rng) == 0);
    }
}

TEST_CASE("diag(3,4): row probabilities 9/25 and 16/25") {
    RowMajorMatrix v(2, 2);
    v << 3, 0, 0, 4;
    const DenseSampleableMatrix a(v);
    CHECK(a.row_probability(0) == doctest::Approx(9.0 / 25));
    CHECK(a.row_probability(1) == doctest::Approx(16.0 / 25));
    CHECK(a.frobenius_norm() == doctest::Approx(5.0));
}

TEST_CASE("all-zero matrix is degenerate") {
    try {
        DenseSampleableMatrix a(RowMajorMatrix::Zero(3, 3));
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateDistribution);
    }
}

TEST_CASE("row norms square-sum to the Frobenius norm") {
    Rng rng(4);
    const DenseSampleableMatrix a(test::random_matrix(30, 17, rng));
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += a.row_norm(i) * a.row_norm(i);
    CHECK(std::abs(s - a.frobenius_norm() * a.frobenius_norm()) <= 1e-9 * s);
}

TEST_CASE("property: two-stage sampling hits entry (i,j) with probability A_ij^2/||A||_F^2") {
    Rng rng(8);
    for (int trial = 0; trial < 4; ++trial) {
        const Eigen::Index m = 2 + static_cast<Eigen::Index>(uniform_index(rng, 8));
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(uniform_index(rng, 8));
        Eigen::MatrixXd v = test::random_matrix(m, n, rng);
        v(0, 0) = 0.0;  // an exact zero must never be drawn
        for (auto backend : {SamplerBackend::Direct, SamplerBackend::Tree}) {
            const DenseSampleableMatrix a(RowMajorMatrix(v), backend);
            std::vector<double> p(m * n);
            for (Eigen::Index i = 0; i < m; ++i)
                for (Eigen::Index j = 0; j < n; ++j) p[i * n + j] = v(i, j) * v(i, j) / v.squaredNorm();
            std::vector<std::size_t> counts(m * n, 0);
            for (int t = 0; t < 100'000; ++t) {
                const std::size_t i = a.sample_row(rng);
                ++counts[i * n + a.sample_col_in_row(i, rng)];
            }
            CHECK(counts[0] == 0);
            CHECK(test::chi_square_passes(counts, p));
        }
    }
}

TEST_CASE("entry queries do not change sampling state") {
    Rng rng(12);
    const DenseSampleableMatrix a(test::random_matrix(6, 6, rng));
    Rng r1(5), r2(5);
    std::vector<std::size_t> first, second;
    for (int t = 0; t < 50; ++t) first.push_back(a.sample_row(r1));
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) (void)a.entry(i, j);
    for (int t = 0; t < 50; ++t) second.push_back(a.sample_row(r2));
    CHECK(first == second);
}

TEST_CASE("vector sampler examples") {
    Rng rng(3);
    SUBCASE("(1,0) always index 0") {
        const auto s = length_square_vector_sampler(std::vector<double>{1, 0});
        for (int t = 0; t < 100; ++t) CHECK(s.sample(rng) == 0);
    }
    SUBCASE("(1,1,1) uniform") {
        const auto s = length_square_vector_sampler(std::vector<double>{1, 1, 1});
        std::vector<std::size_t> c(3, 0);
        for (int t = 0; t < 90'000; ++t) ++c[s.sample(rng)];
        CHECK(test::chi_square_passes(c, std::vector<double>{1. / 3, 1. / 3, 1. / 3}));
    }
    SUBCASE("(3,4) -> 0.36/0.64") {
        const auto s = length_square_vector_sampler(std::vector<double>{3, -4});
        CHECK(s.probability(0) == doctest::Approx(0.36));
        std::vector<std::size_t> c(2, 0);
        for (int t = 0; t < 100'000; ++t) ++c[s.sample(rng)];
        CHECK(test::chi_square_passes(c, std::vector<double>{0.36, 0.64}));
    }
    SUBCASE("zero vector is degenerate") {
        CHECK_THROWS_AS(length_square_vector_sampler(std::vector<double>{0, 0}), Error);
    }
}

TEST_CASE("sparse ratings matrix") {
    std::vector<std::vector<SparseRatingsMatrix::Cell>> rows{{{2, 4.0}, {0, 3.0}}, {{1, 5.0}}};
    const SparseRatingsMatrix a(2, 3, rows);
    CHECK(a.entry(0, 0) == 3.0);
    CHECK(a.entry(0, 1) == 0.0);
    CHECK(a.entry(0, 2) == 4.0);
    CHECK(a.nonzeros() == 3);
    CHECK(a.row_norm(0) == doctest::Approx(5.0));
    CHECK(a.frobenius_norm() == doctest::Approx(std::sqrt(50.0)));
    Rng rng(2);
    std::vector<std::size_t> c(3, 0);
    for (int t = 0; t < 50'000; ++t) ++c[a.sample_col_in_row(0, rng)];
    CHECK(c[1] == 0);
    CHECK(test::chi_square_passes(c, std::vector<double>{9. / 25, 0, 16. / 25}));
    const Eigen::MatrixXd d = a.to_dense();
    CHECK(d(1, 1) == 5.0);
}

TEST_CASE("dense copy is refused above the size limit") {
    Rng rng(1);
    const DenseSampleableMatrix a(test::random_matrix(10, 10, rng));
    try {
        (void)a.to_dense(50);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::RefusedAtScale);
    }
}

TEST_CASE("dense build time grows linearly in the entry count") {
    Rng rng(6);
    std::vector<double> sizes, times;
    for (Eigen::Index m : {250, 500, 1000, 2000}) {
        const RowMajorMatrix v = test::random_matrix(m, m / 2, rng);
        double best = 1e9;
        for (int t = 0; t < 3; ++t) {
            const auto start = std::chrono::steady_clock::now();
            const DenseSampleableMatrix a(v);
            best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
            CHECK(a.rows() == static_cast<std::size_t>(m));
        }
        sizes.push_back(static_cast<double>(v.size()));
        times.push_back(best);
    }
    const double slope = log_log_slope(sizes, times);
    CHECK(slope == doctest::Approx(1.0).epsilon(0.15));
}
