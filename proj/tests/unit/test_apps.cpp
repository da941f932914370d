#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qinspired/apps.hpp"
#include "qinspired/errors.hpp"
#include "qinspired/solution.hpp"

using namespace qi;

namespace {

ReturnsPanel constant_panel(double r, std::size_t days) {
    ReturnsPanel p;
    p.asset_ids = {"ONE"};
    p.returns = Eigen::MatrixXd::Constant(1, static_cast<Eigen::Index>(days), r);
    return p;
}

}  // namespace

TEST_CASE("two assets over three days") {
    std::istringstream in(
        "date,open,high,Name\n"
        "2013-02-08,1,9,AAA\n"
        "2013-02-08,1,9,BBB\n"
        "2013-02-11,2,9,AAA\n"
        "2013-02-11,1,9,BBB\n"
        "2013-02-12,4,9,AAA\n"
        "2013-02-12,1,9,BBB\n");
    const ReturnsPanel p = load_prices(in);
    REQUIRE(p.n_assets() == 2);
    CHECK(p.asset_ids == std::vector<std::string>{"AAA", "BBB"});
    CHECK(p.dates.size() == 3);
    REQUIRE(p.n_days() == 2);
    CHECK(p.returns(0, 0) == doctest::Approx(1.0));
    CHECK(p.returns(0, 1) == doctest::Approx(1.0));
    CHECK(p.returns(1, 0) == 0.0);
    CHECK(p.returns(1, 1) == 0.0);
    CHECK(p.issues.empty());
}

TEST_CASE("incomplete tickers are dropped and bad rows reported") {
    std::istringstream in(
        "date,ticker,open\n"
        "d1,AAA,10\n"
        "d1,CCC,5\n"
        "d2,AAA,11\n"
        "d2,CCC,oops\n"
        "d3,AAA,12\n"
        "d3,CCC,5\n"
        "short\n");
    const ReturnsPanel p = load_prices(in);
    CHECK(p.asset_ids == std::vector<std::string>{"AAA"});
    CHECK(p.dropped_assets == 1);
    CHECK(p.issues.size() == 2);
    CHECK(p.issues[0].line == 5);
}

TEST_CASE("empty or headerless price files are rejected") {
    std::istringstream empty("");
    CHECK_THROWS_AS(load_prices(empty), Error);
    std::istringstream bad("a,b,c\n1,2,3\n");
    CHECK_THROWS_AS(load_prices(bad), Error);
    CHECK_THROWS_AS(load_prices(std::filesystem::path("/nonexistent/prices.csv")), Error);
}

TEST_CASE("constant price gives zero returns") {
    Eigen::MatrixXd prices(1, 4);
    prices << 7, 7, 7, 7;
    const ReturnsPanel p = returns_from_prices({"X"}, prices);
    CHECK(p.returns.norm() == 0.0);
}

TEST_CASE("single asset Markowitz system: x = (-mu, mu/r)") {
    const double r = 0.02, mu = 0.015;
    const MarkowitzSystem s = build_markowitz(constant_panel(r, 30), mu);
    REQUIRE(s.A.rows() == 2);
    CHECK(s.A(0, 0) == 0.0);
    CHECK(s.A(0, 1) == doctest::Approx(r));
    CHECK(s.A(1, 0) == doctest::Approx(r));
    CHECK(s.A(1, 1) == doctest::Approx(r * r));
    CHECK(s.b == std::vector<double>{mu, 0.0});
    const Eigen::VectorXd x = markowitz_exact_solution(s);
    CHECK(std::abs(x(0) + mu) < 1e-10);
    CHECK(std::abs(x(1) - mu / r) < 1e-10 * (mu / r));

    const DenseSampleableMatrix a(s.A);
    const Eigen::VectorXd y = direct_solution(a, LinearTarget{s.b}, 2, DirectMethod::ExactSvd);
    CHECK((x - y).norm() < 1e-10 * x.norm());
}

TEST_CASE("Markowitz system is symmetric and A^T b = mu A_1") {
    Rng rng(3);
    const ReturnsPanel p = synthetic_returns_panel(12, 250, rng);
    CHECK(p.n_assets() == 12);
    CHECK(p.n_days() == 249);
    const MarkowitzSystem s = build_markowitz(p);
    CHECK((s.A - s.A.transpose()).norm() == 0.0);
    CHECK(s.mu == doctest::Approx(s.mean_returns.mean()));
    const Eigen::Map<const Eigen::VectorXd> b(s.b.data(), static_cast<Eigen::Index>(s.b.size()));
    CHECK((s.A.transpose() * b - s.mu * s.A.col(0)).norm() < 1e-15);
}

TEST_CASE("zero returns give a degenerate matrix") {
    const MarkowitzSystem s = build_markowitz(constant_panel(0.0, 5), 0.01);
    CHECK(s.A.norm() == 0.0);
    CHECK_THROWS_AS(DenseSampleableMatrix(s.A), Error);
}

TEST_CASE("MovieLens toy file") {
    std::istringstream in(
        "userId,movieId,rating,timestamp\n"
        "7,30,4.0,1\n"
        "3,10,5.0,1\n"
        "7,10,2.5,1\n"
        "3,20,0.25,1\n"
        "3,20,3.0,1\n"
        "7,30,1.0,2\n"
        "x,1,1,1\n");
    const PreferenceMatrix p = load_movielens(in);
    CHECK(p.user_ids == std::vector<std::int64_t>{3, 7});
    CHECK(p.movie_ids == std::vector<std::int64_t>{10, 20, 30});
    CHECK(p.matrix.rows() == 2);
    CHECK(p.matrix.cols() == 3);
    CHECK(p.matrix.nonzeros() == 4);
    CHECK(p.matrix.entry(0, 0) == 5.0);
    CHECK(p.matrix.entry(0, 1) == 3.0);
    CHECK(p.matrix.entry(0, 2) == 0.0);
    CHECK(p.matrix.entry(1, 0) == 2.5);
    CHECK(p.matrix.entry(1, 2) == 1.0);  // last write wins
    CHECK(p.duplicates == 1);
    CHECK(p.issues.size() == 2);
}

TEST_CASE("MovieLens load does not depend on line order") {
    const std::vector<std::string> lines{"1,5,3.0,0", "2,5,4.0,0", "1,9,1.5,0", "3,2,5.0,0", "2,9,0.5,0"};
    std::string forward = "userId,movieId,rating,timestamp\n", backward = forward;
    for (const auto& l : lines) forward += l + "\n";
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) backward += *it + "\n";
    std::istringstream a(forward), b(backward);
    const auto pa = load_movielens(a), pb = load_movielens(b);
    CHECK((pa.matrix.to_dense() - pb.matrix.to_dense()).norm() == 0.0);
    CHECK(pa.movie_ids == pb.movie_ids);
}

TEST_CASE("ranking skips rated movies and sorts by score") {
    std::istringstream in(
        "userId,movieId,rating,timestamp\n"
        "1,1,5,0\n1,2,4,0\n2,1,5,0\n2,3,4,0\n3,2,4,0\n3,3,1,0\n3,4,2,0\n");
    const PreferenceMatrix p = load_movielens(in);
    Eigen::VectorXd scores(4);
    scores << 9, 9, 0.5, 2.0;
    const auto ranked = rank_unrated(p, 0, scores, 10);
    REQUIRE(ranked.size() == 2);
    CHECK(ranked[0].movie_id == 4);
    CHECK(ranked[1].movie_id == 3);
    CHECK(rank_unrated(p, 0, scores, 1).size() == 1);

    // Full-rank projection reproduces the row.
    const Eigen::VectorXd row = exact_recommendation_row(p, 2, 3);
    CHECK((row - p.matrix.to_dense().row(2).transpose()).norm() < 1e-10);
}

TEST_CASE("file hash is stable and content-sensitive") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto f1 = dir / "qi_hash_a.txt", f2 = dir / "qi_hash_b.txt";
    std::ofstream(f1) << "abc";
    std::ofstream(f2) << "abd";
    CHECK(file_hash(f1) == file_hash(f1));
    CHECK(file_hash(f1) != file_hash(f2));
    CHECK(file_hash(f1).size() == 16);
    std::filesystem::remove(f1);
    std::filesystem::remove(f2);
}
