#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "qinspired/experiments.hpp"
#include "qinspired/synthetic.hpp"

using namespace qi;

namespace {

void check_timings(const StageTimings& t) {
    const double parts = t.ls + t.svd_c + t.lambda + t.x;
    CHECK(t.total >= std::max({t.ls, t.svd_c, t.lambda, t.x}));
    CHECK(t.total <= 1.1 * parts + 1e-4);
}

RandomPointConfig small_point() {
    RandomPointConfig cfg;
    cfg.m = 300;
    cfg.n = 150;
    cfg.k = 3;
    cfg.kappa = 3.0;
    cfg.r = cfg.c = 60;
    cfg.reps = 3;
    cfg.seed = 42;
    cfg.estimator.samples = 2000;
    return cfg;
}

}  // namespace

TEST_CASE("pipeline stage timings bracket the total") {
    Rng rng(1);
    const auto p = gaussian_problem(400, 200, 4, 4.0, rng);
    const DenseSampleableMatrix a(p.matrix());
    SolverParams params{80, 80, 4, {}};
    params.estimator.samples = 5000;
    const std::vector<double> b(p.b.data(), p.b.data() + p.b.size());
    const PipelineTarget target = LinearQuery{[&](std::size_t i) { return b[i]; }};
    const PipelineRun run = run_pipeline(a, target, params, std::nullopt, rng);
    check_timings(run.timings);
    CHECK(run.x_entries.size() == 200);
    CHECK(run.lambda_hat.size() == static_cast<Eigen::Index>(run.sketch.rank()));

    const DenseTruth truth = gaussian_truth(p);
    const RepetitionErrors e = evaluate_dense(run, a, truth, {});
    for (double v : {e.eta_sigma, e.eta_lambda, e.eta_v, e.eta_x_median, e.eta_x_mean_firstL, e.eta_A, e.eta_A_plus}) {
        CHECK(std::isfinite(v));
        CHECK(v >= 0.0);
    }
}

TEST_CASE("selected indices only form those entries") {
    Rng rng(2);
    const auto p = gaussian_problem(100, 60, 2, 2.0, rng);
    const DenseSampleableMatrix a(p.matrix());
    SolverParams params{30, 30, 2, {}};
    params.estimator.samples = 500;
    const PipelineTarget target = RecommendationTarget{5};
    const PipelineRun run = run_pipeline(a, target, params, std::vector<std::size_t>{3, 1, 59}, rng);
    REQUIRE(run.x_entries.size() == 3);
    CHECK(run.x_entries(2) == doctest::Approx(solution_entry(run.solution, a, 59)));
}

TEST_CASE("random point runs are a pure function of the seed") {
    const RandomPointConfig cfg = small_point();
    const auto first = run_random_point(cfg);
    const auto second = run_random_point(cfg);
    RandomPointConfig threaded = cfg;
    threaded.threads = 2;
    const auto third = run_random_point(threaded);
    REQUIRE(first.report.n_repetitions() == 3);
    for (std::size_t rep = 0; rep < 3; ++rep) {
        CHECK(first.report.repetitions[rep].eta_sigma == second.report.repetitions[rep].eta_sigma);
        CHECK(first.report.repetitions[rep].eta_x_median == second.report.repetitions[rep].eta_x_median);
        CHECK(first.report.repetitions[rep].eta_x_median == third.report.repetitions[rep].eta_x_median);
    }
    for (const auto& t : first.timings) check_timings(t);
    CHECK_FALSE(first.baseline.has_value());

    RandomPointConfig other = cfg;
    other.seed = 43;
    CHECK(run_random_point(other).report.repetitions[0].eta_sigma != first.report.repetitions[0].eta_sigma);
}

TEST_CASE("baseline timings are recorded when requested") {
    RandomPointConfig cfg = small_point();
    cfg.baseline = true;
    cfg.reps = 1;
    const auto res = run_random_point(cfg);
    REQUIRE(res.baseline.has_value());
    const auto& b = *res.baseline;
    CHECK(b.total >= std::max({b.svd_a, b.lambda, b.x}));
    CHECK(b.total <= 1.1 * (b.svd_a + b.lambda + b.x) + 1e-4);
}

TEST_CASE("high-dimensional rank-1 run is exact") {
    HighDimConfig cfg;
    cfg.n_bits = 10;
    cfg.k = 1;
    cfg.kappa = cfg.kappa_beta = 1.0;
    cfg.r = cfg.c = 20;
    cfg.reps = 2;
    cfg.estimator.samples = 100;
    const auto res = run_highdim(cfg);
    for (const auto& e : res.report.repetitions) {
        CHECK(e.eta_sigma < 1e-6);
        CHECK(e.eta_lambda < 1e-6);
        CHECK(e.eta_v < 1e-6);
        CHECK(e.eta_x_mean_firstL < 1e-6);
    }
}

TEST_CASE("run metadata carries what is needed to replay") {
    const nlohmann::json config = {{"m", 10}, {"r", 4}};
    const auto meta = run_metadata(config, 77, "abcd");
    CHECK(meta["seed"] == 77);
    CHECK(meta["config"] == config);
    CHECK(meta["dataset_fnv1a64"] == "abcd");
    CHECK(meta["code_version"] == library_version());
    CHECK_FALSE(library_version().empty());
    CHECK(repetition_seed(1, 0) != repetition_seed(1, 1));
    CHECK(repetition_seed(1, 3) == repetition_seed(1, 3));
}
