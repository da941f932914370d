#include "qinspired/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <numeric>
#include <thread>

#include "qinspired/errors.hpp"

#ifndef QI_VERSION
#define QI_VERSION "unknown"
#endif

namespace qi {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Runs body(rep) for every repetition on up to `threads` workers. Results
// are written by index, so output order never depends on scheduling.
template <typename Body>
void for_each_rep(std::size_t reps, std::size_t threads, Body&& body) {
    threads = std::max<std::size_t>(1, std::min(threads, reps));
    if (threads == 1) {
        for (std::size_t rep = 0; rep < reps; ++rep) body(rep);
        return;
    }
    std::vector<std::exception_ptr> errors(reps);
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < threads; ++w) {
        workers.emplace_back([&, w] {
            for (std::size_t rep = w; rep < reps; rep += threads) {
                try {
                    body(rep);
                } catch (...) {
                    errors[rep] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::vector<std::size_t> first_indices(std::size_t count) {
    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
}

SpectrumComparison compare_spectrum(const PipelineRun& run, const Eigen::VectorXd& sigma,
                                    const Eigen::VectorXd& lambda, std::size_t count) {
    SpectrumComparison s;
    const auto n_exact = std::min<std::size_t>(count, sigma.size());
    const auto n_approx = std::min<std::size_t>(count, run.sketch.rank());
    s.sigma_exact.assign(sigma.data(), sigma.data() + n_exact);
    s.lambda_exact.assign(lambda.data(), lambda.data() + n_exact);
    s.sigma_tilde.assign(run.sketch.sigma.data(), run.sketch.sigma.data() + n_approx);
    s.lambda_hat.assign(run.lambda_hat.data(), run.lambda_hat.data() + n_approx);
    return s;
}

}  // namespace

PipelineRun run_pipeline(const SampleableMatrix& a, const PipelineTarget& target,
                         const SolverParams& params,
                         const std::optional<std::vector<std::size_t>>& x_indices, Rng& rng) {
    require(params.r >= 1 && params.c >= 1 && params.k >= 1, ErrorCode::InvalidInput,
            "r, c and k must be positive");
    PipelineRun run;
    const auto start = Clock::now();

    auto t = Clock::now();
    RowSample rows = fkv_sample_rows(a, params.r, rng);
    std::vector<std::size_t> cols = fkv_sample_columns(a, rows.indices, params.c, rng);
    run.timings.ls = seconds_since(t);

    t = Clock::now();
    ColumnScaling scaling;
    FkvSketch& sk = run.sketch;
    sk.C = fkv_build_C(a, rows, cols, &scaling);
    auto [sigma, omega] = fkv_decompose(sk.C, std::min({params.k, params.r, params.c}));
    sk.row_indices = std::move(rows.indices);
    sk.row_scales = std::move(rows.scales);
    sk.col_indices = std::move(cols);
    sk.col_scales = std::move(scaling.scales);
    sk.zero_columns = std::move(scaling.zero_columns);
    sk.sigma = std::move(sigma);
    sk.omega = std::move(omega);
    sk.requested_rank = params.k;
    sk.frobenius_norm = a.frobenius_norm();
    run.timings.svd_c = seconds_since(t);

    t = Clock::now();
    RightVectorCache cache(sk, a);
    run.lambda_hat.resize(static_cast<Eigen::Index>(sk.rank()));
    for (std::size_t l = 0; l < sk.rank(); ++l) {
        CoefficientEstimate e = std::visit(
            [&](const auto& tgt) {
                using T = std::decay_t<decltype(tgt)>;
                if constexpr (std::is_same_v<T, LinearQuery>)
                    return estimate_lambda_linear(a, tgt.b, sk, l, params.estimator, rng, &cache);
                else
                    return estimate_lambda_recommendation(a, tgt.user, sk, l, params.estimator, rng,
                                                          &cache);
            },
            target);
        run.lambda_hat(static_cast<Eigen::Index>(l)) = e.lambda_hat;
        run.estimates.push_back(std::move(e));
    }
    run.timings.lambda = seconds_since(t);

    t = Clock::now();
    run.solution = make_implicit_solution(sk, run.lambda_hat);
    if (x_indices) {
        run.x_indices = *x_indices;
        run.x_entries.resize(static_cast<Eigen::Index>(x_indices->size()));
        for (std::size_t q = 0; q < x_indices->size(); ++q)
            run.x_entries(static_cast<Eigen::Index>(q)) = solution_entry(run.solution, a, (*x_indices)[q]);
    } else {
        run.x_entries = solution_vector(run.solution, a);
        run.x_indices = first_indices(a.cols());
    }
    run.timings.x = seconds_since(t);
    run.timings.total = seconds_since(start);
    return run;
}

DenseTruth dense_truth(const Eigen::MatrixXd& a, const SolveTarget& target, std::size_t k) {
    DenseTruth truth;
    const auto start = Clock::now();
    auto t = Clock::now();
    ExactDecomposition svd = exact_svd(a, k);
    truth.timings.svd_a = seconds_since(t);
    t = Clock::now();
    truth.lambda = exact_lambdas(svd, a, target);
    truth.timings.lambda = seconds_since(t);
    t = Clock::now();
    truth.x = svd.v * truth.lambda;
    truth.timings.x = seconds_since(t);
    truth.timings.total = seconds_since(start);
    truth.sigma = std::move(svd.sigma);
    truth.U = std::move(svd.u);
    truth.V = std::move(svd.v);
    return truth;
}

DenseTruth gaussian_truth(const GaussianLowRankProblem& p) {
    DenseTruth truth;
    truth.sigma = p.sigma;
    truth.U = p.U;
    truth.V = p.V.transpose();
    truth.lambda = p.exact_lambdas();
    truth.x = p.exact_solution();
    return truth;
}

RepetitionErrors evaluate_dense(const PipelineRun& run, const SampleableMatrix& a,
                                const DenseTruth& truth, const ErrorOptions& options) {
    RepetitionErrors e;
    const auto& sk = run.sketch;
    const Eigen::Index kk = std::min<Eigen::Index>(sk.rank(), truth.sigma.size());
    require(kk > 0, ErrorCode::UndefinedMetric, "sketch retained no singular values");
    e.eta_sigma = singular_value_error(to_std(truth.sigma), to_std(sk.sigma));

    const Eigen::MatrixXd v_tilde = right_singular_vectors(sk, a);
    const Eigen::MatrixXd v_exact = truth.V.leftCols(kk);
    const Eigen::MatrixXd v_approx = v_tilde.leftCols(kk);
    const std::vector<double> signs = sign_alignment(v_exact, v_approx, options.L);
    const RelativeError ev = vector_error_up_to_sign(v_exact, v_approx, options.L);
    e.eta_v = ev.value;
    e.skipped_entries += ev.skipped;
    e.eta_lambda = coefficient_error(to_std(truth.lambda.head(kk)), to_std(run.lambda_hat.head(kk)), signs);

    std::vector<double> x_exact;
    for (std::size_t j : run.x_indices) x_exact.push_back(truth.x(static_cast<Eigen::Index>(j)));
    const std::vector<double> x_approx = to_std(run.x_entries);
    const RelativeError ex = relative_error(x_exact, x_approx, ErrorMode::Mean, options.L);
    e.eta_x_mean_firstL = ex.value;
    e.skipped_entries += ex.skipped;
    e.eta_x_median = relative_error(x_exact, x_approx, ErrorMode::Median).value;

    if (options.reconstruction) {
        const Eigen::MatrixXd a_k = truth.U * truth.sigma.asDiagonal() * truth.V.transpose();
        e.eta_A = frobenius_relative_error(a_k, reconstruct(sk, a, ReconstructMode::Matrix));
        const Eigen::MatrixXd a_k_plus =
            truth.V * truth.sigma.cwiseInverse().asDiagonal() * truth.U.transpose();
        e.eta_A_plus = frobenius_relative_error(a_k_plus, reconstruct(sk, a, ReconstructMode::Pseudoinverse));
    }
    return e;
}

std::uint64_t repetition_seed(std::uint64_t master, std::size_t rep) { return derive_seed(master, rep); }

std::string library_version() { return QI_VERSION; }

nlohmann::json run_metadata(const nlohmann::json& config, std::uint64_t seed,
                            const std::string& dataset_hash) {
    nlohmann::json meta{{"config", config},
                        {"seed", seed},
                        {"seed_derivation", "splitmix64(master, repetition)"},
                        {"code_version", library_version()},
                        {"rng", "mt19937_64"}};
    if (!dataset_hash.empty()) meta["dataset_fnv1a64"] = dataset_hash;
    return meta;
}

// ---------------------------------------------------------------- highdim

RepetitionErrors evaluate_hadamard(const PipelineRun& run, const HadamardProblem& problem,
                                   std::size_t L) {
    RepetitionErrors e;
    const auto& sk = run.sketch;
    const std::size_t kk = std::min(sk.rank(), problem.k());
    require(kk > 0, ErrorCode::UndefinedMetric, "sketch retained no singular values");
    e.eta_sigma = singular_value_error(problem.sigma(), to_std(sk.sigma));

    const std::size_t rows = std::min<std::size_t>(L, problem.cols());
    Eigen::MatrixXd v_exact(rows, kk), v_approx(rows, kk);
    for (std::size_t y = 0; y < rows; ++y) {
        const Eigen::VectorXd col = right_singular_column(sk, problem, y);
        for (std::size_t l = 0; l < kk; ++l) {
            v_exact(y, l) = problem.singular_vector_entry(l, y);
            v_approx(y, l) = col(l);
        }
    }
    const std::vector<double> signs = sign_alignment(v_exact, v_approx);
    e.eta_v = vector_error_up_to_sign(v_exact, v_approx).value;
    std::vector<double> lambda_exact(kk);
    for (std::size_t l = 0; l < kk; ++l) lambda_exact[l] = problem.exact_lambda(l);
    e.eta_lambda = coefficient_error(lambda_exact, to_std(run.lambda_hat.head(kk)), signs);

    std::vector<double> x_exact;
    for (std::size_t y : run.x_indices) x_exact.push_back(problem.exact_solution_entry(y));
    const RelativeError ex = relative_error(x_exact, to_std(run.x_entries), ErrorMode::Mean, L);
    e.eta_x_mean_firstL = ex.value;
    e.skipped_entries = ex.skipped;
    e.eta_x_median = relative_error(x_exact, to_std(run.x_entries), ErrorMode::Median, L).value;
    return e;
}

HighDimResult run_highdim(const HighDimConfig& cfg) {
    HighDimResult result;
    result.report.L = cfg.L;
    result.report.repetitions.resize(cfg.reps);
    result.timings.resize(cfg.reps);
    const auto start = Clock::now();
    const SolverParams params{cfg.r, cfg.c, cfg.k, cfg.estimator};
    for_each_rep(cfg.reps, cfg.threads, [&](std::size_t rep) {
        Rng rng = make_rng(cfg.seed, rep);
        const HadamardProblem problem =
            HadamardProblem::spaced(cfg.n_bits, cfg.k, cfg.kappa, cfg.kappa_beta, rng);
        const LinearQuery target{[&problem](std::size_t y) { return problem.b_entry(y); }};
        const auto indices = first_indices(std::min<std::size_t>(cfg.L, problem.cols()));
        const PipelineRun run = run_pipeline(problem, target, params, indices, rng);
        result.report.repetitions[rep] = evaluate_hadamard(run, problem, cfg.L);
        result.timings[rep] = run.timings;
    });
    result.wall_seconds = seconds_since(start);
    return result;
}

// ----------------------------------------------------------------- random

RandomPointResult run_random_point(const RandomPointConfig& cfg) {
    RandomPointResult result;
    result.config = cfg;
    result.report.L = cfg.L;
    result.report.repetitions.resize(cfg.reps);
    result.timings.resize(cfg.reps);
    const SolverParams params{cfg.r, cfg.c, cfg.k, cfg.estimator};
    for_each_rep(cfg.reps, cfg.threads, [&](std::size_t rep) {
        Rng rng = make_rng(cfg.seed, rep);
        const GaussianLowRankProblem problem = gaussian_problem(cfg.m, cfg.n, cfg.k, cfg.kappa, rng);
        const DenseSampleableMatrix a(problem.matrix(), cfg.backend);
        const DenseTruth truth = gaussian_truth(problem);
        const std::vector<double> b = to_std(problem.b);
        const LinearQuery target{[&b](std::size_t i) { return b[i]; }};
        const PipelineRun run = run_pipeline(a, target, params, std::nullopt, rng);
        result.report.repetitions[rep] = evaluate_dense(run, a, truth, {cfg.L, cfg.reconstruction});
        result.timings[rep] = run.timings;
        if (cfg.baseline && rep == 0)
            result.baseline = dense_truth(a.to_dense(), LinearTarget{b}, cfg.k).timings;
    });
    return result;
}

// -------------------------------------------------------------- portfolio

PortfolioResult run_portfolio(const MarkowitzSystem& system, const std::vector<std::string>& asset_ids,
                              const PortfolioConfig& cfg) {
    PortfolioResult result;
    result.asset_ids = asset_ids;
    const DenseSampleableMatrix a(system.A);
    const Eigen::MatrixXd dense = system.A;
    const DenseTruth truth = dense_truth(dense, LinearTarget{system.b}, cfg.k);
    result.baseline = truth.timings;
    const Eigen::VectorXd all_sigma = Eigen::BDCSVD<Eigen::MatrixXd>(dense).singularValues();
    result.sigma_max = all_sigma(0);
    result.sigma_min = all_sigma(all_sigma.size() - 1);
    result.exact_solution = markowitz_exact_solution(system);

    const SolverParams params{cfg.r, cfg.c, cfg.k, cfg.estimator};
    const LinearQuery target{[&system](std::size_t i) { return system.b[i]; }};
    result.report.L = cfg.L;
    for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
        Rng rng = make_rng(cfg.seed, rep);
        const PipelineRun run = run_pipeline(a, target, params, std::nullopt, rng);
        result.report.repetitions.push_back(evaluate_dense(run, a, truth, {cfg.L, true}));
        result.timings.push_back(run.timings);
        if (rep == 0) {
            result.first_solution = run.x_entries;
            result.spectrum = compare_spectrum(run, truth.sigma, truth.lambda, cfg.first_values);
        }
    }
    return result;
}

// -------------------------------------------------------------- movielens

Recommendation recommend(const PreferenceMatrix& prefs, std::size_t user, const SolverParams& params,
                         std::size_t top_n, Rng& rng) {
    require(user < prefs.matrix.rows(), ErrorCode::InvalidInput, "user index out of range");
    require(!prefs.matrix.row(user).empty(), ErrorCode::EmptyUserHistory, "user has no ratings");
    const PipelineRun run = run_pipeline(prefs.matrix, RecommendationTarget{user}, params, std::nullopt, rng);
    Recommendation rec;
    rec.predicted_row = run.x_entries;
    rec.approximate = rank_unrated(prefs, user, rec.predicted_row, top_n);
    rec.exact = rank_unrated(prefs, user, exact_recommendation_row(prefs, user, params.k), top_n);
    return rec;
}

MovielensResult run_movielens(const PreferenceMatrix& prefs, const MovielensConfig& cfg) {
    require(cfg.user < prefs.matrix.rows(), ErrorCode::InvalidInput, "user index out of range");
    require(!prefs.matrix.row(cfg.user).empty(), ErrorCode::EmptyUserHistory, "user has no ratings");
    MovielensResult result;
    const Eigen::MatrixXd dense = prefs.matrix.to_dense();
    const DenseTruth truth = dense_truth(dense, RecommendationTarget{cfg.user}, cfg.k);
    result.baseline = truth.timings;
    const Eigen::VectorXd all_sigma = Eigen::BDCSVD<Eigen::MatrixXd>(dense).singularValues();
    result.sigma_max = all_sigma(0);
    result.sigma_min = all_sigma(all_sigma.size() - 1);
    result.kappa = result.sigma_max / result.sigma_min;

    const SolverParams params{cfg.r, cfg.c, cfg.k, cfg.estimator};
    result.report.L = cfg.L;
    for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
        Rng rng = make_rng(cfg.seed, rep);
        const PipelineRun run =
            run_pipeline(prefs.matrix, RecommendationTarget{cfg.user}, params, std::nullopt, rng);
        result.report.repetitions.push_back(evaluate_dense(run, prefs.matrix, truth, {cfg.L, true}));
        result.timings.push_back(run.timings);
        if (rep == 0) {
            Recommendation& rec = result.first_recommendation;
            rec.predicted_row = run.x_entries;
            rec.approximate = rank_unrated(prefs, cfg.user, run.x_entries, cfg.top_n);
            rec.exact = rank_unrated(prefs, cfg.user, truth.x, cfg.top_n);
            result.spectrum = compare_spectrum(run, truth.sigma, truth.lambda, cfg.first_values);
        }
    }
    return result;
}

void to_json(nlohmann::json& j, const StageTimings& t) {
    j = nlohmann::json{{"t_LS", t.ls}, {"t_SVD_C", t.svd_c}, {"t_lambda", t.lambda},
                       {"t_x", t.x},   {"t_total", t.total}};
}

void to_json(nlohmann::json& j, const BaselineTimings& t) {
    j = nlohmann::json{{"t_SVD_A", t.svd_a}, {"t_lambda", t.lambda}, {"t_x", t.x}, {"t_total", t.total}};
}

void to_json(nlohmann::json& j, const SpectrumComparison& s) {
    j = nlohmann::json{{"sigma_exact", s.sigma_exact},
                       {"sigma_tilde", s.sigma_tilde},
                       {"lambda_exact", s.lambda_exact},
                       {"lambda_hat", s.lambda_hat}};
}

void to_json(nlohmann::json& j, const RankedItem& item) {
    j = nlohmann::json{{"column", item.column}, {"movie_id", item.movie_id}, {"score", item.score}};
}

}  // namespace qi
