#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "qinspired/apps.hpp"
#include "qinspired/coeffs.hpp"
#include "qinspired/fkv.hpp"
#include "qinspired/metrics.hpp"
#include "qinspired/solution.hpp"
#include "qinspired/synthetic.hpp"

namespace qi {

struct SolverParams {
    std::size_t r = 0;
    std::size_t c = 0;
    std::size_t k = 0;
    EstimatorOptions estimator;
};

/// Wall-clock seconds per stage of the sampling pipeline. `total` is timed
/// around the whole run.
struct StageTimings {
    double ls = 0.0;
    double svd_c = 0.0;
    double lambda = 0.0;
    double x = 0.0;
    double total = 0.0;
};

/// Same breakdown for the dense exact solve.
struct BaselineTimings {
    double svd_a = 0.0;
    double lambda = 0.0;
    double x = 0.0;
    double total = 0.0;
};

struct LinearQuery {
    EntryQuery b;
};
using PipelineTarget = std::variant<LinearQuery, RecommendationTarget>;

struct PipelineRun {
    FkvSketch sketch;
    std::vector<CoefficientEstimate> estimates;
    Eigen::VectorXd lambda_hat;
    ImplicitSolution solution;
    std::vector<std::size_t> x_indices;
    Eigen::VectorXd x_entries;
    StageTimings timings;
};

/// Sketch, coefficient estimation and solution entries. With no explicit
/// indices every entry of x~ is formed (desk scale only).
PipelineRun run_pipeline(const SampleableMatrix& a, const PipelineTarget& target,
                         const SolverParams& params,
                         const std::optional<std::vector<std::size_t>>& x_indices, Rng& rng);

/// Exact rank-k reference: A_k = U diag(sigma) V^T, lambda, x.
struct DenseTruth {
    Eigen::VectorXd sigma;
    Eigen::MatrixXd U;
    Eigen::MatrixXd V;
    Eigen::VectorXd lambda;
    Eigen::VectorXd x;
    BaselineTimings timings;
};

DenseTruth dense_truth(const Eigen::MatrixXd& a, const SolveTarget& target, std::size_t k);
DenseTruth gaussian_truth(const GaussianLowRankProblem& p);

struct ErrorOptions {
    std::size_t L = 100;
    bool reconstruction = true;
};

/// Every eta metric for one pipeline run against a dense reference.
RepetitionErrors evaluate_dense(const PipelineRun& run, const SampleableMatrix& a,
                                const DenseTruth& truth, const ErrorOptions& options);

/// Per-repetition seed: derive_seed(master, rep).
std::uint64_t repetition_seed(std::uint64_t master, std::size_t rep);

/// Provenance written next to every result.
nlohmann::json run_metadata(const nlohmann::json& config, std::uint64_t seed,
                            const std::string& dataset_hash = "");
std::string library_version();

// ---------------------------------------------------------------- highdim

struct HighDimConfig {
    unsigned n_bits = 50;
    std::size_t k = 3;
    double kappa = 3.0;
    double kappa_beta = 3.0;
    std::size_t r = 150;
    std::size_t c = 150;
    std::size_t L = 100;
    std::size_t reps = 10;
    std::uint64_t seed = 1;
    EstimatorOptions estimator;
    std::size_t threads = 1;
};

struct HighDimResult {
    ErrorReport report;
    std::vector<StageTimings> timings;
    double wall_seconds = 0.0;
};

/// Implicit Hadamard pipeline. Each repetition draws its own problem and
/// sketch. Errors: eta_sigma, eta_lambda, eta_v and eta_x over the first L
/// entries, all against closed-form truth.
HighDimResult run_highdim(const HighDimConfig& config);
RepetitionErrors evaluate_hadamard(const PipelineRun& run, const HadamardProblem& problem,
                                   std::size_t L);

// ----------------------------------------------------------------- random

struct RandomPointConfig {
    std::size_t m = 4000;
    std::size_t n = 2000;
    std::size_t k = 5;
    double kappa = 5.0;
    std::size_t r = 425;
    std::size_t c = 425;
    std::size_t L = 100;
    std::size_t reps = 10;
    std::uint64_t seed = 1;
    EstimatorOptions estimator;
    bool reconstruction = true;
    /// Time a dense exact solve on the first repetition.
    bool baseline = false;
    std::size_t threads = 1;
    SamplerBackend backend = SamplerBackend::Direct;
};

struct RandomPointResult {
    RandomPointConfig config;
    ErrorReport report;
    std::vector<StageTimings> timings;
    std::optional<BaselineTimings> baseline;
};

RandomPointResult run_random_point(const RandomPointConfig& config);

// -------------------------------------------------------------- portfolio

struct PortfolioConfig {
    std::size_t k = 10;
    std::size_t r = 340;
    std::size_t c = 340;
    std::size_t L = 100;
    std::size_t reps = 10;
    std::uint64_t seed = 1;
    std::optional<double> mu;
    EstimatorOptions estimator;
    std::size_t first_values = 10;
};

struct SpectrumComparison {
    std::vector<double> sigma_exact;
    std::vector<double> sigma_tilde;
    std::vector<double> lambda_exact;
    std::vector<double> lambda_hat;
};

struct PortfolioResult {
    ErrorReport report;
    std::vector<StageTimings> timings;
    BaselineTimings baseline;
    double sigma_max = 0.0;
    double sigma_min = 0.0;
    std::vector<std::string> asset_ids;
    Eigen::VectorXd exact_solution;
    Eigen::VectorXd first_solution;  // x~ from the first repetition
    SpectrumComparison spectrum;     // first repetition
};

PortfolioResult run_portfolio(const MarkowitzSystem& system, const std::vector<std::string>& asset_ids,
                              const PortfolioConfig& config);

// -------------------------------------------------------------- movielens

struct MovielensConfig {
    std::size_t user = 0;
    std::size_t k = 10;
    std::size_t r = 450;
    std::size_t c = 4500;
    std::size_t L = 100;
    std::size_t reps = 10;
    std::size_t top_n = 10;
    std::uint64_t seed = 1;
    EstimatorOptions estimator;
    std::size_t first_values = 10;
};

struct Recommendation {
    std::vector<RankedItem> approximate;
    std::vector<RankedItem> exact;
    Eigen::VectorXd predicted_row;
};

/// Predicted row A'_i from the sampling pipeline and from the exact
/// rank-k projection, each ranked over unrated movies.
Recommendation recommend(const PreferenceMatrix& prefs, std::size_t user, const SolverParams& params,
                         std::size_t top_n, Rng& rng);

struct MovielensResult {
    ErrorReport report;
    std::vector<StageTimings> timings;
    BaselineTimings baseline;
    double sigma_max = 0.0;
    double sigma_min = 0.0;
    double kappa = 0.0;
    Recommendation first_recommendation;
    SpectrumComparison spectrum;
};

MovielensResult run_movielens(const PreferenceMatrix& prefs, const MovielensConfig& config);

void to_json(nlohmann::json& j, const StageTimings& t);
void to_json(nlohmann::json& j, const BaselineTimings& t);
void to_json(nlohmann::json& j, const SpectrumComparison& s);
void to_json(nlohmann::json& j, const RankedItem& item);

}  // namespace qi
