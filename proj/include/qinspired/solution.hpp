#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qinspired/fkv.hpp"
#include "qinspired/matrix_access.hpp"
#include "qinspired/random.hpp"

namespace qi {

/// x~ = R^T w with w = sum_l (lambda~_l / sigma~_l) omega^(l). Holds a copy of
/// the sketch; A is passed to each query.
struct ImplicitSolution {
    FkvSketch sketch;
    Eigen::VectorXd lambda_tilde;
    Eigen::VectorXd w;
    double norm_w = 0.0;
};

ImplicitSolution make_implicit_solution(FkvSketch sketch, const Eigen::VectorXd& lambda_tilde);

/// x~_j = sum_s row_scales[s] A[i_s][j] w[s]; O(r) entry queries.
double solution_entry(const ImplicitSolution& sol, const SampleableMatrix& a, std::size_t j);

/// Every entry of x~ (desk scale).
Eigen::VectorXd solution_vector(const ImplicitSolution& sol, const SampleableMatrix& a,
                                std::size_t limit = kDeskScaleLimit);

inline constexpr std::size_t kDefaultTrialCap = 1'000'000;

struct RejectionSample {
    std::size_t index = 0;
    std::size_t trials = 0;
};

/// Draws j with probability x~_j^2 / ||x~||^2: pick a sketch row uniformly,
/// propose j from that row's length-square distribution, accept with
/// probability <w, R_.j>^2 / (||R_.j||^2 ||w||^2). Column quantities are
/// recomputed per trial (O(r)); nothing of size n is cached.
RejectionSample rejection_sample_entry(const ImplicitSolution& sol, const SampleableMatrix& a,
                                       Rng& rng, std::size_t trial_cap = kDefaultTrialCap);

/// Mean trials per accepted draw: ||R||_F^2 ||w||^2 / ||x~||^2. Every row of
/// R has squared norm ||A||_F^2 / r, so ||R||_F^2 = ||A||_F^2; when that
/// equals r this is r ||w||^2 / ||x~||^2.
double expected_rejection_trials(const ImplicitSolution& sol, double solution_norm_squared);

struct LinearTarget {
    std::vector<double> b;
};

struct RecommendationTarget {
    std::size_t user = 0;
};

using SolveTarget = std::variant<LinearTarget, RecommendationTarget>;

enum class DirectMethod { ExactSvd, FkvDirect };

/// Full solution vector without Monte Carlo. ExactSvd uses a dense SVD of A
/// truncated to k; FkvDirect uses the sketch's ~sigma and ~v with exact inner
/// products. For linear targets lambda_l = <v, A^T b> / sigma^2, for
/// recommendations lambda_l = <A_i^T, v>.
Eigen::VectorXd direct_solution(const SampleableMatrix& a, const SolveTarget& target,
                                std::size_t k, DirectMethod method,
                                const FkvSketch* sketch = nullptr,
                                std::size_t limit = kDeskScaleLimit);

/// Exact coefficients and right singular vectors from a dense SVD, truncated
/// to k. Values below max(m,n) * eps * sigma_1 are treated as zero.
struct ExactDecomposition {
    Eigen::VectorXd sigma;
    Eigen::MatrixXd u;
    Eigen::MatrixXd v;
};

ExactDecomposition exact_svd(const Eigen::MatrixXd& a, std::size_t k);

/// lambda from an exact decomposition.
Eigen::VectorXd exact_lambdas(const ExactDecomposition& svd, const Eigen::MatrixXd& a,
                              const SolveTarget& target);

}  // namespace qi
