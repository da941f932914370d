#include "qinspired/solution.hpp"

#include <cmath>
#include <limits>

#include "qinspired/errors.hpp"

namespace qi {

ImplicitSolution make_implicit_solution(FkvSketch sketch, const Eigen::VectorXd& lambda_tilde) {
    require(static_cast<std::size_t>(lambda_tilde.size()) == sketch.rank(), ErrorCode::InvalidInput,
            "one coefficient per retained singular value is required");
    ImplicitSolution sol;
    sol.w = sketch.omega * lambda_tilde.cwiseQuotient(sketch.sigma);
    sol.norm_w = sol.w.norm();
    sol.lambda_tilde = lambda_tilde;
    sol.sketch = std::move(sketch);
    return sol;
}

double solution_entry(const ImplicitSolution& sol, const SampleableMatrix& a, std::size_t j) {
    require(j < a.cols(), ErrorCode::InvalidInput, "column index out of range");
    const auto& sk = sol.sketch;
    double sum = 0.0;
    for (std::size_t s = 0; s < sk.r(); ++s)
        sum += sk.row_scales[s] * a.entry(sk.row_indices[s], j) * sol.w(s);
    return sum;
}

Eigen::VectorXd solution_vector(const ImplicitSolution& sol, const SampleableMatrix& a,
                                std::size_t limit) {
    require(a.cols() <= limit, ErrorCode::RefusedAtScale, "solution vector too long to form");
    const auto& sk = sol.sketch;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(a.cols());
    for (std::size_t s = 0; s < sk.r(); ++s) {
        const double weight = sk.row_scales[s] * sol.w(s);
        const std::size_t i = sk.row_indices[s];
        for (std::size_t j = 0; j < a.cols(); ++j) x(j) += weight * a.entry(i, j);
    }
    return x;
}

RejectionSample rejection_sample_entry(const ImplicitSolution& sol, const SampleableMatrix& a,
                                       Rng& rng, std::size_t trial_cap) {
    const auto& sk = sol.sketch;
    require(sol.norm_w > 0.0, ErrorCode::SamplerStalled, "w is zero, so x~ is zero");
    const double norm_w2 = sol.norm_w * sol.norm_w;
    for (std::size_t trial = 1; trial <= trial_cap; ++trial) {
        const std::size_t s = uniform_index(rng, sk.r());
        const std::size_t j = a.sample_col_in_row(sk.row_indices[s], rng);
        double dot = 0.0;
        double col_norm2 = 0.0;
        for (std::size_t t = 0; t < sk.r(); ++t) {
            const double rtj = sk.row_scales[t] * a.entry(sk.row_indices[t], j);
            dot += sol.w(t) * rtj;
            col_norm2 += rtj * rtj;
        }
        const double accept = dot * dot / (col_norm2 * norm_w2);
        require(accept <= 1.0 + 1e-9, ErrorCode::InternalInvariantViolation,
                "acceptance probability exceeds one");
        if (uniform01(rng) < accept) return {j, trial};
    }
    throw Error(ErrorCode::SamplerStalled, "rejection sampler exceeded its trial cap");
}

double expected_rejection_trials(const ImplicitSolution& sol, double solution_norm_squared) {
    require(solution_norm_squared > 0.0, ErrorCode::SamplerStalled, "x~ is zero");
    const double fro = sol.sketch.frobenius_norm;
    return fro * fro * sol.norm_w * sol.norm_w / solution_norm_squared;
}

ExactDecomposition exact_svd(const Eigen::MatrixXd& a, std::size_t k) {
    require(a.size() > 0, ErrorCode::InvalidInput, "matrix is empty");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& values = svd.singularValues();
    require(values(0) > 0.0, ErrorCode::DegenerateDistribution, "matrix is zero");
    const double cutoff = static_cast<double>(std::max(a.rows(), a.cols())) *
                          std::numeric_limits<double>::epsilon() * values(0);
    std::size_t kept = 0;
    const std::size_t limit = std::min<std::size_t>(k, values.size());
    while (kept < limit && values(kept) > cutoff) ++kept;
    ExactDecomposition out;
    out.sigma = values.head(kept);
    out.u = svd.matrixU().leftCols(kept);
    out.v = svd.matrixV().leftCols(kept);
    return out;
}

namespace {

Eigen::VectorXd lambdas_for(const Eigen::MatrixXd& a, const Eigen::MatrixXd& v,
                            const Eigen::VectorXd& sigma, const SolveTarget& target) {
    if (const auto* lin = std::get_if<LinearTarget>(&target)) {
        require(lin->b.size() == static_cast<std::size_t>(a.rows()), ErrorCode::InvalidInput,
                "b must have one entry per row of A");
        const Eigen::Map<const Eigen::VectorXd> b(lin->b.data(), lin->b.size());
        const Eigen::VectorXd atb = a.transpose() * b;
        return (v.transpose() * atb).cwiseQuotient(sigma.cwiseAbs2());
    }
    const auto user = std::get<RecommendationTarget>(target).user;
    require(user < static_cast<std::size_t>(a.rows()), ErrorCode::InvalidInput, "user out of range");
    require(a.row(user).squaredNorm() > 0.0, ErrorCode::EmptyUserHistory, "user has no ratings");
    return v.transpose() * a.row(user).transpose();
}

}  // namespace

Eigen::VectorXd exact_lambdas(const ExactDecomposition& svd, const Eigen::MatrixXd& a,
                              const SolveTarget& target) {
    return lambdas_for(a, svd.v, svd.sigma, target);
}

Eigen::VectorXd direct_solution(const SampleableMatrix& a, const SolveTarget& target,
                                std::size_t k, DirectMethod method, const FkvSketch* sketch,
                                std::size_t limit) {
    const Eigen::MatrixXd dense = a.to_dense(limit);
    if (method == DirectMethod::ExactSvd) {
        const ExactDecomposition svd = exact_svd(dense, k);
        return svd.v * lambdas_for(dense, svd.v, svd.sigma, target);
    }
    require(sketch != nullptr, ErrorCode::InvalidInput, "fkv_direct needs a sketch");
    const std::size_t kept = std::min(k, sketch->rank());
    const Eigen::MatrixXd v = right_singular_vectors(*sketch, a, limit).leftCols(kept);
    const Eigen::VectorXd sigma = sketch->sigma.head(kept);
    return v * lambdas_for(dense, v, sigma, target);
}

}  // namespace qi
