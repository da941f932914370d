#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "qinspired/fkv.hpp"
#include "qinspired/matrix_access.hpp"
#include "qinspired/random.hpp"

namespace qi {

using Bits = std::uint64_t;

inline int parity(Bits x) { return __builtin_popcountll(x) & 1; }
inline double parity_sign(Bits x) { return parity(x) ? -1.0 : 1.0; }

/// Implicit 2^n x 2^n matrix A = sum_l sigma_l V^(l) with
/// A_{y,z} = a(y xor z) / 2^n and a(w) = sum_l sigma_l (-1)^{x_l . w}.
///
/// Left and right singular vectors coincide: v^(l)_y = (-1)^{x_l . y} / 2^{n/2}.
/// Every row has the same norm, so length-square row sampling is uniform.
/// Column sampling within a row is rejection sampling against the maximum
/// |a|^2 = (sum_l sigma_l)^2, attained at z = y. Nothing of size 2^n is ever
/// allocated; n_bits may be up to 62.
class HadamardProblem final : public SampleableMatrix {
public:
    HadamardProblem(unsigned n_bits, std::vector<double> sigma, std::vector<Bits> bitstrings,
                    std::vector<double> beta);

    /// Distinct bitstrings drawn uniformly at random.
    static HadamardProblem random(unsigned n_bits, std::vector<double> sigma,
                                  std::vector<double> beta, Rng& rng);

    /// sigma and beta evenly spaced from kappa (resp. kappa_beta) down to 1,
    /// e.g. k = kappa = kappa_beta = 3 gives sigma = beta = (3, 2, 1).
    static HadamardProblem spaced(unsigned n_bits, std::size_t k, double kappa, double kappa_beta,
                                  Rng& rng);

    std::size_t rows() const override { return std::size_t{1} << n_bits_; }
    std::size_t cols() const override { return std::size_t{1} << n_bits_; }
    double entry(std::size_t y, std::size_t z) const override;
    double frobenius_norm() const override { return frobenius_norm_; }
    double row_norm(std::size_t) const override { return row_norm_; }
    std::size_t sample_row(Rng& rng) const override;
    std::size_t sample_col_in_row(std::size_t y, Rng& rng) const override;

    unsigned n_bits() const { return n_bits_; }
    std::size_t k() const { return sigma_.size(); }
    const std::vector<double>& sigma() const { return sigma_; }
    const std::vector<Bits>& bitstrings() const { return bitstrings_; }
    const std::vector<double>& beta() const { return beta_; }
    const std::vector<double>& a_table() const { return a_table_; }
    double a_norm() const { return a_norm_; }

    /// Unscaled entry value a_{y,z}.
    double a_value(Bits y, Bits z) const;
    /// Exact v^(l)_y (= u^(l)_y).
    double singular_vector_entry(std::size_t l, Bits y) const;
    /// b_y = sum_l beta_l u^(l)_y.
    double b_entry(Bits y) const;
    /// Exact lambda_l = beta_l / sigma_l.
    double exact_lambda(std::size_t l) const { return beta_[l] / sigma_[l]; }
    /// Exact x_y = sum_l (beta_l / sigma_l) v^(l)_y.
    double exact_solution_entry(Bits y) const;

    /// Closed-form C_{s,t} = a_{i_s,j_t} ||a|| / (sqrt(2^k c) sqrt(sum_s' a_{i_s',j_t}^2)).
    double C_entry(const std::vector<std::size_t>& row_indices,
                   const std::vector<std::size_t>& col_indices, std::size_t s,
                   std::size_t t) const;
    Eigen::MatrixXd build_C(const std::vector<std::size_t>& row_indices,
                            const std::vector<std::size_t>& col_indices) const;

    /// One draw of chi_{y,z} = (||a||^2 / 2^k) (-1)^{x_l . z} b'_y / a(y xor z)
    /// with (y, z) drawn by length-square sampling and b'_y = sum beta (-1)^{x . y}.
    /// Its mean is <v^(l), A^T b>.
    double chi_sample(std::size_t l, Rng& rng) const;

    std::size_t trial_cap = 1'000'000;

private:
    unsigned n_bits_;
    std::vector<double> sigma_;
    std::vector<Bits> bitstrings_;
    std::vector<double> beta_;
    std::vector<double> a_table_;
    double a_norm_ = 0.0;
    double a_max_squared_ = 0.0;
    double frobenius_norm_ = 0.0;
    double row_norm_ = 0.0;
    double inv_dim_ = 0.0;
    double inv_sqrt_dim_ = 0.0;
};

void to_json(nlohmann::json& j, const HadamardProblem& p);
HadamardProblem hadamard_from_json(const nlohmann::json& j);

/// A = U diag(sigma) V with U (m x k) and V (k x n) orthonormal, built from
/// QR factors of standard-normal matrices. sigma_max ~ U[1, 500],
/// sigma_min = sigma_max / kappa, interior values from the quarter-circle
/// density on (sigma_min, sigma_max). b = U beta with beta ~ N(0, 1).
struct GaussianLowRankProblem {
    std::size_t m = 0;
    std::size_t n = 0;
    std::size_t k = 0;
    double kappa = 1.0;
    Eigen::MatrixXd U;
    Eigen::MatrixXd V;
    Eigen::VectorXd sigma;
    Eigen::VectorXd beta;
    Eigen::VectorXd b;

    RowMajorMatrix matrix() const;
    /// Exact lambda_l = beta_l / sigma_l.
    Eigen::VectorXd exact_lambdas() const { return beta.cwiseQuotient(sigma); }
    /// x = A^+ b = V^T (beta / sigma).
    Eigen::VectorXd exact_solution() const { return V.transpose() * exact_lambdas(); }
};

GaussianLowRankProblem gaussian_problem(std::size_t m, std::size_t n, std::size_t k,
                                        double kappa, Rng& rng);

/// Quarter-circle draw on (lo, hi): density proportional to sqrt(hi^2 - s^2).
double quarter_circle_sample(double lo, double hi, Rng& rng);

struct GaussianSpec {
    std::size_t m = 0, n = 0, k = 0;
    double kappa = 1.0;
    std::uint64_t seed = 0;
};

void to_json(nlohmann::json& j, const GaussianSpec& spec);
void from_json(const nlohmann::json& j, GaussianSpec& spec);

}  // namespace qi
