#include "qinspired/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "qinspired/errors.hpp"

namespace qi {

HadamardProblem::HadamardProblem(unsigned n_bits, std::vector<double> sigma,
                                 std::vector<Bits> bitstrings, std::vector<double> beta)
    : n_bits_(n_bits) {
    const std::size_t k = sigma.size();
    require(n_bits >= 1 && n_bits <= 62, ErrorCode::InvalidInput, "n_bits must be in [1, 62]");
    require(k >= 1 && k <= 20, ErrorCode::InvalidInput, "k must be in [1, 20]");
    require(bitstrings.size() == k && beta.size() == k, ErrorCode::InvalidInput,
            "sigma, bitstrings and beta must have the same length");
    require(std::set<Bits>(bitstrings.begin(), bitstrings.end()).size() == k,
            ErrorCode::InvalidInput, "bitstrings must be distinct");
    for (std::size_t l = 0; l < k; ++l) {
        require(sigma[l] > 0.0 && std::isfinite(sigma[l]), ErrorCode::InvalidInput,
                "singular values must be positive");
        require(bitstrings[l] >> n_bits == 0, ErrorCode::InvalidInput,
                "bitstring wider than n_bits");
    }
    // Keep everything in descending-sigma order.
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });
    for (std::size_t l : order) {
        sigma_.push_back(sigma[l]);
        bitstrings_.push_back(bitstrings[l]);
        beta_.push_back(beta[l]);
    }

    a_table_.resize(std::size_t{1} << k);
    for (std::size_t pattern = 0; pattern < a_table_.size(); ++pattern) {
        double a = 0.0;
        for (std::size_t l = 0; l < k; ++l) a += ((pattern >> l) & 1) ? -sigma_[l] : sigma_[l];
        a_table_[pattern] = a;
    }
    a_norm_ = std::sqrt(std::inner_product(a_table_.begin(), a_table_.end(), a_table_.begin(), 0.0));
    const double sum_sigma = std::accumulate(sigma_.begin(), sigma_.end(), 0.0);
    a_max_squared_ = sum_sigma * sum_sigma;
    const double sum_sq = std::inner_product(sigma_.begin(), sigma_.end(), sigma_.begin(), 0.0);
    const double dim = std::ldexp(1.0, static_cast<int>(n_bits));
    frobenius_norm_ = std::sqrt(sum_sq);
    row_norm_ = std::sqrt(sum_sq / dim);
    inv_dim_ = 1.0 / dim;
    inv_sqrt_dim_ = 1.0 / std::sqrt(dim);
}

HadamardProblem HadamardProblem::random(unsigned n_bits, std::vector<double> sigma,
                                        std::vector<double> beta, Rng& rng) {
    require(n_bits >= 1 && n_bits <= 62, ErrorCode::InvalidInput, "n_bits must be in [1, 62]");
    require(sigma.size() <= (std::size_t{1} << std::min(n_bits, 20u)), ErrorCode::InvalidInput,
            "more singular vectors than distinct bitstrings");
    const Bits mask = (Bits{1} << n_bits) - 1;
    std::set<Bits> seen;
    std::vector<Bits> strings;
    while (strings.size() < sigma.size()) {
        const Bits x = rng() & mask;
        if (seen.insert(x).second) strings.push_back(x);
    }
    return HadamardProblem(n_bits, std::move(sigma), std::move(strings), std::move(beta));
}

namespace {

std::vector<double> evenly_spaced(std::size_t k, double top) {
    std::vector<double> out(k);
    for (std::size_t l = 0; l < k; ++l)
        out[l] = k == 1 ? top : top - (top - 1.0) * static_cast<double>(l) / static_cast<double>(k - 1);
    return out;
}

}  // namespace

HadamardProblem HadamardProblem::spaced(unsigned n_bits, std::size_t k, double kappa,
                                        double kappa_beta, Rng& rng) {
    require(kappa >= 1.0 && kappa_beta >= 1.0, ErrorCode::InvalidInput,
            "condition numbers must be at least 1");
    require(k >= 2 || (kappa == 1.0 && kappa_beta == 1.0), ErrorCode::InvalidInput,
            "k = 1 cannot realize a condition number above 1");
    return random(n_bits, evenly_spaced(k, kappa), evenly_spaced(k, kappa_beta), rng);
}

double HadamardProblem::a_value(Bits y, Bits z) const {
    const Bits w = y ^ z;
    double a = 0.0;
    for (std::size_t l = 0; l < sigma_.size(); ++l) a += sigma_[l] * parity_sign(bitstrings_[l] & w);
    return a;
}

double HadamardProblem::entry(std::size_t y, std::size_t z) const { return a_value(y, z) * inv_dim_; }

std::size_t HadamardProblem::sample_row(Rng& rng) const {
    return rng() & ((Bits{1} << n_bits_) - 1);
}

std::size_t HadamardProblem::sample_col_in_row(std::size_t y, Rng& rng) const {
    const Bits mask = (Bits{1} << n_bits_) - 1;
    for (std::size_t trial = 0; trial < trial_cap; ++trial) {
        const Bits z = rng() & mask;
        const double a = a_value(y, z);
        if (uniform01(rng) * a_max_squared_ < a * a) return z;
    }
    throw Error(ErrorCode::SamplerStalled, "column rejection sampler exceeded its trial cap");
}

double HadamardProblem::singular_vector_entry(std::size_t l, Bits y) const {
    return parity_sign(bitstrings_[l] & y) * inv_sqrt_dim_;
}

double HadamardProblem::b_entry(Bits y) const {
    double b = 0.0;
    for (std::size_t l = 0; l < beta_.size(); ++l) b += beta_[l] * parity_sign(bitstrings_[l] & y);
    return b * inv_sqrt_dim_;
}

double HadamardProblem::exact_solution_entry(Bits y) const {
    double x = 0.0;
    for (std::size_t l = 0; l < beta_.size(); ++l)
        x += beta_[l] / sigma_[l] * parity_sign(bitstrings_[l] & y);
    return x * inv_sqrt_dim_;
}

double HadamardProblem::C_entry(const std::vector<std::size_t>& row_indices,
                                const std::vector<std::size_t>& col_indices, std::size_t s,
                                std::size_t t) const {
    const Bits z = col_indices[t];
    double col_sq = 0.0;
    for (std::size_t i : row_indices) {
        const double a = a_value(i, z);
        col_sq += a * a;
    }
    if (col_sq == 0.0) return 0.0;
    const double two_k = std::ldexp(1.0, static_cast<int>(sigma_.size()));
    const double c = static_cast<double>(col_indices.size());
    return a_norm_ / (std::sqrt(two_k * c) * std::sqrt(col_sq)) * a_value(row_indices[s], z);
}

Eigen::MatrixXd HadamardProblem::build_C(const std::vector<std::size_t>& row_indices,
                                         const std::vector<std::size_t>& col_indices) const {
    const std::size_t r = row_indices.size();
    const std::size_t c = col_indices.size();
    const double two_k = std::ldexp(1.0, static_cast<int>(sigma_.size()));
    Eigen::MatrixXd C(r, c);
    Eigen::VectorXd column(r);
    for (std::size_t t = 0; t < c; ++t) {
        for (std::size_t s = 0; s < r; ++s) column(s) = a_value(row_indices[s], col_indices[t]);
        const double norm = column.norm();
        if (norm == 0.0) {
            C.col(t).setZero();
            continue;
        }
        C.col(t) = column * (a_norm_ / (std::sqrt(two_k * static_cast<double>(c)) * norm));
    }
    return C;
}

double HadamardProblem::chi_sample(std::size_t l, Rng& rng) const {
    require(l < sigma_.size(), ErrorCode::InvalidInput, "coefficient index out of range");
    const Bits y = sample_row(rng);
    const Bits z = sample_col_in_row(y, rng);
    double b_unscaled = 0.0;
    for (std::size_t q = 0; q < beta_.size(); ++q) b_unscaled += beta_[q] * parity_sign(bitstrings_[q] & y);
    const double two_k = std::ldexp(1.0, static_cast<int>(sigma_.size()));
    return a_norm_ * a_norm_ / two_k * parity_sign(bitstrings_[l] & z) / a_value(y, z) * b_unscaled;
}

namespace {

std::string to_hex(Bits x) {
    std::ostringstream out;
    out << std::hex << x;
    return out.str();
}

}  // namespace

void to_json(nlohmann::json& j, const HadamardProblem& p) {
    std::vector<std::string> hex;
    for (Bits x : p.bitstrings()) hex.push_back(to_hex(x));
    j = nlohmann::json{{"family", "hadamard"},
                       {"n_bits", p.n_bits()},
                       {"sigma", p.sigma()},
                       {"bitstrings", hex},
                       {"beta", p.beta()}};
}

HadamardProblem hadamard_from_json(const nlohmann::json& j) {
    std::vector<Bits> strings;
    for (const auto& s : j.at("bitstrings")) strings.push_back(std::stoull(s.get<std::string>(), nullptr, 16));
    return HadamardProblem(j.at("n_bits").get<unsigned>(), j.at("sigma").get<std::vector<double>>(),
                           std::move(strings), j.at("beta").get<std::vector<double>>());
}

RowMajorMatrix GaussianLowRankProblem::matrix() const {
    RowMajorMatrix a = U * sigma.asDiagonal() * V;
    return a;
}

double quarter_circle_sample(double lo, double hi, Rng& rng) {
    require(0.0 <= lo && lo < hi, ErrorCode::InvalidInput, "quarter-circle support must be (lo, hi)");
    const double hi2 = hi * hi;
    const double envelope = std::sqrt(hi2 - lo * lo);
    while (true) {
        const double s = lo + (hi - lo) * uniform01(rng);
        if (s <= lo) continue;
        if (uniform01(rng) * envelope < std::sqrt(hi2 - s * s)) return s;
    }
}

namespace {

Eigen::MatrixXd orthonormal_columns(std::size_t rows, std::size_t cols, Rng& rng) {
    std::normal_distribution<double> normal;
    Eigen::MatrixXd g(rows, cols);
    for (Eigen::Index j = 0; j < g.cols(); ++j)
        for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
}

}  // namespace

GaussianLowRankProblem gaussian_problem(std::size_t m, std::size_t n, std::size_t k, double kappa,
                                        Rng& rng) {
    require(k >= 1 && k <= std::min(m, n), ErrorCode::InvalidInput, "need 1 <= k <= min(m, n)");
    require(kappa >= 1.0, ErrorCode::InvalidInput, "kappa must be at least 1");
    require(k >= 2 || kappa == 1.0, ErrorCode::InvalidInput,
            "k = 1 cannot realize a condition number above 1");
    GaussianLowRankProblem p;
    p.m = m;
    p.n = n;
    p.k = k;
    p.kappa = kappa;
    p.U = orthonormal_columns(m, k, rng);
    p.V = orthonormal_columns(n, k, rng).transpose();

    const double sigma_max = 1.0 + 499.0 * uniform01(rng);
    const double sigma_min = sigma_max / kappa;
    std::vector<double> values{sigma_max};
    if (k >= 2) {
        for (std::size_t l = 0; l + 2 < k; ++l)
            values.push_back(kappa == 1.0 ? sigma_max : quarter_circle_sample(sigma_min, sigma_max, rng));
        values.push_back(sigma_min);
    }
    std::sort(values.begin(), values.end(), std::greater<>());
    p.sigma = Eigen::Map<Eigen::VectorXd>(values.data(), values.size());

    std::normal_distribution<double> normal;
    p.beta.resize(k);
    for (std::size_t l = 0; l < k; ++l) p.beta(l) = normal(rng);
    p.b = p.U * p.beta;
    return p;
}

void to_json(nlohmann::json& j, const GaussianSpec& spec) {
    j = nlohmann::json{{"family", "gaussian"}, {"m", spec.m},         {"n", spec.n},
                       {"k", spec.k},          {"kappa", spec.kappa}, {"seed", spec.seed}};
}

void from_json(const nlohmann::json& j, GaussianSpec& spec) {
    j.at("m").get_to(spec.m);
    j.at("n").get_to(spec.n);
    j.at("k").get_to(spec.k);
    j.at("kappa").get_to(spec.kappa);
    j.at("seed").get_to(spec.seed);
}

}  // namespace qi
