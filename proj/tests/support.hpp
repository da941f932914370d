#pragma once

// Shared oracles and generators for the test binaries.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qinspired/random.hpp"

namespace qi::test {

inline double chi_square_statistic(std::span<const std::size_t> counts, std::span<const double> probs) {
    double n = 0.0;
    for (auto c : counts) n += static_cast<double>(c);
    double stat = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (probs[i] == 0.0) {
            if (counts[i] != 0) return INFINITY;
            continue;
        }
        const double expected = n * probs[i];
        const double d = static_cast<double>(counts[i]) - expected;
        stat += d * d / expected;
    }
    return stat;
}

/// Upper 0.1% point of chi-square (Wilson-Hilferty cube approximation).
inline double chi_square_critical_001(std::size_t dof) {
    if (dof == 1) return 10.828;
    if (dof == 2) return 13.816;
    const double k = static_cast<double>(dof);
    const double z = 3.090232306;
    const double t = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
    return k * t * t * t;
}


/// True when counts fit probs at the 0.001 level. Cells expecting fewer
/// than five draws are pooled into one cell first.
inline bool chi_square_passes(std::span<const std::size_t> counts, std::span<const double> probs) {
    for (std::size_t i = 0; i < counts.size(); ++i)
        if (probs[i] == 0.0 && counts[i] != 0) return false;
    double n = 0.0;
    for (auto c : counts) n += static_cast<double>(c);
    std::vector<std::size_t> pc;
    std::vector<double> pp;
    std::size_t small_count = 0;
    double small_prob = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (probs[i] == 0.0) continue;
        if (n * probs[i] < 5.0) {
            small_count += counts[i];
            small_prob += probs[i];
        } else {
            pc.push_back(counts[i]);
            pp.push_back(probs[i]);
        }
    }
    if (small_prob > 0.0) {
        pc.push_back(small_count);
        pp.push_back(small_prob);
    }
    if (pp.size() <= 1) return true;
    return chi_square_statistic(pc, pp) < chi_square_critical_001(pp.size() - 1);
}

inline std::vector<double> normalized(std::span<const double> w) {
    double total = 0.0;
    for (double x : w) total += x;
    std::vector<double> p(w.begin(), w.end());
    for (double& x : p) x /= total;
    return p;
}

/// Non-negative weights with some exact zeros, at least one positive.
inline std::vector<double> random_weights(std::size_t n, Rng& rng) {
    std::vector<double> w(n);
    std::normal_distribution<double> normal;
    for (auto& x : w) {
        const double g = normal(rng);
        x = uniform01(rng) < 0.1 ? 0.0 : g * g;
    }
    w[uniform_index(rng, n)] = 1.0 + uniform01(rng);
    return w;
}

inline Eigen::MatrixXd random_matrix(Eigen::Index m, Eigen::Index n, Rng& rng) {
    std::normal_distribution<double> normal;
    Eigen::MatrixXd a(m, n);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = normal(rng);
    return a;
}

/// Dense pseudoinverse via Jacobi SVD, kept separate from the library's path.
inline Eigen::MatrixXd pinv_oracle(const Eigen::MatrixXd& a, double rel_tol = 1e-10) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0)) inv(i) = 1.0 / s(i);
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace qi::test
