#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qinspired/random.hpp"

namespace qi {

/// Dynamic prefix-sum tree over non-negative weights.
///
/// Flat-array complete binary tree: node 1 is the root, node p has children
/// 2p and 2p+1, and leaf i lives at node capacity + i. Leaves beyond the
/// input size are zero. An update recomputes each ancestor as the sum of its
/// two children rather than applying a delta, so no drift accumulates.
///
/// Leaf i covers [sum_{j<i} w_j, sum_{j<=i} w_j); a draw landing exactly on a
/// boundary goes to the higher index.
class LengthSquareTree {
public:
    explicit LengthSquareTree(std::span<const double> weights);

    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    double total() const { return nodes_[1]; }
    double weight(std::size_t i) const;
    double node(std::size_t p) const { return nodes_[p]; }

    /// Deterministic descent for u in [0,1); O(log n).
    std::size_t sample(double u) const;
    std::size_t sample(Rng& rng) const { return sample(uniform01(rng)); }

    void update(std::size_t i, double new_weight);

    /// Probability of leaf i under the current weights.
    double probability(std::size_t i) const;

private:
    std::size_t size_ = 0;
    std::size_t capacity_ = 1;
    std::vector<double> nodes_;
    std::size_t nonzero_ = 0;
};

/// Cumulative-array sampler: O(n) build, O(log n) binary-search draws.
class DirectSampler {
public:
    explicit DirectSampler(std::span<const double> weights);

    std::size_t size() const { return cumulative_.size(); }
    double total() const { return cumulative_.back(); }
    const std::vector<double>& cumulative() const { return cumulative_; }

    std::size_t sample(double u) const;
    std::size_t sample(Rng& rng) const { return sample(uniform01(rng)); }

    double probability(std::size_t i) const;

private:
    std::vector<double> cumulative_;
    std::size_t last_positive_ = 0;
};

enum class SamplerBackend { Direct, Tree };

SamplerBackend parse_backend(const std::string& name);
std::string to_string(SamplerBackend backend);

/// Either backend behind one value type.
class IndexSampler {
public:
    IndexSampler(std::span<const double> weights, SamplerBackend backend);

    std::size_t sample(Rng& rng) const;
    std::size_t sample(double u) const;
    double total() const;
    std::size_t size() const;
    double probability(std::size_t i) const;
    SamplerBackend backend() const;

private:
    std::variant<DirectSampler, LengthSquareTree> impl_;
};

struct BenchmarkRow {
    std::size_t dim = 0;
    std::string method;
    std::size_t n_samples = 0;
    double seconds = 0.0;
};

/// Times drawing n_samples indices from a length-square distribution of each
/// dimension. The direct method builds its cumulative array per call (as a
/// built-in weighted-choice routine does); the tree is prebuilt and only its
/// draws are timed. Each timing is
/// the minimum over `trials` runs with fresh random streams.
std::vector<BenchmarkRow> sampling_benchmark(std::span<const std::size_t> dims,
                                             std::size_t n_samples,
                                             std::uint64_t seed,
                                             std::size_t trials = 11,
                                             std::vector<std::size_t>* trace = nullptr);

std::string benchmark_csv(std::span<const BenchmarkRow> rows);

}  // namespace qi
