#include "qinspired/sampling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "qinspired/errors.hpp"

namespace qi {

namespace {

void validate_weights(std::span<const double> weights) {
    require(!weights.empty(), ErrorCode::InvalidInput, "weight vector is empty");
    bool any_positive = false;
    for (double w : weights) {
        require(std::isfinite(w) && w >= 0.0, ErrorCode::InvalidInput,
                "weights must be finite and non-negative");
        any_positive = any_positive || w > 0.0;
    }
    require(any_positive, ErrorCode::DegenerateDistribution, "all weights are zero");
}

}  // namespace

LengthSquareTree::LengthSquareTree(std::span<const double> weights) : size_(weights.size()) {
    validate_weights(weights);
    while (capacity_ < size_) capacity_ <<= 1;
    nodes_.assign(2 * capacity_, 0.0);
    for (std::size_t i = 0; i < size_; ++i) {
        nodes_[capacity_ + i] = weights[i];
        nonzero_ += weights[i] > 0.0;
    }
    for (std::size_t p = capacity_ - 1; p >= 1; --p) nodes_[p] = nodes_[2 * p] + nodes_[2 * p + 1];
}

double LengthSquareTree::weight(std::size_t i) const {
    require(i < size_, ErrorCode::InvalidInput, "leaf index out of range");
    return static_cast<double>(nodes_[capacity_ + i]);
}

std::size_t LengthSquareTree::sample(double u) const {
    double target = u * nodes_[1];
    std::size_t p = 1;
    while (p < capacity_) {
        const double left = nodes_[2 * p];
        const double right = nodes_[2 * p + 1];
        // Rounding in the subtraction can point at an empty subtree; never
        // descend into one.
        if ((target >= left && right > 0.0) || left <= 0.0) {
            target -= left;
            p = 2 * p + 1;
        } else {
            p = 2 * p;
        }
    }
    return p - capacity_;
}

void LengthSquareTree::update(std::size_t i, double new_weight) {
    require(i < size_, ErrorCode::InvalidInput, "leaf index out of range");
    require(std::isfinite(new_weight) && new_weight >= 0.0, ErrorCode::InvalidInput,
            "weights must be finite and non-negative");
    std::size_t p = capacity_ + i;
    const bool was_positive = nodes_[p] > 0.0;
    const bool now_positive = new_weight > 0.0;
    require(now_positive || !was_positive || nonzero_ > 1, ErrorCode::DegenerateDistribution,
            "update would make every weight zero");
    nonzero_ = nonzero_ - was_positive + now_positive;
    nodes_[p] = new_weight;
    for (p >>= 1; p >= 1; p >>= 1) nodes_[p] = nodes_[2 * p] + nodes_[2 * p + 1];
}

double LengthSquareTree::probability(std::size_t i) const {
    return nodes_[capacity_ + i] / nodes_[1];
}

DirectSampler::DirectSampler(std::span<const double> weights) {
    validate_weights(weights);
    cumulative_.resize(weights.size());
    std::partial_sum(weights.begin(), weights.end(), cumulative_.begin());
    for (std::size_t i = weights.size(); i-- > 0;) {
        if (weights[i] > 0.0) {
            last_positive_ = i;
            break;
        }
    }
}

std::size_t DirectSampler::sample(double u) const {
    const double target = u * cumulative_.back();
    // First cumulative value strictly above the target: boundary ties go to
    // the higher index and zero-weight entries are skipped. Branchless
    // upper_bound.
    const double* base = cumulative_.data();
    std::size_t n = cumulative_.size();
    while (n > 1) {
        const std::size_t half = n / 2;
        base = base[half - 1] <= target ? base + half : base;
        n -= half;
    }
    const auto idx = static_cast<std::size_t>(base - cumulative_.data()) + (*base <= target);
    return std::min(idx, last_positive_);
}

double DirectSampler::probability(std::size_t i) const {
    const double lo = i == 0 ? 0.0 : cumulative_[i - 1];
    return (cumulative_[i] - lo) / cumulative_.back();
}

SamplerBackend parse_backend(const std::string& name) {
    if (name == "direct") return SamplerBackend::Direct;
    if (name == "tree") return SamplerBackend::Tree;
    throw Error(ErrorCode::InvalidInput, "unknown sampler backend '" + name + "'");
}

std::string to_string(SamplerBackend backend) {
    return backend == SamplerBackend::Direct ? "direct" : "tree";
}

namespace {

std::variant<DirectSampler, LengthSquareTree> make_impl(std::span<const double> weights,
                                                        SamplerBackend backend) {
    if (backend == SamplerBackend::Tree) return LengthSquareTree(weights);
    return DirectSampler(weights);
}

}  // namespace

IndexSampler::IndexSampler(std::span<const double> weights, SamplerBackend backend)
    : impl_(make_impl(weights, backend)) {}

std::size_t IndexSampler::sample(Rng& rng) const { return sample(uniform01(rng)); }

std::size_t IndexSampler::sample(double u) const {
    return std::visit([u](const auto& s) { return s.sample(u); }, impl_);
}

double IndexSampler::total() const {
    return std::visit([](const auto& s) { return static_cast<double>(s.total()); }, impl_);
}

std::size_t IndexSampler::size() const {
    return std::visit([](const auto& s) { return s.size(); }, impl_);
}

double IndexSampler::probability(std::size_t i) const {
    return std::visit([i](const auto& s) { return s.probability(i); }, impl_);
}

SamplerBackend IndexSampler::backend() const {
    return std::holds_alternative<DirectSampler>(impl_) ? SamplerBackend::Direct
                                                        : SamplerBackend::Tree;
}

std::vector<BenchmarkRow> sampling_benchmark(std::span<const std::size_t> dims,
                                             std::size_t n_samples, std::uint64_t seed,
                                             std::size_t trials,
                                             std::vector<std::size_t>* trace) {
    using clock = std::chrono::steady_clock;
    std::vector<BenchmarkRow> rows;
    volatile std::size_t sink = 0;
    for (std::size_t d = 0; d < dims.size(); ++d) {
        const std::size_t dim = dims[d];
        require(dim > 0, ErrorCode::InvalidInput, "benchmark dimensions must be positive");
        Rng weight_rng = make_rng(seed, d);
        std::normal_distribution<double> normal;
        std::vector<double> weights(dim);
        for (auto& w : weights) {
            const double x = normal(weight_rng);
            w = x * x;
        }
        if (dim == 1) weights[0] = 1.0;
        const LengthSquareTree tree(weights);

        double best_direct = INFINITY;
        double best_tree = INFINITY;
        for (std::size_t t = 0; t < std::max<std::size_t>(trials, 1); ++t) {
            Rng rng = make_rng(seed, 1000003 + 7919 * d + t);
            auto t0 = clock::now();
            {
                const DirectSampler direct(weights);
                for (std::size_t s = 0; s < n_samples; ++s) {
                    const std::size_t idx = direct.sample(rng);
                    sink = sink + idx;
                    if (trace && t == 0) trace->push_back(idx);
                }
            }
            auto t1 = clock::now();
            best_direct = std::min(best_direct, std::chrono::duration<double>(t1 - t0).count());

            rng = make_rng(seed, 2000003 + 7919 * d + t);
            t0 = clock::now();
            for (std::size_t s = 0; s < n_samples; ++s) {
                const std::size_t idx = tree.sample(rng);
                sink = sink + idx;
                if (trace && t == 0) trace->push_back(idx);
            }
            t1 = clock::now();
            best_tree = std::min(best_tree, std::chrono::duration<double>(t1 - t0).count());
        }
        rows.push_back({dim, "direct", n_samples, best_direct});
        rows.push_back({dim, "tree", n_samples, best_tree});
    }
    return rows;
}

std::string benchmark_csv(std::span<const BenchmarkRow> rows) {
    std::ostringstream out;
    out.precision(9);
    out << "dim,method,n_samples,seconds\n";
    for (const auto& row : rows)
        out << row.dim << ',' << row.method << ',' << row.n_samples << ',' << row.seconds << '\n';
    return out.str();
}

}  // namespace qi
