#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qinspired/random.hpp"
#include "qinspired/sampling.hpp"

namespace qi {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Default element budget for materializing a matrix densely.
inline constexpr std::size_t kDeskScaleLimit = 64'000'000;

/// Query-and-sample access to a real matrix: the only access model the
/// sketching, estimation and solution-sampling routines rely on.
///
/// sample_row draws i with probability row_norm(i)^2 / frobenius_norm^2 and
/// sample_col_in_row draws j with probability entry(i,j)^2 / row_norm(i)^2.
/// Implementations are read-only after construction; concurrent sampling is
/// safe as long as each caller owns its Rng.
class SampleableMatrix {
public:
    virtual ~SampleableMatrix() = default;

    virtual std::size_t rows() const = 0;
    virtual std::size_t cols() const = 0;
    virtual double entry(std::size_t i, std::size_t j) const = 0;
    virtual double frobenius_norm() const = 0;
    virtual double row_norm(std::size_t i) const = 0;
    virtual std::size_t sample_row(Rng& rng) const = 0;
    virtual std::size_t sample_col_in_row(std::size_t i, Rng& rng) const = 0;

    /// Dense copy; throws RefusedAtScale when rows*cols exceeds `limit`.
    virtual Eigen::MatrixXd to_dense(std::size_t limit = kDeskScaleLimit) const;
};

class DenseSampleableMatrix final : public SampleableMatrix {
public:
    explicit DenseSampleableMatrix(RowMajorMatrix values,
                                   SamplerBackend backend = SamplerBackend::Direct);

    std::size_t rows() const override { return static_cast<std::size_t>(values_.rows()); }
    std::size_t cols() const override { return static_cast<std::size_t>(values_.cols()); }
    double entry(std::size_t i, std::size_t j) const override { return values_(i, j); }
    double frobenius_norm() const override { return frobenius_norm_; }
    double row_norm(std::size_t i) const override { return row_norms_[i]; }
    std::size_t sample_row(Rng& rng) const override { return row_sampler_.sample(rng); }
    std::size_t sample_col_in_row(std::size_t i, Rng& rng) const override;
    Eigen::MatrixXd to_dense(std::size_t limit = kDeskScaleLimit) const override;

    const RowMajorMatrix& values() const { return values_; }
    SamplerBackend backend() const { return backend_; }
    double row_probability(std::size_t i) const { return row_sampler_.probability(i); }

private:
    RowMajorMatrix values_;
    SamplerBackend backend_;
    std::vector<double> row_norms_;
    double frobenius_norm_ = 0.0;
    IndexSampler row_sampler_;
    // Zero rows have no sampler; they are never drawn.
    std::vector<std::optional<IndexSampler>> col_samplers_;
};

/// Users x items ratings with implicit zeros. Columns within a row are
/// kept sorted so entry() is a binary search.
class SparseRatingsMatrix final : public SampleableMatrix {
public:
    struct Cell {
        std::size_t col;
        double value;
    };

    SparseRatingsMatrix(std::size_t n_rows, std::size_t n_cols,
                        std::vector<std::vector<Cell>> row_cells,
                        SamplerBackend backend = SamplerBackend::Direct);

    std::size_t rows() const override { return n_rows_; }
    std::size_t cols() const override { return n_cols_; }
    double entry(std::size_t i, std::size_t j) const override;
    double frobenius_norm() const override { return frobenius_norm_; }
    double row_norm(std::size_t i) const override { return row_norms_[i]; }
    std::size_t sample_row(Rng& rng) const override { return row_sampler_.sample(rng); }
    std::size_t sample_col_in_row(std::size_t i, Rng& rng) const override;

    const std::vector<Cell>& row(std::size_t i) const { return cells_[i]; }
    std::size_t nonzeros() const { return nnz_; }

private:
    std::size_t n_rows_;
    std::size_t n_cols_;
    std::vector<std::vector<Cell>> cells_;
    std::vector<double> row_norms_;
    double frobenius_norm_ = 0.0;
    std::size_t nnz_ = 0;
    IndexSampler row_sampler_;
    std::vector<std::optional<IndexSampler>> col_samplers_;
};

/// Length-square sampler over the entries of a vector, keeping the vector so
/// samples can be paired with their values.
class VectorSampler {
public:
    explicit VectorSampler(std::vector<double> values,
                           SamplerBackend backend = SamplerBackend::Direct);

    std::size_t sample(Rng& rng) const { return sampler_.sample(rng); }
    double value(std::size_t i) const { return values_[i]; }
    double norm_squared() const { return norm_squared_; }
    double probability(std::size_t i) const { return values_[i] * values_[i] / norm_squared_; }
    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }

private:
    std::vector<double> values_;
    double norm_squared_ = 0.0;
    IndexSampler sampler_;
};

VectorSampler length_square_vector_sampler(std::span<const double> v,
                                           SamplerBackend backend = SamplerBackend::Direct);

std::vector<double> squared(std::span<const double> v);

}  // namespace qi
