#include "qinspired/matrix_access.hpp"

#include <algorithm>
#include <cmath>

#include "qinspired/errors.hpp"

namespace qi {

std::vector<double> squared(std::span<const double> v) {
    std::vector<double> out(v.size());
    std::transform(v.begin(), v.end(), out.begin(), [](double x) { return x * x; });
    return out;
}

Eigen::MatrixXd SampleableMatrix::to_dense(std::size_t limit) const {
    require(rows() * cols() <= limit, ErrorCode::RefusedAtScale,
            "matrix too large to materialize densely");
    Eigen::MatrixXd out(rows(), cols());
    for (std::size_t i = 0; i < rows(); ++i)
        for (std::size_t j = 0; j < cols(); ++j) out(i, j) = entry(i, j);
    return out;
}

namespace {

std::vector<double> row_norms_of(const RowMajorMatrix& values) {
    require(values.size() > 0, ErrorCode::InvalidInput, "matrix is empty");
    require(values.allFinite(), ErrorCode::InvalidInput, "matrix has non-finite entries");
    std::vector<double> norms(values.rows());
    for (Eigen::Index i = 0; i < values.rows(); ++i) norms[i] = values.row(i).norm();
    return norms;
}

}  // namespace

DenseSampleableMatrix::DenseSampleableMatrix(RowMajorMatrix values, SamplerBackend backend)
    : values_(std::move(values)),
      backend_(backend),
      row_norms_(row_norms_of(values_)),
      row_sampler_(squared(row_norms_), backend) {
    double total = 0.0;
    for (double n : row_norms_) total += n * n;
    frobenius_norm_ = std::sqrt(total);

    col_samplers_.reserve(values_.rows());
    std::vector<double> weights(values_.cols());
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
        if (row_norms_[i] == 0.0) {
            col_samplers_.emplace_back(std::nullopt);
            continue;
        }
        for (Eigen::Index j = 0; j < values_.cols(); ++j) weights[j] = values_(i, j) * values_(i, j);
        col_samplers_.emplace_back(IndexSampler(weights, backend));
    }
}

std::size_t DenseSampleableMatrix::sample_col_in_row(std::size_t i, Rng& rng) const {
    require(i < rows() && col_samplers_[i].has_value(), ErrorCode::DegenerateDistribution,
            "cannot sample a column from an empty row");
    return col_samplers_[i]->sample(rng);
}

Eigen::MatrixXd DenseSampleableMatrix::to_dense(std::size_t limit) const {
    require(rows() * cols() <= limit, ErrorCode::RefusedAtScale,
            "matrix too large to materialize densely");
    return values_;
}

namespace {

std::vector<double> sparse_row_norms(std::vector<std::vector<SparseRatingsMatrix::Cell>>& cells,
                                     std::size_t n_cols) {
    std::vector<double> norms(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        auto& row = cells[i];
        std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.col < b.col; });
        double s = 0.0;
        for (std::size_t k = 0; k < row.size(); ++k) {
            require(row[k].col < n_cols, ErrorCode::InvalidInput, "column index out of range");
            require(k == 0 || row[k].col != row[k - 1].col, ErrorCode::InvalidInput,
                    "duplicate column within a row");
            require(std::isfinite(row[k].value), ErrorCode::InvalidInput, "non-finite entry");
            s += row[k].value * row[k].value;
        }
        norms[i] = std::sqrt(s);
    }
    return norms;
}

}  // namespace

SparseRatingsMatrix::SparseRatingsMatrix(std::size_t n_rows, std::size_t n_cols,
                                         std::vector<std::vector<Cell>> row_cells,
                                         SamplerBackend backend)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      cells_((require(row_cells.size() == n_rows && n_rows > 0 && n_cols > 0,
                      ErrorCode::InvalidInput, "sparse matrix shape mismatch"),
              std::move(row_cells))),
      row_norms_(sparse_row_norms(cells_, n_cols)),
      row_sampler_(squared(row_norms_), backend) {
    double total = 0.0;
    for (double n : row_norms_) total += n * n;
    frobenius_norm_ = std::sqrt(total);
    col_samplers_.reserve(n_rows_);
    for (const auto& row : cells_) {
        nnz_ += row.size();
        std::vector<double> weights(row.size());
        for (std::size_t k = 0; k < row.size(); ++k) weights[k] = row[k].value * row[k].value;
        const bool nonzero = std::any_of(weights.begin(), weights.end(), [](double w) { return w > 0; });
        if (nonzero)
            col_samplers_.emplace_back(IndexSampler(weights, backend));
        else
            col_samplers_.emplace_back(std::nullopt);
    }
}

double SparseRatingsMatrix::entry(std::size_t i, std::size_t j) const {
    const auto& row = cells_[i];
    const auto it = std::lower_bound(row.begin(), row.end(), j,
                                     [](const Cell& c, std::size_t col) { return c.col < col; });
    return (it != row.end() && it->col == j) ? it->value : 0.0;
}

std::size_t SparseRatingsMatrix::sample_col_in_row(std::size_t i, Rng& rng) const {
    require(i < n_rows_ && col_samplers_[i].has_value(), ErrorCode::DegenerateDistribution,
            "cannot sample a column from an empty row");
    return cells_[i][col_samplers_[i]->sample(rng)].col;
}

VectorSampler::VectorSampler(std::vector<double> values, SamplerBackend backend)
    : values_(std::move(values)), sampler_(squared(values_), backend) {
    for (double v : values_) norm_squared_ += v * v;
}

VectorSampler length_square_vector_sampler(std::span<const double> v, SamplerBackend backend) {
    return VectorSampler(std::vector<double>(v.begin(), v.end()), backend);
}

}  // namespace qi
