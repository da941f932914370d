#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "qinspired/matrix_access.hpp"
#include "qinspired/random.hpp"

namespace qi {

/// Relative cutoff below which approximate singular values are dropped.
inline constexpr double kSingularValueCutoff = 1e-8;

/// Result of the Frieze-Kannan-Vempala sketch-SVD.
///
/// The r x n matrix R (row s = row_scales[s] * A_{row_indices[s]}) is never
/// formed; it is queried through A. Every row of R has norm ||A||_F / sqrt(r).
/// C is r x c with column t = col_scales[t] * R_{., col_indices[t]}.
/// sigma holds the retained singular values of C (descending) and omega the
/// matching left singular vectors, each signed so its largest-magnitude
/// entry is positive.
struct FkvSketch {
    std::vector<std::size_t> row_indices;
    std::vector<double> row_scales;
    std::vector<std::size_t> col_indices;
    std::vector<double> col_scales;
    std::vector<bool> zero_columns;
    Eigen::MatrixXd C;
    Eigen::VectorXd sigma;
    Eigen::MatrixXd omega;
    std::size_t requested_rank = 0;
    double frobenius_norm = 0.0;

    std::size_t r() const { return row_indices.size(); }
    std::size_t c() const { return col_indices.size(); }
    std::size_t rank() const { return static_cast<std::size_t>(sigma.size()); }
    bool truncated() const { return rank() < requested_rank; }
    std::size_t zero_column_count() const;
};

struct RowSample {
    std::vector<std::size_t> indices;
    std::vector<double> scales;
};

struct ColumnScaling {
    std::vector<double> scales;
    std::vector<bool> zero_columns;
};

struct Decomposition {
    Eigen::VectorXd sigma;
    Eigen::MatrixXd omega;
};

RowSample fkv_sample_rows(const SampleableMatrix& a, std::size_t r, Rng& rng);

std::vector<std::size_t> fkv_sample_columns(const SampleableMatrix& a,
                                            const std::vector<std::size_t>& row_indices,
                                            std::size_t c, Rng& rng);

/// Norm of column j of the implicit R, from r entry queries.
double sketch_column_norm(const SampleableMatrix& a, const RowSample& rows, std::size_t j);

ColumnScaling fkv_column_scales(const SampleableMatrix& a, const RowSample& rows,
                                const std::vector<std::size_t>& col_indices);

/// Zero columns of R give zero columns of C and are flagged in the result.
Eigen::MatrixXd fkv_build_C(const SampleableMatrix& a, const RowSample& rows,
                            const std::vector<std::size_t>& col_indices,
                            ColumnScaling* scaling = nullptr);

/// Top-k singular values / left vectors of C, dropping values below
/// kSingularValueCutoff * sigma_1. May return fewer than k.
Decomposition fkv_decompose(const Eigen::MatrixXd& C, std::size_t k);

/// Full FKV run: sample rows, sample columns, build and decompose C.
FkvSketch run_fkv(const SampleableMatrix& a, std::size_t r, std::size_t c, std::size_t k,
                  Rng& rng);

/// Deterministic sketch that keeps every row and column once with unit
/// scale, so R = C = A and the sketch SVD is the exact SVD. Desk scale only.
FkvSketch exhaustive_sketch(const SampleableMatrix& a, std::size_t k);

/// ~v^(l)_j = (1/~sigma_l) sum_s row_scales[s] A[i_s][j] omega[s][l]; O(r).
/// `l` is zero-based.
double right_singular_entry(const FkvSketch& sketch, const SampleableMatrix& a, std::size_t l,
                            std::size_t j);

/// All retained ~v entries for column j at once; O(r k).
Eigen::VectorXd right_singular_column(const FkvSketch& sketch, const SampleableMatrix& a,
                                      std::size_t j);

/// ~u^(l)_i = (1/~sigma_l^2) sum_j A[i][j] (R^T omega^(l))_j; needs the whole
/// of ~v^(l), so this is a full row pass.
double left_singular_entry(const FkvSketch& sketch, const SampleableMatrix& a, std::size_t l,
                           std::size_t i);

/// n x k matrix of approximate right singular vectors.
Eigen::MatrixXd right_singular_vectors(const FkvSketch& sketch, const SampleableMatrix& a,
                                       std::size_t limit = kDeskScaleLimit);

/// m x k matrix of approximate left singular vectors, ~U = A ~V diag(1/~sigma).
Eigen::MatrixXd left_singular_vectors(const FkvSketch& sketch, const SampleableMatrix& a,
                                      const Eigen::MatrixXd& v_tilde,
                                      std::size_t limit = kDeskScaleLimit);

enum class ReconstructMode { Matrix, Pseudoinverse };

/// Dense ~A (m x n) or ~A^+ (n x m). Throws RefusedAtScale above `limit`.
Eigen::MatrixXd reconstruct(const FkvSketch& sketch, const SampleableMatrix& a,
                            ReconstructMode mode, std::size_t limit = kDeskScaleLimit);

void to_json(nlohmann::json& j, const FkvSketch& sketch);
void from_json(const nlohmann::json& j, FkvSketch& sketch);

}  // namespace qi
