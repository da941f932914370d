#include "qinspired/fkv.hpp"

#include <algorithm>
#include <cmath>

#include "qinspired/errors.hpp"

namespace qi {

std::size_t FkvSketch::zero_column_count() const {
    return static_cast<std::size_t>(std::count(zero_columns.begin(), zero_columns.end(), true));
}

RowSample fkv_sample_rows(const SampleableMatrix& a, std::size_t r, Rng& rng) {
    require(r >= 1, ErrorCode::InvalidInput, "r must be at least 1");
    const double fro = a.frobenius_norm();
    require(fro > 0.0, ErrorCode::DegenerateDistribution, "matrix is zero");
    RowSample out;
    out.indices.reserve(r);
    out.scales.reserve(r);
    const double sqrt_r = std::sqrt(static_cast<double>(r));
    for (std::size_t s = 0; s < r; ++s) {
        const std::size_t i = a.sample_row(rng);
        out.indices.push_back(i);
        out.scales.push_back(fro / (sqrt_r * a.row_norm(i)));
    }
    return out;
}

std::vector<std::size_t> fkv_sample_columns(const SampleableMatrix& a,
                                            const std::vector<std::size_t>& row_indices,
                                            std::size_t c, Rng& rng) {
    require(!row_indices.empty(), ErrorCode::InvalidInput, "no sampled rows");
    require(c >= 1, ErrorCode::InvalidInput, "c must be at least 1");
    std::vector<std::size_t> cols;
    cols.reserve(c);
    for (std::size_t t = 0; t < c; ++t) {
        const std::size_t s = uniform_index(rng, row_indices.size());
        cols.push_back(a.sample_col_in_row(row_indices[s], rng));
    }
    return cols;
}

double sketch_column_norm(const SampleableMatrix& a, const RowSample& rows, std::size_t j) {
    double sum = 0.0;
    for (std::size_t s = 0; s < rows.indices.size(); ++s) {
        const double v = rows.scales[s] * a.entry(rows.indices[s], j);
        sum += v * v;
    }
    return std::sqrt(sum);
}

ColumnScaling fkv_column_scales(const SampleableMatrix& a, const RowSample& rows,
                                const std::vector<std::size_t>& col_indices) {
    const double fro = a.frobenius_norm();
    const double sqrt_c = std::sqrt(static_cast<double>(col_indices.size()));
    ColumnScaling out;
    out.scales.resize(col_indices.size());
    out.zero_columns.resize(col_indices.size());
    for (std::size_t t = 0; t < col_indices.size(); ++t) {
        const double norm = sketch_column_norm(a, rows, col_indices[t]);
        out.zero_columns[t] = norm == 0.0;
        out.scales[t] = norm == 0.0 ? 0.0 : fro / (sqrt_c * norm);
    }
    return out;
}

Eigen::MatrixXd fkv_build_C(const SampleableMatrix& a, const RowSample& rows,
                            const std::vector<std::size_t>& col_indices, ColumnScaling* scaling) {
    require(!rows.indices.empty() && rows.indices.size() == rows.scales.size(),
            ErrorCode::InvalidInput, "invalid row sample");
    require(!col_indices.empty(), ErrorCode::InvalidInput, "no sampled columns");
    ColumnScaling local = fkv_column_scales(a, rows, col_indices);
    const std::size_t r = rows.indices.size();
    const std::size_t c = col_indices.size();
    Eigen::MatrixXd C(r, c);
    for (std::size_t s = 0; s < r; ++s) {
        const std::size_t i = rows.indices[s];
        const double row_scale = rows.scales[s];
        for (std::size_t t = 0; t < c; ++t)
            C(s, t) = local.scales[t] * row_scale * a.entry(i, col_indices[t]);
    }
    if (scaling) *scaling = std::move(local);
    return C;
}

Decomposition fkv_decompose(const Eigen::MatrixXd& C, std::size_t k) {
    require(k >= 1, ErrorCode::InvalidInput, "k must be at least 1");
    require(k <= static_cast<std::size_t>(std::min(C.rows(), C.cols())), ErrorCode::InvalidInput,
            "k exceeds min(r, c)");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeThinU);
    const Eigen::VectorXd& values = svd.singularValues();
    require(values.size() > 0 && values(0) > 0.0, ErrorCode::DegenerateDistribution,
            "sketch matrix C is zero");
    const double cutoff = kSingularValueCutoff * values(0);
    std::size_t kept = 0;
    while (kept < k && values(kept) >= cutoff) ++kept;

    Decomposition out;
    out.sigma = values.head(kept);
    out.omega = svd.matrixU().leftCols(kept);
    for (std::size_t l = 0; l < kept; ++l) {
        Eigen::Index arg = 0;
        out.omega.col(l).cwiseAbs().maxCoeff(&arg);
        if (out.omega(arg, l) < 0.0) out.omega.col(l) *= -1.0;
    }
    return out;
}

FkvSketch run_fkv(const SampleableMatrix& a, std::size_t r, std::size_t c, std::size_t k,
                  Rng& rng) {
    RowSample rows = fkv_sample_rows(a, r, rng);
    FkvSketch sketch;
    sketch.col_indices = fkv_sample_columns(a, rows.indices, c, rng);
    ColumnScaling scaling;
    sketch.C = fkv_build_C(a, rows, sketch.col_indices, &scaling);
    auto [sigma, omega] = fkv_decompose(sketch.C, std::min({k, r, c}));
    sketch.row_indices = std::move(rows.indices);
    sketch.row_scales = std::move(rows.scales);
    sketch.col_scales = std::move(scaling.scales);
    sketch.zero_columns = std::move(scaling.zero_columns);
    sketch.sigma = std::move(sigma);
    sketch.omega = std::move(omega);
    sketch.requested_rank = k;
    sketch.frobenius_norm = a.frobenius_norm();
    return sketch;
}

FkvSketch exhaustive_sketch(const SampleableMatrix& a, std::size_t k) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    FkvSketch sketch;
    sketch.row_indices.resize(m);
    sketch.row_scales.assign(m, 1.0);
    sketch.col_indices.resize(n);
    sketch.col_scales.assign(n, 1.0);
    sketch.zero_columns.assign(n, false);
    for (std::size_t i = 0; i < m; ++i) sketch.row_indices[i] = i;
    for (std::size_t j = 0; j < n; ++j) sketch.col_indices[j] = j;
    sketch.C = a.to_dense();
    for (std::size_t j = 0; j < n; ++j) sketch.zero_columns[j] = sketch.C.col(j).squaredNorm() == 0.0;
    auto [sigma, omega] = fkv_decompose(sketch.C, std::min({k, m, n}));
    sketch.sigma = std::move(sigma);
    sketch.omega = std::move(omega);
    sketch.requested_rank = k;
    sketch.frobenius_norm = a.frobenius_norm();
    return sketch;
}

double right_singular_entry(const FkvSketch& sketch, const SampleableMatrix& a, std::size_t l,
                            std::size_t j) {
    require(l < sketch.rank(), ErrorCode::InvalidInput, "singular index out of range");
    double sum = 0.0;
    for (std::size_t s = 0; s < sketch.r(); ++s)
        sum += sketch.row_scales[s] * a.entry(sketch.row_indices[s], j) * sketch.omega(s, l);
    return sum / sketch.sigma(l);
}

Eigen::VectorXd right_singular_column(const FkvSketch& sketch, const SampleableMatrix& a,
                                      std::size_t j) {
    Eigen::VectorXd column(sketch.r());
    for (std::size_t s = 0; s < sketch.r(); ++s)
        column(s) = sketch.row_scales[s] * a.entry(sketch.row_indices[s], j);
    return (sketch.omega.transpose() * column).cwiseQuotient(sketch.sigma);
}

Eigen::MatrixXd right_singular_vectors(const FkvSketch& sketch, const SampleableMatrix& a,
                                       std::size_t limit) {
    require(a.cols() * sketch.rank() <= limit, ErrorCode::RefusedAtScale,
            "too many columns to form ~v densely");
    // ~V = R^T omega diag(1/sigma); R is assembled one sampled row at a time.
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(a.cols(), sketch.rank());
    Eigen::VectorXd row(a.cols());
    for (std::size_t s = 0; s < sketch.r(); ++s) {
        const std::size_t i = sketch.row_indices[s];
        for (std::size_t j = 0; j < a.cols(); ++j) row(j) = a.entry(i, j);
        v.noalias() += (sketch.row_scales[s] * row) * sketch.omega.row(s);
    }
    for (std::size_t l = 0; l < sketch.rank(); ++l) v.col(l) /= sketch.sigma(l);
    return v;
}

Eigen::MatrixXd left_singular_vectors(const FkvSketch& sketch, const SampleableMatrix& a,
                                      const Eigen::MatrixXd& v_tilde, std::size_t limit) {
    require(a.rows() * a.cols() <= limit, ErrorCode::RefusedAtScale,
            "matrix too large for a full ~u pass");
    Eigen::MatrixXd u(a.rows(), sketch.rank());
    if (const auto* dense = dynamic_cast<const DenseSampleableMatrix*>(&a)) {
        u.noalias() = dense->values() * v_tilde;
    } else {
        u.setZero();
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j) {
                const double x = a.entry(i, j);
                if (x != 0.0) u.row(i) += x * v_tilde.row(j);
            }
    }
    for (std::size_t l = 0; l < sketch.rank(); ++l) u.col(l) /= sketch.sigma(l);
    return u;
}

double left_singular_entry(const FkvSketch& sketch, const SampleableMatrix& a, std::size_t l,
                           std::size_t i) {
    require(l < sketch.rank(), ErrorCode::InvalidInput, "singular index out of range");
    double sum = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        const double x = a.entry(i, j);
        if (x != 0.0) sum += x * right_singular_entry(sketch, a, l, j);
    }
    return sum / sketch.sigma(l);
}

Eigen::MatrixXd reconstruct(const FkvSketch& sketch, const SampleableMatrix& a,
                            ReconstructMode mode, std::size_t limit) {
    require(a.rows() * a.cols() <= limit, ErrorCode::RefusedAtScale,
            "reconstruction refused at this scale");
    const Eigen::MatrixXd v = right_singular_vectors(sketch, a, limit);
    const Eigen::MatrixXd u = left_singular_vectors(sketch, a, v, limit);
    if (mode == ReconstructMode::Matrix) return u * sketch.sigma.asDiagonal() * v.transpose();
    return v * sketch.sigma.cwiseInverse().asDiagonal() * u.transpose();
}

void to_json(nlohmann::json& j, const FkvSketch& sketch) {
    std::vector<double> sigma(sketch.sigma.data(), sketch.sigma.data() + sketch.sigma.size());
    std::vector<std::vector<double>> c_rows(sketch.C.rows());
    for (Eigen::Index s = 0; s < sketch.C.rows(); ++s)
        c_rows[s].assign(sketch.C.row(s).begin(), sketch.C.row(s).end());
    std::vector<std::vector<double>> omega_cols(sketch.omega.cols());
    for (Eigen::Index l = 0; l < sketch.omega.cols(); ++l)
        omega_cols[l].assign(sketch.omega.col(l).begin(), sketch.omega.col(l).end());
    j = nlohmann::json{{"row_indices", sketch.row_indices},
                       {"row_scales", sketch.row_scales},
                       {"col_indices", sketch.col_indices},
                       {"col_scales", sketch.col_scales},
                       {"zero_columns", sketch.zero_columns},
                       {"C", c_rows},
                       {"sigma", sigma},
                       {"omega", omega_cols},
                       {"requested_rank", sketch.requested_rank},
                       {"frobenius_norm", sketch.frobenius_norm}};
}

void from_json(const nlohmann::json& j, FkvSketch& sketch) {
    j.at("row_indices").get_to(sketch.row_indices);
    j.at("row_scales").get_to(sketch.row_scales);
    j.at("col_indices").get_to(sketch.col_indices);
    j.at("col_scales").get_to(sketch.col_scales);
    sketch.zero_columns = j.at("zero_columns").get<std::vector<bool>>();
    const auto c_rows = j.at("C").get<std::vector<std::vector<double>>>();
    sketch.C.resize(static_cast<Eigen::Index>(c_rows.size()),
                    c_rows.empty() ? 0 : static_cast<Eigen::Index>(c_rows[0].size()));
    for (std::size_t s = 0; s < c_rows.size(); ++s)
        for (std::size_t t = 0; t < c_rows[s].size(); ++t) sketch.C(s, t) = c_rows[s][t];
    const auto sigma = j.at("sigma").get<std::vector<double>>();
    sketch.sigma = Eigen::Map<const Eigen::VectorXd>(sigma.data(), sigma.size());
    const auto omega_cols = j.at("omega").get<std::vector<std::vector<double>>>();
    sketch.omega.resize(static_cast<Eigen::Index>(sketch.row_indices.size()),
                        static_cast<Eigen::Index>(omega_cols.size()));
    for (std::size_t l = 0; l < omega_cols.size(); ++l)
        for (std::size_t s = 0; s < omega_cols[l].size(); ++s) sketch.omega(s, l) = omega_cols[l][s];
    j.at("requested_rank").get_to(sketch.requested_rank);
    j.at("frobenius_norm").get_to(sketch.frobenius_norm);
}

}  // namespace qi
