#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qinspired/matrix_access.hpp"
#include "qinspired/random.hpp"

namespace qi {

/// A rejected input line and the reason.
struct IngestIssue {
    std::size_t line = 0;
    std::string message;
};

/// Daily simple returns, one row per asset and one column per day.
struct ReturnsPanel {
    std::vector<std::string> asset_ids;
    std::vector<std::string> dates;  // price dates; returns cover dates[t] -> dates[t+1]
    Eigen::MatrixXd returns;
    std::vector<IngestIssue> issues;
    std::size_t dropped_assets = 0;

    std::size_t n_assets() const { return asset_ids.size(); }
    std::size_t n_days() const { return static_cast<std::size_t>(returns.cols()); }
};

/// Reads `date,ticker,open` rows. The ticker column may also be called
/// `Name` or `symbol`; extra columns are ignored. Only tickers with a valid
/// open price on every date in the file are kept. Return for day t is
/// (p_{t+1} - p_t) / p_t.
ReturnsPanel load_prices(std::istream& in);
ReturnsPanel load_prices(const std::filesystem::path& path);

/// Panel from a price matrix (assets x dates) already aligned.
ReturnsPanel returns_from_prices(std::vector<std::string> asset_ids, const Eigen::MatrixXd& prices);

/// Synthetic prices: one market factor plus idiosyncratic noise, daily
/// drift around 5e-4 and volatility around 1%. Stand-in when no price file
/// is available.
ReturnsPanel synthetic_returns_panel(std::size_t n_assets, std::size_t n_days, Rng& rng);

/// A = [[0, r^T], [r, Sigma]] and b = (mu, 0, ..., 0), where r is the mean
/// daily return per asset and Sigma = (1/n) sum_j r_j r_j^T.
struct MarkowitzSystem {
    RowMajorMatrix A;
    std::vector<double> b;
    double mu = 0.0;
    Eigen::VectorXd mean_returns;
};

/// mu defaults to the mean of the per-asset mean returns.
MarkowitzSystem build_markowitz(const ReturnsPanel& panel, std::optional<double> mu = std::nullopt);

/// Exact A^+ b from a dense SVD (no truncation).
Eigen::VectorXd markowitz_exact_solution(const MarkowitzSystem& system);

/// Users x movies ratings with dense re-indexing: row i is user_ids[i],
/// column j is movie_ids[j], both ascending.
struct PreferenceMatrix {
    SparseRatingsMatrix matrix;
    std::vector<std::int64_t> user_ids;
    std::vector<std::int64_t> movie_ids;
    std::vector<IngestIssue> issues;
    std::size_t duplicates = 0;
};

/// Reads MovieLens `userId,movieId,rating,timestamp`. Ratings outside
/// [0.5, 5] are rejected and reported; repeated (user, movie) pairs keep the
/// last rating and are counted.
PreferenceMatrix load_movielens(std::istream& in, SamplerBackend backend = SamplerBackend::Direct);
PreferenceMatrix load_movielens(const std::filesystem::path& path,
                                SamplerBackend backend = SamplerBackend::Direct);

struct RankedItem {
    std::size_t column = 0;
    std::int64_t movie_id = 0;
    double score = 0.0;
};

/// Unrated columns of `user` ordered by descending score.
std::vector<RankedItem> rank_unrated(const PreferenceMatrix& prefs, std::size_t user,
                                     const Eigen::VectorXd& predicted_row, std::size_t top_n);

/// Exact rank-k projection A_i V_k V_k^T of one user's row.
Eigen::VectorXd exact_recommendation_row(const PreferenceMatrix& prefs, std::size_t user,
                                         std::size_t k);

/// 64-bit FNV-1a of a file's bytes, hex encoded.
std::string file_hash(const std::filesystem::path& path);

}  // namespace qi
