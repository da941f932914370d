#include "qinspired/apps.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "qinspired/errors.hpp"
#include "qinspired/solution.hpp"

namespace qi {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

std::optional<double> parse_double(std::string_view s) {
    if (s.empty()) return std::nullopt;
    // from_chars for double is available in libstdc++ 11.
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCode::IoError, "cannot open " + path.string());
    return in;
}

std::ptrdiff_t column_of(const std::vector<std::string_view>& header,
                         std::initializer_list<const char*> names) {
    for (std::size_t i = 0; i < header.size(); ++i)
        for (const char* name : names)
            if (lower(header[i]) == name) return static_cast<std::ptrdiff_t>(i);
    return -1;
}

}  // namespace

ReturnsPanel load_prices(std::istream& in) {
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::InvalidInput, "price file is empty");
    const auto header = split_csv(line);
    const auto date_col = column_of(header, {"date"});
    const auto ticker_col = column_of(header, {"ticker", "name", "symbol"});
    const auto open_col = column_of(header, {"open"});
    require(date_col >= 0 && ticker_col >= 0 && open_col >= 0, ErrorCode::InvalidInput,
            "price header must contain date, ticker and open columns");
    const auto needed = static_cast<std::size_t>(std::max({date_col, ticker_col, open_col}));

    std::vector<IngestIssue> issues;
    std::set<std::string> all_dates;
    std::map<std::string, std::map<std::string, double>> series;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() <= needed) {
            issues.push_back({line_no, "too few fields"});
            continue;
        }
        const std::string date(fields[date_col]);
        const std::string ticker(fields[ticker_col]);
        if (date.empty() || ticker.empty()) {
            issues.push_back({line_no, "missing date or ticker"});
            continue;
        }
        all_dates.insert(date);
        const auto open = parse_double(fields[open_col]);
        if (!open || !(*open > 0.0)) {
            issues.push_back({line_no, "invalid open price '" + std::string(fields[open_col]) + "'"});
            continue;
        }
        series[ticker][date] = *open;
    }

    std::vector<std::string> dates(all_dates.begin(), all_dates.end());
    std::vector<std::string> kept;
    std::size_t dropped = 0;
    for (const auto& [ticker, prices] : series) {
        if (prices.size() == dates.size()) kept.push_back(ticker);
        else ++dropped;
    }
    require(!kept.empty() && dates.size() >= 2, ErrorCode::InvalidInput,
            "no ticker covers the full date range with at least two dates");
    Eigen::MatrixXd prices(kept.size(), dates.size());
    for (std::size_t a = 0; a < kept.size(); ++a) {
        const auto& s = series.at(kept[a]);
        std::size_t t = 0;
        for (const auto& [date, p] : s) prices(a, t++) = p;
    }
    ReturnsPanel panel = returns_from_prices(std::move(kept), prices);
    panel.dates = std::move(dates);
    panel.issues = std::move(issues);
    panel.dropped_assets = dropped;
    return panel;
}

ReturnsPanel load_prices(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return load_prices(in);
}

ReturnsPanel returns_from_prices(std::vector<std::string> asset_ids, const Eigen::MatrixXd& prices) {
    require(!asset_ids.empty() && static_cast<std::size_t>(prices.rows()) == asset_ids.size(),
            ErrorCode::InvalidInput, "one price row per asset is required");
    require(prices.cols() >= 2, ErrorCode::InvalidInput, "need at least two dates");
    require((prices.array() > 0.0).all(), ErrorCode::InvalidInput, "prices must be positive");
    ReturnsPanel panel;
    panel.asset_ids = std::move(asset_ids);
    const Eigen::Index n = prices.cols() - 1;
    panel.returns = (prices.rightCols(n) - prices.leftCols(n)).cwiseQuotient(prices.leftCols(n));
    return panel;
}

ReturnsPanel synthetic_returns_panel(std::size_t n_assets, std::size_t n_days, Rng& rng) {
    require(n_assets >= 1 && n_days >= 2, ErrorCode::InvalidInput, "need an asset and two days");
    std::normal_distribution<double> normal;
    Eigen::VectorXd drift(n_assets), beta(n_assets), vol(n_assets);
    for (std::size_t a = 0; a < n_assets; ++a) {
        drift(a) = 5e-4 + 3e-4 * normal(rng);
        beta(a) = 0.5 + uniform01(rng);
        vol(a) = 0.005 + 0.01 * uniform01(rng);
    }
    Eigen::MatrixXd prices(n_assets, n_days);
    std::vector<std::string> ids;
    for (std::size_t a = 0; a < n_assets; ++a) {
        prices(a, 0) = 10.0 + 90.0 * uniform01(rng);
        ids.push_back("S" + std::to_string(a));
    }
    for (std::size_t t = 1; t < n_days; ++t) {
        const double market = 0.01 * normal(rng);
        for (std::size_t a = 0; a < n_assets; ++a) {
            const double ret = drift(a) + beta(a) * market + vol(a) * normal(rng);
            prices(a, t) = prices(a, t - 1) * std::max(1.0 + ret, 0.5);
        }
    }
    return returns_from_prices(std::move(ids), prices);
}

MarkowitzSystem build_markowitz(const ReturnsPanel& panel, std::optional<double> mu) {
    require(panel.n_assets() > 0 && panel.n_days() > 0, ErrorCode::InvalidInput, "empty panel");
    const auto n_assets = static_cast<Eigen::Index>(panel.n_assets());
    const double n_days = static_cast<double>(panel.n_days());
    MarkowitzSystem sys;
    sys.mean_returns = panel.returns.rowwise().sum() / n_days;
    const Eigen::MatrixXd sigma = panel.returns * panel.returns.transpose() / n_days;
    sys.A = RowMajorMatrix::Zero(n_assets + 1, n_assets + 1);
    sys.A.block(0, 1, 1, n_assets) = sys.mean_returns.transpose();
    sys.A.block(1, 0, n_assets, 1) = sys.mean_returns;
    sys.A.block(1, 1, n_assets, n_assets) = sigma;
    sys.mu = mu.value_or(sys.mean_returns.mean());
    sys.b.assign(static_cast<std::size_t>(n_assets) + 1, 0.0);
    sys.b[0] = sys.mu;
    return sys;
}

Eigen::VectorXd markowitz_exact_solution(const MarkowitzSystem& system) {
    const Eigen::MatrixXd a = system.A;
    const ExactDecomposition svd = exact_svd(a, static_cast<std::size_t>(a.cols()));
    const Eigen::VectorXd lambda = exact_lambdas(svd, a, LinearTarget{system.b});
    return svd.v * lambda;
}

PreferenceMatrix load_movielens(std::istream& in, SamplerBackend backend) {
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::InvalidInput, "ratings file is empty");
    const auto header = split_csv(line);
    const auto user_col = column_of(header, {"userid"});
    const auto movie_col = column_of(header, {"movieid"});
    const auto rating_col = column_of(header, {"rating"});
    require(user_col >= 0 && movie_col >= 0 && rating_col >= 0, ErrorCode::InvalidInput,
            "ratings header must contain userId, movieId and rating");
    const auto needed = static_cast<std::size_t>(std::max({user_col, movie_col, rating_col}));

    std::vector<IngestIssue> issues;
    std::map<std::pair<std::int64_t, std::int64_t>, double> ratings;
    std::size_t duplicates = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() <= needed) {
            issues.push_back({line_no, "too few fields"});
            continue;
        }
        const auto user = parse_int(fields[user_col]);
        const auto movie = parse_int(fields[movie_col]);
        const auto rating = parse_double(fields[rating_col]);
        if (!user || !movie || !rating) {
            issues.push_back({line_no, "unparsable field"});
            continue;
        }
        if (!(*rating >= 0.5 && *rating <= 5.0)) {
            issues.push_back({line_no, "rating out of range"});
            continue;
        }
        auto [it, inserted] = ratings.insert_or_assign({*user, *movie}, *rating);
        if (!inserted) ++duplicates;
    }
    require(!ratings.empty(), ErrorCode::InvalidInput, "no valid ratings");

    std::set<std::int64_t> users, movies;
    for (const auto& [key, value] : ratings) {
        users.insert(key.first);
        movies.insert(key.second);
    }
    std::vector<std::int64_t> user_ids(users.begin(), users.end());
    std::vector<std::int64_t> movie_ids(movies.begin(), movies.end());
    std::unordered_map<std::int64_t, std::size_t> movie_index;
    for (std::size_t j = 0; j < movie_ids.size(); ++j) movie_index[movie_ids[j]] = j;

    std::vector<std::vector<SparseRatingsMatrix::Cell>> rows(user_ids.size());
    std::size_t row = 0;
    std::int64_t current = ratings.begin()->first.first;
    for (const auto& [key, value] : ratings) {
        if (key.first != current) {
            current = key.first;
            ++row;
        }
        rows[row].push_back({movie_index.at(key.second), value});
    }
    return PreferenceMatrix{
        SparseRatingsMatrix(user_ids.size(), movie_ids.size(), std::move(rows), backend),
        std::move(user_ids), std::move(movie_ids), std::move(issues), duplicates};
}

PreferenceMatrix load_movielens(const std::filesystem::path& path, SamplerBackend backend) {
    auto in = open_or_throw(path);
    return load_movielens(in, backend);
}

std::vector<RankedItem> rank_unrated(const PreferenceMatrix& prefs, std::size_t user,
                                     const Eigen::VectorXd& predicted_row, std::size_t top_n) {
    require(user < prefs.matrix.rows(), ErrorCode::InvalidInput, "user index out of range");
    require(static_cast<std::size_t>(predicted_row.size()) == prefs.matrix.cols(),
            ErrorCode::InvalidInput, "predicted row has the wrong length");
    std::vector<bool> rated(prefs.matrix.cols(), false);
    for (const auto& cell : prefs.matrix.row(user)) rated[cell.col] = true;
    std::vector<RankedItem> items;
    for (std::size_t j = 0; j < rated.size(); ++j)
        if (!rated[j]) items.push_back({j, prefs.movie_ids[j], predicted_row(static_cast<Eigen::Index>(j))});
    const std::size_t n = std::min(top_n, items.size());
    std::partial_sort(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(n), items.end(),
                      [](const RankedItem& a, const RankedItem& b) {
                          return a.score != b.score ? a.score > b.score : a.column < b.column;
                      });
    items.resize(n);
    return items;
}

Eigen::VectorXd exact_recommendation_row(const PreferenceMatrix& prefs, std::size_t user,
                                         std::size_t k) {
    const Eigen::MatrixXd dense = prefs.matrix.to_dense();
    const ExactDecomposition svd = exact_svd(dense, k);
    const Eigen::VectorXd lambda = exact_lambdas(svd, dense, RecommendationTarget{user});
    return svd.v * lambda;
}

std::string file_hash(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buffer[1 << 16];
    while (in.read(buffer, sizeof buffer) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buffer[i]);
            h *= 0x100000001b3ULL;
        }
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

}  // namespace qi
