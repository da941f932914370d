// Batch experiment runner: one subcommand per study, CSV and JSON output.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qinspired/apps.hpp"
#include "qinspired/errors.hpp"
#include "qinspired/experiments.hpp"
#include "qinspired/sampling.hpp"

namespace {

using nlohmann::json;

struct Common {
    std::uint64_t seed = 1;
    std::string csv_path;
    std::string json_path;
    std::size_t samples = 10'000;
    std::size_t estimator_reps = 10;
    std::string aggregation = "median";
    std::size_t threads = 1;

    qi::EstimatorOptions estimator() const {
        return {samples, estimator_reps, qi::parse_aggregation(aggregation)};
    }
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "Master seed")->capture_default_str();
    cmd->add_option("--out", c.csv_path, "CSV output path (stdout when empty)");
    cmd->add_option("--json", c.json_path, "JSON output path");
    cmd->add_option("--samples,-N", c.samples, "Samples per coefficient mean")->capture_default_str();
    cmd->add_option("--estimator-reps", c.estimator_reps, "Means aggregated per coefficient")
        ->capture_default_str();
    cmd->add_option("--aggregation", c.aggregation, "median or mean")
        ->check(CLI::IsMember({"median", "mean"}))
        ->capture_default_str();
    cmd->add_option("--threads", c.threads, "Worker threads across repetitions")->capture_default_str();
}

json common_json(const Common& c) {
    return {{"seed", c.seed}, {"samples", c.samples}, {"estimator_reps", c.estimator_reps},
            {"aggregation", c.aggregation}, {"threads", c.threads}};
}

std::string fmt(double x) {
    if (std::isnan(x)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
    void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }
    void write(std::ostream& out) const {
        write_row(out, header_);
        for (const auto& r : rows_) write_row(out, r);
    }

private:
    static void write_row(std::ostream& out, const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << '\n';
    }
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

void emit_csv(const CsvTable& table, const std::string& path) {
    if (path.empty()) {
        table.write(std::cout);
        return;
    }
    std::ofstream out(path);
    qi::require(out.good(), qi::ErrorCode::IoError, "cannot write " + path);
    table.write(out);
    qi::require(out.good(), qi::ErrorCode::IoError, "write failed for " + path);
}

void emit_json(const json& j, const std::string& path) {
    if (path.empty()) return;
    std::ofstream out(path);
    qi::require(out.good(), qi::ErrorCode::IoError, "cannot write " + path);
    out << j.dump(2) << '\n';
    qi::require(out.good(), qi::ErrorCode::IoError, "write failed for " + path);
}

std::vector<std::string> metric_header() {
    std::vector<std::string> h;
    for (const auto& f : qi::metric_fields()) {
        h.push_back(std::string(f.name) + "_mean");
        h.push_back(std::string(f.name) + "_std");
        h.push_back(std::string(f.name) + "_median");
    }
    return h;
}

std::vector<std::string> metric_cells(const qi::ErrorReport& report) {
    std::vector<std::string> cells;
    for (const auto& f : qi::metric_fields()) {
        const auto s = report.summary(f.member);
        cells.push_back(fmt(s.mean));
        cells.push_back(fmt(s.stddev));
        cells.push_back(fmt(s.median));
    }
    return cells;
}

const std::vector<std::string> kTimingHeader{"t_LS", "t_SVD_C", "t_lambda", "t_x", "t_total"};

std::vector<std::string> timing_cells(const std::vector<qi::StageTimings>& timings) {
    qi::StageTimings mean;
    for (const auto& t : timings) {
        mean.ls += t.ls;
        mean.svd_c += t.svd_c;
        mean.lambda += t.lambda;
        mean.x += t.x;
        mean.total += t.total;
    }
    const double n = timings.empty() ? 1.0 : static_cast<double>(timings.size());
    return {fmt(mean.ls / n), fmt(mean.svd_c / n), fmt(mean.lambda / n), fmt(mean.x / n),
            fmt(mean.total / n)};
}

const std::vector<std::string> kBaselineHeader{"base_t_SVD_A", "base_t_lambda", "base_t_x",
                                               "base_t_total"};

std::vector<std::string> baseline_cells(const std::optional<qi::BaselineTimings>& b) {
    if (!b) return {"", "", "", ""};
    return {fmt(b->svd_a), fmt(b->lambda), fmt(b->x), fmt(b->total)};
}

template <typename T>
std::vector<std::string> concat(std::vector<T> a, const std::vector<T>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

// ------------------------------------------------------------ sample-bench

struct BenchArgs {
    Common common;
    std::vector<std::size_t> dims{100, 1000, 10'000, 100'000, 1'000'000, 10'000'000};
    std::size_t n_samples = 1000;
    std::size_t trials = 11;
    std::string trace_path;
};

void cmd_sample_bench(const BenchArgs& args) {
    std::vector<std::size_t> trace;
    const auto rows = qi::sampling_benchmark(args.dims, args.n_samples, args.common.seed, args.trials,
                                             args.trace_path.empty() ? nullptr : &trace);
    if (args.common.csv_path.empty()) {
        std::cout << qi::benchmark_csv(rows);
    } else {
        std::ofstream out(args.common.csv_path);
        qi::require(out.good(), qi::ErrorCode::IoError, "cannot write " + args.common.csv_path);
        out << qi::benchmark_csv(rows);
    }
    if (!args.trace_path.empty()) {
        std::ofstream out(args.trace_path);
        qi::require(out.good(), qi::ErrorCode::IoError, "cannot write " + args.trace_path);
        for (std::size_t i : trace) out << i << '\n';
    }
    json j{{"metadata", qi::run_metadata({{"command", "sample-bench"},
                                          {"dims", args.dims},
                                          {"n_samples", args.n_samples},
                                          {"trials", args.trials}},
                                         args.common.seed)}};
    for (const auto& r : rows)
        j["rows"].push_back({{"dim", r.dim}, {"method", r.method}, {"n_samples", r.n_samples},
                             {"seconds", r.seconds}});
    emit_json(j, args.common.json_path);
}

// ----------------------------------------------------------------- highdim

struct HighDimArgs {
    Common common;
    qi::HighDimConfig cfg;
};

void cmd_highdim(HighDimArgs& args) {
    args.cfg.seed = args.common.seed;
    args.cfg.estimator = args.common.estimator();
    args.cfg.threads = args.common.threads;
    const auto& c = args.cfg;
    const qi::HighDimResult result = qi::run_highdim(c);

    CsvTable table(concat(concat(std::vector<std::string>{"n_bits", "k", "kappa", "kappa_beta", "r", "c",
                                                          "N", "L", "reps"},
                                 metric_header()),
                          concat(kTimingHeader, {"wall_seconds"})));
    table.add(concat(concat(std::vector<std::string>{std::to_string(c.n_bits), std::to_string(c.k),
                                                     fmt(c.kappa), fmt(c.kappa_beta), std::to_string(c.r),
                                                     std::to_string(c.c), std::to_string(c.estimator.samples),
                                                     std::to_string(c.L), std::to_string(c.reps)},
                            metric_cells(result.report)),
                     concat(timing_cells(result.timings), {fmt(result.wall_seconds)})));
    emit_csv(table, args.common.csv_path);

    json config = common_json(args.common);
    config.update({{"command", "highdim"}, {"n_bits", c.n_bits}, {"k", c.k}, {"kappa", c.kappa},
                   {"kappa_beta", c.kappa_beta}, {"r", c.r}, {"c", c.c}, {"L", c.L}, {"reps", c.reps}});
    emit_json({{"metadata", qi::run_metadata(config, c.seed)},
               {"errors", result.report},
               {"timings", result.timings},
               {"wall_seconds", result.wall_seconds}},
              args.common.json_path);
}

// ------------------------------------------------------------------ random

struct RandomArgs {
    Common common;
    std::size_t m = 4000;
    std::size_t n = 2000;
    std::vector<std::size_t> ks{5};
    std::vector<double> kappas{5.0};
    std::vector<std::size_t> rs{425};
    std::size_t c = 0;
    std::size_t L = 100;
    std::size_t reps = 10;
    bool baseline = false;
    bool no_reconstruction = false;
    std::string backend = "direct";
};

void cmd_random(const RandomArgs& args) {
    std::vector<std::string> header{"m", "n", "k", "kappa", "r", "c", "N", "L", "reps"};
    header = concat(concat(concat(header, metric_header()), kTimingHeader), kBaselineHeader);
    CsvTable table(header);
    json points = json::array();
    for (std::size_t k : args.ks) {
        for (double kappa : args.kappas) {
            for (std::size_t r : args.rs) {
                qi::RandomPointConfig cfg;
                cfg.m = args.m;
                cfg.n = args.n;
                cfg.k = k;
                cfg.kappa = kappa;
                cfg.r = r;
                cfg.c = args.c ? args.c : r;
                cfg.L = args.L;
                cfg.reps = args.reps;
                cfg.seed = args.common.seed;
                cfg.estimator = args.common.estimator();
                cfg.reconstruction = !args.no_reconstruction;
                cfg.baseline = args.baseline;
                cfg.threads = args.common.threads;
                cfg.backend = qi::parse_backend(args.backend);
                const auto result = qi::run_random_point(cfg);
                table.add(concat(
                    concat(concat(std::vector<std::string>{std::to_string(cfg.m), std::to_string(cfg.n),
                                                           std::to_string(cfg.k), fmt(cfg.kappa),
                                                           std::to_string(cfg.r), std::to_string(cfg.c),
                                                           std::to_string(cfg.estimator.samples),
                                                           std::to_string(cfg.L), std::to_string(cfg.reps)},
                                  metric_cells(result.report)),
                           timing_cells(result.timings)),
                    baseline_cells(result.baseline)));
                json point{{"k", cfg.k}, {"kappa", cfg.kappa}, {"r", cfg.r}, {"c", cfg.c},
                           {"errors", result.report}, {"timings", result.timings}};
                if (result.baseline) point["baseline"] = *result.baseline;
                points.push_back(point);
            }
        }
    }
    emit_csv(table, args.common.csv_path);
    json config = common_json(args.common);
    config.update({{"command", "random"}, {"m", args.m}, {"n", args.n}, {"k", args.ks},
                   {"kappa", args.kappas}, {"r", args.rs}, {"c", args.c}, {"L", args.L},
                   {"reps", args.reps}, {"baseline", args.baseline}, {"backend", args.backend},
                   {"reconstruction", !args.no_reconstruction}});
    emit_json({{"metadata", qi::run_metadata(config, args.common.seed)}, {"points", points}},
              args.common.json_path);
}

// --------------------------------------------------------------- portfolio

struct PortfolioArgs {
    Common common;
    qi::PortfolioConfig cfg;
    std::string prices;
    std::size_t synthetic_assets = 40;
    std::size_t synthetic_days = 500;
    double mu = std::numeric_limits<double>::quiet_NaN();
};

void cmd_portfolio(PortfolioArgs& args) {
    auto& cfg = args.cfg;
    cfg.seed = args.common.seed;
    cfg.estimator = args.common.estimator();
    if (!std::isnan(args.mu)) cfg.mu = args.mu;

    qi::ReturnsPanel panel;
    std::string hash;
    if (!args.prices.empty()) {
        panel = qi::load_prices(std::filesystem::path(args.prices));
        hash = qi::file_hash(args.prices);
        for (const auto& issue : panel.issues)
            std::cerr << args.prices << ":" << issue.line << ": " << issue.message << '\n';
    } else {
        qi::Rng rng = qi::make_rng(cfg.seed, 0xfeed);
        panel = qi::synthetic_returns_panel(args.synthetic_assets, args.synthetic_days, rng);
    }
    const qi::MarkowitzSystem system = qi::build_markowitz(panel, cfg.mu);
    const auto result = qi::run_portfolio(system, panel.asset_ids, cfg);

    CsvTable table(concat(concat(concat(std::vector<std::string>{"n_assets", "n_days", "mu", "sigma_max",
                                                                 "sigma_min", "k", "r", "c", "N", "reps"},
                                        metric_header()),
                                 kTimingHeader),
                          kBaselineHeader));
    table.add(concat(
        concat(concat(std::vector<std::string>{std::to_string(panel.n_assets()), std::to_string(panel.n_days()),
                                               fmt(system.mu), fmt(result.sigma_max), fmt(result.sigma_min),
                                               std::to_string(cfg.k), std::to_string(cfg.r),
                                               std::to_string(cfg.c), std::to_string(cfg.estimator.samples),
                                               std::to_string(cfg.reps)},
                      metric_cells(result.report)),
               timing_cells(result.timings)),
        baseline_cells(result.baseline)));
    emit_csv(table, args.common.csv_path);

    json allocation = json::array();
    for (Eigen::Index i = 0; i < result.first_solution.size(); ++i) {
        allocation.push_back({{"entry", i == 0 ? std::string("nu") : panel.asset_ids[i - 1]},
                              {"approx", result.first_solution(i)},
                              {"exact", result.exact_solution(i)}});
    }
    json config = common_json(args.common);
    config.update({{"command", "portfolio"}, {"prices", args.prices}, {"k", cfg.k}, {"r", cfg.r},
                   {"c", cfg.c}, {"L", cfg.L}, {"reps", cfg.reps}, {"mu", system.mu},
                   {"return_definition", "simple open-to-open (p[t+1]-p[t])/p[t]"}});
    if (args.prices.empty())
        config.update({{"synthetic_assets", args.synthetic_assets}, {"synthetic_days", args.synthetic_days}});
    emit_json({{"metadata", qi::run_metadata(config, cfg.seed, hash)},
               {"panel", {{"n_assets", panel.n_assets()}, {"n_days", panel.n_days()},
                          {"dropped_assets", panel.dropped_assets}, {"rejected_rows", panel.issues.size()}}},
               {"sigma_max", result.sigma_max},
               {"sigma_min", result.sigma_min},
               {"errors", result.report},
               {"timings", result.timings},
               {"baseline", result.baseline},
               {"spectrum", result.spectrum},
               {"allocation", allocation}},
              args.common.json_path);
}

// --------------------------------------------------------------- movielens

struct MovielensArgs {
    Common common;
    qi::MovielensConfig cfg;
    std::string ratings;
};

void cmd_movielens(MovielensArgs& args) {
    auto& cfg = args.cfg;
    cfg.seed = args.common.seed;
    cfg.estimator = args.common.estimator();
    const qi::PreferenceMatrix prefs = qi::load_movielens(std::filesystem::path(args.ratings));
    for (const auto& issue : prefs.issues)
        std::cerr << args.ratings << ":" << issue.line << ": " << issue.message << '\n';
    const auto result = qi::run_movielens(prefs, cfg);

    CsvTable table(concat(concat(concat(std::vector<std::string>{"users", "movies", "nonzeros", "sigma_max",
                                                                 "sigma_min", "kappa", "user", "k", "r", "c",
                                                                 "N", "reps"},
                                        metric_header()),
                                 kTimingHeader),
                          kBaselineHeader));
    table.add(concat(
        concat(concat(std::vector<std::string>{std::to_string(prefs.matrix.rows()),
                                               std::to_string(prefs.matrix.cols()),
                                               std::to_string(prefs.matrix.nonzeros()), fmt(result.sigma_max),
                                               fmt(result.sigma_min), fmt(result.kappa), std::to_string(cfg.user),
                                               std::to_string(cfg.k), std::to_string(cfg.r),
                                               std::to_string(cfg.c), std::to_string(cfg.estimator.samples),
                                               std::to_string(cfg.reps)},
                      metric_cells(result.report)),
               timing_cells(result.timings)),
        baseline_cells(result.baseline)));
    emit_csv(table, args.common.csv_path);

    json config = common_json(args.common);
    config.update({{"command", "movielens"}, {"ratings", args.ratings}, {"user", cfg.user}, {"k", cfg.k},
                   {"r", cfg.r}, {"c", cfg.c}, {"L", cfg.L}, {"reps", cfg.reps}, {"top_n", cfg.top_n}});
    emit_json({{"metadata", qi::run_metadata(config, cfg.seed, qi::file_hash(args.ratings))},
               {"matrix", {{"users", prefs.matrix.rows()}, {"movies", prefs.matrix.cols()},
                           {"nonzeros", prefs.matrix.nonzeros()}, {"duplicates", prefs.duplicates},
                           {"rejected_rows", prefs.issues.size()}}},
               {"sigma_max", result.sigma_max},
               {"sigma_min", result.sigma_min},
               {"kappa", result.kappa},
               {"errors", result.report},
               {"timings", result.timings},
               {"baseline", result.baseline},
               {"spectrum", result.spectrum},
               {"recommendations", {{"approximate", result.first_recommendation.approximate},
                                    {"exact", result.first_recommendation.exact}}}},
              args.common.json_path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sampling-based low-rank linear algebra experiments"};
    app.set_config("--config", "", "TOML/INI file with option values");
    app.require_subcommand(1);

    BenchArgs bench;
    auto* sb = app.add_subcommand("sample-bench", "Time tree vs direct length-square sampling");
    add_common(sb, bench.common);
    sb->add_option("--dims", bench.dims, "Vector dimensions")->capture_default_str();
    sb->add_option("--n-samples", bench.n_samples, "Samples per timing")->capture_default_str();
    sb->add_option("--trials", bench.trials, "Timings per point (minimum kept)")->capture_default_str();
    sb->add_option("--trace", bench.trace_path, "Write the sampled indices here");

    HighDimArgs hd;
    auto* hc = app.add_subcommand("highdim", "Implicit 2^n x 2^n Hadamard-structured problems");
    add_common(hc, hd.common);
    hc->add_option("--n-bits", hd.cfg.n_bits)->capture_default_str();
    hc->add_option("--k", hd.cfg.k)->capture_default_str();
    hc->add_option("--kappa", hd.cfg.kappa)->capture_default_str();
    hc->add_option("--kappa-beta", hd.cfg.kappa_beta)->capture_default_str();
    hc->add_option("--r", hd.cfg.r)->capture_default_str();
    hc->add_option("--c", hd.cfg.c)->capture_default_str();
    hc->add_option("--L", hd.cfg.L, "Leading entries compared")->capture_default_str();
    hc->add_option("--reps", hd.cfg.reps)->capture_default_str();

    RandomArgs rnd;
    auto* rc = app.add_subcommand("random", "Gaussian low-rank problems, optionally swept");
    add_common(rc, rnd.common);
    rc->add_option("--m", rnd.m)->capture_default_str();
    rc->add_option("--n", rnd.n)->capture_default_str();
    rc->add_option("--k", rnd.ks, "Rank sweep")->capture_default_str();
    rc->add_option("--kappa", rnd.kappas, "Condition number sweep")->capture_default_str();
    rc->add_option("--r", rnd.rs, "Row-sample sweep")->capture_default_str();
    rc->add_option("--c", rnd.c, "Column samples (default: same as r)");
    rc->add_option("--L", rnd.L)->capture_default_str();
    rc->add_option("--reps", rnd.reps)->capture_default_str();
    rc->add_flag("--baseline", rnd.baseline, "Also time the dense exact solve");
    rc->add_flag("--no-reconstruction", rnd.no_reconstruction, "Skip eta_A and eta_A+");
    rc->add_option("--backend", rnd.backend)->check(CLI::IsMember({"direct", "tree"}))->capture_default_str();

    PortfolioArgs pf;
    auto* pc = app.add_subcommand("portfolio", "Markowitz portfolio from daily prices");
    add_common(pc, pf.common);
    pc->add_option("--prices", pf.prices, "CSV with date,ticker,open (synthetic panel when absent)");
    pc->add_option("--synthetic-assets", pf.synthetic_assets)->capture_default_str();
    pc->add_option("--synthetic-days", pf.synthetic_days)->capture_default_str();
    pc->add_option("--mu", pf.mu, "Target return (default: mean asset return)");
    pc->add_option("--k", pf.cfg.k)->capture_default_str();
    pc->add_option("--r", pf.cfg.r)->capture_default_str();
    pc->add_option("--c", pf.cfg.c)->capture_default_str();
    pc->add_option("--L", pf.cfg.L)->capture_default_str();
    pc->add_option("--reps", pf.cfg.reps)->capture_default_str();

    MovielensArgs ml;
    auto* mc = app.add_subcommand("movielens", "Movie recommendation from MovieLens ratings");
    add_common(mc, ml.common);
    mc->add_option("--ratings", ml.ratings, "ratings.csv (userId,movieId,rating,timestamp)")->required();
    mc->add_option("--user", ml.cfg.user, "Row index of the user")->capture_default_str();
    mc->add_option("--k", ml.cfg.k)->capture_default_str();
    mc->add_option("--r", ml.cfg.r)->capture_default_str();
    mc->add_option("--c", ml.cfg.c)->capture_default_str();
    mc->add_option("--L", ml.cfg.L)->capture_default_str();
    mc->add_option("--reps", ml.cfg.reps)->capture_default_str();
    mc->add_option("--top-n", ml.cfg.top_n)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sb) cmd_sample_bench(bench);
        else if (*hc) cmd_highdim(hd);
        else if (*rc) cmd_random(rnd);
        else if (*pc) cmd_portfolio(pf);
        else if (*mc) cmd_movielens(ml);
    } catch (const qi::Error& e) {
        std::cerr << "error [" << qi::to_string(e.code()) << "]: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
