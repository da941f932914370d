#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qinspired/apps.hpp"
#include "qinspired/coeffs.hpp"
#include "qinspired/errors.hpp"
#include "qinspired/experiments.hpp"
#include "qinspired/fkv.hpp"
#include "qinspired/metrics.hpp"
#include "qinspired/sampling.hpp"
#include "qinspired/solution.hpp"
#include "qinspired/synthetic.hpp"

namespace py = pybind11;
using namespace qi;

namespace {

// Results cross the boundary as JSON text; the Python side parses it.
std::string dump(const nlohmann::json& j) { return j.dump(); }

EstimatorOptions estimator(std::size_t samples, std::size_t reps, const std::string& aggregation) {
    EstimatorOptions o;
    o.samples = samples;
    o.repetitions = reps;
    o.aggregation = parse_aggregation(aggregation);
    return o;
}

nlohmann::json report_json(const ErrorReport& report, const std::vector<StageTimings>& timings) {
    nlohmann::json j = report;
    j["timings"] = timings;
    return j;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Sampling-based low-rank linear algebra";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

    m.attr("__version__") = library_version();

    py::class_<Rng>(m, "Rng")
        .def(py::init([](std::uint64_t seed) { return Rng(seed); }), py::arg("seed"))
        .def_static("derived", [](std::uint64_t master, std::uint64_t stream) { return make_rng(master, stream); },
                    py::arg("master"), py::arg("stream"));

    py::enum_<SamplerBackend>(m, "Backend")
        .value("direct", SamplerBackend::Direct)
        .value("tree", SamplerBackend::Tree);

    py::class_<IndexSampler>(m, "IndexSampler")
        .def(py::init([](const std::vector<double>& w, SamplerBackend b) { return IndexSampler(w, b); }),
             py::arg("weights"), py::arg("backend") = SamplerBackend::Direct)
        .def("sample", py::overload_cast<double>(&IndexSampler::sample, py::const_), py::arg("u"))
        .def("draw", [](const IndexSampler& s, Rng& rng, std::size_t n) {
            std::vector<std::size_t> out(n);
            for (auto& i : out) i = s.sample(rng);
            return out;
        }, py::arg("rng"), py::arg("n"))
        .def("probability", &IndexSampler::probability)
        .def_property_readonly("total", &IndexSampler::total)
        .def("__len__", &IndexSampler::size);

    py::class_<LengthSquareTree>(m, "LengthSquareTree")
        .def(py::init([](const std::vector<double>& w) { return LengthSquareTree(w); }), py::arg("weights"))
        .def("sample", py::overload_cast<double>(&LengthSquareTree::sample, py::const_), py::arg("u"))
        .def("update", &LengthSquareTree::update, py::arg("i"), py::arg("weight"))
        .def("probability", &LengthSquareTree::probability)
        .def_property_readonly("total", &LengthSquareTree::total);

    m.def("sampling_benchmark", [](const std::vector<std::size_t>& dims, std::size_t n_samples, std::uint64_t seed,
                                   std::size_t trials) {
        py::list rows;
        for (const auto& r : sampling_benchmark(dims, n_samples, seed, trials))
            rows.append(py::dict(py::arg("dim") = r.dim, py::arg("method") = r.method,
                                 py::arg("n_samples") = r.n_samples, py::arg("seconds") = r.seconds));
        return rows;
    }, py::arg("dims"), py::arg("n_samples") = 1000, py::arg("seed") = 1, py::arg("trials") = 11);

    py::class_<SampleableMatrix>(m, "SampleableMatrix")
        .def_property_readonly("shape", [](const SampleableMatrix& a) { return py::make_tuple(a.rows(), a.cols()); })
        .def_property_readonly("frobenius_norm", &SampleableMatrix::frobenius_norm)
        .def("entry", &SampleableMatrix::entry)
        .def("row_norm", &SampleableMatrix::row_norm)
        .def("sample_row", &SampleableMatrix::sample_row)
        .def("sample_col_in_row", &SampleableMatrix::sample_col_in_row)
        .def("to_dense", &SampleableMatrix::to_dense, py::arg("limit") = kDeskScaleLimit);

    py::class_<DenseSampleableMatrix, SampleableMatrix>(m, "DenseMatrix")
        .def(py::init<RowMajorMatrix, SamplerBackend>(), py::arg("values"),
             py::arg("backend") = SamplerBackend::Direct);

    py::class_<FkvSketch>(m, "FkvSketch")
        .def_readonly("row_indices", &FkvSketch::row_indices)
        .def_readonly("row_scales", &FkvSketch::row_scales)
        .def_readonly("col_indices", &FkvSketch::col_indices)
        .def_readonly("C", &FkvSketch::C)
        .def_readonly("sigma", &FkvSketch::sigma)
        .def_readonly("omega", &FkvSketch::omega)
        .def_property_readonly("rank", &FkvSketch::rank)
        .def("to_json", [](const FkvSketch& s) { return dump(s); });

    m.def("run_fkv", &run_fkv, py::arg("a"), py::arg("r"), py::arg("c"), py::arg("k"), py::arg("rng"));
    m.def("exhaustive_sketch", &exhaustive_sketch, py::arg("a"), py::arg("k"));
    m.def("right_singular_vectors", &right_singular_vectors, py::arg("sketch"), py::arg("a"),
          py::arg("limit") = kDeskScaleLimit);
    m.def("reconstruct", [](const FkvSketch& s, const SampleableMatrix& a, bool pseudoinverse) {
        return reconstruct(s, a, pseudoinverse ? ReconstructMode::Pseudoinverse : ReconstructMode::Matrix);
    }, py::arg("sketch"), py::arg("a"), py::arg("pseudoinverse") = false);

    m.def("estimate_inner_product", [](const std::vector<double>& y, const std::vector<double>& z,
                                       std::size_t samples, std::size_t reps, Rng& rng) {
        const VectorSampler ys = length_square_vector_sampler(y);
        const auto est = estimate_inner_product(ys, [&](std::size_t i) { return z.at(i); },
                                                estimator(samples, reps, "median"), rng);
        return py::make_tuple(est.lambda_hat, est.empirical_variance);
    }, py::arg("y"), py::arg("z"), py::arg("samples"), py::arg("reps"), py::arg("rng"));

    m.def("estimate_lambdas_linear", [](const SampleableMatrix& a, const std::vector<double>& b, const FkvSketch& s,
                                        std::size_t samples, std::size_t reps, Rng& rng) {
        RightVectorCache cache(s, a);
        const EntryQuery q = [&](std::size_t i) { return b.at(i); };
        Eigen::VectorXd out(s.rank());
        for (std::size_t l = 0; l < s.rank(); ++l)
            out(l) = estimate_lambda_linear(a, q, s, l, estimator(samples, reps, "median"), rng, &cache).lambda_hat;
        return out;
    }, py::arg("a"), py::arg("b"), py::arg("sketch"), py::arg("samples") = 10'000, py::arg("reps") = 10,
       py::arg("rng"));

    m.def("estimate_lambdas_recommendation", [](const SampleableMatrix& a, std::size_t user, const FkvSketch& s,
                                                std::size_t samples, std::size_t reps, Rng& rng) {
        RightVectorCache cache(s, a);
        Eigen::VectorXd out(s.rank());
        for (std::size_t l = 0; l < s.rank(); ++l)
            out(l) = estimate_lambda_recommendation(a, user, s, l, estimator(samples, reps, "median"), rng, &cache)
                         .lambda_hat;
        return out;
    }, py::arg("a"), py::arg("user"), py::arg("sketch"), py::arg("samples") = 10'000, py::arg("reps") = 10,
       py::arg("rng"));

    py::class_<ImplicitSolution>(m, "ImplicitSolution")
        .def_readonly("w", &ImplicitSolution::w)
        .def("entry", [](const ImplicitSolution& s, const SampleableMatrix& a, std::size_t j) {
            return solution_entry(s, a, j);
        })
        .def("vector", [](const ImplicitSolution& s, const SampleableMatrix& a) { return solution_vector(s, a); })
        .def("sample", [](const ImplicitSolution& s, const SampleableMatrix& a, Rng& rng) {
            const auto r = rejection_sample_entry(s, a, rng);
            return py::make_tuple(r.index, r.trials);
        });
    m.def("make_implicit_solution", &make_implicit_solution, py::arg("sketch"), py::arg("lambdas"));

    m.def("solve_direct", [](const SampleableMatrix& a, const std::vector<double>& b, std::size_t k,
                             const FkvSketch* sketch) {
        return direct_solution(a, LinearTarget{b}, k, sketch ? DirectMethod::FkvDirect : DirectMethod::ExactSvd,
                               sketch);
    }, py::arg("a"), py::arg("b"), py::arg("k"), py::arg("sketch") = nullptr);

    py::class_<GaussianLowRankProblem>(m, "GaussianProblem")
        .def_readonly("sigma", &GaussianLowRankProblem::sigma)
        .def_readonly("b", &GaussianLowRankProblem::b)
        .def("matrix", &GaussianLowRankProblem::matrix)
        .def("exact_solution", &GaussianLowRankProblem::exact_solution)
        .def("exact_lambdas", &GaussianLowRankProblem::exact_lambdas);
    m.def("gaussian_problem", &gaussian_problem, py::arg("m"), py::arg("n"), py::arg("k"), py::arg("kappa"),
          py::arg("rng"));

    py::class_<HadamardProblem, SampleableMatrix>(m, "HadamardProblem")
        .def(py::init<unsigned, std::vector<double>, std::vector<Bits>, std::vector<double>>(), py::arg("n_bits"),
             py::arg("sigma"), py::arg("bitstrings"), py::arg("beta"))
        .def_static("spaced", &HadamardProblem::spaced, py::arg("n_bits"), py::arg("k"), py::arg("kappa"),
                    py::arg("kappa_beta"), py::arg("rng"))
        .def_property_readonly("sigma", &HadamardProblem::sigma)
        .def_property_readonly("bitstrings", &HadamardProblem::bitstrings)
        .def("b_entry", &HadamardProblem::b_entry)
        .def("exact_solution_entry", &HadamardProblem::exact_solution_entry);

    m.def("relative_error", [](const std::vector<double>& exact, const std::vector<double>& approx,
                               const std::string& mode, std::optional<std::size_t> first_L) {
        return relative_error_vector(exact, approx, mode == "median" ? ErrorMode::Median : ErrorMode::Mean, first_L);
    }, py::arg("exact"), py::arg("approx"), py::arg("mode") = "mean", py::arg("first_L") = py::none());
    m.def("frobenius_relative_error", &frobenius_relative_error);

    m.def("markowitz_system", [](const Eigen::MatrixXd& returns, std::optional<double> mu) {
        ReturnsPanel panel;
        for (Eigen::Index i = 0; i < returns.rows(); ++i) panel.asset_ids.push_back(std::to_string(i));
        panel.returns = returns;
        const MarkowitzSystem s = build_markowitz(panel, mu);
        return py::make_tuple(Eigen::MatrixXd(s.A), s.b);
    }, py::arg("returns"), py::arg("mu") = py::none());

    m.def("_run_highdim", [](unsigned n_bits, std::size_t k, double kappa, double kappa_beta, std::size_t r,
                             std::size_t c, std::size_t L, std::size_t reps, std::uint64_t seed, std::size_t samples) {
        HighDimConfig cfg;
        cfg.n_bits = n_bits;
        cfg.k = k;
        cfg.kappa = kappa;
        cfg.kappa_beta = kappa_beta;
        cfg.r = r;
        cfg.c = c;
        cfg.L = L;
        cfg.reps = reps;
        cfg.seed = seed;
        cfg.estimator.samples = samples;
        py::gil_scoped_release release;
        const HighDimResult res = run_highdim(cfg);
        return dump(report_json(res.report, res.timings));
    });

    m.def("_run_random_point", [](std::size_t m_, std::size_t n, std::size_t k, double kappa, std::size_t r,
                                  std::size_t c, std::size_t L, std::size_t reps, std::uint64_t seed,
                                  std::size_t samples, bool reconstruction) {
        RandomPointConfig cfg;
        cfg.m = m_;
        cfg.n = n;
        cfg.k = k;
        cfg.kappa = kappa;
        cfg.r = r;
        cfg.c = c;
        cfg.L = L;
        cfg.reps = reps;
        cfg.seed = seed;
        cfg.estimator.samples = samples;
        cfg.reconstruction = reconstruction;
        py::gil_scoped_release release;
        const RandomPointResult res = run_random_point(cfg);
        return dump(report_json(res.report, res.timings));
    });
}
