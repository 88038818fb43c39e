#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ams/detect.hpp"
#include "ams/experiments.hpp"
#include "ams/gridio.hpp"
#include "ams/quantiles.hpp"
#include "ams/rng.hpp"

namespace py = pybind11;
using namespace ams;

namespace {

Field field_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr,
                       const std::string& dtype) {
    const auto d = static_cast<int>(arr.ndim());
    if (d < 1) throw ShapeError("array must have at least one dimension");
    const auto n = static_cast<int>(arr.shape(0));
    for (int k = 1; k < d; ++k)
        if (arr.shape(k) != n) throw ShapeError("array must be square: n identical per axis");
    Dtype dt;
    if (dtype == "counts") dt = Dtype::Counts;
    else if (dtype == "reals") dt = Dtype::Reals;
    else throw ConfigError("dtype must be 'counts' or 'reals'");
    std::vector<double> data(arr.data(), arr.data() + arr.size());
    Field field(std::move(data), n, d, dt);
    field.validate();
    return field;
}

py::array_t<double> field_to_array(const Field& field) {
    std::vector<py::ssize_t> shape(static_cast<std::size_t>(field.d), field.n);
    py::array_t<double> out(shape);
    std::copy(field.data.begin(), field.data.end(), out.mutable_data());
    return out;
}

py::array_t<double> sums_to_array(const ScaleSums& sums) {
    std::vector<py::ssize_t> shape(sums.dims.begin(), sums.dims.end());
    py::array_t<double> out(shape);
    std::copy(sums.sums.begin(), sums.sums.end(), out.mutable_data());
    return out;
}

Sidedness sided_from_string(const std::string& s) {
    if (s == "two-sided") return Sidedness::TwoSided;
    if (s == "one-sided" || s == "one-sided-upper") return Sidedness::OneSidedUpper;
    throw ConfigError("sidedness must be 'two-sided' or 'one-sided'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Calibrated multiscale scanning with estimated baseline and nuisance parameters";

    py::register_exception<DegenerateData>(m, "DegenerateDataError", PyExc_ValueError);
    py::register_exception<EmptySystem>(m, "EmptySystemError", PyExc_ValueError);
    static py::exception<Error> exc(m, "AmsError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const DegenerateData&) {
            throw;  // handled by the registered exception above
        } catch (const EmptySystem&) {
            throw;
        } catch (const Error& e) {
            PyErr_SetString(exc.ptr(), e.what());
        }
    });

    py::class_<Field>(m, "Field")
        .def(py::init([](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                         const std::string& dtype) { return field_from_array(a, dtype); }),
             py::arg("array"), py::arg("dtype") = "reals")
        .def_readonly("n", &Field::n)
        .def_readonly("d", &Field::d)
        .def_property_readonly("dtype",
                               [](const Field& f) {
                                   return f.dtype == Dtype::Counts ? "counts" : "reals";
                               })
        .def("to_numpy", &field_to_array)
        .def("__repr__", [](const Field& f) {
            return "<Field n=" + std::to_string(f.n) + " d=" + std::to_string(f.d) + ">";
        });

    py::class_<ModelFamily>(m, "ModelFamily")
        .def_static("gaussian_known", [](double mu0, double sigma2) {
            return ModelFamily::gaussian_known(mu0, sigma2);
        }, py::arg("mu0"), py::arg("sigma2"))
        .def_static("gaussian_unknown", [](double mu0, double sigma2) {
            return ModelFamily::gaussian_unknown(mu0, sigma2);
        }, py::arg("mu0"), py::arg("sigma2"))
        .def_static("poisson", [](double lambda0) { return ModelFamily::poisson(lambda0); },
                    py::arg("lambda0"))
        .def_static("gamma", [](double rate, double shape) {
            return ModelFamily::gamma(rate, shape);
        }, py::arg("rate"), py::arg("shape"))
        .def_property_readonly("theta0", [](const ModelFamily& mf) { return mf.theta0; })
        .def_property_readonly("xi", [](const ModelFamily& mf) { return mf.xi; })
        .def("baseline_mean", &ModelFamily::baseline_mean)
        .def("baseline_variance", &ModelFamily::baseline_variance)
        .def("__repr__", [](const ModelFamily& mf) { return "<" + mf.describe() + ">"; });

    m.def("mean_variance",
          [](const ModelFamily& model) {
              const auto mv = mean_variance(model);
              return py::make_tuple(mv.mean, mv.variance);
          },
          py::arg("model"));
    m.def("local_lrt", &local_lrt, py::arg("model"), py::arg("sum_r"), py::arg("count_r"));
    m.def("taylor_gap", &taylor_gap, py::arg("model"), py::arg("sum_r"), py::arg("count_r"));
    m.def(
        "estimate_global",
        [](const std::string& kind, const Field& field) {
            ModelKind mk;
            if (kind == "poisson") mk = ModelKind::Poisson;
            else if (kind == "gauss-known") mk = ModelKind::GaussianKnownVariance;
            else if (kind == "gauss-unknown") mk = ModelKind::GaussianUnknownVariance;
            else if (kind == "gamma") mk = ModelKind::Gamma;
            else throw ConfigError("unknown model kind '" + kind + "'");
            const auto report = estimate_global(mk, field);
            py::dict out;
            out["theta_hat"] = report.theta_hat;
            out["xi_hat"] = report.xi_hat;
            out["sample_size"] = report.sample_size;
            return out;
        },
        py::arg("kind"), py::arg("field"));

    py::class_<RegionSystem>(m, "RegionSystem")
        .def_readonly("n", &RegionSystem::n)
        .def_readonly("d", &RegionSystem::d)
        .def_readonly("scales", &RegionSystem::scales)
        .def_property_readonly("min_card", [](const RegionSystem& s) { return s.r_n; })
        .def_property_readonly("max_card", [](const RegionSystem& s) { return s.m_n; })
        .def("total_regions", &RegionSystem::total_regions)
        .def("__repr__", [](const RegionSystem& s) {
            return "<RegionSystem n=" + std::to_string(s.n) + " d=" + std::to_string(s.d) +
                   " scales=" + std::to_string(s.scales.size()) + ">";
        });

    m.def(
        "build_rectangles",
        [](int n, int d, int min_side, int max_side, bool even_only) {
            return build_rectangles(n, d, min_side, max_side,
                                    even_only ? Parity::EvenOnly : Parity::All);
        },
        py::arg("n"), py::arg("d"), py::arg("min_side"), py::arg("max_side"),
        py::arg("even_only") = false);
    m.def("restrict_scales", &restrict_scales, py::arg("system"), py::arg("min_card"),
          py::arg("max_card"));
    m.def("check_growth", [](const RegionSystem& s) {
        const auto r = check_growth(s);
        py::dict out;
        out["total_regions"] = r.total_regions;
        out["envelope"] = r.envelope;
        out["within_envelope"] = r.within_envelope;
        return out;
    });

    py::class_<Calibration>(m, "Calibration")
        .def_static("dw", &Calibration::dw, py::arg("nu"), py::arg("dim"))
        .def_static("sac", &Calibration::sac, py::arg("dim"))
        .def_static("pwm", &Calibration::pwm, py::arg("c"), py::arg("cd"), py::arg("dim"))
        .def_static("unit", &Calibration::unit, py::arg("dim"))
        .def_static("uncalibrated", &Calibration::uncalibrated, py::arg("dim"))
        .def("__repr__",
             [](const Calibration& c) { return "<Calibration " + c.digest_string() + ">"; });

    m.def("omega", &omega, py::arg("calibration"), py::arg("r"), py::arg("n"));
    m.def("omega_tilde", &omega_tilde, py::arg("calibration"), py::arg("r"), py::arg("n"));

    m.def(
        "fft_scale_sums",
        [](const Field& field, const RegionSystem& system, int threads) {
            py::list out;
            for (const auto& sums : fft_scale_sums(field, system, threads))
                out.append(py::make_tuple(sums.scale, sums_to_array(sums)));
            return out;
        },
        py::arg("field"), py::arg("system"), py::arg("threads") = 1);
    m.def(
        "naive_scale_sums",
        [](const Field& field, const RegionSystem& system) {
            py::list out;
            for (const auto& sums : naive_scale_sums(field, system))
                out.append(py::make_tuple(sums.scale, sums_to_array(sums)));
            return out;
        },
        py::arg("field"), py::arg("system"));

    py::class_<ScanResult>(m, "ScanResult")
        .def_readonly("t_n", &ScanResult::t_n)
        .def_property_readonly("argmax_offset",
                               [](const ScanResult& r) { return r.argmax_region.offset; })
        .def_property_readonly("argmax_extent",
                               [](const ScanResult& r) { return r.argmax_region.extent; })
        .def("__repr__",
             [](const ScanResult& r) { return "<ScanResult t_n=" + std::to_string(r.t_n) + ">"; });

    m.def(
        "scan_statistic",
        [](const Field& field, const RegionSystem& system, const ModelFamily& model,
           const Calibration& cal, const std::string& sidedness, bool keep_per_region,
           int threads) {
            return scan_statistic(field, system, model, cal, sided_from_string(sidedness),
                                  keep_per_region, threads);
        },
        py::arg("field"), py::arg("system"), py::arg("model"), py::arg("calibration"),
        py::arg("sidedness") = "two-sided", py::arg("keep_per_region") = false,
        py::arg("threads") = 1);
    m.def(
        "surrogate_statistic",
        [](const Field& noise, const RegionSystem& system, const Calibration& cal,
           const std::string& sidedness, int threads) {
            return surrogate_statistic(noise, system, cal, sided_from_string(sidedness),
                                       threads);
        },
        py::arg("noise"), py::arg("system"), py::arg("calibration"),
        py::arg("sidedness") = "two-sided", py::arg("threads") = 1);

    py::class_<QuantileTable>(m, "QuantileTable")
        .def_property_readonly("samples",
                               [](const QuantileTable& t) {
                                   py::array_t<double> out(
                                       static_cast<py::ssize_t>(t.samples.size()));
                                   std::copy(t.samples.begin(), t.samples.end(),
                                             out.mutable_data());
                                   return out;
                               })
        .def("quantile", &QuantileTable::quantile_for_alpha, py::arg("alpha"))
        .def("__repr__", [](const QuantileTable& t) {
            return "<QuantileTable runs=" + std::to_string(t.samples.size()) + ">";
        });

    m.def(
        "simulate_mn",
        [](const RegionSystem& system, const Calibration& cal, const std::string& sidedness,
           int mc_runs, std::uint64_t seed, int threads) {
            return simulate_mn(system, cal, sided_from_string(sidedness), mc_runs, seed,
                               threads);
        },
        py::arg("system"), py::arg("calibration"), py::arg("sidedness") = "two-sided",
        py::arg("mc_runs") = 2000, py::arg("seed") = 1, py::arg("threads") = 1);
    m.def(
        "cache_lookup_or_simulate",
        [](const std::filesystem::path& store, const RegionSystem& system,
           const Calibration& cal, const std::string& sidedness, int mc_runs,
           std::uint64_t seed, int threads) {
            return cache_lookup_or_simulate(store, system, cal, sided_from_string(sidedness),
                                            mc_runs, seed, threads);
        },
        py::arg("store"), py::arg("system"), py::arg("calibration"),
        py::arg("sidedness") = "two-sided", py::arg("mc_runs") = 2000, py::arg("seed") = 1,
        py::arg("threads") = 1);
    m.def("empirical_quantile",
          [](const std::vector<double>& sorted, double p) {
              return empirical_quantile(sorted, p);
          },
          py::arg("sorted_samples"), py::arg("p"));

    py::class_<SignificanceMap>(m, "SignificanceMap")
        .def_readonly("alpha", &SignificanceMap::alpha)
        .def_readonly("eta_used", &SignificanceMap::eta_used)
        .def_property_readonly("raster",
                               [](const SignificanceMap& map) {
                                   std::vector<py::ssize_t> shape(
                                       static_cast<std::size_t>(map.d), map.n);
                                   py::array_t<std::int64_t> out(shape);
                                   std::copy(map.raster.begin(), map.raster.end(),
                                             out.mutable_data());
                                   return out;
                               })
        .def_property_readonly("regions",
                               [](const SignificanceMap& map) {
                                   py::list out;
                                   for (const auto& r : map.regions) {
                                       py::dict row;
                                       row["offset"] = r.region.offset;
                                       row["extent"] = r.region.extent;
                                       row["cardinality"] = r.region.cardinality;
                                       row["t_value"] = r.t_value;
                                       row["calibrated"] = r.calibrated;
                                       row["local_threshold"] = r.local_threshold;
                                       out.append(row);
                                   }
                                   return out;
                               })
        .def("__repr__", [](const SignificanceMap& map) {
            return "<SignificanceMap regions=" + std::to_string(map.regions.size()) + ">";
        });

    m.def("significance_map",
          [](const ScanResult& result, const QuantileTable& table, double alpha,
             std::optional<double> pixel_area) {
              return significance_map(result, table, alpha, pixel_area);
          },
          py::arg("result"), py::arg("table"), py::arg("alpha"),
          py::arg("pixel_area") = std::nullopt);
    m.def("segment", [](const SignificanceMap& map) {
        const auto seg = segment(map);
        std::vector<py::ssize_t> shape(static_cast<std::size_t>(map.d), map.n);
        py::array_t<bool> mask(shape);
        for (std::size_t i = 0; i < seg.mask.size(); ++i)
            mask.mutable_data()[i] = seg.mask[i] != 0;
        return py::make_tuple(mask, seg.source_scale);
    });

    m.def(
        "read_grid",
        [](const std::filesystem::path& path) { return read_grid(path); },
        py::arg("path"));
    m.def(
        "write_grid",
        [](const std::filesystem::path& path, const Field& field, const std::string& format) {
            GridFormat gf;
            if (format == "csv") gf = GridFormat::CSV;
            else if (format == "pgm") gf = GridFormat::PGM;
            else if (format == "raw") gf = GridFormat::RawText;
            else throw ConfigError("format must be csv, pgm, or raw");
            write_grid(path, field, gf);
        },
        py::arg("path"), py::arg("field"), py::arg("format"));

    m.def("standard_normal_field", &standard_normal_field, py::arg("n"), py::arg("d"),
          py::arg("seed"));
    m.def("poisson_field", &poisson_field, py::arg("n"), py::arg("d"), py::arg("lam"),
          py::arg("seed"));

    m.attr("__version__") = "0.1.0";
}
