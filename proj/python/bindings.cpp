#include "afdecg/afd.hpp"
#include "afdecg/analytic.hpp"
#include "afdecg/eval.hpp"
#include "afdecg/features.hpp"
#include "afdecg/ifreq.hpp"
#include "afdecg/svm.hpp"

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <stdexcept>

namespace py = pybind11;

namespace {

afdecg::AFDDecomposition decompose_signal(const std::vector<double>& samples,
                                          int level, int rings, double r_max) {
    const afdecg::ComplexSignal s_plus = afdecg::analytic_signal(samples);
    const afdecg::SearchGrid grid = afdecg::SearchGrid::uniform(
        rings, r_max, static_cast<int>(samples.size()));
    return afdecg::decompose(s_plus, level, grid, true,
                             afdecg::mean_coefficient(samples));
}

std::vector<std::complex<double>> poles_of(const afdecg::AFDDecomposition& d) {
    std::vector<std::complex<double>> out;
    out.reserve(d.poles.size());
    for (const auto& a : d.poles) out.push_back(a.value);
    return out;
}

py::dict metrics_dict(const std::vector<std::vector<long>>& counts) {
    if (counts.size() != afdecg::kNumClasses)
        throw std::invalid_argument("confusion matrix must be 4x4 (order N,S,V,F)");
    afdecg::ConfusionMatrix cm;
    for (int k = 0; k < afdecg::kNumClasses; ++k) {
        if (counts[k].size() != afdecg::kNumClasses)
            throw std::invalid_argument("confusion matrix must be 4x4 (order N,S,V,F)");
        for (int l = 0; l < afdecg::kNumClasses; ++l) cm.counts[k][l] = counts[k][l];
    }
    const afdecg::Metrics m = afdecg::metrics(cm);
    py::dict out;
    out["accuracy"] = m.accuracy;
    py::list se, pp;
    for (int k = 0; k < afdecg::kNumClasses; ++k) {
        se.append(m.sensitivity[k] ? py::cast(*m.sensitivity[k]) : py::none());
        pp.append(m.positive_predictivity[k] ? py::cast(*m.positive_predictivity[k])
                                             : py::none());
    }
    out["sensitivity"] = se;
    out["positive_predictivity"] = pp;
    return out;
}

double qrs_duration_of(const std::vector<double>& segment) {
    if (segment.size() != afdecg::kSegmentLength)
        throw std::invalid_argument("segment must have exactly 301 samples");
    afdecg::HeartbeatSegment seg;
    std::copy(segment.begin(), segment.end(), seg.samples.begin());
    return afdecg::qrs_duration(seg);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Adaptive Fourier decomposition ECG toolkit (native core)";

    py::class_<afdecg::AFDDecomposition>(m, "Decomposition")
        .def_readonly("level", &afdecg::AFDDecomposition::level)
        .def_readonly("grid_len", &afdecg::AFDDecomposition::grid_len)
        .def_readonly("c0", &afdecg::AFDDecomposition::c0)
        .def_readonly("coefficients", &afdecg::AFDDecomposition::coeffs)
        .def_readonly("residual_energies", &afdecg::AFDDecomposition::residual_energies)
        .def_readonly("source_energy", &afdecg::AFDDecomposition::source_energy)
        .def_property_readonly("poles", &poles_of)
        .def("reconstruct",
             [](const afdecg::AFDDecomposition& d) {
                 return afdecg::reconstruct(d).real;
             },
             "Real signal rebuilt from the stored poles and coefficients")
        .def("instantaneous_frequency",
             [](const afdecg::AFDDecomposition& d, int n) {
                 return afdecg::instantaneous_frequency(d, n).values;
             },
             py::arg("component"),
             "Closed-form phase derivative of one component on the grid")
        .def("tfr",
             [](const afdecg::AFDDecomposition& d, int bins, double lo, double hi) {
                 afdecg::TFRBinSpec spec;
                 spec.bins = bins;
                 spec.lo = lo;
                 spec.hi = hi;
                 const afdecg::TFRGrid g = afdecg::tfr(d, spec);
                 std::vector<std::vector<double>> rows(d.grid_len);
                 for (int t = 0; t < d.grid_len; ++t) {
                     rows[t].resize(g.freq_bins());
                     for (int f = 0; f < g.freq_bins(); ++f) rows[t][f] = g.at(t, f);
                 }
                 return py::make_tuple(g.times, g.bin_edges, rows);
             },
             py::arg("bins") = 128, py::arg("lo") = 0.0, py::arg("hi") = 10.0,
             "Transient time-frequency grid: (times, bin_edges, energy rows)");

    m.def("analytic_signal",
          [](const std::vector<double>& s) { return afdecg::analytic_signal(s); },
          py::arg("samples"),
          "One-sided spectrum extension; Re(2*s+ - c0) returns the input");
    m.def("mean_coefficient",
          [](const std::vector<double>& s) { return afdecg::mean_coefficient(s); },
          py::arg("samples"));
    m.def("decompose", &decompose_signal, py::arg("samples"), py::arg("level") = 10,
          py::arg("rings") = 64, py::arg("r_max") = afdecg::kDefaultPoleRadiusMax,
          "Greedy adaptive decomposition of a real signal's analytic extension");
    m.def("map_aami",
          [](const std::string& symbol) {
              if (symbol.size() != 1)
                  throw std::invalid_argument("beat symbol must be one character");
              return std::string(1, afdecg::aami_class_char(afdecg::map_aami(symbol[0])));
          },
          py::arg("symbol"), "Beat symbol to class letter (N, S, V, F, Q)");
    m.def("rbf_kernel", &afdecg::rbf_kernel, py::arg("x"), py::arg("y"), py::arg("sigma"));
    m.def("confusion_metrics", &metrics_dict, py::arg("counts"),
          "Accuracy, per-class sensitivity and positive predictivity of a 4x4 matrix");
    m.def("qrs_duration", &qrs_duration_of, py::arg("segment"),
          "QRS width in seconds from a 301-sample beat segment");

    m.attr("__version__") = "0.1.0";
    m.attr("SEGMENT_LENGTH") = afdecg::kSegmentLength;
    m.attr("R_INDEX") = afdecg::kSegmentRIndex;
}
