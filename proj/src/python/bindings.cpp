#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "blindspots/core.hpp"
#include "blindspots/decoherence.hpp"
#include "blindspots/error.hpp"
#include "blindspots/grid.hpp"
#include "blindspots/spots.hpp"

namespace py = pybind11;
using namespace blindspots;

// Phase-space points cross the boundary as (p, q) tuples; any length-2
// sequence of numbers is accepted on the way in.
namespace pybind11::detail {
template <>
struct type_caster<PhaseVector> {
  PYBIND11_TYPE_CASTER(PhaseVector, const_name("tuple[float, float]"));

  bool load(handle src, bool) {
    if (!isinstance<sequence>(src) || isinstance<str>(src)) return false;
    const auto seq = reinterpret_borrow<sequence>(src);
    if (seq.size() != 2) return false;
    try {
      value = {seq[0].cast<double>(), seq[1].cast<double>()};
    } catch (const cast_error&) {
      return false;
    }
    return true;
  }

  static handle cast(const PhaseVector& v, return_value_policy, handle) { return make_tuple(v.p, v.q).release(); }
};
}  // namespace pybind11::detail

namespace {

std::vector<PhaseVector> points_from(const py::array_t<double, py::array::c_style | py::array::forcecast>& xs) {
  if (xs.ndim() != 2 || xs.shape(1) != 2) throw py::value_error("points must have shape (n, 2)");
  std::vector<PhaseVector> out;
  const auto r = xs.unchecked<2>();
  for (py::ssize_t k = 0; k < r.shape(0); ++k) out.emplace_back(r(k, 0), r(k, 1));
  return out;
}

py::array_t<Complex> grid_values(const FieldGrid& g) {
  py::array_t<Complex> out({g.rows(), g.cols()});
  std::copy(g.values().begin(), g.values().end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_blindspots, m) {
  m.doc() = "Blind spots of chord functions for superpositions of coherent states";

  static py::exception<Error> error(m, "BlindSpotsError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.def("skew", &skew);

  py::class_<SymplecticMatrix>(m, "SymplecticMatrix")
      .def(py::init<>())
      .def_static("from_entries", &SymplecticMatrix::from_entries, py::arg("pp"), py::arg("pq"), py::arg("qp"),
                  py::arg("qq"))
      .def_static("rotation", &SymplecticMatrix::rotation)
      .def_static("squeeze", &SymplecticMatrix::squeeze)
      .def_static("oscillator_frame", &SymplecticMatrix::oscillator_frame)
      .def_property_readonly("matrix", &SymplecticMatrix::matrix)
      .def("apply", &SymplecticMatrix::apply)
      .def("inverse", &SymplecticMatrix::inverse)
      .def("__matmul__", [](const SymplecticMatrix& a, const SymplecticMatrix& b) { return a * b; });

  py::class_<GaussianState>(m, "GaussianState")
      .def(py::init([](PhaseVector center, const SymplecticMatrix& frame) { return GaussianState{center, frame}; }),
           py::arg("center") = PhaseVector{}, py::arg("frame") = SymplecticMatrix{})
      .def_readwrite("center", &GaussianState::center)
      .def_readwrite("frame", &GaussianState::frame);

  py::class_<Term>(m, "Term")
      .def(py::init([](Complex amplitude, PhaseVector center, const SymplecticMatrix& frame) {
             return Term{amplitude, {center, frame}};
           }),
           py::arg("amplitude"), py::arg("center"), py::arg("frame") = SymplecticMatrix{})
      .def_readwrite("amplitude", &Term::amplitude)
      .def_readwrite("state", &Term::state);

  py::class_<Superposition>(m, "Superposition")
      .def(py::init<double, std::vector<Term>>(), py::arg("hbar"), py::arg("terms"))
      .def_property_readonly("hbar", &Superposition::hbar)
      .def_property_readonly("terms", &Superposition::terms)
      .def("__len__", &Superposition::size);

  py::class_<MixedEnsemble>(m, "MixedEnsemble")
      .def_static("from_superposition", &MixedEnsemble::from_superposition)
      .def_property_readonly("hbar", &MixedEnsemble::hbar);

  m.def("normalize", &normalize);
  m.def("norm_squared", &norm_squared);
  m.def("inner_product", &inner_product);
  m.def("translate_state", &translate_state);
  m.def("shift_origin", &shift_origin);
  m.def("apply_symplectic", &apply_symplectic);
  m.def("chord_exact", &chord_exact, py::arg("state"), py::arg("xi"));
  m.def(
      "chord_quadrature",
      [](const Superposition& s, PhaseVector xi, double step) {
        QuadratureOptions o;
        o.step = step;
        return chord_quadrature(s, xi, o);
      },
      py::arg("state"), py::arg("xi"), py::arg("step") = 0.0);
  m.def("wigner_exact", &wigner_exact, py::arg("state"), py::arg("x"));
  m.def("correlation_pure", &correlation_pure, py::arg("state"), py::arg("xi"));
  m.def("chord_mixture", &chord_mixture, py::arg("ensemble"), py::arg("xi"));

  m.def(
      "chord_at",
      [](const Superposition& s, const py::array_t<double, py::array::c_style | py::array::forcecast>& xs) {
        const ChordField chord(s);
        const auto pts = points_from(xs);
        py::array_t<Complex> out(static_cast<py::ssize_t>(pts.size()));
        auto w = out.mutable_unchecked<1>();
        for (std::size_t k = 0; k < pts.size(); ++k) w(static_cast<py::ssize_t>(k)) = chord(pts[k]);
        return out;
      },
      py::arg("state"), py::arg("points"), "Chord function at an (n, 2) array of points.");
  m.def(
      "wigner_at",
      [](const Superposition& s, const py::array_t<double, py::array::c_style | py::array::forcecast>& xs) {
        const WignerField wigner{ChordField(s)};
        const auto pts = points_from(xs);
        py::array_t<double> out(static_cast<py::ssize_t>(pts.size()));
        auto w = out.mutable_unchecked<1>();
        for (std::size_t k = 0; k < pts.size(); ++k) w(static_cast<py::ssize_t>(k)) = wigner(pts[k]);
        return out;
      },
      py::arg("state"), py::arg("points"));

  py::class_<Window>(m, "Window")
      .def(py::init([](double p_min, double p_max, double q_min, double q_max) {
             return Window{p_min, p_max, q_min, q_max};
           }),
           py::arg("p_min"), py::arg("p_max"), py::arg("q_min"), py::arg("q_max"))
      .def_static("symmetric", &Window::symmetric)
      .def_readwrite("p_min", &Window::p_min)
      .def_readwrite("p_max", &Window::p_max)
      .def_readwrite("q_min", &Window::q_min)
      .def_readwrite("q_max", &Window::q_max)
      .def("contains", &Window::contains, py::arg("x"), py::arg("slack") = 0.0);

  py::enum_<FieldKind>(m, "FieldKind")
      .value("Chord", FieldKind::Chord)
      .value("Wigner", FieldKind::Wigner)
      .value("Correlation", FieldKind::Correlation)
      .value("Intensity", FieldKind::Intensity);

  py::class_<FieldGrid>(m, "FieldGrid")
      .def_property_readonly("window", &FieldGrid::window)
      .def_property_readonly("kind", &FieldGrid::kind)
      .def_property_readonly("shape", [](const FieldGrid& g) { return py::make_tuple(g.rows(), g.cols()); })
      .def_property_readonly("values", &grid_values)
      .def("point", &FieldGrid::point);

  m.def(
      "chord_grid",
      [](const Superposition& s, const Window& w, std::size_t rows, std::size_t cols, int threads) {
        const ChordField chord(s);
        return sample_grid(w, rows, cols, FieldKind::Chord, chord, threads);
      },
      py::arg("state"), py::arg("window"), py::arg("rows"), py::arg("cols"), py::arg("threads") = 1);
  m.def(
      "intensity_grid",
      [](const Superposition& s, const Window& w, std::size_t rows, std::size_t cols, int threads) {
        const ChordField chord(s);
        return sample_grid(
            w, rows, cols, FieldKind::Intensity, [&](const PhaseVector& xi) { return Complex(std::norm(chord(xi))); },
            threads);
      },
      py::arg("state"), py::arg("window"), py::arg("rows"), py::arg("cols"), py::arg("threads") = 1);
  m.def("fourier_2d", py::overload_cast<const FieldGrid&, double>(&fourier_2d));
  m.def("fourier_point", &fourier_point);
  m.def("require_adequate_window", &require_adequate_window, py::arg("grid"), py::arg("relative") = 1e-12);
  m.def("mixture_intensity", &mixture_intensity, py::arg("ensemble"), py::arg("window"), py::arg("rows"),
        py::arg("cols"), py::arg("threads") = 1);
  m.def("correlation_mixture", &correlation_mixture);

  py::class_<DiffractionModel>(m, "DiffractionModel")
      .def(py::init<double, std::vector<double>, std::vector<PhaseVector>>(), py::arg("hbar"), py::arg("weights"),
           py::arg("centers"))
      .def_static("from_superposition", &DiffractionModel::from_superposition)
      .def_property_readonly("weights", &DiffractionModel::weights)
      .def_property_readonly("centers", &DiffractionModel::centers);
  m.def("small_chord", &small_chord);

  py::enum_<Branch>(m, "Branch").value("Plus", Branch::Plus).value("Minus", Branch::Minus);

  py::class_<TriangleAngles>(m, "TriangleAngles")
      .def(py::init([](double t1, double t2, Branch b) { return TriangleAngles{t1, t2, b}; }), py::arg("theta1"),
           py::arg("theta2"), py::arg("branch") = Branch::Plus)
      .def_readwrite("theta1", &TriangleAngles::theta1)
      .def_readwrite("theta2", &TriangleAngles::theta2)
      .def_readwrite("branch", &TriangleAngles::branch);
  m.def("triangle_close", &triangle_close, py::arg("w1"), py::arg("w2"), py::arg("w3"), "Plus and minus branch angles.");
  m.def("closure_residual", &closure_residual);

  py::class_<IndexRange>(m, "IndexRange")
      .def(py::init([](int a, int b, int c, int d) { return IndexRange{a, b, c, d}; }), py::arg("k1_min") = -2,
           py::arg("k1_max") = 2, py::arg("k2_min") = -2, py::arg("k2_max") = 2)
      .def_static("square", &IndexRange::square);

  py::class_<LatticeNode>(m, "LatticeNode")
      .def_readonly("xi", &LatticeNode::xi)
      .def_readonly("k1", &LatticeNode::k1)
      .def_readonly("k2", &LatticeNode::k2)
      .def_readonly("sublattice", &LatticeNode::sublattice);

  py::class_<BlindSpotLattice>(m, "BlindSpotLattice")
      .def_readonly("basis", &BlindSpotLattice::basis)
      .def_readonly("offsets", &BlindSpotLattice::offsets)
      .def_readonly("angles", &BlindSpotLattice::angles)
      .def_readonly("nodes", &BlindSpotLattice::nodes);
  m.def("sublattice_nodes", &sublattice_nodes);
  m.def("hexagonal_lattice", &hexagonal_lattice, py::arg("model"), py::arg("range") = IndexRange{});
  m.def("first_shell", &first_shell);
  m.def("nearest_neighbor_spacing", &nearest_neighbor_spacing);

  py::class_<NewtonOptions>(m, "NewtonOptions")
      .def(py::init<>())
      .def_readwrite("tol", &NewtonOptions::tol)
      .def_readwrite("max_iter", &NewtonOptions::max_iter);

  py::class_<RefinedSpot>(m, "RefinedSpot")
      .def_readonly("xi", &RefinedSpot::xi)
      .def_readonly("residual", &RefinedSpot::residual)
      .def_readonly("iterations", &RefinedSpot::iterations)
      .def_readonly("seed", &RefinedSpot::seed)
      .def_readonly("lattice_index", &RefinedSpot::lattice_index);

  py::class_<SpotSearchOptions>(m, "SpotSearchOptions")
      .def(py::init<>())
      .def_readwrite("grid_step", &SpotSearchOptions::grid_step)
      .def_readwrite("seed_threshold", &SpotSearchOptions::seed_threshold)
      .def_readwrite("newton", &SpotSearchOptions::newton)
      .def_readwrite("threads", &SpotSearchOptions::threads);

  m.def("newton_refine", py::overload_cast<const Superposition&, const PhaseVector&, const NewtonOptions&>(&newton_refine),
        py::arg("state"), py::arg("seed"), py::arg("options") = NewtonOptions{});
  m.def("find_spots_generic", &find_spots_generic, py::arg("state"), py::arg("window"),
        py::arg("options") = SpotSearchOptions{});
  m.def("refine_lattice", &refine_lattice, py::arg("state"), py::arg("lattice"), py::arg("options") = NewtonOptions{});

  py::class_<IndexedSpot>(m, "IndexedSpot")
      .def(py::init([](PhaseVector xi, int k1, int k2) { return IndexedSpot{xi, k1, k2}; }), py::arg("xi"),
           py::arg("k1"), py::arg("k2"))
      .def_readwrite("xi", &IndexedSpot::xi)
      .def_readwrite("k1", &IndexedSpot::k1)
      .def_readwrite("k2", &IndexedSpot::k2);
  m.def("recover_centers", &recover_centers);

  py::class_<Coupling>(m, "Coupling")
      .def(py::init([](PhaseVector re, PhaseVector im) { return Coupling{re, im}; }), py::arg("re"),
           py::arg("im") = PhaseVector{})
      .def_readwrite("re", &Coupling::re)
      .def_readwrite("im", &Coupling::im);

  py::class_<LindbladModel>(m, "LindbladModel")
      .def(py::init<const Eigen::Matrix2d&, std::vector<Coupling>>(), py::arg("hamiltonian"), py::arg("couplings"))
      .def_static("position_momentum", &LindbladModel::position_momentum, py::arg("strength") = 1.0)
      .def_property_readonly("hamiltonian", &LindbladModel::hamiltonian)
      .def_property_readonly("couplings", &LindbladModel::couplings)
      .def("diffusion", &LindbladModel::diffusion);

  m.def("dissipation_coeff", &dissipation_coeff);
  m.def("propagator_matrix", &propagator_matrix);
  m.def(
      "decoherence_matrix",
      [](const LindbladModel& model, double t, double hbar, int steps) {
        return decoherence_matrix(model, t, hbar, steps).M;
      },
      py::arg("model"), py::arg("t"), py::arg("hbar"), py::arg("steps") = 200);
  m.def("evolved_chord", &evolved_chord, py::arg("state"), py::arg("model"), py::arg("xi"), py::arg("t"));
  m.def(
      "evolved_correlation_at",
      [](const Superposition& s, const LindbladModel& model,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& xs, double t) {
        const CorrelationField field(evolved_chord_field(s, model, t));
        const auto pts = points_from(xs);
        py::array_t<double> out(static_cast<py::ssize_t>(pts.size()));
        auto w = out.mutable_unchecked<1>();
        for (std::size_t k = 0; k < pts.size(); ++k) w(static_cast<py::ssize_t>(k)) = field(pts[k]);
        return out;
      },
      py::arg("state"), py::arg("model"), py::arg("points"), py::arg("t"),
      "Closed-form C(xi, t) at an (n, 2) array of points.");
  m.def("evolved_correlation", &evolved_correlation, py::arg("state"), py::arg("model"), py::arg("window"),
        py::arg("rows"), py::arg("cols"), py::arg("t"), py::arg("threads") = 1);

  py::class_<ScanLine>(m, "ScanLine")
      .def(py::init([](PhaseVector point, PhaseVector direction) { return ScanLine{point, direction}; }),
           py::arg("point"), py::arg("direction"))
      .def_readwrite("point", &ScanLine::point)
      .def_readwrite("direction", &ScanLine::direction)
      .def("at", &ScanLine::at)
      .def("coordinate", &ScanLine::coordinate);

  py::class_<LineScanSeries>(m, "LineScanSeries")
      .def_readonly("line", &LineScanSeries::line)
      .def_readonly("samples", &LineScanSeries::samples)
      .def_readonly("times", &LineScanSeries::times)
      .def_readonly("values", &LineScanSeries::values);
  m.def("scan_line", &scan_line, py::arg("state"), py::arg("model"), py::arg("line"), py::arg("s_min"),
        py::arg("s_max"), py::arg("samples"), py::arg("times"), py::arg("threads") = 1);

  py::class_<LiftingSample>(m, "LiftingSample")
      .def_readonly("t", &LiftingSample::t)
      .def_readonly("delta", &LiftingSample::delta)
      .def_readonly("envelope", &LiftingSample::envelope)
      .def("relative", &LiftingSample::relative);
  py::class_<LiftingResult>(m, "LiftingResult")
      .def_readonly("tau_l", &LiftingResult::tau_l)
      .def_readonly("spot", &LiftingResult::spot)
      .def_readonly("delta_series", &LiftingResult::delta_series);
  m.def("lifting_time", &lifting_time, py::arg("series"), py::arg("spot"), py::arg("epsilon") = 1e-3,
        py::arg("resampler") = LineResampler{});

  py::enum_<PositivityMethod>(m, "PositivityMethod")
      .value("Analytic", PositivityMethod::Analytic)
      .value("Grid", PositivityMethod::Grid);
  py::class_<PositivityOptions>(m, "PositivityOptions")
      .def(py::init<>())
      .def_readwrite("t_max", &PositivityOptions::t_max)
      .def_readwrite("tol", &PositivityOptions::tol)
      .def_readwrite("method", &PositivityOptions::method)
      .def_readwrite("window", &PositivityOptions::window)
      .def_readwrite("rows", &PositivityOptions::rows)
      .def_readwrite("cols", &PositivityOptions::cols)
      .def_readwrite("threads", &PositivityOptions::threads);
  m.def("positivity_time", &positivity_time, py::arg("state"), py::arg("model"),
        py::arg("options") = PositivityOptions{});
  m.def("min_relative_wigner", &min_relative_wigner, py::arg("state"), py::arg("model"), py::arg("t"),
        py::arg("threads") = 1);

  py::class_<LiftingRatioOptions>(m, "LiftingRatioOptions")
      .def(py::init<>())
      .def_readwrite("line", &LiftingRatioOptions::line)
      .def_readwrite("span", &LiftingRatioOptions::span)
      .def_readwrite("samples", &LiftingRatioOptions::samples)
      .def_readwrite("epsilon", &LiftingRatioOptions::epsilon)
      .def_readwrite("t_start", &LiftingRatioOptions::t_start)
      .def_readwrite("positivity", &LiftingRatioOptions::positivity)
      .def_readwrite("threads", &LiftingRatioOptions::threads);
  py::class_<LiftingRatio>(m, "LiftingRatio")
      .def_readonly("tau_l", &LiftingRatio::tau_l)
      .def_readonly("t_p", &LiftingRatio::t_p)
      .def_readonly("ratio", &LiftingRatio::ratio)
      .def_readonly("area", &LiftingRatio::area)
      .def_readonly("spot", &LiftingRatio::spot);
  m.def("triangle_area", &triangle_area);
  m.def("blind_spot_on_line", &blind_spot_on_line);
  m.def("lifting_ratio", &lifting_ratio, py::arg("state"), py::arg("model"),
        py::arg("options") = LiftingRatioOptions{});
}
