#include <doctest.h>

#include <cmath>

#include "blindspots/spots.hpp"
#include "support.hpp"

using namespace blindspots;

namespace {

FieldGrid chord_grid(const Superposition& s, const Window& w, std::size_t n) {
  const ChordField chord(s);
  return sample_grid(w, n, n, FieldKind::Chord, [&](const PhaseVector& xi) { return chord(xi); });
}

}  // namespace

TEST_CASE("a linear field gives one straight contour") {
  const FieldGrid g = sample_grid(Window::symmetric(1.0, 1.0), 41, 41, FieldKind::Chord,
                                  [](const PhaseVector& x) { return Complex(0.3 * x.p - 0.7 * x.q + 0.05, 0.0); });
  const auto lines = trace_nodal_lines(g, ChordPart::Real);
  REQUIRE(lines.polylines.size() == 1);
  for (const auto& v : lines.polylines[0]) CHECK(std::abs(0.3 * v.p - 0.7 * v.q + 0.05) < 1e-12);
  CHECK(distance_to_lines(lines, {0.0, 0.05 / 0.7}) < 1e-12);
  const double n = std::hypot(0.3, 0.7);
  CHECK(distance_to_lines(lines, {0.2 * 0.3 / n, 0.05 / 0.7 - 0.2 * 0.7 / n}) == doctest::Approx(0.2));
  CHECK(trace_nodal_lines(g, ChordPart::Imaginary).polylines.empty());
}

TEST_CASE("a circular contour closes") {
  const FieldGrid g = sample_grid(Window::symmetric(1.0, 1.0), 81, 81, FieldKind::Chord,
                                  [](const PhaseVector& x) { return Complex(0.0, x.norm2() - 0.36); });
  const auto lines = trace_nodal_lines(g, ChordPart::Imaginary);
  REQUIRE(lines.polylines.size() == 1);
  const auto& loop = lines.polylines[0];
  CHECK(loop.size() > 50);
  CHECK((loop.front() - loop.back()).norm() < 1e-12);
  for (const auto& v : loop) CHECK(std::abs(v.norm() - 0.6) < 1e-3);
}

TEST_CASE("nodal lines of the three-state chord") {
  const auto s = testing::oblique_triplet();
  const Window w = Window::symmetric(0.5, 0.5);
  const FieldGrid g = chord_grid(s, w, 201);
  const double diagonal = std::hypot(g.step_p(), g.step_q());
  const auto re = trace_nodal_lines(g, ChordPart::Real);
  const auto im = trace_nodal_lines(g, ChordPart::Imaginary);
  CHECK(!re.polylines.empty());
  CHECK(!im.polylines.empty());

  // χ(0) = 1: Im vanishes at the origin, Re does not.
  CHECK(distance_to_lines(im, {}) < diagonal);
  CHECK(distance_to_lines(re, {}) > diagonal);

  const auto spots = find_spots_generic(s, w);
  REQUIRE(!spots.empty());
  for (const auto& spot : spots) {
    CHECK(distance_to_lines(re, spot.xi) < diagonal);
    CHECK(distance_to_lines(im, spot.xi) < diagonal);
  }
}
