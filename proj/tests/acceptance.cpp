// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "blindspots/core.hpp"
#include "blindspots/decoherence.hpp"
#include "blindspots/error.hpp"
#include "blindspots/grid.hpp"
#include "blindspots/spots.hpp"
#include "support.hpp"

using namespace blindspots;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("threw ") + e.what()};
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (elapsed > budget_s) {
    out.pass = false;
    out.detail += "; over the " + num(budget_s) + " s budget";
  }
  if (!out.pass) ++failures;
  std::printf("%s %2d %s: %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", id, name, out.detail.c_str(), elapsed);
  std::fflush(stdout);
}

// Criterion 1
Outcome oracle_equivalence() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> hbar_dist(0.05, 0.5);
  std::uniform_int_distribution<int> size_dist(1, 4);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto s = testing::random_state(rng, static_cast<std::size_t>(size_dist(rng)), hbar_dist(rng));
    for (int j = 0; j < 3; ++j) {
      const PhaseVector xi = testing::random_vector(rng, 3.0);
      worst = std::max(worst, std::abs(chord_exact(s, xi) - chord_quadrature(s, xi)));
    }
  }
  return {worst < 1e-8, "max |exact - quadrature| = " + num(worst) + " over 300 chords (tol 1e-8)"};
}

// Criterion 2
Outcome fourier_invariance() {
  const auto s = testing::oblique_triplet();
  const ChordField chord(s);
  const FieldGrid c = sample_grid(Window::symmetric(4.0, 4.0), 321, 321, FieldKind::Intensity,
                                  [&](const PhaseVector& xi) { return Complex(std::norm(chord(xi)), 0.0); });
  require_adequate_window(c);
  const FieldGrid f = fourier_2d(c, s.hbar());
  double worst = 0.0;
  for (std::size_t k = 0; k < c.values().size(); ++k) {
    worst = std::max(worst, std::abs(f.values()[k] - c.values()[k]));
  }
  const double rel = worst / c.max_abs();
  return {rel < 1e-6, "max |FT{C} - C| / max C = " + num(rel) + " on 321x321 (tol 1e-6)"};
}

// Criterion 3
Outcome parity() {
  std::mt19937_64 rng(7);
  double even = 0.0, odd = 0.0, origin = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto s = testing::random_state(rng, 1 + static_cast<std::size_t>(k % 4), 0.1);
    const ChordField chord(s);
    const Complex at0 = chord({});
    origin = std::max({origin, std::abs(at0.imag()), std::abs(at0.real() - 1.0)});
    for (int j = 0; j < 20; ++j) {
      const PhaseVector xi = testing::random_vector(rng, 3.0);
      const Complex a = chord(xi), b = chord(-1.0 * xi);
      even = std::max(even, std::abs(a.real() - b.real()));
      odd = std::max(odd, std::abs(a.imag() + b.imag()));
    }
  }
  const PhaseVector eta{1.4, 0.9};
  const auto cat = shift_origin(testing::cat(0.1, eta), 0.5 * eta);
  const ChordField chord(cat);
  double max_re = 0.0, max_im = 0.0;
  for (int i = -60; i <= 60; ++i) {
    for (int j = -60; j <= 60; ++j) {
      const Complex v = chord({0.05 * i, 0.05 * j});
      max_re = std::max(max_re, std::abs(v.real()));
      max_im = std::max(max_im, std::abs(v.imag()));
    }
  }
  const bool pass = even < 1e-12 && odd < 1e-12 && origin < 1e-12 && max_im < 1e-10 * max_re;
  return {pass, "even " + num(even) + ", odd " + num(odd) + ", origin " + num(origin) + " (tol 1e-12); cat Im/Re " +
                    num(max_im / max_re) + " (tol 1e-10)"};
}

// Criterion 4
Outcome hexagonal_lattice_check() {
  const auto s = testing::wide_triplet();
  const auto model = DiffractionModel::from_superposition(s);
  const auto lattice = hexagonal_lattice(model, IndexRange::square(3));
  const double spacing = nearest_neighbor_spacing(lattice);
  const auto shell = first_shell(lattice, s.hbar(), model);
  double residual = 0.0, displacement = 0.0;
  Window box{1e300, -1e300, 1e300, -1e300};
  std::vector<PhaseVector> refined_shell;
  for (const auto& node : shell) {
    const auto spot = newton_refine(s, node.xi);
    residual = std::max(residual, spot.residual);
    displacement = std::max(displacement, (spot.xi - node.xi).norm() / spacing);
    refined_shell.push_back(spot.xi);
    box.p_min = std::min(box.p_min, spot.xi.p);
    box.p_max = std::max(box.p_max, spot.xi.p);
    box.q_min = std::min(box.q_min, spot.xi.q);
    box.q_max = std::max(box.q_max, spot.xi.q);
  }
  box.p_min -= 0.5 * spacing;
  box.p_max += 0.5 * spacing;
  box.q_min -= 0.5 * spacing;
  box.q_max += 0.5 * spacing;

  std::vector<PhaseVector> expected;
  for (const auto& spot : refine_lattice(s, lattice)) {
    if (!box.contains(spot.xi)) continue;
    if (std::none_of(expected.begin(), expected.end(), [&](const PhaseVector& x) { return (x - spot.xi).norm() < 1e-9; })) {
      expected.push_back(spot.xi);
    }
  }
  const auto found = find_spots_generic(s, box);
  const auto covered = [](const std::vector<PhaseVector>& from, const auto& in, auto get) {
    return std::all_of(from.begin(), from.end(), [&](const PhaseVector& x) {
      return std::any_of(in.begin(), in.end(), [&](const auto& y) { return (x - get(y)).norm() < 1e-9; });
    });
  };
  const auto id = [](const PhaseVector& v) { return v; };
  const auto xi_of = [](const RefinedSpot& r) { return r.xi; };
  std::vector<PhaseVector> found_xi;
  for (const auto& f : found) found_xi.push_back(f.xi);
  const bool same = found.size() == expected.size() && covered(expected, found, xi_of) && covered(found_xi, expected, id);
  const bool shell_found = covered(refined_shell, found, xi_of);
  const bool pass = shell.size() >= 6 && residual < 1e-12 && displacement < 0.05 && same && shell_found;
  return {pass, std::to_string(shell.size()) + " shell nodes, max |chi| " + num(residual) +
                    " (tol 1e-12), max shift " + num(displacement) + " spacings (tol 0.05), generic search " +
                    std::to_string(found.size()) + "/" + std::to_string(expected.size()) +
                    (same && shell_found ? " matching" : " mismatching") + " within 1e-9"};
}

// Criterion 5
Outcome cat_pathology() {
  const double hbar = 0.075;
  const auto unequal = testing::cat(hbar, {1.5, 0.5}, std::sqrt(0.6), std::sqrt(0.4));
  const ChordField chord(unequal);
  double lowest = 1.0;
  for (int i = -100; i <= 100; ++i) {
    for (int j = -100; j <= 100; ++j) lowest = std::min(lowest, std::norm(chord({0.002 * i, 0.002 * j})));
  }

  const PhaseVector eta{2.5, 1.5};
  const auto balanced = shift_origin(testing::cat(hbar, eta), 0.5 * eta);
  const PhaseVector along = (1.0 / eta.norm()) * eta;
  const PhaseVector base = (std::numbers::pi * hbar / eta.norm2()) * PhaseVector{-eta.q, eta.p};
  std::mt19937_64 rng(11);
  std::normal_distribution<double> jitter(0.0, 0.02);
  std::vector<PhaseVector> zeros;
  for (int k = 0; k < 40; ++k) {
    const PhaseVector seed = base + (0.01 * (k - 20)) * along + PhaseVector{jitter(rng), jitter(rng)};
    const auto spot = newton_refine(balanced, seed);
    if (std::none_of(zeros.begin(), zeros.end(), [&](const PhaseVector& x) { return (x - spot.xi).norm() < 1e-6; })) {
      zeros.push_back(spot.xi);
    }
  }
  // Collinearity: every zero has the same η∧ξ; extent along the line.
  double off_line = 0.0, extent = 0.0;
  for (const auto& x : zeros) {
    off_line = std::max(off_line, std::abs(skew(eta, x) - skew(eta, zeros.front())) / eta.norm());
    for (const auto& y : zeros) extent = std::max(extent, (x - y).norm());
  }
  const bool pass = lowest >= 0.02 && zeros.size() >= 10 && off_line < 1e-6 && extent > 0.1;
  return {pass, "unequal min |chi|^2 " + num(lowest) + " (>= 0.02); balanced: " + std::to_string(zeros.size()) +
                    " distinct zeros, off-line " + num(off_line) + ", extent " + num(extent)};
}

// Criterion 6
Outcome triangle_closure() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  int closed = 0, refused = 0, wrong = 0;
  double worst = 0.0;
  while (closed < 1000) {
    const double w0 = u(rng), w1 = u(rng), w2 = u(rng);
    const double longest = std::max({w0, w1, w2});
    if (longest >= w0 + w1 + w2 - longest) {
      try {
        triangle_close(w0, w1, w2);
        ++wrong;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::NoClosure) {
          ++refused;
        } else {
          ++wrong;
        }
      }
      continue;
    }
    const auto [plus, minus] = triangle_close(w0, w1, w2);
    worst = std::max({worst, closure_residual(w0, w1, w2, plus), closure_residual(w0, w1, w2, minus)});
    ++closed;
  }
  return {worst < 1e-12 && wrong == 0, "max residual " + num(worst) + " over 1000 triples (tol 1e-12); " +
                                           std::to_string(refused) + " failing triples raised NoClosure, " +
                                           std::to_string(wrong) + " did not"};
}

// Criterion 7
Outcome pde_anchor() {
  const auto s = testing::oblique_triplet();
  const auto pq = LindbladModel::position_momentum();
  const LindbladModel rotating(0.5 * Eigen::Matrix2d::Identity(), pq.couplings());
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (const auto& model : {pq, rotating}) {
    for (double t : {0.02, 0.1, 0.5}) {
      const double h = 1e-5;
      const ChordField now = evolved_chord_field(s, model, t);
      const ChordField ahead = evolved_chord_field(s, model, t + h);
      const ChordField behind = evolved_chord_field(s, model, t - h);
      double residual = 0.0, scale = 0.0;
      for (int k = 0; k < 300; ++k) {
        const PhaseVector xi = testing::random_vector(rng, 1.0);
        const Complex rhs = master_equation_rhs(now, model, xi);
        residual = std::max(residual, std::abs((ahead(xi) - behind(xi)) / (2.0 * h) - rhs));
        scale = std::max(scale, std::abs(rhs));
      }
      worst = std::max(worst, residual / scale);
    }
  }
  return {worst < 1e-6, "max relative residual " + num(worst) + " for H=0 and H=I/2 (tol 1e-6)"};
}

// Criterion 8
Outcome zero_lifting() {
  const auto s = testing::corner_triplet(5.0);
  const auto pq = LindbladModel::position_momentum();
  const ScanLine line{{0.0, 0.0}, {-1.0, 2.0}};
  const PhaseVector spot = blind_spot_on_line(s, line);

  const std::vector<double> early{0.0, 2e-4, 5e-4, 1e-3, 2e-3, 4e-3};
  std::vector<double> grid_values;
  for (double t : early) grid_values.push_back(evolved_correlation_points(s, pq, {spot}, t).front());
  const double closed0 = CorrelationField(evolved_chord_field(s, pq, 0.0))(spot);
  bool increasing = true;
  for (std::size_t k = 1; k < grid_values.size(); ++k) increasing = increasing && grid_values[k] > grid_values[k - 1];

  const double s_spot = line.coordinate(spot);
  const std::vector<double> times{0.0, 1e-3, 2e-3, 4e-3, 8e-3, 1.6e-2, 3.2e-2};
  const auto series = scan_line(s, pq, line, 2.5 * s_spot, -0.5 * s_spot, 241, times);
  const auto result = lifting_time(series, spot);
  bool nonincreasing = true;
  for (std::size_t k = 1; k < result.delta_series.size(); ++k) {
    nonincreasing = nonincreasing && result.delta_series[k].delta <= result.delta_series[k - 1].delta;
  }
  const bool pass = grid_values.front() < 1e-10 && closed0 < 1e-10 && increasing && nonincreasing;
  return {pass, "C(xi0,0) = " + num(grid_values.front()) + " grid, " + num(closed0) +
                    " closed form (tol 1e-10); C(xi0,t) " + (increasing ? "strictly increasing" : "NOT increasing") +
                    " over 5 times; Delta " + (nonincreasing ? "nonincreasing" : "NOT nonincreasing") +
                    " over " + std::to_string(times.size()) + " times"};
}

// Criterion 9
Outcome time_scales() {
  const auto pq = LindbladModel::position_momentum();
  const auto pq2 = LindbladModel::position_momentum(2.0);
  std::vector<LiftingRatio> base, doubled;
  for (double d : {3.0, 5.0, 8.0}) {
    const auto s = testing::corner_triplet(d);
    base.push_back(lifting_ratio(s, pq));
    doubled.push_back(lifting_ratio(s, pq2));
  }
  bool ordered = true, decreasing = true;
  double lo = 1e300, hi = 0.0, shift = 0.0;
  std::string values;
  for (std::size_t k = 0; k < base.size(); ++k) {
    ordered = ordered && base[k].tau_l < base[k].t_p;
    if (k > 0) decreasing = decreasing && base[k].tau_l < base[k - 1].tau_l;
    lo = std::min(lo, base[k].ratio);
    hi = std::max(hi, base[k].ratio);
    shift = std::max(shift, std::abs(doubled[k].ratio / base[k].ratio - 1.0));
    values += (k ? ", " : "") + std::string("A=") + num(base[k].area) + ": tau_l " + num(base[k].tau_l) + ", t_p " +
              num(base[k].t_p) + ", ratio " + num(base[k].ratio);
  }
  const bool pass = ordered && decreasing && hi / lo < 3.0 && shift < 0.2;
  return {pass, values + "; ratio spread " + num(hi / lo) + " (< 3), doubled couplings shift " + num(shift) +
                    " (< 0.2)" + (ordered ? "" : "; tau_l >= t_p") + (decreasing ? "" : "; tau_l not decreasing")};
}

// Criterion 10
Outcome inverse_round_trip() {
  double worst = 0.0;
  for (const auto& s : {testing::wide_triplet(), testing::corner_triplet(5.0)}) {
    const auto model = DiffractionModel::from_superposition(s);
    const auto lattice = hexagonal_lattice(model, IndexRange::square(2));
    for (const auto& angles : {lattice.angles.first, lattice.angles.second}) {
      std::vector<LatticeNode> family;
      for (const auto& n : lattice.nodes) {
        if (n.sublattice == angles.branch) family.push_back(n);
      }
      // Two nodes whose chords are not parallel.
      const LatticeNode& a = family.front();
      const LatticeNode& b = *std::find_if(family.begin(), family.end(),
                                           [&](const LatticeNode& n) { return std::abs(skew(a.xi, n.xi)) > 1e-6; });
      const auto [e1, e2] = recover_centers(angles, {a.xi, a.k1, a.k2}, {b.xi, b.k1, b.k2}, s.hbar());
      worst = std::max({worst, (e1 - model.centers()[1]).norm(), (e2 - model.centers()[2]).norm()});
    }
  }
  return {worst < 1e-9, "max center error " + num(worst) + " over 2 geometries x 2 sublattices (tol 1e-9)"};
}

// Criterion 11
Outcome mixture_washout() {
  const auto s = testing::oblique_triplet();
  const auto spots = find_spots_generic(s, Window::symmetric(0.3, 0.3));
  const PhaseVector spot = std::min_element(spots.begin(), spots.end(), [](const RefinedSpot& a, const RefinedSpot& b) {
                             return a.xi.norm() < b.xi.norm();
                           })->xi;
  const double pure = correlation_pure(s, spot);
  const auto ensemble = MixedEnsemble::from_superposition(s);
  const FieldGrid intensity = mixture_intensity(ensemble, Window::symmetric(3.0, 3.0), 241, 241);
  const FieldGrid mixed = correlation_mixture(ensemble, intensity);
  std::vector<double> w;
  std::vector<PhaseVector> eta;
  for (const auto& t : ensemble.terms()) {
    w.push_back(t.weight);
    eta.push_back(t.state.center);
  }
  double grid_error = 0.0;
  for (std::size_t i = 0; i < mixed.rows(); i += 8) {
    for (std::size_t j = 0; j < mixed.cols(); j += 8) {
      const double expected = testing::oracle::mixture_correlation(w, eta, mixed.point(i, j), s.hbar());
      grid_error = std::max(grid_error, std::abs(mixed.at(i, j).real() - expected));
    }
  }
  // The spot is off the grid: same transform, evaluated there directly.
  const double at_spot = fourier_point(intensity, s.hbar(), spot).real();
  const double oracle = testing::oracle::mixture_correlation(w, eta, spot, s.hbar());
  const bool pass = at_spot > 1e-3 && pure < 1e-12 && std::abs(at_spot - oracle) < 1e-8 && grid_error < 1e-8;
  return {pass, "mixture C = " + num(at_spot) + " (> 1e-3, closed form " + num(oracle) + "), pure C = " + num(pure) +
                    " (< 1e-12) at xi0 = (" + num(spot.p) + ", " + num(spot.q) + "); grid vs closed form " +
                    num(grid_error)};
}

}  // namespace

int main() {
  criterion(1, "oracle equivalence", 60, oracle_equivalence);
  criterion(2, "Fourier invariance", 120, fourier_invariance);
  criterion(3, "parity invariants", 60, parity);
  criterion(4, "hexagonal lattice", 60, hexagonal_lattice_check);
  criterion(5, "cat pathology", 60, cat_pathology);
  criterion(6, "triangle closure", 60, triangle_closure);
  criterion(7, "master equation anchor", 60, pde_anchor);
  criterion(8, "zero lifting", 300, zero_lifting);
  criterion(9, "time-scale ordering and scaling", 900, time_scales);
  criterion(10, "inverse round trip", 60, inverse_round_trip);
  criterion(11, "mixture washout", 60, mixture_washout);
  std::printf("%s: %d of 11 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
