#include "blindspots/spots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <tuple>

#include "blindspots/error.hpp"

namespace blindspots {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a;
}

bool lexicographic_less(const PhaseVector& a, const PhaseVector& b) {
  return std::tie(a.p, a.q) < std::tie(b.p, b.q);
}

/// Solves [[a, b], [c, d]] x = r.
PhaseVector solve2(double a, double b, double c, double d, double r1, double r2) {
  const double det = a * d - b * c;
  return {(d * r1 - b * r2) / det, (a * r2 - c * r1) / det};
}

}  // namespace

DiffractionModel::DiffractionModel(double hbar, std::vector<double> weights, std::vector<PhaseVector> centers)
    : hbar_(hbar), weights_(std::move(weights)), centers_(std::move(centers)) {
  if (!(hbar_ > 0.0) || !std::isfinite(hbar_)) throw Error(ErrorCode::InvalidArgument, "hbar must be positive");
  if (weights_.empty() || weights_.size() != centers_.size()) {
    throw Error(ErrorCode::InvalidArgument, "weights and centers must be non-empty and of equal length");
  }
  CompensatedSum total;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidArgument, "weights must be nonnegative");
    total.add(w);
  }
  if (std::abs(total.value() - 1.0) > 1e-12) throw Error(ErrorCode::InvalidArgument, "weights must sum to 1");
  if (centers_.front() != PhaseVector{}) throw Error(ErrorCode::InvalidArgument, "first center must be the origin");
}

DiffractionModel DiffractionModel::from_superposition(const Superposition& state) {
  CompensatedSum total;
  for (const auto& t : state.terms()) total.add(std::norm(t.amplitude));
  std::vector<double> weights;
  std::vector<PhaseVector> centers;
  const PhaseVector origin = state[0].state.center;
  for (const auto& t : state.terms()) {
    weights.push_back(std::norm(t.amplitude) / total.value());
    centers.push_back(t.state.center - origin);
  }
  return DiffractionModel(state.hbar(), std::move(weights), std::move(centers));
}

Complex small_chord(const DiffractionModel& model, const PhaseVector& xi) {
  CompensatedComplexSum sum;
  for (std::size_t n = 0; n < model.size(); ++n) {
    sum.add(model.weights()[n] * std::exp(kI * skew(model.centers()[n], xi) / model.hbar()));
  }
  return sum.value();
}

std::string_view to_string(Branch branch) noexcept { return branch == Branch::Plus ? "plus" : "minus"; }

double closure_residual(double w0, double w1, double w2, const TriangleAngles& angles) {
  return std::abs(w0 + w1 * std::exp(kI * angles.theta1) + w2 * std::exp(kI * angles.theta2));
}

std::pair<TriangleAngles, TriangleAngles> triangle_close(double w0, double w1, double w2) {
  for (double w : {w0, w1, w2}) {
    if (!(w > 0.0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidArgument, "triangle sides must be positive");
  }
  const double longest = std::max({w0, w1, w2});
  if (longest >= (w0 + w1 + w2) - longest) {
    throw Error(ErrorCode::NoClosure, "largest weight is not shorter than the sum of the others");
  }
  // Interior angle between the first two phasors, opposite side w2.
  const double cos_gamma = std::clamp((w0 * w0 + w1 * w1 - w2 * w2) / (2.0 * w0 * w1), -1.0, 1.0);
  const double gamma = std::acos(cos_gamma);

  TriangleAngles plus;
  plus.branch = Branch::Plus;
  plus.theta1 = std::numbers::pi + gamma;
  plus.theta2 = wrap_angle(std::arg(-(w0 + w1 * std::exp(kI * plus.theta1))));

  TriangleAngles minus;
  minus.branch = Branch::Minus;
  minus.theta1 = std::numbers::pi - gamma;
  minus.theta2 = wrap_angle(kTwoPi - plus.theta2);
  return {plus, minus};
}

std::vector<LatticeNode> sublattice_nodes(const TriangleAngles& angles, const PhaseVector& eta1, const PhaseVector& eta2,
                                          double hbar, const IndexRange& range) {
  if (std::abs(skew(eta1, eta2)) < 1e-12 * eta1.norm() * eta2.norm() || eta1.norm() == 0.0 || eta2.norm() == 0.0) {
    throw Error(ErrorCode::DegenerateGeometry, "centers are collinear with the origin");
  }
  // η∧ξ = η_p ξ_q − η_q ξ_p, linear in ξ.
  std::vector<LatticeNode> nodes;
  for (int k1 = range.k1_min; k1 <= range.k1_max; ++k1) {
    for (int k2 = range.k2_min; k2 <= range.k2_max; ++k2) {
      const double r1 = hbar * (angles.theta1 + kTwoPi * k1);
      const double r2 = hbar * (angles.theta2 + kTwoPi * k2);
      nodes.push_back({solve2(-eta1.q, eta1.p, -eta2.q, eta2.p, r1, r2), k1, k2, angles.branch});
    }
  }
  return nodes;
}

BlindSpotLattice hexagonal_lattice(const DiffractionModel& model, const IndexRange& range) {
  if (model.size() != 3) {
    throw Error(ErrorCode::WrongArity, "lattice needs exactly three terms, got " + std::to_string(model.size()));
  }
  const auto& w = model.weights();
  const PhaseVector eta1 = model.centers()[1];
  const PhaseVector eta2 = model.centers()[2];
  const double hbar = model.hbar();

  BlindSpotLattice lattice;
  lattice.angles = triangle_close(w[0], w[1], w[2]);
  lattice.index_range = range;
  auto plus = sublattice_nodes(lattice.angles.first, eta1, eta2, hbar, range);
  auto minus = sublattice_nodes(lattice.angles.second, eta1, eta2, hbar, range);

  const auto locate = [&](double r1, double r2) { return solve2(-eta1.q, eta1.p, -eta2.q, eta2.p, r1, r2); };
  lattice.basis = {locate(hbar * kTwoPi, 0.0), locate(0.0, hbar * kTwoPi)};
  lattice.offsets = {locate(hbar * lattice.angles.first.theta1, hbar * lattice.angles.first.theta2),
                     locate(hbar * lattice.angles.second.theta1, hbar * lattice.angles.second.theta2)};

  lattice.nodes = std::move(plus);
  lattice.nodes.insert(lattice.nodes.end(), minus.begin(), minus.end());
  std::sort(lattice.nodes.begin(), lattice.nodes.end(), [](const LatticeNode& a, const LatticeNode& b) {
    return std::tie(a.k1, a.k2, a.sublattice) < std::tie(b.k1, b.k2, b.sublattice);
  });
  return lattice;
}

std::vector<LatticeNode> first_shell(const BlindSpotLattice& lattice, double hbar, const DiffractionModel& model) {
  const PhaseVector eta1 = model.centers().at(1);
  const PhaseVector eta2 = model.centers().at(2);
  std::vector<LatticeNode> shell;
  for (const auto& node : lattice.nodes) {
    const double phi1 = skew(eta1, node.xi) / hbar;
    const double phi2 = skew(eta2, node.xi) / hbar;
    if (std::abs(phi1) < kTwoPi && std::abs(phi2) < kTwoPi && std::abs(phi1 - phi2) < kTwoPi) shell.push_back(node);
  }
  return shell;
}

double nearest_neighbor_spacing(const BlindSpotLattice& lattice) {
  double best = std::numeric_limits<double>::infinity();
  const auto& nodes = lattice.nodes;
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      const double d = (nodes[a].xi - nodes[b].xi).norm();
      if (d > 0.0) best = std::min(best, d);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Newton refinement

std::array<double, 4> chord_jacobian(const ChordField& chord, const PhaseVector& xi) {
  const auto [value, grad] = chord.value_and_gradient(xi);
  (void)value;
  return {grad.first.real(), grad.second.real(), grad.first.imag(), grad.second.imag()};
}

RefinedSpot newton_refine(const Superposition& state, const PhaseVector& seed, const NewtonOptions& options) {
  return newton_refine(ChordField(state), seed, options);
}

RefinedSpot newton_refine(const ChordField& chord, const PhaseVector& seed, const NewtonOptions& options) {
  if (!(options.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  if (!seed.is_finite()) throw Error(ErrorCode::InvalidArgument, "seed must be finite");

  PhaseVector x = seed;
  auto [value, grad] = chord.value_and_gradient(x);
  for (int iter = 0;; ++iter) {
    const double residual = std::abs(value);
    const double envelope = chord.envelope(x);
    if (envelope < 1e-300) break;
    if (residual <= options.tol * std::min(1.0, envelope)) {
      return RefinedSpot{x, residual, iter, seed, std::nullopt};
    }
    if (iter >= options.max_iter) break;

    // Pseudo-inverse of J = [[Re ∂p, Re ∂q], [Im ∂p, Im ∂q]] via the
    // eigen-decomposition of JᵀJ.
    const double a = grad.first.real(), b = grad.second.real();
    const double c = grad.first.imag(), d = grad.second.imag();
    const double g11 = a * a + c * c, g12 = a * b + c * d, g22 = b * b + d * d;
    const double tr = g11 + g22;
    const double disc = std::sqrt(std::max(0.0, 0.25 * (g11 - g22) * (g11 - g22) + g12 * g12));
    const double lam_max = 0.5 * tr + disc;
    const double lam_min = std::max(0.0, (g11 * g22 - g12 * g12) / std::max(lam_max, 1e-300));
    if (!(lam_max > 1e-300) || !std::isfinite(lam_max)) {
      throw Error(ErrorCode::SingularJacobian, "vanishing Jacobian at iteration " + std::to_string(iter));
    }
    // Unit eigenvector of the largest eigenvalue.
    double vx = g12, vy = lam_max - g11;
    if (std::hypot(vx, vy) < 1e-300) {
      vx = lam_max - g22;
      vy = g12;
    }
    if (std::hypot(vx, vy) < 1e-300) {
      vx = 1.0;
      vy = 0.0;
    }
    const double vn = std::hypot(vx, vy);
    vx /= vn;
    vy /= vn;
    const double ux = -vy, uy = vx;
    // Jᵀ F projected onto the eigenbasis, divided by the eigenvalues.
    const double fr = value.real(), fi = value.imag();
    const double jtf_x = a * fr + c * fi, jtf_y = b * fr + d * fi;
    PhaseVector step{};
    const double along_v = (vx * jtf_x + vy * jtf_y) / lam_max;
    step += PhaseVector{vx, vy} * along_v;
    if (lam_min > 1e-20 * lam_max) {
      const double along_u = (ux * jtf_x + uy * jtf_y) / lam_min;
      step += PhaseVector{ux, uy} * along_u;
    }
    step = -step;

    double lambda = 1.0;
    PhaseVector trial = x + step;
    auto trial_eval = chord.value_and_gradient(trial);
    for (int halvings = 0; halvings < 40 && std::abs(trial_eval.first) > residual; ++halvings) {
      lambda *= 0.5;
      trial = x + lambda * step;
      trial_eval = chord.value_and_gradient(trial);
    }
    x = trial;
    value = trial_eval.first;
    grad = trial_eval.second;
  }
  throw Error(ErrorCode::NoConvergence, "Newton iteration from seed (" + std::to_string(seed.p) + ", " +
                                            std::to_string(seed.q) + ") did not converge");
}

std::vector<RefinedSpot> refine_lattice(const Superposition& state, const BlindSpotLattice& lattice,
                                        const NewtonOptions& options) {
  const ChordField chord(state);
  std::vector<RefinedSpot> spots;
  for (const auto& node : lattice.nodes) {
    try {
      RefinedSpot spot = newton_refine(chord, node.xi, options);
      spot.lattice_index = node;
      spots.push_back(spot);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoConvergence && e.code() != ErrorCode::SingularJacobian) throw;
    }
  }
  return spots;
}

std::vector<RefinedSpot> find_spots_generic(const Superposition& state, const Window& window,
                                            const SpotSearchOptions& options) {
  const ChordField chord(state);
  double step = options.grid_step;
  if (!(step > 0.0)) {
    // Eight samples per period of the finest interference fringe.
    double separation = 0.0;
    for (const auto& a : state.terms()) {
      for (const auto& b : state.terms()) separation = std::max(separation, (a.state.center - b.state.center).norm());
    }
    step = std::sqrt(state.hbar()) / 10.0;
    if (separation > 0.0) step = std::min(step, 2.0 * std::numbers::pi * state.hbar() / (8.0 * separation));
  }
  const auto rows = static_cast<std::size_t>(std::ceil(window.p_extent() / step)) + 1;
  const auto cols = static_cast<std::size_t>(std::ceil(window.q_extent() / step)) + 1;
  const FieldGrid intensity = sample_grid(
      window, std::max<std::size_t>(rows, 2), std::max<std::size_t>(cols, 2), FieldKind::Intensity,
      [&](const PhaseVector& xi) { return Complex(std::norm(chord(xi)), 0.0); }, options.threads);

  std::vector<PhaseVector> seeds;
  for (std::size_t i = 0; i < intensity.rows(); ++i) {
    for (std::size_t j = 0; j < intensity.cols(); ++j) {
      const double v = intensity.at(i, j).real();
      if (v >= options.seed_threshold) continue;
      bool is_min = true;
      for (int di = -1; di <= 1 && is_min; ++di) {
        for (int dj = -1; dj <= 1 && is_min; ++dj) {
          if (di == 0 && dj == 0) continue;
          const auto ii = static_cast<std::ptrdiff_t>(i) + di;
          const auto jj = static_cast<std::ptrdiff_t>(j) + dj;
          if (ii < 0 || jj < 0 || ii >= static_cast<std::ptrdiff_t>(intensity.rows()) ||
              jj >= static_cast<std::ptrdiff_t>(intensity.cols())) {
            continue;
          }
          if (intensity.at(static_cast<std::size_t>(ii), static_cast<std::size_t>(jj)).real() < v) is_min = false;
        }
      }
      if (is_min) seeds.push_back(intensity.point(i, j));
    }
  }

  std::vector<RefinedSpot> found(seeds.size());
  std::vector<char> ok(seeds.size(), 0);
  for_each_row(seeds.size(), options.threads, [&](std::size_t k) {
    try {
      found[k] = newton_refine(chord, seeds[k], options.newton);
      ok[k] = 1;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoConvergence && e.code() != ErrorCode::SingularJacobian) throw;
    }
  });

  std::vector<RefinedSpot> spots;
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    if (!ok[k] || !window.contains(found[k].xi)) continue;
    const bool duplicate = std::any_of(spots.begin(), spots.end(), [&](const RefinedSpot& s) {
      return (s.xi - found[k].xi).norm() < 0.5 * step;
    });
    if (!duplicate) spots.push_back(found[k]);
  }
  std::sort(spots.begin(), spots.end(),
            [](const RefinedSpot& a, const RefinedSpot& b) { return lexicographic_less(a.xi, b.xi); });
  return spots;
}

// ---------------------------------------------------------------------------
// Inverse problem

std::pair<PhaseVector, PhaseVector> recover_centers(const TriangleAngles& angles, const IndexedSpot& a,
                                                    const IndexedSpot& b, double hbar) {
  if (!(hbar > 0.0)) throw Error(ErrorCode::InvalidArgument, "hbar must be positive");
  const double det = skew(a.xi, b.xi);
  if (std::abs(det) < 1e-12 * a.xi.norm() * b.xi.norm() || a.xi.norm() == 0.0 || b.xi.norm() == 0.0) {
    throw Error(ErrorCode::DegenerateSpots, "measurement chords are parallel");
  }
  // η∧ξ = ξ_q η_p − ξ_p η_q, linear in η.
  const auto solve_center = [&](double theta, int ka, int kb) {
    return solve2(a.xi.q, -a.xi.p, b.xi.q, -b.xi.p, hbar * (theta + kTwoPi * ka), hbar * (theta + kTwoPi * kb));
  };
  return {solve_center(angles.theta1, a.k1, b.k1), solve_center(angles.theta2, a.k2, b.k2)};
}

}  // namespace blindspots
