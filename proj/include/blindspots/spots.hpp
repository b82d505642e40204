#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "blindspots/core.hpp"
#include "blindspots/grid.hpp"

namespace blindspots {

/// Point-scatterer data of the small-chord approximation: weights |a_n|²
/// (normalized) at centers measured from the first center.
class DiffractionModel {
 public:
  DiffractionModel(double hbar, std::vector<double> weights, std::vector<PhaseVector> centers);

  /// Weights |a_n|²/Σ|a_m|², centers re-expressed relative to the first one.
  static DiffractionModel from_superposition(const Superposition& state);

  double hbar() const { return hbar_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<PhaseVector>& centers() const { return centers_; }
  std::size_t size() const { return weights_.size(); }

 private:
  double hbar_;
  std::vector<double> weights_;
  std::vector<PhaseVector> centers_;
};

/// Σ w_n e^{i η_n∧ξ/ħ}.
Complex small_chord(const DiffractionModel& model, const PhaseVector& xi);

enum class Branch { Plus, Minus };

std::string_view to_string(Branch branch) noexcept;

/// Closing directions of the weight phasors, θ_0 = 0.
struct TriangleAngles {
  double theta1 = 0.0;
  double theta2 = 0.0;
  Branch branch = Branch::Plus;
};

/// The convention string recorded in output metadata: triangle sides are
/// the phasor lengths |a_n|².
inline constexpr std::string_view kTriangleSideConvention = "sides=|a_n|^2";

/// |w0 + w1 e^{iθ1} + w2 e^{iθ2}|.
double closure_residual(double w0, double w1, double w2, const TriangleAngles& angles);

/// Both closing branches of the triangle with sides (w0, w1, w2). Throws
/// NoClosure when the largest side is not strictly shorter than the sum of
/// the other two.
std::pair<TriangleAngles, TriangleAngles> triangle_close(double w0, double w1, double w2);

struct IndexRange {
  int k1_min = -2;
  int k1_max = 2;
  int k2_min = -2;
  int k2_max = 2;

  static IndexRange square(int k) { return {-k, k, -k, k}; }
};

struct LatticeNode {
  PhaseVector xi{};
  int k1 = 0;
  int k2 = 0;
  Branch sublattice = Branch::Plus;
};

/// Solutions of η_n∧ξ/ħ = θ_n + 2πk_n (n = 1, 2) over the index range.
/// Throws DegenerateGeometry for collinear η1, η2.
std::vector<LatticeNode> sublattice_nodes(const TriangleAngles& angles, const PhaseVector& eta1, const PhaseVector& eta2,
                                          double hbar, const IndexRange& range);

struct BlindSpotLattice {
  /// ξ increments for unit steps of k1 and k2.
  std::pair<PhaseVector, PhaseVector> basis;
  /// ξ at k = (0, 0) for the plus and minus sublattices.
  std::pair<PhaseVector, PhaseVector> offsets;
  std::pair<TriangleAngles, TriangleAngles> angles;
  IndexRange index_range;
  /// Sorted by (k1, k2, sublattice).
  std::vector<LatticeNode> nodes;
};

/// Both sublattices of the triplet's small-chord zeros. Throws WrongArity
/// unless the model has exactly three terms; NoClosure propagates.
BlindSpotLattice hexagonal_lattice(const DiffractionModel& model, const IndexRange& range);

/// The six nodes of the hexagonal cell around the origin: those whose phase
/// pair (φ1, φ2) satisfies |φ1|, |φ2|, |φ1 − φ2| < 2π.
std::vector<LatticeNode> first_shell(const BlindSpotLattice& lattice, double hbar, const DiffractionModel& model);

/// Smallest distance between two distinct lattice nodes.
double nearest_neighbor_spacing(const BlindSpotLattice& lattice);

struct RefinedSpot {
  PhaseVector xi{};
  double residual = 0.0;  // |χ(ξ)|
  int iterations = 0;
  PhaseVector seed{};
  std::optional<LatticeNode> lattice_index;
};

struct NewtonOptions {
  double tol = 1e-12;
  int max_iter = 50;
};

/// Damped Newton iteration on (Re χ, Im χ) with the analytic Jacobian. The
/// step is the pseudo-inverse step, so rank-deficient Jacobians (real chord
/// functions) still converge onto the nodal line. Converged when
/// |χ| ≤ tol · min(1, Σ|pair terms|). Throws NoConvergence or
/// SingularJacobian.
RefinedSpot newton_refine(const Superposition& state, const PhaseVector& seed, const NewtonOptions& options = {});
RefinedSpot newton_refine(const ChordField& chord, const PhaseVector& seed, const NewtonOptions& options = {});

/// Analytic Jacobian d(Re χ, Im χ)/d(ξ_p, ξ_q), row-major.
std::array<double, 4> chord_jacobian(const ChordField& chord, const PhaseVector& xi);

struct SpotSearchOptions {
  double grid_step = 0.0;  // ≤ 0 selects min(√ħ/10, 2πħ/(8·max|η_n − η_m|))
  double seed_threshold = 1e-2;
  NewtonOptions newton{};
  int threads = 1;
};

/// Grid scan of |χ|² for local minima below the seed threshold, Newton
/// refinement of each, deduplication within grid_step/2. Only spots inside
/// the window are kept; output is sorted lexicographically by (ξ_p, ξ_q).
std::vector<RefinedSpot> find_spots_generic(const Superposition& state, const Window& window,
                                            const SpotSearchOptions& options = {});

/// Newton-refines every lattice node of a normalized triplet, tagging each
/// spot with its lattice index. Nodes whose iteration fails are skipped.
std::vector<RefinedSpot> refine_lattice(const Superposition& state, const BlindSpotLattice& lattice,
                                        const NewtonOptions& options = {});

enum class ChordPart { Real, Imaginary };

struct NodalLineSet {
  std::vector<std::vector<PhaseVector>> polylines;
  ChordPart part = ChordPart::Real;
};

/// Zero contours of Re χ or Im χ by marching squares with linear
/// interpolation; segments are chained into polylines.
NodalLineSet trace_nodal_lines(const FieldGrid& grid, ChordPart part);

/// Shortest distance from a point to any polyline segment.
double distance_to_lines(const NodalLineSet& lines, const PhaseVector& x);

struct IndexedSpot {
  PhaseVector xi{};
  int k1 = 0;
  int k2 = 0;
};

/// Inverse problem: the two centers (η1, η2) reproducing the phases of two
/// indexed spots of one sublattice. Throws DegenerateSpots for parallel
/// chords.
std::pair<PhaseVector, PhaseVector> recover_centers(const TriangleAngles& angles, const IndexedSpot& a,
                                                    const IndexedSpot& b, double hbar);

}  // namespace blindspots
