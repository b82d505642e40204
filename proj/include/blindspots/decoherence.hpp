#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "blindspots/core.hpp"
#include "blindspots/grid.hpp"

namespace blindspots {

/// Linear Lindblad operator with Weyl symbol (re + i·im)·x.
struct Coupling {
  PhaseVector re{};
  PhaseVector im{};
};

/// Quadratic Hamiltonian H(x) = x·H·x plus linear couplings.
class LindbladModel {
 public:
  LindbladModel(const Eigen::Matrix2d& hamiltonian, std::vector<Coupling> couplings);

  /// H = 0 with the Hermitian couplings p̂ and q̂ scaled by `strength`.
  static LindbladModel position_momentum(double strength = 1.0);

  const Eigen::Matrix2d& hamiltonian() const { return h_; }
  const std::vector<Coupling>& couplings() const { return couplings_; }

  /// Σ_j (l'_j l'_jᵀ + l''_j l''_jᵀ).
  Eigen::Matrix2d diffusion() const;

 private:
  Eigen::Matrix2d h_;
  std::vector<Coupling> couplings_;
};

/// α = Σ_j l''_j ∧ l'_j.
double dissipation_coeff(const LindbladModel& model);

/// R_t = exp(2JHt), J = [[0, −1], [1, 0]], in closed form.
Eigen::Matrix2d propagator_matrix(const Eigen::Matrix2d& hamiltonian, double t);

/// Decoherence factor exp(−ξ·M·ξ/ħ) of the chord function at time t.
struct DecoherenceGaussian {
  double t = 0.0;
  Eigen::Matrix2d M = Eigen::Matrix2d::Zero();
  double hbar = 1.0;

  double operator()(const PhaseVector& xi) const { return std::exp(-xi.to_eigen().dot(M * xi.to_eigen()) / hbar); }
};

/// Scale applied to the quadrature of 2Σ∫ e^{2α(t'−t)} R_{t'−t}ᵀ l lᵀ R_{t'−t} dt' so that
/// the H = 0 factor solves the chord master equation.
inline constexpr double kDecoherenceCalibration = 0.25;

/// Composite Simpson quadrature starting from `steps` panels, doubled until
/// successive rules agree to 1e-11 relative. Throws NegativeTime.
DecoherenceGaussian decoherence_matrix(const LindbladModel& model, double t, double hbar, int steps = 200);

/// Pairwise expansion of χ_t(ξ) = χ(R_{−t}ξ)·exp(−ξ·M_t·ξ/ħ). Throws
/// DissipativeUnsupported for α ≠ 0 and NegativeTime for t < 0.
ChordField evolved_chord_field(const Superposition& state, const LindbladModel& model, double t, int steps = 200);

Complex evolved_chord(const Superposition& state, const LindbladModel& model, const PhaseVector& xi, double t);

/// Right-hand side of the chord master equation for α = 0,
///   {H(ξ), χ} − (1/2ħ) Σ_j [(l'_j·ξ)² + (l''_j·ξ)²] χ,
/// with the Poisson bracket {f, g} = ∂_q f ∂_p g − ∂_p f ∂_q g.
Complex master_equation_rhs(const ChordField& chord, const LindbladModel& model, const PhaseVector& xi);

/// Closed-form C(ξ, t) = FT{|χ_t|²}(ξ): every product of two pair terms is
/// a Gaussian whose transform is exact.
class CorrelationField {
 public:
  explicit CorrelationField(const ChordField& chord);

  double operator()(const PhaseVector& xi) const;

 private:
  struct Product {
    Eigen::Matrix2cd Qinv;
    Eigen::Vector2cd b;
    Complex log_prefactor;
  };
  double hbar_;
  std::vector<Product> products_;
};

/// Symmetric window outside which every pair term of the field is below
/// `threshold` of unit amplitude.
Window support_window(const ChordField& chord, double threshold = 1e-13);

/// C(ξ, t) on a grid: |χ_t|² sampled on `window` (symmetric about the
/// origin), checked for adequacy at 1e-12 and transformed by fourier_2d.
FieldGrid evolved_correlation(const Superposition& state, const LindbladModel& model, const Window& window,
                              std::size_t rows, std::size_t cols, double t, int threads = 1);

/// Same transform at single points, with a window and step chosen from the
/// analytic support of |χ_t|².
std::vector<double> evolved_correlation_points(const Superposition& state, const LindbladModel& model,
                                               const std::vector<PhaseVector>& points, double t, int threads = 1);

/// ξ(s) = point + s·direction/|direction|.
struct ScanLine {
  PhaseVector point{};
  PhaseVector direction{1.0, 0.0};

  PhaseVector at(double s) const { return point + (s / direction.norm()) * direction; }
  /// Arc-length coordinate of the orthogonal projection of x.
  double coordinate(const PhaseVector& x) const { return dot(x - point, direction) / direction.norm(); }
};

struct LineScanSeries {
  ScanLine line;
  std::vector<double> samples;
  std::vector<double> times;
  /// values[k][i] = C(ξ(samples[i]), times[k]).
  std::vector<std::vector<double>> values;
};

/// Evenly spaced arc-length positions, endpoints included.
std::vector<double> line_samples(double s_min, double s_max, std::size_t n_samples);

/// C along the line at every requested time, from the closed-form
/// transform.
LineScanSeries scan_line(const Superposition& state, const LindbladModel& model, const ScanLine& line, double s_min,
                         double s_max, std::size_t n_samples, const std::vector<double>& times, int threads = 1);

/// Values at the series' own sample positions for a new time.
using LineResampler = std::function<std::vector<double>(double t)>;

struct LiftingSample {
  double t = 0.0;
  double delta = 0.0;
  double envelope = 0.0;
  double relative() const { return envelope > 0.0 ? delta / envelope : 0.0; }
};

struct LiftingResult {
  double tau_l = 0.0;
  PhaseVector spot{};
  std::vector<LiftingSample> delta_series;
  double epsilon = 1e-3;
};

/// Contrast of the minimum nearest `s_spot` against the straight line
/// between its two neighbouring maxima, with parabolic refinement of all
/// three extrema. Only minima strictly inside `bracket` qualify. A vanished
/// minimum or maximum counts as fully lifted (Δ = 0).
LiftingSample minimum_contrast(const std::vector<double>& samples, const std::vector<double>& values, double s_spot,
                               double t, std::optional<std::pair<double, double>> bracket = std::nullopt);

/// Earliest time at which Δ/envelope < epsilon. With a resampler the
/// crossing is bisected to relative precision 1e-3 in t; without one it is
/// interpolated linearly in log(Δ/envelope). Throws NoMinimum if the spot
/// is not a resolved local minimum of the first scan and NeverLifted if the
/// last time is still resolved.
LiftingResult lifting_time(const LineScanSeries& series, const PhaseVector& spot, double epsilon = 1e-3,
                           const LineResampler& resampler = {});

enum class PositivityMethod { Analytic, Grid };

struct PositivityOptions {
  double t_max = 4.0;
  double tol = 1e-6;
  PositivityMethod method = PositivityMethod::Analytic;
  /// Grid method only: symmetric window and shape for χ_t.
  std::optional<Window> window;
  std::size_t rows = 257;
  std::size_t cols = 257;
  int threads = 1;
};

/// Most negative W_t/Σ|terms| over the region spanned by the centers.
double min_relative_wigner(const Superposition& state, const LindbladModel& model, double t, int threads = 1);

/// min W_t / max W_t on the grid method's lattice.
double min_grid_wigner(const Superposition& state, const LindbladModel& model, double t, const Window& window,
                       std::size_t rows, std::size_t cols, int threads = 1);

/// Earliest t with W_t ≥ −tol (relative), bisected to 1e-3 relative
/// precision. Throws NeverPositive if the criterion fails at t_max.
double positivity_time(const Superposition& state, const LindbladModel& model, const PositivityOptions& options = {});

/// Area of the triangle spanned by three centers.
double triangle_area(const PhaseVector& a, const PhaseVector& b, const PhaseVector& c);

struct LiftingRatioOptions {
  ScanLine line{{0.0, 0.0}, {-1.0, 2.0}};
  /// Half-length of the scan around the spot, in units of the larger of the
  /// lattice spacing and the spot's distance from the origin.
  double span = 1.5;
  std::size_t samples = 241;
  double epsilon = 1e-3;
  double t_start = 1e-3;
  PositivityOptions positivity{};
  int threads = 1;
};

struct LiftingRatio {
  double tau_l = 0.0;
  double t_p = 0.0;
  double ratio = 0.0;
  double area = 0.0;
  PhaseVector spot{};
};

/// Blind spot of the lattice on the scan line closest to the origin.
/// Throws NoMinimum if no lattice node lies on the line.
PhaseVector blind_spot_on_line(const Superposition& state, const ScanLine& line);

/// τ_l, t_p and τ_l·A/(ħ·t_p) for a three-term state.
LiftingRatio lifting_ratio(const Superposition& state, const LindbladModel& model,
                           const LiftingRatioOptions& options = {});

}  // namespace blindspots
