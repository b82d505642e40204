#pragma once

#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

#include "blindspots/phase_space.hpp"

namespace blindspots {

/// Closed rectangle [p_min, p_max] × [q_min, q_max].
struct Window {
  double p_min = -1.0;
  double p_max = 1.0;
  double q_min = -1.0;
  double q_max = 1.0;

  static Window symmetric(double p_half, double q_half) { return {-p_half, p_half, -q_half, q_half}; }

  bool is_symmetric(double tol = 1e-12) const;
  bool contains(const PhaseVector& x, double slack = 0.0) const;
  double p_extent() const { return p_max - p_min; }
  double q_extent() const { return q_max - q_min; }
};

enum class FieldKind { Chord, Wigner, Correlation, Intensity };

std::string_view to_string(FieldKind kind) noexcept;

/// Sampled phase-space field. Row index sweeps p ascending, column index
/// sweeps q ascending, both endpoints included; storage is row-major.
class FieldGrid {
 public:
  FieldGrid(Window window, std::size_t rows, std::size_t cols, FieldKind kind);

  const Window& window() const { return window_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  FieldKind kind() const { return kind_; }

  double step_p() const { return window_.p_extent() / static_cast<double>(rows_ - 1); }
  double step_q() const { return window_.q_extent() / static_cast<double>(cols_ - 1); }
  double p_at(std::size_t i) const;
  double q_at(std::size_t j) const;
  PhaseVector point(std::size_t i, std::size_t j) const { return {p_at(i), q_at(j)}; }

  Complex& at(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
  const Complex& at(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  std::vector<Complex>& values() { return values_; }
  const std::vector<Complex>& values() const { return values_; }

  double max_abs() const;
  /// Largest |value| on the outer ring of samples.
  double boundary_max_abs() const;

  /// Throws ImaginaryResidue if a real-valued kind carries imaginary parts
  /// above 1e-9 of the peak modulus.
  void check_real_kind() const;

 private:
  Window window_;
  std::size_t rows_;
  std::size_t cols_;
  FieldKind kind_;
  std::vector<Complex> values_;
};

/// Runs body(row) for every row; with threads > 1 rows are split over
/// worker threads. Each row is computed by exactly one call, so results do
/// not depend on the thread count.
void for_each_row(std::size_t rows, int threads, const std::function<void(std::size_t)>& body);

FieldGrid sample_grid(const Window& window, std::size_t rows, std::size_t cols, FieldKind kind,
                      const std::function<Complex(const PhaseVector&)>& f, int threads = 1);

/// Throws WindowTooSmall unless every boundary sample is below
/// `relative` × the grid peak.
void require_adequate_window(const FieldGrid& grid, double relative = 1e-12);

/// Discrete symplectic Fourier transform
///   F(ξ) = (1/2πħ) ∫ dη e^{i η∧ξ/ħ} f(η)
/// by trapezoidal quadrature, evaluated on the input grid's own samples.
/// Requires a window symmetric about the origin (NonSymmetricWindow).
FieldGrid fourier_2d(const FieldGrid& grid, double hbar, FieldKind out_kind);
FieldGrid fourier_2d(const FieldGrid& grid, double hbar);
/// Same transform evaluated on an arbitrary output lattice.
FieldGrid fourier_2d(const FieldGrid& grid, double hbar, const Window& out_window, std::size_t out_rows,
                     std::size_t out_cols, FieldKind out_kind);
/// Same transform at a single point.
Complex fourier_point(const FieldGrid& grid, double hbar, const PhaseVector& xi);

}  // namespace blindspots
