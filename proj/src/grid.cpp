#include "blindspots/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <thread>

#include <Eigen/Core>

#include "blindspots/error.hpp"

namespace blindspots {

bool Window::is_symmetric(double tol) const {
  const double scale = std::max({1.0, std::abs(p_min), std::abs(q_min)});
  return std::abs(p_min + p_max) <= tol * scale && std::abs(q_min + q_max) <= tol * scale;
}

bool Window::contains(const PhaseVector& x, double slack) const {
  return x.p >= p_min - slack && x.p <= p_max + slack && x.q >= q_min - slack && x.q <= q_max + slack;
}

std::string_view to_string(FieldKind kind) noexcept {
  switch (kind) {
    case FieldKind::Chord: return "chord";
    case FieldKind::Wigner: return "wigner";
    case FieldKind::Correlation: return "correlation";
    case FieldKind::Intensity: return "intensity";
  }
  return "unknown";
}

FieldGrid::FieldGrid(Window window, std::size_t rows, std::size_t cols, FieldKind kind)
    : window_(window), rows_(rows), cols_(cols), kind_(kind), values_(rows * cols) {
  if (rows < 2 || cols < 2) throw Error(ErrorCode::InvalidArgument, "grid shape must be at least 2x2");
  if (!(window.p_max > window.p_min) || !(window.q_max > window.q_min) || !std::isfinite(window.p_extent()) ||
      !std::isfinite(window.q_extent())) {
    throw Error(ErrorCode::InvalidArgument, "grid window must have positive finite extent");
  }
}

double FieldGrid::p_at(std::size_t i) const {
  if (i + 1 == rows_) return window_.p_max;
  return window_.p_min + step_p() * static_cast<double>(i);
}

double FieldGrid::q_at(std::size_t j) const {
  if (j + 1 == cols_) return window_.q_max;
  return window_.q_min + step_q() * static_cast<double>(j);
}

double FieldGrid::max_abs() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, std::abs(v));
  return m;
}

double FieldGrid::boundary_max_abs() const {
  double m = 0.0;
  for (std::size_t j = 0; j < cols_; ++j) m = std::max({m, std::abs(at(0, j)), std::abs(at(rows_ - 1, j))});
  for (std::size_t i = 0; i < rows_; ++i) m = std::max({m, std::abs(at(i, 0)), std::abs(at(i, cols_ - 1))});
  return m;
}

void FieldGrid::check_real_kind() const {
  if (kind_ == FieldKind::Chord) return;
  double peak = 0.0, imag = 0.0;
  for (const auto& v : values_) {
    peak = std::max(peak, std::abs(v));
    imag = std::max(imag, std::abs(v.imag()));
  }
  if (imag > 1e-9 * peak) {
    throw Error(ErrorCode::ImaginaryResidue,
                std::string(to_string(kind_)) + " grid carries imaginary part " + format_number(imag));
  }
}

void for_each_row(std::size_t rows, int threads, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(rows, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < rows; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < rows; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

FieldGrid sample_grid(const Window& window, std::size_t rows, std::size_t cols, FieldKind kind,
                      const std::function<Complex(const PhaseVector&)>& f, int threads) {
  FieldGrid grid(window, rows, cols, kind);
  for_each_row(rows, threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < cols; ++j) grid.at(i, j) = f(grid.point(i, j));
  });
  return grid;
}

void require_adequate_window(const FieldGrid& grid, double relative) {
  const double peak = grid.max_abs();
  const double edge = grid.boundary_max_abs();
  if (edge > relative * peak) {
    throw Error(ErrorCode::WindowTooSmall, "boundary/peak ratio " + format_number(edge / peak) +
                                               " exceeds " + format_number(relative));
  }
}

namespace {

constexpr Complex kI{0.0, 1.0};

void require_symmetric(const FieldGrid& grid) {
  if (!grid.window().is_symmetric()) {
    throw Error(ErrorCode::NonSymmetricWindow, "Fourier transform needs a window symmetric about the origin");
  }
}

FieldKind default_out_kind(FieldKind in) {
  return (in == FieldKind::Intensity || in == FieldKind::Correlation) ? FieldKind::Correlation : FieldKind::Chord;
}

double trapezoid_weight(std::size_t k, std::size_t n) { return (k == 0 || k + 1 == n) ? 0.5 : 1.0; }

}  // namespace

FieldGrid fourier_2d(const FieldGrid& grid, double hbar) { return fourier_2d(grid, hbar, default_out_kind(grid.kind())); }

FieldGrid fourier_2d(const FieldGrid& grid, double hbar, FieldKind out_kind) {
  return fourier_2d(grid, hbar, grid.window(), grid.rows(), grid.cols(), out_kind);
}

FieldGrid fourier_2d(const FieldGrid& grid, double hbar, const Window& out_window, std::size_t out_rows,
                     std::size_t out_cols, FieldKind out_kind) {
  require_symmetric(grid);
  if (!(hbar > 0.0)) throw Error(ErrorCode::InvalidArgument, "hbar must be positive");
  FieldGrid out(out_window, out_rows, out_cols, out_kind);
  const std::size_t R = grid.rows(), C = grid.cols();

  // O[k,l] = Σ_{i,j} F[i,j] e^{i(η_p^i ξ_q^l − η_q^j ξ_p^k)/ħ}, which factors
  // as E1 · Fᵀ · E2.
  Eigen::MatrixXcd e1(out_rows, C);
  for (std::size_t k = 0; k < out_rows; ++k) {
    const double xp = out.p_at(k);
    for (std::size_t j = 0; j < C; ++j) e1(k, j) = trapezoid_weight(j, C) * std::exp(-kI * grid.q_at(j) * xp / hbar);
  }
  Eigen::MatrixXcd e2(R, out_cols);
  for (std::size_t i = 0; i < R; ++i) {
    const double ep = grid.p_at(i);
    for (std::size_t l = 0; l < out_cols; ++l) e2(i, l) = trapezoid_weight(i, R) * std::exp(kI * ep * out.q_at(l) / hbar);
  }
  const Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> f(
      grid.values().data(), static_cast<Eigen::Index>(R), static_cast<Eigen::Index>(C));
  const Eigen::MatrixXcd partial = e1 * f.transpose();
  const Eigen::MatrixXcd result = partial * e2;
  const double scale = grid.step_p() * grid.step_q() / (2.0 * std::numbers::pi * hbar);
  for (std::size_t k = 0; k < out_rows; ++k) {
    for (std::size_t l = 0; l < out_cols; ++l) out.at(k, l) = scale * result(k, l);
  }
  return out;
}

Complex fourier_point(const FieldGrid& grid, double hbar, const PhaseVector& xi) {
  require_symmetric(grid);
  const std::size_t R = grid.rows(), C = grid.cols();
  std::vector<Complex> u(R), v(C);
  for (std::size_t i = 0; i < R; ++i) u[i] = trapezoid_weight(i, R) * std::exp(kI * grid.p_at(i) * xi.q / hbar);
  for (std::size_t j = 0; j < C; ++j) v[j] = trapezoid_weight(j, C) * std::exp(-kI * grid.q_at(j) * xi.p / hbar);
  Complex total{};
  for (std::size_t i = 0; i < R; ++i) {
    Complex row{};
    const Complex* vals = grid.values().data() + i * C;
    for (std::size_t j = 0; j < C; ++j) row += vals[j] * v[j];
    total += u[i] * row;
  }
  return total * (grid.step_p() * grid.step_q() / (2.0 * std::numbers::pi * hbar));
}

}  // namespace blindspots
