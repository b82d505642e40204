#pragma once

#include <cmath>
#include <complex>

#include <Eigen/Core>

namespace blindspots {

using Complex = std::complex<double>;

/// A point of the phase plane, ordered (p, q). Also used for chords
/// (translations) and centers.
struct PhaseVector {
  double p = 0.0;
  double q = 0.0;

  constexpr PhaseVector() = default;
  constexpr PhaseVector(double p_, double q_) : p(p_), q(q_) {}

  static PhaseVector from_eigen(const Eigen::Vector2d& v) { return {v(0), v(1)}; }
  Eigen::Vector2d to_eigen() const { return {p, q}; }

  bool is_finite() const { return std::isfinite(p) && std::isfinite(q); }
  double norm() const { return std::hypot(p, q); }
  double norm2() const { return p * p + q * q; }

  PhaseVector& operator+=(const PhaseVector& o) { p += o.p; q += o.q; return *this; }
  PhaseVector& operator-=(const PhaseVector& o) { p -= o.p; q -= o.q; return *this; }
  PhaseVector& operator*=(double s) { p *= s; q *= s; return *this; }

  friend PhaseVector operator+(PhaseVector a, const PhaseVector& b) { return a += b; }
  friend PhaseVector operator-(PhaseVector a, const PhaseVector& b) { return a -= b; }
  friend PhaseVector operator-(const PhaseVector& a) { return {-a.p, -a.q}; }
  friend PhaseVector operator*(double s, PhaseVector a) { return a *= s; }
  friend PhaseVector operator*(PhaseVector a, double s) { return a *= s; }
  friend bool operator==(const PhaseVector&, const PhaseVector&) = default;
};

/// Skew (symplectic) product a∧b = a_p b_q − a_q b_p. Every phase-space
/// Fourier kernel in the library goes through this function.
constexpr double skew(const PhaseVector& a, const PhaseVector& b) { return a.p * b.q - a.q * b.p; }

constexpr double dot(const PhaseVector& a, const PhaseVector& b) { return a.p * b.p + a.q * b.q; }

/// 2×2 real matrix with unit determinant acting on (p, q) column vectors.
class SymplecticMatrix {
 public:
  /// Identity.
  SymplecticMatrix();

  /// Accepts |det − 1| ≤ 1e-9 and rescales to unit determinant; throws
  /// NotSymplectic otherwise.
  static SymplecticMatrix from_entries(double pp, double pq, double qp, double qq);
  static SymplecticMatrix from_eigen(const Eigen::Matrix2d& m);

  static SymplecticMatrix rotation(double angle);
  /// Scales p by `s` and q by 1/s.
  static SymplecticMatrix squeeze(double s);
  /// Frame of a coherent state of an oscillator with frequency ω (ω = 1 is
  /// the identity).
  static SymplecticMatrix oscillator_frame(double omega);

  const Eigen::Matrix2d& matrix() const { return m_; }
  double operator()(int r, int c) const { return m_(r, c); }

  SymplecticMatrix inverse() const;
  PhaseVector apply(const PhaseVector& x) const;

  /// Slope Γ of the Lagrangian plane p = Γ q obtained by mapping the vacuum
  /// plane Γ = i; the centered Gaussian with this frame has wavefunction
  /// ∝ exp(iΓ q²/2ħ).
  Complex gaussian_slope() const;
  Complex map_slope(Complex gamma) const;

  friend SymplecticMatrix operator*(const SymplecticMatrix& a, const SymplecticMatrix& b);

 private:
  explicit SymplecticMatrix(const Eigen::Matrix2d& m) : m_(m) {}
  Eigen::Matrix2d m_;
};

/// Neumaier-compensated accumulator. Summation order is the call order.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

class CompensatedComplexSum {
 public:
  void add(Complex z) { re_.add(z.real()); im_.add(z.imag()); }
  Complex value() const { return {re_.value(), im_.value()}; }

 private:
  CompensatedSum re_;
  CompensatedSum im_;
};

}  // namespace blindspots
