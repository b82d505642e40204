#include "blindspots/phase_space.hpp"

#include <Eigen/LU>

#include "blindspots/error.hpp"

namespace blindspots {

SymplecticMatrix::SymplecticMatrix() : m_(Eigen::Matrix2d::Identity()) {}

SymplecticMatrix SymplecticMatrix::from_entries(double pp, double pq, double qp, double qq) {
  Eigen::Matrix2d m;
  m << pp, pq, qp, qq;
  return from_eigen(m);
}

SymplecticMatrix SymplecticMatrix::from_eigen(const Eigen::Matrix2d& m) {
  if (!m.allFinite()) throw Error(ErrorCode::NotSymplectic, "non-finite matrix entries");
  const double det = m.determinant();
  if (std::abs(det - 1.0) > 1e-9) {
    throw Error(ErrorCode::NotSymplectic, "determinant " + format_number(det) + " differs from 1");
  }
  return SymplecticMatrix(m / std::sqrt(det));
}

SymplecticMatrix SymplecticMatrix::rotation(double angle) {
  Eigen::Matrix2d m;
  m << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return SymplecticMatrix(m);
}

SymplecticMatrix SymplecticMatrix::squeeze(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorCode::InvalidArgument, "squeeze factor must be positive");
  Eigen::Matrix2d m;
  m << s, 0.0, 0.0, 1.0 / s;
  return SymplecticMatrix(m);
}

SymplecticMatrix SymplecticMatrix::oscillator_frame(double omega) {
  if (!(omega > 0.0) || !std::isfinite(omega)) throw Error(ErrorCode::InvalidArgument, "frequency must be positive");
  return squeeze(std::sqrt(omega));
}

SymplecticMatrix SymplecticMatrix::inverse() const {
  Eigen::Matrix2d inv;
  inv << m_(1, 1), -m_(0, 1), -m_(1, 0), m_(0, 0);
  return SymplecticMatrix(inv);
}

PhaseVector SymplecticMatrix::apply(const PhaseVector& x) const {
  return {m_(0, 0) * x.p + m_(0, 1) * x.q, m_(1, 0) * x.p + m_(1, 1) * x.q};
}

Complex SymplecticMatrix::map_slope(Complex gamma) const {
  // (q, p) -> (q', p') with q' = S_qp p + S_qq q, p' = S_pp p + S_pq q.
  return (m_(0, 1) + m_(0, 0) * gamma) / (m_(1, 1) + m_(1, 0) * gamma);
}

Complex SymplecticMatrix::gaussian_slope() const { return map_slope(Complex(0.0, 1.0)); }

SymplecticMatrix operator*(const SymplecticMatrix& a, const SymplecticMatrix& b) {
  return SymplecticMatrix(a.m_ * b.m_);
}

}  // namespace blindspots
