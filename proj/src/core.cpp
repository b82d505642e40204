#include "blindspots/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/LU>

#include "blindspots/error.hpp"

namespace blindspots {

namespace {

constexpr Complex kI{0.0, 1.0};

void require_finite(const PhaseVector& v, const char* what) {
  if (!v.is_finite()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be finite");
}

void require_hbar(double hbar) {
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw Error(ErrorCode::InvalidArgument, "hbar must be positive");
}

void require_same_hbar(double a, double b) {
  if (a != b) throw Error(ErrorCode::InvalidArgument, "states have different hbar");
}

}  // namespace

Superposition::Superposition(double hbar, std::vector<Term> terms) : hbar_(hbar), terms_(std::move(terms)) {
  require_hbar(hbar_);
  if (terms_.empty()) throw Error(ErrorCode::InvalidArgument, "superposition needs at least one term");
  bool any_nonzero = false;
  for (const auto& t : terms_) {
    if (!std::isfinite(t.amplitude.real()) || !std::isfinite(t.amplitude.imag())) {
      throw Error(ErrorCode::InvalidArgument, "amplitudes must be finite");
    }
    require_finite(t.state.center, "center");
    any_nonzero = any_nonzero || std::abs(t.amplitude) > 0.0;
  }
  if (!any_nonzero) throw Error(ErrorCode::ZeroNorm, "all amplitudes vanish");
}

MixedEnsemble::MixedEnsemble(double hbar, std::vector<WeightedState> terms) : hbar_(hbar), terms_(std::move(terms)) {
  require_hbar(hbar_);
  if (terms_.empty()) throw Error(ErrorCode::InvalidArgument, "ensemble needs at least one member");
  CompensatedSum total;
  for (const auto& t : terms_) {
    if (!(t.weight >= 0.0) || !std::isfinite(t.weight)) {
      throw Error(ErrorCode::InvalidArgument, "weights must be nonnegative");
    }
    require_finite(t.state.center, "center");
    total.add(t.weight);
  }
  if (std::abs(total.value() - 1.0) > 1e-12) throw Error(ErrorCode::InvalidArgument, "weights must sum to 1");
}

MixedEnsemble MixedEnsemble::from_superposition(const Superposition& state) {
  CompensatedSum total;
  for (const auto& t : state.terms()) total.add(std::norm(t.amplitude));
  std::vector<WeightedState> members;
  members.reserve(state.size());
  for (const auto& t : state.terms()) members.push_back({std::norm(t.amplitude) / total.value(), t.state});
  return MixedEnsemble(state.hbar(), std::move(members));
}

// ---------------------------------------------------------------------------
// ComplexGaussian

Complex ComplexGaussian::exponent(const PhaseVector& xi) const {
  const Complex qp = Q(0, 0) * xi.p + Q(0, 1) * xi.q;
  const Complex qq = Q(1, 0) * xi.p + Q(1, 1) * xi.q;
  return -0.5 * (xi.p * qp + xi.q * qq) + b(0) * xi.p + b(1) * xi.q + c;
}

std::pair<Complex, Complex> ComplexGaussian::gradient(const PhaseVector& xi) const {
  const Complex v = value(xi);
  const Complex gp = -(Q(0, 0) * xi.p + Q(0, 1) * xi.q) + b(0);
  const Complex gq = -(Q(1, 0) * xi.p + Q(1, 1) * xi.q) + b(1);
  return {v * gp, v * gq};
}

ComplexGaussian ComplexGaussian::transformed(const Eigen::Matrix2d& L, const Eigen::Matrix2d& D, double hbar) const {
  ComplexGaussian out;
  const Eigen::Matrix2cd Lc = L.cast<Complex>();
  out.Q = Lc.transpose() * Q * Lc + (2.0 / hbar) * D.cast<Complex>();
  out.b = Lc.transpose() * b;
  out.c = c;
  return out;
}

Complex ComplexGaussian::log_fourier(const PhaseVector& x, double hbar) const {
  // ∫ exp(−½ξᵀQξ + Bᵀξ) dξ = 2π / √det Q · exp(½ BᵀQ⁻¹B). For Re Q ≻ 0 the
  // argument of det Q stays inside (−π, π), so the principal root is the
  // continuous one.
  const Eigen::Vector2cd B = b + (kI / hbar) * Eigen::Vector2cd(x.q, -x.p);
  const Complex det = Q.determinant();
  const Eigen::Matrix2cd Qinv = Q.inverse();
  const Complex quad = 0.5 * (B.transpose() * Qinv * B)(0, 0);
  const double two_pi = 2.0 * std::numbers::pi;
  return std::log(two_pi) - 2.0 * std::log(two_pi * hbar) - 0.5 * std::log(det) + quad + c;
}

ComplexGaussian pair_chord_term(const GaussianState& n, const GaussianState& m, double hbar) {
  const Complex gn = n.frame.gaussian_slope();
  const Complex gm = std::conj(m.frame.gaussian_slope());  // Γ_m*
  const double np = n.center.p, nq = n.center.q;
  const double mp = m.center.p, mq = m.center.q;
  const double pi = std::numbers::pi;

  const Complex log_norm_n = 0.25 * std::log(gn.imag() / (pi * hbar));
  const Complex log_norm_m = 0.25 * std::log(-gm.imag() / (pi * hbar));

  // Integrand exp(−A q² + B q + C) with B, C affine/quadratic in ξ.
  const Complex A = -(kI / (2.0 * hbar)) * (gn - gm);
  const Complex beta0 = (kI / hbar) * (np - mp - gn * nq + gm * mq);
  const Complex beta_p = -kI / hbar;
  const Complex beta_q = (kI / (2.0 * hbar)) * (gn + gm);
  const Complex c0 = (kI / (2.0 * hbar)) * (gn * nq * nq - gm * mq * mq) +
                     (kI / (2.0 * hbar)) * (mp * mq - np * nq) + log_norm_n + log_norm_m;
  const Complex c1q = (kI / (2.0 * hbar)) * (np + mp - gn * nq - gm * mq);
  const Complex c2qq = (kI / (8.0 * hbar)) * (gn - gm);

  ComplexGaussian term;
  const Eigen::Vector2cd beta(beta_p, beta_q);
  term.Q = -(beta * beta.transpose()) / (2.0 * A);
  term.Q(1, 1) -= 2.0 * c2qq;
  term.b = beta0 * beta / (2.0 * A);
  term.b(1) += c1q;
  term.c = 0.5 * std::log(pi / A) + beta0 * beta0 / (4.0 * A) + c0;
  return term;
}

// ---------------------------------------------------------------------------
// ChordField / WignerField

ChordField::ChordField(const Superposition& state, Unchecked) : hbar_(state.hbar()) {
  const auto& terms = state.terms();
  for (std::size_t n = 0; n < terms.size(); ++n) {
    if (terms[n].amplitude == Complex{}) continue;
    for (std::size_t m = 0; m < terms.size(); ++m) {
      if (terms[m].amplitude == Complex{}) continue;
      pairs_.push_back({n, m, terms[n].amplitude * std::conj(terms[m].amplitude),
                        pair_chord_term(terms[n].state, terms[m].state, hbar_)});
    }
  }
}

ChordField::ChordField(const Superposition& state) : ChordField(state, Unchecked{}) {
  const Complex origin = (*this)(PhaseVector{});
  if (std::abs(origin - 1.0) > 1e-9) {
    throw Error(ErrorCode::NotNormalized, "chord at the origin is " + format_number(origin.real()));
  }
}

ChordField ChordField::from_pairs(std::vector<Pair> pairs, double hbar) {
  require_hbar(hbar);
  return ChordField(std::move(pairs), hbar);
}

Complex ChordField::operator()(const PhaseVector& xi) const {
  CompensatedComplexSum sum;
  for (const auto& pr : pairs_) sum.add(pr.coefficient * pr.term.value(xi));
  return sum.value();
}

std::pair<Complex, std::pair<Complex, Complex>> ChordField::value_and_gradient(const PhaseVector& xi) const {
  CompensatedComplexSum v, gp, gq;
  for (const auto& pr : pairs_) {
    const Complex e = pr.coefficient * pr.term.value(xi);
    const Eigen::Vector2cd& b = pr.term.b;
    const auto& Q = pr.term.Q;
    v.add(e);
    gp.add(e * (b(0) - (Q(0, 0) * xi.p + Q(0, 1) * xi.q)));
    gq.add(e * (b(1) - (Q(1, 0) * xi.p + Q(1, 1) * xi.q)));
  }
  return {v.value(), {gp.value(), gq.value()}};
}

double ChordField::envelope(const PhaseVector& xi) const {
  CompensatedSum sum;
  for (const auto& pr : pairs_) sum.add(std::abs(pr.coefficient) * std::exp(pr.term.exponent(xi).real()));
  return sum.value();
}

WignerField::WignerField(const ChordField& chord) : hbar_(chord.hbar()), pairs_(chord.pairs()) {}

WignerField::WignerField(std::vector<ChordField::Pair> pairs, double hbar) : hbar_(hbar), pairs_(std::move(pairs)) {}

double WignerField::operator()(const PhaseVector& x) const {
  CompensatedComplexSum sum;
  CompensatedSum scale;
  for (const auto& pr : pairs_) {
    const Complex v = pr.coefficient * std::exp(pr.term.log_fourier(x, hbar_));
    sum.add(v);
    scale.add(std::abs(v));
  }
  const Complex w = sum.value();
  if (std::abs(w.imag()) > 1e-9 * std::max(1.0, scale.value())) {
    throw Error(ErrorCode::ImaginaryResidue, "Wigner imaginary part " + format_number(w.imag()));
  }
  return w.real();
}

double WignerField::relative_value(const PhaseVector& x) const {
  std::vector<Complex> logs;
  logs.reserve(pairs_.size());
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& pr : pairs_) {
    const Complex l = std::log(pr.coefficient) + pr.term.log_fourier(x, hbar_);
    logs.push_back(l);
    top = std::max(top, l.real());
  }
  CompensatedSum value, scale;
  for (const Complex& l : logs) {
    const Complex v = std::exp(l - top);
    value.add(v.real());
    scale.add(std::abs(v));
  }
  return value.value() / scale.value();
}

// ---------------------------------------------------------------------------
// State-level operations

double norm_squared(const Superposition& state) {
  return ChordField(state, ChordField::Unchecked{})(PhaseVector{}).real();
}

Complex inner_product(const Superposition& a, const Superposition& b) {
  require_same_hbar(a.hbar(), b.hbar());
  CompensatedComplexSum sum;
  for (const auto& tb : b.terms()) {
    for (const auto& ta : a.terms()) {
      const Complex overlap = pair_chord_term(tb.state, ta.state, a.hbar()).value(PhaseVector{});
      sum.add(std::conj(ta.amplitude) * tb.amplitude * overlap);
    }
  }
  return sum.value();
}

Superposition normalize(const Superposition& state) {
  const double norm = norm_squared(state);
  if (!(norm >= 1e-300)) throw Error(ErrorCode::ZeroNorm, "state norm " + format_number(norm));
  const double scale = 1.0 / std::sqrt(norm);
  std::vector<Term> terms = state.terms();
  for (auto& t : terms) t.amplitude *= scale;
  return Superposition(state.hbar(), std::move(terms));
}

Complex chord_exact(const Superposition& state, const PhaseVector& xi) {
  require_finite(xi, "chord");
  return ChordField(state)(xi);
}

double default_quadrature_step(const Superposition& state) {
  double max_p = 0.0;
  for (const auto& t : state.terms()) max_p = std::max(max_p, std::abs(t.state.center.p));
  const double hbar = state.hbar();
  return std::min(std::sqrt(hbar) / 20.0, hbar / (10.0 * (1.0 + max_p)));
}

Complex wavefunction(const Superposition& state, double q) {
  const double hbar = state.hbar();
  Complex psi{};
  for (const auto& t : state.terms()) {
    const Complex gamma = t.state.frame.gaussian_slope();
    const PhaseVector& eta = t.state.center;
    const double dq = q - eta.q;
    const double norm = std::pow(gamma.imag() / (std::numbers::pi * hbar), 0.25);
    psi += t.amplitude * norm * std::exp(kI * gamma * dq * dq / (2.0 * hbar) + kI * eta.p * (q - 0.5 * eta.q) / hbar);
  }
  return psi;
}

Complex chord_quadrature(const Superposition& state, const PhaseVector& xi, const QuadratureOptions& options) {
  require_finite(xi, "chord");
  const double hbar = state.hbar();
  double max_p = 0.0;
  double q_lo = std::numeric_limits<double>::infinity();
  double q_hi = -q_lo;
  double min_im_gamma = std::numeric_limits<double>::infinity();
  for (const auto& t : state.terms()) {
    max_p = std::max(max_p, std::abs(t.state.center.p));
    q_lo = std::min(q_lo, t.state.center.q);
    q_hi = std::max(q_hi, t.state.center.q);
    min_im_gamma = std::min(min_im_gamma, t.state.frame.gaussian_slope().imag());
  }
  const double step = options.step > 0.0 ? options.step : default_quadrature_step(state);
  if (step > hbar / (10.0 * max_p + 1.0)) {
    throw Error(ErrorCode::BadQuadrature, "step " + format_number(step) + " undersamples the phase oscillation");
  }
  const double halfwidth =
      options.halfwidth > 0.0 ? options.halfwidth : std::sqrt(2.0 * hbar * std::log(1e14) / min_im_gamma);
  const double lo = q_lo - halfwidth - 0.5 * std::abs(xi.q);
  const double hi = q_hi + halfwidth + 0.5 * std::abs(xi.q);
  std::size_t panels = static_cast<std::size_t>(std::ceil((hi - lo) / step));
  panels += panels % 2;
  const double h = (hi - lo) / static_cast<double>(panels);

  CompensatedComplexSum sum;
  for (std::size_t k = 0; k <= panels; ++k) {
    const double q = lo + h * static_cast<double>(k);
    const double w = (k == 0 || k == panels) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    const Complex f = wavefunction(state, q + 0.5 * xi.q) * std::conj(wavefunction(state, q - 0.5 * xi.q)) *
                      std::exp(-kI * xi.p * q / hbar);
    sum.add(w * f);
  }
  return sum.value() * (h / 3.0);
}

double wigner_exact(const Superposition& state, const PhaseVector& x) {
  require_finite(x, "phase-space point");
  return WignerField(ChordField(state))(x);
}

double correlation_pure(const Superposition& state, const PhaseVector& xi) { return std::norm(chord_exact(state, xi)); }

Complex chord_mixture(const MixedEnsemble& ensemble, const PhaseVector& xi) {
  require_finite(xi, "chord");
  const double hbar = ensemble.hbar();
  CompensatedComplexSum sum;
  for (const auto& member : ensemble.terms()) {
    const GaussianState centered{PhaseVector{}, member.state.frame};
    const Complex local = pair_chord_term(centered, centered, hbar).value(xi);
    sum.add(member.weight * local * std::exp(kI * skew(member.state.center, xi) / hbar));
  }
  return sum.value();
}

FieldGrid mixture_intensity(const MixedEnsemble& ensemble, const Window& window, std::size_t rows, std::size_t cols,
                            int threads) {
  return sample_grid(
      window, rows, cols, FieldKind::Intensity,
      [&](const PhaseVector& xi) { return Complex(std::norm(chord_mixture(ensemble, xi)), 0.0); }, threads);
}

FieldGrid correlation_mixture(const MixedEnsemble& ensemble, const FieldGrid& intensity) {
  require_adequate_window(intensity, 1e-12);
  FieldGrid out = fourier_2d(intensity, ensemble.hbar(), FieldKind::Correlation);
  out.check_real_kind();
  return out;
}

Superposition translate_state(const Superposition& state, const PhaseVector& xi) {
  require_finite(xi, "translation");
  std::vector<Term> terms = state.terms();
  for (auto& t : terms) {
    t.amplitude *= std::exp(kI * skew(xi, t.state.center) / (2.0 * state.hbar()));
    t.state.center += xi;
  }
  return Superposition(state.hbar(), std::move(terms));
}

Superposition shift_origin(const Superposition& state, const PhaseVector& eta) { return translate_state(state, -eta); }

Superposition apply_symplectic(const Superposition& state, const SymplecticMatrix& s) {
  std::vector<Term> terms = state.terms();
  for (auto& t : terms) {
    // U_S maps the Gaussian of slope Γ to (S_qq + S_qp Γ)^{-1/2} times the
    // Gaussian of slope S·Γ; only the phase survives renormalization.
    const Complex z = s(1, 1) + s(1, 0) * t.state.frame.gaussian_slope();
    t.amplitude *= std::sqrt(std::abs(z)) / std::sqrt(z);
    t.state.center = s.apply(t.state.center);
    t.state.frame = s * t.state.frame;
  }
  return Superposition(state.hbar(), std::move(terms));
}

Superposition superpose(const std::vector<std::pair<Complex, Superposition>>& parts) {
  if (parts.empty()) throw Error(ErrorCode::InvalidArgument, "nothing to superpose");
  const double hbar = parts.front().second.hbar();
  std::vector<Term> terms;
  for (const auto& [coef, st] : parts) {
    require_same_hbar(hbar, st.hbar());
    for (Term t : st.terms()) {
      t.amplitude *= coef;
      terms.push_back(t);
    }
  }
  return Superposition(hbar, std::move(terms));
}

}  // namespace blindspots
