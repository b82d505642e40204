#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "blindspots/grid.hpp"
#include "blindspots/phase_space.hpp"

namespace blindspots {

/// Generalized coherent state T_center · U_frame |0⟩. The Gaussian with
/// frame S has wavefunction (Im Γ/πħ)^{1/4} exp(iΓ q²/2ħ) with Γ the
/// frame's slope and a positive real prefactor.
struct GaussianState {
  PhaseVector center{};
  SymplecticMatrix frame{};
};

struct Term {
  Complex amplitude{1.0, 0.0};
  GaussianState state{};
};

/// Pure superposition Σ a_n |η_n, S_n⟩ for one degree of freedom.
class Superposition {
 public:
  Superposition(double hbar, std::vector<Term> terms);

  double hbar() const { return hbar_; }
  const std::vector<Term>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  const Term& operator[](std::size_t i) const { return terms_[i]; }

 private:
  double hbar_;
  std::vector<Term> terms_;
};

struct WeightedState {
  double weight = 0.0;
  GaussianState state{};
};

/// Classical mixture Σ w_n |η_n⟩⟨η_n| with weights summing to one.
class MixedEnsemble {
 public:
  MixedEnsemble(double hbar, std::vector<WeightedState> terms);

  /// Weights |a_n|² / Σ|a_m|² of the same set of Gaussians.
  static MixedEnsemble from_superposition(const Superposition& state);

  double hbar() const { return hbar_; }
  const std::vector<WeightedState>& terms() const { return terms_; }

 private:
  double hbar_;
  std::vector<WeightedState> terms_;
};

/// exp(−½ ξᵀQξ + bᵀξ + c) on the chord plane, ξ = (ξ_p, ξ_q). Every pairwise
/// chord term of a Gaussian superposition has this form with Re Q ≻ 0.
struct ComplexGaussian {
  Eigen::Matrix2cd Q = Eigen::Matrix2cd::Zero();
  Eigen::Vector2cd b = Eigen::Vector2cd::Zero();
  Complex c{0.0, 0.0};

  Complex exponent(const PhaseVector& xi) const;
  Complex value(const PhaseVector& xi) const { return std::exp(exponent(xi)); }
  /// ∇ξ of the value, (∂/∂ξ_p, ∂/∂ξ_q).
  std::pair<Complex, Complex> gradient(const PhaseVector& xi) const;

  /// Term seen through the linear change of variables ξ → L ξ, multiplied by
  /// exp(−ξᵀ D ξ / ħ).
  ComplexGaussian transformed(const Eigen::Matrix2d& L, const Eigen::Matrix2d& D, double hbar) const;

  /// Log of (1/(2πħ)²) ∫ dξ e^{i ξ∧x/ħ} · term(ξ), the phase-space
  /// Fourier conjugate used for Wigner functions.
  Complex log_fourier(const PhaseVector& x, double hbar) const;
};

/// Overlap integral ∫dq ψ_n(q + ξ_q/2) ψ_m*(q − ξ_q/2) e^{−iξ_p q/ħ} as a
/// ComplexGaussian in ξ.
ComplexGaussian pair_chord_term(const GaussianState& n, const GaussianState& m, double hbar);

/// Precomputed pairwise expansion χ(ξ) = Σ_{n,m} a_n a_m* I_nm(ξ).
/// Summation is compensated, n outer and m inner.
class ChordField {
 public:
  struct Pair {
    std::size_t n;
    std::size_t m;
    Complex coefficient;
    ComplexGaussian term;
  };

  /// Throws NotNormalized unless |χ(0) − 1| ≤ 1e-9.
  explicit ChordField(const Superposition& state);

  /// Field from precomputed pairs; no normalization check.
  static ChordField from_pairs(std::vector<Pair> pairs, double hbar);

  double hbar() const { return hbar_; }
  const std::vector<Pair>& pairs() const { return pairs_; }

  Complex operator()(const PhaseVector& xi) const;
  /// Value and gradient (∂χ/∂ξ_p, ∂χ/∂ξ_q).
  std::pair<Complex, std::pair<Complex, Complex>> value_and_gradient(const PhaseVector& xi) const;
  /// Σ |a_n a_m* I_nm(ξ)|, the scale against which cancellation is measured.
  double envelope(const PhaseVector& xi) const;

 private:
  struct Unchecked {};
  ChordField(const Superposition& state, Unchecked);
  ChordField(std::vector<Pair> pairs, double hbar) : hbar_(hbar), pairs_(std::move(pairs)) {}
  friend double norm_squared(const Superposition& state);

  double hbar_;
  std::vector<Pair> pairs_;
};

/// Wigner function assembled from the Fourier conjugates of the chord pairs.
class WignerField {
 public:
  explicit WignerField(const ChordField& chord);
  WignerField(std::vector<ChordField::Pair> pairs, double hbar);

  /// Throws ImaginaryResidue if the assembled imaginary part exceeds 1e-9
  /// of the local term scale.
  double operator()(const PhaseVector& x) const;
  /// W(x) / Σ|terms(x)|, computed in log space so that it stays meaningful
  /// where every term underflows.
  double relative_value(const PhaseVector& x) const;

 private:
  double hbar_;
  std::vector<ChordField::Pair> pairs_;
};

/// ⟨Ψ|Ψ⟩ including all cross overlaps.
double norm_squared(const Superposition& state);
/// ⟨a|b⟩. Both states must share ħ.
Complex inner_product(const Superposition& a, const Superposition& b);

/// Rescales amplitudes by 1/√⟨Ψ|Ψ⟩. Throws ZeroNorm below 1e-300.
Superposition normalize(const Superposition& state);

Complex chord_exact(const Superposition& state, const PhaseVector& xi);

struct QuadratureOptions {
  /// Composite Simpson step; ≤ 0 selects min(√ħ/20, ħ/(10(1 + max|η_p|))).
  double step = 0.0;
  /// Half-width of the integration range around the extreme centers; ≤ 0
  /// selects a width where every |ψ_n| < 1e-14·peak.
  double halfwidth = 0.0;
};

double default_quadrature_step(const Superposition& state);

/// Position-representation quadrature of the chord function, an independent
/// oracle for chord_exact. Throws BadQuadrature if step > ħ/(10·max|η_p| + 1).
Complex chord_quadrature(const Superposition& state, const PhaseVector& xi, const QuadratureOptions& options = {});

/// Superposition wavefunction evaluated directly from the Gaussian formula.
Complex wavefunction(const Superposition& state, double q);

double wigner_exact(const Superposition& state, const PhaseVector& x);

/// |χ(ξ)|² for a pure state.
double correlation_pure(const Superposition& state, const PhaseVector& xi);

/// Σ w_n χ_n(ξ) e^{i η_n∧ξ/ħ} with χ_n the chord of the n-th Gaussian
/// centered at the origin.
Complex chord_mixture(const MixedEnsemble& ensemble, const PhaseVector& xi);

/// |chord_mixture|² sampled on a window symmetric about the origin.
FieldGrid mixture_intensity(const MixedEnsemble& ensemble, const Window& window, std::size_t rows, std::size_t cols,
                            int threads = 1);

/// C = FT{|χ_mix|²} from intensity samples. Throws WindowTooSmall when the
/// boundary of the intensity grid exceeds 1e-12 of its peak.
FieldGrid correlation_mixture(const MixedEnsemble& ensemble, const FieldGrid& intensity);

/// T_ξ |Ψ⟩: centers shift by ξ, amplitudes pick up e^{i ξ∧η_n/2ħ}.
Superposition translate_state(const Superposition& state, const PhaseVector& xi);

/// Rigid re-centering T_{−η}|Ψ⟩; |χ| is unchanged.
Superposition shift_origin(const Superposition& state, const PhaseVector& eta);

/// Metaplectic image U_S|Ψ⟩: centers η → Sη, frames F → SF, chord
/// transported as χ'(Sξ) = χ(ξ).
Superposition apply_symplectic(const Superposition& state, const SymplecticMatrix& s);

/// Concatenates Σ_k c_k |Ψ_k⟩ (no normalization). All states share ħ.
Superposition superpose(const std::vector<std::pair<Complex, Superposition>>& parts);

}  // namespace blindspots
