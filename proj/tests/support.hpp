#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "blindspots/core.hpp"

namespace testing {

using blindspots::Complex;
using blindspots::PhaseVector;
using blindspots::Superposition;
using blindspots::Term;

inline Superposition equal_superposition(double hbar, const std::vector<PhaseVector>& centers) {
  std::vector<Term> terms;
  for (const auto& c : centers) terms.push_back({Complex{1.0, 0.0}, {c, {}}});
  return blindspots::normalize(Superposition(hbar, std::move(terms)));
}

inline Superposition oblique_triplet() { return equal_superposition(0.075, {{0.0, 0.0}, {1.5, -0.1}, {0.2, 1.5}}); }
inline Superposition wide_triplet() { return equal_superposition(0.075, {{0.0, 0.0}, {-4.0, 0.3}, {0.2, 3.0}}); }
inline Superposition corner_triplet(double d, double hbar = 0.075) {
  return equal_superposition(hbar, {{0.0, 0.0}, {0.0, d}, {d, 0.0}});
}

inline Superposition cat(double hbar, const PhaseVector& eta, Complex a0 = 1.0, Complex a1 = 1.0) {
  return blindspots::normalize(Superposition(hbar, {{a0, {{0.0, 0.0}, {}}}, {a1, {eta, {}}}}));
}

inline Superposition random_state(std::mt19937_64& rng, std::size_t n, double hbar, double spread = 2.0) {
  std::uniform_real_distribution<double> pos(-spread, spread), amp(-1.0, 1.0);
  std::vector<Term> terms;
  for (std::size_t k = 0; k < n; ++k) {
    Complex a{amp(rng), amp(rng)};
    if (std::abs(a) < 0.1) a += 0.5;
    terms.push_back({a, {{pos(rng), pos(rng)}, {}}});
  }
  return blindspots::normalize(Superposition(hbar, std::move(terms)));
}

inline PhaseVector random_vector(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(-radius, radius);
  for (;;) {
    PhaseVector v{u(rng), u(rng)};
    if (v.norm() <= radius) return v;
  }
}

// Oracles written from the textbook formulas, independent of the library's
// pairwise-Gaussian machinery.
namespace oracle {

constexpr Complex kI{0.0, 1.0};

inline double wedge(const PhaseVector& a, const PhaseVector& b) { return a.p * b.q - a.q * b.p; }

// Chord of one vacuum-frame coherent state at eta.
inline Complex coherent_chord(const PhaseVector& eta, const PhaseVector& xi, double hbar) {
  return std::exp(kI * wedge(eta, xi) / hbar - (xi.p * xi.p + xi.q * xi.q) / (4.0 * hbar));
}

inline double coherent_wigner(const PhaseVector& eta, const PhaseVector& x, double hbar) {
  const double d2 = (x.p - eta.p) * (x.p - eta.p) + (x.q - eta.q) * (x.q - eta.q);
  return std::exp(-d2 / hbar) / (std::numbers::pi * hbar);
}

inline Complex coherent_wavefunction(const PhaseVector& eta, double q, double hbar) {
  const double dq = q - eta.q;
  return std::pow(std::numbers::pi * hbar, -0.25) *
         std::exp(-dq * dq / (2.0 * hbar) + kI * eta.p * (q - 0.5 * eta.q) / hbar);
}

// Trapezoid rule on a fine uniform grid; the integrand is smooth and
// decays like a Gaussian, so the rule converges spectrally.
inline Complex chord_by_trapezoid(const Superposition& s, const PhaseVector& xi, double h = 2e-3) {
  const double hbar = s.hbar();
  double lo = 1e300, hi = -1e300;
  for (const auto& t : s.terms()) {
    lo = std::min(lo, t.state.center.q);
    hi = std::max(hi, t.state.center.q);
  }
  const double pad = std::sqrt(2.0 * hbar * 40.0) + std::abs(xi.q);
  lo -= pad;
  hi += pad;
  const auto psi = [&](double q) {
    Complex v{};
    for (const auto& t : s.terms()) v += t.amplitude * coherent_wavefunction(t.state.center, q, hbar);
    return v;
  };
  Complex sum{};
  const auto n = static_cast<long>(std::ceil((hi - lo) / h));
  const double step = (hi - lo) / static_cast<double>(n);
  for (long k = 0; k <= n; ++k) {
    const double q = lo + step * static_cast<double>(k);
    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
    sum += w * psi(q + 0.5 * xi.q) * std::conj(psi(q - 0.5 * xi.q)) * std::exp(-kI * xi.p * q / hbar);
  }
  return sum * step;
}

// C of the classical mixture of vacuum-frame coherent states:
// Σ w_n w_m exp(−|ξ − (η_n − η_m)|²/2ħ).
inline double mixture_correlation(const std::vector<double>& w, const std::vector<PhaseVector>& eta,
                                  const PhaseVector& xi, double hbar) {
  double sum = 0.0;
  for (std::size_t n = 0; n < w.size(); ++n) {
    for (std::size_t m = 0; m < w.size(); ++m) {
      const PhaseVector d = xi - (eta[n] - eta[m]);
      sum += w[n] * w[m] * std::exp(-(d.p * d.p + d.q * d.q) / (2.0 * hbar));
    }
  }
  return sum;
}

}  // namespace oracle

}  // namespace testing
