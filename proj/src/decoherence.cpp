#include "blindspots/decoherence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/LU>

#include "blindspots/error.hpp"
#include "blindspots/spots.hpp"

namespace blindspots {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::Matrix2d symplectic_j() {
  Eigen::Matrix2d j;
  j << 0.0, -1.0, 1.0, 0.0;
  return j;
}

void require_time(double t) {
  if (!std::isfinite(t)) throw Error(ErrorCode::InvalidArgument, "time must be finite");
  if (t < 0.0) throw Error(ErrorCode::NegativeTime, "time " + format_number(t) + " is negative");
}

// Fourier transform of exp(−½ηᵀQη + bᵀη + c), precomputed for repeated
// evaluation: log of (1/2πħ)^k ∫ dη e^{iη∧x/ħ}(·) is log_prefactor + ½BᵀQ⁻¹B.
struct GaussianTransform {
  Eigen::Matrix2cd Qinv;
  Eigen::Vector2cd b;
  Complex log_prefactor;

  GaussianTransform(const Eigen::Matrix2cd& Q, const Eigen::Vector2cd& b_, Complex log_constant)
      : Qinv(Q.inverse()), b(b_), log_prefactor(log_constant + std::log(kTwoPi) - 0.5 * std::log(Q.determinant())) {}

  Complex log_value(const PhaseVector& x, double hbar) const {
    const Eigen::Vector2cd B = b + (kI / hbar) * Eigen::Vector2cd(x.q, -x.p);
    return log_prefactor + 0.5 * (B.transpose() * Qinv * B)(0, 0);
  }
};

}  // namespace

LindbladModel::LindbladModel(const Eigen::Matrix2d& hamiltonian, std::vector<Coupling> couplings)
    : h_(hamiltonian), couplings_(std::move(couplings)) {
  if (!h_.allFinite()) throw Error(ErrorCode::InvalidArgument, "Hamiltonian must be finite");
  if (std::abs(h_(0, 1) - h_(1, 0)) > 1e-12) throw Error(ErrorCode::InvalidArgument, "Hamiltonian must be symmetric");
  h_(0, 1) = h_(1, 0) = 0.5 * (h_(0, 1) + h_(1, 0));
  for (const auto& c : couplings_) {
    if (!c.re.is_finite() || !c.im.is_finite()) throw Error(ErrorCode::InvalidArgument, "couplings must be finite");
  }
}

LindbladModel LindbladModel::position_momentum(double strength) {
  return LindbladModel(Eigen::Matrix2d::Zero(), {Coupling{{strength, 0.0}, {}}, Coupling{{0.0, strength}, {}}});
}

Eigen::Matrix2d LindbladModel::diffusion() const {
  Eigen::Matrix2d k = Eigen::Matrix2d::Zero();
  for (const auto& c : couplings_) {
    const Eigen::Vector2d re = c.re.to_eigen(), im = c.im.to_eigen();
    k += re * re.transpose() + im * im.transpose();
  }
  return k;
}

double dissipation_coeff(const LindbladModel& model) {
  CompensatedSum alpha;
  for (const auto& c : model.couplings()) alpha.add(skew(c.im, c.re));
  return alpha.value();
}

Eigen::Matrix2d propagator_matrix(const Eigen::Matrix2d& hamiltonian, double t) {
  if (!std::isfinite(t) || !hamiltonian.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite input");
  const Eigen::Matrix2d a = 2.0 * symplectic_j() * hamiltonian * t;
  const double half_trace = 0.5 * a.trace();
  const Eigen::Matrix2d b = a - half_trace * Eigen::Matrix2d::Identity();
  // b² = −δ·I for traceless b.
  const double delta = b.determinant();
  Eigen::Matrix2d e;
  if (delta > 0.0) {
    const double w = std::sqrt(delta);
    e = std::cos(w) * Eigen::Matrix2d::Identity() + (std::sin(w) / w) * b;
  } else if (delta < 0.0) {
    const double w = std::sqrt(-delta);
    e = std::cosh(w) * Eigen::Matrix2d::Identity() + (std::sinh(w) / w) * b;
  } else {
    e = Eigen::Matrix2d::Identity() + b;
  }
  return std::exp(half_trace) * e;
}

DecoherenceGaussian decoherence_matrix(const LindbladModel& model, double t, double hbar, int steps) {
  require_time(t);
  if (!(hbar > 0.0)) throw Error(ErrorCode::InvalidArgument, "hbar must be positive");
  if (steps < 2) throw Error(ErrorCode::InvalidArgument, "quadrature needs at least two panels");
  if (steps % 2 != 0) ++steps;

  DecoherenceGaussian g;
  g.t = t;
  g.hbar = hbar;
  if (t == 0.0) return g;

  const double alpha = dissipation_coeff(model);
  const Eigen::Matrix2d k = model.diffusion();
  const auto integrand = [&](double tp) -> Eigen::Matrix2d {
    const Eigen::Matrix2d r = propagator_matrix(model.hamiltonian(), tp - t);
    return 2.0 * std::exp(2.0 * alpha * (tp - t)) * r.transpose() * k * r;
  };
  const auto simpson = [&](int n) {
    const double h = t / n;
    Eigen::Matrix2d sum = integrand(0.0) + integrand(t);
    for (int i = 1; i < n; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * integrand(h * i);
    return Eigen::Matrix2d((h / 3.0) * sum);
  };
  // Strongly hyperbolic flows need more panels than the default; double
  // until two successive rules agree.
  Eigen::Matrix2d coarse = simpson(steps);
  for (int n = 2 * steps; n <= (steps << 12); n *= 2) {
    const Eigen::Matrix2d fine = simpson(n);
    const bool settled = (fine - coarse).norm() <= 1e-11 * std::max(1.0, fine.norm());
    coarse = fine;
    if (settled) break;
  }
  g.M = kDecoherenceCalibration * coarse;
  g.M = 0.5 * (g.M + g.M.transpose()).eval();
  return g;
}

ChordField evolved_chord_field(const Superposition& state, const LindbladModel& model, double t, int steps) {
  require_time(t);
  const double alpha = dissipation_coeff(model);
  if (std::abs(alpha) > 1e-12) {
    throw Error(ErrorCode::DissipativeUnsupported, "dissipation coefficient " + format_number(alpha) + " is nonzero");
  }
  const ChordField initial(state);
  const DecoherenceGaussian g = decoherence_matrix(model, t, state.hbar(), steps);
  const Eigen::Matrix2d back = propagator_matrix(model.hamiltonian(), -t);
  std::vector<ChordField::Pair> pairs = initial.pairs();
  for (auto& pr : pairs) pr.term = pr.term.transformed(back, g.M, state.hbar());
  return ChordField::from_pairs(std::move(pairs), state.hbar());
}

Complex evolved_chord(const Superposition& state, const LindbladModel& model, const PhaseVector& xi, double t) {
  return evolved_chord_field(state, model, t)(xi);
}

Complex master_equation_rhs(const ChordField& chord, const LindbladModel& model, const PhaseVector& xi) {
  const auto [value, grad] = chord.value_and_gradient(xi);
  const Eigen::Vector2d dh = 2.0 * model.hamiltonian() * xi.to_eigen();
  const Complex bracket = dh(1) * grad.first - dh(0) * grad.second;
  double decay = 0.0;
  for (const auto& c : model.couplings()) {
    const double a = dot(c.re, xi), b = dot(c.im, xi);
    decay += a * a + b * b;
  }
  return bracket - decay / (2.0 * chord.hbar()) * value;
}

CorrelationField::CorrelationField(const ChordField& chord) : hbar_(chord.hbar()) {
  const auto& pairs = chord.pairs();
  products_.reserve(pairs.size() * pairs.size());
  for (const auto& a : pairs) {
    for (const auto& b : pairs) {
      // a·conj(b) is again Gaussian; C carries one factor 1/2πħ.
      const Eigen::Matrix2cd Q = a.term.Q + b.term.Q.conjugate();
      const Eigen::Vector2cd lin = a.term.b + b.term.b.conjugate();
      const Complex log_c = std::log(a.coefficient * std::conj(b.coefficient)) + a.term.c + std::conj(b.term.c) -
                            std::log(kTwoPi * hbar_);
      const GaussianTransform tr(Q, lin, log_c);
      products_.push_back({tr.Qinv, tr.b, tr.log_prefactor});
    }
  }
}

double CorrelationField::operator()(const PhaseVector& xi) const {
  CompensatedSum sum;
  for (const auto& pr : products_) {
    const Eigen::Vector2cd B = pr.b + (kI / hbar_) * Eigen::Vector2cd(xi.q, -xi.p);
    sum.add(std::exp(pr.log_prefactor + 0.5 * (B.transpose() * pr.Qinv * B)(0, 0)).real());
  }
  return sum.value();
}

Window support_window(const ChordField& chord, double threshold) {
  const double log_thr = std::log(threshold);
  double half_p = 0.0, half_q = 0.0;
  for (const auto& pr : chord.pairs()) {
    Eigen::Matrix2d q = pr.term.Q.real();
    q = 0.5 * (q + q.transpose()).eval();
    const Eigen::Matrix2d qinv = q.inverse();
    const Eigen::Vector2d mu = qinv * pr.term.b.real();
    const double peak = std::log(std::abs(pr.coefficient)) + pr.term.c.real() + 0.5 * mu.dot(q * mu);
    if (peak <= log_thr) continue;
    const double r2 = 2.0 * (peak - log_thr);
    half_p = std::max(half_p, std::abs(mu(0)) + std::sqrt(r2 * qinv(0, 0)));
    half_q = std::max(half_q, std::abs(mu(1)) + std::sqrt(r2 * qinv(1, 1)));
  }
  return Window::symmetric(half_p, half_q);
}

FieldGrid evolved_correlation(const Superposition& state, const LindbladModel& model, const Window& window,
                              std::size_t rows, std::size_t cols, double t, int threads) {
  const ChordField chord = evolved_chord_field(state, model, t);
  const FieldGrid intensity = sample_grid(
      window, rows, cols, FieldKind::Intensity, [&](const PhaseVector& xi) { return Complex(std::norm(chord(xi)), 0.0); },
      threads);
  require_adequate_window(intensity, 1e-12);
  FieldGrid out = fourier_2d(intensity, state.hbar(), FieldKind::Correlation);
  out.check_real_kind();
  return out;
}

std::vector<double> evolved_correlation_points(const Superposition& state, const LindbladModel& model,
                                               const std::vector<PhaseVector>& points, double t, int threads) {
  const ChordField chord = evolved_chord_field(state, model, t);
  const Window support = support_window(chord);
  const double half = std::max(support.p_max, support.q_max);
  double reach = 0.0;
  for (const auto& x : points) reach = std::max({reach, std::abs(x.p), std::abs(x.q)});
  // The trapezoid sum periodizes C with period 2πħ/h; keep the images of
  // its support away from every evaluation point.
  const double h = kTwoPi * state.hbar() / (2.0 * half + reach + 1.0);
  const auto n = static_cast<std::size_t>(std::ceil(2.0 * half / h)) + 1;
  const FieldGrid intensity = sample_grid(
      Window::symmetric(half, half), n, n, FieldKind::Intensity,
      [&](const PhaseVector& xi) { return Complex(std::norm(chord(xi)), 0.0); }, threads);
  require_adequate_window(intensity, 1e-12);
  std::vector<double> out(points.size());
  for_each_row(points.size(), threads,
               [&](std::size_t k) { out[k] = fourier_point(intensity, state.hbar(), points[k]).real(); });
  return out;
}

std::vector<double> line_samples(double s_min, double s_max, std::size_t n_samples) {
  if (n_samples < 2 || !(s_max > s_min)) throw Error(ErrorCode::InvalidArgument, "scan needs s_max > s_min and 2+ samples");
  std::vector<double> s(n_samples);
  const double h = (s_max - s_min) / static_cast<double>(n_samples - 1);
  for (std::size_t i = 0; i < n_samples; ++i) s[i] = s_min + h * static_cast<double>(i);
  s.back() = s_max;
  return s;
}

namespace {

std::vector<double> scan_values(const CorrelationField& field, const ScanLine& line, const std::vector<double>& samples,
                                int threads) {
  std::vector<double> out(samples.size());
  for_each_row(samples.size(), threads, [&](std::size_t i) { out[i] = field(line.at(samples[i])); });
  return out;
}

}  // namespace

LineScanSeries scan_line(const Superposition& state, const LindbladModel& model, const ScanLine& line, double s_min,
                         double s_max, std::size_t n_samples, const std::vector<double>& times, int threads) {
  if (!(line.direction.norm() > 0.0)) throw Error(ErrorCode::InvalidArgument, "scan direction must be nonzero");
  LineScanSeries series;
  series.line = line;
  series.samples = line_samples(s_min, s_max, n_samples);
  series.times = times;
  for (double t : times) {
    const CorrelationField field(evolved_chord_field(state, model, t));
    series.values.push_back(scan_values(field, line, series.samples, threads));
  }
  return series;
}

namespace {

struct Extremum {
  double s;
  double value;
};

// Vertex of the parabola through samples k−1, k, k+1.
Extremum refine_extremum(const std::vector<double>& s, const std::vector<double>& v, std::size_t k) {
  if (k == 0 || k + 1 >= v.size()) return {s[k], v[k]};
  const double denom = v[k - 1] - 2.0 * v[k] + v[k + 1];
  if (denom == 0.0) return {s[k], v[k]};
  const double offset = std::clamp(0.5 * (v[k - 1] - v[k + 1]) / denom, -0.5, 0.5);
  const double h = 0.5 * (s[k + 1] - s[k - 1]);
  return {s[k] + offset * h, v[k] - 0.25 * (v[k - 1] - v[k + 1]) * offset};
}

}  // namespace

LiftingSample minimum_contrast(const std::vector<double>& samples, const std::vector<double>& values, double s_spot,
                               double t, std::optional<std::pair<double, double>> bracket) {
  if (samples.size() != values.size() || samples.size() < 3) {
    throw Error(ErrorCode::InvalidArgument, "scan needs matching samples and values, at least three");
  }
  const std::size_t n = values.size();
  LiftingSample out;
  out.t = t;

  std::optional<std::size_t> best;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (!(values[k] < values[k - 1] && values[k] <= values[k + 1])) continue;
    if (bracket && !(samples[k] > bracket->first && samples[k] < bracket->second)) continue;
    if (!best || std::abs(samples[k] - s_spot) < std::abs(samples[*best] - s_spot)) best = k;
  }
  if (!best) return out;

  std::optional<std::size_t> left, right;
  for (std::size_t k = *best; k-- > 1;) {
    if (values[k] >= values[k - 1] && values[k] > values[k + 1]) {
      left = k;
      break;
    }
  }
  for (std::size_t k = *best + 1; k + 1 < n; ++k) {
    if (values[k] > values[k - 1] && values[k] >= values[k + 1]) {
      right = k;
      break;
    }
  }
  const Extremum lo = refine_extremum(samples, values, *best);
  if (!left || !right) {
    out.envelope = std::max(lo.value, 0.0);
    return out;
  }
  const Extremum l = refine_extremum(samples, values, *left);
  const Extremum r = refine_extremum(samples, values, *right);
  const double w = (lo.s - l.s) / (r.s - l.s);
  out.envelope = l.value + w * (r.value - l.value);
  out.delta = std::max(out.envelope - lo.value, 0.0);
  return out;
}

LiftingResult lifting_time(const LineScanSeries& series, const PhaseVector& spot, double epsilon,
                           const LineResampler& resampler) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must lie in (0, 1)");
  if (series.times.empty() || series.values.size() != series.times.size()) {
    throw Error(ErrorCode::InvalidArgument, "series needs one scan per time");
  }
  for (std::size_t k = 1; k < series.times.size(); ++k) {
    if (!(series.times[k] > series.times[k - 1])) throw Error(ErrorCode::InvalidArgument, "times must increase");
  }
  const auto& s = series.samples;
  const double s_spot = series.line.coordinate(spot);
  const double spacing = (s.back() - s.front()) / static_cast<double>(s.size() - 1);

  // Locate the spot's minimum and its neighbouring maxima in the first scan.
  const auto& first = series.values.front();
  std::optional<std::size_t> kmin;
  for (std::size_t k = 1; k + 1 < first.size(); ++k) {
    if (first[k] < first[k - 1] && first[k] <= first[k + 1] && std::abs(s[k] - s_spot) <= 2.0 * spacing) {
      if (!kmin || std::abs(s[k] - s_spot) < std::abs(s[*kmin] - s_spot)) kmin = k;
    }
  }
  if (!kmin) throw Error(ErrorCode::NoMinimum, "spot is not a local minimum of the first scan");
  double s_left = s.front(), s_right = s.back();
  for (std::size_t k = *kmin; k-- > 1;) {
    if (first[k] >= first[k - 1] && first[k] > first[k + 1]) {
      s_left = s[k];
      break;
    }
  }
  for (std::size_t k = *kmin + 1; k + 1 < first.size(); ++k) {
    if (first[k] > first[k - 1] && first[k] >= first[k + 1]) {
      s_right = s[k];
      break;
    }
  }
  const std::pair<double, double> bracket{s_left, s_right};
  const double s_min0 = s[*kmin];

  LiftingResult result;
  result.spot = spot;
  result.epsilon = epsilon;
  std::optional<std::size_t> crossing;
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    result.delta_series.push_back(minimum_contrast(s, series.values[k], s_min0, series.times[k], bracket));
    if (!crossing && result.delta_series.back().relative() < epsilon) crossing = k;
  }
  if (crossing == 0u) throw Error(ErrorCode::NoMinimum, "spot has no resolved contrast in the first scan");
  if (!crossing) {
    throw Error(ErrorCode::NeverLifted, "relative contrast " + format_number(result.delta_series.back().relative()) +
                                            " at the last time exceeds " + format_number(epsilon));
  }
  double lo = series.times[*crossing - 1], hi = series.times[*crossing];
  if (resampler) {
    while (hi - lo > 1e-3 * hi) {
      const double mid = 0.5 * (lo + hi);
      const LiftingSample sample = minimum_contrast(s, resampler(mid), s_min0, mid, bracket);
      if (sample.relative() < epsilon) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    result.tau_l = hi;
    return result;
  }
  const double r_lo = result.delta_series[*crossing - 1].relative();
  const double r_hi = result.delta_series[*crossing].relative();
  double w;
  if (r_hi > 0.0 && r_lo > 0.0) {
    w = (std::log(r_lo) - std::log(epsilon)) / (std::log(r_lo) - std::log(r_hi));
  } else {
    w = (r_lo - epsilon) / (r_lo - r_hi);
  }
  result.tau_l = lo + std::clamp(w, 0.0, 1.0) * (hi - lo);
  return result;
}

// ---------------------------------------------------------------------------
// Positivity

namespace {

struct WignerTerm {
  Eigen::Matrix2cd Qinv;
  Eigen::Vector2cd b;
  Complex log_prefactor;
};

std::vector<WignerTerm> wigner_terms(const ChordField& chord) {
  const double hbar = chord.hbar();
  std::vector<WignerTerm> terms;
  for (const auto& pr : chord.pairs()) {
    const Complex log_c = std::log(pr.coefficient) + pr.term.c - 2.0 * std::log(kTwoPi * hbar);
    const GaussianTransform tr(pr.term.Q, pr.term.b, log_c);
    terms.push_back({tr.Qinv, tr.b, tr.log_prefactor});
  }
  return terms;
}

double relative_wigner(const std::vector<WignerTerm>& terms, double hbar, const PhaseVector& x,
                       std::vector<Complex>& scratch) {
  scratch.resize(terms.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const Eigen::Vector2cd B = terms[k].b + (kI / hbar) * Eigen::Vector2cd(x.q, -x.p);
    scratch[k] = terms[k].log_prefactor + 0.5 * (B.transpose() * terms[k].Qinv * B)(0, 0);
    top = std::max(top, scratch[k].real());
  }
  CompensatedSum value, scale;
  for (const Complex& l : scratch) {
    const Complex v = std::exp(l - top);
    value.add(v.real());
    scale.add(std::abs(v));
  }
  return value.value() / scale.value();
}

}  // namespace

double min_relative_wigner(const Superposition& state, const LindbladModel& model, double t, int threads) {
  const ChordField chord = evolved_chord_field(state, model, t);
  const std::vector<WignerTerm> terms = wigner_terms(chord);
  const double hbar = state.hbar();

  // Centers after the unitary flow; negativity lives between them.
  const Eigen::Matrix2d forward = propagator_matrix(model.hamiltonian(), t);
  Window box{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  double separation = 0.0;
  std::vector<PhaseVector> centers;
  for (const auto& term : state.terms()) centers.push_back(PhaseVector::from_eigen(forward * term.state.center.to_eigen()));
  for (const auto& c : centers) {
    box.p_min = std::min(box.p_min, c.p);
    box.p_max = std::max(box.p_max, c.p);
    box.q_min = std::min(box.q_min, c.q);
    box.q_max = std::max(box.q_max, c.q);
    for (const auto& o : centers) separation = std::max(separation, (c - o).norm());
  }
  const double pad = 2.0 * std::sqrt(hbar * (1.0 + 2.0 * t));
  box.p_min -= pad;
  box.p_max += pad;
  box.q_min -= pad;
  box.q_max += pad;

  // Fringe period 2πħ/separation, resolved by eight samples.
  const double step = std::min(std::sqrt(hbar), kTwoPi * hbar / std::max(separation, 1e-300)) / 8.0;
  const auto rows = static_cast<std::size_t>(std::ceil(box.p_extent() / step)) + 1;
  const auto cols = static_cast<std::size_t>(std::ceil(box.q_extent() / step)) + 1;
  std::vector<double> row_min(rows);
  std::vector<PhaseVector> row_arg(rows);
  for_each_row(rows, threads, [&](std::size_t i) {
    std::vector<Complex> scratch;
    double best = std::numeric_limits<double>::infinity();
    PhaseVector arg{};
    for (std::size_t j = 0; j < cols; ++j) {
      const PhaseVector x{box.p_min + step * static_cast<double>(i), box.q_min + step * static_cast<double>(j)};
      const double v = relative_wigner(terms, hbar, x, scratch);
      if (v < best) {
        best = v;
        arg = x;
      }
    }
    row_min[i] = best;
    row_arg[i] = arg;
  });

  // Zoom around the few worst rows' minima.
  std::vector<std::size_t> order(rows);
  for (std::size_t i = 0; i < rows; ++i) order[i] = i;
  const std::size_t keep = std::min<std::size_t>(rows, 8);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    [&](std::size_t a, std::size_t b) { return row_min[a] < row_min[b]; });
  double best = row_min[order[0]];
  std::vector<Complex> scratch;
  for (std::size_t r = 0; r < keep; ++r) {
    PhaseVector centre = row_arg[order[r]];
    double local = row_min[order[r]];
    double h = step;
    for (int level = 0; level < 4; ++level) {
      h /= 4.0;
      PhaseVector next = centre;
      for (int a = -4; a <= 4; ++a) {
        for (int c = -4; c <= 4; ++c) {
          const PhaseVector x = centre + PhaseVector{h * a, h * c};
          const double v = relative_wigner(terms, hbar, x, scratch);
          if (v < local) {
            local = v;
            next = x;
          }
        }
      }
      centre = next;
    }
    best = std::min(best, local);
  }
  return best;
}

double min_grid_wigner(const Superposition& state, const LindbladModel& model, double t, const Window& window,
                       std::size_t rows, std::size_t cols, int threads) {
  const ChordField chord = evolved_chord_field(state, model, t);
  const FieldGrid chord_grid = sample_grid(window, rows, cols, FieldKind::Chord, chord, threads);
  require_adequate_window(chord_grid, 1e-12);
  FieldGrid w = fourier_2d(chord_grid, state.hbar(), FieldKind::Wigner);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& v : w.values()) {
    lo = std::min(lo, v.real());
    hi = std::max(hi, v.real());
  }
  // The 1/2πħ of the Wigner normalization cancels in the ratio.
  return lo / hi;
}

double positivity_time(const Superposition& state, const LindbladModel& model, const PositivityOptions& options) {
  require_time(options.t_max);
  if (!(options.tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be nonnegative");
  const auto positive = [&](double t) {
    if (options.method == PositivityMethod::Analytic) {
      return min_relative_wigner(state, model, t, options.threads) >= -options.tol;
    }
    const Window window = options.window ? *options.window : support_window(ChordField(state));
    return min_grid_wigner(state, model, t, window, options.rows, options.cols, options.threads) >= -options.tol;
  };
  if (positive(0.0)) return 0.0;
  if (!positive(options.t_max)) {
    throw Error(ErrorCode::NeverPositive, "Wigner function still negative at t = " + format_number(options.t_max));
  }
  double lo = 0.0, hi = options.t_max;
  while (hi - lo > 1e-3 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (positive(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

// ---------------------------------------------------------------------------
// Lifting ratio

double triangle_area(const PhaseVector& a, const PhaseVector& b, const PhaseVector& c) {
  return 0.5 * std::abs(skew(b - a, c - a));
}

PhaseVector blind_spot_on_line(const Superposition& state, const ScanLine& line) {
  const DiffractionModel model = DiffractionModel::from_superposition(state);
  const BlindSpotLattice lattice = hexagonal_lattice(model, IndexRange::square(3));
  const PhaseVector unit = (1.0 / line.direction.norm()) * line.direction;
  std::optional<PhaseVector> best;
  for (const auto& node : lattice.nodes) {
    const double off = std::abs(skew(unit, node.xi - line.point));
    if (off > 1e-9 * (1.0 + node.xi.norm())) continue;
    if (!best || node.xi.norm() < best->norm()) best = node.xi;
  }
  if (!best) throw Error(ErrorCode::NoMinimum, "no lattice node lies on the scan line");
  return *best;
}

LiftingRatio lifting_ratio(const Superposition& state, const LindbladModel& model, const LiftingRatioOptions& options) {
  if (state.size() != 3) throw Error(ErrorCode::WrongArity, "lifting ratio needs a three-term state");
  if (!(options.t_start > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_start must be positive");
  LiftingRatio out;
  out.area = triangle_area(state[0].state.center, state[1].state.center, state[2].state.center);
  out.spot = blind_spot_on_line(state, options.line);

  // The origin is always a maximum of C, so the scan reaches past it.
  const DiffractionModel diffraction = DiffractionModel::from_superposition(state);
  const double spacing = nearest_neighbor_spacing(hexagonal_lattice(diffraction, IndexRange::square(2)));
  const double s_spot = options.line.coordinate(out.spot);
  const double reach = options.span * std::max(spacing, std::abs(s_spot - options.line.coordinate({})));
  const std::vector<double> samples = line_samples(s_spot - reach, s_spot + reach, options.samples);

  const auto resample = [&](double t) {
    const CorrelationField field(evolved_chord_field(state, model, t));
    return scan_values(field, options.line, samples, options.threads);
  };
  LineScanSeries series;
  series.line = options.line;
  series.samples = samples;
  series.times = {0.0};
  series.values = {resample(0.0)};
  const double t_limit = options.positivity.t_max;
  for (double t = options.t_start;; t *= 2.0) {
    if (t > t_limit) {
      throw Error(ErrorCode::NeverLifted, "spot still resolved at t = " + format_number(t_limit));
    }
    series.times.push_back(t);
    series.values.push_back(resample(t));
    try {
      lifting_time(series, out.spot, options.epsilon);
      break;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NeverLifted) throw;
    }
  }
  out.tau_l = lifting_time(series, out.spot, options.epsilon, resample).tau_l;
  out.t_p = positivity_time(state, model, options.positivity);
  out.ratio = out.t_p > 0.0 ? out.tau_l * out.area / (state.hbar() * out.t_p) : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace blindspots
