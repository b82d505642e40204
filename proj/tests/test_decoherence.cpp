#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "blindspots/decoherence.hpp"
#include "blindspots/error.hpp"
#include "blindspots/spots.hpp"
#include "support.hpp"

using namespace blindspots;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

Eigen::Matrix2d taylor_exp(const Eigen::Matrix2d& a) {
  // Scaling and squaring around a plain power series.
  int squarings = 0;
  Eigen::Matrix2d x = a;
  while (x.norm() > 0.1) {
    x /= 2.0;
    ++squarings;
  }
  Eigen::Matrix2d term = Eigen::Matrix2d::Identity(), sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * x / k;
    sum += term;
  }
  for (int k = 0; k < squarings; ++k) sum = (sum * sum).eval();
  return sum;
}

Eigen::Matrix2d random_symmetric(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double off = u(rng);
  Eigen::Matrix2d h;
  h << u(rng), off, off, u(rng);
  return h;
}

const Eigen::Matrix2d kJ = (Eigen::Matrix2d() << 0.0, -1.0, 1.0, 0.0).finished();

}  // namespace

TEST_CASE("propagator") {
  CHECK((propagator_matrix(Eigen::Matrix2d::Zero(), 3.0) - Eigen::Matrix2d::Identity()).norm() == 0.0);
  const Eigen::Matrix2d rot = propagator_matrix(0.5 * Eigen::Matrix2d::Identity(), 0.7);
  Eigen::Matrix2d expected;
  expected << std::cos(0.7), -std::sin(0.7), std::sin(0.7), std::cos(0.7);
  CHECK((rot - expected).norm() < 1e-15);

  std::mt19937_64 rng(5);
  for (int k = 0; k < 200; ++k) {
    const Eigen::Matrix2d h = random_symmetric(rng);
    const double t = 0.9, s = -0.4;
    const Eigen::Matrix2d r = propagator_matrix(h, t);
    CHECK((r - taylor_exp(2.0 * kJ * h * t)).norm() < 1e-12 * std::max(1.0, r.norm()));
    CHECK((propagator_matrix(h, t + s) - r * propagator_matrix(h, s)).norm() < 1e-12 * std::max(1.0, r.norm()));
    CHECK(std::abs(r.determinant() - 1.0) < 1e-12);
  }
  Eigen::Matrix2d parabolic;
  parabolic << 1.0, 0.0, 0.0, 0.0;
  CHECK((propagator_matrix(parabolic, 0.5) - taylor_exp(kJ * parabolic)).norm() < 1e-14);
}

TEST_CASE("dissipation coefficient") {
  CHECK(dissipation_coeff(LindbladModel::position_momentum(2.0)) == 0.0);
  const LindbladModel lossy(Eigen::Matrix2d::Zero(), {Coupling{{1.0, 0.0}, {0.0, 1.0}}});
  CHECK(dissipation_coeff(lossy) == -1.0);
  CHECK(code_of([&] { evolved_chord_field(testing::oblique_triplet(), lossy, 0.1); }) ==
        ErrorCode::DissipativeUnsupported);
  Eigen::Matrix2d asym;
  asym << 0.0, 1.0, 0.0, 0.0;
  CHECK(code_of([&] { LindbladModel(asym, {}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("decoherence matrix") {
  const double hbar = 0.075;
  const auto pq = LindbladModel::position_momentum();
  for (double t : {0.0, 0.1, 0.5, 2.0}) {
    CHECK((decoherence_matrix(pq, t, hbar).M - 0.5 * t * Eigen::Matrix2d::Identity()).norm() < 1e-12);
    const LindbladModel rotating(0.5 * Eigen::Matrix2d::Identity(), pq.couplings());
    CHECK((decoherence_matrix(rotating, t, hbar).M - 0.5 * t * Eigen::Matrix2d::Identity()).norm() < 1e-12);
  }
  CHECK((decoherence_matrix(LindbladModel::position_momentum(2.0), 0.3, hbar).M - 0.6 * Eigen::Matrix2d::Identity())
            .norm() < 1e-12);

  std::mt19937_64 rng(17);
  for (int k = 0; k < 20; ++k) {
    const LindbladModel model(random_symmetric(rng), {Coupling{{0.3, -0.8}, {}}, Coupling{{1.1, 0.2}, {}}});
    const auto a = decoherence_matrix(model, 1.3, hbar, 200);
    const auto b = decoherence_matrix(model, 1.3, hbar, 400);
    CHECK((a.M - b.M).norm() < 1e-10);
    CHECK((a.M - a.M.transpose()).norm() == 0.0);
    CHECK(a.M.determinant() >= 0.0);
  }
  CHECK(code_of([&] { decoherence_matrix(pq, -0.1, hbar); }) == ErrorCode::NegativeTime);
}

TEST_CASE("master equation residual") {
  const auto s = testing::oblique_triplet();
  const auto pq = LindbladModel::position_momentum();
  const LindbladModel rotating(0.5 * Eigen::Matrix2d::Identity(), pq.couplings());
  std::mt19937_64 rng(23);
  for (const auto& model : {pq, rotating}) {
    for (double t : {0.05, 0.3}) {
      const double h = 1e-5;
      const ChordField now = evolved_chord_field(s, model, t);
      const ChordField ahead = evolved_chord_field(s, model, t + h);
      const ChordField behind = evolved_chord_field(s, model, t - h);
      double worst = 0.0, scale = 0.0;
      for (int k = 0; k < 200; ++k) {
        const PhaseVector xi = testing::random_vector(rng, 1.0);
        const Complex dt = (ahead(xi) - behind(xi)) / (2.0 * h);
        const Complex rhs = master_equation_rhs(now, model, xi);
        worst = std::max(worst, std::abs(dt - rhs));
        scale = std::max(scale, std::abs(rhs));
      }
      CHECK(worst / scale < 1e-6);
    }
  }
}

TEST_CASE("trace, hermiticity and purity along the flow") {
  const auto s = testing::oblique_triplet();
  const auto pq = LindbladModel::position_momentum();
  std::mt19937_64 rng(29);
  double previous = 2.0;
  for (double t : {0.0, 0.01, 0.05, 0.2, 1.0}) {
    const ChordField chord = evolved_chord_field(s, pq, t);
    CHECK(std::abs(chord({}) - 1.0) < 1e-12);
    for (int k = 0; k < 50; ++k) {
      const PhaseVector xi = testing::random_vector(rng, 2.0);
      CHECK(std::abs(chord(-1.0 * xi) - std::conj(chord(xi))) < 1e-12);
    }
    // C(0, t) is the purity ∫|χ_t|²/2πħ.
    const double purity = CorrelationField(chord)({});
    if (t == 0.0) CHECK(purity == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(purity < previous);
    previous = purity;
  }
}

TEST_CASE("closed-form correlation") {
  const double hbar = 0.075;
  const auto pq = LindbladModel::position_momentum();
  SUBCASE("single coherent state") {
    const Superposition single(hbar, {{1.0, {{0.4, -0.2}, {}}}});
    std::mt19937_64 rng(3);
    for (double t : {0.0, 0.1, 0.7}) {
      const CorrelationField c(evolved_chord_field(single, pq, t));
      const double a = 1.0 + 2.0 * t;
      for (int k = 0; k < 30; ++k) {
        const PhaseVector xi = testing::random_vector(rng, 0.8);
        CHECK(c(xi) == doctest::Approx(std::exp(-xi.norm2() / (2.0 * a * hbar)) / a).epsilon(1e-12));
      }
    }
  }
  SUBCASE("pure state at t = 0") {
    const auto s = testing::oblique_triplet();
    const CorrelationField c(evolved_chord_field(s, pq, 0.0));
    std::mt19937_64 rng(4);
    for (int k = 0; k < 100; ++k) {
      const PhaseVector xi = testing::random_vector(rng, 1.5);
      CHECK(std::abs(c(xi) - correlation_pure(s, xi)) < 1e-12);
    }
  }
  SUBCASE("agrees with the grid transform") {
    const auto s = testing::oblique_triplet();
    const double t = 0.02;
    const ChordField chord = evolved_chord_field(s, pq, t);
    const Window w = support_window(chord, 1e-14);
    const FieldGrid grid = evolved_correlation(s, pq, w, 301, 301, t);
    const CorrelationField c(chord);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.rows(); i += 10) {
      for (std::size_t j = 0; j < grid.cols(); j += 10) {
        worst = std::max(worst, std::abs(grid.at(i, j).real() - c(grid.point(i, j))));
      }
    }
    CHECK(worst < 1e-8);
    const std::vector<PhaseVector> points{{0.1, -0.2}, {0.0, 0.0}, {-0.3, 0.05}};
    const auto values = evolved_correlation_points(s, pq, points, t);
    for (std::size_t k = 0; k < points.size(); ++k) CHECK(std::abs(values[k] - c(points[k])) < 1e-8);
  }
}

TEST_CASE("line scans") {
  const auto s = testing::corner_triplet(5.0);
  const auto pq = LindbladModel::position_momentum();
  const ScanLine line{{0.0, 0.0}, {-1.0, 2.0}};
  const auto series = scan_line(s, pq, line, -0.2, 0.2, 81, {0.0, 0.01, 0.1});
  REQUIRE(series.values.size() == 3);
  for (std::size_t i = 0; i < series.samples.size(); ++i) {
    CHECK(std::abs(series.values[0][i] - correlation_pure(s, line.at(series.samples[i]))) < 1e-12);
  }
  for (const auto& row : series.values) {
    for (double v : row) {
      CHECK(v >= -1e-9);
      CHECK(v <= 1.0 + 1e-9);
    }
  }
  CHECK(line.coordinate(line.at(0.37)) == doctest::Approx(0.37));
  CHECK(code_of([&] { line_samples(0.2, 0.1, 10); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("zeros are lifted") {
  const auto s = testing::corner_triplet(5.0);
  const auto pq = LindbladModel::position_momentum();
  const ScanLine line{{0.0, 0.0}, {-1.0, 2.0}};
  const PhaseVector spot = blind_spot_on_line(s, line);
  CHECK(spot.p == doctest::Approx(-0.5 * spot.q));
  CHECK(std::abs(chord_exact(s, spot)) < 1e-12);

  double previous = CorrelationField(evolved_chord_field(s, pq, 0.0))(spot);
  CHECK(previous < 1e-10);
  for (double t : {1e-4, 5e-4, 1e-3, 2e-3, 4e-3}) {
    const double c = CorrelationField(evolved_chord_field(s, pq, t))(spot);
    CHECK(c > previous);
    previous = c;
  }

  const double s_spot = line.coordinate(spot);
  const std::vector<double> times{0.0, 1e-3, 2e-3, 4e-3, 8e-3, 1.6e-2, 3.2e-2};
  const auto series = scan_line(s, pq, line, 2.5 * s_spot, -0.5 * s_spot, 241, times);
  const auto result = lifting_time(series, spot);
  CHECK(result.delta_series.front().relative() == doctest::Approx(1.0).epsilon(1e-6));
  for (std::size_t k = 1; k < result.delta_series.size(); ++k) {
    CHECK(result.delta_series[k].delta <= result.delta_series[k - 1].delta);
  }
  CHECK(result.tau_l > 0.0);
  CHECK(result.tau_l < times.back());

  // Bisection with a resampler lands close to the interpolated estimate.
  const auto resample = [&](double t) {
    return scan_line(s, pq, line, 2.5 * s_spot, -0.5 * s_spot, 241, {t}).values.front();
  };
  const auto bisected = lifting_time(series, spot, 1e-3, resample);
  CHECK(bisected.tau_l == doctest::Approx(result.tau_l).epsilon(0.2));
  const double rel = minimum_contrast(series.samples, resample(bisected.tau_l), s_spot, bisected.tau_l).relative();
  CHECK(rel < 1e-3);

  LineScanSeries short_series = series;
  short_series.times.resize(2);
  short_series.values.resize(2);
  CHECK(code_of([&] { lifting_time(short_series, spot); }) == ErrorCode::NeverLifted);
  CHECK(code_of([&] { lifting_time(series, line.at(-0.5 * s_spot)); }) == ErrorCode::NoMinimum);
}

TEST_CASE("minimum contrast on a synthetic profile") {
  std::vector<double> s, v;
  for (int k = 0; k <= 200; ++k) {
    s.push_back(-1.0 + 0.01 * k);
    // Minimum of depth 0.6 at 0.3 under a linear envelope 1 + 0.2x.
    const double x = s.back();
    v.push_back(1.0 + 0.2 * x - 0.6 * std::pow(std::cos(std::numbers::pi * (x - 0.3)), 2));
  }
  const auto sample = minimum_contrast(s, v, 0.3, 0.0);
  CHECK(sample.envelope == doctest::Approx(1.0 + 0.2 * 0.3).epsilon(5e-3));
  CHECK(sample.delta == doctest::Approx(0.6).epsilon(5e-3));
  // No maximum on the right: counts as lifted.
  const auto one_sided = minimum_contrast(std::vector<double>(s.begin(), s.begin() + 140),
                                          std::vector<double>(v.begin(), v.begin() + 140), 0.3, 0.0);
  CHECK(one_sided.delta == 0.0);
}

TEST_CASE("positivity time") {
  const double hbar = 0.075;
  const auto pq = LindbladModel::position_momentum();
  const Superposition single(hbar, {{1.0, {{0.3, 0.1}, {}}}});
  CHECK(positivity_time(single, pq) == 0.0);
  CHECK(min_relative_wigner(single, pq, 0.0) >= 0.0);

  const auto c = testing::cat(hbar, {1.2, 0.0});
  CHECK(min_relative_wigner(c, pq, 0.0) < -0.5);
  const double tp = positivity_time(c, pq);
  CHECK(tp > 0.0);
  CHECK(tp <= 0.5 * (1.0 + 1e-3));
  CHECK(min_relative_wigner(c, pq, tp) >= -1e-6);
  CHECK(min_relative_wigner(c, pq, 0.9 * tp) < -1e-6);

  PositivityOptions grid;
  grid.method = PositivityMethod::Grid;
  grid.rows = grid.cols = 129;
  const double tg = positivity_time(c, pq, grid);
  CHECK(tg > 0.0);
  CHECK(tg <= tp * (1.0 + 1e-2));

  PositivityOptions brief;
  brief.t_max = 0.05;
  CHECK(code_of([&] { positivity_time(c, pq, brief); }) == ErrorCode::NeverPositive);

  // Stronger coupling shortens the time by the same factor.
  const double fast = positivity_time(c, LindbladModel::position_momentum(2.0));
  CHECK(fast == doctest::Approx(tp / 4.0).epsilon(3e-3));
}

TEST_CASE("lifting ratio") {
  CHECK(triangle_area({0.0, 0.0}, {0.0, 5.0}, {5.0, 0.0}) == 12.5);
  const auto pq = LindbladModel::position_momentum();
  CHECK(code_of([&] { lifting_ratio(testing::cat(0.075, {1.0, 0.0}), pq); }) == ErrorCode::WrongArity);
  CHECK(code_of([&] { blind_spot_on_line(testing::corner_triplet(3.0), ScanLine{{0.0, 0.0}, {1.0, 0.123}}); }) ==
        ErrorCode::NoMinimum);

  const auto r = lifting_ratio(testing::corner_triplet(3.0), pq);
  CHECK(r.area == doctest::Approx(4.5));
  CHECK(r.tau_l > 0.0);
  CHECK(r.tau_l < r.t_p);
  CHECK(r.ratio == doctest::Approx(r.tau_l * r.area / (0.075 * r.t_p)));
}
