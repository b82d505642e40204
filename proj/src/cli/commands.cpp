#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "blindspots/cli.hpp"
#include "blindspots/error.hpp"

namespace blindspots::cli {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Csv {
 public:
  explicit Csv(std::ostream& out) : out_(out) {}

  void meta(const std::string& key, const std::string& value) { out_ << "# " << key << '=' << value << '\n'; }
  void note(const std::string& text) { out_ << "# note: " << text << '\n'; }

  void header(std::initializer_list<std::string_view> columns) {
    bool first = true;
    for (auto c : columns) {
      out_ << (first ? "" : ",") << c;
      first = false;
    }
    out_ << '\n';
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << cells[k];
    out_ << '\n';
  }

  void row(std::initializer_list<double> values) {
    std::vector<std::string> cells;
    for (double v : values) cells.push_back(fmt(v));
    row(cells);
  }

 private:
  std::ostream& out_;
};

std::string window_text(const Window& w) {
  return "p:[" + fmt(w.p_min) + "," + fmt(w.p_max) + "],q:[" + fmt(w.q_min) + "," + fmt(w.q_max) + "]";
}

const Superposition& need_state(const RunConfig& config) {
  if (!config.state) throw Error(ErrorCode::InvalidArgument, "config: this command needs 'states'");
  return *config.state;
}

const LindbladModel& need_lindblad(const RunConfig& config) {
  if (!config.lindblad) throw Error(ErrorCode::InvalidArgument, "config: this command needs 'lindblad'");
  return *config.lindblad;
}

template <class T>
const T& need_block(const std::optional<T>& block, const char* name) {
  if (!block) throw Error(ErrorCode::InvalidArgument, std::string("config: missing block '") + name + "'");
  return *block;
}

void common_meta(Csv& csv, const RunConfig& config) {
  csv.meta("hbar", fmt(config.hbar));
  if (config.state) csv.meta("terms", std::to_string(config.state->size()));
}

void cmd_grid(const RunConfig& config, Csv& csv, int threads) {
  const Superposition& state = need_state(config);
  const GridTask& task = need_block(config.grid, "grid");
  common_meta(csv, config);
  csv.meta("window", window_text(task.window));
  csv.meta("shape", std::to_string(task.rows) + "x" + std::to_string(task.cols));

  FieldGrid grid(task.window, task.rows, task.cols, FieldKind::Chord);
  switch (task.kind) {
    case GridKind::Chord: {
      const ChordField chord(state);
      grid = sample_grid(task.window, task.rows, task.cols, FieldKind::Chord, chord, threads);
      csv.meta("kind", "chord");
      csv.header({"xi_p", "xi_q", "re", "im"});
      break;
    }
    case GridKind::Wigner: {
      const WignerField wigner{ChordField(state)};
      grid = sample_grid(
          task.window, task.rows, task.cols, FieldKind::Wigner,
          [&](const PhaseVector& x) { return Complex(wigner(x), 0.0); }, threads);
      csv.meta("kind", "wigner");
      csv.header({"x_p", "x_q", "wigner"});
      break;
    }
    case GridKind::Correlation: {
      if (task.t > 0.0 || config.lindblad) {
        grid = evolved_correlation(state, need_lindblad(config), task.window, task.rows, task.cols, task.t, threads);
      } else {
        const ChordField chord(state);
        const FieldGrid intensity = sample_grid(
            task.window, task.rows, task.cols, FieldKind::Intensity,
            [&](const PhaseVector& xi) { return Complex(std::norm(chord(xi)), 0.0); }, threads);
        require_adequate_window(intensity, 1e-12);
        grid = fourier_2d(intensity, state.hbar());
        grid.check_real_kind();
      }
      csv.meta("kind", "corr");
      csv.meta("t", fmt(task.t));
      csv.header({"xi_p", "xi_q", "corr"});
      break;
    }
  }
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    for (std::size_t j = 0; j < grid.cols(); ++j) {
      const PhaseVector x = grid.point(i, j);
      const Complex v = grid.at(i, j);
      if (task.kind == GridKind::Chord) {
        csv.row({x.p, x.q, v.real(), v.imag()});
      } else {
        csv.row({x.p, x.q, v.real()});
      }
    }
  }
}

void cmd_spots(const RunConfig& config, Csv& csv, std::ostream& err, int threads) {
  const Superposition& state = need_state(config);
  const SpotsTask task = config.spots.value_or(SpotsTask{});
  common_meta(csv, config);
  csv.meta("convention", std::string(kTriangleSideConvention));
  if (task.window) csv.meta("window", window_text(*task.window));

  NewtonOptions newton;
  newton.tol = task.tol;
  newton.max_iter = task.max_iter;

  std::vector<RefinedSpot> spots;
  bool searched = false;
  const auto note = [&](const std::string& text) {
    csv.note(text);
    err << "note: " << text << '\n';
  };

  if (state.size() == 2) {
    const DiffractionModel model = DiffractionModel::from_superposition(state);
    if (std::abs(model.weights()[0] - model.weights()[1]) > 1e-12) {
      note("no closure: unequal weights " + fmt(model.weights()[0]) + ", " + fmt(model.weights()[1]));
      searched = true;
    } else {
      note("balanced pair: zeros form lines, not isolated spots");
    }
  } else if (state.size() == 3) {
    const DiffractionModel model = DiffractionModel::from_superposition(state);
    try {
      const BlindSpotLattice lattice = hexagonal_lattice(model, IndexRange::square(task.k_range));
      csv.meta("basis", fmt(lattice.basis.first.p) + "," + fmt(lattice.basis.first.q) + ";" +
                            fmt(lattice.basis.second.p) + "," + fmt(lattice.basis.second.q));
      csv.meta("offsets", fmt(lattice.offsets.first.p) + "," + fmt(lattice.offsets.first.q) + ";" +
                              fmt(lattice.offsets.second.p) + "," + fmt(lattice.offsets.second.q));
      csv.meta("theta_plus", fmt(lattice.angles.first.theta1) + "," + fmt(lattice.angles.first.theta2));
      csv.meta("theta_minus", fmt(lattice.angles.second.theta1) + "," + fmt(lattice.angles.second.theta2));
      csv.meta("spacing", fmt(nearest_neighbor_spacing(lattice)));
      for (const auto& spot : refine_lattice(state, lattice, newton)) {
        if (task.window && !task.window->contains(spot.xi)) continue;
        const bool seen = std::any_of(spots.begin(), spots.end(),
                                      [&](const RefinedSpot& s) { return (s.xi - spot.xi).norm() < 1e-9; });
        if (!seen) spots.push_back(spot);
      }
      searched = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoClosure) throw;
      note("no closure: weights violate the triangle inequality");
    }
  } else if (state.size() == 1) {
    searched = true;
  }

  if (!searched && task.window) {
    SpotSearchOptions options;
    options.grid_step = task.grid_step;
    options.newton = newton;
    options.threads = threads;
    spots = find_spots_generic(state, *task.window, options);
  } else if (!searched) {
    note("no window given: generic search skipped");
  }

  std::sort(spots.begin(), spots.end(), [](const RefinedSpot& a, const RefinedSpot& b) {
    return a.xi.p < b.xi.p || (a.xi.p == b.xi.p && a.xi.q < b.xi.q);
  });
  csv.header({"xi_p", "xi_q", "residual", "iterations", "seed_p", "seed_q", "sublattice", "k1", "k2"});
  for (const auto& s : spots) {
    std::vector<std::string> cells{fmt(s.xi.p),   fmt(s.xi.q),   fmt(s.residual), std::to_string(s.iterations),
                                   fmt(s.seed.p), fmt(s.seed.q), "",              "",
                                   ""};
    if (s.lattice_index) {
      cells[6] = std::string(to_string(s.lattice_index->sublattice));
      cells[7] = std::to_string(s.lattice_index->k1);
      cells[8] = std::to_string(s.lattice_index->k2);
    }
    csv.row(cells);
  }
}

void cmd_decohere(const RunConfig& config, Csv& csv, int threads) {
  const Superposition& state = need_state(config);
  const LindbladModel& model = need_lindblad(config);
  const DecohereTask task = config.decohere.value_or(DecohereTask{});
  std::vector<double> times = task.times;
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  const LineScanSeries series =
      scan_line(state, model, task.line, task.s_min, task.s_max, task.samples, times, threads);

  std::optional<LiftingRatio> ratio;
  std::optional<double> t_p;
  PositivityOptions positivity;
  positivity.t_max = task.t_max;
  positivity.tol = task.positivity_tol;
  positivity.threads = threads;
  if (task.summary) {
    if (state.size() == 3) {
      LiftingRatioOptions options;
      options.line = task.line;
      options.epsilon = task.epsilon;
      options.positivity = positivity;
      options.threads = threads;
      ratio = lifting_ratio(state, model, options);
    } else {
      t_p = positivity_time(state, model, positivity);
    }
  }

  common_meta(csv, config);
  csv.meta("line", "point:" + fmt(task.line.point.p) + "," + fmt(task.line.point.q) +
                       ";direction:" + fmt(task.line.direction.p) + "," + fmt(task.line.direction.q));
  csv.meta("alpha", fmt(dissipation_coeff(model)));
  csv.header({"t", "s", "xi_p", "xi_q", "corr"});
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    for (std::size_t i = 0; i < series.samples.size(); ++i) {
      const PhaseVector xi = task.line.at(series.samples[i]);
      csv.row({series.times[k], series.samples[i], xi.p, xi.q, series.values[k][i]});
    }
  }
  if (ratio) {
    csv.note("summary follows");
    csv.meta("summary", "tau_l,t_p,ratio,area,spot_p,spot_q");
    csv.meta("values", fmt(ratio->tau_l) + "," + fmt(ratio->t_p) + "," + fmt(ratio->ratio) + "," +
                           fmt(ratio->area) + "," + fmt(ratio->spot.p) + "," + fmt(ratio->spot.q));
  } else if (t_p) {
    csv.note("summary follows");
    csv.meta("summary", "t_p");
    csv.meta("values", fmt(*t_p));
  }
}

void cmd_invert(const RunConfig& config, Csv& csv) {
  const InvertTask& task = need_block(config.invert, "invert");
  std::array<double, 3> w{};
  if (task.weights) {
    w = *task.weights;
  } else {
    const Superposition& state = need_state(config);
    if (state.size() != 3) throw Error(ErrorCode::WrongArity, "invert needs three weights or a three-term state");
    const auto model = DiffractionModel::from_superposition(state);
    w = {model.weights()[0], model.weights()[1], model.weights()[2]};
  }
  const double total = w[0] + w[1] + w[2];
  if (!(w[0] > 0.0 && w[1] > 0.0 && w[2] > 0.0)) throw Error(ErrorCode::InvalidArgument, "weights must be positive");
  const auto [plus, minus] = triangle_close(w[0] / total, w[1] / total, w[2] / total);
  const TriangleAngles& angles = task.branch == Branch::Plus ? plus : minus;
  const auto [eta1, eta2] = recover_centers(angles, task.spots[0], task.spots[1], config.hbar);

  common_meta(csv, config);
  csv.meta("convention", std::string(kTriangleSideConvention));
  csv.meta("branch", std::string(to_string(task.branch)));
  csv.meta("origin", "centers relative to the first term");
  csv.header({"term", "eta_p", "eta_q"});
  csv.row({"1", fmt(eta1.p), fmt(eta1.q)});
  csv.row({"2", fmt(eta2.p), fmt(eta2.q)});
}

bool cmd_check(const RunConfig& config, Csv& csv, int threads) {
  const Superposition& state = need_state(config);
  const CheckTask task = config.check.value_or(CheckTask{});
  const ChordField chord(state);
  std::mt19937_64 rng(task.seed);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<PhaseVector> points;
  while (points.size() < static_cast<std::size_t>(task.samples)) {
    const PhaseVector xi{u(rng), u(rng)};
    if (xi.norm() <= 3.0) points.push_back(xi);
  }

  struct Result {
    std::string name;
    double value;
    double threshold;
  };
  std::vector<Result> results;

  const Complex origin = chord({});
  results.push_back({"re_chi_origin", std::abs(origin.real() - 1.0), 1e-9});
  results.push_back({"im_chi_origin", std::abs(origin.imag()), 1e-12});

  double parity = 0.0;
  for (const auto& xi : points) {
    const Complex a = chord(xi), b = chord(-1.0 * xi);
    parity = std::max({parity, std::abs(a.real() - b.real()), std::abs(a.imag() + b.imag())});
  }
  results.push_back({"parity", parity, 1e-12});

  double oracle = 0.0;
  const std::size_t quadrature_points = std::min<std::size_t>(points.size(), 20);
  for (std::size_t k = 0; k < quadrature_points; ++k) {
    oracle = std::max(oracle, std::abs(chord(points[k]) - chord_quadrature(state, points[k])));
  }
  results.push_back({"quadrature", oracle, 1e-8});

  const FieldGrid intensity = sample_grid(
      task.window, task.rows, task.cols, FieldKind::Intensity,
      [&](const PhaseVector& xi) { return Complex(std::norm(chord(xi)), 0.0); }, threads);
  require_adequate_window(intensity, 1e-12);
  const FieldGrid transformed = fourier_2d(intensity, state.hbar());
  double deviation = 0.0;
  for (std::size_t k = 0; k < intensity.values().size(); ++k) {
    deviation = std::max(deviation, std::abs(transformed.values()[k] - intensity.values()[k]));
  }
  results.push_back({"fourier_invariance", deviation / intensity.max_abs(), 1e-6});

  common_meta(csv, config);
  csv.meta("window", window_text(task.window));
  csv.meta("shape", std::to_string(task.rows) + "x" + std::to_string(task.cols));
  csv.header({"check", "value", "threshold", "passed"});
  bool all = true;
  for (const auto& r : results) {
    const bool ok = r.value <= r.threshold;
    all = all && ok;
    csv.row({r.name, fmt(r.value), fmt(r.threshold), ok ? "1" : "0"});
  }
  return all;
}

}  // namespace

int run_command(std::string_view command, const RunConfig& config, std::ostream& out, std::ostream& err,
                int threads) {
  std::ostringstream buffer;
  Csv csv(buffer);
  try {
    if (command == "grid") {
      cmd_grid(config, csv, threads);
    } else if (command == "spots") {
      cmd_spots(config, csv, err, threads);
    } else if (command == "decohere") {
      cmd_decohere(config, csv, threads);
    } else if (command == "invert") {
      cmd_invert(config, csv);
    } else if (command == "check") {
      if (!cmd_check(config, csv, threads)) {
        out << buffer.str();
        err << "error: invariant check failed\n";
        return kExitNumerical;
      }
    } else {
      err << "error: unknown subcommand '" << command << "'\n";
      return kExitValidation;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_validation_error(e.code()) ? kExitValidation : kExitNumerical;
  }
  out << buffer.str();
  return kExitOk;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Blind spots of phase-space chord functions"};
  std::string command, config_path, out_path;
  int threads = 1;
  app.add_option("command", command, "grid, spots, decohere, invert or check")
      ->required()
      ->check(CLI::IsMember({"grid", "spots", "decohere", "invert", "check"}));
  app.add_option("config", config_path, "JSON configuration")->required();
  app.add_option("--out", out_path, "write CSV here instead of standard output");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  RunConfig config;
  try {
    config = load_config(config_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_validation_error(e.code()) ? kExitValidation : kExitNumerical;
  }

  if (out_path.empty()) return run_command(command, config, std::cout, std::cerr, threads);
  std::ostringstream text;
  const int code = run_command(command, config, text, std::cerr, threads);
  if (code == kExitOk || !text.str().empty()) {
    std::ofstream file(out_path, std::ios::binary);
    if (!file) {
      std::cerr << "error: cannot write " << out_path << '\n';
      return kExitValidation;
    }
    file << text.str();
  }
  return code;
}

}  // namespace blindspots::cli
