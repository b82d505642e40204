#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "blindspots/cli.hpp"
#include "blindspots/error.hpp"

namespace blindspots::cli {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::InvalidArgument, where + ": " + what);
}

void allow_keys(const json& j, const std::string& where, std::initializer_list<std::string_view> keys) {
  if (!j.is_object()) bad(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) bad(where, "unknown key '" + key + "'");
  }
}

const json& required(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) bad(where, std::string("missing key '") + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where, "expected a number");
  return j.get<double>();
}

double positive(const json& j, const std::string& where) {
  const double v = number(j, where);
  if (!(v > 0.0)) bad(where, "must be positive");
  return v;
}

long integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) bad(where, "expected an integer");
  return j.get<long>();
}

std::size_t count(const json& j, const std::string& where, long minimum) {
  const long v = integer(j, where);
  if (v < minimum) bad(where, "must be at least " + std::to_string(minimum));
  return static_cast<std::size_t>(v);
}

std::vector<double> numbers(const json& j, const std::string& where, std::size_t n) {
  if (!j.is_array() || (n > 0 && j.size() != n)) bad(where, "expected an array of " + std::to_string(n) + " numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(number(j[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

PhaseVector vec2(const json& j, const std::string& where) {
  const auto v = numbers(j, where, 2);
  return {v[0], v[1]};
}

Eigen::Matrix2d matrix2(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) bad(where, "expected a 2x2 matrix");
  Eigen::Matrix2d m;
  for (int r = 0; r < 2; ++r) {
    const auto row = numbers(j[r], where + "[" + std::to_string(r) + "]", 2);
    m(r, 0) = row[0];
    m(r, 1) = row[1];
  }
  return m;
}

Window window(const json& j, const std::string& where) {
  allow_keys(j, where, {"p", "q"});
  const auto p = numbers(required(j, where, "p"), where + ".p", 2);
  const auto q = numbers(required(j, where, "q"), where + ".q", 2);
  if (!(p[1] > p[0]) || !(q[1] > q[0])) bad(where, "ranges must be increasing");
  return {p[0], p[1], q[0], q[1]};
}

std::pair<std::size_t, std::size_t> shape(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) bad(where, "expected [rows, cols]");
  return {count(j[0], where + "[0]", 2), count(j[1], where + "[1]", 2)};
}

Superposition states(const json& j, double hbar) {
  if (!j.is_array() || j.empty()) bad("states", "expected a non-empty array");
  std::vector<Term> terms;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string where = "states[" + std::to_string(k) + "]";
    allow_keys(j[k], where, {"amplitude", "center", "frame"});
    const auto a = numbers(required(j[k], where, "amplitude"), where + ".amplitude", 2);
    Term term;
    term.amplitude = {a[0], a[1]};
    term.state.center = vec2(required(j[k], where, "center"), where + ".center");
    if (j[k].contains("frame")) {
      const Eigen::Matrix2d m = matrix2(j[k].at("frame"), where + ".frame");
      term.state.frame = SymplecticMatrix::from_entries(m(0, 0), m(0, 1), m(1, 0), m(1, 1));
    }
    terms.push_back(term);
  }
  return normalize(Superposition(hbar, std::move(terms)));
}

LindbladModel lindblad(const json& j) {
  allow_keys(j, "lindblad", {"h", "couplings"});
  const Eigen::Matrix2d h = j.contains("h") ? matrix2(j.at("h"), "lindblad.h") : Eigen::Matrix2d::Zero();
  std::vector<Coupling> couplings;
  if (j.contains("couplings")) {
    const json& list = j.at("couplings");
    if (!list.is_array()) bad("lindblad.couplings", "expected an array");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string where = "lindblad.couplings[" + std::to_string(k) + "]";
      allow_keys(list[k], where, {"re", "im"});
      Coupling c;
      if (list[k].contains("re")) c.re = vec2(list[k].at("re"), where + ".re");
      if (list[k].contains("im")) c.im = vec2(list[k].at("im"), where + ".im");
      couplings.push_back(c);
    }
  }
  return LindbladModel(h, std::move(couplings));
}

GridTask grid_task(const json& j) {
  allow_keys(j, "grid", {"kind", "window", "shape", "t"});
  GridTask task;
  const json& kind = required(j, "grid", "kind");
  if (kind == "chord") {
    task.kind = GridKind::Chord;
  } else if (kind == "wigner") {
    task.kind = GridKind::Wigner;
  } else if (kind == "corr") {
    task.kind = GridKind::Correlation;
  } else {
    bad("grid.kind", "expected one of chord, wigner, corr");
  }
  task.window = window(required(j, "grid", "window"), "grid.window");
  if (j.contains("shape")) std::tie(task.rows, task.cols) = shape(j.at("shape"), "grid.shape");
  if (j.contains("t")) {
    task.t = number(j.at("t"), "grid.t");
    if (task.kind != GridKind::Correlation && task.t != 0.0) bad("grid.t", "only kind=corr can be evolved");
  }
  return task;
}

SpotsTask spots_task(const json& j) {
  allow_keys(j, "spots", {"window", "grid_step", "tol", "k_range", "max_iter"});
  SpotsTask task;
  if (j.contains("window")) task.window = window(j.at("window"), "spots.window");
  if (j.contains("grid_step")) task.grid_step = positive(j.at("grid_step"), "spots.grid_step");
  if (j.contains("tol")) task.tol = positive(j.at("tol"), "spots.tol");
  if (j.contains("k_range")) task.k_range = static_cast<int>(count(j.at("k_range"), "spots.k_range", 0));
  if (j.contains("max_iter")) task.max_iter = static_cast<int>(count(j.at("max_iter"), "spots.max_iter", 1));
  return task;
}

DecohereTask decohere_task(const json& j) {
  allow_keys(j, "decohere",
             {"line", "s_range", "samples", "times", "epsilon", "t_max", "positivity_tol", "summary"});
  DecohereTask task;
  if (j.contains("line")) {
    const json& line = j.at("line");
    allow_keys(line, "decohere.line", {"point", "direction"});
    if (line.contains("point")) task.line.point = vec2(line.at("point"), "decohere.line.point");
    if (line.contains("direction")) task.line.direction = vec2(line.at("direction"), "decohere.line.direction");
    if (!(task.line.direction.norm() > 0.0)) bad("decohere.line.direction", "must be nonzero");
  }
  if (j.contains("s_range")) {
    const auto r = numbers(j.at("s_range"), "decohere.s_range", 2);
    if (!(r[1] > r[0])) bad("decohere.s_range", "must be increasing");
    task.s_min = r[0];
    task.s_max = r[1];
  }
  if (j.contains("samples")) task.samples = count(j.at("samples"), "decohere.samples", 3);
  if (j.contains("times")) {
    task.times = numbers(j.at("times"), "decohere.times", 0);
    if (task.times.empty()) bad("decohere.times", "must not be empty");
  }
  if (j.contains("epsilon")) task.epsilon = positive(j.at("epsilon"), "decohere.epsilon");
  if (j.contains("t_max")) task.t_max = positive(j.at("t_max"), "decohere.t_max");
  if (j.contains("positivity_tol")) task.positivity_tol = number(j.at("positivity_tol"), "decohere.positivity_tol");
  if (j.contains("summary")) {
    if (!j.at("summary").is_boolean()) bad("decohere.summary", "expected a boolean");
    task.summary = j.at("summary").get<bool>();
  }
  return task;
}

InvertTask invert_task(const json& j) {
  allow_keys(j, "invert", {"weights", "branch", "spots"});
  InvertTask task;
  if (j.contains("weights")) {
    const auto w = numbers(j.at("weights"), "invert.weights", 3);
    task.weights = std::array<double, 3>{w[0], w[1], w[2]};
  }
  if (j.contains("branch")) {
    const json& b = j.at("branch");
    if (b == "plus") {
      task.branch = Branch::Plus;
    } else if (b == "minus") {
      task.branch = Branch::Minus;
    } else {
      bad("invert.branch", "expected plus or minus");
    }
  }
  const json& list = required(j, "invert", "spots");
  if (!list.is_array() || list.size() != 2) bad("invert.spots", "expected two indexed spots");
  for (std::size_t k = 0; k < 2; ++k) {
    const std::string where = "invert.spots[" + std::to_string(k) + "]";
    allow_keys(list[k], where, {"xi", "k"});
    task.spots[k].xi = vec2(required(list[k], where, "xi"), where + ".xi");
    const json& idx = required(list[k], where, "k");
    if (!idx.is_array() || idx.size() != 2) bad(where + ".k", "expected [k1, k2]");
    task.spots[k].k1 = static_cast<int>(integer(idx[0], where + ".k[0]"));
    task.spots[k].k2 = static_cast<int>(integer(idx[1], where + ".k[1]"));
  }
  return task;
}

CheckTask check_task(const json& j) {
  allow_keys(j, "check", {"window", "shape", "samples", "seed"});
  CheckTask task;
  if (j.contains("window")) task.window = window(j.at("window"), "check.window");
  if (j.contains("shape")) std::tie(task.rows, task.cols) = shape(j.at("shape"), "check.shape");
  if (j.contains("samples")) task.samples = static_cast<int>(count(j.at("samples"), "check.samples", 1));
  if (j.contains("seed")) task.seed = static_cast<unsigned>(count(j.at("seed"), "check.seed", 0));
  return task;
}

}  // namespace

RunConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    bad("config", e.what());
  }
  allow_keys(j, "config", {"hbar", "states", "lindblad", "grid", "spots", "decohere", "invert", "check"});
  RunConfig config;
  config.hbar = positive(required(j, "config", "hbar"), "hbar");
  if (j.contains("states")) config.state = states(j.at("states"), config.hbar);
  if (j.contains("lindblad")) config.lindblad = lindblad(j.at("lindblad"));
  if (j.contains("grid")) config.grid = grid_task(j.at("grid"));
  if (j.contains("spots")) config.spots = spots_task(j.at("spots"));
  if (j.contains("decohere")) config.decohere = decohere_task(j.at("decohere"));
  if (j.contains("invert")) config.invert = invert_task(j.at("invert"));
  if (j.contains("check")) config.check = check_task(j.at("check"));
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad(path, "cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace blindspots::cli
