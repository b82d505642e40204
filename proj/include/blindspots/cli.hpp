#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blindspots/core.hpp"
#include "blindspots/decoherence.hpp"
#include "blindspots/spots.hpp"

namespace blindspots::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

enum class GridKind { Chord, Wigner, Correlation };

struct GridTask {
  GridKind kind = GridKind::Chord;
  Window window{};
  std::size_t rows = 101;
  std::size_t cols = 101;
  /// Correlation only: evolve under the Lindblad model first.
  double t = 0.0;
};

struct SpotsTask {
  std::optional<Window> window;
  double grid_step = 0.0;
  double tol = 1e-12;
  int k_range = 2;
  int max_iter = 50;
};

struct DecohereTask {
  ScanLine line{{0.0, 0.0}, {-1.0, 2.0}};
  double s_min = -0.2;
  double s_max = 0.2;
  std::size_t samples = 241;
  std::vector<double> times{0.0};
  double epsilon = 1e-3;
  double t_max = 4.0;
  double positivity_tol = 1e-6;
  bool summary = true;
};

struct InvertTask {
  std::optional<std::array<double, 3>> weights;
  Branch branch = Branch::Plus;
  std::array<IndexedSpot, 2> spots{};
};

struct CheckTask {
  Window window = Window::symmetric(4.0, 4.0);
  std::size_t rows = 201;
  std::size_t cols = 201;
  int samples = 200;
  unsigned seed = 1;
};

struct RunConfig {
  double hbar = 1.0;
  /// Normalized on load.
  std::optional<Superposition> state;
  std::optional<LindbladModel> lindblad;
  std::optional<GridTask> grid;
  std::optional<SpotsTask> spots;
  std::optional<DecohereTask> decohere;
  std::optional<InvertTask> invert;
  std::optional<CheckTask> check;
};

/// Strict parse: unknown keys, wrong types and out-of-range values throw
/// Error(InvalidArgument); physics validation errors (NotSymplectic,
/// ZeroNorm, ...) propagate with their own codes.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::string& path);

/// Runs one subcommand, writing CSV to `out` and diagnostics to `err`.
/// Returns the process exit code.
int run_command(std::string_view command, const RunConfig& config, std::ostream& out, std::ostream& err,
                int threads = 1);

/// Full command line: `<subcommand> <config.json> [--out FILE] [--threads N]`.
int main_entry(int argc, char** argv);

}  // namespace blindspots::cli
