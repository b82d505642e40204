#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "blindspots/spots.hpp"

namespace blindspots {

namespace {

struct Segment {
  std::size_t a;
  std::size_t b;
};

double component(const Complex& z, ChordPart part) { return part == ChordPart::Real ? z.real() : z.imag(); }

double point_segment_distance(const PhaseVector& x, const PhaseVector& a, const PhaseVector& b) {
  const PhaseVector ab = b - a;
  const double len2 = ab.norm2();
  if (len2 == 0.0) return (x - a).norm();
  const double t = std::clamp(dot(x - a, ab) / len2, 0.0, 1.0);
  return (x - (a + t * ab)).norm();
}

}  // namespace

NodalLineSet trace_nodal_lines(const FieldGrid& grid, ChordPart part) {
  const std::size_t R = grid.rows(), C = grid.cols();
  const auto value = [&](std::size_t i, std::size_t j) { return component(grid.at(i, j), part); };
  const auto positive = [&](std::size_t i, std::size_t j) { return value(i, j) >= 0.0; };

  // Edge key: node index * 2, +0 for the edge towards j+1, +1 towards i+1.
  const auto h_edge = [&](std::size_t i, std::size_t j) { return (i * C + j) * 2; };
  const auto v_edge = [&](std::size_t i, std::size_t j) { return (i * C + j) * 2 + 1; };
  std::unordered_map<std::size_t, PhaseVector> crossing;
  const auto crossing_point = [&](std::size_t key) {
    auto it = crossing.find(key);
    if (it != crossing.end()) return key;
    const std::size_t node = key / 2;
    const std::size_t i = node / C, j = node % C;
    const std::size_t i1 = (key % 2 == 1) ? i + 1 : i;
    const std::size_t j1 = (key % 2 == 0) ? j + 1 : j;
    const double v0 = value(i, j), v1 = value(i1, j1);
    const double t = (v0 == v1) ? 0.5 : v0 / (v0 - v1);
    crossing.emplace(key, grid.point(i, j) + t * (grid.point(i1, j1) - grid.point(i, j)));
    return key;
  };

  std::vector<Segment> segments;
  for (std::size_t i = 0; i + 1 < R; ++i) {
    for (std::size_t j = 0; j + 1 < C; ++j) {
      // Corners counter-clockwise in (i, j): c0=(i,j), c1=(i,j+1), c2=(i+1,j+1), c3=(i+1,j).
      const bool s0 = positive(i, j), s1 = positive(i, j + 1), s2 = positive(i + 1, j + 1), s3 = positive(i + 1, j);
      const std::size_t e[4] = {h_edge(i, j), v_edge(i, j + 1), h_edge(i + 1, j), v_edge(i, j)};
      const bool cut[4] = {s0 != s1, s1 != s2, s2 != s3, s3 != s0};
      const int n_cut = cut[0] + cut[1] + cut[2] + cut[3];
      if (n_cut == 2) {
        std::size_t ends[2];
        int k = 0;
        for (int m = 0; m < 4; ++m) {
          if (cut[m]) ends[k++] = crossing_point(e[m]);
        }
        segments.push_back({ends[0], ends[1]});
      } else if (n_cut == 4) {
        const double centre = 0.25 * (value(i, j) + value(i, j + 1) + value(i + 1, j + 1) + value(i + 1, j));
        if ((centre >= 0.0) == s0) {
          segments.push_back({crossing_point(e[0]), crossing_point(e[1])});
          segments.push_back({crossing_point(e[2]), crossing_point(e[3])});
        } else {
          segments.push_back({crossing_point(e[3]), crossing_point(e[0])});
          segments.push_back({crossing_point(e[1]), crossing_point(e[2])});
        }
      }
    }
  }

  std::unordered_map<std::size_t, std::vector<std::size_t>> incident;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    incident[segments[s].a].push_back(s);
    incident[segments[s].b].push_back(s);
  }
  std::vector<char> used(segments.size(), 0);
  NodalLineSet result;
  result.part = part;

  const auto walk = [&](std::size_t start_segment, std::size_t start_key) {
    std::vector<PhaseVector> line{crossing.at(start_key)};
    std::size_t seg = start_segment;
    std::size_t key = start_key;
    while (!used[seg]) {
      used[seg] = 1;
      key = segments[seg].a == key ? segments[seg].b : segments[seg].a;
      line.push_back(crossing.at(key));
      const auto& next = incident.at(key);
      auto it = std::find_if(next.begin(), next.end(), [&](std::size_t s) { return !used[s]; });
      if (it == next.end()) break;
      seg = *it;
    }
    result.polylines.push_back(std::move(line));
  };

  // Open lines start at boundary crossings; deterministic order by segment index.
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (used[s]) continue;
    for (std::size_t key : {segments[s].a, segments[s].b}) {
      if (incident.at(key).size() == 1 && !used[s]) walk(s, key);
    }
  }
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (!used[s]) walk(s, segments[s].a);
  }
  return result;
}

double distance_to_lines(const NodalLineSet& lines, const PhaseVector& x) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& line : lines.polylines) {
    if (line.size() == 1) best = std::min(best, (x - line.front()).norm());
    for (std::size_t k = 0; k + 1 < line.size(); ++k) best = std::min(best, point_segment_distance(x, line[k], line[k + 1]));
  }
  return best;
}

}  // namespace blindspots
