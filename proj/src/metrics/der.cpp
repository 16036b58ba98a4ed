#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "speechkit/metrics.hpp"

namespace speechkit::metrics {

namespace {

struct Interval {
  double start, end;
};

// Union of possibly overlapping intervals, sorted and merged.
std::vector<Interval> merge_intervals(std::vector<Interval> v) {
  std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) {
    return a.start < b.start || (a.start == b.start && a.end < b.end);
  });
  std::vector<Interval> out;
  for (const auto& iv : v) {
    if (iv.end <= iv.start) continue;
    if (!out.empty() && iv.start <= out.back().end) {
      out.back().end = std::max(out.back().end, iv.end);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

bool covered(const std::vector<Interval>& merged, double point) {
  auto it = std::upper_bound(merged.begin(), merged.end(), point,
                             [](double p, const Interval& iv) { return p < iv.start; });
  if (it == merged.begin()) return false;
  --it;
  return point < it->end;
}

}  // namespace

// Jonker-Volgenant style O(n^3) assignment on a square cost matrix,
// minimizing; weights are negated to maximize.
std::vector<int> max_weight_assignment(const std::vector<double>& weights, std::size_t rows,
                                       std::size_t cols) {
  if (weights.size() != rows * cols) throw Error("assignment: bad weight matrix size");
  std::size_t n = std::max(rows, cols);
  if (n == 0) return {};
  const double kInf = std::numeric_limits<double>::infinity();
  // cost[i][j]: padded entries cost 0 (unmatched)
  std::vector<double> cost(n * n, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) cost[i * n + j] = -weights[i * cols + j];
  }

  std::vector<double> u(n + 1, 0), v(n + 1, 0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      std::size_t i0 = p[j0], j1 = 0;
      double delta = kInf;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> match(rows, -1);
  for (std::size_t j = 1; j <= n; ++j) {
    std::size_t i = p[j];
    if (i >= 1 && i <= rows && j <= cols) match[i - 1] = static_cast<int>(j - 1);
  }
  return match;
}

DerBreakdown der(const std::vector<DiarSegment>& ref, const std::vector<DiarSegment>& hyp,
                 double collar, bool ignore_overlap) {
  if (ref.empty()) throw Error("der: empty reference");
  for (const auto& s : ref) {
    if (s.end <= s.start) throw Error("der: reference segment with end <= start");
  }
  for (const auto& s : hyp) {
    if (s.end <= s.start) throw Error("der: hypothesis segment with end <= start");
  }

  // speaker label -> dense index
  std::map<std::string, std::size_t> ref_idx, hyp_idx;
  for (const auto& s : ref) ref_idx.emplace(s.speaker, ref_idx.size());
  for (const auto& s : hyp) hyp_idx.emplace(s.speaker, hyp_idx.size());
  // re-number after dedup
  {
    std::size_t k = 0;
    for (auto& [name, i] : ref_idx) i = k++;
    k = 0;
    for (auto& [name, i] : hyp_idx) i = k++;
  }
  std::size_t n_ref = ref_idx.size(), n_hyp = hyp_idx.size();

  std::vector<Interval> collar_zones;
  if (collar > 0) {
    for (const auto& s : ref) {
      collar_zones.push_back({s.start - collar, s.start + collar});
      collar_zones.push_back({s.end - collar, s.end + collar});
    }
  }
  std::vector<Interval> excluded = merge_intervals(std::move(collar_zones));

  std::vector<double> points;
  for (const auto& s : ref) {
    points.push_back(s.start);
    points.push_back(s.end);
  }
  for (const auto& s : hyp) {
    points.push_back(s.start);
    points.push_back(s.end);
  }
  for (const auto& iv : excluded) {
    points.push_back(iv.start);
    points.push_back(iv.end);
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  struct Cell {
    double dur;
    std::vector<std::size_t> ref_active;
    std::vector<std::size_t> hyp_active;
  };
  std::vector<Cell> cells;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    double a = points[i], b = points[i + 1];
    if (b <= a) continue;
    double mid = a + (b - a) / 2;
    if (covered(excluded, mid)) continue;
    Cell cell{b - a, {}, {}};
    std::set<std::size_t> ra, ha;
    for (const auto& s : ref) {
      if (s.start <= mid && mid < s.end) ra.insert(ref_idx[s.speaker]);
    }
    for (const auto& s : hyp) {
      if (s.start <= mid && mid < s.end) ha.insert(hyp_idx[s.speaker]);
    }
    if (ignore_overlap && ra.size() >= 2) continue;
    if (ra.empty() && ha.empty()) continue;
    cell.ref_active.assign(ra.begin(), ra.end());
    cell.hyp_active.assign(ha.begin(), ha.end());
    cells.push_back(std::move(cell));
  }

  // overlap durations over scored cells drive the speaker mapping
  std::vector<double> weights(n_ref * n_hyp, 0.0);
  double ref_length = 0;
  for (const auto& cell : cells) {
    ref_length += cell.dur * static_cast<double>(cell.ref_active.size());
    for (std::size_t r : cell.ref_active) {
      for (std::size_t h : cell.hyp_active) weights[r * n_hyp + h] += cell.dur;
    }
  }
  if (ref_length <= 0) throw Error("der: no scored reference speech after exclusions");

  std::vector<int> mapping = max_weight_assignment(weights, n_ref, n_hyp);

  DerBreakdown out;
  for (const auto& cell : cells) {
    auto n_r = static_cast<double>(cell.ref_active.size());
    auto n_h = static_cast<double>(cell.hyp_active.size());
    std::size_t correct = 0;
    for (std::size_t r : cell.ref_active) {
      int h = mapping[r];
      if (h >= 0 && std::find(cell.hyp_active.begin(), cell.hyp_active.end(),
                              static_cast<std::size_t>(h)) != cell.hyp_active.end()) {
        ++correct;
      }
    }
    out.missed += cell.dur * std::max(0.0, n_r - n_h);
    out.false_alarm += cell.dur * std::max(0.0, n_h - n_r);
    out.confusion += cell.dur * (std::min(n_r, n_h) - static_cast<double>(correct));
  }
  out.reference_length = ref_length;
  out.der_percent = 100.0 * (out.false_alarm + out.missed + out.confusion) / ref_length;
  return out;
}

SmallMap<std::vector<DiarSegment>> parse_rttm(const std::string& text) {
  SmallMap<std::vector<DiarSegment>> by_file;
  std::istringstream iss(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(iss, line)) {
    ++line_no;
    if (line.empty() || line[0] == ';') continue;
    std::istringstream ls(line);
    std::string type, file, chan, tbeg, tdur, ortho, stype, speaker;
    if (!(ls >> type)) continue;
    if (type != "SPEAKER") continue;
    if (!(ls >> file >> chan >> tbeg >> tdur >> ortho >> stype >> speaker)) {
      throw Error("bad RTTM SPEAKER line " + std::to_string(line_no));
    }
    double start = 0, dur = 0;
    try {
      start = std::stod(tbeg);
      dur = std::stod(tdur);
    } catch (const std::exception&) {
      throw Error("bad RTTM times on line " + std::to_string(line_no));
    }
    if (!by_file.contains(file)) by_file.insert(file, {});
    by_file.find(file)->push_back({start, start + dur, speaker});
  }
  return by_file;
}

}  // namespace speechkit::metrics
