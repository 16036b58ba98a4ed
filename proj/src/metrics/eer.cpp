#include <algorithm>
#include <cmath>

#include "speechkit/metrics.hpp"

namespace speechkit::metrics {

namespace {

// fraction of nontarget scores >= t
double far_at(const std::vector<double>& sorted_nontarget, double t) {
  auto it = std::lower_bound(sorted_nontarget.begin(), sorted_nontarget.end(), t);
  return static_cast<double>(sorted_nontarget.end() - it) /
         static_cast<double>(sorted_nontarget.size());
}

// fraction of target scores < t
double frr_at(const std::vector<double>& sorted_target, double t) {
  auto it = std::lower_bound(sorted_target.begin(), sorted_target.end(), t);
  return static_cast<double>(it - sorted_target.begin()) /
         static_cast<double>(sorted_target.size());
}

}  // namespace

EerResult eer(const std::vector<double>& target_scores,
              const std::vector<double>& nontarget_scores) {
  if (target_scores.empty() || nontarget_scores.empty()) {
    throw Error("eer: target and nontarget score lists must be non-empty");
  }
  std::vector<double> target = target_scores;
  std::vector<double> nontarget = nontarget_scores;
  std::sort(target.begin(), target.end());
  std::sort(nontarget.begin(), nontarget.end());

  std::vector<double> all;
  all.reserve(target.size() + nontarget.size());
  all.insert(all.end(), target.begin(), target.end());
  all.insert(all.end(), nontarget.begin(), nontarget.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  // sweep points: below-all sentinel, midpoints, above-all sentinel
  std::vector<double> thresholds;
  thresholds.push_back(all.front() - 1.0);
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    thresholds.push_back(all[i] + (all[i + 1] - all[i]) / 2);
  }
  thresholds.push_back(all.back() + 1.0);

  double prev_t = thresholds[0];
  double prev_far = far_at(nontarget, prev_t);
  double prev_frr = frr_at(target, prev_t);
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    double t = thresholds[i];
    double far = far_at(nontarget, t);
    double frr = frr_at(target, t);
    double diff = frr - far;
    if (diff >= 0) {
      if (diff == 0 || prev_t == t) {
        return {100.0 * far, t};
      }
      // linear interpolation of the (FRR - FAR) sign change
      double prev_diff = prev_frr - prev_far;  // < 0 here
      double alpha = -prev_diff / (diff - prev_diff);
      double eer_value = prev_far + alpha * (far - prev_far);
      double frr_value = prev_frr + alpha * (frr - prev_frr);
      // the interpolated FAR and FRR meet; average guards rounding
      double value = (eer_value + frr_value) / 2;
      return {100.0 * value, prev_t + alpha * (t - prev_t)};
    }
    prev_t = t;
    prev_far = far;
    prev_frr = frr;
  }
  // FRR never reaches FAR (cannot happen with the above-all sentinel)
  return {100.0 * prev_far, prev_t};
}

}  // namespace speechkit::metrics
