#include <cmath>
#include <limits>
#include <vector>

#include "speechkit/metrics.hpp"

namespace speechkit::metrics {

namespace {

// mean removal followed by unit-variance scaling (population std)
std::vector<double> normalize(std::span<const double> x, const char* what, bool require_energy) {
  std::vector<double> out(x.begin(), x.end());
  double mean = 0;
  for (double v : out) mean += v;
  mean /= static_cast<double>(out.size());
  double energy = 0;
  for (double& v : out) {
    v -= mean;
    energy += v * v;
  }
  if (energy == 0.0) {
    if (require_energy) throw Error(std::string("si_snr: ") + what + " has zero energy after mean removal");
    return out;
  }
  double std_dev = std::sqrt(energy / static_cast<double>(out.size()));
  for (double& v : out) v /= std_dev;
  return out;
}

}  // namespace

double si_snr(std::span<const double> reference, std::span<const double> estimate) {
  if (reference.size() != estimate.size()) {
    throw Error("si_snr: length mismatch (" + std::to_string(reference.size()) + " vs " +
                std::to_string(estimate.size()) + ")");
  }
  if (reference.empty()) throw Error("si_snr: empty signals");

  std::vector<double> s = normalize(reference, "reference", true);
  std::vector<double> est = normalize(estimate, "estimate", false);

  double dot = 0, s_energy = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    dot += est[i] * s[i];
    s_energy += s[i] * s[i];
  }
  double coeff = dot / s_energy;
  double target_energy = 0, noise_energy = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double target = coeff * s[i];
    double noise = est[i] - target;
    target_energy += target * target;
    noise_energy += noise * noise;
  }
  if (noise_energy == 0.0) return std::numeric_limits<double>::infinity();
  if (target_energy == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(target_energy / noise_energy);
}

double si_snri(std::span<const double> reference, std::span<const double> estimate,
               std::span<const double> mixture) {
  return si_snr(reference, estimate) - si_snr(reference, mixture);
}

}  // namespace speechkit::metrics
