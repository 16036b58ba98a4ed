#include <algorithm>
#include <cmath>

#include "fft.hpp"
#include "speechkit/dsp.hpp"

namespace speechkit::dsp {

DoaGrid DoaGrid::azimuth_circle(double resolution_deg) {
  if (resolution_deg <= 0) throw Error("azimuth grid resolution must be positive");
  DoaGrid grid;
  for (double az = 0; az < 360.0 - resolution_deg / 2; az += resolution_deg) {
    double rad = az * M_PI / 180.0;
    grid.directions.emplace_back(std::cos(rad), std::sin(rad), 0.0);
    grid.azimuths_deg.push_back(az);
  }
  return grid;
}

GccPhatResult gcc_phat(const Spectrogram& spec, std::size_t channel_p, std::size_t channel_q,
                       double max_tdoa_samples, double mic_distance, double speed_of_sound) {
  if (channel_p >= spec.n_channels() || channel_q >= spec.n_channels()) {
    throw Error("gcc_phat: channel index out of range");
  }
  std::size_t n_bins = spec.n_bins();
  std::size_t n = spec.fft_size;
  const Eigen::MatrixXcd& xp = spec.channels[channel_p];
  const Eigen::MatrixXcd& xq = spec.channels[channel_q];

  // cross-spectrum accumulated over frames, then PHAT weighting
  std::vector<std::complex<double>> cross(n_bins, {0.0, 0.0});
  for (std::size_t k = 0; k < n_bins; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t t = 0; t < spec.n_frames(); ++t) {
      acc += xp(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) *
             std::conj(xq(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)));
    }
    double mag = std::abs(acc);
    cross[k] = mag < 1e-12 ? std::complex<double>{0.0, 0.0} : acc / mag;
  }
  bool all_zero = true;
  for (const auto& c : cross) {
    if (c != std::complex<double>{0.0, 0.0}) all_zero = false;
  }
  if (all_zero) throw Error("gcc_phat: degenerate all-zero cross-spectrum");

  std::vector<double> correlation = irfft(cross, n);

  auto max_lag = static_cast<std::ptrdiff_t>(std::floor(max_tdoa_samples));
  max_lag = std::min<std::ptrdiff_t>(max_lag, static_cast<std::ptrdiff_t>(n / 2 - 1));
  if (max_lag < 0) throw Error("gcc_phat: max_tdoa_samples must be non-negative");
  if (mic_distance > 0) {
    double physical_limit = spec.fs * mic_distance / speed_of_sound;
    if (max_tdoa_samples > physical_limit + 1) {
      log_info("gcc_phat: max_tdoa " + format_double(max_tdoa_samples) +
               " samples exceeds the physical limit " + format_double(physical_limit) +
               " for d = " + format_double(mic_distance) + " m");
    }
  }

  // correlation index for a TDOA of `lag` samples (q lagging p)
  auto at_lag = [&](std::ptrdiff_t lag) {
    auto sn = static_cast<std::ptrdiff_t>(n);
    std::size_t idx = static_cast<std::size_t>(((sn - lag) % sn + sn) % sn);
    return correlation[idx];
  };

  std::ptrdiff_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::ptrdiff_t lag = -max_lag; lag <= max_lag; ++lag) {
    double v = at_lag(lag);
    if (v > best_value) {
      best_value = v;
      best = lag;
    }
  }

  // 3-point parabolic refinement around the integer peak
  double y1 = at_lag(best - 1), y2 = at_lag(best), y3 = at_lag(best + 1);
  double denom = y1 - 2 * y2 + y3;
  double delta = 0;
  if (std::abs(denom) > 1e-18) {
    delta = 0.5 * (y1 - y3) / denom;
    delta = std::clamp(delta, -1.0, 1.0);
  }
  GccPhatResult result;
  result.tdoa_samples = static_cast<double>(best) + delta;
  result.peak_value = best_value;
  if (mic_distance > 0) {
    double cos_theta = result.tdoa_samples * speed_of_sound / (spec.fs * mic_distance);
    cos_theta = std::clamp(cos_theta, -1.0, 1.0);
    result.angle_deg = std::acos(cos_theta) * 180.0 / M_PI;
  }
  return result;
}

SrpResult srp_phat(const SpatialCovariance& scm, const ArrayGeometry& geometry,
                   const DoaGrid& grid) {
  std::size_t n_mics = scm.n_mics();
  if (n_mics < 2) throw Error("srp_phat: needs at least two microphones");
  if (geometry.n_mics() != n_mics) throw Error("srp_phat: geometry/SCM mic count mismatch");
  if (grid.directions.empty()) throw Error("srp_phat: empty grid");
  std::size_t n_bins = scm.n_bins();

  // PHAT-normalized upper-triangle SCM entries
  struct Pair {
    std::size_t p, q;
  };
  std::vector<Pair> pairs;
  for (std::size_t p = 0; p < n_mics; ++p) {
    for (std::size_t q = p + 1; q < n_mics; ++q) pairs.push_back({p, q});
  }
  Eigen::MatrixXcd normalized(static_cast<Eigen::Index>(pairs.size()), static_cast<Eigen::Index>(n_bins));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (std::size_t k = 0; k < n_bins; ++k) {
      std::complex<double> r = scm.bins[k](static_cast<Eigen::Index>(pairs[i].p),
                                           static_cast<Eigen::Index>(pairs[i].q));
      double mag = std::abs(r);
      normalized(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          mag < 1e-12 ? std::complex<double>{0.0, 0.0} : r / mag;
    }
  }

  std::vector<double> freqs = bin_freqs(scm.fft_size, scm.fs);
  SrpResult result;
  result.power.resize(grid.directions.size());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < grid.directions.size(); ++g) {
    SteeringField field = steering(geometry, grid.directions[g], freqs);
    double energy = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto p = static_cast<Eigen::Index>(pairs[i].p);
      const auto q = static_cast<Eigen::Index>(pairs[i].q);
      for (std::size_t k = 0; k < n_bins; ++k) {
        const auto ki = static_cast<Eigen::Index>(k);
        std::complex<double> term =
            normalized(static_cast<Eigen::Index>(i), ki) * field.a(ki, p) * std::conj(field.a(ki, q));
        energy += term.real();
      }
    }
    result.power[g] = energy;
    if (energy > best) {
      best = energy;
      result.best_index = g;
    }
  }
  result.direction = grid.directions[result.best_index];
  return result;
}

MusicResult music(const SpatialCovariance& scm, const ArrayGeometry& geometry, const DoaGrid& grid,
                  std::size_t n_sources, const MusicOptions& options) {
  std::size_t n_mics = scm.n_mics();
  if (n_sources < 1 || n_sources >= n_mics) {
    throw Error("music: need 1 <= n_sources < n_mics");
  }
  if (geometry.n_mics() != n_mics) throw Error("music: geometry/SCM mic count mismatch");
  if (grid.directions.empty()) throw Error("music: empty grid");

  std::size_t n_bins = scm.n_bins();
  std::size_t subspace = n_mics - n_sources;

  // noise subspaces per in-band bin
  std::vector<std::size_t> band_bins;
  std::vector<Eigen::MatrixXcd> noise_basis;
  for (std::size_t k = 0; k < n_bins; ++k) {
    double f = scm.bin_freq(k);
    if (f < options.band_low_hz || f > options.band_high_hz) continue;
    const Eigen::MatrixXcd& r = scm.bins[k];
    double asym = (r - r.adjoint()).norm();
    if (asym > 1e-8 * std::max(1.0, r.norm())) {
      throw Error("music: SCM bin " + std::to_string(k) + " is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(0.5 * (r + r.adjoint()));
    if (eig.info() != Eigen::Success) throw Error("music: eigendecomposition failed");
    // eigenvalues ascending: the first `subspace` columns span the noise subspace
    noise_basis.push_back(eig.eigenvectors().leftCols(static_cast<Eigen::Index>(subspace)));
    band_bins.push_back(k);
  }
  if (band_bins.empty()) throw Error("music: no bins in the configured band");

  std::vector<double> freqs = bin_freqs(scm.fft_size, scm.fs);
  MusicResult result;
  result.spectrum.resize(grid.directions.size());
  for (std::size_t g = 0; g < grid.directions.size(); ++g) {
    SteeringField field = steering(geometry, grid.directions[g], freqs);
    double energy = 0;
    for (std::size_t b = 0; b < band_bins.size(); ++b) {
      std::size_t k = band_bins[b];
      Eigen::VectorXcd a = field.a.row(static_cast<Eigen::Index>(k)).transpose();
      double numerator = a.squaredNorm();                      // A^H A
      double denominator = (noise_basis[b].adjoint() * a).squaredNorm();  // A^H U U^H A
      denominator = std::max(denominator, 1e-24);
      energy += numerator / std::sqrt(denominator);
    }
    result.spectrum[g] = energy;
  }

  // greedy peak picking with a 10 degree separation constraint
  std::vector<std::size_t> order(grid.directions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return result.spectrum[a] > result.spectrum[b]; });
  const double min_separation = 10.0 * M_PI / 180.0;
  for (std::size_t idx : order) {
    if (result.peak_indices.size() >= n_sources) break;
    bool separated = true;
    for (std::size_t chosen : result.peak_indices) {
      double dot = std::clamp(grid.directions[idx].dot(grid.directions[chosen]), -1.0, 1.0);
      if (std::acos(dot) < min_separation) {
        separated = false;
        break;
      }
    }
    if (separated) result.peak_indices.push_back(idx);
  }
  for (std::size_t idx : result.peak_indices) result.directions.push_back(grid.directions[idx]);
  return result;
}

}  // namespace speechkit::dsp
