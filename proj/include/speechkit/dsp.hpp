#pragma once

#include <Eigen/Dense>
#include <complex>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "speechkit/common.hpp"

namespace speechkit::dsp {

// ── Signals and spectra ─────────────────────────────────────────────────────

struct MultichannelAudio {
  std::vector<std::vector<double>> samples;  // [M][T], channels equal length
  double fs = 16000;

  std::size_t channels() const { return samples.size(); }
  std::size_t length() const { return samples.empty() ? 0 : samples[0].size(); }
};

struct StftOptions {
  double frame_ms = 25;
  double hop_ms = 10;
  std::string window = "hann";  // hann | hamming | rect
};

/// Complex STFT, one T x K matrix per channel, K = fft_size/2 + 1.
struct Spectrogram {
  std::vector<Eigen::MatrixXcd> channels;
  std::size_t frame_len = 0;
  std::size_t hop_len = 0;
  std::size_t fft_size = 0;
  std::string window = "hann";
  double fs = 16000;

  std::size_t n_channels() const { return channels.size(); }
  std::size_t n_frames() const { return channels.empty() ? 0 : static_cast<std::size_t>(channels[0].rows()); }
  std::size_t n_bins() const { return channels.empty() ? 0 : static_cast<std::size_t>(channels[0].cols()); }
  double bin_freq(std::size_t k) const {
    return static_cast<double>(k) * fs / static_cast<double>(fft_size);
  }
};

Spectrogram stft(const MultichannelAudio& audio, const StftOptions& options);

/// Weighted overlap-add inverse; reconstructs the analysis exactly on
/// the fully-covered interior, best-effort normalization off COLA.
MultichannelAudio istft(const Spectrogram& spec);

// ── Spatial statistics ──────────────────────────────────────────────────────

enum class ScmKind { XX, SS, NN };

/// Per-bin Hermitian spatial covariance matrices.
struct SpatialCovariance {
  std::vector<Eigen::MatrixXcd> bins;  // [K] of M x M
  ScmKind kind = ScmKind::XX;
  std::vector<std::uint8_t> degenerate;  // 1 where the mask was empty
  double fs = 16000;
  std::size_t fft_size = 0;

  std::size_t n_bins() const { return bins.size(); }
  std::size_t n_mics() const { return bins.empty() ? 0 : static_cast<std::size_t>(bins[0].rows()); }
  double bin_freq(std::size_t k) const {
    return static_cast<double>(k) * fs / static_cast<double>(fft_size);
  }
};

/// Optional time-frequency mask, [T x K] in [0, 1].
using Mask = Eigen::MatrixXd;

/// R[k] = sum_t m(t,k) X(:,t,k) X(:,t,k)^H / sum_t m(t,k); Hermitian
/// symmetrized. Bins whose mask sums to zero get eps*I and a flag.
SpatialCovariance compute_scm(const Spectrogram& spec, const std::optional<Mask>& mask,
                              ScmKind kind = ScmKind::XX);

struct ArrayGeometry {
  std::vector<Eigen::Vector3d> mics;  // positions in meters
  double speed_of_sound = 343.0;

  std::size_t n_mics() const { return mics.size(); }
};

ArrayGeometry load_geometry(const std::filesystem::path& yaml_path);

/// Far-field steering phases A[k][p] = exp(-j 2*pi f_k tau_p(u)) with
/// tau_p(u) = -(m_p . u) / c; all entries unit modulus.
struct SteeringField {
  Eigen::MatrixXcd a;  // K x M
  Eigen::Vector3d direction;
  std::vector<double> freqs;
};

SteeringField steering(const ArrayGeometry& geometry, const Eigen::Vector3d& direction,
                       const std::vector<double>& freqs, bool phase_ref_first = false);

/// Bin center frequencies 0..K-1 for an fft_size/fs pair.
std::vector<double> bin_freqs(std::size_t fft_size, double fs);

// ── DOA estimation ──────────────────────────────────────────────────────────

struct DoaGrid {
  std::vector<Eigen::Vector3d> directions;  // unit vectors
  std::vector<double> azimuths_deg;         // filled by azimuth_circle

  static DoaGrid azimuth_circle(double resolution_deg = 1.0);
};

struct GccPhatResult {
  double tdoa_samples = 0;   // fractional, positive when q lags p
  double angle_deg = 0;      // arc angle from cos(theta) = tdoa*c/(fs*d)
  double peak_value = 0;
};

/// PHAT-weighted cross-correlation between two channels of a
/// spectrogram; 3-point parabolic interpolation refines the peak.
/// Positive TDOA means channel q lags channel p. `mic_distance`
/// (meters) maps the TDOA onto a 0..180 degree arc; pass 0 to skip.
GccPhatResult gcc_phat(const Spectrogram& spec, std::size_t channel_p, std::size_t channel_q,
                       double max_tdoa_samples, double mic_distance = 0,
                       double speed_of_sound = 343.0);

struct SrpResult {
  std::size_t best_index = 0;
  Eigen::Vector3d direction;
  std::vector<double> power;  // per grid direction
};

/// Steered-response power with PHAT-normalized SCM entries, scanning
/// the grid; argmax with first-index tie-break.
SrpResult srp_phat(const SpatialCovariance& scm, const ArrayGeometry& geometry,
                   const DoaGrid& grid);

struct MusicResult {
  std::vector<std::size_t> peak_indices;     // up to n_sources, >=10 deg apart
  std::vector<Eigen::Vector3d> directions;
  std::vector<double> spectrum;              // pseudo-spectrum per grid direction
};

struct MusicOptions {
  double band_low_hz = 300;
  double band_high_hz = 4000;
};

MusicResult music(const SpatialCovariance& scm, const ArrayGeometry& geometry, const DoaGrid& grid,
                  std::size_t n_sources, const MusicOptions& options = {});

// ── Beamforming ─────────────────────────────────────────────────────────────

struct BeamformerWeights {
  Eigen::MatrixXcd w;  // K x M
};

/// W(k) = A(k) / M.
BeamformerWeights delay_and_sum(const SteeringField& steer);

struct MvdrOptions {
  double diag_load = 1e-6;  // epsilon of R + eps*(trace/M)*I
};

/// W(k) = R^-1 A / (A^H R^-1 A), solved via Hermitian factorizations.
/// Bins that stay singular after loading fall back to delay-and-sum and
/// are flagged.
struct MvdrResult {
  BeamformerWeights weights;
  std::vector<std::uint8_t> fallback_bins;
};

MvdrResult mvdr(const SpatialCovariance& scm, const SteeringField& steer,
                const MvdrOptions& options = {});

/// Principal generalized eigenvector of (R_SS, R_NN) per bin via
/// Cholesky whitening; unit norm, first coefficient real non-negative.
BeamformerWeights gev(const SpatialCovariance& scm_ss, const SpatialCovariance& scm_nn,
                      double diag_load = 1e-6);

/// Y(t,k) = W(k)^H X(t,k); output is a mono spectrogram with the same
/// framing, so istft applies directly.
Spectrogram apply_beamformer(const BeamformerWeights& weights, const Spectrogram& spec);

}  // namespace speechkit::dsp
