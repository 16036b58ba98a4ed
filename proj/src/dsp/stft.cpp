#include <cmath>

#include "fft.hpp"
#include "speechkit/dsp.hpp"

namespace speechkit::dsp {

namespace {

std::vector<double> make_window(const std::string& name, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (name == "rect") return w;
  if (name == "hann") {
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n));
    }
    return w;
  }
  if (name == "hamming") {
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n));
    }
    return w;
  }
  throw Error("unknown window '" + name + "' (expected hann, hamming or rect)");
}

// relative deviation of sum_m w^2(i - mH) from constant over the
// fully-overlapped interior of a long tiling
double cola_deviation(const std::vector<double>& w, std::size_t hop) {
  std::size_t frame = w.size();
  if (hop == 0 || hop > frame) return 1.0;
  std::size_t span = frame * 4;
  std::vector<double> sum(span, 0.0);
  for (std::size_t start = 0; start + frame <= span; start += hop) {
    for (std::size_t i = 0; i < frame; ++i) sum[start + i] += w[i] * w[i];
  }
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (std::size_t i = frame; i + frame < span; ++i) {
    lo = std::min(lo, sum[i]);
    hi = std::max(hi, sum[i]);
  }
  if (!(hi > 0)) return 1.0;
  return (hi - lo) / hi;
}

}  // namespace

Spectrogram stft(const MultichannelAudio& audio, const StftOptions& options) {
  if (audio.channels() == 0) throw Error("stft: no channels");
  for (const auto& ch : audio.samples) {
    if (ch.size() != audio.length()) throw Error("stft: channels differ in length");
  }
  auto frame_len = static_cast<std::size_t>(std::llround(options.frame_ms * audio.fs / 1000.0));
  auto hop_len = static_cast<std::size_t>(std::llround(options.hop_ms * audio.fs / 1000.0));
  if (frame_len == 0 || hop_len == 0) throw Error("stft: frame/hop too small for sample rate");
  if (hop_len > frame_len) throw Error("stft: hop longer than frame");
  if (audio.length() < frame_len) throw Error("stft: signal shorter than one frame");

  std::vector<double> window = make_window(options.window, frame_len);
  if (cola_deviation(window, hop_len) > 1e-6) {
    log_info("stft: window '" + options.window + "' with hop " + std::to_string(hop_len) +
             "/" + std::to_string(frame_len) +
             " does not satisfy COLA; istft will renormalize per sample");
  }

  std::size_t fft_size = next_pow2(frame_len);
  std::size_t n_bins = fft_size / 2 + 1;
  std::size_t n_frames = (audio.length() - frame_len) / hop_len + 1;

  Spectrogram spec;
  spec.frame_len = frame_len;
  spec.hop_len = hop_len;
  spec.fft_size = fft_size;
  spec.window = options.window;
  spec.fs = audio.fs;
  spec.channels.reserve(audio.channels());

  std::vector<double> frame(frame_len);
  for (const auto& ch : audio.samples) {
    Eigen::MatrixXcd X(n_frames, n_bins);
    for (std::size_t t = 0; t < n_frames; ++t) {
      std::size_t offset = t * hop_len;
      for (std::size_t i = 0; i < frame_len; ++i) frame[i] = ch[offset + i] * window[i];
      std::vector<std::complex<double>> bins = rfft(frame, fft_size);
      for (std::size_t k = 0; k < n_bins; ++k) X(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) = bins[k];
    }
    spec.channels.push_back(std::move(X));
  }
  return spec;
}

MultichannelAudio istft(const Spectrogram& spec) {
  if (spec.channels.empty()) throw Error("istft: empty spectrogram");
  std::size_t frame_len = spec.frame_len;
  std::size_t hop_len = spec.hop_len;
  std::size_t n_frames = spec.n_frames();
  std::size_t n_bins = spec.n_bins();
  if (n_bins != spec.fft_size / 2 + 1) throw Error("istft: bin count does not match fft size");

  std::vector<double> window = make_window(spec.window, frame_len);
  std::size_t out_len = (n_frames - 1) * hop_len + frame_len;

  MultichannelAudio audio;
  audio.fs = spec.fs;
  std::vector<double> norm(out_len, 0.0);
  for (std::size_t t = 0; t < n_frames; ++t) {
    for (std::size_t i = 0; i < frame_len; ++i) norm[t * hop_len + i] += window[i] * window[i];
  }

  std::vector<std::complex<double>> bins(n_bins);
  for (const auto& X : spec.channels) {
    std::vector<double> out(out_len, 0.0);
    for (std::size_t t = 0; t < n_frames; ++t) {
      for (std::size_t k = 0; k < n_bins; ++k) bins[k] = X(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k));
      std::vector<double> frame = irfft(bins, spec.fft_size);
      std::size_t offset = t * hop_len;
      for (std::size_t i = 0; i < frame_len; ++i) out[offset + i] += frame[i] * window[i];
    }
    for (std::size_t i = 0; i < out_len; ++i) {
      if (norm[i] > 1e-12) out[i] /= norm[i];
    }
    audio.samples.push_back(std::move(out));
  }
  return audio;
}

}  // namespace speechkit::dsp
