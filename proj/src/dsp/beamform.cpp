#include <cmath>

#include "speechkit/dsp.hpp"

namespace speechkit::dsp {

BeamformerWeights delay_and_sum(const SteeringField& steer) {
  BeamformerWeights weights;
  weights.w = steer.a / static_cast<double>(steer.a.cols());
  return weights;
}

MvdrResult mvdr(const SpatialCovariance& scm, const SteeringField& steer,
                const MvdrOptions& options) {
  std::size_t n_bins = scm.n_bins();
  std::size_t n_mics = scm.n_mics();
  if (static_cast<std::size_t>(steer.a.rows()) != n_bins ||
      static_cast<std::size_t>(steer.a.cols()) != n_mics) {
    throw Error("mvdr: steering field does not match the SCM (bins x mics)");
  }

  MvdrResult result;
  result.weights.w.resize(static_cast<Eigen::Index>(n_bins), static_cast<Eigen::Index>(n_mics));
  result.fallback_bins.assign(n_bins, 0);

  for (std::size_t k = 0; k < n_bins; ++k) {
    const auto ki = static_cast<Eigen::Index>(k);
    Eigen::VectorXcd a = steer.a.row(ki).transpose();
    Eigen::MatrixXcd r = scm.bins[k];
    double load = options.diag_load * r.trace().real() / static_cast<double>(n_mics);
    r += load * Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(n_mics),
                                           static_cast<Eigen::Index>(n_mics));
    Eigen::LLT<Eigen::MatrixXcd> llt(r);
    bool ok = llt.info() == Eigen::Success;
    Eigen::VectorXcd solved;
    if (ok) {
      solved = llt.solve(a);
      std::complex<double> denom = a.dot(solved);  // A^H R^-1 A
      if (std::abs(denom) > 1e-300 && std::isfinite(std::abs(denom))) {
        result.weights.w.row(ki) = (solved / denom).transpose();
        continue;
      }
    }
    // singular after loading: flag and fall back to delay-and-sum
    result.fallback_bins[k] = 1;
    result.weights.w.row(ki) = (a / static_cast<double>(n_mics)).transpose();
  }
  return result;
}

BeamformerWeights gev(const SpatialCovariance& scm_ss, const SpatialCovariance& scm_nn,
                      double diag_load) {
  std::size_t n_bins = scm_ss.n_bins();
  std::size_t n_mics = scm_ss.n_mics();
  if (scm_nn.n_bins() != n_bins || scm_nn.n_mics() != n_mics) {
    throw Error("gev: speech/noise SCM shape mismatch");
  }

  BeamformerWeights weights;
  weights.w.resize(static_cast<Eigen::Index>(n_bins), static_cast<Eigen::Index>(n_mics));
  const Eigen::MatrixXcd identity = Eigen::MatrixXcd::Identity(
      static_cast<Eigen::Index>(n_mics), static_cast<Eigen::Index>(n_mics));

  for (std::size_t k = 0; k < n_bins; ++k) {
    const auto ki = static_cast<Eigen::Index>(k);
    Eigen::MatrixXcd r_ss = 0.5 * (scm_ss.bins[k] + scm_ss.bins[k].adjoint().eval());
    Eigen::MatrixXcd r_nn = 0.5 * (scm_nn.bins[k] + scm_nn.bins[k].adjoint().eval());

    // factor the raw noise SCM first, load only when it is not PD
    Eigen::LLT<Eigen::MatrixXcd> llt(r_nn);
    if (llt.info() != Eigen::Success) {
      double load = diag_load * std::max(r_nn.trace().real(), 1e-300) / static_cast<double>(n_mics);
      llt.compute(r_nn + load * identity);
      if (llt.info() != Eigen::Success) {
        throw Error("gev: noise SCM not positive definite after loading at bin " + std::to_string(k));
      }
    }
    Eigen::MatrixXcd l_inv = llt.matrixL().solve(identity);
    Eigen::MatrixXcd whitened = l_inv * r_ss * l_inv.adjoint();
    whitened = 0.5 * (whitened + whitened.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(whitened);
    if (eig.info() != Eigen::Success) throw Error("gev: eigendecomposition failed at bin " + std::to_string(k));
    Eigen::VectorXcd v = eig.eigenvectors().col(static_cast<Eigen::Index>(n_mics - 1));
    Eigen::VectorXcd w = l_inv.adjoint() * v;
    w.normalize();
    std::complex<double> first = w(0);
    if (std::abs(first) > 1e-300) {
      w *= std::conj(first) / std::abs(first);  // first coefficient real >= 0
    }
    weights.w.row(ki) = w.transpose();
  }
  return weights;
}

Spectrogram apply_beamformer(const BeamformerWeights& weights, const Spectrogram& spec) {
  std::size_t n_mics = spec.n_channels();
  std::size_t n_bins = spec.n_bins();
  std::size_t n_frames = spec.n_frames();
  if (static_cast<std::size_t>(weights.w.rows()) != n_bins ||
      static_cast<std::size_t>(weights.w.cols()) != n_mics) {
    throw Error("apply_beamformer: weights do not match the spectrogram (bins x mics)");
  }

  Spectrogram out;
  out.frame_len = spec.frame_len;
  out.hop_len = spec.hop_len;
  out.fft_size = spec.fft_size;
  out.window = spec.window;
  out.fs = spec.fs;
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n_frames),
                                              static_cast<Eigen::Index>(n_bins));
  for (std::size_t p = 0; p < n_mics; ++p) {
    const auto pi = static_cast<Eigen::Index>(p);
    for (std::size_t k = 0; k < n_bins; ++k) {
      const auto ki = static_cast<Eigen::Index>(k);
      y.col(ki) += std::conj(weights.w(ki, pi)) * spec.channels[p].col(ki);
    }
  }
  out.channels.push_back(std::move(y));
  return out;
}

}  // namespace speechkit::dsp
