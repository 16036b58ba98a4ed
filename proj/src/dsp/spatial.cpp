#include <cmath>

#include "speechkit/dsp.hpp"
#include "speechkit/yaml.hpp"

namespace speechkit::dsp {

SpatialCovariance compute_scm(const Spectrogram& spec, const std::optional<Mask>& mask,
                              ScmKind kind) {
  std::size_t n_mics = spec.n_channels();
  std::size_t n_frames = spec.n_frames();
  std::size_t n_bins = spec.n_bins();
  if (n_mics == 0 || n_frames == 0) throw Error("compute_scm: empty spectrogram");
  if (mask) {
    if (static_cast<std::size_t>(mask->rows()) != n_frames ||
        static_cast<std::size_t>(mask->cols()) != n_bins) {
      throw Error("compute_scm: mask shape must be frames x bins");
    }
  }

  SpatialCovariance scm;
  scm.kind = kind;
  scm.fs = spec.fs;
  scm.fft_size = spec.fft_size;
  scm.bins.resize(n_bins);
  scm.degenerate.assign(n_bins, 0);

  Eigen::VectorXcd x(n_mics);
  for (std::size_t k = 0; k < n_bins; ++k) {
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(n_mics, n_mics);
    double weight_sum = 0;
    for (std::size_t t = 0; t < n_frames; ++t) {
      double w = mask ? (*mask)(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) : 1.0;
      if (w == 0.0) continue;
      for (std::size_t p = 0; p < n_mics; ++p) {
        x(static_cast<Eigen::Index>(p)) =
            spec.channels[p](static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k));
      }
      r.noalias() += w * (x * x.adjoint());
      weight_sum += w;
    }
    if (weight_sum <= 0) {
      scm.bins[k] = 1e-12 * Eigen::MatrixXcd::Identity(n_mics, n_mics);
      scm.degenerate[k] = 1;
      continue;
    }
    r /= weight_sum;
    scm.bins[k] = 0.5 * (r + r.adjoint().eval());  // cancel rounding skew
  }
  return scm;
}

ArrayGeometry load_geometry(const std::filesystem::path& yaml_path) {
  conf::ConfigNode root = conf::parse_config_file(yaml_path);
  const auto& entries = root.mapping().entries;
  const conf::ConfigNode* mics = entries.find("mics");
  if (!mics || !mics->is_sequence()) {
    throw Error("geometry file must contain a 'mics' list of [x, y, z]: " + yaml_path.string());
  }
  ArrayGeometry geometry;
  for (const auto& item : mics->sequence().items) {
    if (!item.is_sequence() || item.sequence().items.size() != 3) {
      throw Error("each mic must be an [x, y, z] triple: " + yaml_path.string());
    }
    Eigen::Vector3d position;
    for (int i = 0; i < 3; ++i) {
      position(i) = scalar_as_double(item.sequence().items[static_cast<std::size_t>(i)].scalar());
    }
    geometry.mics.push_back(position);
  }
  if (const conf::ConfigNode* c = entries.find("speed_of_sound"); c && c->is_scalar()) {
    geometry.speed_of_sound = scalar_as_double(c->scalar());
  }
  for (std::size_t p = 0; p < geometry.mics.size(); ++p) {
    for (std::size_t q = p + 1; q < geometry.mics.size(); ++q) {
      if ((geometry.mics[p] - geometry.mics[q]).norm() == 0.0) {
        throw Error("geometry has coincident microphones: " + yaml_path.string());
      }
    }
  }
  return geometry;
}

std::vector<double> bin_freqs(std::size_t fft_size, double fs) {
  std::vector<double> freqs(fft_size / 2 + 1);
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    freqs[k] = static_cast<double>(k) * fs / static_cast<double>(fft_size);
  }
  return freqs;
}

SteeringField steering(const ArrayGeometry& geometry, const Eigen::Vector3d& direction,
                       const std::vector<double>& freqs, bool phase_ref_first) {
  if (std::abs(direction.norm() - 1.0) > 1e-6) {
    throw Error("steering: direction must be a unit vector");
  }
  std::size_t n_mics = geometry.n_mics();
  SteeringField field;
  field.direction = direction;
  field.freqs = freqs;
  field.a.resize(static_cast<Eigen::Index>(freqs.size()), static_cast<Eigen::Index>(n_mics));

  std::vector<double> tau(n_mics);
  for (std::size_t p = 0; p < n_mics; ++p) {
    tau[p] = -geometry.mics[p].dot(direction) / geometry.speed_of_sound;
  }
  if (phase_ref_first) {
    double ref = tau[0];
    for (double& t : tau) t -= ref;
  }
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    for (std::size_t p = 0; p < n_mics; ++p) {
      double phase = -2.0 * M_PI * freqs[k] * tau[p];
      field.a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(p)) =
          std::complex<double>(std::cos(phase), std::sin(phase));
    }
  }
  return field;
}

}  // namespace speechkit::dsp
