#pragma once

#include <filesystem>

#include "speechkit/dsp.hpp"

namespace speechkit::dsp {

enum class WavFormat { Pcm16, Float32 };

/// RIFF/WAVE reader for PCM 16-bit and IEEE float 32-bit, any channel count.
MultichannelAudio read_wav(const std::filesystem::path& path);

void write_wav(const std::filesystem::path& path, const MultichannelAudio& audio,
               WavFormat format = WavFormat::Float32);

/// Minimal NumPy .npy (v1.0) 2-D array I/O, dtypes <f4 / <f8, C order.
Eigen::MatrixXd read_npy_matrix(const std::filesystem::path& path);
void write_npy_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);

}  // namespace speechkit::dsp
