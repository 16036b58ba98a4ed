#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "speechkit/audio_io.hpp"

namespace speechkit::dsp {

namespace {

std::uint32_t read_u32(const char* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}
std::uint16_t read_u16(const char* p) {
  std::uint16_t v;
  std::memcpy(&v, p, 2);
  return v;
}

void put_u16(std::string& out, std::uint16_t v) { out.append(reinterpret_cast<const char*>(&v), 2); }
void put_u32(std::string& out, std::uint32_t v) { out.append(reinterpret_cast<const char*>(&v), 4); }

}  // namespace

MultichannelAudio read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read WAV file: " + path.string());
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 12 || buf.compare(0, 4, "RIFF") != 0 || buf.compare(8, 4, "WAVE") != 0) {
    throw Error("not a RIFF/WAVE file: " + path.string());
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  std::size_t data_pos = 0, data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    std::string chunk_id = buf.substr(pos, 4);
    std::uint32_t chunk_len = read_u32(buf.data() + pos + 4);
    std::size_t body = pos + 8;
    if (chunk_id == "fmt ") {
      if (chunk_len < 16 || body + 16 > buf.size()) throw Error("bad fmt chunk: " + path.string());
      format = read_u16(buf.data() + body);
      channels = read_u16(buf.data() + body + 2);
      sample_rate = read_u32(buf.data() + body + 4);
      bits = read_u16(buf.data() + body + 14);
    } else if (chunk_id == "data") {
      data_pos = body;
      data_len = std::min<std::size_t>(chunk_len, buf.size() - body);
    }
    pos = body + chunk_len + (chunk_len & 1);
  }
  if (channels == 0 || sample_rate == 0 || data_pos == 0) {
    throw Error("missing fmt/data chunk: " + path.string());
  }
  bool pcm16 = format == 1 && bits == 16;
  bool float32 = format == 3 && bits == 32;
  if (!pcm16 && !float32) {
    throw Error("unsupported WAV encoding (format " + std::to_string(format) + ", " +
                std::to_string(bits) + " bits): " + path.string());
  }

  std::size_t bytes_per_sample = pcm16 ? 2 : 4;
  std::size_t n_frames = data_len / (bytes_per_sample * channels);
  MultichannelAudio audio;
  audio.fs = sample_rate;
  audio.samples.assign(channels, std::vector<double>(n_frames));
  const char* data = buf.data() + data_pos;
  for (std::size_t t = 0; t < n_frames; ++t) {
    for (std::size_t c = 0; c < channels; ++c) {
      const char* p = data + (t * channels + c) * bytes_per_sample;
      if (pcm16) {
        std::int16_t v;
        std::memcpy(&v, p, 2);
        audio.samples[c][t] = static_cast<double>(v) / 32768.0;
      } else {
        float v;
        std::memcpy(&v, p, 4);
        audio.samples[c][t] = v;
      }
    }
  }
  return audio;
}

void write_wav(const std::filesystem::path& path, const MultichannelAudio& audio, WavFormat format) {
  std::size_t channels = audio.channels();
  if (channels == 0) throw Error("write_wav: no channels");
  std::size_t n_frames = audio.length();
  for (const auto& ch : audio.samples) {
    if (ch.size() != n_frames) throw Error("write_wav: channels differ in length");
  }
  bool pcm16 = format == WavFormat::Pcm16;
  std::uint16_t bytes_per_sample = pcm16 ? 2 : 4;
  std::uint32_t data_len = static_cast<std::uint32_t>(n_frames * channels * bytes_per_sample);

  std::string out;
  out.reserve(44 + data_len);
  out += "RIFF";
  put_u32(out, 36 + data_len);
  out += "WAVE";
  out += "fmt ";
  put_u32(out, 16);
  put_u16(out, pcm16 ? 1 : 3);
  put_u16(out, static_cast<std::uint16_t>(channels));
  put_u32(out, static_cast<std::uint32_t>(std::llround(audio.fs)));
  put_u32(out, static_cast<std::uint32_t>(std::llround(audio.fs)) * channels * bytes_per_sample);
  put_u16(out, static_cast<std::uint16_t>(channels * bytes_per_sample));
  put_u16(out, pcm16 ? 16 : 32);
  out += "data";
  put_u32(out, data_len);
  for (std::size_t t = 0; t < n_frames; ++t) {
    for (std::size_t c = 0; c < channels; ++c) {
      double v = audio.samples[c][t];
      if (pcm16) {
        double scaled = std::clamp(v, -1.0, 1.0) * 32767.0;
        auto s = static_cast<std::int16_t>(std::llround(scaled));
        out.append(reinterpret_cast<const char*>(&s), 2);
      } else {
        auto f = static_cast<float>(v);
        out.append(reinterpret_cast<const char*>(&f), 4);
      }
    }
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot write WAV file: " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error("short write on WAV file: " + path.string());
}

Eigen::MatrixXd read_npy_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read npy file: " + path.string());
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 10 || buf.compare(0, 6, "\x93NUMPY") != 0) {
    throw Error("not an npy file: " + path.string());
  }
  std::uint16_t header_len = read_u16(buf.data() + 8);
  std::size_t header_start = 10;
  if (header_start + header_len > buf.size()) throw Error("truncated npy header: " + path.string());
  std::string header = buf.substr(header_start, header_len);

  auto find_value = [&](const std::string& key) -> std::string {
    std::size_t k = header.find("'" + key + "'");
    if (k == std::string::npos) throw Error("npy header missing " + key + ": " + path.string());
    std::size_t colon = header.find(':', k);
    std::size_t end = header.find_first_of(",}", colon);
    // shape tuples contain commas; extend to the closing paren
    if (header.find('(', colon) != std::string::npos &&
        header.find('(', colon) < end) {
      end = header.find(')', colon) + 1;
    }
    return header.substr(colon + 1, end - colon - 1);
  };

  std::string descr = find_value("descr");
  bool f4 = descr.find("<f4") != std::string::npos;
  bool f8 = descr.find("<f8") != std::string::npos;
  if (!f4 && !f8) throw Error("npy dtype must be <f4 or <f8: " + path.string());
  if (find_value("fortran_order").find("True") != std::string::npos) {
    throw Error("npy fortran_order not supported: " + path.string());
  }
  std::string shape = find_value("shape");
  std::vector<std::size_t> dims;
  std::size_t p = 0;
  while (p < shape.size()) {
    if (std::isdigit(static_cast<unsigned char>(shape[p]))) {
      std::size_t q = p;
      while (q < shape.size() && std::isdigit(static_cast<unsigned char>(shape[q]))) ++q;
      dims.push_back(std::stoull(shape.substr(p, q - p)));
      p = q;
    } else {
      ++p;
    }
  }
  if (dims.size() != 2) throw Error("npy array must be 2-D: " + path.string());

  std::size_t rows = dims[0], cols = dims[1];
  std::size_t elem = f4 ? 4 : 8;
  std::size_t data_start = header_start + header_len;
  if (data_start + rows * cols * elem > buf.size()) throw Error("truncated npy data: " + path.string());
  Eigen::MatrixXd m(rows, cols);
  const char* data = buf.data() + data_start;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const char* q = data + (r * cols + c) * elem;
      if (f4) {
        float v;
        std::memcpy(&v, q, 4);
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
      } else {
        double v;
        std::memcpy(&v, q, 8);
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
      }
    }
  }
  return m;
}

void write_npy_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::string header = "{'descr': '<f8', 'fortran_order': False, 'shape': (" +
                       std::to_string(m.rows()) + ", " + std::to_string(m.cols()) + "), }";
  std::size_t unpadded = 10 + header.size() + 1;
  std::size_t padded = (unpadded + 63) / 64 * 64;
  header.append(padded - unpadded, ' ');
  header += '\n';

  std::string out;
  out += "\x93NUMPY";
  out += '\x01';
  out += '\x00';
  put_u16(out, static_cast<std::uint16_t>(header.size()));
  out += header;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      double v = m(r, c);
      out.append(reinterpret_cast<const char*>(&v), 8);
    }
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot write npy file: " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
}

}  // namespace speechkit::dsp
