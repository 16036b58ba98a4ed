#include <zlib.h>

#include <algorithm>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "speechkit/trainloop.hpp"
#include "speechkit/yaml.hpp"

namespace speechkit::train {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[8] = {'S', 'K', 'C', 'K', 'P', 'T', '0', '1'};
constexpr const char* kStateFile = "state.bin";
constexpr const char* kMetaFile = "meta.yaml";
constexpr const char* kPrefix = "CKPT+";
constexpr const char* kTempPrefix = ".tmp.CKPT+";

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size()) throw Error("corrupt checkpoint blob: truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos++])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos++])) << (8 * i);
    return v;
  }
  double f64() {
    std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string out = buf.substr(pos, n);
    pos += n;
    return out;
  }
};

std::uint32_t crc_of(const std::string& payload) {
  return static_cast<std::uint32_t>(
      ::crc32(0, reinterpret_cast<const Bytef*>(payload.data()), static_cast<uInt>(payload.size())));
}

void append_section(std::string& out, const std::string& name, const std::string& payload) {
  put_u32(out, static_cast<std::uint32_t>(name.size()));
  out += name;
  put_u64(out, payload.size());
  out += payload;
  put_u32(out, crc_of(payload));
}

std::string encode_state(const TrainState& state) {
  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, 4);  // section count

  std::string meta;
  put_u64(meta, static_cast<std::uint64_t>(state.epoch));
  put_u64(meta, static_cast<std::uint64_t>(state.global_step));
  put_u64(meta, state.batch_index);
  put_f64(meta, state.epoch_loss_sum);
  put_u64(meta, state.epoch_loss_count);
  append_section(out, "meta", meta);

  std::string params;
  put_u64(params, state.parameters.size());
  for (double v : state.parameters) put_f64(params, v);
  append_section(out, "params", params);

  std::string opt;
  put_u64(opt, state.optimizer_state.size());
  for (double v : state.optimizer_state) put_f64(opt, v);
  append_section(out, "opt", opt);

  append_section(out, "rng", state.rng_state);
  return out;
}

TrainState decode_state(const std::string& buf) {
  if (buf.size() < sizeof(kMagic) || std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error("corrupt checkpoint blob: bad magic");
  }
  Reader r{buf, sizeof(kMagic)};
  std::uint32_t n_sections = r.u32();
  TrainState state;
  for (std::uint32_t s = 0; s < n_sections; ++s) {
    std::uint32_t name_len = r.u32();
    std::string name = r.bytes(name_len);
    std::uint64_t payload_len = r.u64();
    std::string payload = r.bytes(payload_len);
    std::uint32_t crc = r.u32();
    if (crc != crc_of(payload)) {
      throw Error("corrupt checkpoint blob: checksum mismatch in section '" + name + "'");
    }
    Reader pr{payload, 0};
    if (name == "meta") {
      state.epoch = static_cast<std::int64_t>(pr.u64());
      state.global_step = static_cast<std::int64_t>(pr.u64());
      state.batch_index = pr.u64();
      state.epoch_loss_sum = pr.f64();
      state.epoch_loss_count = pr.u64();
    } else if (name == "params") {
      std::uint64_t n = pr.u64();
      state.parameters.resize(n);
      for (std::uint64_t i = 0; i < n; ++i) state.parameters[i] = pr.f64();
    } else if (name == "opt") {
      std::uint64_t n = pr.u64();
      state.optimizer_state.resize(n);
      for (std::uint64_t i = 0; i < n; ++i) state.optimizer_state[i] = pr.f64();
    } else if (name == "rng") {
      state.rng_state = payload;
    }
  }
  return state;
}

std::string iso8601_utc(std::chrono::system_clock::time_point tp) {
  auto secs = std::chrono::time_point_cast<std::chrono::seconds>(tp);
  auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(tp - secs).count();
  std::time_t t = std::chrono::system_clock::to_time_t(secs);
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d-%02d-%02d.%09lld", tm_utc.tm_year + 1900,
                tm_utc.tm_mon + 1, tm_utc.tm_mday, tm_utc.tm_hour, tm_utc.tm_min, tm_utc.tm_sec,
                static_cast<long long>(ns));
  return buf;
}

std::string write_meta_yaml(const Checkpoint& ckpt) {
  using conf::ConfigNode;
  ConfigNode::Mapping root;
  root.entries.insert("epoch", ConfigNode{Scalar{ckpt.epoch}, 0, 0});
  root.entries.insert("step", ConfigNode{Scalar{ckpt.step}, 0, 0});
  root.entries.insert("unix_time_ns", ConfigNode{Scalar{ckpt.unix_time_ns}, 0, 0});
  ConfigNode::Mapping metrics;
  for (const auto& [name, value] : ckpt.metrics) {
    metrics.entries.insert(name, ConfigNode{Scalar{value}, 0, 0});
  }
  root.entries.insert("metrics", ConfigNode{std::move(metrics), 0, 0});
  return conf::dump_config(ConfigNode{std::move(root), 0, 0});
}

Checkpoint read_meta_yaml(const fs::path& dir) {
  conf::ConfigNode root = conf::parse_config_file(dir / kMetaFile);
  const auto& entries = root.mapping().entries;
  Checkpoint ckpt;
  ckpt.dir = dir;
  auto get_int = [&](const char* key) -> std::int64_t {
    const conf::ConfigNode* node = entries.find(key);
    if (!node || !node->is_scalar()) throw Error("checkpoint meta missing '" + std::string(key) + "'");
    return std::get<std::int64_t>(node->scalar());
  };
  ckpt.epoch = get_int("epoch");
  ckpt.step = get_int("step");
  ckpt.unix_time_ns = get_int("unix_time_ns");
  if (const conf::ConfigNode* metrics = entries.find("metrics"); metrics && metrics->is_mapping()) {
    for (const auto& [name, node] : metrics->mapping().entries) {
      if (node.is_scalar() && scalar_is_number(node.scalar())) {
        ckpt.metrics.insert(name, scalar_as_double(node.scalar()));
      }
    }
  }
  return ckpt;
}

// ordering key: (epoch, step, wall clock, name)
bool checkpoint_less(const Checkpoint& a, const Checkpoint& b) {
  if (a.epoch != b.epoch) return a.epoch < b.epoch;
  if (a.step != b.step) return a.step < b.step;
  if (a.unix_time_ns != b.unix_time_ns) return a.unix_time_ns < b.unix_time_ns;
  return a.dir.filename().string() < b.dir.filename().string();
}

void apply_retention(const fs::path& parent, std::size_t keep_recent) {
  std::vector<Checkpoint> all = list_checkpoints(parent);
  std::sort(all.begin(), all.end(), checkpoint_less);
  if (all.size() <= keep_recent) return;

  std::set<std::string> protected_dirs;
  for (std::size_t i = all.size() - keep_recent; i < all.size(); ++i) {
    protected_dirs.insert(all[i].dir.filename().string());
  }
  // keep per-metric extremes in both directions so find_best stays valid
  std::set<std::string> metric_names;
  for (const auto& ckpt : all) {
    for (const auto& [name, v] : ckpt.metrics) metric_names.insert(name);
  }
  for (const auto& name : metric_names) {
    const Checkpoint* best_min = nullptr;
    const Checkpoint* best_max = nullptr;
    for (const auto& ckpt : all) {
      const double* v = ckpt.metrics.find(name);
      if (!v) continue;
      if (!best_min || *v <= *best_min->metrics.find(name)) best_min = &ckpt;
      if (!best_max || *v >= *best_max->metrics.find(name)) best_max = &ckpt;
    }
    if (best_min) protected_dirs.insert(best_min->dir.filename().string());
    if (best_max) protected_dirs.insert(best_max->dir.filename().string());
  }
  for (const auto& ckpt : all) {
    if (!protected_dirs.count(ckpt.dir.filename().string())) {
      std::error_code ec;
      fs::remove_all(ckpt.dir, ec);
    }
  }
}

}  // namespace

Checkpoint save_checkpoint(const TrainState& state, const fs::path& parent,
                           const SmallMap<double>& metrics, std::size_t keep_recent) {
  fs::create_directories(parent);
  auto now = std::chrono::system_clock::now();
  std::string stamp = iso8601_utc(now);
  std::string name = std::string(kPrefix) + stamp;
  fs::path final_dir = parent / name;
  for (int k = 1; fs::exists(final_dir); ++k) {
    final_dir = parent / (name + "+" + std::to_string(k));
  }

  Checkpoint ckpt;
  ckpt.dir = final_dir;
  ckpt.epoch = state.epoch;
  ckpt.step = state.global_step;
  ckpt.unix_time_ns =
      std::chrono::duration_cast<std::chrono::nanoseconds>(now.time_since_epoch()).count();
  ckpt.metrics = metrics;

  fs::path temp_dir = parent / (std::string(kTempPrefix) + final_dir.filename().string().substr(5));
  fs::remove_all(temp_dir);
  fs::create_directories(temp_dir);
  {
    std::ofstream out(temp_dir / kStateFile, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint state: " + (temp_dir / kStateFile).string());
    std::string blob = encode_state(state);
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw Error("short write on checkpoint state");
  }
  {
    std::ofstream out(temp_dir / kMetaFile, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint meta: " + (temp_dir / kMetaFile).string());
    out << write_meta_yaml(ckpt);
  }
  fs::rename(temp_dir, final_dir);  // atomic completion
  log_debug("saved checkpoint " + final_dir.string());

  apply_retention(parent, keep_recent);
  return ckpt;
}

std::vector<Checkpoint> list_checkpoints(const fs::path& parent) {
  std::vector<Checkpoint> out;
  if (!fs::is_directory(parent)) return out;
  for (const auto& entry : fs::directory_iterator(parent)) {
    if (!entry.is_directory()) continue;
    std::string name = entry.path().filename().string();
    if (name.rfind(kPrefix, 0) != 0) continue;  // skips temp dirs and strays
    if (!fs::exists(entry.path() / kStateFile) || !fs::exists(entry.path() / kMetaFile)) continue;
    try {
      out.push_back(read_meta_yaml(entry.path()));
    } catch (const Error& e) {
      log_error("skipping unreadable checkpoint " + name + ": " + e.what());
    }
  }
  std::sort(out.begin(), out.end(), checkpoint_less);
  return out;
}

std::optional<Checkpoint> recover_latest_checkpoint(const fs::path& parent) {
  std::vector<Checkpoint> all = list_checkpoints(parent);
  if (all.empty()) return std::nullopt;
  return all.back();
}

Checkpoint find_best_checkpoint(const fs::path& parent, const std::string& metric,
                                BestDirection direction) {
  std::vector<Checkpoint> all = list_checkpoints(parent);
  const Checkpoint* best = nullptr;
  for (const auto& ckpt : all) {  // ascending order: later entries win ties
    const double* v = ckpt.metrics.find(metric);
    if (!v) continue;
    if (!best) {
      best = &ckpt;
      continue;
    }
    double cur = *best->metrics.find(metric);
    if (direction == BestDirection::Min ? *v <= cur : *v >= cur) best = &ckpt;
  }
  if (!best) throw Error("no checkpoint records metric '" + metric + "' in " + parent.string());
  return *best;
}

TrainState load_checkpoint_state(const Checkpoint& ckpt) {
  std::ifstream in(ckpt.dir / kStateFile, std::ios::binary);
  if (!in) throw Error("cannot read checkpoint state: " + (ckpt.dir / kStateFile).string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_state(buf.str());
}

}  // namespace speechkit::train
