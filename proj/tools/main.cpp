#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "speechkit/audio_io.hpp"
#include "speechkit/batching.hpp"
#include "speechkit/datapipe.hpp"
#include "speechkit/dsp.hpp"
#include "speechkit/hyperconf.hpp"
#include "speechkit/manifest.hpp"
#include "speechkit/metrics.hpp"
#include "speechkit/trainloop.hpp"

namespace sk = speechkit;
namespace fs = std::filesystem;

namespace {

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw sk::Error("cannot read file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<double> read_score_file(const fs::path& path) {
  std::vector<double> scores;
  std::istringstream iss(read_text_file(path));
  std::string line;
  while (std::getline(iss, line)) {
    auto tokens = sk::metrics::tokenize(line);
    for (const auto& t : tokens) scores.push_back(std::stod(t));
  }
  if (scores.empty()) throw sk::Error("no scores in " + path.string());
  return scores;
}

// `id<TAB>token token ...` per line; id order preserved
sk::SmallMap<std::vector<std::string>> read_trn_file(const fs::path& path) {
  sk::SmallMap<std::vector<std::string>> utterances;
  std::istringstream iss(read_text_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(iss, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    std::string id, rest;
    if (tab == std::string::npos) {
      // fall back to first-space splitting for hand-written files
      std::size_t space = line.find(' ');
      if (space == std::string::npos) {
        id = line;
      } else {
        id = line.substr(0, space);
        rest = line.substr(space + 1);
      }
    } else {
      id = line.substr(0, tab);
      rest = line.substr(tab + 1);
    }
    if (!utterances.insert(id, sk::metrics::tokenize(rest))) {
      throw sk::Error("duplicate utterance id '" + id + "' at line " + std::to_string(line_no) +
                      " of " + path.string());
    }
  }
  return utterances;
}

Eigen::Vector3d parse_doa(const std::string& text) {
  double az = 0, el = 0;
  std::size_t comma = text.find(',');
  try {
    az = std::stod(text.substr(0, comma));
    if (comma != std::string::npos) el = std::stod(text.substr(comma + 1));
  } catch (const std::exception&) {
    throw sk::Error("bad --doa value '" + text + "', expected az[,el] in degrees");
  }
  double az_rad = az * M_PI / 180.0;
  double el_rad = el * M_PI / 180.0;
  return {std::cos(el_rad) * std::cos(az_rad), std::cos(el_rad) * std::sin(az_rad),
          std::sin(el_rad)};
}

double grid_azimuth(const sk::dsp::DoaGrid& grid, std::size_t index) {
  if (index < grid.azimuths_deg.size()) return grid.azimuths_deg[index];
  const auto& u = grid.directions[index];
  double az = std::atan2(u.y(), u.x()) * 180.0 / M_PI;
  return az < 0 ? az + 360.0 : az;
}

// ── resolve ─────────────────────────────────────────────────────────────────

int cmd_resolve(const fs::path& config, const std::vector<std::string>& override_args, bool dump) {
  sk::conf::ConfigNode root = sk::conf::parse_config_file(config);
  sk::conf::OverrideSet overrides = sk::conf::OverrideSet::from_args(override_args);
  root = sk::conf::apply_overrides(root, overrides);
  sk::conf::FactoryRegistry registry;  // empty: everything constructs as deferred
  sk::conf::ResolvedMap resolved = sk::conf::resolve(root, registry);
  if (dump) std::fputs(sk::conf::dump_resolved(resolved).c_str(), stdout);
  return 0;
}

// ── run ─────────────────────────────────────────────────────────────────────

struct LinearSpec {
  std::size_t in_dim = 0;
  std::size_t out_dim = 1;
};

const sk::conf::ResolvedValue* find_key(const sk::conf::ResolvedMap& m, const std::string& key) {
  return m.find(key);
}

std::int64_t get_int(const sk::conf::ResolvedMap& m, const std::string& key, std::int64_t fallback) {
  const auto* v = find_key(m, key);
  if (!v) return fallback;
  return std::get<std::int64_t>(v->scalar());
}

double get_double(const sk::conf::ResolvedMap& m, const std::string& key, double fallback) {
  const auto* v = find_key(m, key);
  if (!v) return fallback;
  return sk::scalar_as_double(v->scalar());
}

std::string get_string(const sk::conf::ResolvedMap& m, const std::string& key,
                       const std::string& fallback) {
  const auto* v = find_key(m, key);
  if (!v) return fallback;
  return std::get<std::string>(v->scalar());
}

sk::data::Item parse_floats_item(const std::vector<sk::data::Item>& inputs) {
  const sk::Scalar& s = sk::data::item_scalar(inputs.at(0));
  std::vector<double> values;
  if (const auto* str = std::get_if<std::string>(&s)) {
    std::istringstream iss(*str);
    double v;
    while (iss >> v) values.push_back(v);
  } else {
    values.push_back(sk::scalar_as_double(s));
  }
  if (values.empty()) throw sk::Error("no numeric values in item");
  return sk::data::Tensor::vector(std::move(values));
}

int cmd_run(const fs::path& config_path, const std::vector<std::string>& override_args,
            std::optional<std::uint64_t> seed_flag) {
  sk::conf::ConfigNode root = sk::conf::parse_config_file(config_path);
  root = sk::conf::apply_overrides(root, sk::conf::OverrideSet::from_args(override_args));

  sk::conf::FactoryRegistry registry;
  registry.register_factory(
      "speechkit.nn.Linear",
      [](const sk::conf::ResolvedList&, const sk::conf::ResolvedMap& kw) -> std::any {
        LinearSpec spec;
        if (const auto* v = kw.find("in_dim")) spec.in_dim = static_cast<std::size_t>(std::get<std::int64_t>(v->scalar()));
        if (const auto* v = kw.find("out_dim")) spec.out_dim = static_cast<std::size_t>(std::get<std::int64_t>(v->scalar()));
        if (spec.in_dim == 0) throw sk::Error("speechkit.nn.Linear requires in_dim");
        return spec;
      });
  sk::conf::ResolvedMap resolved = sk::conf::resolve(root, registry);

  const fs::path base = config_path.parent_path();
  auto resolve_path = [&](const std::string& p) {
    fs::path path(p);
    return path.is_relative() ? base / path : path;
  };

  std::uint64_t seed = seed_flag ? *seed_flag : static_cast<std::uint64_t>(get_int(resolved, "seed", 0));
  auto epochs = get_int(resolved, "epochs", 1);
  double lr = get_double(resolved, "learning_rate", 0.1);
  auto batch_size = static_cast<std::size_t>(get_int(resolved, "batch_size", 1));
  std::string batching = get_string(resolved, "batching", "sorted");
  double max_elems = get_double(resolved, "max_elems", 0);
  auto n_buckets = static_cast<std::size_t>(get_int(resolved, "n_buckets", 8));
  std::string train_manifest = get_string(resolved, "train_manifest", "");
  std::string valid_manifest = get_string(resolved, "valid_manifest", "");
  std::string data_root = get_string(resolved, "data_root", ".");
  std::string input_key = get_string(resolved, "input_key", "x");
  std::string target_key = get_string(resolved, "target_key", "y");
  std::string checkpoint_dir = get_string(resolved, "checkpoint_dir", "");
  auto ckpt_steps = static_cast<std::uint64_t>(get_int(resolved, "checkpoint_interval_steps", 0));
  auto max_steps = static_cast<std::uint64_t>(get_int(resolved, "max_steps", 0));
  if (train_manifest.empty()) throw sk::Error("run config requires train_manifest");

  const auto* model = find_key(resolved, "model");
  if (!model || !model->is_constructed()) {
    throw sk::Error("run config requires model: !new:speechkit.nn.Linear {in_dim, out_dim}");
  }
  auto spec = std::any_cast<LinearSpec>(model->constructed().product);

  auto manifest = std::make_shared<sk::data::Manifest>(
      sk::data::load_manifest(resolve_path(train_manifest), sk::data::ManifestFormat::Auto, data_root));
  auto pipeline = std::make_shared<sk::data::Pipeline>(manifest);
  pipeline->add_dynamic_item(sk::data::DynamicItemSpec::map({input_key}, "input", parse_floats_item));
  pipeline->add_dynamic_item(sk::data::DynamicItemSpec::map({target_key}, "target", parse_floats_item));
  pipeline->set_output_keys({"id", "input", "target"});

  sk::SmallMap<double> lengths;
  for (const auto& [id, items] : manifest->examples) {
    sk::data::Example ex = pipeline->evaluate(id);
    lengths.insert(id, static_cast<double>(sk::data::item_tensor(ex.at("input")).length()));
  }

  sk::data::BatchStrategy strategy;
  if (batching == "random") strategy = sk::data::BatchStrategy::Random;
  else if (batching == "sorted") strategy = sk::data::BatchStrategy::Sorted;
  else if (batching == "dynamic") strategy = sk::data::BatchStrategy::Dynamic;
  else throw sk::Error("unknown batching strategy '" + batching + "'");

  sk::data::BatchPlanParams params;
  params.batch_size = batch_size;
  params.max_elems = max_elems;
  params.n_buckets = n_buckets;

  sk::train::DataPlan train_plan;
  train_plan.pipeline = pipeline.get();
  train_plan.numeric_keys = {"input", "target"};
  if (strategy == sk::data::BatchStrategy::Sorted) {
    train_plan.make_plan = [lengths, params, seed](std::int64_t) {
      return sk::data::plan_batches(lengths, sk::data::BatchStrategy::Sorted, params, seed);
    };
  } else {
    train_plan.make_plan = [lengths, params, seed, strategy](std::int64_t epoch) {
      return sk::data::plan_batches(lengths, strategy, params,
                                    sk::mix_seed(seed, static_cast<std::uint64_t>(epoch)));
    };
  }

  std::optional<sk::train::DataPlan> valid_plan;
  std::shared_ptr<sk::data::Manifest> vmanifest;
  std::shared_ptr<sk::data::Pipeline> vpipeline;
  if (!valid_manifest.empty()) {
    vmanifest = std::make_shared<sk::data::Manifest>(sk::data::load_manifest(
        resolve_path(valid_manifest), sk::data::ManifestFormat::Auto, data_root));
    vpipeline = std::make_shared<sk::data::Pipeline>(vmanifest);
    vpipeline->add_dynamic_item(sk::data::DynamicItemSpec::map({input_key}, "input", parse_floats_item));
    vpipeline->add_dynamic_item(sk::data::DynamicItemSpec::map({target_key}, "target", parse_floats_item));
    vpipeline->set_output_keys({"id", "input", "target"});
    sk::SmallMap<double> vlengths;
    for (const auto& [id, items] : vmanifest->examples) {
      sk::data::Example ex = vpipeline->evaluate(id);
      vlengths.insert(id, static_cast<double>(sk::data::item_tensor(ex.at("input")).length()));
    }
    valid_plan = sk::train::DataPlan::fixed(
        *vpipeline,
        sk::data::plan_batches(vlengths, sk::data::BatchStrategy::Sorted, params, seed),
        {"input", "target"});
  }

  sk::train::LinearProgram program(spec.in_dim, spec.out_dim);
  sk::train::SgdOptions sgd{lr};
  sk::train::FitOptions options;
  options.seed = seed;
  if (!checkpoint_dir.empty()) options.checkpoint_dir = resolve_path(checkpoint_dir);
  options.checkpoint_interval_steps = ckpt_steps;
  options.max_steps = max_steps;

  sk::train::TrainState state = sk::train::fit(program, epochs, train_plan, valid_plan, sgd, options);

  std::printf("epochs %lld\n", static_cast<long long>(state.epoch));
  std::printf("steps %lld\n", static_cast<long long>(state.global_step));
  sk::train::StageStats final_train =
      sk::train::evaluate(program, train_plan, sk::train::Stage::Test, state, state.epoch);
  std::printf("train_loss %.6f\n", final_train.avg_loss);
  if (valid_plan) {
    sk::train::StageStats final_valid =
        sk::train::evaluate(program, *valid_plan, sk::train::Stage::Test, state, state.epoch);
    std::printf("valid_loss %.6f\n", final_valid.avg_loss);
  }
  return 0;
}

// ── score ───────────────────────────────────────────────────────────────────

int cmd_score_wer(const fs::path& ref_path, const fs::path& hyp_path, const std::string& report) {
  auto ref = read_trn_file(ref_path);
  auto hyp = read_trn_file(hyp_path);
  sk::metrics::ErrorRateStats stats;
  for (const auto& [id, ref_tokens] : ref) {
    if (const auto* hyp_tokens = hyp.find(id)) {
      stats.append(id, ref_tokens, *hyp_tokens);
    } else {
      stats.note_missing(id);
    }
  }
  std::printf("WER %.4f (sub %zu, del %zu, ins %zu, ref_tokens %zu, scored %zu, missing %zu)\n",
              stats.error_rate(), stats.substitutions(), stats.deletions(), stats.insertions(),
              stats.ref_tokens(), stats.scored(), stats.missing());
  if (!report.empty()) {
    std::ofstream out(report, std::ios::binary);
    if (!out) throw sk::Error("cannot write report: " + report);
    out << stats.render_report();
  }
  return 0;
}

int cmd_score_der(const fs::path& ref_path, const fs::path& hyp_path, double collar,
                  bool ignore_overlap) {
  auto ref_files = sk::metrics::parse_rttm(read_text_file(ref_path));
  auto hyp_files = sk::metrics::parse_rttm(read_text_file(hyp_path));
  if (ref_files.empty()) throw sk::Error("no SPEAKER lines in " + ref_path.string());
  double error = 0, reference = 0, miss = 0, fa = 0, conf = 0;
  for (const auto& [file, ref_segments] : ref_files) {
    std::vector<sk::metrics::DiarSegment> hyp_segments;
    if (const auto* h = hyp_files.find(file)) hyp_segments = *h;
    sk::metrics::DerBreakdown b = sk::metrics::der(ref_segments, hyp_segments, collar, ignore_overlap);
    error += b.false_alarm + b.missed + b.confusion;
    reference += b.reference_length;
    miss += b.missed;
    fa += b.false_alarm;
    conf += b.confusion;
  }
  std::printf("DER %.4f (miss %.4fs, fa %.4fs, conf %.4fs, ref %.4fs)\n", 100.0 * error / reference,
              miss, fa, conf, reference);
  return 0;
}

int cmd_score_eer(const fs::path& target_path, const fs::path& nontarget_path) {
  sk::metrics::EerResult result = sk::metrics::eer(read_score_file(target_path),
                                                   read_score_file(nontarget_path));
  std::printf("EER %.4f threshold %.6f\n", result.eer_percent, result.threshold);
  return 0;
}

std::vector<double> mono_channel(const fs::path& path) {
  sk::dsp::MultichannelAudio audio = sk::dsp::read_wav(path);
  if (audio.channels() > 1) {
    sk::log_info(path.string() + " has " + std::to_string(audio.channels()) +
                 " channels; using channel 0");
  }
  return audio.samples.at(0);
}

int cmd_score_sisnr(const fs::path& clean, const fs::path& est, const std::string& mix) {
  std::vector<double> s = mono_channel(clean);
  std::vector<double> e = mono_channel(est);
  double snr = sk::metrics::si_snr(s, e);
  std::printf("SI-SNR %.4f\n", snr);
  if (!mix.empty()) {
    std::vector<double> x = mono_channel(mix);
    std::printf("SI-SNRi %.4f\n", snr - sk::metrics::si_snr(s, x));
  }
  return 0;
}

// ── doa / beamform ──────────────────────────────────────────────────────────

struct StftFlags {
  double frame_ms = 25;
  double hop_ms = 10;
};

sk::dsp::Spectrogram load_spectrogram(const fs::path& wav, const StftFlags& flags) {
  sk::dsp::MultichannelAudio audio = sk::dsp::read_wav(wav);
  sk::dsp::StftOptions options;
  options.frame_ms = flags.frame_ms;
  options.hop_ms = flags.hop_ms;
  return sk::dsp::stft(audio, options);
}

int cmd_doa(const std::string& method, const fs::path& wav, const fs::path& geometry_path,
            const StftFlags& flags, const std::string& pair, double max_tdoa, std::size_t sources,
            double resolution, double band_low, double band_high) {
  sk::dsp::ArrayGeometry geometry = sk::dsp::load_geometry(geometry_path);
  sk::dsp::Spectrogram spec = load_spectrogram(wav, flags);
  if (spec.n_channels() != geometry.n_mics()) {
    throw sk::Error("wav has " + std::to_string(spec.n_channels()) + " channels but geometry has " +
                    std::to_string(geometry.n_mics()) + " mics");
  }

  if (method == "gccphat") {
    std::size_t p = 0, q = 1;
    if (!pair.empty()) {
      std::size_t comma = pair.find(',');
      if (comma == std::string::npos) throw sk::Error("--pair expects p,q");
      p = std::stoull(pair.substr(0, comma));
      q = std::stoull(pair.substr(comma + 1));
    }
    if (p >= geometry.n_mics() || q >= geometry.n_mics() || p == q) {
      throw sk::Error("bad --pair indices");
    }
    double distance = (geometry.mics[p] - geometry.mics[q]).norm();
    double limit = max_tdoa > 0 ? max_tdoa
                                : spec.fs * distance / geometry.speed_of_sound + 2.0;
    sk::dsp::GccPhatResult r =
        sk::dsp::gcc_phat(spec, p, q, limit, distance, geometry.speed_of_sound);
    std::printf("tdoa_samples %.4f angle_deg %.2f\n", r.tdoa_samples, r.angle_deg);
    return 0;
  }

  sk::dsp::SpatialCovariance scm = sk::dsp::compute_scm(spec, std::nullopt);
  sk::dsp::DoaGrid grid = sk::dsp::DoaGrid::azimuth_circle(resolution);
  if (method == "srpphat") {
    sk::dsp::SrpResult r = sk::dsp::srp_phat(scm, geometry, grid);
    std::printf("azimuth_deg %.2f\n", grid_azimuth(grid, r.best_index));
    return 0;
  }
  if (method == "music") {
    sk::dsp::MusicOptions options;
    options.band_low_hz = band_low;
    options.band_high_hz = band_high;
    sk::dsp::MusicResult r = sk::dsp::music(scm, geometry, grid, sources, options);
    for (std::size_t idx : r.peak_indices) {
      std::printf("azimuth_deg %.2f\n", grid_azimuth(grid, idx));
    }
    return 0;
  }
  throw sk::Error("unknown doa method '" + method + "'");
}

int cmd_beamform(const std::string& method, const fs::path& wav, const fs::path& geometry_path,
                 const StftFlags& flags, const std::string& doa, const std::string& noise_mask,
                 const std::string& speech_mask, const fs::path& output, bool pcm16) {
  sk::dsp::ArrayGeometry geometry = sk::dsp::load_geometry(geometry_path);
  sk::dsp::Spectrogram spec = load_spectrogram(wav, flags);
  if (spec.n_channels() != geometry.n_mics()) {
    throw sk::Error("wav has " + std::to_string(spec.n_channels()) + " channels but geometry has " +
                    std::to_string(geometry.n_mics()) + " mics");
  }
  std::vector<double> freqs = sk::dsp::bin_freqs(spec.fft_size, spec.fs);

  sk::dsp::BeamformerWeights weights;
  if (method == "das" || method == "mvdr") {
    if (doa.empty()) throw sk::Error(method + " requires --doa az[,el]");
    sk::dsp::SteeringField steer = sk::dsp::steering(geometry, parse_doa(doa), freqs);
    if (method == "das") {
      weights = sk::dsp::delay_and_sum(steer);
    } else {
      sk::dsp::SpatialCovariance scm = sk::dsp::compute_scm(spec, std::nullopt);
      weights = sk::dsp::mvdr(scm, steer).weights;
    }
  } else if (method == "gev") {
    if (noise_mask.empty()) throw sk::Error("gev requires --noise-mask <mask.npy>");
    Eigen::MatrixXd noise = sk::dsp::read_npy_matrix(noise_mask);
    Eigen::MatrixXd speech;
    if (!speech_mask.empty()) {
      speech = sk::dsp::read_npy_matrix(speech_mask);
    } else {
      speech = Eigen::MatrixXd::Ones(noise.rows(), noise.cols()) - noise;
    }
    sk::dsp::SpatialCovariance scm_ss = sk::dsp::compute_scm(spec, speech, sk::dsp::ScmKind::SS);
    sk::dsp::SpatialCovariance scm_nn = sk::dsp::compute_scm(spec, noise, sk::dsp::ScmKind::NN);
    weights = sk::dsp::gev(scm_ss, scm_nn);
  } else {
    throw sk::Error("unknown beamform method '" + method + "'");
  }

  sk::dsp::Spectrogram enhanced = sk::dsp::apply_beamformer(weights, spec);
  sk::dsp::MultichannelAudio out = sk::dsp::istft(enhanced);
  sk::dsp::write_wav(output, out, pcm16 ? sk::dsp::WavFormat::Pcm16 : sk::dsp::WavFormat::Float32);
  return 0;
}

// ── manifest ────────────────────────────────────────────────────────────────

int cmd_manifest_validate(const fs::path& path, const std::string& format_name,
                          const std::string& data_root, bool audio_check) {
  sk::data::ManifestFormat format = sk::data::ManifestFormat::Auto;
  if (format_name == "json") format = sk::data::ManifestFormat::Json;
  else if (format_name == "csv") format = sk::data::ManifestFormat::Csv;
  else if (format_name != "auto") throw sk::Error("unknown format '" + format_name + "'");

  sk::data::Manifest manifest = sk::data::load_manifest(path, format, data_root);
  sk::data::ValidationReport report = sk::data::validate_manifest(manifest, audio_check);
  for (const auto& finding : report.findings) {
    std::printf("%s id=%s key=%s %s\n", finding.kind.c_str(), finding.example_id.c_str(),
                finding.item_key.c_str(), finding.detail.c_str());
  }
  std::printf("validated %zu examples, %zu findings\n", manifest.examples.size(),
              report.findings.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"speech experiment toolkit: configs, data pipelines, training, scoring, array DSP"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed_flag;
  int threads = 0;
  app.add_option("--seed", seed_flag, "global PRNG seed (overrides config)");
  app.add_option("--threads", threads, "cap module parallelism");

  // resolve
  auto* resolve_cmd = app.add_subcommand("resolve", "parse and resolve a config file");
  std::string resolve_config;
  bool resolve_dump = false;
  resolve_cmd->add_option("config", resolve_config, "config file")->required();
  resolve_cmd->add_flag("--dump", resolve_dump, "print the resolved tree as YAML");
  resolve_cmd->allow_extras();

  // run
  auto* run_cmd = app.add_subcommand("run", "run a training experiment from a config");
  std::string run_config;
  run_cmd->add_option("config", run_config, "config file")->required();
  run_cmd->allow_extras();

  // score
  auto* score_cmd = app.add_subcommand("score", "evaluation metrics");
  score_cmd->require_subcommand(1);
  auto* wer_cmd = score_cmd->add_subcommand("wer", "word/token error rate");
  std::string wer_ref, wer_hyp, wer_report;
  wer_cmd->add_option("--ref", wer_ref, "reference file (id<TAB>tokens)")->required();
  wer_cmd->add_option("--hyp", wer_hyp, "hypothesis file (id<TAB>tokens)")->required();
  wer_cmd->add_option("--report", wer_report, "write the alignment report here");

  auto* der_cmd = score_cmd->add_subcommand("der", "diarization error rate");
  std::string der_ref, der_hyp;
  double der_collar = 0.0;
  bool der_ignore_overlap = false;
  der_cmd->add_option("--ref", der_ref, "reference RTTM")->required();
  der_cmd->add_option("--hyp", der_hyp, "hypothesis RTTM")->required();
  der_cmd->add_option("--collar", der_collar, "forgiveness collar in seconds");
  der_cmd->add_flag("--ignore-overlap", der_ignore_overlap, "exclude reference overlap regions");

  auto* eer_cmd = score_cmd->add_subcommand("eer", "equal error rate");
  std::string eer_target, eer_nontarget;
  eer_cmd->add_option("--target", eer_target, "target scores, one per line")->required();
  eer_cmd->add_option("--nontarget", eer_nontarget, "nontarget scores, one per line")->required();

  auto* sisnr_cmd = score_cmd->add_subcommand("sisnr", "scale-invariant SNR");
  std::string sisnr_clean, sisnr_est, sisnr_mix;
  sisnr_cmd->add_option("--clean", sisnr_clean, "clean reference wav")->required();
  sisnr_cmd->add_option("--est", sisnr_est, "estimate wav")->required();
  sisnr_cmd->add_option("--mix", sisnr_mix, "mixture wav (enables SI-SNRi)");

  // doa
  auto* doa_cmd = app.add_subcommand("doa", "direction-of-arrival estimation");
  std::string doa_method, doa_wav, doa_geometry, doa_pair;
  StftFlags doa_stft;
  double doa_max_tdoa = 0, doa_resolution = 1.0, doa_band_low = 300, doa_band_high = 4000;
  std::size_t doa_sources = 1;
  doa_cmd->add_option("method", doa_method, "gccphat | srpphat | music")->required();
  doa_cmd->add_option("wav", doa_wav, "multichannel wav")->required();
  doa_cmd->add_option("--geometry", doa_geometry, "geometry YAML")->required();
  doa_cmd->add_option("--pair", doa_pair, "mic pair p,q for gccphat (default 0,1)");
  doa_cmd->add_option("--max-tdoa", doa_max_tdoa, "gccphat search limit in samples");
  doa_cmd->add_option("--sources", doa_sources, "number of sources for music");
  doa_cmd->add_option("--resolution", doa_resolution, "azimuth grid step in degrees");
  doa_cmd->add_option("--band-low", doa_band_low, "music band lower edge in Hz");
  doa_cmd->add_option("--band-high", doa_band_high, "music band upper edge in Hz");
  doa_cmd->add_option("--frame-ms", doa_stft.frame_ms, "stft frame length in ms");
  doa_cmd->add_option("--hop-ms", doa_stft.hop_ms, "stft hop in ms");

  // beamform
  auto* beam_cmd = app.add_subcommand("beamform", "multichannel beamforming");
  std::string beam_method, beam_wav, beam_geometry, beam_doa, beam_noise_mask, beam_speech_mask,
      beam_output;
  StftFlags beam_stft;
  bool beam_pcm16 = false;
  beam_cmd->add_option("method", beam_method, "das | mvdr | gev")->required();
  beam_cmd->add_option("wav", beam_wav, "multichannel wav")->required();
  beam_cmd->add_option("--geometry", beam_geometry, "geometry YAML")->required();
  beam_cmd->add_option("--doa", beam_doa, "target az[,el] in degrees (das/mvdr)");
  beam_cmd->add_option("--noise-mask", beam_noise_mask, "noise mask .npy [frames x bins] (gev)");
  beam_cmd->add_option("--speech-mask", beam_speech_mask, "speech mask .npy (gev; default 1-noise)");
  beam_cmd->add_option("-o,--output", beam_output, "output wav")->required();
  beam_cmd->add_flag("--pcm16", beam_pcm16, "write 16-bit PCM instead of float32");
  beam_cmd->add_option("--frame-ms", beam_stft.frame_ms, "stft frame length in ms");
  beam_cmd->add_option("--hop-ms", beam_stft.hop_ms, "stft hop in ms");

  // manifest
  auto* manifest_cmd = app.add_subcommand("manifest", "data manifest utilities");
  manifest_cmd->require_subcommand(1);
  auto* validate_cmd = manifest_cmd->add_subcommand("validate", "load and check a manifest");
  std::string mf_path, mf_format = "auto", mf_data_root = ".";
  bool mf_no_audio_check = false;
  validate_cmd->add_option("file", mf_path, "manifest file")->required();
  validate_cmd->add_option("--format", mf_format, "json | csv | auto");
  validate_cmd->add_option("--data-root", mf_data_root, "substituted for {data_root}");
  validate_cmd->add_flag("--no-audio-check", mf_no_audio_check, "skip file-existence checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    std::fprintf(stderr, "%s\n", app.help().c_str());
    return 2;
  }

  try {
    if (resolve_cmd->parsed()) {
      return cmd_resolve(resolve_config, resolve_cmd->remaining(), resolve_dump);
    }
    if (run_cmd->parsed()) {
      return cmd_run(run_config, run_cmd->remaining(), seed_flag);
    }
    if (score_cmd->parsed()) {
      if (wer_cmd->parsed()) return cmd_score_wer(wer_ref, wer_hyp, wer_report);
      if (der_cmd->parsed()) return cmd_score_der(der_ref, der_hyp, der_collar, der_ignore_overlap);
      if (eer_cmd->parsed()) return cmd_score_eer(eer_target, eer_nontarget);
      if (sisnr_cmd->parsed()) return cmd_score_sisnr(sisnr_clean, sisnr_est, sisnr_mix);
    }
    if (doa_cmd->parsed()) {
      return cmd_doa(doa_method, doa_wav, doa_geometry, doa_stft, doa_pair, doa_max_tdoa,
                     doa_sources, doa_resolution, doa_band_low, doa_band_high);
    }
    if (beam_cmd->parsed()) {
      return cmd_beamform(beam_method, beam_wav, beam_geometry, beam_stft, beam_doa,
                          beam_noise_mask, beam_speech_mask, beam_output, beam_pcm16);
    }
    if (manifest_cmd->parsed()) {
      return cmd_manifest_validate(mf_path, mf_format, mf_data_root, !mf_no_audio_check);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
