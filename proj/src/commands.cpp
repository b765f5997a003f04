#include "disco/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <json.hpp>
#include <mutex>
#include <thread>

#include "disco/corpus.hpp"
#include "disco/error.hpp"
#include "disco/evaluation.hpp"
#include "disco/fixtures.hpp"
#include "disco/mask_file.hpp"
#include "disco/random.hpp"
#include "disco/wav.hpp"
#include "file_util.hpp"

namespace disco {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::mutex log_mutex;

void log_line(const std::string& text) {
  std::lock_guard lock(log_mutex);
  std::cerr << text << '\n';
}

std::string scene_name(ConfigType type, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%04zu", i);
  return to_string(type) + buf;
}

std::vector<fs::path> list_wavs(const fs::path& dir, const char* what) {
  if (dir.empty()) throw Error(ErrorKind::Config, std::string("no ") + what + " directory given");
  if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, std::string(what) + " directory " + dir.string() + " does not exist");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".wav") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  if (out.empty()) throw Error(ErrorKind::Empty, std::string(what) + " directory " + dir.string() + " holds no .wav files");
  return out;
}

json pipeline_json(const PipelineConfig& c) {
  return {{"mask_policy", to_string(c.mask_policy)},
          {"compressed", to_string(c.compressed)},
          {"mu", c.mu},
          {"step1_masks", c.step1_masks.describe()},
          {"step2_masks", c.step2_masks.describe()},
          {"noise_estimate", to_string(c.noise_estimate)},
          {"filter", c.rule == FilterRule::GevdSdw ? "gevd-sdw" : "baseline-sdw"}};
}

int exit_code_for(const std::vector<std::string>& errors) {
  return std::any_of(errors.begin(), errors.end(), [](const std::string& e) { return !e.empty(); }) ? kExitPartial
                                                                                                      : kExitOk;
}

}  // namespace

std::size_t resolve_workers(std::optional<std::size_t> requested) {
  if (const char* env = std::getenv("DISCO_WORKERS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1)
      throw Error(ErrorKind::Config, std::string("DISCO_WORKERS must be a positive integer, got '") + env + "'");
    return static_cast<std::size_t>(v);
  }
  if (requested) return std::max<std::size_t>(1, *requested);
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::string> parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (const std::exception& e) {
        errors[i] = e.what();
        if (errors[i].empty()) errors[i] = "unknown failure";
      }
    }
  };
  const std::size_t count = std::min(std::max<std::size_t>(1, workers), std::max<std::size_t>(1, n));
  if (count == 1) {
    work();
    return errors;
  }
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < count; ++t) threads.emplace_back(work);
  for (auto& t : threads) t.join();
  return errors;
}

std::string output_name(const std::string& scene_id, std::size_t node, int step) {
  return scene_id + "_node" + std::to_string(node + 1) + "_step" + std::to_string(step) + ".wav";
}

std::string snr_histogram(const std::vector<double>& sirs) {
  constexpr double lo = -20.0, hi = 20.0, width = 2.0;
  const auto n_bins = static_cast<std::size_t>((hi - lo) / width);
  std::vector<std::size_t> counts(n_bins + 2, 0);  // underflow, bins..., overflow
  std::size_t inside = 0;
  for (double s : sirs) {
    if (s >= -10.0 && s <= 10.0) ++inside;
    if (s < lo) ++counts.front();
    else if (s >= hi) ++counts.back();
    else ++counts[1 + static_cast<std::size_t>((s - lo) / width)];
  }
  std::string out = "input SIR per node (dB), " + std::to_string(sirs.size()) + " nodes\n";
  char buf[128];
  auto bar = [&](const char* label, std::size_t c) {
    std::snprintf(buf, sizeof buf, "%-12s %5zu ", label, c);
    out += buf;
    out += std::string(std::min<std::size_t>(c, 60), '#');
    out += '\n';
  };
  bar("< -20", counts.front());
  for (std::size_t b = 0; b < n_bins; ++b) {
    char label[32];
    std::snprintf(label, sizeof label, "[%+.0f,%+.0f)", lo + width * static_cast<double>(b),
                  lo + width * static_cast<double>(b + 1));
    bar(label, counts[b + 1]);
  }
  bar(">= +20", counts.back());
  const double frac = sirs.empty() ? 0.0 : static_cast<double>(inside) / static_cast<double>(sirs.size());
  std::snprintf(buf, sizeof buf, "within [-10,+10] dB: %zu of %zu (%.1f%%)\n", inside, sirs.size(), 100.0 * frac);
  out += buf;
  return out;
}

int cmd_generate(const GenerateOptions& o) {
  if (o.n == 0) throw Error(ErrorKind::Config, "--n must be at least 1");
  if (o.out_dir.empty()) throw Error(ErrorKind::Config, "no output directory given");
  if (o.synthetic_fixtures && !(o.fixture_seconds >= 1.0))
    throw Error(ErrorKind::Config, "fixture length must be at least 1 s");
  const std::size_t workers = resolve_workers(o.workers);

  CorpusInfo info;
  info.config = o.config;
  info.n = o.n;
  info.seed = o.seed;
  info.synthetic_fixtures = o.synthetic_fixtures;
  info.fixture_seconds = o.synthetic_fixtures ? o.fixture_seconds : 0.0;

  std::vector<TimeSignal> speech, noise;
  fs::create_directories(o.out_dir);
  if (o.synthetic_fixtures) {
    auto set = synthetic_fixtures(mix_seed(o.seed, 0xF1), 8, 4, o.fixture_seconds);
    fs::create_directories(o.out_dir / "fixtures");
    char name[32];
    for (std::size_t i = 0; i < set.speech.size(); ++i) {
      std::snprintf(name, sizeof name, "speech_%02zu.wav", i);
      write_wav(set.speech[i], o.out_dir / "fixtures" / name, WavCodec::Float32);
      info.speech_files.push_back(std::string("fixtures/") + name);
      speech.push_back(read_wav(o.out_dir / "fixtures" / name));
    }
    for (std::size_t i = 0; i < set.noise.size(); ++i) {
      std::snprintf(name, sizeof name, "noise_%02zu.wav", i);
      write_wav(set.noise[i], o.out_dir / "fixtures" / name, WavCodec::Float32);
      info.noise_files.push_back(std::string("fixtures/") + name);
      noise.push_back(read_wav(o.out_dir / "fixtures" / name));
    }
  } else {
    for (const auto& p : list_wavs(o.speech_dir, "speech")) {
      speech.push_back(read_wav(p));
      info.speech_files.push_back(p.string());
    }
    for (const auto& p : list_wavs(o.noise_dir, "noise")) {
      noise.push_back(read_wav(p));
      info.noise_files.push_back(p.string());
    }
  }

  const CorpusLayout layout(o.out_dir);
  std::vector<std::vector<double>> sirs(o.n);
  const auto errors = parallel_for(o.n, workers, [&](std::size_t i) {
    const std::string id = scene_name(o.config, i);
    const std::uint64_t scene_seed = mix_seed(o.seed, i);
    SceneDescriptor d = sample_scene(o.config, scene_seed, id);
    Rng pick(mix_seed(scene_seed, 2));
    const auto si = static_cast<std::size_t>(pick.index(speech.size()));
    const auto ni = static_cast<std::size_t>(pick.index(noise.size()));
    d.speech_path = info.speech_files[si];
    d.noise_path = info.noise_files[ni];
    RenderedScene r = render_scene(d, speech[si], noise[ni]);
    quantize_float32(r);
    save_rendered(r, layout);
    for (const auto& node : r.nodes) sirs[i].push_back(node.input_sir_db);
  });

  std::vector<double> all_sirs;
  for (std::size_t i = 0; i < o.n; ++i) {
    const std::string id = scene_name(o.config, i);
    if (errors[i].empty()) {
      info.scenes.push_back(id);
      all_sirs.insert(all_sirs.end(), sirs[i].begin(), sirs[i].end());
    } else {
      log_line("generate: scene " + id + " failed: " + errors[i]);
    }
  }
  detail::write_file_atomic(layout.manifest(), corpus_info_json(info));
  if (o.snr_report) {
    const std::string report = snr_histogram(all_sirs);
    detail::write_file_atomic(o.out_dir / "snr_report.txt", report);
    std::cout << report;
  }
  log_line("generate: " + std::to_string(info.scenes.size()) + " of " + std::to_string(o.n) + " scenes written to " +
           o.out_dir.string());
  return exit_code_for(errors);
}

int cmd_enhance(const EnhanceOptions& o) {
  if (o.out_dir.empty()) throw Error(ErrorKind::Config, "no output directory given");
  if (!(o.pipeline.mu >= 0.0) || !std::isfinite(o.pipeline.mu)) throw Error(ErrorKind::Config, "--mu must be a non-negative number");
  const std::size_t workers = resolve_workers(o.workers);
  const CorpusInfo info = read_corpus_info(o.corpus);
  const CorpusLayout layout(o.corpus);

  // external masks must all be present before any audio is touched
  for (const auto* provider : {&o.pipeline.step1_masks, &o.pipeline.step2_masks}) {
    if (o.passthrough || provider->mode != MaskProvider::Mode::ExternalFile) continue;
    if (!fs::is_directory(provider->run_dir))
      throw Error(ErrorKind::Resolution, "mask directory " + provider->run_dir.string() + " does not exist");
    for (const auto& id : info.scenes)
      for (std::size_t k = 0; k < kNodes; ++k)
        for (int step = 1; step <= 2; ++step) {
          const auto p = mask_path(provider->run_dir, id, k, step);
          if (!fs::exists(p))
            throw Error(ErrorKind::Resolution, "no mask for scene " + id + ", node " + std::to_string(k + 1) +
                                                   ", step " + std::to_string(step) + " (expected " + p.string() + ")");
        }
  }

  fs::create_directories(o.out_dir / "outputs");
  fs::create_directories(o.out_dir / "manifests");
  const auto errors = parallel_for(info.scenes.size(), workers, [&](std::size_t i) {
    const std::string& id = info.scenes[i];
    const RenderedScene scene = load_rendered(layout, id);
    PipelineResult result;
    if (o.passthrough) {
      result.scene_id = id;
      for (const auto& node : scene.nodes) {
        NodeOutput out;
        out.step1 = node.mixture.at(0);
        out.step2 = node.mixture.at(0);
        out.step1_channels = out.step2_channels = 1;
        out.input_sir_db = node.input_sir_db;
        result.nodes.push_back(std::move(out));
      }
    } else {
      result = run_pipeline(scene, o.pipeline);
    }
    for (std::size_t k = 0; k < result.nodes.size(); ++k) {
      write_wav(result.nodes[k].step1, o.out_dir / "outputs" / output_name(id, k, 1), WavCodec::Float32);
      write_wav(result.nodes[k].step2, o.out_dir / "outputs" / output_name(id, k, 2), WavCodec::Float32);
    }
    detail::write_file_atomic(o.out_dir / "manifests" / (id + ".json"), manifest_json(result, o.pipeline));
  });

  json run;
  run["format"] = "disco-run/1";
  run["version"] = kVersion;
  run["command"] = "enhance";
  run["corpus"] = {{"path", o.corpus.string()},
                   {"config", to_string(info.config)},
                   {"n", info.n},
                   {"seed", info.seed},
                   {"scenes", info.scenes}};
  run["config"] = pipeline_json(o.pipeline);
  run["passthrough"] = o.passthrough;
  json ok = json::array(), failed = json::array();
  for (std::size_t i = 0; i < info.scenes.size(); ++i) {
    if (errors[i].empty()) {
      ok.push_back(info.scenes[i]);
    } else {
      failed.push_back({{"scene", info.scenes[i]}, {"error", errors[i]}});
      log_line("enhance: scene " + info.scenes[i] + " failed: " + errors[i]);
    }
  }
  run["scenes_ok"] = ok;
  run["scenes_failed"] = failed;
  detail::write_file_atomic(o.out_dir / "run.json", run.dump(2) + "\n");
  log_line("enhance: " + std::to_string(ok.size()) + " of " + std::to_string(info.scenes.size()) + " scenes done");
  return exit_code_for(errors);
}

int cmd_evaluate(const EvaluateOptions& o) {
  const std::size_t workers = resolve_workers(o.workers);
  const CorpusInfo info = read_corpus_info(o.corpus);
  const CorpusLayout layout(o.corpus);
  const auto run_path = o.run_dir / "run.json";
  if (!fs::exists(run_path)) throw Error(ErrorKind::Io, "no run at " + o.run_dir.string() + " (run.json missing)");
  json run;
  try {
    run = json::parse(detail::read_file(run_path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, run_path.string() + ": " + e.what());
  }
  if (run.value("format", "") != "disco-run/1") throw Error(ErrorKind::Format, run_path.string() + " is not a run manifest");

  const auto& rc = run.at("corpus");
  if (rc.at("seed").get<std::uint64_t>() != info.seed || rc.at("config").get<std::string>() != to_string(info.config) ||
      rc.at("scenes").get<std::vector<std::string>>() != info.scenes)
    throw Error(ErrorKind::Pairing, "run " + o.run_dir.string() + " was produced from a different corpus than " +
                                        o.corpus.string());
  const auto scenes = run.at("scenes_ok").get<std::vector<std::string>>();
  for (const auto& id : scenes) {
    if (std::find(info.scenes.begin(), info.scenes.end(), id) == info.scenes.end())
      throw Error(ErrorKind::Pairing, "scene " + id + " of the run is not in the corpus");
    for (std::size_t k = 0; k < kNodes; ++k)
      for (int step = 1; step <= 2; ++step)
        if (!fs::exists(o.run_dir / "outputs" / output_name(id, k, step)))
          throw Error(ErrorKind::Pairing, "run is missing output " + output_name(id, k, step));
  }

  std::vector<std::vector<MetricRow>> per_scene(scenes.size());
  const auto errors = parallel_for(scenes.size(), workers, [&](std::size_t i) {
    const std::string& id = scenes[i];
    const RenderedScene scene = load_rendered(layout, id);
    std::vector<NodeOutput> outputs(scene.nodes.size());
    for (std::size_t k = 0; k < outputs.size(); ++k) {
      outputs[k].step1 = read_wav(o.run_dir / "outputs" / output_name(id, k, 1));
      outputs[k].step2 = read_wav(o.run_dir / "outputs" / output_name(id, k, 2));
      if (outputs[k].step1.size() != scene.length() || outputs[k].step2.size() != scene.length())
        throw Error(ErrorKind::Pairing, "outputs of " + id + " node " + std::to_string(k + 1) +
                                            " do not match the scene length");
    }
    per_scene[i] = scene_metrics(scene, outputs);
  });

  std::vector<MetricRow> rows;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    if (!errors[i].empty()) {
      log_line("evaluate: scene " + scenes[i] + " failed: " + errors[i]);
      continue;
    }
    rows.insert(rows.end(), per_scene[i].begin(), per_scene[i].end());
  }
  const fs::path out_dir = o.out_dir.empty() ? o.run_dir : o.out_dir;
  fs::create_directories(out_dir);
  detail::write_file_atomic(out_dir / "metrics.csv", rows_to_csv(rows));
  detail::write_file_atomic(out_dir / "summary.json", summary_json(rows, o.label));
  const std::string table = summary_table(rows, o.label);
  detail::write_file_atomic(out_dir / "summary.txt", table);
  std::cout << table;
  return exit_code_for(errors);
}

}  // namespace disco
