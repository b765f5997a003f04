// Prints one PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>

#include "disco/commands.hpp"
#include "disco/danse.hpp"
#include "disco/evaluation.hpp"
#include "disco/fixtures.hpp"
#include "disco/gevd.hpp"
#include "disco/random.hpp"
#include "disco/stft.hpp"

using namespace disco;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kCorpusSeed = 2024;
constexpr std::size_t kScenes = 50;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Eigen::MatrixXcd random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  Eigen::MatrixXcd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = {rng.normal(), rng.normal()};
  return m;
}

Eigen::MatrixXcd random_hpd(Rng& rng, Eigen::Index c) {
  const Eigen::MatrixXcd a = random_matrix(rng, c, c + 2);
  Eigen::MatrixXcd r = a * a.adjoint() / static_cast<double>(c + 2);
  r.diagonal().array() += 0.05;
  return 0.5 * (r + r.adjoint());
}

double rel(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) { return (a - b).norm() / b.norm(); }

void gevd_criterion() {
  const auto t0 = Clock::now();
  Rng rng(1);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Index c = 2 + static_cast<Eigen::Index>(i % 6);
    const auto ryy = random_hpd(rng, c), rnn = random_hpd(rng, c);
    const auto dec = gevd(ryy, rnn);
    const auto sy = dec.sigma_y.cast<std::complex<double>>().asDiagonal();
    const auto sn = dec.sigma_n.cast<std::complex<double>>().asDiagonal();
    worst = std::max({worst, rel(dec.q * sy * dec.q.adjoint(), ryy), rel(dec.q * sn * dec.q.adjoint(), rnn)});
  }
  Eigen::MatrixXcd ryy(2, 2), rnn(2, 2);
  ryy << 3, 1, 1, 2;
  rnn << 1, 0, 0, 2;
  const auto dec = gevd(ryy, rnn);
  const double e2 = std::max(std::abs(dec.sigma_y(0) / dec.sigma_n(0) - (8.0 + std::sqrt(24.0)) / 4.0),
                             std::abs(dec.sigma_y(1) / dec.sigma_n(1) - (8.0 - std::sqrt(24.0)) / 4.0));
  const double t = seconds_since(t0);
  report(worst <= 1e-8 && e2 <= 1e-12 && t < 10.0, "gevd-correctness",
         fmt("worst reconstruction %.2e (<= 1e-8), 2x2 pencil error %.2e (<= 1e-12), %.2f s (< 10 s)", worst, e2, t));
}

void wiener_criterion() {
  const auto t0 = Clock::now();
  Rng rng(2);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double ss = std::exp(rng.uniform(-8.0, 4.0)), sn = std::exp(rng.uniform(-8.0, 4.0)), mu = rng.uniform(0.0, 10.0);
    const double w = sdw_mwf_weights(Eigen::MatrixXcd::Constant(1, 1, ss), Eigen::MatrixXcd::Constant(1, 1, sn), mu)(0).real();
    worst = std::max(worst, std::abs(w - ss / (ss + mu * sn)));
  }
  const double t = seconds_since(t0);
  report(worst <= 1e-12 && t < 1.0, "scalar-wiener", fmt("worst error %.2e (<= 1e-12), %.3f s (< 1 s)", worst, t));
}

void stft_criterion() {
  const auto t0 = Clock::now();
  Rng rng(3);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t len = 2048 + static_cast<std::size_t>(rng.index(30000));
    TimeSignal x{std::vector<double>(len), kSampleRate};
    const double scale = std::exp(rng.uniform(-4.0, 1.0));
    for (double& v : x.samples) v = scale * rng.normal();
    const auto y = synthesize(analyze(x), len);
    for (std::size_t n = kFrameSize; n + kFrameSize < len; ++n) worst = std::max(worst, std::abs(x.samples[n] - y.samples[n]));
  }
  const double t = seconds_since(t0);
  report(worst <= 1e-10 && t < 5.0, "stft-round-trip", fmt("worst interior error %.2e (<= 1e-10), %.2f s (< 5 s)", worst, t));
}

void bss_orthogonality_criterion() {
  Rng rng(4);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 3000;
    std::vector<double> s(n), v(n), e(n);
    for (auto& x : s) x = rng.normal();
    for (auto& x : v) x = rng.normal();
    const double gs = rng.uniform(0.1, 2.0), gn = rng.uniform(0.1, 2.0), ga = rng.uniform(0.0, 1.0);
    for (std::size_t k = 0; k < n; ++k) e[k] = gs * s[k] + gn * v[k] + ga * rng.normal() + (k > 7 ? 0.3 * s[k - 7] : 0.0);
    const auto d = ProjectionBasis({s, v}, 512).decompose(e);
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
      return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
    };
    const double total = energy(d.estimate);
    const double cross = std::abs(dot(d.target, d.interference)) + std::abs(dot(d.target, d.artifacts)) +
                         std::abs(dot(d.interference, d.artifacts));
    const double gap = std::abs(total - energy(d.target) - energy(d.interference) - energy(d.artifacts));
    worst = std::max(worst, std::max(cross, gap) / total);
  }
  report(worst <= 1e-6, "bss-orthogonality", fmt("worst relative cross-term %.2e (<= 1e-6) over 100 cases", worst));
}

struct SceneResult {
  std::vector<MetricRow> local_rows;
  std::vector<MetricRow> distant_rows;
  std::size_t local_mask_bytes = 0;
  std::size_t distant_mask_bytes = 0;
  std::size_t expected_mask_bytes = 0;
  double worst_identity = 0.0;
};

SceneResult run_scene(const RenderedScene& scene) {
  SceneResult out;
  const SceneEvaluator ev(scene);

  PipelineConfig local;
  const auto a = run_pipeline(scene, local);
  out.local_rows = scene_metrics(ev, a.nodes);
  out.local_mask_bytes = a.exchange.mask_bytes;

  PipelineConfig distant;
  distant.mask_policy = MaskPolicy::Distant;
  const auto b = run_pipeline(scene, distant);
  out.distant_rows = scene_metrics(ev, b.nodes);
  out.distant_mask_bytes = b.exchange.mask_bytes;

  const std::size_t frames = (scene.length() + kHop - 1) / kHop;
  out.expected_mask_bytes = kNodes * (kNodes - 1) * 4 * (kFrameSize / 2 + 1) * frames;

  // identity through the same analysis/synthesis chain the pipeline uses
  for (std::size_t k = 0; k < scene.nodes.size(); ++k) {
    const auto& y = scene.nodes[k].mixture[0];
    const auto row = ev.evaluate(k, 1, synthesize(analyze(y), y.size()));
    out.worst_identity = std::max(out.worst_identity, std::abs(row.delta_sir_cnv));
  }
  return out;
}

double mean_of(const std::vector<MetricRow>& rows, double MetricRow::*field) {
  double s = 0.0;
  for (const auto& r : rows) s += r.*field;
  return rows.empty() ? 0.0 : s / static_cast<double>(rows.size());
}

void corpus_criteria() {
  const auto t0 = Clock::now();
  const auto fixtures = synthetic_fixtures(mix_seed(kCorpusSeed, 0xF1), 8, 4, 3.0);
  std::vector<MetricRow> local, distant;
  std::size_t bad_local_bytes = 0, bad_distant_bytes = 0;
  double worst_identity = 0.0;
  std::vector<double> scene_drop;  // step-2 minus step-1 best-output delta SIR per scene
  double pipeline_seconds = 0.0;
  for (std::size_t i = 0; i < kScenes; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "random_%04zu", i);
    const std::uint64_t seed = mix_seed(kCorpusSeed, i);
    const auto d = sample_scene(ConfigType::Random, seed, id);
    Rng pick(mix_seed(seed, 2));
    const auto& speech = fixtures.speech[pick.index(fixtures.speech.size())];
    const auto& noise = fixtures.noise[pick.index(fixtures.noise.size())];
    const auto scene = render_scene(d, speech, noise);

    const auto ts = Clock::now();
    const auto r = run_scene(scene);
    pipeline_seconds += seconds_since(ts);
    local.insert(local.end(), r.local_rows.begin(), r.local_rows.end());
    distant.insert(distant.end(), r.distant_rows.begin(), r.distant_rows.end());
    bad_local_bytes += r.local_mask_bytes != 0;
    bad_distant_bytes += r.distant_mask_bytes != r.expected_mask_bytes;
    worst_identity = std::max(worst_identity, r.worst_identity);
    scene_drop.push_back(select_rows(r.local_rows, Selector::BestOutput, 2)[0].delta_sir_cnv -
                         select_rows(r.local_rows, Selector::BestOutput, 1)[0].delta_sir_cnv);
  }
  const double elapsed = seconds_since(t0);
  std::fprintf(stderr, "corpus: %zu scenes in %.1f s (pipelines and scoring %.1f s)\n", kScenes, elapsed, pipeline_seconds);

  const auto s1 = aggregate(local, Selector::BestOutput, 1);
  const auto s2 = aggregate(local, Selector::BestOutput, 2);
  const double gain = s2.delta_sir_cnv.mean - s1.delta_sir_cnv.mean;
  report(gain >= 2.0 && elapsed < 600.0, "two-step-gain",
         fmt("best-output dSIR_cnv %.2f -> %.2f dB, gain %.2f dB (>= 2 dB), corpus run %.0f s", s1.delta_sir_cnv.mean,
             s2.delta_sir_cnv.mean, gain, elapsed));

  report(s2.delta_sir_cnv.mean >= 18.0, "oracle-absolute-level",
         fmt("step-2 best-output dSIR_cnv %.2f +- %.2f dB (>= 18 dB)", s2.delta_sir_cnv.mean, s2.delta_sir_cnv.half_width));

  const auto d2 = aggregate(distant, Selector::BestOutput, 2);
  const double sar_gap = s2.sar_cnv.mean - d2.sar_cnv.mean;
  const double dsir_gap = s2.delta_sir_cnv.mean - d2.delta_sir_cnv.mean;
  report(sar_gap >= -0.1 && std::abs(dsir_gap) <= 1.0, "local-vs-distant",
         fmt("SAR_cnv local %.2f vs distant %.2f dB (diff %.2f >= -0.1); dSIR diff %.2f dB (within +-1)", s2.sar_cnv.mean,
             d2.sar_cnv.mean, sar_gap, dsir_gap));

  auto improvement = [&](Selector sel) {
    const auto r1 = select_rows(local, sel, 1);
    const auto r2 = select_rows(local, sel, 2);
    return mean_of(r2, &MetricRow::delta_sir_cnv) - mean_of(r1, &MetricRow::delta_sir_cnv);
  };
  const double wi = improvement(Selector::WorstInput), bi = improvement(Selector::BestInput);
  report(wi - bi >= 0.5, "worst-node-cooperation",
         fmt("step-1 -> step-2 dSIR_cnv gain: worst-input %.2f dB, best-input %.2f dB (margin %.2f >= 0.5)", wi, bi, wi - bi));

  report(bad_local_bytes == 0 && bad_distant_bytes == 0, "bandwidth-accounting",
         fmt("local scenes with mask bytes %.0f, distant scenes off K(K-1)*4*bins*frames %.0f", static_cast<double>(bad_local_bytes),
             static_cast<double>(bad_distant_bytes)));

  report(worst_identity <= 0.1, "bss-identity", fmt("worst identity |dSIR_cnv| %.4f dB (<= 0.1) over all nodes", worst_identity));

  const double worst_drop = *std::min_element(scene_drop.begin(), scene_drop.end());
  std::printf("INFO per-scene step-2 minus step-1 best-output dSIR: min %.2f dB (floor -0.5)\n", worst_drop);
  std::printf("INFO step-2 best-output SAR_cnv %.2f +- %.2f dB, SAR_dry %.2f +- %.2f dB\n", s2.sar_cnv.mean,
              s2.sar_cnv.half_width, s2.sar_dry.mean, s2.sar_dry.half_width);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void determinism_criterion() {
  const fs::path root = fs::temp_directory_path() / ("disco_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::string csv[2];
  for (int pass = 0; pass < 2; ++pass) {
    const fs::path dir = root / std::to_string(pass);
    GenerateOptions g;
    g.n = 4;
    g.seed = 7;
    g.synthetic_fixtures = true;
    g.fixture_seconds = 2.0;
    g.out_dir = dir / "corpus";
    g.workers = 1 + static_cast<std::size_t>(pass);
    EnhanceOptions e;
    e.corpus = g.out_dir;
    e.out_dir = dir / "run";
    e.workers = g.workers;
    EvaluateOptions v;
    v.corpus = g.out_dir;
    v.run_dir = e.out_dir;
    v.workers = g.workers;
    // the commands print their own tables; keep stdout for the verdict lines
    std::ostringstream sink;
    auto* saved = std::cout.rdbuf(sink.rdbuf());
    const int rc = cmd_generate(g) | cmd_enhance(e);
    const int rv = cmd_evaluate(v);
    std::cout.rdbuf(saved);
    if (rc != 0 || rv != 0) csv[pass] = "failed pass " + std::to_string(pass);
    else csv[pass] = slurp(e.out_dir / "metrics.csv");
  }
  fs::remove_all(root);
  const bool ok = !csv[0].empty() && csv[0] == csv[1] && csv[0].rfind("failed", 0) != 0;
  report(ok, "determinism", ok ? "generate+enhance+evaluate twice gave byte-identical metrics.csv (" +
                                      std::to_string(csv[0].size()) + " bytes)"
                                : "metrics.csv differs between runs");
}

}  // namespace

int main() {
  gevd_criterion();
  wiener_criterion();
  stft_criterion();
  corpus_criteria();
  bss_orthogonality_criterion();
  determinism_criterion();
  std::printf("%s: %d criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
