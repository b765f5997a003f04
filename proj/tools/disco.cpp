#include <CLI11.hpp>
#include <iostream>

#include "disco/commands.hpp"
#include "disco/corpus.hpp"
#include "disco/error.hpp"

namespace {

std::optional<std::size_t> workers_flag(int w) {
  if (w <= 0) return std::nullopt;
  return static_cast<std::size_t>(w);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed mask-driven GEVD-MWF speech enhancement for ad-hoc arrays"};
  app.set_version_flag("--version", disco::kVersion);
  app.require_subcommand(1);

  disco::GenerateOptions gen;
  std::string gen_config = "random";
  int gen_workers = 0;
  auto* g = app.add_subcommand("generate", "Simulate a scene corpus");
  g->add_option("--config", gen_config, "random, living or meeting")->check(CLI::IsMember({"random", "living", "meeting"}));
  g->add_option("--n", gen.n, "Number of scenes");
  g->add_option("--seed", gen.seed, "Corpus seed");
  g->add_option("--out", gen.out_dir, "Corpus directory")->required();
  g->add_flag("--synthetic-fixtures", gen.synthetic_fixtures, "Use bundled synthetic speech and speech-shaped noise");
  g->add_option("--fixture-seconds", gen.fixture_seconds, "Length of each synthetic fixture");
  g->add_option("--speech-dir", gen.speech_dir, "Directory of 16 kHz speech WAVs");
  g->add_option("--noise-dir", gen.noise_dir, "Directory of 16 kHz noise WAVs");
  g->add_flag("--snr-report", gen.snr_report, "Print a histogram of per-node input SIRs");
  g->add_option("--workers", gen_workers, "Worker threads (DISCO_WORKERS overrides)");

  disco::EnhanceOptions enh;
  std::string mask_provider = "oracle", mask_policy = "local", compressed = "target", noise_estimate = "wiener",
              filter = "gevd";
  int enh_workers = 0;
  auto* e = app.add_subcommand("enhance", "Run the two-step pipeline on every scene of a corpus");
  e->add_option("--corpus", enh.corpus, "Corpus directory")->required();
  e->add_option("--out", enh.out_dir, "Run directory")->required();
  e->add_option("--mask-provider", mask_provider, "oracle, oracle-power or dir:<path>");
  e->add_option("--mask-policy", mask_policy, "local or distant")->check(CLI::IsMember({"local", "distant"}));
  e->add_option("--compressed", compressed, "target, noise or both")->check(CLI::IsMember({"target", "noise", "both"}));
  e->add_option("--mu", enh.pipeline.mu, "Speech distortion trade-off");
  e->add_option("--noise-estimate", noise_estimate, "wiener or residual")->check(CLI::IsMember({"wiener", "residual"}));
  e->add_option("--filter", filter, "gevd or baseline")->check(CLI::IsMember({"gevd", "baseline"}));
  e->add_flag("--passthrough", enh.passthrough, "Write the reference-mic mixture instead of filtering");
  e->add_option("--workers", enh_workers, "Worker threads (DISCO_WORKERS overrides)");

  disco::EvaluateOptions ev;
  int ev_workers = 0;
  auto* v = app.add_subcommand("evaluate", "Score a run against its corpus");
  v->add_option("--corpus", ev.corpus, "Corpus directory")->required();
  v->add_option("--run", ev.run_dir, "Run directory")->required();
  v->add_option("--out", ev.out_dir, "Report directory (defaults to the run directory)");
  v->add_option("--label", ev.label, "Row label prefix, e.g. SN or MN");
  v->add_option("--workers", ev_workers, "Worker threads (DISCO_WORKERS overrides)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : disco::kExitConfig;
  }

  try {
    if (g->parsed()) {
      gen.config = disco::parse_config_type(gen_config);
      gen.workers = workers_flag(gen_workers);
      return disco::cmd_generate(gen);
    }
    if (e->parsed()) {
      enh.pipeline.step1_masks = disco::MaskProvider::parse(mask_provider);
      enh.pipeline.step2_masks = enh.pipeline.step1_masks;
      enh.pipeline.mask_policy = disco::parse_mask_policy(mask_policy);
      enh.pipeline.compressed = disco::parse_compressed_type(compressed);
      enh.pipeline.noise_estimate = disco::parse_noise_estimate(noise_estimate);
      enh.pipeline.rule = filter == "gevd" ? disco::FilterRule::GevdSdw : disco::FilterRule::BaselineSdw;
      enh.workers = workers_flag(enh_workers);
      return disco::cmd_enhance(enh);
    }
    ev.workers = workers_flag(ev_workers);
    return disco::cmd_evaluate(ev);
  } catch (const std::exception& err) {
    std::cerr << "disco: " << err.what() << '\n';
    return disco::kExitConfig;
  }
}
