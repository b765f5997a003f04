#include <doctest.h>

#include <Eigen/QR>
#include <json.hpp>

#include "disco/error.hpp"
#include "disco/evaluation.hpp"
#include "disco/fixtures.hpp"
#include "support.hpp"

using namespace disco;

namespace {

double sum_sq(const std::vector<double>& x) { return energy(x); }

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Columns are the references delayed by 0 .. L-1 samples.
Eigen::MatrixXd shifted(const std::vector<std::vector<double>>& refs, std::size_t L) {
  const std::size_t n_out = refs[0].size() + L - 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_out), static_cast<Eigen::Index>(refs.size() * L));
  for (std::size_t i = 0; i < refs.size(); ++i)
    for (std::size_t s = 0; s < L; ++s)
      for (std::size_t n = 0; n < refs[i].size(); ++n)
        a(static_cast<Eigen::Index>(n + s), static_cast<Eigen::Index>(i * L + s)) = refs[i][n];
  return a;
}

Eigen::VectorXd project(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
  return a * a.colPivHouseholderQr().solve(y);
}

Eigen::VectorXd as_vector(const std::vector<double>& x) { return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())); }

std::vector<double> mix(const std::vector<double>& s, const std::vector<double>& n, double gs, double gn) {
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = gs * s[i] + gn * n[i];
  return out;
}

RenderedScene small_scene(std::uint64_t seed) {
  const auto speech = synthetic_speech(seed, 1.0);
  const auto noise = speech_shaped_noise(seed + 1, 1.0, {speech});
  return render_scene(sample_scene(ConfigType::Random, seed, "e" + std::to_string(seed)), speech, noise,
                      RenderOptions{2, std::nullopt});
}

MetricRow row(const std::string& scene, std::size_t node, int step, double in, double out, double sar = 5.0) {
  return {scene, node, step, in, out, out - in, sar, sar - 2.0};
}

}  // namespace

TEST_CASE("perfect estimates hit the cap") {
  Rng rng(1);
  const auto s = test::white(rng, 800), n = test::white(rng, 800);
  for (double g : {1.0, 0.5, 3.0}) {
    const auto m = bss_eval(mix(s, n, g, 0.0), s, n, 16);
    CHECK(m.sir_db == kMetricCapDb);
    CHECK(m.sar_db == kMetricCapDb);
  }
}

TEST_CASE("equal parts give zero SIR") {
  Rng rng(2);
  const auto s = test::white(rng, 4000), n0 = test::white(rng, 4000);
  // match the norms exactly
  const auto n = mix(n0, n0, std::sqrt(sum_sq(s) / sum_sq(n0)), 0.0);
  const auto m = bss_eval(mix(s, n, 1.0, 1.0), s, n, 1);
  CHECK(std::abs(m.sir_db) <= 0.2);

  // direct projection oracle on the same vectors
  const Eigen::MatrixXd a = shifted({s, n}, 1);
  const Eigen::VectorXd y = as_vector(mix(s, n, 1.0, 1.0));
  const Eigen::VectorXd target = project(a.leftCols(1), y);
  const Eigen::VectorXd interf = project(a, y) - target;
  CHECK(m.sir_db == doctest::Approx(10.0 * std::log10(target.squaredNorm() / interf.squaredNorm())).epsilon(1e-9));
}

TEST_CASE("projection matches dense least squares") {
  Rng rng(3);
  for (std::size_t L : {std::size_t{1}, std::size_t{3}, std::size_t{8}}) {
    const auto s = test::white(rng, 300), n = test::white(rng, 300);
    auto est = mix(s, n, 0.8, 0.4);
    for (std::size_t i = 2; i < est.size(); ++i) est[i] += 0.3 * s[i - 2] + 0.1 * rng.normal();
    const ProjectionBasis basis({s, n}, L);
    const auto d = basis.decompose(est);
    REQUIRE(d.target.size() == 300 + L - 1);

    const Eigen::MatrixXd a = shifted({s, n}, L);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(a.rows());
    y.head(300) = as_vector(est);
    const Eigen::VectorXd target = project(a.leftCols(static_cast<Eigen::Index>(L)), y);
    const Eigen::VectorXd joint = project(a, y);
    CHECK((as_vector(d.target) - target).norm() <= 1e-9 * y.norm());
    CHECK((as_vector(d.interference) - (joint - target)).norm() <= 1e-9 * y.norm());
    CHECK((as_vector(d.artifacts) - (y - joint)).norm() <= 1e-9 * y.norm());
  }
}

TEST_CASE("decomposition is orthogonal") {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = test::white(rng, 2000), n = test::white(rng, 2000);
    auto est = mix(s, n, rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0));
    for (double& v : est) v += 0.2 * rng.normal();
    const auto d = ProjectionBasis({s, n}, 32).decompose(est);
    const double total = sum_sq(d.estimate);
    const double parts = sum_sq(d.target) + sum_sq(d.interference) + sum_sq(d.artifacts);
    CHECK(std::abs(total - parts) <= 1e-6 * total);
    CHECK(std::abs(dot(d.target, d.interference)) <= 1e-6 * total);
    CHECK(std::abs(dot(d.target, d.artifacts)) <= 1e-6 * total);
    CHECK(std::abs(dot(d.interference, d.artifacts)) <= 1e-6 * total);
  }
}

TEST_CASE("sir rises as noise falls") {
  Rng rng(5);
  const auto s = test::white(rng, 3000), n = test::white(rng, 3000);
  const ProjectionBasis basis({s, n}, 8);
  double prev = -1e9;
  for (double g : {2.0, 1.0, 0.5, 0.25, 0.1}) {
    auto est = mix(s, n, 1.0, g);
    for (std::size_t i = 0; i < est.size(); ++i) est[i] += 0.01 * std::sin(0.37 * static_cast<double>(i));
    const double sir = basis.metrics(est).sir_db;
    CHECK(sir > prev);
    prev = sir;
  }
}

TEST_CASE("degenerate inputs") {
  Rng rng(6);
  const auto s = test::white(rng, 100), n = test::white(rng, 100);
  const std::vector<double> zero(100, 0.0);
  for (auto call : {+[](const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& c) {
         return bss_eval(a, b, c, 4);
       }}) {
    try {
      call(zero, s, n);
      FAIL("expected degenerate");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Degenerate);
    }
    try {
      call(s, zero, n);
      FAIL("expected degenerate");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Degenerate);
    }
  }
}

TEST_CASE("scene metrics") {
  const auto scene = small_scene(21);
  const SceneEvaluator ev(scene);
  std::vector<NodeOutput> identity(4), oracle(4);
  for (std::size_t k = 0; k < 4; ++k) {
    identity[k].step1 = identity[k].step2 = scene.nodes[k].mixture[0];
    oracle[k].step1 = oracle[k].step2 = scene.nodes[k].speech[0];
  }

  SUBCASE("identity keeps SIR") {
    const auto rows = scene_metrics(ev, identity);
    REQUIRE(rows.size() == 8);
    for (const auto& r : rows) {
      CHECK(std::abs(r.delta_sir_cnv) <= 0.1);
      CHECK(r.delta_sir_cnv == r.output_sir_cnv - r.input_sir_cnv);
    }
    CHECK(rows[0].step == 1);
    CHECK(rows[4].step == 2);
    CHECK(rows[5].node == 1);
  }

  SUBCASE("clean image is capped") {
    for (const auto& r : scene_metrics(ev, oracle)) {
      CHECK(r.output_sir_cnv == kMetricCapDb);
      CHECK(r.sar_cnv == kMetricCapDb);
      CHECK(r.sar_dry < kMetricCapDb);
    }
  }

  SUBCASE("node count must match") {
    identity.pop_back();
    try {
      scene_metrics(ev, identity);
      FAIL("expected pairing error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Pairing);
    }
  }
}

TEST_CASE("selectors") {
  std::vector<MetricRow> rows{row("a", 0, 1, 5, 10), row("a", 1, 1, -3, 12), row("a", 2, 1, 0, 12), row("a", 3, 1, 1, 4),
                              row("a", 0, 2, 5, 20), row("a", 1, 2, -3, 15), row("a", 2, 2, 0, 14), row("a", 3, 2, 1, 9)};
  const auto bo1 = select_rows(rows, Selector::BestOutput, 1);
  REQUIRE(bo1.size() == 1);
  CHECK(bo1[0].node == 1);  // tie with node 2 goes to the lower node
  CHECK(select_rows(rows, Selector::BestOutput, 2)[0].node == 0);
  CHECK(select_rows(rows, Selector::BestInput, 2)[0].node == 0);
  CHECK(select_rows(rows, Selector::WorstInput, 2)[0].node == 1);
  CHECK(select_rows(rows, Selector::PerNode, 2).size() == 4);
  CHECK(short_name(Selector::WorstInput) == "wi");
  CHECK(to_string(Selector::BestOutput) == "best_output");

  // scaling every output leaves the choice alone: SIR is scale free, so rows are unchanged
  const auto scene = small_scene(22);
  const SceneEvaluator ev(scene);
  std::vector<NodeOutput> outs(4), scaled(4);
  Rng rng(7);
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& s = scene.nodes[k].speech[0].samples;
    const auto& n = scene.nodes[k].noise[0].samples;
    outs[k].step1 = outs[k].step2 = {mix(s, n, 1.0, rng.uniform(0.05, 1.0)), kSampleRate};
    scaled[k] = outs[k];
    for (double& v : scaled[k].step2.samples) v *= 7.5;
  }
  const auto a = select_rows(scene_metrics(ev, outs), Selector::BestOutput, 2);
  const auto b = select_rows(scene_metrics(ev, scaled), Selector::BestOutput, 2);
  CHECK(a[0].node == b[0].node);
}

TEST_CASE("aggregation") {
  std::vector<MetricRow> rows;
  for (int i = 0; i < 10; ++i)
    for (int step = 1; step <= 2; ++step)
      for (std::size_t k = 0; k < 4; ++k) rows.push_back(row("s" + std::to_string(i), k, step, k, 10.0 + k * step));
  const auto sum = aggregate(rows, Selector::BestOutput, 2);
  CHECK(sum.scenes == 10);
  CHECK(sum.output_sir_cnv.mean == 16.0);
  CHECK(sum.output_sir_cnv.half_width == 0.0);
  CHECK(sum.delta_sir_cnv.mean == 13.0);

  const auto s = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == 2.5);
  CHECK(s.half_width == doctest::Approx(1.96 * std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(summarize({4.0}).half_width == 0.0);
}

TEST_CASE("reports") {
  std::vector<MetricRow> rows{row("a", 0, 1, 5.25, 10.5), row("a", 1, 1, -3, 12), row("a", 0, 2, 5.25, 20),
                              row("a", 1, 2, -3, 15.125), row("b", 0, 1, 2, 3), row("b", 1, 1, 1, 5),
                              row("b", 0, 2, 2, 8), row("b", 1, 2, 1, 9)};

  SUBCASE("csv round trip") {
    const auto csv = rows_to_csv(rows);
    CHECK(csv.rfind("scene_id,node,step,input_sir_cnv,output_sir_cnv,delta_sir_cnv,sar_cnv,sar_dry\n", 0) == 0);
    CHECK(csv.find("\na,1,1,5.250000,10.500000,5.250000,5.000000,3.000000\n") != std::string::npos);
    const auto back = rows_from_csv(csv);
    REQUIRE(back.size() == rows.size());
    CHECK(back[3].node == 1);
    CHECK(back[3].output_sir_cnv == 15.125);
    CHECK(rows_to_csv(back) == csv);
    CHECK_THROWS_AS(rows_from_csv("nope\n1,2\n"), Error);
  }

  SUBCASE("json summary") {
    const auto j = nlohmann::json::parse(summary_json(rows, "SN"));
    CHECK(j["format"] == "disco-summary/1");
    CHECK(j["label"] == "SN");
    std::vector<std::string> names;
    for (const auto& s : j["summaries"]) names.push_back(s["row"]);
    for (const char* want : {"S1_bo", "S1_bi", "S1_wi", "S2_bo", "S2_bi", "S2_wi", "S2_all"})
      CHECK(std::find(names.begin(), names.end(), want) != names.end());
  }

  SUBCASE("table rows carry the label") {
    const auto t = summary_table(rows, "MN");
    for (const char* want : {"MN_S1_bo", "MN_S1_bi", "MN_S1_wi", "MN_S2_bo", "MN_S2_bi", "MN_S2_wi"})
      CHECK(t.find(want) != std::string::npos);
    CHECK(t.find("+-") != std::string::npos);
  }
}
