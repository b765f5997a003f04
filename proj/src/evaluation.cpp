#include "disco/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <json.hpp>
#include <sstream>

#include "disco/error.hpp"
#include "disco/fft.hpp"

namespace disco {

namespace {

double capped_db(double num, double den) {
  if (den <= 0.0) return num > 0.0 ? kMetricCapDb : -kMetricCapDb;
  if (num <= 0.0) return -kMetricCapDb;
  return std::clamp(10.0 * std::log10(num / den), -kMetricCapDb, kMetricCapDb);
}

std::vector<double> fit_length(const std::vector<double>& x, std::size_t n) {
  std::vector<double> out(n, 0.0);
  std::copy_n(x.begin(), std::min(n, x.size()), out.begin());
  return out;
}

// sum_a c[a] r[n - a], returned with length n_out
std::vector<double> filter_ref(const std::vector<double>& r, const Eigen::VectorXd& c, std::size_t n_out) {
  std::vector<double> out = fft_convolve(r, std::span<const double>(c.data(), static_cast<std::size_t>(c.size())));
  out.resize(n_out, 0.0);
  return out;
}

}  // namespace

ProjectionBasis::ProjectionBasis(std::vector<std::vector<double>> references, std::size_t filter_len)
    : refs_(std::move(references)), filter_len_(filter_len), length_(0) {
  if (refs_.empty()) throw Error(ErrorKind::Empty, "no references");
  if (filter_len_ == 0) throw Error(ErrorKind::Validation, "filter_len must be positive");
  length_ = refs_.front().size();
  for (const auto& r : refs_) {
    if (r.size() != length_) throw Error(ErrorKind::Size, "references differ in length");
    if (energy(r) <= 0.0) throw Error(ErrorKind::Degenerate, "zero-energy reference");
  }
  const std::size_t nr = refs_.size();
  const std::size_t L = filter_len_;
  const auto dim = static_cast<Eigen::Index>(nr * L);
  Eigen::MatrixXd gram(dim, dim);
  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t j = i; j < nr; ++j) {
      // <shift_a r_i, shift_b r_j> = xc_ij(a - b)
      const auto pos = cross_correlate(refs_[i], refs_[j], L);
      const auto neg = cross_correlate(refs_[j], refs_[i], L);
      for (std::size_t a = 0; a < L; ++a) {
        for (std::size_t b = 0; b < L; ++b) {
          const double v = a >= b ? pos[a - b] : neg[b - a];
          const auto row = static_cast<Eigen::Index>(i * L + a);
          const auto col = static_cast<Eigen::Index>(j * L + b);
          gram(row, col) = v;
          gram(col, row) = v;
        }
      }
    }
  }
  const double load = 1e-12 * gram.trace() / static_cast<double>(dim);
  gram.diagonal().array() += load;
  full_.compute(gram);
  if (full_.info() != Eigen::Success) throw Error(ErrorKind::Conditioning, "reference Gram matrix not positive definite");
  const auto l = static_cast<Eigen::Index>(L);
  target_factor_ = Eigen::MatrixXd(full_.matrixL()).topLeftCorner(l, l);
}

BssDecomposition ProjectionBasis::decompose(const std::vector<double>& estimate) const {
  std::vector<double> e = fit_length(estimate, length_);
  if (energy(e) <= 0.0) throw Error(ErrorKind::Degenerate, "zero-energy estimate");
  const std::size_t L = filter_len_;
  const std::size_t nr = refs_.size();
  const std::size_t n_out = length_ + L - 1;

  Eigen::VectorXd rhs(static_cast<Eigen::Index>(nr * L));
  for (std::size_t i = 0; i < nr; ++i) {
    const auto d = cross_correlate(refs_[i], e, L);
    for (std::size_t a = 0; a < L; ++a) rhs(static_cast<Eigen::Index>(i * L + a)) = d[a];
  }
  const auto l = static_cast<Eigen::Index>(L);

  Eigen::VectorXd c_target = rhs.head(l);
  const auto tri = target_factor_.triangularView<Eigen::Lower>();
  tri.solveInPlace(c_target);
  tri.transpose().solveInPlace(c_target);

  const Eigen::VectorXd c_all = full_.solve(rhs);

  BssDecomposition out;
  out.estimate = e;
  out.estimate.resize(n_out, 0.0);
  out.target = filter_ref(refs_[0], c_target, n_out);
  std::vector<double> joint(n_out, 0.0);
  for (std::size_t i = 0; i < nr; ++i) {
    const auto part = filter_ref(refs_[i], c_all.segment(static_cast<Eigen::Index>(i * L), l), n_out);
    for (std::size_t n = 0; n < n_out; ++n) joint[n] += part[n];
  }
  out.interference.resize(n_out);
  out.artifacts.resize(n_out);
  for (std::size_t n = 0; n < n_out; ++n) {
    out.interference[n] = joint[n] - out.target[n];
    out.artifacts[n] = out.estimate[n] - joint[n];
  }
  return out;
}

BssMetrics ProjectionBasis::metrics(const std::vector<double>& estimate) const {
  return bss_metrics(decompose(estimate));
}

BssMetrics bss_metrics(const BssDecomposition& d) {
  std::vector<double> signal(d.target.size());
  for (std::size_t n = 0; n < signal.size(); ++n) signal[n] = d.target[n] + d.interference[n];
  BssMetrics m;
  m.sir_db = capped_db(energy(d.target), energy(d.interference));
  m.sar_db = capped_db(energy(signal), energy(d.artifacts));
  return m;
}

BssMetrics bss_eval(const std::vector<double>& estimate, const std::vector<double>& speech_ref,
                    const std::vector<double>& noise_ref, std::size_t filter_len) {
  return ProjectionBasis({speech_ref, noise_ref}, filter_len).metrics(estimate);
}

SceneEvaluator::SceneEvaluator(const RenderedScene& scene, std::size_t filter_len)
    : scene_id_(scene.descriptor.scene_id) {
  const std::size_t n = scene.length();
  auto delayed = [n](const std::vector<double>& x, double delay) {
    const auto shift = static_cast<std::size_t>(std::max(0L, std::lround(delay)));
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i + shift < n && i < x.size(); ++i) out[i + shift] = x[i];
    return out;
  };
  for (const auto& node : scene.nodes) {
    cnv_.emplace_back(std::vector<std::vector<double>>{fit_length(node.speech.at(0).samples, n),
                                                       fit_length(node.noise.at(0).samples, n)},
                      filter_len);
    dry_.emplace_back(std::vector<std::vector<double>>{delayed(scene.dry_speech.samples, node.target_delay),
                                                       delayed(scene.dry_noise.samples, node.noise_delay)},
                      filter_len);
    input_sir_.push_back(cnv_.back().metrics(node.mixture.at(0).samples).sir_db);
  }
}

MetricRow SceneEvaluator::evaluate(std::size_t node, int step, const TimeSignal& output) const {
  const BssMetrics cnv = cnv_.at(node).metrics(output.samples);
  const BssMetrics dry = dry_.at(node).metrics(output.samples);
  MetricRow row;
  row.scene_id = scene_id_;
  row.node = node;
  row.step = step;
  row.input_sir_cnv = input_sir_.at(node);
  row.output_sir_cnv = cnv.sir_db;
  row.delta_sir_cnv = row.output_sir_cnv - row.input_sir_cnv;
  row.sar_cnv = cnv.sar_db;
  row.sar_dry = dry.sar_db;
  return row;
}

std::vector<MetricRow> scene_metrics(const SceneEvaluator& evaluator, const std::vector<NodeOutput>& outputs) {
  if (outputs.size() != evaluator.nodes())
    throw Error(ErrorKind::Pairing, "scene has " + std::to_string(evaluator.nodes()) + " nodes but " +
                                        std::to_string(outputs.size()) + " outputs were given");
  std::vector<MetricRow> rows;
  for (int step = 1; step <= 2; ++step)
    for (std::size_t k = 0; k < outputs.size(); ++k)
      rows.push_back(evaluator.evaluate(k, step, step == 1 ? outputs[k].step1 : outputs[k].step2));
  return rows;
}

std::vector<MetricRow> scene_metrics(const RenderedScene& scene, const std::vector<NodeOutput>& outputs,
                                     std::size_t filter_len) {
  return scene_metrics(SceneEvaluator(scene, filter_len), outputs);
}

std::string to_string(Selector selector) {
  switch (selector) {
    case Selector::BestOutput: return "best_output";
    case Selector::BestInput: return "best_input";
    case Selector::WorstInput: return "worst_input";
    case Selector::PerNode: return "per_node";
  }
  return "?";
}

std::string short_name(Selector selector) {
  switch (selector) {
    case Selector::BestOutput: return "bo";
    case Selector::BestInput: return "bi";
    case Selector::WorstInput: return "wi";
    case Selector::PerNode: return "all";
  }
  return "?";
}

std::vector<MetricRow> select_rows(const std::vector<MetricRow>& rows, Selector selector, int step) {
  std::vector<MetricRow> picked;
  // scenes in order of first appearance
  std::vector<std::string> order;
  std::map<std::string, std::vector<const MetricRow*>> by_scene;
  for (const auto& r : rows) {
    if (r.step != step) continue;
    auto [it, inserted] = by_scene.try_emplace(r.scene_id);
    if (inserted) order.push_back(r.scene_id);
    it->second.push_back(&r);
  }
  for (const auto& id : order) {
    auto group = by_scene[id];
    std::stable_sort(group.begin(), group.end(), [](auto* a, auto* b) { return a->node < b->node; });
    if (selector == Selector::PerNode) {
      for (auto* r : group) picked.push_back(*r);
      continue;
    }
    const MetricRow* best = group.front();
    for (auto* r : group) {
      switch (selector) {
        case Selector::BestOutput:
          if (r->output_sir_cnv > best->output_sir_cnv) best = r;
          break;
        case Selector::BestInput:
          if (r->input_sir_cnv > best->input_sir_cnv) best = r;
          break;
        case Selector::WorstInput:
          if (r->input_sir_cnv < best->input_sir_cnv) best = r;
          break;
        case Selector::PerNode: break;
      }
    }
    picked.push_back(*best);
  }
  return picked;
}

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return s;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  s.half_width = 1.96 * sd / std::sqrt(static_cast<double>(values.size()));
  return s;
}

CorpusSummary aggregate(const std::vector<MetricRow>& rows, Selector selector, int step) {
  const auto picked = select_rows(rows, selector, step);
  CorpusSummary out;
  out.selector = selector;
  out.step = step;
  std::vector<std::string> ids;
  auto collect = [&](double MetricRow::*field) {
    std::vector<double> v;
    v.reserve(picked.size());
    for (const auto& r : picked) v.push_back(r.*field);
    return summarize(v);
  };
  for (const auto& r : picked)
    if (std::find(ids.begin(), ids.end(), r.scene_id) == ids.end()) ids.push_back(r.scene_id);
  out.scenes = ids.size();
  out.input_sir_cnv = collect(&MetricRow::input_sir_cnv);
  out.output_sir_cnv = collect(&MetricRow::output_sir_cnv);
  out.delta_sir_cnv = collect(&MetricRow::delta_sir_cnv);
  out.sar_cnv = collect(&MetricRow::sar_cnv);
  out.sar_dry = collect(&MetricRow::sar_dry);
  return out;
}

namespace {
constexpr const char* kCsvHeader = "scene_id,node,step,input_sir_cnv,output_sir_cnv,delta_sir_cnv,sar_cnv,sar_dry";
}

std::string rows_to_csv(const std::vector<MetricRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, ",%zu,%d,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.node + 1, r.step, r.input_sir_cnv,
                  r.output_sir_cnv, r.delta_sir_cnv, r.sar_cnv, r.sar_dry);
    out += r.scene_id;
    out += buf;
  }
  return out;
}

std::vector<MetricRow> rows_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw Error(ErrorKind::Format, "unexpected CSV header");
  std::vector<MetricRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8) throw Error(ErrorKind::Format, "CSV line " + std::to_string(line_no) + " has " +
                                                              std::to_string(cells.size()) + " cells");
    try {
      MetricRow r;
      r.scene_id = cells[0];
      const int node = std::stoi(cells[1]);
      if (node < 1) throw Error(ErrorKind::Format, "node index must be 1-based");
      r.node = static_cast<std::size_t>(node - 1);
      r.step = std::stoi(cells[2]);
      r.input_sir_cnv = std::stod(cells[3]);
      r.output_sir_cnv = std::stod(cells[4]);
      r.delta_sir_cnv = std::stod(cells[5]);
      r.sar_cnv = std::stod(cells[6]);
      r.sar_dry = std::stod(cells[7]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::Format, "CSV line " + std::to_string(line_no) + " is not numeric");
    }
  }
  return rows;
}

namespace {

nlohmann::json to_json(const MetricSummary& s) {
  return {{"mean", s.mean}, {"half_width", s.half_width}, {"n", s.count}};
}

constexpr Selector kReportSelectors[] = {Selector::BestOutput, Selector::BestInput, Selector::WorstInput,
                                         Selector::PerNode};

}  // namespace

std::string summary_json(const std::vector<MetricRow>& rows, const std::string& label) {
  nlohmann::json j;
  j["format"] = "disco-summary/1";
  j["label"] = label;
  nlohmann::json entries = nlohmann::json::array();
  for (int step = 1; step <= 2; ++step) {
    for (Selector sel : kReportSelectors) {
      const CorpusSummary s = aggregate(rows, sel, step);
      entries.push_back({{"row", "S" + std::to_string(step) + "_" + short_name(sel)},
                         {"step", step},
                         {"selector", to_string(sel)},
                         {"scenes", s.scenes},
                         {"input_sir_cnv", to_json(s.input_sir_cnv)},
                         {"output_sir_cnv", to_json(s.output_sir_cnv)},
                         {"delta_sir_cnv", to_json(s.delta_sir_cnv)},
                         {"sar_cnv", to_json(s.sar_cnv)},
                         {"sar_dry", to_json(s.sar_dry)}});
    }
  }
  j["summaries"] = std::move(entries);
  return j.dump(2) + "\n";
}

std::string summary_table(const std::vector<MetricRow>& rows, const std::string& label) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-12s %-16s %-16s %-16s %-16s\n", "row", "SIR_cnv", "dSIR_cnv", "SAR_cnv",
                "SAR_dry");
  out += buf;
  auto cell = [](const MetricSummary& s) {
    char c[64];
    std::snprintf(c, sizeof c, "%6.2f +- %5.2f", s.mean, s.half_width);
    return std::string(c);
  };
  for (int step = 1; step <= 2; ++step) {
    for (Selector sel : {Selector::BestOutput, Selector::BestInput, Selector::WorstInput}) {
      const CorpusSummary s = aggregate(rows, sel, step);
      std::string name = (label.empty() ? "" : label + "_") + "S" + std::to_string(step) + "_" + short_name(sel);
      std::snprintf(buf, sizeof buf, "%-12s %-16s %-16s %-16s %-16s\n", name.c_str(),
                    cell(s.output_sir_cnv).c_str(), cell(s.delta_sir_cnv).c_str(), cell(s.sar_cnv).c_str(),
                    cell(s.sar_dry).c_str());
      out += buf;
    }
  }
  return out;
}

}  // namespace disco
