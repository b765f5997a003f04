#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cstddef>
#include <string>
#include <vector>

#include "disco/danse.hpp"
#include "disco/room.hpp"
#include "disco/types.hpp"

namespace disco {

inline constexpr std::size_t kDefaultFilterLength = 512;
inline constexpr double kMetricCapDb = 100.0;

/// Orthogonal split of an estimate against a target and an interferer.
/// All vectors have length N + filter_len - 1 (the estimate zero-padded).
struct BssDecomposition {
  std::vector<double> estimate;
  std::vector<double> target;
  std::vector<double> interference;
  std::vector<double> artifacts;
};

struct BssMetrics {
  double sir_db = 0.0;
  double sar_db = 0.0;
};

/// Least-squares projection onto time-shifted references (shifts 0 ..
/// filter_len - 1). Reference 0 is the target; the rest interfere. The Gram
/// matrix is Toeplitz-block, built from cross-correlations, loaded with
/// 1e-12 times its mean diagonal and factored once, so many estimates can be
/// scored against the same references cheaply.
class ProjectionBasis {
 public:
  ProjectionBasis(std::vector<std::vector<double>> references, std::size_t filter_len = kDefaultFilterLength);

  std::size_t length() const noexcept { return length_; }
  std::size_t filter_len() const noexcept { return filter_len_; }

  /// The estimate is trimmed or zero-padded to the reference length first.
  BssDecomposition decompose(const std::vector<double>& estimate) const;
  BssMetrics metrics(const std::vector<double>& estimate) const;

 private:
  std::vector<std::vector<double>> refs_;
  std::size_t filter_len_;
  std::size_t length_;
  Eigen::LLT<Eigen::MatrixXd> full_;
  Eigen::MatrixXd target_factor_;  // leading block of the full Cholesky factor
};

/// SIR = |s_target|^2 / |e_interf|^2 and SAR = |s_target + e_interf|^2 / |e_artif|^2
/// in dB, capped to +-100 dB.
BssMetrics bss_metrics(const BssDecomposition& d);

BssMetrics bss_eval(const std::vector<double>& estimate, const std::vector<double>& speech_ref,
                    const std::vector<double>& noise_ref, std::size_t filter_len = kDefaultFilterLength);

/// One scene x node x step result.
struct MetricRow {
  std::string scene_id;
  std::size_t node = 0;  // 0-based
  int step = 1;
  double input_sir_cnv = 0.0;
  double output_sir_cnv = 0.0;
  double delta_sir_cnv = 0.0;
  double sar_cnv = 0.0;
  double sar_dry = 0.0;
};

/// Reference bases of one rendered scene: reference-mic images for the
/// "cnv" metrics and dry sources shifted by the direct-path delay for SAR_dry.
class SceneEvaluator {
 public:
  explicit SceneEvaluator(const RenderedScene& scene, std::size_t filter_len = kDefaultFilterLength);

  std::size_t nodes() const noexcept { return cnv_.size(); }
  double input_sir(std::size_t node) const { return input_sir_.at(node); }

  MetricRow evaluate(std::size_t node, int step, const TimeSignal& output) const;

 private:
  std::string scene_id_;
  std::vector<ProjectionBasis> cnv_;
  std::vector<ProjectionBasis> dry_;
  std::vector<double> input_sir_;
};

/// Rows for both steps of every node.
std::vector<MetricRow> scene_metrics(const SceneEvaluator& evaluator, const std::vector<NodeOutput>& outputs);
std::vector<MetricRow> scene_metrics(const RenderedScene& scene, const std::vector<NodeOutput>& outputs,
                                     std::size_t filter_len = kDefaultFilterLength);

enum class Selector { BestOutput, BestInput, WorstInput, PerNode };

std::string to_string(Selector selector);
/// "bo", "bi", "wi", "all".
std::string short_name(Selector selector);

struct MetricSummary {
  double mean = 0.0;
  double half_width = 0.0;  // 95% normal approximation, 1.96 s / sqrt(n)
  std::size_t count = 0;
};

struct CorpusSummary {
  Selector selector = Selector::BestOutput;
  int step = 1;
  std::size_t scenes = 0;
  MetricSummary input_sir_cnv;
  MetricSummary output_sir_cnv;
  MetricSummary delta_sir_cnv;
  MetricSummary sar_cnv;
  MetricSummary sar_dry;
};

/// Rows of `step` picked per scene by `selector` (PerNode keeps them all).
std::vector<MetricRow> select_rows(const std::vector<MetricRow>& rows, Selector selector, int step);

CorpusSummary aggregate(const std::vector<MetricRow>& rows, Selector selector, int step);

MetricSummary summarize(const std::vector<double>& values);

std::string rows_to_csv(const std::vector<MetricRow>& rows);
std::vector<MetricRow> rows_from_csv(const std::string& text);

/// JSON summary: one entry per step x selector.
std::string summary_json(const std::vector<MetricRow>& rows, const std::string& label);

/// Fixed-width table, one line per step x {bo, bi, wi}: output SIR,
/// delta SIR, SAR_cnv, SAR_dry as mean +- half-width.
std::string summary_table(const std::vector<MetricRow>& rows, const std::string& label);

}  // namespace disco
