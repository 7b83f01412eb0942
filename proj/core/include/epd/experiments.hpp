#pragma once

#include <filesystem>
#include <string>

#include "epd/design.hpp"
#include "epd/evaluation.hpp"

namespace epd {

enum class ExperimentKind { kBeampattern, kEtaSweep, kSnrSweep, kAodSweep, kTwoPath };

struct CodebookSettings {
  double gamma = 0.01;
  std::string style = "sum-diff";  // "sum" | "diff" | "sum-diff"
  int min_grid_points = 1;
};

struct ExperimentConfig {
  ArrayConfig array;
  CodebookSettings codebook;
  DesignConfig design;
  Scenario scenario;
  ExperimentKind experiment = ExperimentKind::kBeampattern;
  std::vector<double> sweep;
  int trials = 100;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = "out";

  void validate() const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical JSON form; parse(serialize(cfg)) == cfg.
std::string serialize_config(const ExperimentConfig& cfg);
/// FNV-1a hash of the canonical form, hex string.
std::string config_hash(const ExperimentConfig& cfg);

CodebookStyle parse_style(const std::string& style);

/// CodebookSpec for the scenario's uncertainty intervals.
CodebookSpec codebook_spec(const Scenario& scenario, const CodebookSettings& cb,
                           CodebookStyle style);

/// Relative SVD truncation used for the estimator-side Lambda solve in
/// build_strategies; see lambda_ls_minimum_norm.
inline constexpr double kEstimatorLambdaTol = 1e-2;

/// The three benchmarked strategies ("sum", "sum-diff", "sum-diff-esprit"),
/// built for the scenario's uncertainty intervals and normalized to a
/// common Frobenius norm. The sum-only bank keeps its natural beamwidth
/// grid (and may be too small to estimate with near end-fire); the
/// sum-diff banks raise the grid floor just enough to stay estimable.
std::vector<PrecoderEntry> build_strategies(const ArrayConfig& arr,
                                            const Scenario& scenario,
                                            const CodebookSettings& cb,
                                            const DesignConfig& dcfg);

/// Writes precoder / beampattern / phase-increment / trace CSVs; for the
/// eta sweep, one beampattern per eta plus the SIP-error-vs-eta curve.
int cmd_design(const ExperimentConfig& cfg);

/// Runs the Monte Carlo benchmark across the sweep axis and writes the
/// report CSV and JSON summary.
int cmd_evaluate(const ExperimentConfig& cfg);

/// Writes the baseline codebook beampattern.
int cmd_beampattern(const ExperimentConfig& cfg);

}  // namespace epd
