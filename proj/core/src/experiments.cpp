#include "epd/experiments.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>

#include <json.hpp>

namespace epd {

using nlohmann::json;

namespace {

const std::map<std::string, ExperimentKind> kKinds = {
    {"beampattern", ExperimentKind::kBeampattern},
    {"eta-sweep", ExperimentKind::kEtaSweep},
    {"snr-sweep", ExperimentKind::kSnrSweep},
    {"aod-sweep", ExperimentKind::kAodSweep},
    {"two-path", ExperimentKind::kTwoPath},
};

std::string kind_name(ExperimentKind kind) {
  for (const auto& [name, k] : kKinds)
    if (k == kind) return name;
  throw std::logic_error("unknown experiment kind");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  array.validate();
  scenario.validate();
  if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
  if (codebook.gamma < 0.0) throw std::invalid_argument("config: gamma must be >= 0");
  parse_style(codebook.style);
  for (const auto& p : scenario.paths) p.uncertainty.validate();
  const bool needs_sweep = experiment != ExperimentKind::kBeampattern;
  if (needs_sweep && sweep.empty())
    throw std::invalid_argument("config: sweep values required for this experiment");
}

CodebookStyle parse_style(const std::string& style) {
  if (style == "sum") return CodebookStyle::kSum;
  if (style == "diff") return CodebookStyle::kDiff;
  if (style == "sum-diff") return CodebookStyle::kSumDiff;
  throw std::invalid_argument("config: unknown codebook style '" + style + "'");
}

ExperimentConfig parse_config(const std::string& json_text) {
  const json j = json::parse(json_text);
  ExperimentConfig cfg;

  if (j.contains("array")) {
    const auto& a = j.at("array");
    cfg.array.num_elements = a.value("num_elements", cfg.array.num_elements);
    cfg.array.spacing_ratio = a.value("spacing_ratio", cfg.array.spacing_ratio);
    cfg.array.carrier_hz = a.value("carrier_hz", cfg.array.carrier_hz);
  }
  if (j.contains("codebook")) {
    const auto& c = j.at("codebook");
    cfg.codebook.gamma = c.value("gamma", cfg.codebook.gamma);
    cfg.codebook.style = c.value("style", cfg.codebook.style);
    cfg.codebook.min_grid_points =
        c.value("min_grid_points", cfg.codebook.min_grid_points);
  }
  if (j.contains("design")) {
    const auto& d = j.at("design");
    cfg.design.eta = d.value("eta", cfg.design.eta);
    cfg.design.max_outer_iters = d.value("max_outer_iters", cfg.design.max_outer_iters);
    cfg.design.conv_tol = d.value("conv_tol", cfg.design.conv_tol);
    cfg.design.unit_modulus = d.value("unit_modulus", cfg.design.unit_modulus);
    if (d.contains("inner")) {
      const auto& i = d.at("inner");
      cfg.design.inner.max_iters = i.value("max_iters", cfg.design.inner.max_iters);
      cfg.design.inner.grad_tol = i.value("grad_tol", cfg.design.inner.grad_tol);
      const std::string rule = i.value("step_rule", std::string("fixed"));
      if (rule == "fixed")
        cfg.design.inner.step_rule = StepRule::kFixedInverseLipschitz;
      else if (rule == "backtracking")
        cfg.design.inner.step_rule = StepRule::kBacktracking;
      else
        throw std::invalid_argument("config: unknown step_rule '" + rule + "'");
    }
  }
  if (j.contains("scenario")) {
    const auto& s = j.at("scenario");
    cfg.scenario.num_snapshots = s.value("num_snapshots", cfg.scenario.num_snapshots);
    cfg.scenario.noise_power = s.value("noise_power", cfg.scenario.noise_power);
    cfg.scenario.tx_power = s.value("tx_power", cfg.scenario.tx_power);
    cfg.scenario.gain_std = s.value("gain_std", cfg.scenario.gain_std);
    cfg.scenario.paths.clear();
    int index = 0;
    for (const auto& p : s.at("paths")) {
      PathSpec path;
      path.theta_deg = p.at("theta_deg").get<double>();
      path.snr_db = p.value("snr_db", 0.0);
      const auto u = p.at("uncertainty");
      path.uncertainty = {index++, u.at(0).get<double>(), u.at(1).get<double>()};
      cfg.scenario.paths.push_back(path);
    }
  }
  if (j.contains("experiment")) {
    const std::string name = j.at("experiment").get<std::string>();
    const auto it = kKinds.find(name);
    if (it == kKinds.end())
      throw std::invalid_argument("config: unknown experiment '" + name + "'");
    cfg.experiment = it->second;
  }
  cfg.sweep = j.value("sweep", cfg.sweep);
  cfg.trials = j.value("trials", cfg.trials);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config(text);
}

std::string serialize_config(const ExperimentConfig& cfg) {
  json paths = json::array();
  for (const auto& p : cfg.scenario.paths)
    paths.push_back({{"theta_deg", p.theta_deg},
                     {"snr_db", p.snr_db},
                     {"uncertainty",
                      {p.uncertainty.theta_min_deg, p.uncertainty.theta_max_deg}}});
  const json j = {
      {"array",
       {{"num_elements", cfg.array.num_elements},
        {"spacing_ratio", cfg.array.spacing_ratio},
        {"carrier_hz", cfg.array.carrier_hz}}},
      {"codebook",
       {{"gamma", cfg.codebook.gamma},
        {"style", cfg.codebook.style},
        {"min_grid_points", cfg.codebook.min_grid_points}}},
      {"design",
       {{"eta", cfg.design.eta},
        {"max_outer_iters", cfg.design.max_outer_iters},
        {"conv_tol", cfg.design.conv_tol},
        {"unit_modulus", cfg.design.unit_modulus},
        {"inner",
         {{"max_iters", cfg.design.inner.max_iters},
          {"grad_tol", cfg.design.inner.grad_tol},
          {"step_rule", cfg.design.inner.step_rule == StepRule::kBacktracking
                            ? "backtracking"
                            : "fixed"}}}}},
      {"scenario",
       {{"num_snapshots", cfg.scenario.num_snapshots},
        {"noise_power", cfg.scenario.noise_power},
        {"tx_power", cfg.scenario.tx_power},
        {"gain_std", cfg.scenario.gain_std},
        {"paths", paths}}},
      {"experiment", kind_name(cfg.experiment)},
      {"sweep", cfg.sweep},
      {"trials", cfg.trials},
      {"seed", cfg.seed},
      {"threads", cfg.threads},
      {"out_dir", cfg.out_dir},
  };
  return j.dump(2);
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string canon = serialize_config(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

CodebookSpec codebook_spec(const Scenario& scenario, const CodebookSettings& cb,
                           CodebookStyle style) {
  CodebookSpec spec;
  for (const auto& p : scenario.paths) spec.intervals.push_back(p.uncertainty);
  spec.gamma = cb.gamma;
  spec.style = style;
  spec.min_grid_points = cb.min_grid_points;
  return spec;
}

namespace {

int sum_columns(const ArrayConfig& arr, const CodebookSpec& spec) {
  int total = 0;
  for (const auto& u : spec.intervals)
    total += beam_grid(arr, u, spec.min_grid_points).count();
  return total;
}

// Tracks emitted files so a failed command leaves no partial outputs.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir, std::string stamp)
      : dir_(std::move(dir)), stamp_(std::move(stamp)) {
    std::filesystem::create_directories(dir_);
  }

  ~OutputSet() {
    if (!committed_)
      for (const auto& p : written_) std::filesystem::remove(p);
  }

  std::ofstream open(const std::string& name, const std::string& header) {
    std::ofstream out = open_raw(name);
    out << "# " << stamp_ << "\n" << header << "\n";
    return out;
  }

  // No comment prefix (JSON outputs carry the stamp inside the document).
  std::ofstream open_raw(const std::string& name) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    written_.push_back(path);
    return out;
  }

  void commit() { committed_ = true; }

 private:
  std::filesystem::path dir_;
  std::string stamp_;
  std::vector<std::filesystem::path> written_;
  bool committed_ = false;
};

std::string stamp_for(const ExperimentConfig& cfg) {
  return "seed=" + std::to_string(cfg.seed) + " config_hash=" + config_hash(cfg);
}

void write_precoder_csv(std::ofstream& out, const Precoder& f) {
  for (int k = 0; k < f.tx_elements(); ++k) {
    out << k;
    for (int m = 0; m < f.beams(); ++m)
      out << ',' << fmt(f.mat(k, m).real()) << ',' << fmt(f.mat(k, m).imag());
    out << '\n';
  }
}

void write_beampattern_csv(std::ofstream& out, const ArrayConfig& arr,
                           const Precoder& f, const AngleGrid& grid) {
  const CMat pattern = beampattern(arr, f, grid);
  for (int i = 0; i < grid.count(); ++i) {
    out << fmt(grid.angles_deg[i]);
    double power = 0.0;
    for (int m = 0; m < f.beams(); ++m) {
      const double mag = std::abs(pattern(i, m));
      power += mag * mag;
      out << ',' << fmt(mag);
    }
    out << ',' << fmt(power) << '\n';
  }
}

void write_phase_increments_csv(std::ofstream& out, const Precoder& f) {
  std::vector<RVec> profiles;
  for (int m = 0; m < f.beams(); ++m)
    profiles.push_back(phase_increment_profile(f, m));
  for (int k = 0; k + 1 < f.tx_elements(); ++k) {
    out << k;
    for (const auto& p : profiles) out << ',' << fmt(p(k));
    out << '\n';
  }
}

void write_trace_csv(std::ofstream& out, const DesignTrace& trace) {
  for (const auto& e : trace.entries)
    out << e.iteration << ',' << fmt(e.synthesis_error) << ',' << fmt(e.sip_err)
        << ',' << fmt(e.objective) << '\n';
}

std::string pattern_header(int beams) {
  std::string h = "angle_deg";
  for (int m = 0; m < beams; ++m) h += ",mag_" + std::to_string(m);
  return h + ",power";
}

std::string matrix_header(const std::string& index, int beams) {
  std::string h = index;
  for (int m = 0; m < beams; ++m)
    h += ",re_" + std::to_string(m) + ",im_" + std::to_string(m);
  return h;
}

std::string profile_header(int beams) {
  std::string h = "element";
  for (int m = 0; m < beams; ++m) h += ",dphase_" + std::to_string(m);
  return h;
}

}  // namespace

std::vector<PrecoderEntry> build_strategies(const ArrayConfig& arr,
                                            const Scenario& scenario,
                                            const CodebookSettings& cb,
                                            const DesignConfig& dcfg) {
  const int l = scenario.num_paths();

  // The sum-only baseline keeps its natural beamwidth grid. Near end-fire
  // the widening beams can leave it with fewer than L + 2 columns, in which
  // case the deflated estimator cannot run and the benchmark records every
  // trial as a failure for that strategy.
  const CodebookSpec sum_spec = codebook_spec(scenario, cb, CodebookStyle::kSum);

  // The sum-diff banks raise their grid floor until the steering half alone
  // spans L + 2 directions, so the paired bank keeps enough independent
  // probing beams for the deflated estimator even where the natural
  // beamwidth grid gets sparse.
  CodebookSettings settings = cb;
  CodebookSpec sd_spec = codebook_spec(scenario, settings, CodebookStyle::kSumDiff);
  while (sum_columns(arr, sd_spec) < l + 2) ++sd_spec.min_grid_points;

  const AngleGrid grid = default_grid(arr);
  std::vector<PrecoderEntry> entries;

  entries.push_back({"sum", build_baseline(arr, sum_spec), {}});

  const Precoder base = build_baseline(arr, sd_spec);

  DesignConfig plain = dcfg;
  plain.eta = 0.0;
  plain.max_outer_iters = 1;
  entries.push_back({"sum-diff", design(arr, base, plain, grid).precoder, {}});

  entries.push_back(
      {"sum-diff-esprit", design(arr, base, dcfg, grid).precoder, {}});

  // Equal transmit power across strategies, then the estimator-side SIP
  // solution. The designed bank's shifted columns can be nearly dependent,
  // so its Lambda uses the truncated-SVD solve to avoid amplifying subspace
  // noise; the baselines keep the plain least-squares Lambda.
  double target = 0.0;
  for (const auto& e : entries) target = std::max(target, e.precoder.frobenius());
  for (auto& e : entries) {
    e.precoder.mat *= target / e.precoder.frobenius();
    if (e.precoder.beams() < 3) continue;  // no deflation possible; skip
    e.sip = e.name == "sum-diff-esprit"
                ? solve_sip_regularized(e.precoder, kEstimatorLambdaTol)
                : solve_sip(e.precoder);
  }
  return entries;
}

int cmd_design(const ExperimentConfig& cfg) {
  cfg.validate();
  OutputSet out(cfg.out_dir, stamp_for(cfg));

  const AngleGrid grid = default_grid(cfg.array);
  const Precoder base = build_baseline(
      cfg.array, codebook_spec(cfg.scenario, cfg.codebook,
                               parse_style(cfg.codebook.style)));

  std::vector<double> etas = cfg.experiment == ExperimentKind::kEtaSweep
                                 ? cfg.sweep
                                 : std::vector<double>{cfg.design.eta};

  std::vector<std::pair<double, double>> sip_vs_eta;
  for (std::size_t i = 0; i < etas.size(); ++i) {
    DesignConfig dcfg = cfg.design;
    dcfg.eta = etas[i];
    const DesignResult res = design(cfg.array, base, dcfg, grid);

    const std::string suffix =
        etas.size() > 1 ? "_eta" + std::to_string(i) : "";
    {
      auto f = out.open("precoder" + suffix + ".csv",
                        matrix_header("element", res.precoder.beams()));
      f << "# eta=" << fmt(etas[i]) << "\n";
      write_precoder_csv(f, res.precoder);
    }
    {
      auto f = out.open("beampattern" + suffix + ".csv",
                        pattern_header(res.precoder.beams()));
      write_beampattern_csv(f, cfg.array, res.precoder, grid);
    }
    {
      auto f = out.open("phase_increments" + suffix + ".csv",
                        profile_header(res.precoder.beams()));
      write_phase_increments_csv(f, res.precoder);
    }
    {
      auto f = out.open("trace" + suffix + ".csv",
                        "iteration,synthesis_error,sip_error,objective");
      write_trace_csv(f, res.trace);
    }
    sip_vs_eta.emplace_back(etas[i], res.sip.residual);
  }

  if (etas.size() > 1) {
    auto f = out.open("sip_error_vs_eta.csv", "eta,sip_error");
    for (const auto& [eta, err] : sip_vs_eta)
      f << fmt(eta) << ',' << fmt(err) << '\n';
  }
  out.commit();
  return 0;
}

int cmd_beampattern(const ExperimentConfig& cfg) {
  cfg.validate();
  OutputSet out(cfg.out_dir, stamp_for(cfg));
  const AngleGrid grid = default_grid(cfg.array);
  const Precoder base = build_baseline(
      cfg.array, codebook_spec(cfg.scenario, cfg.codebook,
                               parse_style(cfg.codebook.style)));
  auto f = out.open("beampattern.csv", pattern_header(base.beams()));
  write_beampattern_csv(f, cfg.array, base, grid);
  out.commit();
  return 0;
}

int cmd_evaluate(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.experiment != ExperimentKind::kSnrSweep &&
      cfg.experiment != ExperimentKind::kAodSweep &&
      cfg.experiment != ExperimentKind::kTwoPath)
    throw std::invalid_argument(
        "evaluate requires an snr-sweep, aod-sweep, or two-path experiment");

  std::vector<BenchmarkTask> tasks;
  if (cfg.experiment == ExperimentKind::kAodSweep) {
    const double half = cfg.scenario.paths.front().uncertainty.width() / 2.0;
    for (double theta : cfg.sweep) {
      BenchmarkTask task;
      task.axis_value = theta;
      task.scenario = cfg.scenario;
      task.scenario.paths.front().theta_deg = theta;
      task.scenario.paths.front().uncertainty = {0, theta - half, theta + half};
      task.precoders =
          build_strategies(cfg.array, task.scenario, cfg.codebook, cfg.design);
      tasks.push_back(std::move(task));
    }
  } else {
    const auto shared =
        build_strategies(cfg.array, cfg.scenario, cfg.codebook, cfg.design);
    const double ref_snr = cfg.scenario.paths.back().snr_db;
    for (double axis : cfg.sweep) {
      BenchmarkTask task;
      task.axis_value = axis;
      task.scenario = cfg.scenario;
      for (auto& p : task.scenario.paths) {
        // snr-sweep sets the axis directly; two-path shifts every path
        // jointly, keeping the configured SNR gaps fixed.
        p.snr_db = cfg.experiment == ExperimentKind::kSnrSweep
                       ? axis
                       : axis + (p.snr_db - ref_snr);
      }
      task.precoders = shared;
      tasks.push_back(std::move(task));
    }
  }

  BenchmarkOptions opts;
  opts.trials = cfg.trials;
  opts.seed = cfg.seed;
  opts.threads = cfg.threads;
  const BenchmarkReport report = run_benchmark(tasks, cfg.array, opts);

  OutputSet out(cfg.out_dir, stamp_for(cfg));
  {
    auto f = out.open("report.csv",
                      "axis,precoder,rmse_deg,ci_lo_deg,ci_hi_deg,"
                      "failure_rate,trials,crb_root_deg");
    for (const auto& row : report.rows) {
      double crb_joint = 0.0;
      for (double c : row.stats.crb_root_deg) crb_joint += c * c;
      f << fmt(row.axis_value) << ',' << row.precoder << ','
        << fmt(row.stats.rmse_deg) << ',' << fmt(row.stats.ci_lo_deg) << ','
        << fmt(row.stats.ci_hi_deg) << ',' << fmt(row.stats.failure_rate) << ','
        << row.stats.trial_count << ',' << fmt(std::sqrt(crb_joint)) << '\n';
    }
  }
  {
    json rows = json::array();
    for (const auto& row : report.rows)
      rows.push_back({{"axis", row.axis_value},
                      {"precoder", row.precoder},
                      {"rmse_deg", row.stats.rmse_deg},
                      {"ci_lo_deg", row.stats.ci_lo_deg},
                      {"ci_hi_deg", row.stats.ci_hi_deg},
                      {"failure_rate", row.stats.failure_rate},
                      {"trials", row.stats.trial_count},
                      {"crb_root_deg", row.stats.crb_root_deg}});
    const json summary = {{"seed", cfg.seed},
                          {"config_hash", config_hash(cfg)},
                          {"experiment", kind_name(cfg.experiment)},
                          {"rows", rows}};
    auto f = out.open_raw("summary.json");
    f << summary.dump(2) << '\n';
  }
  out.commit();
  return 0;
}

}  // namespace epd
