#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cryptic/analytics.hpp"
#include "cryptic/awareness.hpp"
#include "cryptic/dataset.hpp"
#include "cryptic/io.hpp"
#include "cryptic/netinfer.hpp"
#include "cryptic/parallel.hpp"
#include "cryptic/regress.hpp"
#include "cryptic/simulate.hpp"
#include "cryptic/table.hpp"

namespace cryptic {

namespace fs = std::filesystem;

struct RegressionConfig {
  std::size_t sample_size = 100000;  // capped at half the qualified cohort
  int max_percent = 95;
  FitConfig fit;
  FeatureSpec features;
};

/// Everything a pipeline run depends on. Relative paths in a config file are resolved
/// against the file's directory.
struct RunConfig {
  fs::path out_dir = "out";
  std::optional<fs::path> dataset_dir;  // external dataset; otherwise <out>/dataset from `gen`
  std::uint64_t seed = 20191201;
  std::vector<std::string> patterns = default_patterns();
  int threshold = 3;
  std::string start_date = "2019-12-01";
  int n_days = 88;
  PhaseThresholds phases;
  GroupCaps caps;
  RegressionConfig regression;
  std::vector<ShockEvent> events = default_events();
  std::vector<double> hysteresis_factors = default_hysteresis_factors();
  SimConfig simulator;
  unsigned jobs = default_jobs();

  Calendar calendar() const { return Calendar::from_dates(start_date, n_days); }

  void validate() const {
    if (threshold < 1) throw ConfigError("threshold must be >= 1");
    if (n_days < 1) throw ConfigError("n_days must be >= 1");
    if (patterns.empty()) throw ConfigError("pattern set is empty");
    for (double v : {phases.onset_growth, phases.onset_national, phases.peak_growth, phases.peak_share,
                     phases.peak_national, phases.post_peak_growth, phases.post_peak_share}) {
      if (!(v > 0.0)) throw ConfigError("phase thresholds must be positive");
    }
    if (phases.post_peak_days < 1) throw ConfigError("post_peak_days must be >= 1");
    if (caps.family < 1 || caps.schoolmate < 1 || caps.workmate < 1) {
      throw ConfigError("caps must be >= 1");
    }
    if (regression.sample_size < 1) throw ConfigError("regression sample_size must be >= 1");
    if (regression.max_percent < 1 || regression.max_percent > 100) {
      throw ConfigError("regression max_percent must lie in [1,100]");
    }
    if (regression.fit.max_iter < 1 || !(regression.fit.tolerance > 0)) {
      throw ConfigError("invalid regression fit settings");
    }
    for (double f : hysteresis_factors) {
      if (!(f > 0)) throw ConfigError("hysteresis factors must be positive");
    }
    try {
      (void)calendar();
      for (const auto& e : events) (void)e.timestamp();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    simulator.validate();
  }
};

namespace pipeline_detail {

using nlohmann::json;
using sim_detail::read_opt;
using sim_detail::reject_unknown;

/// Parses JSON text, reporting syntax errors with a 1-based line number.
inline json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + static_cast<std::size_t>(
                              std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto > 0 ? upto - 1 : 0), '\n'));
    std::string what = e.what();
    if (auto p = what.find("parse error"); p != std::string::npos) what = what.substr(p);
    throw ConfigError(source + ":" + std::to_string(line) + ": " + what);
  }
}

inline json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path.string());
}

inline fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace pipeline_detail

inline PhaseThresholds phase_thresholds_from_json(const nlohmann::json& j) {
  using namespace pipeline_detail;
  if (!j.is_object()) throw ConfigError("phase thresholds must be an object");
  reject_unknown(j,
                 {"onset_growth", "onset_national", "peak_growth", "peak_share", "peak_national",
                  "post_peak_growth", "post_peak_share", "post_peak_days"},
                 "phase thresholds");
  PhaseThresholds t;
  read_opt(j, "onset_growth", t.onset_growth);
  read_opt(j, "onset_national", t.onset_national);
  read_opt(j, "peak_growth", t.peak_growth);
  read_opt(j, "peak_share", t.peak_share);
  read_opt(j, "peak_national", t.peak_national);
  read_opt(j, "post_peak_growth", t.post_peak_growth);
  read_opt(j, "post_peak_share", t.post_peak_share);
  read_opt(j, "post_peak_days", t.post_peak_days);
  return t;
}

inline nlohmann::json to_json(const PhaseThresholds& t) {
  return {{"onset_growth", t.onset_growth},       {"onset_national", t.onset_national},
          {"peak_growth", t.peak_growth},         {"peak_share", t.peak_share},
          {"peak_national", t.peak_national},     {"post_peak_growth", t.post_peak_growth},
          {"post_peak_share", t.post_peak_share}, {"post_peak_days", t.post_peak_days}};
}

/// Builds a RunConfig from parsed JSON; `base` resolves relative paths.
inline RunConfig run_config_from_json(const nlohmann::json& j, const fs::path& base = {}) {
  using namespace pipeline_detail;
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  reject_unknown(j,
                 {"out_dir", "dataset_dir", "seed", "patterns", "patterns_file", "threshold",
                  "start_date", "n_days", "phase_thresholds", "caps", "regression", "events",
                  "hysteresis_factors", "simulator", "jobs"},
                 "run config");
  RunConfig c;
  if (auto it = j.find("simulator"); it != j.end()) {
    if (it->is_string()) {
      c.simulator = sim_config_from_json(read_json_file(resolve(base, it->get<std::string>())));
    } else {
      c.simulator = sim_config_from_json(*it);
    }
  }
  c.events = c.simulator.events;
  c.caps = c.simulator.caps;
  std::string s;
  if (j.contains("out_dir")) {
    read_opt(j, "out_dir", s);
    c.out_dir = resolve(base, s);
  }
  if (j.contains("dataset_dir")) {
    read_opt(j, "dataset_dir", s);
    c.dataset_dir = resolve(base, s);
  }
  read_opt(j, "seed", c.seed);
  read_opt(j, "patterns", c.patterns);
  if (j.contains("patterns_file")) {
    read_opt(j, "patterns_file", s);
    c.patterns = read_patterns_file(resolve(base, s));
  }
  read_opt(j, "threshold", c.threshold);
  read_opt(j, "start_date", c.start_date);
  read_opt(j, "n_days", c.n_days);
  if (auto it = j.find("phase_thresholds"); it != j.end()) c.phases = phase_thresholds_from_json(*it);
  if (auto it = j.find("caps"); it != j.end()) {
    reject_unknown(*it, {"family", "schoolmate", "workmate"}, "caps");
    read_opt(*it, "family", c.caps.family);
    read_opt(*it, "schoolmate", c.caps.schoolmate);
    read_opt(*it, "workmate", c.caps.workmate);
  }
  if (auto it = j.find("regression"); it != j.end()) {
    reject_unknown(*it,
                   {"sample_size", "max_percent", "max_iter", "tolerance", "ridge_lambda",
                    "age_brackets", "network"},
                   "regression");
    read_opt(*it, "sample_size", c.regression.sample_size);
    read_opt(*it, "max_percent", c.regression.max_percent);
    read_opt(*it, "max_iter", c.regression.fit.max_iter);
    read_opt(*it, "tolerance", c.regression.fit.tolerance);
    read_opt(*it, "ridge_lambda", c.regression.fit.ridge_lambda_fallback);
    read_opt(*it, "age_brackets", c.regression.features.age_brackets);
    read_opt(*it, "network", c.regression.features.network);
  }
  if (auto it = j.find("events"); it != j.end()) c.events = events_from_json(*it);
  c.simulator.events = c.events;
  read_opt(j, "hysteresis_factors", c.hysteresis_factors);
  unsigned jobs = 0;
  read_opt(j, "jobs", jobs);
  if (jobs > 0) c.jobs = jobs;
  c.validate();
  return c;
}

inline RunConfig load_run_config(const fs::path& path) {
  return run_config_from_json(pipeline_detail::read_json_file(path), path.parent_path());
}

/// Canonical form of the settings that determine outputs; excludes paths and jobs.
inline nlohmann::json canonical_config(const RunConfig& c) {
  SimConfig sim = c.simulator;
  sim.rng_seed = c.seed;
  return {{"seed", c.seed},
          {"patterns", c.patterns},
          {"threshold", c.threshold},
          {"start_date", c.start_date},
          {"n_days", c.n_days},
          {"phase_thresholds", to_json(c.phases)},
          {"caps", {{"family", c.caps.family}, {"schoolmate", c.caps.schoolmate}, {"workmate", c.caps.workmate}}},
          {"regression",
           {{"sample_size", c.regression.sample_size},
            {"max_percent", c.regression.max_percent},
            {"max_iter", c.regression.fit.max_iter},
            {"tolerance", c.regression.fit.tolerance},
            {"ridge_lambda", c.regression.fit.ridge_lambda_fallback},
            {"age_brackets", c.regression.features.age_brackets},
            {"network", c.regression.features.network}}},
          {"events", to_json(c.events)},
          {"hysteresis_factors", c.hysteresis_factors},
          {"simulator", to_json(sim)}};
}

// ---------------------------------------------------------------------------

inline const std::vector<std::string>& pipeline_steps() {
  static const std::vector<std::string> kSteps{"gen",     "infer-net", "label",   "segment",
                                               "cohort",  "geo-corr",  "regress", "report"};
  return kSteps;
}

/// Phase table reader, the inverse of the segment step's phases.tsv.
inline PhaseSegmentation read_phases(const fs::path& path) {
  const Table t = read_tsv(path);
  const auto c_phase = t.column("phase"), c_start = t.column("start_day"), c_end = t.column("end_day"),
             c_status = t.column("status");
  PhaseSegmentation seg;
  for (const auto& row : t.rows) {
    if (row[c_status] == "truncated") seg.truncated = true;
    if (row[c_start] == "NA") continue;
    auto phase = parse_enum<Phase>(row[c_phase], kPhaseNames);
    if (!phase) throw ParseError(path.string(), 0, "unknown phase '" + row[c_phase] + "'");
    seg.spans.push_back({*phase, std::stoi(row[c_start]), std::stoi(row[c_end])});
  }
  return seg;
}

/// Runs pipeline steps over one output directory. Intermediate results are kept in
/// memory so `all` reads nothing back from disk; single steps load upstream artifacts.
class Pipeline {
 public:
  explicit Pipeline(RunConfig cfg) : cfg_(std::move(cfg)), cal_(cfg_.calendar()) {
    cfg_.simulator.rng_seed = cfg_.seed;
    cfg_.simulator.start_date = cfg_.start_date;
    cfg_.simulator.n_days = cfg_.n_days;
    cfg_.simulator.caps = cfg_.caps;
    config_digest_ = hex64(fnv1a64(canonical_config(cfg_).dump()));
    const fs::path mpath = cfg_.out_dir / "manifest.json";
    if (fs::exists(mpath)) {
      std::ifstream in(mpath);
      manifest_ = nlohmann::json::parse(in, nullptr, false);
      if (manifest_.is_discarded() || manifest_.value("config_digest", "") != config_digest_) {
        manifest_ = nlohmann::json::object();
      }
    }
  }

  const RunConfig& config() const { return cfg_; }
  fs::path out(const std::string& rel) const { return cfg_.out_dir / rel; }

  /// Runs one named step, or every step for "all".
  void run(const std::string& step) {
    if (step == "all") {
      for (const auto& s : pipeline_steps()) {
        if (s == "gen" && cfg_.dataset_dir) continue;
        run(s);
      }
      return;
    }
    fs::create_directories(cfg_.out_dir);
    inputs_.clear();
    outputs_.clear();
    if (step == "gen") {
      gen();
    } else if (step == "infer-net") {
      infer_net();
    } else if (step == "label") {
      label();
    } else if (step == "segment") {
      segment();
    } else if (step == "cohort") {
      cohort_step();
    } else if (step == "geo-corr") {
      geo_corr();
    } else if (step == "regress") {
      regress();
    } else if (step == "report") {
      report();
    } else {
      throw ConfigError("unknown subcommand '" + step + "'");
    }
    record(step);
  }

 private:
  // ---- artifact bookkeeping -------------------------------------------------

  std::string rel_name(const fs::path& p) const {
    const auto rel = p.lexically_relative(cfg_.out_dir);
    if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
    return "external/" + p.filename().string();
  }

  std::string digest(const fs::path& p) {
    const std::string key = p.string();
    auto it = digests_.find(key);
    if (it != digests_.end()) return it->second;
    return digests_[key] = file_digest(p);
  }

  void input(const fs::path& p) { inputs_[rel_name(p)] = digest(p); }

  void output(const fs::path& p) {
    digests_.erase(p.string());
    outputs_[rel_name(p)] = digest(p);
  }

  void record(const std::string& step) {
    manifest_["seed"] = cfg_.seed;
    manifest_["config_digest"] = config_digest_;
    manifest_["steps"][step] = {{"inputs", inputs_}, {"outputs", outputs_}};
    const fs::path path = out("manifest.json");
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ExitCode::kDataIntegrity, "cannot write " + path.string());
    os << manifest_.dump(2) << '\n';
  }

  void require(const fs::path& p, const std::string& artifact, const std::string& producer) const {
    if (!fs::exists(p)) throw MissingArtifactError(artifact + " (" + p.string() + ")", producer);
  }

  fs::path dataset_dir() const { return cfg_.dataset_dir ? *cfg_.dataset_dir : out("dataset"); }

  // ---- lazily loaded state --------------------------------------------------

  const Dataset& dataset() {
    const auto paths = DatasetPaths::in_dir(dataset_dir());
    for (const auto& p : {paths.population, paths.regions, paths.addresses, paths.events}) {
      require(p, "dataset", "gen");
      input(p);
    }
    if (!dataset_) dataset_ = load_dataset(paths, cal_);
    return *dataset_;
  }

  /// Individuals and regions only; enough for every step after `label`.
  const Dataset& people() {
    const auto paths = DatasetPaths::in_dir(dataset_dir());
    for (const auto& p : {paths.population, paths.regions}) {
      require(p, "dataset", "gen");
      input(p);
    }
    if (dataset_) return *dataset_;
    if (!people_) {
      Dataset ds;
      ds.calendar = cal_;
      ds.individuals = read_population(paths.population);
      ds.regions = read_regions(paths.regions);
      ds.sort_canonical();
      people_ = std::move(ds);
    }
    return *people_;
  }

  const MultiplexGraph& graph() {
    const fs::path p = out("network/layers.tsv");
    require(p, "network layers", "infer-net");
    input(p);
    if (!graph_) graph_ = read_layer_dump(p, people().ids());
    return *graph_;
  }

  const LoadedTimeline& timeline() {
    const fs::path p = out("labels/timeline.tsv");
    require(p, "awareness timeline", "label");
    input(p);
    if (!timeline_) {
      timeline_ = read_timeline(p);
      if (timeline_->timeline.ids() != people().ids()) {
        throw IntegrityError("timeline ids do not match the dataset population");
      }
    }
    return *timeline_;
  }

  const std::vector<std::size_t>& qualified_cohort() {
    if (cohort_.empty()) {
      const auto& q = timeline().qualified;
      for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i]) cohort_.push_back(i);
      }
      if (cohort_.empty()) throw UndefinedCohortError("no qualified individuals in the dataset");
    }
    return cohort_;
  }

  const PhaseSegmentation& phases() {
    const fs::path p = out("segment/phases.tsv");
    require(p, "phase table", "segment");
    input(p);
    if (!phases_) phases_ = read_phases(p);
    return *phases_;
  }

  std::string date_of_day(int d) const { return cal_.date_label(d); }

  // ---- steps ----------------------------------------------------------------

  void gen() {
    Simulation sim = simulate(cfg_.simulator, cfg_.jobs);
    const fs::path dir = out("dataset");
    fs::create_directories(dir);
    fs::create_directories(out("truth"));
    const auto paths = DatasetPaths::in_dir(dir);
    write_dataset(paths, sim.dataset);
    {
      std::ofstream os(dir / "sim_config.json", std::ios::binary | std::ios::trunc);
      os << to_json(cfg_.simulator).dump(2) << '\n';
    }
    std::vector<std::uint8_t> qualified;
    for (const auto& ind : sim.dataset.individuals) qualified.push_back(ind.qualified ? 1 : 0);
    write_timeline(out("truth/first_aware.tsv"), sim.truth.first_aware, qualified);
    write_layer_dump(out("truth/layers.tsv"), sim.truth.graph);
    for (const auto& p : {paths.population, paths.regions, paths.addresses, paths.events,
                          dir / "sim_config.json", out("truth/first_aware.tsv"), out("truth/layers.tsv")}) {
      output(p);
    }
    if (!cfg_.dataset_dir) {
      dataset_ = std::move(sim.dataset);
      people_.reset();
    }
  }

  void infer_net() {
    const Dataset& ds = dataset();
    MultiplexGraph g = infer_networks(ds.addresses, cfg_.caps, ds.ids());
    fs::create_directories(out("network"));
    write_layer_dump(out("network/layers.tsv"), g);
    TsvWriter t(out("network/summary.tsv"), {"layer", "edges", "nodes_with_neighbors", "mean_degree"});
    for (Layer l : kLayers) {
      std::size_t with = 0;
      for (std::size_t i = 0; i < g.node_count(); ++i) with += g.degree(l, static_cast<NodeIndex>(i)) > 0;
      const double mean = g.node_count() ? 2.0 * static_cast<double>(g.edge_count(l)) / static_cast<double>(g.node_count()) : 0.0;
      t.cell(to_string(l)).cell(g.edge_count(l)).cell(with).cell(mean);
      t.end_row();
    }
    t.close();
    output(out("network/layers.tsv"));
    output(out("network/summary.tsv"));
    graph_ = std::move(g);
  }

  void label() {
    const Dataset& ds = dataset();
    const QueryMatcher matcher = compile_query_set(cfg_.patterns);
    const auto ids = ds.ids();
    AwarenessTimeline tl =
        label_awareness(ids, ds.events.queries, matcher, cal_, cfg_.threshold, cfg_.jobs);
    auto qualified = filter_qualified(ds.individuals, ds.events.purchases,
                                      QualificationWindow::before(cal_.start()));
    fs::create_directories(out("labels"));
    write_timeline(out("labels/timeline.tsv"), tl, qualified);
    output(out("labels/timeline.tsv"));
    timeline_ = LoadedTimeline{std::move(tl), std::move(qualified)};
    cohort_.clear();

    const auto& coh = qualified_cohort();
    const DailyCounts dc = daily_counts(timeline_->timeline, coh, cal_);
    TsvWriter t(out("labels/daily_counts.tsv"), {"day", "date", "new_aware", "cumulative", "percentage"});
    for (int d = 0; d < cal_.size(); ++d) {
      const auto k = static_cast<std::size_t>(d);
      t.cell(d).cell(date_of_day(d)).cell(dc.new_aware[k]).cell(dc.cumulative[k]);
      t.cell(static_cast<double>(dc.cumulative[k]) / static_cast<double>(coh.size()));
      t.end_row();
    }
    t.close();
    output(out("labels/daily_counts.tsv"));
  }

  void write_trend(TsvWriter& t, const TrendSeries& ts) {
    for (std::size_t g = 0; g < ts.names.size(); ++g) {
      for (int d = 0; d < cal_.size(); ++d) {
        t.cell(ts.grouping).cell(d).cell(ts.names[g]).cell(ts.values[g][static_cast<std::size_t>(d)]);
        t.end_row();
      }
    }
  }

  TrendSeries trend(Grouping g) {
    const Dataset& ds = people();
    return group_trend(timeline().timeline, qualified_cohort(), group_labels(ds, g), cal_,
                       std::string(kGroupingNames[static_cast<std::size_t>(g)]));
  }

  void segment() {
    const auto& tl = timeline().timeline;
    const TrendSeries prov = trend(Grouping::kProvince);
    std::vector<std::vector<double>> series;
    for (std::size_t p = 0; p < prov.names.size(); ++p) {
      if (prov.sizes[p] > 0) series.push_back(prov.values[p]);
    }
    const auto national = national_series(tl, qualified_cohort(), cal_);
    const PhaseSegmentation seg = segment_phases(series, national, cfg_.phases);

    fs::create_directories(out("segment"));
    {
      TsvWriter t(out("segment/phases.tsv"), {"phase", "start_day", "end_day", "start_date", "end_date", "status"});
      for (std::size_t k = 0; k < kPhaseNames.size(); ++k) {
        const auto phase = static_cast<Phase>(k);
        const PhaseSpan* span = nullptr;
        for (const auto& s : seg.spans) {
          if (s.phase == phase) span = &s;
        }
        t.cell(kPhaseNames[k]);
        if (span) {
          const bool last = span == &seg.spans.back();
          t.cell(span->start_day).cell(span->end_day).cell(date_of_day(span->start_day));
          t.cell(date_of_day(span->end_day)).cell(last && seg.truncated ? "truncated" : "present");
        } else {
          t.cell("NA").cell("NA").cell("NA").cell("NA").cell("absent");
        }
        t.end_row();
      }
      t.close();
    }
    {
      TsvWriter t(out("segment/national_series.tsv"), {"day", "date", "percentage", "growth_rate"});
      const auto growth = growth_rates(national);
      for (int d = 0; d < cal_.size(); ++d) {
        const auto k = static_cast<std::size_t>(d);
        t.cell(d).cell(date_of_day(d)).cell(national[k]).cell(growth[k]);
        t.end_row();
      }
      t.close();
    }
    {
      TsvWriter t(out("segment/province_series.tsv"), {"day", "group", "percentage", "growth_rate"});
      for (std::size_t p = 0; p < prov.names.size(); ++p) {
        const auto growth = growth_rates(prov.values[p]);
        for (int d = 0; d < cal_.size(); ++d) {
          const auto k = static_cast<std::size_t>(d);
          t.cell(d).cell(prov.names[p]).cell(prov.values[p][k]).cell(growth[k]);
          t.end_row();
        }
      }
      t.close();
    }
    for (const char* f : {"segment/phases.tsv", "segment/national_series.tsv", "segment/province_series.tsv"}) {
      output(out(f));
    }
    phases_ = seg;
  }

  void cohort_step_trends(const std::vector<TrendSeries>& trends) {
    TsvWriter t(out("cohort/trends.tsv"), {"grouping", "day", "group", "value"});
    for (const auto& ts : trends) write_trend(t, ts);
    t.close();
    output(out("cohort/trends.tsv"));

    TsvWriter g(out("cohort/growth_rates.tsv"), {"grouping", "day", "group", "value"});
    for (const auto& ts : trends) {
      for (std::size_t k = 0; k < ts.names.size(); ++k) {
        const auto rates = growth_rates(ts.values[k]);
        for (int d = 0; d < cal_.size(); ++d) {
          g.cell(ts.grouping).cell(d).cell(ts.names[k]).cell(rates[static_cast<std::size_t>(d)]);
          g.end_row();
        }
      }
    }
    g.close();
    output(out("cohort/growth_rates.tsv"));
  }

  void cohort_step() {
    const Dataset& ds = people();
    const auto& tl = timeline().timeline;
    const auto& coh = qualified_cohort();
    const PhaseSegmentation& seg = phases();
    const MultiplexGraph& g = graph();
    fs::create_directories(out("cohort"));

    // Reference group per grouping for cross-group ratios.
    const std::vector<std::pair<Grouping, std::string>> groupings{
        {Grouping::kGender, "male"},          {Grouping::kAgeBracket, "25_49"},
        {Grouping::kEducation, "bachelor"},   {Grouping::kOccupation, "white_collar"},
        {Grouping::kPurchasingPower, "4"},    {Grouping::kHasChild, "without_child"},
        {Grouping::kMarried, "unmarried"},    {Grouping::kProvince, ""}};
    std::vector<TrendSeries> trends;
    for (const auto& [grouping, ref] : groupings) trends.push_back(trend(grouping));
    cohort_step_trends(trends);

    {
      TsvWriter t(out("cohort/cross_group_ratios.tsv"), {"grouping", "day", "group", "reference", "value"});
      for (std::size_t k = 0; k < groupings.size(); ++k) {
        const auto& [grouping, ref] = groupings[k];
        if (ref.empty()) continue;
        const GroupLabels labels = group_labels(ds, grouping);
        std::vector<std::vector<std::size_t>> members(labels.names.size());
        for (std::size_t i : coh) members[labels.group_of[i]].push_back(i);
        const auto r = static_cast<std::size_t>(
            std::find(labels.names.begin(), labels.names.end(), ref) - labels.names.begin());
        for (std::size_t gi = 0; gi < labels.names.size(); ++gi) {
          if (gi == r) continue;
          for (int d = 0; d < cal_.size(); ++d) {
            double v = kUndefined;
            if (r < members.size() && !members[r].empty() && !members[gi].empty()) {
              v = cross_group_ratio(tl, members[gi], members[r], cal_.day_end(d) - 1);
            }
            t.cell(trends[k].grouping).cell(d).cell(labels.names[gi]).cell(ref).cell(v);
            t.end_row();
          }
        }
      }
      t.close();
      output(out("cohort/cross_group_ratios.tsv"));
    }

    {
      TsvWriter t(out("cohort/neighborhood_ratio.tsv"),
                  {"layer", "day", "ratio", "aware_mean", "unaware_mean", "status"});
      TsvWriter m(out("cohort/neighborhood_phase_means.tsv"), {"layer", "phase", "mean_ratio"});
      for (Layer l : kLayers) {
        std::vector<NeighborhoodRatio> per_day(static_cast<std::size_t>(cal_.size()));
        parallel_for(per_day.size(), cfg_.jobs, [&](std::size_t d) {
          per_day[d] = neighborhood_awareness_ratio(g, l, tl, cal_.day_end(static_cast<int>(d)) - 1, coh);
        });
        std::vector<double> ratios;
        for (int d = 0; d < cal_.size(); ++d) {
          const auto& r = per_day[static_cast<std::size_t>(d)];
          ratios.push_back(r.ratio);
          t.cell(to_string(l)).cell(d).cell(r.ratio).cell(r.aware_mean).cell(r.unaware_mean);
          t.cell(kRatioStatusNames[static_cast<std::size_t>(r.status)]);
          t.end_row();
        }
        const auto means = phase_means(ratios, seg);
        for (std::size_t k = 0; k < seg.spans.size(); ++k) {
          m.cell(to_string(l)).cell(to_string(seg.spans[k].phase)).cell(means[k]);
          m.end_row();
        }
      }
      t.close();
      m.close();
      output(out("cohort/neighborhood_ratio.tsv"));
      output(out("cohort/neighborhood_phase_means.tsv"));
    }

    {
      const GroupLabels occ = group_labels(ds, Grouping::kOccupation);
      TsvWriter t(out("cohort/aware_purchasing_power.tsv"), {"day", "group", "value"});
      for (int d = 0; d < cal_.size(); ++d) {
        const auto v = aware_purchasing_power(tl, ds.individuals, coh, occ, cal_.day_end(d) - 1);
        for (std::size_t k = 0; k < v.size(); ++k) {
          t.cell(d).cell(occ.names[k]).cell(v[k]);
          t.end_row();
        }
      }
      t.close();
      output(out("cohort/aware_purchasing_power.tsv"));
    }

    {
      const auto times = aware_times(tl, coh);
      TsvWriter t(out("cohort/hysteresis.tsv"), {"event", "date", "baseline", "factor", "seconds", "hours"});
      for (const auto& ev : cfg_.events) {
        const Timestamp ts = ev.timestamp();
        const auto base = static_cast<std::int64_t>(
            std::upper_bound(times.begin(), times.end(), ts) - times.begin());
        std::vector<std::optional<std::int64_t>> dur(cfg_.hysteresis_factors.size());
        if (base > 0) dur = hysteresis(times, ts, cfg_.hysteresis_factors);
        for (std::size_t k = 0; k < dur.size(); ++k) {
          t.cell(ev.label).cell(ev.date).cell(base).cell(cfg_.hysteresis_factors[k]);
          if (dur[k]) {
            t.cell(*dur[k]).cell(static_cast<double>(*dur[k]) / 3600.0);
          } else {
            t.cell("NA").cell("NA");
          }
          t.end_row();
        }
      }
      t.close();
      output(out("cohort/hysteresis.tsv"));
    }

    {
      TsvWriter t(out("cohort/lead_days.tsv"), {"factor_a", "factor_b", "a_leads", "b_leads", "ties", "defined_days"});
      const TrendSeries& occ = trends[3];
      const TrendSeries& pp = trends[4];
      const LeadDays ld = lead_days(occ, pp);
      t.cell(occ.grouping).cell(pp.grouping).cell(ld.a_leads).cell(ld.b_leads).cell(ld.ties).cell(ld.defined_days);
      t.end_row();
      t.close();
      output(out("cohort/lead_days.tsv"));
    }
  }

  void geo_corr() {
    const Dataset& ds = people();
    const auto& tl = timeline().timeline;
    const auto& coh = qualified_cohort();
    fs::create_directories(out("geo"));
    TsvWriter t(out("geo/correlation.tsv"), {"level", "factor", "day", "date", "rho"});
    for (GeoLevel level : {GeoLevel::kCity, GeoLevel::kProvince}) {
      const GeoUnits units = geo_units(ds, level);
      const auto awareness = geo_awareness(ds, units, tl, coh, cal_);
      for (std::size_t f = 0; f < kGeoFactorNames.size(); ++f) {
        const auto factor = static_cast<GeoFactor>(f);
        const auto rho = geo_correlation_series(awareness, cal_.size(), [&](std::size_t u, int d) {
          return geo_factor_value(ds, units.cities[u], factor, d);
        });
        for (int d = 0; d < cal_.size(); ++d) {
          t.cell(level == GeoLevel::kCity ? "city" : "province").cell(kGeoFactorNames[f]).cell(d);
          t.cell(date_of_day(d)).cell(rho[static_cast<std::size_t>(d)]);
          t.end_row();
        }
      }
    }
    t.close();
    output(out("geo/correlation.tsv"));
  }

  void regress() {
    const Dataset& ds = people();
    const auto& tl = timeline().timeline;
    const auto& coh = qualified_cohort();
    const MultiplexGraph& g = graph();
    const PhaseSegmentation& seg = phases();

    const std::size_t n = std::max<std::size_t>(1, std::min(cfg_.regression.sample_size, coh.size() / 2));
    auto sample = draw_sample(coh, n, cfg_.seed);
    const DesignBuilder builder(ds, g, tl, std::move(sample), cfg_.regression.features);
    const auto times = aware_times(tl, coh);
    const CheckpointSchedule schedule =
        checkpoint_schedule(times, coh.size(), cfg_.events, cfg_.regression.max_percent);
    const auto models = run_time_evolving(builder, schedule.entries, cfg_.regression.fit, cfg_.jobs);

    fs::create_directories(out("regress"));
    {
      TsvWriter t(out("regress/schedule.tsv"), {"checkpoint", "trigger", "time", "date", "percent"});
      for (std::size_t k = 0; k < schedule.entries.size(); ++k) {
        const auto& c = schedule.entries[k];
        t.cell(k).cell(c.trigger).cell(c.time).cell(format_local_date(c.time)).cell(c.percent);
        t.end_row();
      }
      t.close();
    }
    {
      TsvWriter t(out("regress/models.tsv"),
                  {"checkpoint", "trigger", "feature", "coefficient", "std_error", "odds_ratio",
                   "p_value", "ridge_flag", "status"});
      for (std::size_t k = 0; k < models.size(); ++k) {
        const auto& m = models[k];
        for (std::size_t j = 0; j < m.features.size(); ++j) {
          t.cell(k).cell(m.checkpoint.trigger).cell(m.features[j]);
          t.cell(m.coefficients[j]).cell(m.std_errors[j]).cell(m.odds_ratios[j]).cell(m.p_values[j]);
          t.cell(m.error ? "NA" : (m.ridge ? "1" : "0"));
          t.cell(m.error ? "failed" : (m.used[j] ? "ok" : "constant_column"));
          t.end_row();
        }
      }
      t.close();
    }
    {
      TsvWriter t(out("regress/fits.tsv"),
                  {"checkpoint", "trigger", "time", "prevalence", "iterations", "converged", "ridge_flag", "error"});
      for (std::size_t k = 0; k < models.size(); ++k) {
        const auto& m = models[k];
        t.cell(k).cell(m.checkpoint.trigger).cell(m.checkpoint.time).cell(m.prevalence).cell(m.iterations);
        t.cell(m.converged ? "1" : "0").cell(m.ridge ? "1" : "0").cell(m.error ? *m.error : std::string("NA"));
        t.end_row();
      }
      t.close();
    }
    {
      const auto profile = typical_profile(models, seg, cal_);
      TsvWriter t(out("regress/profile.tsv"), {"phase", "models", "feature", "direction"});
      for (const auto& p : profile) {
        for (const auto& f : p.features) {
          t.cell(to_string(p.phase)).cell(p.models).cell(f.feature).cell(f.direction > 0 ? "OR>1" : "OR<1");
          t.end_row();
        }
      }
      t.close();
    }
    for (const char* f : {"regress/schedule.tsv", "regress/models.tsv", "regress/fits.tsv", "regress/profile.tsv"}) {
      output(out(f));
    }
  }

  void report() {
    using nlohmann::json;
    auto load = [&](const char* rel, const char* producer) {
      const fs::path p = out(rel);
      require(p, rel, producer);
      input(p);
      return read_tsv(p);
    };
    auto rows_as_json = [](const Table& t) {
      json arr = json::array();
      for (const auto& row : t.rows) {
        json obj = json::object();
        for (std::size_t j = 0; j < t.header.size(); ++j) obj[t.header[j]] = row[j];
        arr.push_back(std::move(obj));
      }
      return arr;
    };
    const Table daily = load("labels/daily_counts.tsv", "label");
    const Table phases_t = load("segment/phases.tsv", "segment");
    const Table net = load("network/summary.tsv", "infer-net");
    const Table hyst = load("cohort/hysteresis.tsv", "cohort");
    const Table lead = load("cohort/lead_days.tsv", "cohort");
    const Table nbr = load("cohort/neighborhood_phase_means.tsv", "cohort");
    (void)load("geo/correlation.tsv", "geo-corr");
    const Table fits = load("regress/fits.tsv", "regress");
    const Table profile = load("regress/profile.tsv", "regress");

    std::size_t fitted = 0, ridge = 0;
    for (const auto& r : fits.rows) {
      if (r[fits.column("error")] == "NA") ++fitted;
      if (r[fits.column("ridge_flag")] == "1") ++ridge;
    }
    json summary = {
        {"seed", cfg_.seed},
        {"config_digest", config_digest_},
        {"window", {{"start", cfg_.start_date}, {"days", cfg_.n_days}}},
        {"final_day", rows_as_json(daily).back()},
        {"network", rows_as_json(net)},
        {"phases", rows_as_json(phases_t)},
        {"neighborhood_phase_means", rows_as_json(nbr)},
        {"hysteresis", rows_as_json(hyst)},
        {"lead_days", rows_as_json(lead)},
        {"regression", {{"checkpoints", fits.rows.size()}, {"fitted", fitted}, {"ridge", ridge}}},
        {"profile", rows_as_json(profile)}};
    fs::create_directories(out("report"));
    const fs::path p = out("report/summary.json");
    {
      std::ofstream os(p, std::ios::binary | std::ios::trunc);
      if (!os) throw Error(ExitCode::kDataIntegrity, "cannot write " + p.string());
      os << summary.dump(2) << '\n';
    }
    output(p);
  }

  RunConfig cfg_;
  Calendar cal_;
  std::string config_digest_;
  nlohmann::json manifest_ = nlohmann::json::object();
  std::map<std::string, std::string> inputs_, outputs_, digests_;

  std::optional<Dataset> dataset_, people_;
  std::optional<MultiplexGraph> graph_;
  std::optional<LoadedTimeline> timeline_;
  std::vector<std::size_t> cohort_;
  std::optional<PhaseSegmentation> phases_;
};

}  // namespace cryptic
