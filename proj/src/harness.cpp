#include "comet/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "comet/parallel.hpp"

namespace comet {

namespace {

constexpr std::array<std::pair<Method, std::string_view>, 6> kMethodNames = {{
    {Method::kComet, "comet"},
    {Method::kFir, "fir"},
    {Method::kRandom, "rr"},
    {Method::kCometLight, "cl"},
    {Method::kActiveClean, "ac"},
    {Method::kOracle, "oracle"},
}};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int budget_units(double budget) { return static_cast<int>(std::floor(budget + 1e-9)); }

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

SessionConfig session_config(const ExperimentConfig& config, const ModelSpec& spec, std::uint64_t seed) {
  SessionConfig c;
  c.spec = spec;
  c.costs = config.costs;
  c.budget = config.budget;
  c.error_types = scenario_errors(config);
  c.estimator = config.estimator;
  c.seed = seed;
  return c;
}

BaselineConfig baseline_config(const ExperimentConfig& config, const ModelSpec& spec, std::uint64_t seed) {
  return {spec, config.costs, config.budget, seed, scenario_errors(config)};
}

void run_comet(Session& session, MethodRun& run, MethodTiming& timing, bool collect_pairs) {
  while (!session.terminal()) {
    const auto start = Clock::now();
    const auto record = session.run_iteration();
    timing.iteration_seconds.push_back(seconds_since(start));
    if (!record) break;
  }
  const SessionState& s = session.state();
  run.curve = s.trajectory;
  run.spent = s.ledger.spent();
  run.steps = s.ledger.entries().size();
  if (!collect_pairs) return;
  for (const IterationRecord& r : s.records) {
    for (const Attempt& a : r.attempts) {
      if (a.outcome == StepOutcome::kRejected) continue;
      run.pairs.push_back({a.key, a.predicted, a.raw_predicted, a.f1_after});
    }
  }
}

void run_method(const ExperimentConfig& config, Method method, Dataset data, const ModelSpec& spec,
                std::uint64_t seed, MethodRun& run, MethodTiming& timing) {
  run.method = method;
  run.start_fingerprint = fingerprint(data);
  const auto start = Clock::now();
  switch (method) {
    case Method::kComet:
    case Method::kCometLight: {
      SessionConfig c = session_config(config, spec, seed);
      c.frozen_ranking = method == Method::kCometLight;
      Session session(std::move(data), c);
      run_comet(session, run, timing, method == Method::kComet);
      break;
    }
    case Method::kFir: {
      const BaselineResult r = fir_session(std::move(data), baseline_config(config, spec, seed), config.shapley);
      run.curve = r.trajectory;
      run.spent = r.ledger.spent();
      run.steps = r.steps.size();
      break;
    }
    case Method::kRandom: {
      const RandomResult r = rr_session(data, baseline_config(config, spec, seed), config.rr_repeats);
      run.curve = r.mean;
      double spent = 0.0;
      for (const BaselineResult& rep : r.repeats) {
        spent += rep.ledger.spent();
        run.steps += rep.steps.size();
      }
      run.spent = spent / static_cast<double>(r.repeats.size());
      break;
    }
    case Method::kActiveClean: {
      const ActiveCleanResult r = ac_session(std::move(data), baseline_config(config, spec, seed));
      run.curve = r.trajectory;
      run.spent = r.ledger.spent();
      run.steps = r.batches.size();
      break;
    }
    case Method::kOracle: {
      const OracleResult r = oracle_session(std::move(data), baseline_config(config, spec, seed));
      run.curve = r.trajectory;
      run.spent = r.ledger.spent();
      run.steps = r.iterations.size();
      break;
    }
  }
  timing.total_seconds = seconds_since(start);
  run.ok = true;
}

// Cleans every dirty cell from the truth store.
Dataset cleaned_copy(const Dataset& data) {
  Dataset out = data;
  for (FeatureId f = 0; f < out.num_features(); ++f) {
    std::vector<std::size_t> rows;
    const ColumnData& cells = out.feature(f).cells;
    for (std::size_t r = 0; r < cells.size(); ++r) {
      if (cells.is_dirty(r)) rows.push_back(r);
    }
    clean_cells(out, f, rows);
  }
  return out;
}

void check_scenario(const ExperimentConfig& config, const Dataset& data) {
  if (config.multi_error) return;
  for (const Feature& f : data.features()) {
    if (!is_compatible(config.error, f.kind)) continue;
    if (config.error == ErrorType::kCategoricalShift && f.category_count() < 2) continue;
    return;
  }
  throw ConfigError("no feature can carry " + std::string(to_string(config.error)) + " errors");
}

Json method_run_json(const MethodRun& r) {
  Json pairs = Json::array();
  for (const PredictionPair& p : r.pairs) {
    pairs.push_back({{"key", p.key}, {"predicted", p.predicted}, {"raw_predicted", p.raw_predicted}, {"actual", p.actual}});
  }
  return {{"method", to_string(r.method)},
          {"ok", r.ok},
          {"error", r.error},
          {"start_fingerprint", r.start_fingerprint},
          {"curve", r.curve},
          {"spent", r.spent},
          {"steps", r.steps},
          {"pairs", pairs}};
}

MethodRun method_run_from(const Json& j) {
  MethodRun r;
  r.method = parse_method(j.at("method").get<std::string>());
  r.ok = j.at("ok").get<bool>();
  r.error = j.at("error").get<std::string>();
  r.start_fingerprint = j.at("start_fingerprint").get<std::uint64_t>();
  r.curve = j.at("curve").get<BudgetCurve>();
  r.spent = j.at("spent").get<double>();
  r.steps = j.at("steps").get<std::size_t>();
  for (const Json& p : j.at("pairs")) {
    r.pairs.push_back({p.at("key").get<CandidateKey>(), p.at("predicted").get<double>(),
                       p.at("raw_predicted").get<double>(), p.at("actual").get<double>()});
  }
  return r;
}

struct Group {
  std::vector<std::vector<double>> series;
};

std::vector<AdvantageSummary> summarize(const std::map<std::pair<std::string, Method>, Group>& groups) {
  std::vector<AdvantageSummary> out;
  for (const auto& [key, group] : groups) {
    AdvantageSummary s;
    s.group = key.first;
    s.contender = key.second;
    s.runs = group.series.size();
    s.per_unit = pointwise_mean(group.series);
    if (s.per_unit.size() > 1) {
      double sum = 0.0;
      for (std::size_t u = 1; u < s.per_unit.size(); ++u) sum += s.per_unit[u];
      s.mean = sum / static_cast<double>(s.per_unit.size() - 1);
    }
    if (!s.per_unit.empty()) s.final_value = s.per_unit.back();
    out.push_back(std::move(s));
  }
  return out;
}

Json advantage_json(const std::vector<AdvantageSummary>& rows) {
  Json a = Json::array();
  for (const AdvantageSummary& s : rows) {
    a.push_back({{"group", s.group},
                 {"contender", to_string(s.contender)},
                 {"runs", s.runs},
                 {"mean", s.mean},
                 {"final", s.final_value},
                 {"per_unit", s.per_unit}});
  }
  return a;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

std::string_view to_string(Method method) {
  for (const auto& [m, name] : kMethodNames) {
    if (m == method) return name;
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (const auto& [m, n] : kMethodNames) {
    if (n == name) return m;
  }
  throw InvalidArgument("unknown method '" + std::string(name) + "'");
}

std::string scenario_name(const ExperimentConfig& config) {
  return config.multi_error ? "multi" : std::string(to_string(config.error));
}

std::vector<ErrorType> scenario_errors(const ExperimentConfig& config) {
  if (config.multi_error) return {kAllErrorTypes.begin(), kAllErrorTypes.end()};
  return {config.error};
}

void validate(const ExperimentConfig& c) {
  if (!(c.budget > 0.0) || !std::isfinite(c.budget)) throw ConfigError("budget must be positive");
  if (c.algorithms.empty()) throw ConfigError("no algorithms listed");
  if (c.methods.empty()) throw ConfigError("no methods listed");
  if (c.seeds.empty()) throw ConfigError("no seeds listed");
  if (c.settings < 1) throw ConfigError("need at least one pre-pollution setting");
  if (!(c.pollution_mean > 0.0)) throw ConfigError("pre-pollution mean must be positive");
  if (!(c.pollution_cap >= 0.0 && c.pollution_cap <= 0.5)) throw ConfigError("pre-pollution cap must lie in [0, 0.5]");
  if (c.rr_repeats < 1) throw ConfigError("rr_repeats must be at least 1");
  if (c.search_samples < 0) throw ConfigError("search_samples must not be negative");
  if (c.estimator.levels.empty() || c.estimator.combos < 1) throw ConfigError("estimator needs levels and combos");
  if (c.shapley.permutations < 1 || c.shapley.background < 1 || c.shapley.explain < 1) {
    throw ConfigError("shapley options must be positive");
  }
  const bool synthetic = c.dataset.synthetic.has_value();
  if (synthetic == !c.dataset.csv.empty()) throw ConfigError("dataset needs exactly one of synthetic or csv");
  if (!synthetic && c.dataset.schema.empty()) throw ConfigError("csv dataset needs a schema");
  if (!(c.dataset.test_fraction > 0.0 && c.dataset.test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in (0, 1)");
  }
  if (synthetic) {
    const SyntheticSpec& s = *c.dataset.synthetic;
    if (s.rows < 50) throw ConfigError("synthetic data needs at least 50 rows");
    if (s.informative < 1 || s.informative + s.noise + s.categorical < 2) {
      throw ConfigError("synthetic data needs an informative feature and 2 features");
    }
    if (s.categorical > 0 && s.categories < 2) throw ConfigError("categorical columns need 2 categories");
    if (!(s.decay > 0.0)) throw ConfigError("decay must be positive");
    if (!c.multi_error && c.error == ErrorType::kCategoricalShift && s.categorical == 0) {
      throw ConfigError("categorical_shift needs categorical columns");
    }
  }
}

ExperimentConfig parse_config(const Json& j, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    const Json& ds = j.at("dataset");
    if (ds.contains("synthetic")) c.dataset.synthetic = ds.at("synthetic").get<SyntheticSpec>();
    if (ds.contains("csv")) {
      const auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
      };
      c.dataset.csv = resolve(ds.at("csv").get<std::string>());
      c.dataset.schema = resolve(ds.at("schema").get<std::string>());
    }
    c.dataset.test_fraction = get_or(ds, "test_fraction", c.dataset.test_fraction);
    if (c.dataset.synthetic) c.dataset.test_fraction = c.dataset.synthetic->test_fraction;
    c.dataset.split_seed = get_or(ds, "split_seed", c.dataset.split_seed);

    if (j.contains("algorithms")) {
      c.algorithms.clear();
      for (const Json& a : j.at("algorithms")) c.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    }
    const std::string scenario = get_or<std::string>(j, "scenario", "missing_values");
    c.multi_error = scenario == "multi";
    if (!c.multi_error) c.error = parse_error_type(scenario);
    if (j.contains("costs")) c.costs = parse_cost_assignment(j.at("costs"));
    c.budget = get_or(j, "budget", c.budget);
    if (j.contains("pre_pollution")) {
      const Json& p = j.at("pre_pollution");
      c.pollution_mean = get_or(p, "mean", c.pollution_mean);
      c.pollution_cap = get_or(p, "cap", c.pollution_cap);
      c.settings = get_or(p, "settings", c.settings);
    }
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("methods")) {
      c.methods.clear();
      for (const Json& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
    }
    if (j.contains("estimator")) c.estimator = j.at("estimator").get<EstimatorOptions>();
    c.search_samples = get_or(j, "search_samples", c.search_samples);
    c.rr_repeats = get_or(j, "rr_repeats", c.rr_repeats);
    if (j.contains("shapley")) {
      const Json& s = j.at("shapley");
      c.shapley.permutations = get_or(s, "permutations", c.shapley.permutations);
      c.shapley.background = get_or(s, "background", c.shapley.background);
      c.shapley.explain = get_or(s, "explain", c.shapley.explain);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_config(j, path.parent_path());
}

Json config_to_json(const ExperimentConfig& c) {
  Json ds;
  if (c.dataset.synthetic) {
    ds["synthetic"] = *c.dataset.synthetic;
  } else {
    ds["csv"] = c.dataset.csv.string();
    ds["schema"] = c.dataset.schema.string();
    ds["test_fraction"] = c.dataset.test_fraction;
  }
  ds["split_seed"] = c.dataset.split_seed;
  Json algorithms = Json::array();
  for (Algorithm a : c.algorithms) algorithms.push_back(to_string(a));
  Json methods = Json::array();
  for (Method m : c.methods) methods.push_back(to_string(m));
  return {{"dataset", ds},
          {"algorithms", algorithms},
          {"scenario", scenario_name(c)},
          {"costs", c.costs},
          {"budget", c.budget},
          {"pre_pollution", {{"mean", c.pollution_mean}, {"cap", c.pollution_cap}, {"settings", c.settings}}},
          {"seeds", c.seeds},
          {"methods", methods},
          {"estimator", c.estimator},
          {"search_samples", c.search_samples},
          {"rr_repeats", c.rr_repeats},
          {"shapley",
           {{"permutations", c.shapley.permutations},
            {"background", c.shapley.background},
            {"explain", c.shapley.explain}}}};
}

Dataset load_dataset(const DatasetSource& source) {
  if (source.synthetic) return generate_synthetic(*source.synthetic);
  Dataset d = load_csv(source.csv, load_schema(source.schema));
  // Input files count as clean: every cell becomes its own truth.
  for (FeatureId f = 0; f < d.num_features(); ++f) {
    auto& prov = d.mutable_cells(f).provenance;
    std::fill(prov.begin(), prov.end(), Provenance::kClean);
  }
  split(d, source.test_fraction, source.split_seed);
  d.capture_truth();
  return d;
}

const MethodRun* SettingRun::find(Method method) const {
  for (const MethodRun& r : runs) {
    if (r.method == method) return &r;
  }
  return nullptr;
}

std::size_t ExperimentResult::failures() const {
  std::size_t n = 0;
  for (const SettingRun& cell : cells) {
    if (!cell.ok) {
      ++n;
      continue;
    }
    for (const MethodRun& r : cell.runs) n += r.ok ? 0 : 1;
  }
  return n;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate(config);
  return run_experiment(config, load_dataset(config.dataset));
}

ExperimentResult run_experiment(const ExperimentConfig& config, const Dataset& pristine) {
  validate(config);
  check_scenario(config, pristine);

  ExperimentResult result;
  result.config = config;
  for (Algorithm a : config.algorithms) {
    for (std::uint64_t seed : config.seeds) {
      for (int s = 0; s < config.settings; ++s) {
        SettingRun cell;
        cell.algorithm = a;
        cell.seed = seed;
        cell.setting_index = s;
        result.cells.push_back(std::move(cell));
      }
    }
  }

  // Pollute once per cell; every method then starts from this state.
  std::vector<Dataset> dirty(result.cells.size());
  parallel_for(result.cells.size(), [&](std::size_t i) {
    SettingRun& cell = result.cells[i];
    const auto s = static_cast<std::uint64_t>(cell.setting_index);
    try {
      Dataset d = pristine;
      PrePollutionOptions options;
      options.mean_level = config.pollution_mean;
      options.cap = config.pollution_cap;
      options.multi_error = config.multi_error;
      options.single_error = config.error;
      cell.setting = sample_pre_pollution(d, options, derive_seed(cell.seed, {1, s}));
      apply_pre_pollution(d, cell.setting);
      if (config.search_samples > 0) {
        cell.spec = random_search(cell.algorithm, d, config.search_samples,
                                  derive_seed(cell.seed, {2, s, static_cast<std::uint64_t>(cell.algorithm)}))
                        .best;
      } else {
        cell.spec.algorithm = cell.algorithm;
        cell.spec.seed = derive_seed(cell.seed, {3, s});
      }
      cell.snapshot_fingerprint = fingerprint(d);
      cell.dirty_f1 = current_f1(cell.spec, d);
      cell.cleaned_f1 = current_f1(cell.spec, cleaned_copy(d));
      dirty[i] = std::move(d);
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.error = e.what();
    }
  });

  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    SettingRun& cell = result.cells[i];
    cell.runs.resize(config.methods.size());
    cell.timings.resize(config.methods.size());
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
      cell.runs[m].method = config.methods[m];
      if (cell.ok) jobs.emplace_back(i, m);
    }
  }
  parallel_for(jobs.size(), [&](std::size_t j) {
    const auto [i, m] = jobs[j];
    SettingRun& cell = result.cells[i];
    MethodRun& run = cell.runs[m];
    try {
      run_method(config, config.methods[m], dirty[i], cell.spec,
                 derive_seed(cell.seed, {4, static_cast<std::uint64_t>(cell.setting_index)}), run,
                 cell.timings[m]);
    } catch (const std::exception& e) {
      const Method method = run.method;
      const std::uint64_t start = run.start_fingerprint;
      run = MethodRun{};
      run.method = method;
      run.start_fingerprint = start;
      run.error = e.what();
    }
  });
  return result;
}

Json result_to_json(const ExperimentResult& result) {
  Json cells = Json::array();
  for (const SettingRun& c : result.cells) {
    Json runs = Json::array();
    for (const MethodRun& r : c.runs) runs.push_back(method_run_json(r));
    cells.push_back({{"algorithm", to_string(c.algorithm)},
                     {"seed", c.seed},
                     {"setting_index", c.setting_index},
                     {"setting", c.setting},
                     {"spec", c.spec},
                     {"snapshot_fingerprint", c.snapshot_fingerprint},
                     {"dirty_f1", c.dirty_f1},
                     {"cleaned_f1", c.cleaned_f1},
                     {"ok", c.ok},
                     {"error", c.error},
                     {"runs", runs}});
  }
  return {{"config", config_to_json(result.config)}, {"cells", cells}};
}

ExperimentResult result_from_json(const Json& j) {
  ExperimentResult result;
  result.config = parse_config(j.at("config"));
  for (const Json& c : j.at("cells")) {
    SettingRun cell;
    cell.algorithm = parse_algorithm(c.at("algorithm").get<std::string>());
    cell.seed = c.at("seed").get<std::uint64_t>();
    cell.setting_index = c.at("setting_index").get<int>();
    cell.setting = c.at("setting").get<PrePollutionSetting>();
    cell.ok = c.at("ok").get<bool>();
    cell.error = c.at("error").get<std::string>();
    if (cell.ok) cell.spec = c.at("spec").get<ModelSpec>();
    cell.snapshot_fingerprint = c.at("snapshot_fingerprint").get<std::uint64_t>();
    cell.dirty_f1 = c.at("dirty_f1").get<double>();
    cell.cleaned_f1 = c.at("cleaned_f1").get<double>();
    for (const Json& r : c.at("runs")) cell.runs.push_back(method_run_from(r));
    cell.timings.resize(cell.runs.size());
    result.cells.push_back(std::move(cell));
  }
  return result;
}

Json timings_to_json(const ExperimentResult& result) {
  Json a = Json::array();
  for (const SettingRun& c : result.cells) {
    for (std::size_t m = 0; m < c.runs.size() && m < c.timings.size(); ++m) {
      a.push_back({{"algorithm", to_string(c.algorithm)},
                   {"seed", c.seed},
                   {"setting_index", c.setting_index},
                   {"method", to_string(c.runs[m].method)},
                   {"total_seconds", c.timings[m].total_seconds},
                   {"iteration_seconds", c.timings[m].iteration_seconds}});
    }
  }
  return a;
}

Aggregate aggregate(const ExperimentResult& result) {
  if (result.cells.empty()) throw InvalidArgument("cannot aggregate an empty result");
  Aggregate agg;
  agg.max_budget = budget_units(result.config.budget);
  const std::string scenario = scenario_name(result.config);

  std::map<std::pair<std::string, Method>, Group> by_alg;
  std::map<std::pair<std::string, Method>, Group> by_err;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> pairs;
  std::vector<double> all_pred, all_actual;
  for (const SettingRun& cell : result.cells) {
    if (!cell.ok) continue;
    const MethodRun* comet = cell.find(Method::kComet);
    if (comet == nullptr || !comet->ok) continue;
    const std::string alg(to_string(cell.algorithm));
    for (const MethodRun& r : cell.runs) {
      if (r.method == Method::kComet || !r.ok) continue;
      const std::vector<double> adv = advantage(comet->curve, r.curve, agg.max_budget);
      by_alg[{alg, r.method}].series.push_back(adv);
      by_err[{scenario, r.method}].series.push_back(adv);
    }
    auto& [pred, actual] = pairs[alg];
    for (const PredictionPair& p : comet->pairs) {
      pred.push_back(p.predicted);
      actual.push_back(p.actual);
      all_pred.push_back(p.predicted);
      all_actual.push_back(p.actual);
    }
  }
  agg.by_algorithm = summarize(by_alg);
  agg.by_error = summarize(by_err);
  for (const auto& [alg, pa] : pairs) {
    MaeSummary s;
    s.algorithm = alg;
    s.scenario = scenario;
    s.pairs = pa.first.size();
    if (s.pairs > 0) s.mae = mean_absolute_error(pa.first, pa.second);
    agg.mae.push_back(s);
  }
  agg.overall_pairs = all_pred.size();
  if (!all_pred.empty()) agg.overall_mae = mean_absolute_error(all_pred, all_actual);
  return agg;
}

Json aggregate_to_json(const Aggregate& agg) {
  Json mae = Json::array();
  for (const MaeSummary& s : agg.mae) {
    mae.push_back({{"algorithm", s.algorithm}, {"scenario", s.scenario}, {"mae", s.mae}, {"pairs", s.pairs}});
  }
  return {{"max_budget", agg.max_budget},
          {"advantage_by_algorithm", advantage_json(agg.by_algorithm)},
          {"advantage_by_error", advantage_json(agg.by_error)},
          {"mae", mae},
          {"overall_mae", agg.overall_mae},
          {"overall_pairs", agg.overall_pairs}};
}

void write_curves_csv(const ExperimentResult& result, std::ostream& out) {
  out << "algorithm,seed,setting,method,budget,f1\n";
  out << std::setprecision(17);
  for (const SettingRun& c : result.cells) {
    for (const MethodRun& r : c.runs) {
      if (!r.ok) continue;
      for (const CurvePoint& p : r.curve.points) {
        out << to_string(c.algorithm) << ',' << c.seed << ',' << c.setting_index << ',' << to_string(r.method)
            << ',' << p.budget << ',' << p.f1 << '\n';
      }
    }
  }
}

void write_result(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "result.json", result_to_json(result).dump(1) + "\n");
  write_text(dir / "timings.json", timings_to_json(result).dump(1) + "\n");
  std::ostringstream curves;
  write_curves_csv(result, curves);
  write_text(dir / "curves.csv", curves.str());
}

ExperimentResult read_result(const std::filesystem::path& dir) {
  std::ifstream in(dir / "result.json");
  if (!in) throw ConfigError("no result.json in " + dir.string());
  Json j;
  try {
    in >> j;
    return result_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("result.json: " + std::string(e.what()));
  }
}

}  // namespace comet
