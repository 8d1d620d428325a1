#include "comet/serialize.hpp"

#include <cmath>
#include <limits>

namespace comet {

namespace {

Json numbers(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number_to_json(x));
  return a;
}

std::vector<double> numbers_from(const Json& j) {
  std::vector<double> v;
  v.reserve(j.size());
  for (const Json& x : j) v.push_back(number_from_json(x));
  return v;
}

ErrorType error_from(const Json& j) { return parse_error_type(j.get<std::string>()); }

// Maps keyed by CandidateKey travel as arrays of {key..., value}.
template <typename V>
Json keyed(const std::map<CandidateKey, V>& m) {
  Json a = Json::array();
  for (const auto& [k, v] : m) {
    Json e = k;
    e["value"] = v;
    a.push_back(std::move(e));
  }
  return a;
}

template <typename V>
std::map<CandidateKey, V> keyed_from(const Json& j) {
  std::map<CandidateKey, V> m;
  for (const Json& e : j) m[e.get<CandidateKey>()] = e.at("value").get<V>();
  return m;
}

}  // namespace

Json number_to_json(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double number_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  throw ParseError("expected a number, got '" + s + "'");
}

void to_json(Json& j, const CandidateKey& k) { j = {{"feature", k.feature}, {"error", to_string(k.error)}}; }
void from_json(const Json& j, CandidateKey& k) {
  k.feature = j.at("feature").get<FeatureId>();
  k.error = error_from(j.at("error"));
}

void to_json(Json& j, const ColumnData& c) {
  Json prov = Json::array();
  for (Provenance p : c.provenance) prov.push_back(static_cast<int>(p));
  j = {{"values", numbers(c.values)}, {"missing", c.missing}, {"provenance", prov}};
}
void from_json(const Json& j, ColumnData& c) {
  c.values = numbers_from(j.at("values"));
  c.missing = j.at("missing").get<std::vector<std::uint8_t>>();
  c.provenance.clear();
  for (const Json& p : j.at("provenance")) {
    const int v = p.get<int>();
    if (v < 0 || v > 2) throw ParseError("provenance code out of range");
    c.provenance.push_back(static_cast<Provenance>(v));
  }
  if (c.missing.size() != c.values.size() || c.provenance.size() != c.values.size()) {
    throw ShapeMismatchError("column arrays differ in length");
  }
}

void to_json(Json& j, const Feature& f) {
  j = {{"name", f.name}, {"kind", to_string(f.kind)}, {"categories", f.categories}, {"cells", f.cells}};
}
void from_json(const Json& j, Feature& f) {
  f.name = j.at("name").get<std::string>();
  f.kind = parse_feature_kind(j.at("kind").get<std::string>());
  f.categories = j.at("categories").get<std::vector<std::string>>();
  f.cells = j.at("cells").get<ColumnData>();
}

void to_json(Json& j, const TruthColumn& t) {
  Json errors = Json::array();
  for (const auto& e : t.error) errors.push_back(e ? Json(to_string(*e)) : Json(nullptr));
  j = {{"values", numbers(t.values)}, {"missing", t.missing}, {"error", errors}};
}
void from_json(const Json& j, TruthColumn& t) {
  t.values = numbers_from(j.at("values"));
  t.missing = j.at("missing").get<std::vector<std::uint8_t>>();
  t.error.clear();
  for (const Json& e : j.at("error")) {
    t.error.push_back(e.is_null() ? std::nullopt : std::optional<ErrorType>(error_from(e)));
  }
}

void to_json(Json& j, const Split& s) { j = {{"train", s.train}, {"test", s.test}}; }
void from_json(const Json& j, Split& s) {
  s.train = j.at("train").get<std::vector<std::size_t>>();
  s.test = j.at("test").get<std::vector<std::size_t>>();
}

void to_json(Json& j, const Dataset& d) {
  j = {{"features", d.features()},     {"label_name", d.label_name()}, {"classes", d.classes()},
       {"labels", d.labels()},         {"positive_class", d.positive_class()},
       {"split", d.split()}};
  j["truth"] = d.has_truth() ? Json(d.truth()) : Json(nullptr);
}
void from_json(const Json& j, Dataset& d) {
  d = Dataset(j.at("features").get<std::vector<Feature>>(), j.at("label_name").get<std::string>(),
              j.at("classes").get<std::vector<std::string>>(), j.at("labels").get<std::vector<int>>());
  d.set_positive_class(j.at("positive_class").get<int>());
  d.set_split(j.at("split").get<Split>());
  if (!j.at("truth").is_null()) d.set_truth(j.at("truth").get<std::vector<TruthColumn>>());
}

void to_json(Json& j, const ModelSpec& s) {
  j = {{"algorithm", to_string(s.algorithm)}, {"hyperparameters", s.hyperparameters}, {"seed", s.seed}};
}
void from_json(const Json& j, ModelSpec& s) {
  s.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
  s.hyperparameters = j.value("hyperparameters", std::map<std::string, double>{});
  s.seed = j.value("seed", std::uint64_t{0});
  validate(s);
}

void to_json(Json& j, const CostModel& m) { j = to_string(m); }
void from_json(const Json& j, CostModel& m) { m = parse_cost_model(j.get<std::string>()); }

void to_json(Json& j, const CostAssignment& a) {
  j = Json::object();
  for (const auto& [e, m] : a.models) j[std::string(to_string(e))] = m;
  j["default"] = a.fallback;
}
void from_json(const Json& j, CostAssignment& a) { a = parse_cost_assignment(j); }

CostAssignment parse_cost_assignment(const Json& j) {
  if (j.is_string()) {
    const std::string text = j.get<std::string>();
    if (text == "mixed") return CostAssignment::mixed();
    return CostAssignment::uniform(parse_cost_model(text));
  }
  if (!j.is_object()) throw InvalidArgument("costs must be a schedule string or an object");
  CostAssignment a;
  for (const auto& [name, value] : j.items()) {
    if (name == "default") {
      a.fallback = parse_cost_model(value.get<std::string>());
    } else {
      a.models[parse_error_type(name)] = parse_cost_model(value.get<std::string>());
    }
  }
  return a;
}

void to_json(Json& j, const EstimatorOptions& o) {
  j = {{"levels", o.levels}, {"combos", o.combos}, {"prior_precision", o.prior_precision},
       {"a0", o.a0},         {"b0", o.b0},         {"interval", o.interval}};
}
void from_json(const Json& j, EstimatorOptions& o) {
  const EstimatorOptions d;
  o.levels = j.value("levels", d.levels);
  o.combos = j.value("combos", d.combos);
  o.prior_precision = j.value("prior_precision", d.prior_precision);
  o.a0 = j.value("a0", d.a0);
  o.b0 = j.value("b0", d.b0);
  o.interval = j.value("interval", d.interval);
  if (o.levels.empty() || o.combos < 1) throw InvalidArgument("estimator needs levels and combinations");
  if (!(o.interval > 0 && o.interval < 1)) throw InvalidArgument("interval mass must lie in (0, 1)");
}

void to_json(Json& j, const SessionConfig& c) {
  Json errors = Json::array();
  for (ErrorType e : c.error_types) errors.push_back(to_string(e));
  j = {{"spec", c.spec},   {"costs", c.costs}, {"budget", c.budget},
       {"error_types", errors}, {"estimator", c.estimator}, {"seed", c.seed},
       {"mode", to_string(c.mode)}, {"frozen_ranking", c.frozen_ranking}};
}
void from_json(const Json& j, SessionConfig& c) {
  c.spec = j.at("spec").get<ModelSpec>();
  c.costs = parse_cost_assignment(j.at("costs"));
  c.budget = j.at("budget").get<double>();
  c.error_types.clear();
  for (const Json& e : j.at("error_types")) c.error_types.push_back(error_from(e));
  c.estimator = j.at("estimator").get<EstimatorOptions>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.mode = parse_session_mode(j.at("mode").get<std::string>());
  c.frozen_ranking = j.value("frozen_ranking", false);
}

void to_json(Json& j, const CurvePoint& p) { j = Json::array({p.budget, p.f1}); }
void from_json(const Json& j, CurvePoint& p) {
  p.budget = j.at(0).get<double>();
  p.f1 = j.at(1).get<double>();
}
void to_json(Json& j, const BudgetCurve& c) { j = c.points; }
void from_json(const Json& j, BudgetCurve& c) {
  c.points.clear();
  for (const Json& p : j) {
    const CurvePoint cp = p.get<CurvePoint>();
    c.add(cp.budget, cp.f1);
  }
}

void to_json(Json& j, const LedgerEntry& e) {
  j = {{"iteration", e.iteration}, {"key", e.key}, {"cost", e.cost}, {"accepted", e.accepted},
       {"from_buffer", e.from_buffer}};
}
void from_json(const Json& j, LedgerEntry& e) {
  e.iteration = j.at("iteration").get<int>();
  e.key = j.at("key").get<CandidateKey>();
  e.cost = j.at("cost").get<double>();
  e.accepted = j.at("accepted").get<bool>();
  e.from_buffer = j.at("from_buffer").get<bool>();
}

void to_json(Json& j, const BudgetLedger& l) {
  j = {{"total", l.total()}, {"spent", l.spent()}, {"entries", l.entries()}};
}
void from_json(const Json& j, BudgetLedger& l) {
  // Replaying the charges reproduces the running sum exactly.
  l = BudgetLedger(j.at("total").get<double>());
  for (const Json& e : j.at("entries")) l.charge(e.get<LedgerEntry>());
  if (l.spent() != j.at("spent").get<double>()) throw ParseError("ledger spend does not match its entries");
}

void to_json(Json& j, const DiscrepancyLog& l) {
  j = Json::array();
  for (const auto& [key, entries] : l.all()) {
    Json e = key;
    Json pairs = Json::array();
    for (const Discrepancy& d : entries) pairs.push_back(Json::array({d.predicted, d.actual}));
    e["pairs"] = pairs;
    j.push_back(std::move(e));
  }
}
void from_json(const Json& j, DiscrepancyLog& l) {
  l = DiscrepancyLog();
  for (const Json& e : j) {
    const CandidateKey key = e.get<CandidateKey>();
    for (const Json& p : e.at("pairs")) l.record(key, p.at(0).get<double>(), p.at(1).get<double>());
  }
}

void to_json(Json& j, const CellValue& c) {
  j = {{"row", c.row}, {"value", number_to_json(c.value)}, {"missing", c.missing}};
}
void from_json(const Json& j, CellValue& c) {
  c.row = j.at("row").get<std::size_t>();
  c.value = number_from_json(j.at("value"));
  c.missing = j.at("missing").get<bool>();
}

void to_json(Json& j, const CleaningBuffer& b) { j = keyed(b.entries()); }
void from_json(const Json& j, CleaningBuffer& b) {
  b = CleaningBuffer();
  for (const auto& [key, cells] : keyed_from<std::vector<CellValue>>(j)) b.store(key, cells);
}

void to_json(Json& j, const Posterior& p) {
  j = {{"mean", {p.mean(0), p.mean(1)}},
       {"covariance", {p.covariance(0, 0), p.covariance(0, 1), p.covariance(1, 0), p.covariance(1, 1)}},
       {"a", p.a},
       {"b", p.b}};
}
void from_json(const Json& j, Posterior& p) {
  const auto m = j.at("mean").get<std::vector<double>>();
  const auto c = j.at("covariance").get<std::vector<double>>();
  if (m.size() != 2 || c.size() != 4) throw ShapeMismatchError("posterior arrays have the wrong size");
  p.mean << m[0], m[1];
  p.covariance << c[0], c[1], c[2], c[3];
  p.a = j.at("a").get<double>();
  p.b = j.at("b").get<double>();
}

void to_json(Json& j, const Prediction& p) {
  j = {{"feature", p.feature}, {"error", to_string(p.error)}, {"p_next", p.p_next},
       {"u", p.u},             {"raw_p_next", p.raw_p_next}, {"current_f1", p.current_f1},
       {"posterior", p.posterior}};
}
void from_json(const Json& j, Prediction& p) {
  p.feature = j.at("feature").get<FeatureId>();
  p.error = error_from(j.at("error"));
  p.p_next = j.at("p_next").get<double>();
  p.u = j.at("u").get<double>();
  p.raw_p_next = j.at("raw_p_next").get<double>();
  p.current_f1 = j.at("current_f1").get<double>();
  p.posterior = j.at("posterior").get<Posterior>();
}

void to_json(Json& j, const ScoredCandidate& c) {
  j = {{"prediction", c.prediction}, {"cost", c.cost}, {"score", number_to_json(c.score)}};
}
void from_json(const Json& j, ScoredCandidate& c) {
  c.prediction = j.at("prediction").get<Prediction>();
  c.cost = j.at("cost").get<double>();
  c.score = number_from_json(j.at("score"));
}

void to_json(Json& j, const Attempt& a) {
  j = {{"key", a.key},
       {"outcome", to_string(a.outcome)},
       {"from_buffer", a.from_buffer},
       {"cost", a.cost},
       {"predicted", a.predicted},
       {"raw_predicted", a.raw_predicted},
       {"f1_before", a.f1_before},
       {"f1_after", a.f1_after},
       {"cells", a.cells},
       {"changed", a.changed}};
}
void from_json(const Json& j, Attempt& a) {
  a.key = j.at("key").get<CandidateKey>();
  a.outcome = parse_step_outcome(j.at("outcome").get<std::string>());
  a.from_buffer = j.at("from_buffer").get<bool>();
  a.cost = j.at("cost").get<double>();
  a.predicted = j.at("predicted").get<double>();
  a.raw_predicted = j.at("raw_predicted").get<double>();
  a.f1_before = j.at("f1_before").get<double>();
  a.f1_after = j.at("f1_after").get<double>();
  a.cells = j.at("cells").get<std::size_t>();
  a.changed = j.at("changed").get<std::size_t>();
}

void to_json(Json& j, const CandidateSummary& c) {
  j = {{"key", c.key}, {"p_next", c.p_next}, {"raw_p_next", c.raw_p_next}, {"u", c.u},
       {"cost", c.cost}, {"score", number_to_json(c.score)}, {"positive", c.positive}};
}
void from_json(const Json& j, CandidateSummary& c) {
  c.key = j.at("key").get<CandidateKey>();
  c.p_next = j.at("p_next").get<double>();
  c.raw_p_next = j.at("raw_p_next").get<double>();
  c.u = j.at("u").get<double>();
  c.cost = j.at("cost").get<double>();
  c.score = number_from_json(j.at("score"));
  c.positive = j.at("positive").get<bool>();
}

void to_json(Json& j, const IterationRecord& r) {
  j = {{"iteration", r.iteration},   {"f1_before", r.f1_before},   {"f1_after", r.f1_after},
       {"spent_after", r.spent_after}, {"candidates", r.candidates}, {"attempts", r.attempts}};
}
void from_json(const Json& j, IterationRecord& r) {
  r.iteration = j.at("iteration").get<int>();
  r.f1_before = j.at("f1_before").get<double>();
  r.f1_after = j.at("f1_after").get<double>();
  r.spent_after = j.at("spent_after").get<double>();
  r.candidates = j.at("candidates").get<std::vector<CandidateSummary>>();
  r.attempts = j.at("attempts").get<std::vector<Attempt>>();
}

void to_json(Json& j, const SessionState& s) {
  j = {{"config", s.config},
       {"data", s.data},
       {"f1", s.f1},
       {"initial_f1", s.initial_f1},
       {"status", to_string(s.status)},
       {"iteration", s.iteration},
       {"steps_taken", s.steps_taken},
       {"version", s.version},
       {"ledger", s.ledger},
       {"discrepancies", s.discrepancies},
       {"buffer", s.buffer},
       {"trajectory", s.trajectory},
       {"steps_done", keyed(s.steps_done)},
       {"best_post_f1", keyed(s.best_post_f1)},
       {"closed", s.closed},
       {"fully_clean", s.fully_clean},
       {"rejected", s.rejected},
       {"records", s.records},
       {"frozen", s.frozen}};
}
void from_json(const Json& j, SessionState& s) {
  s.config = j.at("config").get<SessionConfig>();
  s.data = j.at("data").get<Dataset>();
  s.data.validate();
  s.f1 = j.at("f1").get<double>();
  s.initial_f1 = j.at("initial_f1").get<double>();
  s.status = parse_session_status(j.at("status").get<std::string>());
  s.iteration = j.at("iteration").get<int>();
  s.steps_taken = j.at("steps_taken").get<int>();
  s.version = j.at("version").get<std::uint64_t>();
  s.ledger = j.at("ledger").get<BudgetLedger>();
  s.discrepancies = j.at("discrepancies").get<DiscrepancyLog>();
  s.buffer = j.at("buffer").get<CleaningBuffer>();
  s.trajectory = j.at("trajectory").get<BudgetCurve>();
  s.steps_done = keyed_from<int>(j.at("steps_done"));
  s.best_post_f1 = keyed_from<double>(j.at("best_post_f1"));
  s.closed = j.at("closed").get<std::set<CandidateKey>>();
  s.fully_clean = j.at("fully_clean").get<std::set<FeatureId>>();
  s.rejected = j.at("rejected").get<std::set<CandidateKey>>();
  s.records = j.at("records").get<std::vector<IterationRecord>>();
  s.frozen = j.at("frozen").get<std::vector<ScoredCandidate>>();
}

void to_json(Json& j, const FeaturePollution& f) {
  Json steps = Json::array();
  for (ErrorType e : f.step_errors) steps.push_back(to_string(e));
  j = {{"feature", f.feature}, {"level", f.level.steps()}, {"step_errors", steps}};
}
void from_json(const Json& j, FeaturePollution& f) {
  f.feature = j.at("feature").get<std::string>();
  f.level = PollutionLevel(j.at("level").get<int>());
  f.step_errors.clear();
  for (const Json& e : j.at("step_errors")) f.step_errors.push_back(error_from(e));
}

void to_json(Json& j, const PrePollutionSetting& s) {
  j = {{"seed", s.seed}, {"multi_error", s.multi_error}, {"features", s.features}};
}
void from_json(const Json& j, PrePollutionSetting& s) {
  s.seed = j.at("seed").get<std::uint64_t>();
  s.multi_error = j.at("multi_error").get<bool>();
  s.features = j.at("features").get<std::vector<FeaturePollution>>();
}

void to_json(Json& j, const SyntheticSpec& s) {
  j = {{"rows", s.rows},
       {"informative", s.informative},
       {"noise", s.noise},
       {"categorical", s.categorical},
       {"categories", s.categories},
       {"classes", s.classes},
       {"class_sep", s.class_sep},
       {"decay", s.decay},
       {"test_fraction", s.test_fraction},
       {"seed", s.seed}};
}
void from_json(const Json& j, SyntheticSpec& s) {
  const SyntheticSpec d;
  s.rows = j.value("rows", d.rows);
  s.informative = j.value("informative", d.informative);
  s.noise = j.value("noise", d.noise);
  s.categorical = j.value("categorical", d.categorical);
  s.categories = j.value("categories", d.categories);
  s.classes = j.value("classes", d.classes);
  s.class_sep = j.value("class_sep", d.class_sep);
  s.decay = j.value("decay", d.decay);
  s.test_fraction = j.value("test_fraction", d.test_fraction);
  s.seed = j.value("seed", d.seed);
}

}  // namespace comet
