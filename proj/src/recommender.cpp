#include "comet/recommender.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

namespace comet {

double CostModel::next_step_cost(int steps_done) const {
  if (steps_done < 0) throw InvalidArgument("steps_done must be non-negative");
  switch (kind) {
    case CostKind::kConstant:
      return first;
    case CostKind::kOneShot:
      return steps_done == 0 ? first : second;
    case CostKind::kLinear:
      return first + second * steps_done;
  }
  return first;
}

namespace {

std::string number(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<double> parse_args(std::string_view text, std::string_view name) {
  if (text.substr(0, name.size()) != name || text.size() < name.size() + 2 || text[name.size()] != '(' ||
      text.back() != ')') {
    return {};
  }
  std::vector<double> out;
  std::string_view inner = text.substr(name.size() + 1, text.size() - name.size() - 2);
  while (!inner.empty()) {
    const auto comma = inner.find(',');
    std::string part(inner.substr(0, comma));
    part.erase(std::remove(part.begin(), part.end(), ' '), part.end());
    double v = 0.0;
    auto res = std::from_chars(part.data(), part.data() + part.size(), v);
    if (res.ec != std::errc() || res.ptr != part.data() + part.size()) {
      throw InvalidArgument("bad number '" + part + "' in cost model");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    inner.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

std::string to_string(const CostModel& model) {
  switch (model.kind) {
    case CostKind::kConstant:
      return "constant(" + number(model.first) + ")";
    case CostKind::kOneShot:
      return "one_shot(" + number(model.first) + "," + number(model.second) + ")";
    case CostKind::kLinear:
      return "linear(" + number(model.first) + "," + number(model.second) + ")";
  }
  return "constant(1)";
}

CostModel parse_cost_model(std::string_view text) {
  CostModel model;
  if (auto a = parse_args(text, "constant"); a.size() == 1) {
    model = CostModel::constant(a[0]);
  } else if (auto b = parse_args(text, "one_shot"); b.size() == 2) {
    model = CostModel::one_shot(b[0], b[1]);
  } else if (auto c = parse_args(text, "linear"); c.size() == 2) {
    model = CostModel::linear(c[0], c[1]);
  } else {
    throw InvalidArgument("unrecognized cost model '" + std::string(text) + "'");
  }
  if (model.first < 0 || model.second < 0) throw InvalidArgument("cost amounts must be non-negative");
  return model;
}

const CostModel& CostAssignment::for_error(ErrorType error) const {
  auto it = models.find(error);
  return it == models.end() ? fallback : it->second;
}

CostAssignment CostAssignment::mixed() {
  CostAssignment a;
  a.models[ErrorType::kMissingValues] = CostModel::one_shot(2, 0);
  a.models[ErrorType::kGaussianNoise] = CostModel::linear(1, 1);
  a.models[ErrorType::kCategoricalShift] = CostModel::constant(1);
  a.models[ErrorType::kScaling] = CostModel::constant(1);
  return a;
}

double next_step_cost(const CostAssignment& costs, ErrorType error, int steps_done) {
  return costs.for_error(error).next_step_cost(steps_done);
}

std::string_view to_string(StepOutcome outcome) {
  switch (outcome) {
    case StepOutcome::kAccepted:
      return "accepted";
    case StepOutcome::kRejected:
      return "rejected";
    case StepOutcome::kFallback:
      return "fallback";
    case StepOutcome::kCommitted:
      return "committed";
  }
  return "rejected";
}

StepOutcome parse_step_outcome(std::string_view name) {
  for (StepOutcome o : {StepOutcome::kAccepted, StepOutcome::kRejected, StepOutcome::kFallback,
                        StepOutcome::kCommitted}) {
    if (to_string(o) == name) return o;
  }
  throw InvalidArgument("unknown step outcome '" + std::string(name) + "'");
}

void BudgetLedger::charge(const LedgerEntry& entry) {
  if (entry.cost < 0) throw InvalidArgument("negative cost");
  if (!affordable(entry.cost)) {
    throw BudgetExceededError("step costing " + number(entry.cost) + " exceeds the remaining budget " +
                              number(remaining()));
  }
  spent_ += entry.cost;
  entries_.push_back(entry);
}

void BudgetLedger::write_csv(std::ostream& out, const Dataset& data) const {
  out << "iteration,feature,error_type,cost,accepted,from_buffer\n";
  for (const LedgerEntry& e : entries_) {
    out << e.iteration << ',' << data.feature(e.key.feature).name << ',' << to_string(e.key.error) << ','
        << number(e.cost) << ',' << (e.accepted ? 1 : 0) << ',' << (e.from_buffer ? 1 : 0) << '\n';
  }
}

double score(const Prediction& prediction, double cost) {
  if (cost < 0) throw InvalidArgument("negative cost");
  if (cost == 0.0) return std::numeric_limits<double>::infinity();
  return (prediction.p_next - prediction.u) / cost;
}

bool ranks_before(const ScoredCandidate& a, const ScoredCandidate& b) {
  const bool ia = std::isinf(a.score), ib = std::isinf(b.score);
  if (ia && ib) {
    if (a.numerator() != b.numerator()) return a.numerator() > b.numerator();
  } else if (a.score != b.score) {
    return a.score > b.score;
  }
  return a.key() < b.key();
}

std::vector<ScoredCandidate> rank(std::vector<ScoredCandidate> candidates, double current_f1) {
  std::erase_if(candidates, [&](const ScoredCandidate& c) { return !(c.prediction.p_next > current_f1); });
  std::stable_sort(candidates.begin(), candidates.end(), ranks_before);
  return candidates;
}

void CleaningBuffer::store(CandidateKey key, std::vector<CellValue> cells) {
  auto& entry = entries_[key];
  for (const CellValue& c : cells) {
    auto it = std::find_if(entry.begin(), entry.end(), [&](const CellValue& e) { return e.row == c.row; });
    if (it != entry.end()) {
      *it = c;
    } else {
      entry.push_back(c);
    }
  }
}

std::vector<CellValue> CleaningBuffer::take(CandidateKey key) {
  auto it = entries_.find(key);
  if (it == entries_.end()) return {};
  std::vector<CellValue> out = std::move(it->second);
  entries_.erase(it);
  return out;
}

std::vector<std::size_t> select_step_cells(const Dataset& data, CandidateKey key,
                                           std::span<const PollutedState> priority, std::uint64_t seed) {
  std::vector<std::size_t> out;
  for (SplitPart part : {SplitPart::kTrain, SplitPart::kTest}) {
    const std::size_t quota = cleaning_step_cells(data.split().rows(part).size());
    const std::vector<std::size_t> dirty = dirty_rows(data, key.feature, part, key.error);
    std::vector<std::uint8_t> is_dirty(data.num_rows(), 0), taken(data.num_rows(), 0);
    for (std::size_t r : dirty) is_dirty[r] = 1;
    std::vector<std::size_t> chosen;
    for (const PollutedState& state : priority) {
      for (std::size_t r : state.touched(part)) {
        if (chosen.size() >= quota) break;
        if (is_dirty[r] && !taken[r]) {
          taken[r] = 1;
          chosen.push_back(r);
        }
      }
    }
    if (chosen.size() < quota) {
      std::vector<std::size_t> rest;
      for (std::size_t r : dirty) {
        if (!taken[r]) rest.push_back(r);
      }
      Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(part)}));
      for (std::size_t r : rng.sample(std::move(rest), quota - chosen.size())) chosen.push_back(r);
    }
    std::sort(chosen.begin(), chosen.end());
    out.insert(out.end(), chosen.begin(), chosen.end());
  }
  return out;
}

std::vector<CellValue> current_cells(const Dataset& data, FeatureId feature, std::span<const std::size_t> rows) {
  const ColumnData& c = data.feature(feature).cells;
  std::vector<CellValue> out;
  for (std::size_t r : rows) out.push_back({r, c.values.at(r), c.missing.at(r) != 0});
  return out;
}

std::vector<CellValue> truth_cells(const Dataset& data, FeatureId feature, std::span<const std::size_t> rows) {
  if (!data.has_truth()) throw MissingTruthError("cleaning from ground truth needs a truth store");
  const TruthColumn& t = data.truth()[feature];
  std::vector<CellValue> out;
  for (std::size_t r : rows) out.push_back({r, t.values.at(r), t.missing.at(r) != 0});
  return out;
}

std::vector<CellValue> apply_cells(Dataset& data, FeatureId feature, std::span<const CellValue> cells) {
  const Feature& feat = data.feature(feature);
  for (const CellValue& c : cells) {
    if (c.row >= data.num_rows()) throw InvalidArgument("cell row " + std::to_string(c.row) + " out of range");
    if (c.missing) continue;
    if (!std::isfinite(c.value)) throw InvalidArgument("cell value must be finite");
    if (feat.categorical() && (c.value != std::floor(c.value) || c.value < 0 || c.value >= feat.category_count())) {
      throw InvalidArgument("cell value is not a category of '" + feat.name + "'");
    }
  }
  std::vector<CellValue> previous;
  ColumnData& column = data.mutable_cells(feature);
  for (const CellValue& c : cells) {
    previous.push_back({c.row, column.values[c.row], column.missing[c.row] != 0});
    if (c.missing) {
      column.missing[c.row] = 1;
    } else {
      column.values[c.row] = c.value;
      column.missing[c.row] = 0;
    }
    column.provenance[c.row] = Provenance::kClean;
    if (data.has_truth()) data.mutable_truth()[feature].error[c.row].reset();
  }
  return previous;
}

double current_f1(const ModelSpec& spec, const TableView& view) {
  try {
    return measure_f1(spec, view);
  } catch (const DegenerateLabelsError&) {
    return 0.0;
  }
}

std::string_view to_string(SessionMode mode) {
  return mode == SessionMode::kSimulated ? "simulated" : "interactive";
}

std::string_view to_string(SessionStatus status) {
  switch (status) {
    case SessionStatus::kActive:
      return "active";
    case SessionStatus::kFinished:
      return "finished";
    case SessionStatus::kBudgetExhausted:
      return "budget_exhausted";
  }
  return "active";
}

SessionMode parse_session_mode(std::string_view name) {
  if (name == "simulated") return SessionMode::kSimulated;
  if (name == "interactive") return SessionMode::kInteractive;
  throw InvalidArgument("unknown session mode '" + std::string(name) + "'");
}

SessionStatus parse_session_status(std::string_view name) {
  for (SessionStatus s : {SessionStatus::kActive, SessionStatus::kFinished, SessionStatus::kBudgetExhausted}) {
    if (to_string(s) == name) return s;
  }
  throw InvalidArgument("unknown session status '" + std::string(name) + "'");
}

Session::Session(Dataset data, SessionConfig config) {
  state_.config = std::move(config);
  state_.data = std::move(data);
  if (state_.config.budget < 0) throw InvalidArgument("budget must be non-negative");
  if (state_.config.mode == SessionMode::kSimulated && !state_.data.has_truth()) {
    throw MissingTruthError("simulated sessions need a truth store");
  }
  state_.ledger = BudgetLedger(state_.config.budget);
  state_.f1 = current_f1(state_.config.spec, state_.data);
  state_.initial_f1 = state_.f1;
  state_.trajectory.add(0.0, state_.f1);
  close_clean_keys();
  refresh_status();
}

Session::Session(SessionState state) : state_(std::move(state)) {}

std::vector<CandidateKey> Session::open_keys() const {
  std::vector<CandidateKey> keys;
  const Dataset& data = state_.data;
  for (FeatureId f = 0; f < data.num_features(); ++f) {
    if (state_.fully_clean.contains(f)) continue;
    const Feature& feat = data.feature(f);
    for (ErrorType e : kAllErrorTypes) {
      if (std::find(state_.config.error_types.begin(), state_.config.error_types.end(), e) ==
          state_.config.error_types.end()) {
        continue;
      }
      if (!is_compatible(e, feat.kind)) continue;
      if (e == ErrorType::kCategoricalShift && feat.category_count() < 2) continue;
      const CandidateKey key{f, e};
      if (state_.closed.contains(key)) continue;
      if (state_.config.mode == SessionMode::kSimulated && dirty_count(data, key) == 0) continue;
      keys.push_back(key);
    }
  }
  return keys;
}

double Session::step_cost(CandidateKey key) const {
  auto it = state_.steps_done.find(key);
  return next_step_cost(state_.config.costs, key.error, it == state_.steps_done.end() ? 0 : it->second);
}

void Session::close_clean_keys() {
  if (state_.config.mode != SessionMode::kSimulated) return;
  const Dataset& data = state_.data;
  for (FeatureId f = 0; f < data.num_features(); ++f) {
    if (state_.fully_clean.contains(f)) continue;
    bool any_open = false;
    for (ErrorType e : kAllErrorTypes) {
      if (!is_compatible(e, data.feature(f).kind)) continue;
      const CandidateKey key{f, e};
      if (dirty_count(data, key) == 0) {
        state_.closed.insert(key);
      } else if (std::find(state_.config.error_types.begin(), state_.config.error_types.end(), e) !=
                 state_.config.error_types.end()) {
        any_open = true;
      }
    }
    if (!any_open) state_.fully_clean.insert(f);
  }
}

void Session::refresh_status() {
  const std::vector<CandidateKey> keys = open_keys();
  if (keys.empty()) {
    state_.status = SessionStatus::kFinished;
    return;
  }
  for (const CandidateKey& key : keys) {
    if (state_.buffer.contains(key) || state_.ledger.affordable(step_cost(key))) {
      state_.status = SessionStatus::kActive;
      return;
    }
  }
  state_.status = SessionStatus::kBudgetExhausted;
}

void Session::ensure_round() {
  const std::uint64_t fp = fingerprint(state_.data);
  if (round_ && round_->iteration == state_.iteration && round_->data_fingerprint == fp) return;

  Round round;
  round.iteration = state_.iteration;
  round.data_fingerprint = fp;
  const SessionConfig& cfg = state_.config;
  const std::vector<CandidateKey> keys = open_keys();

  if (cfg.frozen_ranking && !state_.frozen.empty()) {
    for (const ScoredCandidate& c : state_.frozen) {
      if (std::find(keys.begin(), keys.end(), c.key()) != keys.end()) round.candidates.push_back(c);
    }
    round.dprime = frozen_dprime_;
    for (const ScoredCandidate& c : rank(round.candidates, state_.initial_f1)) round.ranking.push_back(c.key());
    round_ = std::move(round);
    return;
  }

  for (const CandidateKey& key : keys) {
    const std::uint64_t seed = derive_seed(cfg.seed, {1, static_cast<std::uint64_t>(state_.iteration),
                                                      key.feature, static_cast<std::uint64_t>(key.error)});
    AccuracySamples samples =
        measure_pollution_effect(state_.data, key.feature, key.error, cfg.spec, cfg.estimator, seed, state_.f1);
    Prediction pred = adjust(fit_predict(samples, cfg.estimator), state_.discrepancies);
    ScoredCandidate c;
    c.prediction = pred;
    c.cost = step_cost(key);
    c.score = score(pred, c.cost);
    round.candidates.push_back(c);
    round.dprime[key] = std::move(samples.states);
  }
  for (const ScoredCandidate& c : rank(round.candidates, state_.f1)) round.ranking.push_back(c.key());
  if (cfg.frozen_ranking) {
    state_.frozen = round.candidates;
    frozen_dprime_ = round.dprime;
  }
  round_ = std::move(round);
}

Recommendation Session::make_recommendation(const ScoredCandidate& candidate, bool fallback) const {
  Recommendation rec;
  rec.candidate = candidate;
  rec.fallback = fallback;
  rec.buffered = state_.buffer.contains(candidate.key());
  rec.cost = rec.buffered ? 0.0 : step_cost(candidate.key());
  if (round_) {
    if (auto it = round_->dprime.find(candidate.key()); it != round_->dprime.end()) {
      for (const PollutedState& s : it->second) {
        rec.dprime_train.insert(rec.dprime_train.end(), s.touched_train.begin(), s.touched_train.end());
        rec.dprime_test.insert(rec.dprime_test.end(), s.touched_test.begin(), s.touched_test.end());
      }
    }
  }
  for (auto* v : {&rec.dprime_train, &rec.dprime_test}) {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
  return rec;
}

std::optional<Recommendation> Session::fallback_choice() {
  auto affordable = [&](CandidateKey key) {
    return state_.buffer.contains(key) || state_.ledger.affordable(step_cost(key));
  };
  const ScoredCandidate* best = nullptr;
  double best_f1 = -1.0;
  for (const ScoredCandidate& c : round_->candidates) {
    auto it = state_.best_post_f1.find(c.key());
    if (it == state_.best_post_f1.end() || !affordable(c.key())) continue;
    if (it->second > best_f1) {
      best_f1 = it->second;
      best = &c;
    }
  }
  if (best == nullptr) {
    for (const ScoredCandidate& c : round_->candidates) {
      if (!affordable(c.key())) continue;
      if (best == nullptr || ranks_before(c, *best)) best = &c;
    }
  }
  if (best == nullptr) return std::nullopt;
  return make_recommendation(*best, true);
}

std::optional<Recommendation> Session::recommend() {
  refresh_status();
  if (terminal()) return std::nullopt;
  ensure_round();
  for (const CandidateKey& key : round_->ranking) {
    if (state_.rejected.contains(key)) continue;
    if (!state_.buffer.contains(key) && !state_.ledger.affordable(step_cost(key))) continue;
    auto it = std::find_if(round_->candidates.begin(), round_->candidates.end(),
                           [&](const ScoredCandidate& c) { return c.key() == key; });
    return make_recommendation(*it, false);
  }
  return fallback_choice();
}

Recommendation Session::recommend(CandidateKey key) {
  std::optional<Recommendation> top = recommend();
  if (!top) throw BudgetExceededError("session is " + std::string(to_string(state_.status)));
  if (top->candidate.key() == key) return *top;
  auto it = std::find_if(round_->candidates.begin(), round_->candidates.end(),
                         [&](const ScoredCandidate& c) { return c.key() == key; });
  if (it == round_->candidates.end()) throw InvalidArgument("candidate is not open");
  if (!state_.buffer.contains(key) && !state_.ledger.affordable(step_cost(key))) {
    throw InvalidArgument("candidate step exceeds the remaining budget");
  }
  return make_recommendation(*it, false);
}

IterationRecord& Session::current_record() {
  if (state_.records.empty() || state_.records.back().iteration != state_.iteration) {
    IterationRecord rec;
    rec.iteration = state_.iteration;
    rec.f1_before = state_.f1;
    if (round_) {
      for (const ScoredCandidate& c : round_->candidates) {
        rec.candidates.push_back({c.key(), c.prediction.p_next, c.prediction.raw_p_next, c.prediction.u, c.cost,
                                  c.score, c.prediction.p_next > state_.f1});
      }
    }
    state_.records.push_back(std::move(rec));
  }
  return state_.records.back();
}

Attempt Session::execute(const Recommendation& rec) { return perform(rec, std::nullopt); }

Attempt Session::execute(const Recommendation& rec, std::span<const CellValue> cells) {
  return perform(rec, cells);
}

Attempt Session::perform(const Recommendation& rec, std::optional<std::span<const CellValue>> submitted) {
  if (terminal()) throw BudgetExceededError("session is " + std::string(to_string(state_.status)));
  const CandidateKey key = rec.candidate.key();
  const SessionConfig& cfg = state_.config;
  Dataset& data = state_.data;

  Attempt attempt;
  attempt.key = key;
  attempt.predicted = rec.candidate.prediction.p_next;
  attempt.raw_predicted = rec.candidate.prediction.raw_p_next;
  attempt.f1_before = state_.f1;

  const bool use_buffer = state_.buffer.contains(key) && (!submitted || submitted->empty());
  attempt.from_buffer = use_buffer;
  attempt.cost = use_buffer ? 0.0 : step_cost(key);
  if (!state_.ledger.affordable(attempt.cost)) {
    throw BudgetExceededError("step on " + data.feature(key.feature).name + " exceeds the remaining budget");
  }

  IterationRecord& record = current_record();
  const Snapshot before = snapshot(data);
  std::vector<CellValue> cells;
  if (use_buffer) {
    cells = state_.buffer.take(key);
  } else if (submitted) {
    cells.assign(submitted->begin(), submitted->end());
  } else {
    static const std::vector<PollutedState> kNone;
    const std::vector<PollutedState>* priority = &kNone;
    if (round_) {
      if (auto it = round_->dprime.find(key); it != round_->dprime.end()) priority = &it->second;
    }
    const std::uint64_t seed =
        derive_seed(cfg.seed, {2, static_cast<std::uint64_t>(state_.iteration), key.feature,
                               static_cast<std::uint64_t>(key.error), record.attempts.size()});
    cells = truth_cells(data, key.feature, select_step_cells(data, key, *priority, seed));
  }
  const std::vector<CellValue> previous = apply_cells(data, key.feature, cells);
  attempt.cells = cells.size();
  for (std::size_t i = 0; i < cells.size(); ++i) attempt.changed += !(cells[i] == previous[i]);

  attempt.f1_after = current_f1(cfg.spec, data);
  const bool accepted = rec.fallback || attempt.f1_after > attempt.f1_before;
  attempt.outcome = !accepted ? StepOutcome::kRejected : rec.fallback ? StepOutcome::kFallback : StepOutcome::kAccepted;

  state_.ledger.charge({state_.iteration, key, attempt.cost, accepted, use_buffer});
  if (!use_buffer) {
    ++state_.steps_done[key];
    ++state_.steps_taken;
  }
  state_.discrepancies.record(key, std::clamp(attempt.raw_predicted, 0.0, 1.0), attempt.f1_after);
  auto [best, inserted] = state_.best_post_f1.try_emplace(key, attempt.f1_after);
  if (!inserted) best->second = std::max(best->second, attempt.f1_after);

  record.attempts.push_back(attempt);
  if (accepted) {
    state_.f1 = attempt.f1_after;
    state_.rejected.clear();
    close_clean_keys();
  } else {
    restore(data, before);
    state_.buffer.store(key, std::move(cells));
    state_.rejected.insert(key);
  }
  if (accepted || attempt.cost > 0) state_.trajectory.add(state_.ledger.spent(), state_.f1);
  record.f1_after = state_.f1;
  record.spent_after = state_.ledger.spent();
  if (accepted) {
    ++state_.iteration;
    round_.reset();
  }
  ++state_.version;
  refresh_status();
  return attempt;
}

std::optional<IterationRecord> Session::run_iteration() {
  const int start = state_.iteration;
  bool acted = false;
  while (state_.iteration == start) {
    std::optional<Recommendation> rec = recommend();
    if (!rec) break;
    execute(*rec);
    acted = true;
  }
  if (!acted) return std::nullopt;
  for (auto it = state_.records.rbegin(); it != state_.records.rend(); ++it) {
    if (it->iteration == start) return *it;
  }
  return std::nullopt;
}

void Session::run() {
  while (!terminal()) {
    if (!run_iteration()) break;
  }
}

void Session::mark_fully_clean(FeatureId feature) {
  if (feature >= state_.data.num_features()) throw InvalidArgument("feature index out of range");
  state_.fully_clean.insert(feature);
  for (ErrorType e : kAllErrorTypes) state_.closed.insert({feature, e});
  round_.reset();
  ++state_.version;
  refresh_status();
}

SessionResult run_session(Dataset data, const SessionConfig& config) {
  Session session(std::move(data), config);
  session.run();
  const SessionState& s = session.state();
  return {s.trajectory, s.ledger, s.discrepancies, s.records, s.status};
}

}  // namespace comet
