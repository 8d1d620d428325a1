#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "comet/estimator.hpp"
#include "comet/metrics.hpp"
#include "comet/models.hpp"
#include "comet/pollution.hpp"

namespace comet {

enum class CostKind { kConstant, kOneShot, kLinear };

struct CostModel {
  CostKind kind = CostKind::kConstant;
  double first = 1.0;   // Constant: rate; OneShot: first; Linear: initial
  double second = 0.0;  // OneShot: rest; Linear: increment

  static CostModel constant(double rate) { return {CostKind::kConstant, rate, 0.0}; }
  static CostModel one_shot(double first, double rest) { return {CostKind::kOneShot, first, rest}; }
  static CostModel linear(double initial, double increment) { return {CostKind::kLinear, initial, increment}; }

  double next_step_cost(int steps_done) const;
  bool operator==(const CostModel&) const = default;
};

std::string to_string(const CostModel& model);
CostModel parse_cost_model(std::string_view text);  // "constant(1)", "one_shot(2,0)", "linear(1,1)"

// Error type -> cost schedule; unlisted types use `fallback`.
struct CostAssignment {
  std::map<ErrorType, CostModel> models;
  CostModel fallback = CostModel::constant(1.0);

  const CostModel& for_error(ErrorType error) const;
  static CostAssignment uniform(CostModel model) { return {{}, model}; }
  // Missing values one-shot, Gaussian noise linear, the rest constant.
  static CostAssignment mixed();
  bool operator==(const CostAssignment&) const = default;
};

double next_step_cost(const CostAssignment& costs, ErrorType error, int steps_done);

enum class StepOutcome { kAccepted, kRejected, kFallback, kCommitted };
std::string_view to_string(StepOutcome outcome);
StepOutcome parse_step_outcome(std::string_view name);

struct LedgerEntry {
  int iteration = 0;
  CandidateKey key;
  double cost = 0.0;
  bool accepted = false;
  bool from_buffer = false;

  bool operator==(const LedgerEntry&) const = default;
};

class BudgetExceededError : public Error {
 public:
  using Error::Error;
};

class BudgetLedger {
 public:
  BudgetLedger() = default;
  explicit BudgetLedger(double total) : total_(total) {}

  double total() const { return total_; }
  double spent() const { return spent_; }
  double remaining() const { return total_ - spent_; }
  // Tolerates accumulated rounding in fractional schedules.
  bool affordable(double cost) const { return cost <= remaining() + 1e-9; }
  void charge(const LedgerEntry& entry);
  const std::vector<LedgerEntry>& entries() const { return entries_; }

  void write_csv(std::ostream& out, const Dataset& data) const;
  bool operator==(const BudgetLedger&) const = default;

 private:
  double total_ = 0.0;
  double spent_ = 0.0;
  std::vector<LedgerEntry> entries_;
};

struct ScoredCandidate {
  Prediction prediction;
  double cost = 0.0;
  double score = 0.0;  // +inf for zero-cost candidates

  CandidateKey key() const { return prediction.key(); }
  double numerator() const { return prediction.p_next - prediction.u; }
};

double score(const Prediction& prediction, double cost);
// Score descending; infinite scores by numerator; then feature, then error type.
bool ranks_before(const ScoredCandidate& a, const ScoredCandidate& b);
// Select-positives filter followed by the ordering above.
std::vector<ScoredCandidate> rank(std::vector<ScoredCandidate> candidates, double current_f1);

// One cleaned cell as submitted by a Cleaner or taken from the truth store.
struct CellValue {
  std::size_t row = 0;
  double value = 0.0;
  bool missing = false;

  bool operator==(const CellValue&) const = default;
};

// Cleaned values whose application was reverted, keyed by candidate.
class CleaningBuffer {
 public:
  bool contains(CandidateKey key) const { return entries_.contains(key); }
  // Merges with an existing entry; later values win per row.
  void store(CandidateKey key, std::vector<CellValue> cells);
  // Removes and returns the entry.
  std::vector<CellValue> take(CandidateKey key);
  const std::map<CandidateKey, std::vector<CellValue>>& entries() const { return entries_; }
  bool operator==(const CleaningBuffer&) const = default;

 private:
  std::map<CandidateKey, std::vector<CellValue>> entries_;
};

// Up to one cleaning step of dirty cells per split for `key`: cells listed
// in `priority` first (still dirty ones, in order), then random dirty cells.
std::vector<std::size_t> select_step_cells(const Dataset& data, CandidateKey key,
                                           std::span<const PollutedState> priority, std::uint64_t seed);

// Writes values into the named cells, marks them clean and clears any
// truth-store error tag. Returns the previous cell contents.
std::vector<CellValue> apply_cells(Dataset& data, FeatureId feature, std::span<const CellValue> cells);

// Truth values of the named cells.
std::vector<CellValue> truth_cells(const Dataset& data, FeatureId feature, std::span<const std::size_t> rows);

// Current values of the named cells.
std::vector<CellValue> current_cells(const Dataset& data, FeatureId feature, std::span<const std::size_t> rows);

// Test F1 of a fit on the train split; data that cannot be fitted scores 0.
double current_f1(const ModelSpec& spec, const TableView& view);

enum class SessionMode { kSimulated, kInteractive };
enum class SessionStatus { kActive, kFinished, kBudgetExhausted };
std::string_view to_string(SessionMode mode);
std::string_view to_string(SessionStatus status);
SessionMode parse_session_mode(std::string_view name);
SessionStatus parse_session_status(std::string_view name);

struct SessionConfig {
  ModelSpec spec;
  CostAssignment costs;
  double budget = 50.0;
  std::vector<ErrorType> error_types = {kAllErrorTypes.begin(), kAllErrorTypes.end()};
  EstimatorOptions estimator;
  std::uint64_t seed = 0;
  SessionMode mode = SessionMode::kSimulated;
  // Rank once on the initial state and reuse the list (COMET-light).
  bool frozen_ranking = false;

  bool operator==(const SessionConfig&) const = default;
};

struct Attempt {
  CandidateKey key;
  StepOutcome outcome = StepOutcome::kRejected;
  bool from_buffer = false;
  double cost = 0.0;
  double predicted = 0.0;      // adjusted p_next the recommender used
  double raw_predicted = 0.0;  // regression output before adjustment
  double f1_before = 0.0;
  double f1_after = 0.0;
  std::size_t cells = 0;  // cells written
  std::size_t changed = 0;

  bool operator==(const Attempt&) const = default;
};

struct CandidateSummary {
  CandidateKey key;
  double p_next = 0.0;
  double raw_p_next = 0.0;
  double u = 0.0;
  double cost = 0.0;
  double score = 0.0;
  bool positive = false;  // passed select-positives

  bool operator==(const CandidateSummary&) const = default;
};

struct IterationRecord {
  int iteration = 0;
  double f1_before = 0.0;
  double f1_after = 0.0;
  double spent_after = 0.0;
  std::vector<CandidateSummary> candidates;
  std::vector<Attempt> attempts;

  bool operator==(const IterationRecord&) const = default;
};

// Candidate evaluation of one iteration; reused until the data changes.
struct Round {
  int iteration = 0;
  std::uint64_t data_fingerprint = 0;
  std::vector<ScoredCandidate> candidates;  // every open key, unfiltered, in key order
  std::vector<CandidateKey> ranking;        // select-positives + sort
  std::map<CandidateKey, std::vector<PollutedState>> dprime;
};

struct Recommendation {
  ScoredCandidate candidate;
  bool fallback = false;
  bool buffered = false;
  double cost = 0.0;  // 0 when the buffer is applied
  // D'_f: cells temporarily polluted by the estimator pass, per split.
  std::vector<std::size_t> dprime_train;
  std::vector<std::size_t> dprime_test;
};

// Complete mutable state of a session; persisted verbatim.
struct SessionState {
  SessionConfig config;
  Dataset data;
  double f1 = 0.0;
  double initial_f1 = 0.0;
  SessionStatus status = SessionStatus::kActive;
  int iteration = 0;
  int steps_taken = 0;  // non-buffer cleaning steps
  std::uint64_t version = 0;
  BudgetLedger ledger;
  DiscrepancyLog discrepancies;
  CleaningBuffer buffer;
  BudgetCurve trajectory;
  std::map<CandidateKey, int> steps_done;
  std::map<CandidateKey, double> best_post_f1;
  std::set<CandidateKey> closed;
  std::set<FeatureId> fully_clean;
  std::set<CandidateKey> rejected;  // reverted during the current iteration
  std::vector<IterationRecord> records;
  // COMET-light keeps its first-pass candidates.
  std::vector<ScoredCandidate> frozen;
};

class Session {
 public:
  Session(Dataset data, SessionConfig config);
  explicit Session(SessionState state);

  const SessionState& state() const { return state_; }
  const Dataset& data() const { return state_.data; }
  SessionStatus status() const { return state_.status; }
  bool terminal() const { return state_.status != SessionStatus::kActive; }

  // Open (feature, error type) keys in key order.
  std::vector<CandidateKey> open_keys() const;
  double step_cost(CandidateKey key) const;

  // Steps 1-2 of an iteration, cached until the data changes. Returns
  // nothing when the session is terminal.
  std::optional<Recommendation> recommend();
  // The recommendation for a specific open key: the outstanding one when it
  // matches, otherwise a ranked alternative. Throws InvalidArgument when the
  // key is not open or not affordable.
  Recommendation recommend(CandidateKey key);

  // Executes a recommendation with truth-store cleaning.
  Attempt execute(const Recommendation& rec);
  // Executes with Cleaner-supplied values (interactive mode).
  Attempt execute(const Recommendation& rec, std::span<const CellValue> cells);

  // A full iteration: walk the ranking until a step is accepted, then fall back.
  std::optional<IterationRecord> run_iteration();
  void run();

  void mark_fully_clean(FeatureId feature);

  const Round* round() const { return round_ ? &*round_ : nullptr; }

 private:
  void refresh_status();
  void ensure_round();
  Recommendation make_recommendation(const ScoredCandidate& candidate, bool fallback) const;
  std::optional<Recommendation> fallback_choice();
  Attempt perform(const Recommendation& rec, std::optional<std::span<const CellValue>> submitted);
  void close_clean_keys();
  IterationRecord& current_record();

  SessionState state_;
  std::optional<Round> round_;
  std::map<CandidateKey, std::vector<PollutedState>> frozen_dprime_;
};

struct SessionResult {
  BudgetCurve trajectory;
  BudgetLedger ledger;
  DiscrepancyLog discrepancies;
  std::vector<IterationRecord> records;
  SessionStatus status = SessionStatus::kActive;
};

SessionResult run_session(Dataset data, const SessionConfig& config);

}  // namespace comet
