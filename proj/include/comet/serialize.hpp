#pragma once

// JSON persistence of datasets, sessions and their records.

#include <json.hpp>

#include "comet/recommender.hpp"
#include "comet/synthetic.hpp"

namespace comet {

using Json = nlohmann::json;

// Doubles that may be infinite (zero-cost scores) travel as "inf" / "-inf".
Json number_to_json(double v);
double number_from_json(const Json& j);

void to_json(Json& j, const CandidateKey& k);
void from_json(const Json& j, CandidateKey& k);
void to_json(Json& j, const ColumnData& c);
void from_json(const Json& j, ColumnData& c);
void to_json(Json& j, const Feature& f);
void from_json(const Json& j, Feature& f);
void to_json(Json& j, const TruthColumn& t);
void from_json(const Json& j, TruthColumn& t);
void to_json(Json& j, const Split& s);
void from_json(const Json& j, Split& s);
void to_json(Json& j, const Dataset& d);
void from_json(const Json& j, Dataset& d);

void to_json(Json& j, const ModelSpec& s);
void from_json(const Json& j, ModelSpec& s);
void to_json(Json& j, const CostModel& m);
void from_json(const Json& j, CostModel& m);
void to_json(Json& j, const CostAssignment& a);
void from_json(const Json& j, CostAssignment& a);
void to_json(Json& j, const EstimatorOptions& o);
void from_json(const Json& j, EstimatorOptions& o);
void to_json(Json& j, const SessionConfig& c);
void from_json(const Json& j, SessionConfig& c);

void to_json(Json& j, const CurvePoint& p);
void from_json(const Json& j, CurvePoint& p);
void to_json(Json& j, const BudgetCurve& c);
void from_json(const Json& j, BudgetCurve& c);
void to_json(Json& j, const LedgerEntry& e);
void from_json(const Json& j, LedgerEntry& e);
void to_json(Json& j, const BudgetLedger& l);
void from_json(const Json& j, BudgetLedger& l);
void to_json(Json& j, const DiscrepancyLog& l);
void from_json(const Json& j, DiscrepancyLog& l);
void to_json(Json& j, const CellValue& c);
void from_json(const Json& j, CellValue& c);
void to_json(Json& j, const CleaningBuffer& b);
void from_json(const Json& j, CleaningBuffer& b);

void to_json(Json& j, const Posterior& p);
void from_json(const Json& j, Posterior& p);
void to_json(Json& j, const Prediction& p);
void from_json(const Json& j, Prediction& p);
void to_json(Json& j, const ScoredCandidate& c);
void from_json(const Json& j, ScoredCandidate& c);
void to_json(Json& j, const Attempt& a);
void from_json(const Json& j, Attempt& a);
void to_json(Json& j, const CandidateSummary& c);
void from_json(const Json& j, CandidateSummary& c);
void to_json(Json& j, const IterationRecord& r);
void from_json(const Json& j, IterationRecord& r);
void to_json(Json& j, const SessionState& s);
void from_json(const Json& j, SessionState& s);

void to_json(Json& j, const FeaturePollution& f);
void from_json(const Json& j, FeaturePollution& f);
void to_json(Json& j, const PrePollutionSetting& s);
void from_json(const Json& j, PrePollutionSetting& s);
void to_json(Json& j, const SyntheticSpec& s);
void from_json(const Json& j, SyntheticSpec& s);

// Parses a cost assignment given either as one schedule string for every
// error type or as an object of error type -> schedule (plus "default").
CostAssignment parse_cost_assignment(const Json& j);

}  // namespace comet
