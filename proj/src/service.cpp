#include "comet/service.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

// After Eigen: the resolver headers pulled in here define _res.
#include <httplib.h>

namespace comet {

namespace {

// Maps to a 4xx response inside a handler.
class HttpError : public Error {
 public:
  HttpError(int status, const std::string& message) : Error(message), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

ApiResponse error_response(int status, const std::string& message, Json extra = Json::object()) {
  extra["error"] = message;
  return {status, std::move(extra)};
}

Json parse_body(const std::string& body) {
  if (body.find_first_not_of(" \t\r\n") == std::string::npos) return Json::object();
  try {
    Json j = Json::parse(body);
    if (!j.is_object()) throw HttpError(400, "request body must be a JSON object");
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw HttpError(400, std::string("malformed JSON: ") + e.what());
  }
}

FeatureId resolve_feature(const Dataset& data, const Json& j) {
  if (j.is_number_unsigned()) {
    const auto f = j.get<FeatureId>();
    if (f >= data.num_features()) throw HttpError(422, "feature index out of range");
    return f;
  }
  if (!j.is_string()) throw HttpError(422, "feature must be a name or an index");
  const auto f = data.find_feature(j.get<std::string>());
  if (!f) throw HttpError(422, "unknown feature '" + j.get<std::string>() + "'");
  return *f;
}

std::vector<CellValue> parse_cells(const Dataset& data, FeatureId f, const Json& j) {
  if (!j.is_array()) throw HttpError(422, "cleaned_cells must be an array");
  const Feature& feature = data.feature(f);
  std::vector<CellValue> cells;
  for (const Json& c : j) {
    if (!c.is_object() || !c.contains("row") || !c["row"].is_number_unsigned()) {
      throw HttpError(422, "each cleaned cell needs a non-negative integer row");
    }
    CellValue cell;
    cell.row = c["row"].get<std::size_t>();
    if (cell.row >= data.num_rows()) throw HttpError(422, "row " + std::to_string(cell.row) + " out of range");
    cell.missing = c.value("missing", false) || !c.contains("value") || c["value"].is_null();
    if (!cell.missing) {
      const Json& v = c["value"];
      if (feature.categorical()) {
        if (v.is_string()) {
          const auto& cats = feature.categories;
          auto it = std::find(cats.begin(), cats.end(), v.get<std::string>());
          if (it == cats.end()) throw HttpError(422, "unknown category '" + v.get<std::string>() + "'");
          cell.value = static_cast<double>(it - cats.begin());
        } else if (v.is_number_integer() && v.get<long long>() >= 0 &&
                   v.get<long long>() < feature.category_count()) {
          cell.value = v.get<double>();
        } else {
          throw HttpError(422, "categorical value must be a known category");
        }
      } else {
        if (!v.is_number() || !std::isfinite(v.get<double>())) {
          throw HttpError(422, "numerical value must be a finite number");
        }
        cell.value = v.get<double>();
      }
    }
    cells.push_back(cell);
  }
  return cells;
}

Json key_json(const Dataset& data, CandidateKey key) {
  return {{"feature", data.feature(key.feature).name},
          {"feature_index", key.feature},
          {"error_type", to_string(key.error)}};
}

Json attempt_json(const Dataset& data, const Attempt& a) {
  Json j = a;
  j["feature"] = data.feature(a.key.feature).name;
  return j;
}

Json status_json(const std::string& id, const SessionState& s) {
  return {{"id", id},
          {"mode", to_string(s.config.mode)},
          {"status", to_string(s.status)},
          {"f1", s.f1},
          {"initial_f1", s.initial_f1},
          {"spent", s.ledger.spent()},
          {"remaining_budget", s.ledger.remaining()},
          {"iteration", s.iteration},
          {"state_version", s.version}};
}

std::size_t attempt_count(const SessionState& s) {
  std::size_t n = 0;
  for (const IterationRecord& r : s.records) n += r.attempts.size();
  return n;
}

std::vector<Attempt> attempts_since(const SessionState& s, std::size_t skip) {
  std::vector<Attempt> out;
  std::size_t i = 0;
  for (const IterationRecord& r : s.records) {
    for (const Attempt& a : r.attempts) {
      if (i++ >= skip) out.push_back(a);
    }
  }
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

Dataset session_dataset(const Json& request) {
  Dataset data;
  bool pristine = false;
  if (request.contains("csv")) {
    if (!request.contains("schema")) throw ParseError("a CSV upload needs a schema");
    const Json& schema = request["schema"];
    const Schema s = parse_schema(schema.is_string() ? schema.get<std::string>() : schema.dump());
    std::istringstream in(request["csv"].get<std::string>());
    data = read_csv(in, s);
    split(data, request.value("test_fraction", 0.2), request.value("split_seed", std::uint64_t{0}));
  } else if (request.contains("dataset") && request["dataset"].contains("synthetic")) {
    data = generate_synthetic(request["dataset"]["synthetic"].get<SyntheticSpec>());
    pristine = true;
  } else {
    throw ParseError("request needs csv + schema or a dataset reference");
  }

  if (request.contains("pre_pollution")) {
    // Simulation over a clean input: the upload becomes the truth store.
    if (!pristine) data.capture_truth();
    const Json& p = request["pre_pollution"];
    PrePollutionSetting setting;
    if (p.contains("setting")) {
      setting = p["setting"].get<PrePollutionSetting>();
    } else {
      PrePollutionOptions options;
      options.mean_level = p.value("mean", options.mean_level);
      options.cap = p.value("cap", options.cap);
      const std::string scenario = p.value("scenario", std::string("multi"));
      options.multi_error = scenario == "multi";
      if (!options.multi_error) options.single_error = parse_error_type(scenario);
      setting = sample_pre_pollution(data, options, p.value("seed", std::uint64_t{0}));
    }
    apply_pre_pollution(data, setting);
  } else if (request.contains("dirty_cells")) {
    // Interactive uploads name the cells known to be dirty.
    for (const auto& [name, rows] : request["dirty_cells"].items()) {
      const auto f = data.find_feature(name);
      if (!f) throw ParseError("dirty_cells names unknown feature '" + name + "'");
      auto& prov = data.mutable_cells(*f).provenance;
      for (const Json& r : rows) {
        const auto row = r.get<std::size_t>();
        if (row >= prov.size()) throw ParseError("dirty_cells row out of range");
        prov[row] = Provenance::kDirtyPrePollution;
      }
    }
  }
  data.validate();
  return data;
}

SessionConfig session_config(const Json& request, const Dataset& data) {
  SessionConfig c;
  c.spec.algorithm = parse_algorithm(request.value("algorithm", std::string("logistic_regression")));
  c.spec.hyperparameters = request.value("hyperparameters", std::map<std::string, double>{});
  c.spec.seed = request.value("model_seed", std::uint64_t{0});
  validate(c.spec);
  if (request.contains("costs")) c.costs = parse_cost_assignment(request["costs"]);
  c.budget = request.value("budget", c.budget);
  if (!(c.budget >= 0.0) || !std::isfinite(c.budget)) throw InvalidArgument("budget must be non-negative");
  if (request.contains("error_types")) {
    c.error_types.clear();
    for (const Json& e : request["error_types"]) c.error_types.push_back(parse_error_type(e.get<std::string>()));
  }
  if (request.contains("estimator")) c.estimator = request["estimator"].get<EstimatorOptions>();
  c.seed = request.value("seed", std::uint64_t{0});
  const std::string mode = request.value("mode", std::string(data.has_truth() ? "simulated" : "interactive"));
  c.mode = parse_session_mode(mode);
  return c;
}

Service::Service(ServiceOptions options) : options_(std::move(options)) {
  std::filesystem::create_directories(options_.data_dir / "sessions");
  load_existing();
}

Service::~Service() = default;

std::filesystem::path Service::session_path(const std::string& id) const {
  return options_.data_dir / "sessions" / (id + ".json");
}

void Service::load_existing() {
  for (const auto& entry : std::filesystem::directory_iterator(options_.data_dir / "sessions")) {
    const auto& path = entry.path();
    if (path.extension() != ".json") continue;
    std::ifstream in(path);
    Json j;
    in >> j;
    auto e = std::make_shared<Entry>();
    e->session = std::make_unique<Session>(j.at("state").get<SessionState>());
    e->audit_seq = j.value("audit_seq", std::uint64_t{0});
    const std::string id = j.at("id").get<std::string>();
    sessions_[id] = e;
    if (id.size() > 1) next_id_ = std::max<std::uint64_t>(next_id_, std::stoull(id.substr(1)) + 1);
  }
}

void Service::persist(const std::string& id, const Entry& entry) const {
  const Json j = {{"id", id}, {"audit_seq", entry.audit_seq}, {"state", entry.session->state()}};
  write_atomic(session_path(id), j.dump());
}

void Service::audit(const std::string& id, Entry& entry, const std::string& event, int status) const {
  std::ofstream out(options_.data_dir / "sessions" / (id + ".audit.jsonl"), std::ios::app);
  const Json line = {{"seq", ++entry.audit_seq},
                     {"event", event},
                     {"status", status},
                     {"state_version", entry.session->state().version},
                     {"time", std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch()).count()}};
  out << line.dump() << '\n';
}

std::shared_ptr<Service::Entry> Service::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::optional<SessionState> Service::state(const std::string& id) {
  auto entry = find(id);
  if (!entry) return std::nullopt;
  std::lock_guard lock(entry->mutex);
  return entry->session->state();
}

ApiResponse Service::create_session(const std::string& body) {
  std::unique_ptr<Session> session;
  try {
    const Json request = parse_body(body);
    Dataset data = session_dataset(request);
    SessionConfig config = session_config(request, data);
    session = std::make_unique<Session>(std::move(data), std::move(config));
  } catch (const HttpError& e) {
    return error_response(e.status(), e.what());
  } catch (const nlohmann::json::exception& e) {
    return error_response(400, std::string("invalid request: ") + e.what());
  } catch (const Error& e) {
    return error_response(400, e.what());
  }

  auto entry = std::make_shared<Entry>();
  entry->session = std::move(session);
  std::string id;
  {
    std::lock_guard lock(mutex_);
    std::ostringstream name;
    name << 's' << std::setw(6) << std::setfill('0') << next_id_++;
    id = name.str();
    sessions_[id] = entry;
  }
  std::lock_guard lock(entry->mutex);
  audit(id, *entry, "create", 201);
  persist(id, *entry);
  return {201, status_json(id, entry->session->state())};
}

ApiResponse Service::get_session(const std::string& id) {
  auto entry = find(id);
  if (!entry) return error_response(404, "unknown session '" + id + "'");
  std::lock_guard lock(entry->mutex);
  return {200, status_json(id, entry->session->state())};
}

ApiResponse Service::recommendation(const std::string& id) {
  auto entry = find(id);
  if (!entry) return error_response(404, "unknown session '" + id + "'");
  std::lock_guard lock(entry->mutex);
  Session& session = *entry->session;
  const std::optional<Recommendation> rec = session.recommend();
  const SessionState& s = session.state();
  if (!rec) {
    return error_response(409, "session is " + std::string(to_string(s.status)),
                          {{"status", to_string(s.status)}, {"state_version", s.version}});
  }
  const Dataset& data = s.data;
  const ScoredCandidate& c = rec->candidate;
  Json body = key_json(data, c.key());
  body["score"] = number_to_json(c.score);
  body["p_next"] = c.prediction.p_next;
  body["raw_p_next"] = c.prediction.raw_p_next;
  body["u"] = c.prediction.u;
  body["current_f1"] = s.f1;
  body["cost"] = rec->cost;
  body["fallback"] = rec->fallback;
  body["buffered"] = rec->buffered;
  body["dprime_entries"] = {{"train", rec->dprime_train}, {"test", rec->dprime_test}};
  body["remaining_budget"] = s.ledger.remaining();
  body["state_version"] = s.version;
  Json ranking = Json::array();
  if (const Round* round = session.round()) {
    for (const CandidateKey& key : round->ranking) {
      for (const ScoredCandidate& sc : round->candidates) {
        if (sc.key() != key) continue;
        Json r = key_json(data, key);
        r["score"] = number_to_json(sc.score);
        r["p_next"] = sc.prediction.p_next;
        r["u"] = sc.prediction.u;
        r["cost"] = sc.cost;
        r["rejected"] = s.rejected.contains(key);
        ranking.push_back(std::move(r));
      }
    }
  }
  body["ranking"] = ranking;
  return {200, body};
}

ApiResponse Service::cleaning(const std::string& id, const std::string& body) {
  auto entry = find(id);
  if (!entry) return error_response(404, "unknown session '" + id + "'");
  std::lock_guard lock(entry->mutex);
  Session& session = *entry->session;
  const auto finish = [&](ApiResponse r) {
    audit(id, *entry, "cleaning", r.status);
    if (r.status < 300) persist(id, *entry);
    return r;
  };

  try {
    const Json request = parse_body(body);
    const SessionState& s = session.state();
    if (request.contains("state_version") && request["state_version"].get<std::uint64_t>() != s.version) {
      return finish(error_response(409, "stale state_version", {{"state_version", s.version}}));
    }
    const Dataset& data = s.data;
    const bool mark = request.value("mark_fully_clean", false);
    const bool has_cells = request.contains("cleaned_cells");
    const std::optional<FeatureId> feature =
        request.contains("feature") ? std::optional<FeatureId>(resolve_feature(data, request["feature"])) : std::nullopt;

    if (mark && !has_cells) {
      if (!feature) throw HttpError(422, "mark_fully_clean needs a feature");
      session.mark_fully_clean(*feature);
      Json out = status_json(id, session.state());
      out["marked_fully_clean"] = data.feature(*feature).name;
      return finish({200, out});
    }

    session.recommend();
    if (session.terminal()) {
      return finish(error_response(409, "session is " + std::string(to_string(s.status)),
                                   {{"status", to_string(s.status)}, {"state_version", s.version}}));
    }

    const std::size_t before = attempt_count(s);
    if (!feature) {
      if (has_cells) throw HttpError(422, "cleaned_cells need a feature");
      if (s.config.mode != SessionMode::kSimulated) throw HttpError(422, "interactive sessions need cleaned_cells");
      session.run_iteration();
    } else {
      CandidateKey key{*feature, ErrorType::kMissingValues};
      if (request.contains("error_type")) {
        key.error = parse_error_type(request["error_type"].get<std::string>());
      } else {
        const auto top = session.recommend();
        std::vector<CandidateKey> open;
        for (const CandidateKey& k : session.open_keys()) {
          if (k.feature == *feature) open.push_back(k);
        }
        if (top && top->candidate.key().feature == *feature) {
          key = top->candidate.key();
        } else if (open.size() == 1) {
          key = open.front();
        } else {
          throw HttpError(422, "error_type is required for this feature");
        }
      }
      const Recommendation rec = session.recommend(key);
      if (has_cells) {
        const std::vector<CellValue> cells = parse_cells(data, *feature, request["cleaned_cells"]);
        if (cells.empty() && !rec.buffered) throw HttpError(422, "cleaned_cells is empty");
        session.execute(rec, cells);
      } else if (s.config.mode == SessionMode::kSimulated) {
        session.execute(rec);
      } else if (rec.buffered) {
        session.execute(rec, std::span<const CellValue>{});
      } else {
        throw HttpError(422, "interactive sessions need cleaned_cells");
      }
      if (mark) session.mark_fully_clean(*feature);
    }

    const SessionState& after = session.state();
    const std::vector<Attempt> attempts = attempts_since(after, before);
    Json out = status_json(id, after);
    Json list = Json::array();
    for (const Attempt& a : attempts) list.push_back(attempt_json(after.data, a));
    const bool accepted = !attempts.empty() && attempts.back().outcome != StepOutcome::kRejected;
    out["accepted"] = accepted;
    out["reverted"] = !accepted;
    out["outcome"] = attempts.empty() ? "none" : std::string(to_string(attempts.back().outcome));
    out["attempts"] = list;
    out["new_f1"] = after.f1;
    out["trajectory"] = after.trajectory;
    Json buffered = Json::array();
    for (const auto& [key, cells] : after.buffer.entries()) buffered.push_back(key_json(after.data, key));
    out["buffered"] = buffered;
    return finish({200, out});
  } catch (const HttpError& e) {
    return finish(error_response(e.status(), e.what(), {{"state_version", session.state().version}}));
  } catch (const BudgetExceededError& e) {
    return finish(error_response(409, e.what(), {{"state_version", session.state().version}}));
  } catch (const nlohmann::json::exception& e) {
    return finish(error_response(422, std::string("invalid request: ") + e.what()));
  } catch (const Error& e) {
    return finish(error_response(422, e.what(), {{"state_version", session.state().version}}));
  }
}

ApiResponse Service::history(const std::string& id) {
  auto entry = find(id);
  if (!entry) return error_response(404, "unknown session '" + id + "'");
  std::lock_guard lock(entry->mutex);
  const SessionState& s = entry->session->state();
  Json body = status_json(id, s);
  Json full = s;
  for (const char* key : {"config", "trajectory", "ledger", "discrepancies", "records", "buffer", "closed",
                          "fully_clean", "steps_done", "best_post_f1"}) {
    body[key] = full[key];
  }
  return {200, body};
}

void Service::mount(httplib::Server& server) {
  server.set_payload_max_length(options_.max_payload);
  const auto reply = [](httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Post("/sessions", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, create_session(req.body));
  });
  server.Get(R"(/sessions/([^/]+))", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, get_session(req.matches[1]));
  });
  server.Get(R"(/sessions/([^/]+)/recommendation)", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, recommendation(req.matches[1]));
  });
  server.Post(R"(/sessions/([^/]+)/cleaning)", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, cleaning(req.matches[1], req.body));
  });
  server.Get(R"(/sessions/([^/]+)/history)", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, history(req.matches[1]));
  });
  server.set_exception_handler([reply](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    reply(res, error_response(500, message));
  });
}

void serve(Service& service, const std::string& host, int port) {
  httplib::Server server;
  service.mount(server);
  if (!server.listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace comet
