#pragma once

// HTTP session API over the recommender. Sessions live in memory and are
// written to <data_dir>/sessions/<id>.json after every mutation.

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "comet/serialize.hpp"

namespace httplib {
class Server;
}

namespace comet {

struct ServiceOptions {
  std::filesystem::path data_dir = "comet-data";
  std::size_t max_payload = 64 * 1024 * 1024;
};

struct ApiResponse {
  int status = 200;
  Json body;
};

// Builds the dataset of a session-creation request: an uploaded CSV with its
// schema, or a synthetic dataset reference, optionally pre-polluted.
Dataset session_dataset(const Json& request);
SessionConfig session_config(const Json& request, const Dataset& data);

class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();

  ApiResponse create_session(const std::string& body);
  ApiResponse get_session(const std::string& id);
  ApiResponse recommendation(const std::string& id);
  ApiResponse cleaning(const std::string& id, const std::string& body);
  ApiResponse history(const std::string& id);

  // Copy of a session's state, for inspection.
  std::optional<SessionState> state(const std::string& id);

  void mount(httplib::Server& server);
  const ServiceOptions& options() const { return options_; }

 private:
  struct Entry {
    std::mutex mutex;
    std::unique_ptr<Session> session;
    std::uint64_t audit_seq = 0;
  };

  std::shared_ptr<Entry> find(const std::string& id);
  void load_existing();
  void persist(const std::string& id, const Entry& entry) const;
  void audit(const std::string& id, Entry& entry, const std::string& event, int status) const;
  std::filesystem::path session_path(const std::string& id) const;

  ServiceOptions options_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t next_id_ = 1;
};

// Blocks serving on host:port until the server stops.
void serve(Service& service, const std::string& host, int port);

}  // namespace comet
