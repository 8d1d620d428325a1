// comet: experiment runner, aggregation, synthetic data and the session server.
//
// Exit codes: 0 ok, 1 partial failures or runtime error, 2 configuration error.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "comet/harness.hpp"
#include "comet/parallel.hpp"
#include "comet/service.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kPartial = 1;
constexpr int kConfigError = 2;

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? std::string(v) : fallback;
}

void print_aggregate(const comet::Aggregate& agg) {
  std::cout << std::fixed << std::setprecision(4);
  for (const auto& s : agg.by_algorithm) {
    std::cout << "advantage " << s.group << " vs " << comet::to_string(s.contender) << ": mean " << s.mean
              << ", final " << s.final_value << " (" << s.runs << " runs)\n";
  }
  for (const auto& m : agg.mae) {
    std::cout << "mae " << m.algorithm << " " << m.scenario << ": " << m.mae << " (" << m.pairs << " steps)\n";
  }
}

int write_aggregate(const comet::ExperimentResult& result, const std::filesystem::path& dir) {
  const comet::Aggregate agg = comet::aggregate(result);
  std::ofstream out(dir / "aggregate.json");
  out << comet::aggregate_to_json(agg).dump(1) << '\n';
  print_aggregate(agg);
  return kOk;
}

int run_command(const std::string& config_path, std::string out_dir, int threads) {
  const comet::ExperimentConfig config = comet::load_config(config_path);
  if (threads > 0) comet::parallel_threads() = threads;
  if (out_dir.empty()) out_dir = "results/" + std::filesystem::path(config_path).stem().string();
  const comet::ExperimentResult result = comet::run_experiment(config);
  comet::write_result(result, out_dir);
  write_aggregate(result, out_dir);
  const std::size_t failures = result.failures();
  std::cout << "wrote " << out_dir << " (" << result.cells.size() << " settings, " << failures << " failures)\n";
  for (const auto& cell : result.cells) {
    if (!cell.ok) std::cerr << "setting " << cell.setting_index << " failed: " << cell.error << '\n';
    for (const auto& r : cell.runs) {
      if (cell.ok && !r.ok) {
        std::cerr << comet::to_string(cell.algorithm) << " seed " << cell.seed << " setting " << cell.setting_index
                  << " " << comet::to_string(r.method) << " failed: " << r.error << '\n';
      }
    }
  }
  return failures == 0 ? kOk : kPartial;
}

int synth_command(const std::string& spec_path, const std::string& out_path, const std::string& schema_path) {
  std::ifstream in(spec_path);
  if (!in) throw comet::ConfigError("cannot open " + spec_path);
  comet::SyntheticSpec spec;
  try {
    spec = comet::Json::parse(in).get<comet::SyntheticSpec>();
  } catch (const nlohmann::json::exception& e) {
    throw comet::ConfigError(std::string("synthetic spec: ") + e.what());
  }
  comet::Dataset data;
  try {
    data = comet::generate_synthetic(spec);
  } catch (const comet::InvalidArgument& e) {
    throw comet::ConfigError(e.what());
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw comet::Error("cannot write " + out_path);
  comet::write_csv(data, out);

  comet::Json columns = comet::Json::object();
  for (const auto& f : data.features()) {
    if (f.categorical()) {
      columns[f.name] = {{"kind", "categorical"}, {"categories", f.categories}};
    } else {
      columns[f.name] = "numerical";
    }
  }
  const comet::Json schema = {{"label", data.label_name()}, {"columns", columns}, {"classes", data.classes()}};
  const std::string path = schema_path.empty() ? out_path + ".schema.json" : schema_path;
  std::ofstream s(path);
  s << schema.dump(1) << '\n';
  std::cout << "wrote " << out_path << " (" << data.num_rows() << " rows) and " << path << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-cleaning recommendations under a budget"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int threads = 0;
  auto* run = app.add_subcommand("run", "Run an experiment configuration");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("-o,--out", out_dir, "Result directory (default results/<config name>)");
  run->add_option("-j,--threads", threads, "Worker threads (default: all cores)");

  std::string result_dir;
  auto* agg = app.add_subcommand("aggregate", "Aggregate a result directory");
  agg->add_option("result_dir", result_dir, "Directory written by run")->required();

  std::string spec_path, csv_path, schema_path;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("spec", spec_path, "Synthetic spec (JSON)")->required();
  synth->add_option("out", csv_path, "Output CSV")->required();
  synth->add_option("--schema", schema_path, "Schema output (default <out>.schema.json)");

  auto* session = app.add_subcommand("session", "Session API");
  session->require_subcommand(1);
  std::string host = env_or("COMET_HOST", "127.0.0.1");
  int port = std::atoi(env_or("COMET_PORT", "8080").c_str());
  std::string data_dir = env_or("COMET_DATA_DIR", "comet-data");
  std::size_t max_payload = 64 * 1024 * 1024;
  auto* serve = session->add_subcommand("serve", "Serve the HTTP session API");
  serve->add_option("--host", host, "Bind address (COMET_HOST)");
  serve->add_option("--port", port, "Port (COMET_PORT)");
  serve->add_option("--data-dir", data_dir, "Session directory (COMET_DATA_DIR)");
  serve->add_option("--max-payload", max_payload, "Request size limit in bytes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return run_command(config_path, out_dir, threads);
    if (*agg) return write_aggregate(comet::read_result(result_dir), result_dir);
    if (*synth) return synth_command(spec_path, csv_path, schema_path);
    if (*serve) {
      comet::Service service(comet::ServiceOptions{data_dir, max_payload});
      std::cout << "listening on " << host << ":" << port << " (sessions in " << data_dir << ")" << std::endl;
      comet::serve(service, host, port);
      return kOk;
    }
  } catch (const comet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kPartial;
  }
  return kOk;
}
