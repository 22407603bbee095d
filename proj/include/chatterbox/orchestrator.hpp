#pragma once

#include <chatterbox/annotation_api.hpp>
#include <chatterbox/clock.hpp>
#include <chatterbox/migration.hpp>
#include <chatterbox/runtime.hpp>

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace chatterbox::orchestrator {

struct AdapterConfig {
  std::string kind = "stub";  // "stub" or "http"
  std::string url;
  std::filesystem::path table;  // stub table file; empty uses the bundled one
};

struct Config {
  std::filesystem::path personas_dir;
  std::optional<std::filesystem::path> scenario;  // registers sim counterparties and seed targets
  std::vector<migration::PoolEntry> pool;          // empty: one default account per first name
  RuntimeOptions runtime;
  AdapterConfig dialogue;
  AdapterConfig captioner;
  bool api_enabled = true;
  api::ServerOptions api;
  std::filesystem::path event_log = "data/events.jsonl";
  std::filesystem::path export_dir = "data/export";
  std::string export_salt;
};

/// Relative paths resolve against `base_dir`. Throws ConfigError whose
/// message starts with the offending field path, e.g. "poll.p_seed: ...".
Config parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
/// Reads the file and applies the CHATTERBOX_AUTH_TOKEN override.
Config load_config(const std::filesystem::path& file);

struct ExportPaths {
  std::filesystem::path transcripts;
  std::filesystem::path audit;
};

/// Wires personas, simulated platforms, backends, the honeypot and the API.
class Orchestrator {
 public:
  Orchestrator(Config cfg, const Clock& clock);
  ~Orchestrator();
  Orchestrator(const Orchestrator&) = delete;
  Orchestrator& operator=(const Orchestrator&) = delete;

  /// Replays the event log, attaches it for append, provisions accounts and
  /// starts the API. Returns the number of replayed events.
  std::size_t start();
  /// Runs every wakeup that is due now.
  void tick();
  /// Ticks until `stop` is set, sleeping at most `max_sleep` between checks.
  void run(const std::atomic<bool>& stop, std::chrono::milliseconds max_sleep = std::chrono::milliseconds(500));
  /// Stops the API and flushes the log. Idempotent.
  void shutdown();

  ExportPaths export_data(bool deidentify) const;

  Honeypot& honeypot();
  PlatformSet& platforms();
  int api_port() const;
  const Config& config() const;

 private:
  struct State;
  std::unique_ptr<State> st_;
};

}  // namespace chatterbox::orchestrator
