#pragma once

#include <chatterbox/msg_queue.hpp>
#include <chatterbox/runtime.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace chatterbox::sim {

struct PersonaSpec {
  std::string key;
  std::uint64_t seed = 1;
  std::string first_name;
  std::string last_name;
  std::string city;
};

struct ActorSpec {
  std::string key;
  std::string persona;  // default target persona key
  PlatformId platform = PlatformId::ts_like;
  std::string handle;
  std::string wa_number;
  AccountMetadata metadata;
};

struct Expect {
  bool reply = false;
  bool no_reply = false;
  std::vector<std::string> contains;
  std::vector<std::string> not_contains;
  std::optional<std::string> matches;
  bool no_phone = false;
  std::optional<PlatformId> platform;
  std::optional<bool> refusal;
  std::optional<bool> media;
  std::optional<ThreadState> state;

  bool wants_reply() const;
};

struct Branch {
  std::string pattern;
  std::string go_to;
};

struct Step {
  std::string label;
  std::string actor;
  std::string persona;  // overrides the actor's default target
  Seconds wait{0};
  std::optional<PlatformId> platform;  // defaults to the actor's origin platform
  std::optional<Payload> send;
  bool follow = false;
  std::optional<Expect> expect;
  std::optional<Branch> branch_on;
  Seconds reply_timeout{24 * 3600};
};

/// How the scripted annotator answers the honeypot's review prompts.
struct AnnotatorPolicy {
  std::string annotator_id = "sim-annotator";
  bool interact = true;
  int opener_index = 0;
  bool auto_mode = true;
  bool approve_migration = true;
  bool approve_selfie = true;
  std::optional<int> template_index;
  int selfie_asset = 0;
  std::string selfie_text;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 1;
  Instant start{};
  std::vector<PersonaSpec> personas;
  std::vector<ActorSpec> actors;
  AnnotatorPolicy annotator;
  std::vector<std::string> trending;
  std::vector<std::string> suggested;
  std::vector<std::string> groups;
  std::map<std::string, std::string> captions;
  Seconds final_wait{0};
  std::vector<Step> steps;
};

/// Throws ParseError naming the offending field.
Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);

struct TraceEntry {
  Instant at{};
  std::string side;  // "scammer" or "persona"
  std::string actor;
  PlatformId platform = PlatformId::ts_like;
  std::string text;
  std::string media;
  std::string step;
};

struct StepResult {
  std::size_t index = 0;
  std::string label;
  bool ok = true;
  std::string detail;
  std::optional<std::string> reply;
};

struct RunResult {
  std::vector<TraceEntry> trace;
  std::vector<StepResult> steps;
  bool passed = true;
  std::string failure;
  Instant end{};
  std::vector<ConversationThread> threads;
  nlohmann::json snapshot;

  nlohmann::json trace_json() const;
};

struct RunnerOptions {
  queue::EventLog* log = nullptr;
  std::function<void(const nlohmann::json&)> observer;
  /// Throw ScenarioFailure at the first failing expectation instead of
  /// recording it and continuing.
  bool throw_on_failure = true;
  RuntimeOptions runtime;
  bool runtime_set = false;
};

/// One isolated system instance driven by a scenario on a simulated clock.
class ScenarioRunner {
 public:
  explicit ScenarioRunner(Scenario s, RunnerOptions opts = {});
  ~ScenarioRunner();

  RunResult run();

  Honeypot& honeypot();
  SimClock& clock();
  PlatformSet& platforms();
  const prompt::PolicyStubBackend& backend() const;
  /// persona key -> persona id
  const std::map<std::string, std::string>& persona_ids() const;

 private:
  struct State;
  std::unique_ptr<State> st_;
};

/// Acts on triage rows, pending approvals and checkpoints according to a policy.
class SimulatedAnnotator {
 public:
  SimulatedAnnotator(Honeypot& hp, AnnotatorPolicy policy) : hp_(hp), policy_(std::move(policy)) {}
  /// Handles everything currently waiting for a human; returns actions taken.
  int act_once();

 private:
  Honeypot& hp_;
  AnnotatorPolicy policy_;
};

}  // namespace chatterbox::sim
