#pragma once

#include <chatterbox/analytics.hpp>
#include <chatterbox/runtime.hpp>
#include <chatterbox/scammer_sim.hpp>

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

namespace testsupport {

using namespace chatterbox;

std::filesystem::path source_dir();
std::filesystem::path scenario_path(const std::string& name);
/// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& tag);

persona::Persona make_persona(std::uint64_t seed, const std::string& first_name = "",
                              const std::string& city = "New York");

/// A honeypot on simulated platforms with the bundled policy stub.
struct Rig {
  SimClock clock;
  PlatformSet platforms;
  prompt::PolicyStubBackend stub;
  prompt::ScriptedBackend scripted;
  caption::StubCaptioner captioner;
  std::unique_ptr<Honeypot> hp;
  std::vector<nlohmann::json> events;

  explicit Rig(std::vector<persona::Persona> personas, RuntimeOptions opts = {}, bool use_scripted = false,
               Instant start = parse_utc("2025-07-07T14:00:00Z"));

  /// Registers `handle` on `platform` and sends from it to the persona's origin account.
  void scammer_says(PlatformId platform, const std::string& handle, const std::string& persona_id,
                    const std::string& text, std::optional<MediaRef> media = std::nullopt);
  /// Sends on the messenger to the persona's shared account.
  void scammer_says_wa(const std::string& number, const std::string& persona_id, const std::string& text,
                       std::optional<MediaRef> media = std::nullopt);
  void run_for(Seconds d);
  std::string only_thread() const;
};

/// Randomized auto-mode conversation for the checkpoint and serialization
/// properties: bursts, long gaps, and an occasional migration and selfie ask.
sim::Scenario random_auto_trace(std::uint64_t seed);

struct TraceCheck {
  int checkpoint_violations = 0;
  int bootstrap_violations = 0;
  int serialization_violations = 0;
  int auto_dispatches = 0;
  int reviews = 0;
  std::vector<std::string> details;
};

/// Recomputes review windows from the raw event stream, independent of the
/// runtime's own counters.
TraceCheck check_events(const std::vector<nlohmann::json>& events, int checkpoint_every, int first_n_human);
/// Persona messages back to back inside one segment, reintro excepted.
int serialization_violations(const std::vector<ConversationThread>& threads, std::vector<std::string>* details = nullptr);

/// Field-by-field comparison of a StatsReport document against the oracle.
std::vector<std::string> compare_report(const nlohmann::json& actual, const nlohmann::json& expected, double tol = 1e-9);

/// Runs the walkthrough with a log, captures the snapshot right after event
/// `k`, truncates a copy of the log there with a torn partial record appended,
/// and replays it into a fresh instance. Returns "" on a byte-identical match.
std::string crash_replay_mismatch(const std::filesystem::path& scenario, std::uint64_t k, std::uint64_t* total_events = nullptr);

}  // namespace testsupport
