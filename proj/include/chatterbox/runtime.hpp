#pragma once

#include <chatterbox/clock.hpp>
#include <chatterbox/conversation.hpp>
#include <chatterbox/media_caption.hpp>
#include <chatterbox/migration.hpp>
#include <chatterbox/msg_queue.hpp>
#include <chatterbox/persona.hpp>
#include <chatterbox/platform.hpp>
#include <chatterbox/poll_seed.hpp>
#include <chatterbox/prompt.hpp>

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

namespace chatterbox {

struct RuntimeOptions {
  poll::PollConfig poll;
  Seconds delay_min{30};
  Seconds delay_max{900};
  int max_retries = 3;
  int candidates_k = 3;
  int first_n_human = 10;
  int checkpoint_every = 10;
  Seconds ignore_cooldown = queue::kDefaultIgnoreCooldown;
  std::uint64_t seed = 1;
  std::vector<std::string> openers = {"Hello", "Hi, nice to meet you", "Hi, doing well, you?"};
};

struct AnnotatorAction {
  enum class Verb {
    ignore,
    interact,
    toggle_auto,
    regenerate,
    submit,
    approve_selfie,
    approve_migration,
    deny,
    snooze,
    halt,
  };
  std::string annotator_id;
  std::string thread_id;
  Verb verb = Verb::submit;
  int opener_index = 0;
  std::string text;
  std::string asset_id;
  std::optional<int> template_index;
  std::optional<Seconds> snooze_for;
  // Optimistic concurrency: the thread version the annotator last saw.
  std::optional<std::uint64_t> expected_version;
};

std::string_view to_string(AnnotatorAction::Verb v);
AnnotatorAction::Verb parse_verb(std::string_view s);
/// Throws ParseError naming the offending field.
AnnotatorAction annotator_action_from_json(const nlohmann::json& j);

struct ActResult {
  std::string thread_id;
  ThreadState state = ThreadState::new_thread;
  std::uint64_t version = 0;
  std::vector<std::string> item_ids;
  std::vector<prompt::ResponseCandidate> candidates;
};

struct TriageMessage {
  std::string text;
  std::string at;
  std::string at_local;
};

struct TriageRow {
  std::string thread_id;
  std::string persona_id;
  std::string persona_name;
  PlatformId platform = PlatformId::ts_like;
  std::vector<TriageMessage> inbound;
  std::string sender_username;
  std::string sender_profile_thumbnail;
  std::uint64_t version = 0;
};

struct TriageDecision {
  std::string thread_id;
  bool interact = false;
  int opener_index = 0;
  std::string annotator_id;
  std::optional<std::uint64_t> expected_version;
};

struct TriageResult {
  std::string thread_id;
  bool ok = false;
  std::string error;  // "conflict", "not_found", "state"
  std::string detail;
  std::string item_id;
  std::optional<Instant> dispatch_at;
};

struct ThreadSummary {
  std::string thread_id;
  std::string persona_id;
  ThreadState state = ThreadState::new_thread;
  std::vector<PlatformId> platforms;
  std::size_t message_count = 0;
  bool needs_review = false;
  std::string pending;  // "", "migration", "selfie"
  int scammer_msgs_since_review = 0;
  int next_checkpoint_in = 0;
  std::uint64_t version = 0;
  Instant last_activity{};
};

nlohmann::json to_json(const TriageRow& r);
nlohmann::json to_json(const TriageResult& r);
nlohmann::json to_json(const ThreadSummary& s);
nlohmann::json to_json(const ActResult& r);

/// The honeypot service: threads, queue and pool behind a single writer.
///
/// Every state change is an event. Live operations build events and pass
/// them through emit(), which appends to the log (if attached) and applies
/// them; replay() applies a recorded log and yields the same state.
class Honeypot {
 public:
  Honeypot(const Clock& clock, PlatformSet& platforms, std::vector<persona::Persona> personas,
           persona::PolicyLibrary policies, migration::AccountPool pool,
           prompt::DialogueBackend& dialogue, caption::Captioner& captioner, RuntimeOptions opts);
  Honeypot(const Honeypot&) = delete;
  Honeypot& operator=(const Honeypot&) = delete;

  /// Registers accounts, subscribes messenger webhooks and schedules pollers.
  /// Emits no events.
  void provision();

  void attach_log(queue::EventLog* log);
  /// Applies recorded events without touching platforms or backends.
  void replay(const std::vector<nlohmann::json>& events);
  /// Called after every emitted event with the event and its sequence number.
  void set_observer(std::function<void(const nlohmann::json&)> fn);

  // --- scheduling -------------------------------------------------------
  std::optional<Instant> next_wakeup() const;
  /// Handles every poll, dispatch and snooze expiry due at clock.now().
  void step();
  /// Advances a simulated clock wakeup by wakeup up to `until`.
  void run_until(SimClock& clock, Instant until, const std::function<void()>& after_step = {});

  // --- annotation -------------------------------------------------------
  std::vector<TriageRow> list_triage() const;
  std::vector<TriageResult> triage_act(const std::vector<TriageDecision>& batch);
  std::vector<ThreadSummary> list_conversations(std::optional<PlatformId> platform = std::nullopt) const;
  /// Throws NotFound.
  ConversationThread thread(const std::string& thread_id) const;
  /// Throws NotFound, StateError, Conflict or SerializationError.
  ActResult act(const AnnotatorAction& a);
  std::vector<prompt::ResponseCandidate> candidates(const std::string& thread_id, int k,
                                                    const std::string& annotator_id = "");

  // --- views -------------------------------------------------------------
  std::vector<ConversationThread> threads() const;
  std::vector<queue::QueueItem> queue_items() const;
  std::vector<nlohmann::json> audit_log() const;
  std::vector<poll::SeedAction> seed_actions() const;
  const persona::Persona& persona(const std::string& persona_id) const;
  const std::vector<persona::Persona>& personas() const { return personas_; }
  const migration::AccountPool& pool() const;
  /// Handle of a persona's account on an origin platform.
  std::string origin_handle(const std::string& persona_id) const;
  std::optional<std::string> find_thread(const std::string& persona_id, PlatformId platform,
                                         const std::string& scammer_handle) const;
  bool needs_review(const std::string& thread_id) const;
  const RuntimeOptions& options() const { return opts_; }
  std::uint64_t events_emitted() const;

  /// Canonical state document; identical for live and replayed instances.
  nlohmann::json snapshot() const;
  std::string snapshot_text() const;

 private:
  struct PollerEntry {
    poll::PollState state;
    std::string persona_id;
  };

  void emit(nlohmann::json event);
  void apply(const nlohmann::json& event);
  ConversationThread& thread_ref(const std::string& id);
  const ConversationThread& thread_cref(const std::string& id) const;
  const persona::Persona& persona_for(const ConversationThread& t) const;
  std::string new_item_id();
  std::string new_thread_id();
  bool needs_review_locked(const ConversationThread& t) const;

  void poll_account(PollerEntry& p, Instant now);
  void handle_inbound(PlatformId platform, const std::string& honeypot_account,
                      const std::string& from, const Payload& payload, Instant at,
                      const std::optional<AccountMetadata>& sender);
  void on_webhook(PlatformId platform, const Notification& n);
  void react_to_inbound(const std::string& thread_id, const Message& m);
  void drop_open_items(const std::string& thread_id, const std::string& reason,
                       bool keep_approvals);
  void auto_reply(const std::string& thread_id);
  void dispatch(const std::string& item_id, Instant now);
  void send_reintro(const std::string& thread_id);
  PlatformId reply_platform(const ConversationThread& t) const;
  prompt::ResponseContext response_context(const ConversationThread& t, Instant now) const;
  std::string enqueue_reply(const ConversationThread& t, queue::ItemKind kind, Payload payload,
                            const std::string& origin);
  void audit(const AnnotatorAction& a, const nlohmann::json& extra = {});
  bool contains_own_number(const ConversationThread& t, const std::string& text) const;

  const Clock& clock_;
  PlatformSet& platforms_;
  std::vector<persona::Persona> personas_;
  std::map<std::string, std::size_t> persona_index_;
  std::map<std::string, std::string> origin_handles_;
  persona::PolicyLibrary policies_;
  migration::AccountPool pool_;
  prompt::DialogueBackend& dialogue_;
  caption::Captioner& captioner_;
  RuntimeOptions opts_;
  queue::DelaySampler sampler_;

  mutable std::recursive_mutex mu_;
  std::mt19937_64 rng_;
  queue::EventLog* log_ = nullptr;
  std::function<void(const nlohmann::json&)> observer_;

  std::map<std::string, ConversationThread> threads_;
  std::map<std::string, std::string> thread_index_;
  queue::MessageQueue queue_;
  poll::FollowBackTracker follow_backs_;
  std::vector<poll::SeedAction> seeds_;
  std::vector<nlohmann::json> social_inbound_;
  std::vector<nlohmann::json> audit_;
  std::map<std::string, std::uint64_t> cursors_;
  std::vector<PollerEntry> pollers_;
  std::uint64_t next_thread_ = 1;
  std::uint64_t next_item_ = 1;
  std::uint64_t event_seq_ = 0;
};

}  // namespace chatterbox
