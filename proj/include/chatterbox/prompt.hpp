#pragma once

#include <chatterbox/conversation.hpp>
#include <chatterbox/persona.hpp>
#include <chatterbox/platform.hpp>

#include <atomic>
#include <deque>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <json.hpp>

namespace chatterbox::prompt {

struct TurnRecord {
  Instant timestamp_utc{};
  std::string timestamp_local;
  PlatformId platform = PlatformId::ts_like;
  Role role = Role::scammer;
  std::string content;
};

nlohmann::json to_json(const TurnRecord& t);
TurnRecord make_turn(const Message& m, const std::string& zone);
/// Whole thread, every segment, in chronological order.
std::vector<TurnRecord> turns_for(const ConversationThread& t, const std::string& zone);

// ---------------------------------------------------------------------------
// Special-scenario detection

struct LexiconEntry {
  std::string label;
  std::vector<std::string> variants;  // matched case-insensitively on word boundaries
};

struct DetectorConfig {
  std::vector<LexiconEntry> messengers;
  std::vector<std::string> selfie_keywords;
  std::vector<LexiconEntry> payment_terms;

  static const DetectorConfig& defaults();
};

struct PhoneMatch {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string digits;  // canonical digits
};

/// Digit runs with common separators that carry 10 to 15 digits. Runs never
/// span a line break.
std::vector<PhoneMatch> find_phone_numbers(std::string_view text);

/// Events ordered by span start.
std::vector<DetectionEvent> detect_special(std::string_view text,
                                           const DetectorConfig& cfg = DetectorConfig::defaults());

/// Non-overlapping case-insensitive word-boundary matches of a lexicon.
struct LexiconHit {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string label;
};
std::vector<LexiconHit> match_lexicon(std::string_view text, const std::vector<LexiconEntry>& lex);

bool has_sensitive_event(const std::vector<DetectionEvent>& events);

// ---------------------------------------------------------------------------
// Temporal context

enum class Gap { none, apologize };

inline constexpr auto kApologyThreshold = std::chrono::hours(8);

Gap compute_gap_context(std::optional<LocalDateTime> prev_local, LocalDateTime now_local);

// ---------------------------------------------------------------------------
// Prompt assembly

/// JSON schema of the only accepted model output.
const nlohmann::json& output_schema();

std::string media_capability_statement(PlatformId p);

std::string assemble_system_prompt(const persona::Persona& p, PlatformId platform, Instant now_utc,
                                   const std::vector<persona::PolicyBlock>& policies,
                                   Gap gap = Gap::none);

/// Markers used to locate sections inside an assembled prompt.
inline constexpr std::string_view kPersonaHeader = "PERSONA (JSON):\n";
inline constexpr std::string_view kPoliciesHeader = "\n\nBEHAVIOR POLICIES:\n";
inline constexpr std::string_view kPlatformHeader = "PLATFORM: ";

// ---------------------------------------------------------------------------
// Dialogue backends

struct DialogueRequest {
  std::string system_prompt;
  std::vector<TurnRecord> turns;
  nlohmann::json output_schema;
};

/// Adapter contract: one blocking call per attempt, returns raw model text.
class DialogueBackend {
 public:
  virtual ~DialogueBackend() = default;

  std::string complete(const DialogueRequest& req) {
    calls_.fetch_add(1);
    return do_complete(req);
  }
  std::uint64_t calls() const { return calls_.load(); }

 protected:
  virtual std::string do_complete(const DialogueRequest& req) = 0;

 private:
  std::atomic<std::uint64_t> calls_{0};
};

/// Replays canned raw outputs in order; throws BackendUnavailable when empty.
class ScriptedBackend final : public DialogueBackend {
 public:
  ScriptedBackend() = default;
  explicit ScriptedBackend(std::vector<std::string> outputs);
  void push(std::string raw);
  std::vector<DialogueRequest> requests() const;

 protected:
  std::string do_complete(const DialogueRequest& req) override;

 private:
  mutable std::mutex mu_;
  std::deque<std::string> outputs_;
  std::vector<DialogueRequest> requests_;
};

/// Deterministic offline persona. Rules are tried in order against the
/// scammer text since the last persona turn; the first match wins.
class PolicyStubBackend final : public DialogueBackend {
 public:
  struct Rule {
    std::string name;
    std::regex pattern;
    std::vector<std::string> platforms;  // empty = any
    std::vector<std::string> replies;
    bool refusal = false;
  };

  struct Decision {
    std::string rule;
    std::string reply;
    bool refusal = false;
  };

  explicit PolicyStubBackend(const nlohmann::json& table);
  static PolicyStubBackend from_file(const std::string& path);
  /// Bundled table.
  static const nlohmann::json& default_table();

  /// Decisions in call order; the refusal channel is Decision::refusal.
  std::vector<Decision> decisions() const;
  bool was_refusal(const std::string& reply) const;

 protected:
  std::string do_complete(const DialogueRequest& req) override;

 private:
  std::vector<Rule> rules_;
  std::vector<std::string> defaults_;
  mutable std::mutex mu_;
  std::vector<Decision> log_;
};

/// POSTs {"system", "turns", "schema"} and returns the response body verbatim.
class HttpDialogueBackend final : public DialogueBackend {
 public:
  explicit HttpDialogueBackend(std::string url);

 protected:
  std::string do_complete(const DialogueRequest& req) override;

 private:
  std::string url_;
};

// ---------------------------------------------------------------------------
// Constrained generation

struct ResponseCandidate {
  std::string text;
  bool schema_valid = false;
  int attempt = 0;
};

/// Accepts exactly {"response": <non-empty string>} with nothing before or
/// after the document.
std::optional<std::string> parse_response_document(std::string_view raw);

/// Throws ValidationExhausted after `max_retries` invalid attempts and
/// BackendUnavailable on transport failure.
ResponseCandidate generate_response(const DialogueRequest& req, DialogueBackend& backend,
                                    int max_retries);

struct ResponseContext {
  const ConversationThread* thread = nullptr;
  const persona::Persona* persona = nullptr;
  const persona::PolicyLibrary* policies = nullptr;
  PlatformId platform = PlatformId::ts_like;
  Instant now{};
};

DialogueRequest build_request(const ResponseContext& ctx);
ResponseCandidate generate_response(const ResponseContext& ctx, DialogueBackend& backend,
                                    int max_retries);
/// k independent calls ranked in backend order.
std::vector<ResponseCandidate> generate_candidates(const ResponseContext& ctx,
                                                   DialogueBackend& backend, int max_retries,
                                                   int k);

/// Non-PII biography from a dialogue backend, validated like a reply.
class BackendBiographySource final : public persona::BiographySource {
 public:
  BackendBiographySource(DialogueBackend& backend, int max_retries = 3)
      : backend_(backend), max_retries_(max_retries) {}
  persona::Biography generate(const persona::Persona& pii, std::uint64_t seed) const override;

 private:
  DialogueBackend& backend_;
  int max_retries_;
};

}  // namespace chatterbox::prompt
