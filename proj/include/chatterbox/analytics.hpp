#pragma once

#include <chatterbox/conversation.hpp>
#include <chatterbox/platform.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace chatterbox::analytics {

// ---------------------------------------------------------------------------
// Transcript records

struct TranscriptMedia {
  MediaKind kind = MediaKind::image;
  std::string marker;  // caption marker as injected into prompts; empty for persona selfies
  std::string asset;

  bool operator==(const TranscriptMedia&) const = default;
};

struct TranscriptMessage {
  std::string conversation_id;
  int index = 0;  // 1-based across the whole conversation
  Role role = Role::scammer;
  PlatformId platform = PlatformId::ts_like;
  Instant at{};
  std::string text;
  std::vector<TranscriptMedia> media;
  std::string sender;  // counterparty handle or number on scammer messages

  bool operator==(const TranscriptMessage&) const = default;
};

struct Conversation {
  std::string id;
  std::vector<TranscriptMessage> messages;

  /// Platforms in order of first appearance.
  std::vector<PlatformId> platform_path() const;
  bool crossed() const;

  bool operator==(const Conversation&) const = default;
};

using Corpus = std::vector<Conversation>;

nlohmann::json to_json(const TranscriptMessage& m);
/// Throws ParseError naming the field.
TranscriptMessage transcript_message_from_json(const nlohmann::json& j);

/// Groups records by conversation_id and orders them by index. Accepts a
/// single .jsonl file or a directory of them.
Corpus load_corpus(const std::filesystem::path& path);
Corpus corpus_from_records(const std::vector<TranscriptMessage>& records);
std::vector<std::string> corpus_lines(const Corpus& c);
void write_corpus(const std::filesystem::path& file, const Corpus& c);
/// Transcript view of live honeypot threads.
Corpus corpus_from_threads(const std::vector<ConversationThread>& threads);

// ---------------------------------------------------------------------------
// Entities

enum class EntityKind { crypto, url, email, cashapp, phone, platform_name };
std::string_view to_string(EntityKind k);
inline constexpr EntityKind kAllEntityKinds[] = {EntityKind::crypto, EntityKind::url,   EntityKind::email,
                                                 EntityKind::cashapp, EntityKind::phone,
                                                 EntityKind::platform_name};

struct EntityRecord {
  EntityKind kind = EntityKind::url;
  std::string value;
  std::string conversation_id;
  int message_index = 0;
  Role role = Role::scammer;
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const EntityRecord&) const = default;
};

/// Entities in one text, ordered by position. Phone matches inside a URL,
/// e-mail or wallet address are suppressed.
std::vector<EntityRecord> extract_entities(std::string_view text);
/// Every message of the conversation, both roles.
std::vector<EntityRecord> extract_entities(const Conversation& c);

// ---------------------------------------------------------------------------
// Media captions

enum class MediaClass { selfie, social_engineering, ttp };
std::string_view to_string(MediaClass c);
MediaClass parse_media_class(std::string_view s);

/// Raw-text completion used by the LLM-backed classifiers.
class TextBackend {
 public:
  virtual ~TextBackend() = default;
  virtual std::string complete(const std::string& prompt) = 0;
};

/// POSTs {"prompt": ...} and returns the body verbatim.
class HttpTextBackend final : public TextBackend {
 public:
  explicit HttpTextBackend(std::string url) : url_(std::move(url)) {}
  std::string complete(const std::string& prompt) override;

 private:
  std::string url_;
};

extern const std::string_view kImageCategoryPrompt;

/// Ordered decision rules: transactional cues first, then self-portrait cues,
/// otherwise social engineering. With a backend, its {"label", "reason"}
/// answer overrides the rules when valid.
MediaClass classify_media_caption(std::string_view caption, TextBackend* backend = nullptr);

// ---------------------------------------------------------------------------
// Trust-building

extern const std::vector<std::string> kTrustCategories;
extern const std::string_view kTrustPrompt;

struct TrustLabels {
  std::map<std::string, bool> categories;
  std::string reason;
};

/// "<index>. <role>:<platform>: <text>" lines with fraudster/victim roles.
std::string format_for_classifier(const Conversation& c);
std::string trust_prompt(const Conversation& c);

/// Strict check of a classifier answer: exactly the nine category booleans
/// plus "reason" (at most 50 words), at least one category true.
std::optional<TrustLabels> parse_trust_labels(std::string_view raw);

/// One retry on an invalid answer, then ClassifierError.
TrustLabels classify_trust(const Conversation& c, TextBackend& backend);

/// Offline classifier: keyword tables per category over fraudster lines;
/// falls back to Liking & Affinity when nothing matches.
class RuleTrustBackend final : public TextBackend {
 public:
  std::string complete(const std::string& prompt) override;
  int calls() const { return calls_; }

 private:
  int calls_ = 0;
};

// ---------------------------------------------------------------------------
// Statistics

struct CrossingRow {
  std::string category;
  int count = 0;
  double percent = 0;
  double median = 0;
  double mean = 0;
};

struct PrevalenceRow {
  std::string entity;  // crypto, url, email, cashapp, image, non_cross_phone, any_ttp
  int conversations = 0;
  double percent_all = 0;
  int crossed_conversations = 0;
  double percent_crossed = 0;
  std::optional<double> median_steps;
};

struct FirstAppearance {
  std::string entity;
  int conversations = 0;
  std::optional<double> median_steps;
  std::vector<std::pair<int, double>> cdf;  // (step, fraction of conversations with first step <= step)
};

struct MediaStats {
  double percent_with_media = 0;
  double percent_with_images = 0;
  double percent_with_audio = 0;
  double percent_with_video = 0;
  double mean_files = 0;  // over conversations that carry fraudster media
  int max_files = 0;
  std::map<std::string, double> image_classes;  // percent per class
  std::map<std::string, double> video_classes;
};

struct StatsReport {
  int min_turns = 10;
  int conversations = 0;
  int excluded = 0;
  int crossed = 0;
  std::map<std::string, int> message_counts;
  std::map<std::string, double> durations_days;
  double mean_messages = 0, median_messages = 0;
  int max_messages = 0;
  double mean_duration_days = 0, median_duration_days = 0, max_duration_days = 0;
  // role -> platform code (or "all") -> messages
  std::map<std::string, std::map<std::string, int>> role_platform_totals;
  std::vector<CrossingRow> crossings;
  std::map<std::string, int> crossing_aggregates;  // origin-only, origin->WA, other
  std::vector<PrevalenceRow> prevalence;
  std::vector<FirstAppearance> first_appearance;
  MediaStats media;

  nlohmann::json to_json() const;
};

double median(std::vector<double> v);

/// Throws EmptyCorpus when nothing survives the min_turns filter.
StatsReport conversation_stats(const Corpus& corpus, int min_turns = 10);

// ---------------------------------------------------------------------------
// De-identification

struct Pseudonymizer {
  explicit Pseudonymizer(std::string salt) : salt_(std::move(salt)) {}
  /// "[phone:xxxxxxxx]" for canonical phone digits.
  std::string phone(const std::string& raw);
  /// "user-xxxxxxxx" for a handle (leading '@' ignored).
  std::string handle(const std::string& raw);
  const std::map<std::string, std::string>& mapping() const { return forward_; }

 private:
  std::string make(const std::string& ns, const std::string& key);
  std::string salt_;
  std::map<std::string, std::string> forward_;
  std::map<std::string, std::string> reverse_;
};

/// Replaces counterparty phone numbers, sender handles and @mentions with
/// salted, stable pseudonyms. Same corpus and salt give identical output.
Corpus export_deidentified(const Corpus& corpus, const std::string& salt,
                           std::map<std::string, std::string>* mapping = nullptr);

}  // namespace chatterbox::analytics
