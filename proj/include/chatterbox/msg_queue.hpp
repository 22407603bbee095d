#pragma once

#include <chatterbox/conversation.hpp>
#include <chatterbox/platform.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

namespace chatterbox::queue {

enum class Approval { not_required, pending, granted, denied };
enum class Status { queued, dispatched, dropped };
enum class ItemKind { reply, opener, selfie, migration };

std::string_view to_string(Approval a);
std::string_view to_string(Status s);
std::string_view to_string(ItemKind k);

struct QueueItem {
  std::string item_id;
  std::string thread_id;
  Direction direction = Direction::outbound;
  ItemKind kind = ItemKind::reply;
  Payload payload;
  PlatformId platform = PlatformId::ts_like;
  Instant enqueued_at{};
  Instant dispatch_at{};
  Approval approval = Approval::not_required;
  Status status = Status::queued;
  // "auto", "annotator:<id>", "opener", "system".
  std::string origin;
  std::uint64_t seq = 0;
  std::string drop_reason;

  bool dispatchable() const {
    return status == Status::queued &&
           (approval == Approval::not_required || approval == Approval::granted);
  }
  bool open() const { return status == Status::queued; }

  bool operator==(const QueueItem&) const = default;
};

nlohmann::json to_json(const QueueItem& q);
QueueItem queue_item_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Lifecycle

enum class Action { ignore, halt, toggle_auto, review_done, snooze_expired, inbound_arrived, interact };
std::string_view to_string(Action a);
Action parse_action(std::string_view s);

inline constexpr Seconds kDefaultIgnoreCooldown{24 * 3600};

/// Applies one action to the thread per the lifecycle table and returns the
/// new state. Throws StateError for an action the current state does not
/// accept. `now` and `cooldown` only matter for ignore and snooze_expired.
ThreadState transition(ConversationThread& thread, Action action, Instant now,
                       Seconds cooldown = kDefaultIgnoreCooldown);

/// True when the next reply must come from a human.
bool should_force_review(const ConversationThread& thread,
                         const std::vector<DetectionEvent>& latest, int first_n_human = 10,
                         int checkpoint_every = 10);

// ---------------------------------------------------------------------------
// Serialization rule

/// Throws SerializationError if the thread already has an open outbound item
/// or if the last message in the target segment is the persona's. The
/// reintroduction that opens a messenger segment is exempt.
void check_serialization(const ConversationThread& thread, const std::vector<QueueItem>& open_items,
                         PlatformId platform);

// ---------------------------------------------------------------------------

/// Log-uniform response delay over [min, max].
class DelaySampler {
 public:
  DelaySampler(Seconds min = Seconds{30}, Seconds max = Seconds{900});
  Seconds sample(std::mt19937_64& rng) const;
  Seconds min() const { return min_; }
  Seconds max() const { return max_; }

 private:
  Seconds min_, max_;
};

struct EnqueueRequest {
  std::string item_id;
  ItemKind kind = ItemKind::reply;
  Payload payload;
  PlatformId platform = PlatformId::ts_like;
  bool needs_approval = false;
  std::string origin;
  Seconds delay{0};
};

/// Builds the item after checking the thread is not halted and the
/// serialization rule holds. Throws StateError or SerializationError.
QueueItem enqueue_outbound(const ConversationThread& thread, const std::vector<QueueItem>& open_items,
                           const EnqueueRequest& req, Instant now);

/// Outbound items ordered by dispatch time with FIFO tie-break.
class MessageQueue {
 public:
  void add(QueueItem item);
  QueueItem* find(const std::string& item_id);
  const QueueItem* find(const std::string& item_id) const;

  std::vector<QueueItem> open_for(const std::string& thread_id) const;
  /// Pending-approval item of the given kind, if any.
  const QueueItem* pending(const std::string& thread_id, ItemKind kind) const;
  /// Dispatchable items with dispatch_at <= now, in dispatch order.
  std::vector<std::string> due(Instant now) const;
  std::optional<Instant> next_due() const;

  const std::map<std::string, QueueItem>& items() const { return items_; }
  std::uint64_t next_seq() const { return seq_; }

 private:
  std::map<std::string, QueueItem> items_;
  std::uint64_t seq_ = 0;
};

// ---------------------------------------------------------------------------

/// Append-only, line-delimited JSON event log.
class EventLog {
 public:
  /// Opens for append, creating the file.
  explicit EventLog(std::filesystem::path path);
  void append(const nlohmann::json& event);
  void flush();
  const std::filesystem::path& path() const { return path_; }

  /// Complete records in order; a torn trailing line is ignored.
  static std::vector<nlohmann::json> read(const std::filesystem::path& path);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::mutex mu_;
};

}  // namespace chatterbox::queue
