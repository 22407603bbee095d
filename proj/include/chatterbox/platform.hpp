#pragma once

#include <chatterbox/clock.hpp>
#include <chatterbox/time.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace chatterbox {

enum class PlatformId { ts_like, bs_like, wa_like };
enum class Transport { polled, webhook };

inline constexpr PlatformId kAllPlatforms[] = {PlatformId::ts_like, PlatformId::bs_like,
                                                PlatformId::wa_like};
inline constexpr PlatformId kOriginPlatforms[] = {PlatformId::ts_like, PlatformId::bs_like};

/// "TS_like", "BS_like", "WA_like".
std::string_view platform_code(PlatformId p);
/// Name used in persona-facing text: "TruthSocial", "Bluesky", "WhatsApp".
std::string_view display_name(PlatformId p);
/// Accepts either the code or the display name. Throws ConfigError.
PlatformId parse_platform(std::string_view s);
Transport transport(PlatformId p);
inline bool is_origin(PlatformId p) { return transport(p) == Transport::polled; }

struct Capability {
  bool send_media = false;
  bool receive_media = false;
  bool has_groups = false;
  bool supports_dm = false;

  bool operator==(const Capability&) const = default;
};

/// Constant table, total over PlatformId.
Capability capability(PlatformId p);

enum class MediaKind { image, audio, video };
std::string_view to_string(MediaKind k);
MediaKind parse_media_kind(std::string_view s);

struct MediaRef {
  MediaKind kind = MediaKind::image;
  std::string asset_ref;
  // Video only: frame references in playback order.
  std::vector<std::string> frames;

  bool operator==(const MediaRef&) const = default;
};

struct Payload {
  std::string text;
  std::optional<MediaRef> media;

  bool operator==(const Payload&) const = default;
};

struct AccountMetadata {
  std::string username;
  std::string thumbnail;
  int follower_count = 0;
  int following_count = 0;
  double account_age_days = 0;

  bool operator==(const AccountMetadata&) const = default;
};

struct Notification {
  enum class Kind { message, follow, group_join };
  Kind kind = Kind::message;
  std::uint64_t seq = 0;
  std::string id;
  std::string from;
  std::string to;
  Instant at{};
  Payload payload;
  std::string group;
};

struct NotificationBatch {
  std::vector<Notification> events;
  std::uint64_t cursor = 0;
  std::map<std::string, AccountMetadata> accounts;
};

struct DeliveryReceipt {
  std::string message_id;
  Instant server_time{};
};

/// Outbound social action taken by a honeypot account.
struct SocialAction {
  enum class Kind { follow, like, repost, join_group };
  Kind kind = Kind::follow;
  std::string account;
  std::string target;
  Instant at{};
};
std::string_view to_string(SocialAction::Kind k);

using WebhookHandler = std::function<void(PlatformId, const Notification&)>;

/// In-process stand-in for one social platform. All members are safe to call
/// from several threads; each instance serializes access internally.
///
/// Honeypot-side calls (send_message, follow, like, ...) enforce the platform
/// capability table. Counterparty calls model the outside world and are used
/// by scripted scammers.
class SimPlatform {
 public:
  SimPlatform(PlatformId id, const Clock& clock);

  PlatformId id() const { return id_; }

  void register_account(const std::string& handle, AccountMetadata meta = {});
  bool has_account(const std::string& handle) const;

  std::string authenticate(const std::string& account);
  void expire_session(const std::string& account);

  /// Throws CapabilityViolation, DeliveryError or AuthExpired.
  DeliveryReceipt send_message(const std::string& account, const std::string& recipient,
                               const Payload& payload);
  void follow(const std::string& account, const std::string& target);
  void like(const std::string& account, const std::string& target);
  void repost(const std::string& account, const std::string& target);
  void join_group(const std::string& account, const std::string& group);

  /// Events strictly after `cursor`. Polled platforms only. Throws AuthExpired.
  NotificationBatch fetch_notifications(const std::string& account, std::uint64_t cursor) const;

  /// Webhook platforms only. The handler runs outside the platform lock.
  void subscribe(const std::string& account, WebhookHandler handler);

  DeliveryReceipt counterparty_send(const std::string& from, const std::string& to,
                                    const Payload& payload);
  void counterparty_follow(const std::string& from, const std::string& to);
  void counterparty_group_join(const std::string& from, const std::string& to,
                               const std::string& group);
  /// Messages delivered to a counterparty account after `cursor` (1-based seq).
  std::vector<Notification> counterparty_inbox(const std::string& handle,
                                               std::uint64_t cursor = 0) const;

  void set_trending(std::vector<std::string> items);
  void set_suggested(std::vector<std::string> accounts);
  void set_groups(std::vector<std::string> groups);
  std::vector<std::string> trending() const;
  std::vector<std::string> suggested() const;
  std::vector<std::string> groups() const;

  std::vector<SocialAction> social_actions() const;
  std::vector<Notification> sent_messages() const;

 private:
  struct Account {
    AccountMetadata meta;
    bool session_valid = false;
    std::vector<Notification> inbox;
    std::vector<WebhookHandler> handlers;
  };

  Account& account_locked(const std::string& handle);
  const Account& account_locked(const std::string& handle) const;
  void require_session_locked(const std::string& account) const;
  std::string key(const std::string& handle) const;
  void deliver(Notification n);
  void record_action(SocialAction::Kind kind, const std::string& account,
                     const std::string& target);

  PlatformId id_;
  const Clock& clock_;
  mutable std::mutex mu_;
  std::map<std::string, Account> accounts_;
  std::vector<SocialAction> actions_;
  std::vector<Notification> sent_;
  std::vector<std::string> trending_, suggested_, groups_;
  std::uint64_t next_id_ = 1;
};

/// The three simulated platforms sharing one clock.
class PlatformSet {
 public:
  explicit PlatformSet(const Clock& clock);
  SimPlatform& get(PlatformId p);
  const SimPlatform& get(PlatformId p) const;

 private:
  std::vector<std::unique_ptr<SimPlatform>> platforms_;
};

/// Wall-clock time source; the only place the process reads real time.
class WallClock final : public Clock {
 public:
  Instant now() const override;
};

/// Digits-only form of a phone number or handle.
std::string normalize_digits(std::string_view s);
/// Digits-only phone identity; a bare 10-digit number gets the NANP "1" prefix
/// so "+1 415 555 0132" and "(415) 555-0132" compare equal.
std::string canonical_phone(std::string_view s);

nlohmann::json to_json(const Payload& p);
Payload payload_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MediaRef& m);
MediaRef media_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AccountMetadata& m);
AccountMetadata account_metadata_from_json(const nlohmann::json& j);

}  // namespace chatterbox
