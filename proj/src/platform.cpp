#include <chatterbox/errors.hpp>
#include <chatterbox/platform.hpp>

#include <cctype>
#include <memory>

namespace chatterbox {

using nlohmann::json;

std::string_view platform_code(PlatformId p) {
  switch (p) {
    case PlatformId::ts_like: return "TS_like";
    case PlatformId::bs_like: return "BS_like";
    case PlatformId::wa_like: return "WA_like";
  }
  return "?";
}

std::string_view display_name(PlatformId p) {
  switch (p) {
    case PlatformId::ts_like: return "TruthSocial";
    case PlatformId::bs_like: return "Bluesky";
    case PlatformId::wa_like: return "WhatsApp";
  }
  return "?";
}

PlatformId parse_platform(std::string_view s) {
  for (auto p : kAllPlatforms)
    if (s == platform_code(p) || s == display_name(p)) return p;
  throw ConfigError("unknown platform '" + std::string(s) + "'");
}

Transport transport(PlatformId p) {
  return p == PlatformId::wa_like ? Transport::webhook : Transport::polled;
}

Capability capability(PlatformId p) {
  switch (p) {
    case PlatformId::ts_like:
      return {.send_media = false, .receive_media = true, .has_groups = true, .supports_dm = true};
    case PlatformId::bs_like:
      return {.send_media = false, .receive_media = true, .has_groups = false, .supports_dm = true};
    case PlatformId::wa_like:
      return {.send_media = true, .receive_media = true, .has_groups = false, .supports_dm = true};
  }
  throw ConfigError("unknown platform");
}

std::string_view to_string(MediaKind k) {
  switch (k) {
    case MediaKind::image: return "image";
    case MediaKind::audio: return "audio";
    case MediaKind::video: return "video";
  }
  return "?";
}

MediaKind parse_media_kind(std::string_view s) {
  if (s == "image") return MediaKind::image;
  if (s == "audio") return MediaKind::audio;
  if (s == "video") return MediaKind::video;
  throw ParseError("media.kind", "unknown media kind '" + std::string(s) + "'");
}

std::string_view to_string(SocialAction::Kind k) {
  switch (k) {
    case SocialAction::Kind::follow: return "follow";
    case SocialAction::Kind::like: return "like";
    case SocialAction::Kind::repost: return "repost";
    case SocialAction::Kind::join_group: return "join_group";
  }
  return "?";
}

std::string normalize_digits(std::string_view s) {
  std::string out;
  for (char c : s)
    if (std::isdigit(static_cast<unsigned char>(c))) out.push_back(c);
  return out;
}

std::string canonical_phone(std::string_view s) {
  auto d = normalize_digits(s);
  if (d.size() == 10) d.insert(d.begin(), '1');
  return d;
}

// ---------------------------------------------------------------------------

SimPlatform::SimPlatform(PlatformId id, const Clock& clock) : id_(id), clock_(clock) {}

std::string SimPlatform::key(const std::string& handle) const {
  // Messenger accounts are addressed by phone number.
  return id_ == PlatformId::wa_like ? canonical_phone(handle) : handle;
}

void SimPlatform::register_account(const std::string& handle, AccountMetadata meta) {
  std::lock_guard lock(mu_);
  auto& a = accounts_[key(handle)];
  if (meta.username.empty()) meta.username = handle;
  a.meta = std::move(meta);
}

bool SimPlatform::has_account(const std::string& handle) const {
  std::lock_guard lock(mu_);
  return accounts_.count(key(handle)) > 0;
}

SimPlatform::Account& SimPlatform::account_locked(const std::string& handle) {
  auto it = accounts_.find(key(handle));
  if (it == accounts_.end())
    throw DeliveryError(std::string(platform_code(id_)) + ": unknown account '" + handle + "'");
  return it->second;
}

const SimPlatform::Account& SimPlatform::account_locked(const std::string& handle) const {
  auto it = accounts_.find(key(handle));
  if (it == accounts_.end())
    throw DeliveryError(std::string(platform_code(id_)) + ": unknown account '" + handle + "'");
  return it->second;
}

void SimPlatform::require_session_locked(const std::string& account) const {
  if (!account_locked(account).session_valid)
    throw AuthExpired(std::string(platform_code(id_)) + ": session expired for " + account);
}

std::string SimPlatform::authenticate(const std::string& account) {
  std::lock_guard lock(mu_);
  account_locked(account).session_valid = true;
  return std::string(platform_code(id_)) + ":" + account + ":session";
}

void SimPlatform::expire_session(const std::string& account) {
  std::lock_guard lock(mu_);
  account_locked(account).session_valid = false;
}

void SimPlatform::deliver(Notification n) {
  std::vector<WebhookHandler> handlers;
  {
    std::lock_guard lock(mu_);
    auto& inbox = account_locked(n.to);
    n.seq = inbox.inbox.size() + 1;
    n.id = std::string(platform_code(id_)) + "-" + std::to_string(next_id_++);
    inbox.inbox.push_back(n);
    handlers = inbox.handlers;
  }
  for (auto& h : handlers) h(id_, n);
}

DeliveryReceipt SimPlatform::send_message(const std::string& account,
                                          const std::string& recipient,
                                          const Payload& payload) {
  Notification n;
  {
    std::lock_guard lock(mu_);
    require_session_locked(account);
    const auto cap = capability(id_);
    if (payload.media && !cap.send_media)
      throw CapabilityViolation("media sending is not supported on " +
                                std::string(platform_code(id_)));
    if (!cap.supports_dm) throw CapabilityViolation("direct messages not supported");
    if (!accounts_.count(key(recipient)))
      throw DeliveryError(std::string(platform_code(id_)) + ": unknown recipient '" + recipient +
                          "'");
    n.kind = Notification::Kind::message;
    n.from = account;
    n.to = recipient;
    n.at = clock_.now();
    n.payload = payload;
  }
  deliver(n);
  std::lock_guard lock(mu_);
  const auto& stored = account_locked(recipient).inbox.back();
  sent_.push_back(stored);
  return {stored.id, stored.at};
}

void SimPlatform::record_action(SocialAction::Kind kind, const std::string& account,
                                const std::string& target) {
  actions_.push_back({kind, account, target, clock_.now()});
}

void SimPlatform::follow(const std::string& account, const std::string& target) {
  std::lock_guard lock(mu_);
  require_session_locked(account);
  record_action(SocialAction::Kind::follow, account, target);
  if (auto it = accounts_.find(key(target)); it != accounts_.end()) ++it->second.meta.follower_count;
  ++account_locked(account).meta.following_count;
}

void SimPlatform::like(const std::string& account, const std::string& target) {
  std::lock_guard lock(mu_);
  require_session_locked(account);
  record_action(SocialAction::Kind::like, account, target);
}

void SimPlatform::repost(const std::string& account, const std::string& target) {
  std::lock_guard lock(mu_);
  require_session_locked(account);
  record_action(SocialAction::Kind::repost, account, target);
}

void SimPlatform::join_group(const std::string& account, const std::string& group) {
  std::lock_guard lock(mu_);
  if (!capability(id_).has_groups)
    throw CapabilityViolation(std::string(platform_code(id_)) + " has no groups");
  require_session_locked(account);
  record_action(SocialAction::Kind::join_group, account, group);
}

NotificationBatch SimPlatform::fetch_notifications(const std::string& account,
                                                   std::uint64_t cursor) const {
  if (transport(id_) != Transport::polled)
    throw ConfigError(std::string(platform_code(id_)) + " delivers by webhook, not polling");
  std::lock_guard lock(mu_);
  require_session_locked(account);
  NotificationBatch batch;
  batch.cursor = cursor;
  const auto& inbox = account_locked(account).inbox;
  for (std::size_t i = cursor; i < inbox.size(); ++i) {
    const auto& n = inbox[i];
    batch.events.push_back(n);
    batch.cursor = n.seq;
    if (auto it = accounts_.find(key(n.from)); it != accounts_.end())
      batch.accounts[n.from] = it->second.meta;
  }
  return batch;
}

void SimPlatform::subscribe(const std::string& account, WebhookHandler handler) {
  if (transport(id_) != Transport::webhook)
    throw ConfigError(std::string(platform_code(id_)) + " is polled, not webhook-driven");
  std::lock_guard lock(mu_);
  account_locked(account).handlers.push_back(std::move(handler));
}

DeliveryReceipt SimPlatform::counterparty_send(const std::string& from, const std::string& to,
                                               const Payload& payload) {
  Notification n;
  n.kind = Notification::Kind::message;
  n.from = from;
  n.to = to;
  n.at = clock_.now();
  n.payload = payload;
  deliver(n);
  std::lock_guard lock(mu_);
  const auto& stored = account_locked(to).inbox.back();
  return {stored.id, stored.at};
}

void SimPlatform::counterparty_follow(const std::string& from, const std::string& to) {
  {
    std::lock_guard lock(mu_);
    ++account_locked(to).meta.follower_count;
    if (auto it = accounts_.find(key(from)); it != accounts_.end())
      ++it->second.meta.following_count;
  }
  Notification n;
  n.kind = Notification::Kind::follow;
  n.from = from;
  n.to = to;
  n.at = clock_.now();
  deliver(n);
}

void SimPlatform::counterparty_group_join(const std::string& from, const std::string& to,
                                          const std::string& group) {
  Notification n;
  n.kind = Notification::Kind::group_join;
  n.from = from;
  n.to = to;
  n.group = group;
  n.at = clock_.now();
  deliver(n);
}

std::vector<Notification> SimPlatform::counterparty_inbox(const std::string& handle,
                                                          std::uint64_t cursor) const {
  std::lock_guard lock(mu_);
  const auto& inbox = account_locked(handle).inbox;
  return {inbox.begin() + static_cast<std::ptrdiff_t>(std::min<std::uint64_t>(cursor, inbox.size())),
          inbox.end()};
}

void SimPlatform::set_trending(std::vector<std::string> items) {
  std::lock_guard lock(mu_);
  trending_ = std::move(items);
}
void SimPlatform::set_suggested(std::vector<std::string> accounts) {
  std::lock_guard lock(mu_);
  suggested_ = std::move(accounts);
}
void SimPlatform::set_groups(std::vector<std::string> groups) {
  std::lock_guard lock(mu_);
  groups_ = std::move(groups);
}
std::vector<std::string> SimPlatform::trending() const {
  std::lock_guard lock(mu_);
  return trending_;
}
std::vector<std::string> SimPlatform::suggested() const {
  std::lock_guard lock(mu_);
  return suggested_;
}
std::vector<std::string> SimPlatform::groups() const {
  std::lock_guard lock(mu_);
  return groups_;
}
std::vector<SocialAction> SimPlatform::social_actions() const {
  std::lock_guard lock(mu_);
  return actions_;
}
std::vector<Notification> SimPlatform::sent_messages() const {
  std::lock_guard lock(mu_);
  return sent_;
}

PlatformSet::PlatformSet(const Clock& clock) {
  for (auto p : kAllPlatforms) platforms_.push_back(std::make_unique<SimPlatform>(p, clock));
}
SimPlatform& PlatformSet::get(PlatformId p) { return *platforms_[static_cast<std::size_t>(p)]; }
const SimPlatform& PlatformSet::get(PlatformId p) const {
  return *platforms_[static_cast<std::size_t>(p)];
}

Instant WallClock::now() const {
  return std::chrono::time_point_cast<Seconds>(std::chrono::system_clock::now());
}

// ---------------------------------------------------------------------------

json to_json(const MediaRef& m) {
  json j = {{"kind", std::string(to_string(m.kind))}, {"asset", m.asset_ref}};
  if (!m.frames.empty()) j["frames"] = m.frames;
  return j;
}

MediaRef media_from_json(const json& j) {
  MediaRef m;
  m.kind = parse_media_kind(j.at("kind").get<std::string>());
  m.asset_ref = j.at("asset").get<std::string>();
  if (j.contains("frames")) m.frames = j.at("frames").get<std::vector<std::string>>();
  if (m.kind == MediaKind::video && m.frames.empty()) m.frames.push_back(m.asset_ref + "#frame0");
  return m;
}

json to_json(const Payload& p) {
  json j = {{"text", p.text}};
  if (p.media) j["media"] = to_json(*p.media);
  return j;
}

Payload payload_from_json(const json& j) {
  Payload p;
  p.text = j.value("text", std::string{});
  if (j.contains("media") && !j.at("media").is_null()) p.media = media_from_json(j.at("media"));
  return p;
}

json to_json(const AccountMetadata& m) {
  return {{"username", m.username},
          {"thumbnail", m.thumbnail},
          {"follower_count", m.follower_count},
          {"following_count", m.following_count},
          {"account_age_days", m.account_age_days}};
}

AccountMetadata account_metadata_from_json(const json& j) {
  AccountMetadata m;
  m.username = j.value("username", std::string{});
  m.thumbnail = j.value("thumbnail", std::string{});
  m.follower_count = j.value("follower_count", 0);
  m.following_count = j.value("following_count", 0);
  m.account_age_days = j.value("account_age_days", 0.0);
  return m;
}

}  // namespace chatterbox
