#pragma once

#include <chatterbox/conversation.hpp>
#include <chatterbox/persona.hpp>
#include <chatterbox/platform.hpp>

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace chatterbox::migration {

struct Binding {
  std::string scammer_identity;  // canonical digits
  std::string persona_id;
  std::string thread_id;

  bool operator==(const Binding&) const = default;
};

struct SharedMessengerAccount {
  std::string first_name_key;
  std::string display_name;  // first name only
  std::string phone;
  bool profile_picture = false;
  std::vector<Binding> bindings;
};

struct PoolEntry {
  std::string first_name_key;
  std::string phone;
};

inline constexpr std::size_t kDefaultPoolSize = 8;

/// Messenger accounts shared by every persona with the same first name.
class AccountPool {
 public:
  AccountPool() = default;
  /// Throws ConfigError on duplicate names or phones.
  explicit AccountPool(const std::vector<PoolEntry>& entries);

  /// One account per name, with fictional 555 numbers.
  static std::vector<PoolEntry> default_entries(const std::vector<std::string>& first_names);

  /// Throws PoolMiss when no account is provisioned for the name.
  const SharedMessengerAccount& allocate(const std::string& first_name) const;
  bool has(const std::string& first_name) const;

  /// A binding of `identity` to a different persona on this name's account.
  std::optional<Binding> collision(const std::string& first_name, const std::string& identity,
                                   const std::string& persona_id) const;
  /// Throws StateError if the binding would collide.
  void bind(const std::string& first_name, Binding b);

  /// Binding for an inbound message on the account with this phone.
  std::optional<Binding> route(const std::string& account_phone, const std::string& identity) const;
  const SharedMessengerAccount* by_phone(const std::string& phone) const;

  std::vector<std::string> phones() const;
  std::size_t size() const { return accounts_.size(); }
  const std::vector<SharedMessengerAccount>& accounts() const { return accounts_; }

  nlohmann::json bindings_json() const;

 private:
  SharedMessengerAccount* find(const std::string& first_name);
  const SharedMessengerAccount* find(const std::string& first_name) const;

  std::vector<SharedMessengerAccount> accounts_;
};

enum class Outcome { awaiting_approval, collision_halt };
std::string_view to_string(Outcome o);

inline constexpr int kReintroTemplateCount = 3;

/// Opening message on the messenger; index selects one of the templates.
std::string reintro_text(int template_index, const std::string& first_name, PlatformId origin);

/// Reacts to a phone number revealed on the origin platform. Mutates the
/// thread state; a later number before approval replaces the pending one.
/// Throws StateError if the thread already migrated or is halted.
Outcome handle_migration_request(ConversationThread& thread, const DetectionEvent& event,
                                 const AccountPool& pool, const persona::Persona& persona,
                                 const std::string& item_id);

/// Binds the scammer, opens the messenger segment, marks the origin segment
/// dormant and appends the reintroduction. Returns nothing (and halts the
/// thread) if a collision appeared while approval was pending.
std::optional<Message> execute_migration(ConversationThread& thread, AccountPool& pool,
                                         const persona::Persona& persona,
                                         const std::string& approver, int template_index,
                                         Instant now);

/// Approval denied: the thread resumes on the origin platform.
void deny_migration(ConversationThread& thread);

}  // namespace chatterbox::migration
