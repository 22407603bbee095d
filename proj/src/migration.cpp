#include <chatterbox/errors.hpp>
#include <chatterbox/migration.hpp>

#include <set>

namespace chatterbox::migration {

AccountPool::AccountPool(const std::vector<PoolEntry>& entries) {
  std::set<std::string> names, phones;
  for (const auto& e : entries) {
    if (e.first_name_key.empty()) throw ConfigError("pool entry without first_name_key");
    if (!names.insert(e.first_name_key).second)
      throw ConfigError("duplicate pool entry for " + e.first_name_key);
    auto canon = canonical_phone(e.phone);
    if (canon.size() < 10) throw ConfigError("pool phone for " + e.first_name_key + " is not a phone number");
    if (!phones.insert(canon).second) throw ConfigError("duplicate pool phone " + e.phone);
    accounts_.push_back({e.first_name_key, e.first_name_key, e.phone, false, {}});
  }
}

std::vector<PoolEntry> AccountPool::default_entries(const std::vector<std::string>& first_names) {
  std::vector<PoolEntry> out;
  int n = 10;
  for (const auto& name : first_names) out.push_back({name, "+1 (202) 555-01" + std::to_string(n++)});
  return out;
}

SharedMessengerAccount* AccountPool::find(const std::string& first_name) {
  for (auto& a : accounts_)
    if (a.first_name_key == first_name) return &a;
  return nullptr;
}

const SharedMessengerAccount* AccountPool::find(const std::string& first_name) const {
  for (const auto& a : accounts_)
    if (a.first_name_key == first_name) return &a;
  return nullptr;
}

const SharedMessengerAccount& AccountPool::allocate(const std::string& first_name) const {
  if (const auto* a = find(first_name)) return *a;
  throw PoolMiss("no shared messenger account for first name '" + first_name + "'");
}

bool AccountPool::has(const std::string& first_name) const { return find(first_name) != nullptr; }

std::optional<Binding> AccountPool::collision(const std::string& first_name,
                                              const std::string& identity,
                                              const std::string& persona_id) const {
  const auto& acct = allocate(first_name);
  for (const auto& b : acct.bindings)
    if (b.scammer_identity == identity && b.persona_id != persona_id) return b;
  return std::nullopt;
}

void AccountPool::bind(const std::string& first_name, Binding b) {
  if (collision(first_name, b.scammer_identity, b.persona_id))
    throw StateError("identity collision on shared account " + first_name);
  auto* acct = find(first_name);
  for (const auto& existing : acct->bindings)
    if (existing == b) return;
  acct->bindings.push_back(std::move(b));
}

std::optional<Binding> AccountPool::route(const std::string& account_phone,
                                          const std::string& identity) const {
  const auto* acct = by_phone(account_phone);
  if (!acct) return std::nullopt;
  // Most recent binding wins when the same persona migrated twice.
  for (auto it = acct->bindings.rbegin(); it != acct->bindings.rend(); ++it)
    if (it->scammer_identity == identity) return *it;
  return std::nullopt;
}

const SharedMessengerAccount* AccountPool::by_phone(const std::string& phone) const {
  const auto canon = canonical_phone(phone);
  for (const auto& a : accounts_)
    if (canonical_phone(a.phone) == canon) return &a;
  return nullptr;
}

std::vector<std::string> AccountPool::phones() const {
  std::vector<std::string> out;
  for (const auto& a : accounts_) out.push_back(a.phone);
  return out;
}

nlohmann::json AccountPool::bindings_json() const {
  auto out = nlohmann::json::object();
  for (const auto& a : accounts_) {
    auto arr = nlohmann::json::array();
    for (const auto& b : a.bindings)
      arr.push_back({{"scammer_identity", b.scammer_identity},
                     {"persona_id", b.persona_id},
                     {"thread_id", b.thread_id}});
    out[a.first_name_key] = arr;
  }
  return out;
}

std::string_view to_string(Outcome o) {
  return o == Outcome::awaiting_approval ? "awaiting_approval" : "collision_halt";
}

std::string reintro_text(int template_index, const std::string& first_name, PlatformId origin) {
  const std::string platform(display_name(origin));
  switch (((template_index % kReintroTemplateCount) + kReintroTemplateCount) % kReintroTemplateCount) {
    case 0: return "hey, this is " + first_name + " from " + platform;
    case 1: return "Its me " + first_name + " from " + platform;
    default: return "hi, it's " + first_name + ", we were talking on " + platform;
  }
}

Outcome handle_migration_request(ConversationThread& thread, const DetectionEvent& event,
                                 const AccountPool& pool, const persona::Persona& persona,
                                 const std::string& item_id) {
  if (event.kind != DetectionEvent::Kind::phone_number)
    throw StateError("migration requests are triggered by phone numbers only");
  if (thread.migration) throw StateError("thread " + thread.thread_id + " already migrated");
  if (thread.state == ThreadState::halted) throw StateError("thread " + thread.thread_id + " is halted");

  const auto identity = canonical_phone(event.value);
  if (thread.pending_migration) {
    thread.pending_migration->scammer_number = identity;
    return Outcome::awaiting_approval;
  }

  std::optional<Binding> clash;
  try {
    clash = pool.collision(persona.first_name, identity, persona.persona_id);
  } catch (const PoolMiss&) {
    thread.state = ThreadState::halted;
    thread.halt_reason = "no shared messenger account for " + persona.first_name;
    return Outcome::collision_halt;
  }
  if (clash) {
    thread.state = ThreadState::halted;
    thread.halt_reason = "identity collision with " + clash->persona_id + " on shared account " +
                         persona.first_name;
    return Outcome::collision_halt;
  }
  if (thread.state != ThreadState::awaiting_approval) thread.resume_state = thread.state;
  thread.state = ThreadState::awaiting_approval;
  thread.pending_migration = PendingMigration{identity, item_id, thread.message_count()};
  return Outcome::awaiting_approval;
}

std::optional<Message> execute_migration(ConversationThread& thread, AccountPool& pool,
                                         const persona::Persona& persona,
                                         const std::string& approver, int template_index,
                                         Instant now) {
  if (thread.state != ThreadState::awaiting_approval || !thread.pending_migration)
    throw StateError("thread " + thread.thread_id + " has no pending migration");
  const auto identity = thread.pending_migration->scammer_number;
  if (auto clash = pool.collision(persona.first_name, identity, persona.persona_id)) {
    thread.state = ThreadState::halted;
    thread.halt_reason = "identity collision with " + clash->persona_id + " on shared account " +
                         persona.first_name;
    thread.pending_migration.reset();
    return std::nullopt;
  }
  const auto& acct = pool.allocate(persona.first_name);
  pool.bind(persona.first_name, {identity, persona.persona_id, thread.thread_id});

  for (auto& s : thread.segments)
    if (s.platform != PlatformId::wa_like) s.dormant = true;

  Segment wa;
  wa.platform = PlatformId::wa_like;
  wa.scammer_handle = identity;
  wa.honeypot_account = acct.phone;

  Message m;
  m.index = thread.message_count() + 1;
  m.direction = Direction::outbound;
  m.role = Role::persona;
  m.platform = PlatformId::wa_like;
  m.at = now;
  m.at_local = format_local_iso(now, persona.timezone);
  m.text = reintro_text(template_index, persona.first_name, thread.origin_platform);
  m.origin = "reintro";
  wa.messages.push_back(m);
  thread.segments.push_back(std::move(wa));
  thread.scammer_handles[PlatformId::wa_like] = identity;

  thread.migration = MigrationRecord{thread.thread_id, thread.origin_platform, identity, approver,
                                     template_index, now, acct.phone};
  thread.pending_migration.reset();
  thread.state = thread.resume_state;
  ++thread.total_persona_turns;
  thread.last_activity = now;
  return m;
}

void deny_migration(ConversationThread& thread) {
  if (thread.state != ThreadState::awaiting_approval || !thread.pending_migration)
    throw StateError("thread " + thread.thread_id + " has no pending migration");
  thread.pending_migration.reset();
  thread.state = thread.resume_state;
}

}  // namespace chatterbox::migration
