#include <chatterbox/analytics.hpp>
#include <chatterbox/errors.hpp>
#include <chatterbox/orchestrator.hpp>
#include <chatterbox/scammer_sim.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace chatterbox::orchestrator {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& detail) {
  throw ConfigError(field + ": " + detail);
}

const json* child(const json& j, const char* key) {
  return j.contains(key) ? &j.at(key) : nullptr;
}

Seconds seconds_field(const json& v, const std::string& field) {
  try {
    if (v.is_number_integer()) return Seconds{v.get<std::int64_t>()};
    if (v.is_string()) return parse_duration(v.get<std::string>());
  } catch (const Error& e) {
    fail(field, e.what());
  }
  fail(field, "expected seconds or a duration string");
}

int int_field(const json& v, const std::string& field) {
  if (!v.is_number_integer()) fail(field, "expected an integer");
  return v.get<int>();
}

double number_field(const json& v, const std::string& field) {
  if (!v.is_number()) fail(field, "expected a number");
  return v.get<double>();
}

std::string string_field(const json& v, const std::string& field) {
  if (!v.is_string()) fail(field, "expected a string");
  return v.get<std::string>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path out(p);
  return out.is_absolute() ? out : base / out;
}

AdapterConfig adapter(const json& j, const std::string& field, const fs::path& base) {
  AdapterConfig a;
  if (!j.is_object()) fail(field, "expected an object");
  if (auto* k = child(j, "kind")) a.kind = string_field(*k, field + ".kind");
  if (a.kind != "stub" && a.kind != "http") fail(field + ".kind", "must be \"stub\" or \"http\"");
  if (auto* u = child(j, "url")) a.url = string_field(*u, field + ".url");
  if (a.kind == "http" && a.url.empty()) fail(field + ".url", "required for an http adapter");
  if (auto* t = child(j, "table")) {
    a.table = resolve(base, string_field(*t, field + ".table"));
    if (!fs::exists(a.table)) fail(field + ".table", a.table.string() + " does not exist");
  }
  return a;
}

}  // namespace

Config parse_config(const json& j, const fs::path& base) {
  if (!j.is_object()) fail("config", "expected an object");
  static const std::vector<std::string> known = {
      "personas_dir", "scenario",    "pool",    "poll",     "delays",    "max_retries",
      "candidates_k", "first_n_human", "checkpoint_every", "ignore_cooldown_s", "seed", "openers",
      "backends",     "api",         "event_log", "export"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) fail(key, "unknown key");

  Config c;
  auto* pd = child(j, "personas_dir");
  if (!pd) fail("personas_dir", "required");
  c.personas_dir = resolve(base, string_field(*pd, "personas_dir"));
  if (!fs::is_directory(c.personas_dir)) fail("personas_dir", c.personas_dir.string() + " is not a directory");

  if (auto* s = child(j, "scenario")) {
    c.scenario = resolve(base, string_field(*s, "scenario"));
    if (!fs::exists(*c.scenario)) fail("scenario", c.scenario->string() + " does not exist");
  }

  if (auto* pool = child(j, "pool")) {
    if (!pool->is_array()) fail("pool", "expected a list of {first_name_key, phone}");
    for (std::size_t i = 0; i < pool->size(); ++i) {
      const auto& e = (*pool)[i];
      const auto f = "pool[" + std::to_string(i) + "]";
      if (!e.is_object() || !e.contains("first_name_key") || !e.contains("phone"))
        fail(f, "expected {first_name_key, phone}");
      c.pool.push_back({string_field(e["first_name_key"], f + ".first_name_key"), string_field(e["phone"], f + ".phone")});
    }
    try {
      migration::AccountPool check(c.pool);
    } catch (const ConfigError& e) {
      fail("pool", e.what());
    }
  }

  auto& rt = c.runtime;
  if (auto* p = child(j, "poll")) {
    if (!p->is_object()) fail("poll", "expected an object");
    if (auto* v = child(*p, "base_interval_s")) rt.poll.base_interval = seconds_field(*v, "poll.base_interval_s");
    if (auto* v = child(*p, "cap_s")) rt.poll.cap = seconds_field(*v, "poll.cap_s");
    if (auto* v = child(*p, "jitter_pct")) rt.poll.jitter_pct = number_field(*v, "poll.jitter_pct");
    if (auto* v = child(*p, "p_seed")) rt.poll.p_seed = number_field(*v, "poll.p_seed");
    if (auto* v = child(*p, "window_start")) rt.poll.window_start = int_field(*v, "poll.window_start");
    if (auto* v = child(*p, "window_end")) rt.poll.window_end = int_field(*v, "poll.window_end");
  }
  if (rt.poll.base_interval.count() <= 0) fail("poll.base_interval_s", "must be positive");
  if (rt.poll.cap < rt.poll.base_interval) fail("poll.cap_s", "must be >= poll.base_interval_s");
  if (rt.poll.jitter_pct < 0 || rt.poll.jitter_pct >= 1) fail("poll.jitter_pct", "must be in [0, 1)");
  if (rt.poll.p_seed < 0 || rt.poll.p_seed > 1) fail("poll.p_seed", "must be in [0, 1]");
  if (rt.poll.window_start < 0 || rt.poll.window_start > 23) fail("poll.window_start", "must be an hour 0-23");
  if (rt.poll.window_end < 1 || rt.poll.window_end > 24) fail("poll.window_end", "must be an hour 1-24");
  if (rt.poll.window_start >= rt.poll.window_end) fail("poll.window_end", "must be after poll.window_start");

  if (auto* d = child(j, "delays")) {
    if (!d->is_object()) fail("delays", "expected an object");
    if (auto* v = child(*d, "min_s")) rt.delay_min = seconds_field(*v, "delays.min_s");
    if (auto* v = child(*d, "max_s")) rt.delay_max = seconds_field(*v, "delays.max_s");
  }
  if (rt.delay_min.count() <= 0) fail("delays.min_s", "must be positive");
  if (rt.delay_min > rt.delay_max) fail("delays.max_s", "must be >= delays.min_s");

  if (auto* v = child(j, "max_retries")) rt.max_retries = int_field(*v, "max_retries");
  if (rt.max_retries < 1) fail("max_retries", "must be >= 1");
  if (auto* v = child(j, "candidates_k")) rt.candidates_k = int_field(*v, "candidates_k");
  if (rt.candidates_k < 1) fail("candidates_k", "must be >= 1");
  if (auto* v = child(j, "first_n_human")) rt.first_n_human = int_field(*v, "first_n_human");
  if (rt.first_n_human < 0) fail("first_n_human", "must be >= 0");
  if (auto* v = child(j, "checkpoint_every")) rt.checkpoint_every = int_field(*v, "checkpoint_every");
  if (rt.checkpoint_every < 1) fail("checkpoint_every", "must be >= 1");
  if (auto* v = child(j, "ignore_cooldown_s")) rt.ignore_cooldown = seconds_field(*v, "ignore_cooldown_s");
  if (rt.ignore_cooldown.count() < 0) fail("ignore_cooldown_s", "must be >= 0");
  if (auto* v = child(j, "seed")) {
    if (!v->is_number_unsigned()) fail("seed", "expected a non-negative integer");
    rt.seed = v->get<std::uint64_t>();
  }
  if (auto* v = child(j, "openers")) {
    if (!v->is_array() || v->empty()) fail("openers", "expected a non-empty list of strings");
    rt.openers.clear();
    for (std::size_t i = 0; i < v->size(); ++i)
      rt.openers.push_back(string_field((*v)[i], "openers[" + std::to_string(i) + "]"));
  }

  if (auto* b = child(j, "backends")) {
    if (!b->is_object()) fail("backends", "expected an object");
    if (auto* v = child(*b, "dialogue")) c.dialogue = adapter(*v, "backends.dialogue", base);
    if (auto* v = child(*b, "captioner")) c.captioner = adapter(*v, "backends.captioner", base);
  }

  if (auto* a = child(j, "api")) {
    if (!a->is_object()) fail("api", "expected an object");
    if (auto* v = child(*a, "enabled")) {
      if (!v->is_boolean()) fail("api.enabled", "expected a boolean");
      c.api_enabled = v->get<bool>();
    }
    if (auto* v = child(*a, "host")) c.api.host = string_field(*v, "api.host");
    if (auto* v = child(*a, "port")) c.api.port = int_field(*v, "api.port");
    if (auto* v = child(*a, "token")) c.api.token = string_field(*v, "api.token");
    if (auto* v = child(*a, "assets_dir")) {
      c.api.assets_dir = resolve(base, string_field(*v, "api.assets_dir")).string();
      if (!fs::is_directory(c.api.assets_dir)) fail("api.assets_dir", c.api.assets_dir + " is not a directory");
    }
  }
  if (c.api.port < 0 || c.api.port > 65535) fail("api.port", "must be in [0, 65535]");

  if (auto* v = child(j, "event_log")) c.event_log = string_field(*v, "event_log");
  c.event_log = resolve(base, c.event_log.string());
  if (auto* e = child(j, "export")) {
    if (!e->is_object()) fail("export", "expected an object");
    if (auto* v = child(*e, "dir")) c.export_dir = string_field(*v, "export.dir");
    if (auto* v = child(*e, "salt")) c.export_salt = string_field(*v, "export.salt");
  }
  c.export_dir = resolve(base, c.export_dir.string());
  return c;
}

Config load_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("config: cannot read " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  auto c = parse_config(j, fs::absolute(file).parent_path());
  if (const char* tok = std::getenv("CHATTERBOX_AUTH_TOKEN"); tok && *tok) c.api.token = tok;
  if (c.api_enabled && c.api.token.empty())
    throw ConfigError("api.token: required (or set CHATTERBOX_AUTH_TOKEN)");
  return c;
}

// ---------------------------------------------------------------------------

struct Orchestrator::State {
  Config cfg;
  const Clock& clock;
  PlatformSet platforms;
  std::unique_ptr<prompt::DialogueBackend> dialogue;
  std::unique_ptr<caption::Captioner> captioner;
  std::unique_ptr<Honeypot> hp;
  std::unique_ptr<queue::EventLog> log;
  std::unique_ptr<api::AnnotationService> svc;
  std::unique_ptr<api::ApiServer> server;
  bool started = false;
  bool stopped = false;

  State(Config c, const Clock& clk) : cfg(std::move(c)), clock(clk), platforms(clk) {}
};

Orchestrator::Orchestrator(Config cfg, const Clock& clock) : st_(std::make_unique<State>(std::move(cfg), clock)) {
  auto& st = *st_;
  auto personas = persona::load_personas(st.cfg.personas_dir);
  if (personas.empty()) throw ConfigError("personas_dir: no persona documents in " + st.cfg.personas_dir.string());

  auto entries = st.cfg.pool;
  if (entries.empty()) {
    std::vector<std::string> names;
    for (const auto& p : personas)
      if (std::find(names.begin(), names.end(), p.first_name) == names.end()) names.push_back(p.first_name);
    entries = migration::AccountPool::default_entries(names);
  }
  migration::AccountPool pool(entries);

  if (st.cfg.scenario) {
    auto sc = sim::load_scenario(*st.cfg.scenario);
    for (auto plat : {PlatformId::ts_like, PlatformId::bs_like}) {
      st.platforms.get(plat).set_trending(sc.trending);
      st.platforms.get(plat).set_suggested(sc.suggested);
      if (capability(plat).has_groups) st.platforms.get(plat).set_groups(sc.groups);
    }
    for (const auto& a : sc.actors) {
      auto& origin = st.platforms.get(a.platform);
      if (!origin.has_account(a.handle)) origin.register_account(a.handle, a.metadata);
      auto& wa = st.platforms.get(PlatformId::wa_like);
      if (!a.wa_number.empty() && !wa.has_account(a.wa_number)) wa.register_account(a.wa_number, a.metadata);
    }
  }

  if (st.cfg.dialogue.kind == "http")
    st.dialogue = std::make_unique<prompt::HttpDialogueBackend>(st.cfg.dialogue.url);
  else if (!st.cfg.dialogue.table.empty()) {
    std::ifstream in(st.cfg.dialogue.table);
    json table;
    try {
      table = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError("backends.dialogue.table: " + std::string(e.what()));
    }
    st.dialogue = std::make_unique<prompt::PolicyStubBackend>(table);
  } else
    st.dialogue = std::make_unique<prompt::PolicyStubBackend>(prompt::PolicyStubBackend::default_table());

  if (st.cfg.captioner.kind == "http") {
    st.captioner = std::make_unique<caption::HttpCaptioner>(st.cfg.captioner.url);
  } else {
    std::map<std::string, std::string> table;
    if (!st.cfg.captioner.table.empty()) {
      std::ifstream in(st.cfg.captioner.table);
      try {
        table = json::parse(in).get<std::map<std::string, std::string>>();
      } catch (const json::exception& e) {
        throw ConfigError("backends.captioner.table: " + std::string(e.what()));
      }
    }
    st.captioner = std::make_unique<caption::StubCaptioner>(std::move(table));
  }

  st.hp = std::make_unique<Honeypot>(st.clock, st.platforms, std::move(personas), persona::PolicyLibrary::defaults(),
                                     std::move(pool), *st.dialogue, *st.captioner, st.cfg.runtime);
}

Orchestrator::~Orchestrator() {
  try {
    shutdown();
  } catch (...) {
  }
}

std::size_t Orchestrator::start() {
  auto& st = *st_;
  if (st.started) throw StateError("orchestrator already started");
  std::vector<json> events;
  if (fs::exists(st.cfg.event_log)) events = queue::EventLog::read(st.cfg.event_log);
  st.hp->replay(events);
  if (st.cfg.event_log.has_parent_path()) fs::create_directories(st.cfg.event_log.parent_path());
  st.log = std::make_unique<queue::EventLog>(st.cfg.event_log);
  st.hp->attach_log(st.log.get());
  st.hp->provision();
  if (st.cfg.api_enabled) {
    st.svc = std::make_unique<api::AnnotationService>(*st.hp);
    st.server = std::make_unique<api::ApiServer>(*st.svc, st.cfg.api);
    st.server->start();
  }
  st.started = true;
  return events.size();
}

void Orchestrator::tick() {
  auto& hp = *st_->hp;
  auto next = hp.next_wakeup();
  if (next && *next <= st_->clock.now()) hp.step();
}

void Orchestrator::run(const std::atomic<bool>& stop, std::chrono::milliseconds max_sleep) {
  while (!stop.load()) {
    tick();
    auto next = st_->hp->next_wakeup();
    auto wait = max_sleep;
    if (next) {
      auto until = std::chrono::duration_cast<std::chrono::milliseconds>(*next - st_->clock.now());
      wait = std::clamp(until, std::chrono::milliseconds(0), max_sleep);
    }
    if (wait.count() > 0) std::this_thread::sleep_for(wait);
  }
}

void Orchestrator::shutdown() {
  auto& st = *st_;
  if (!st.started || st.stopped) return;
  if (st.server) st.server->stop();
  st.hp->attach_log(nullptr);
  if (st.log) st.log->flush();
  st.stopped = true;
}

ExportPaths Orchestrator::export_data(bool deidentify) const {
  const auto& st = *st_;
  if (deidentify && st.cfg.export_salt.empty()) throw ConfigError("export.salt: required for a de-identified export");
  auto corpus = analytics::corpus_from_threads(st.hp->threads());
  if (deidentify) corpus = analytics::export_deidentified(corpus, st.cfg.export_salt);
  ExportPaths out{st.cfg.export_dir / "transcripts.jsonl", st.cfg.export_dir / "audit.jsonl"};
  analytics::write_corpus(out.transcripts, corpus);
  std::ofstream audit(out.audit, std::ios::trunc);
  for (const auto& e : st.hp->audit_log()) audit << e.dump() << '\n';
  return out;
}

Honeypot& Orchestrator::honeypot() { return *st_->hp; }
PlatformSet& Orchestrator::platforms() { return st_->platforms; }
int Orchestrator::api_port() const { return st_->server ? st_->server->port() : 0; }
const Config& Orchestrator::config() const { return st_->cfg; }

}  // namespace chatterbox::orchestrator
