#include "support.hpp"

#include <chatterbox/errors.hpp>
#include <chatterbox/migration.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace testsupport {

using nlohmann::json;
namespace fs = std::filesystem;

fs::path source_dir() { return CHATTERBOX_SOURCE_DIR; }

fs::path scenario_path(const std::string& name) { return source_dir() / "data" / "scenarios" / (name + ".json"); }

fs::path temp_dir(const std::string& tag) {
  static int counter = 0;
  auto dir = fs::temp_directory_path() / ("chatterbox-test-" + std::to_string(::getpid()) + "-" + tag + "-" +
                                          std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

persona::Persona make_persona(std::uint64_t seed, const std::string& first_name, const std::string& city) {
  static const auto pools = persona::NamePools::defaults();
  auto quota = persona::Quota::uniform(1);
  persona::TemplateBiographySource bio;
  auto p = persona::generate_persona(seed, pools, quota, bio);
  if (!first_name.empty()) p.first_name = first_name;
  if (const auto* c = pools.city(city)) {
    p.home_city = c->name;
    p.timezone = c->timezone;
  }
  return p;
}

Rig::Rig(std::vector<persona::Persona> personas, RuntimeOptions opts, bool use_scripted, Instant start)
    : clock(start), platforms(clock), stub(prompt::PolicyStubBackend::default_table()) {
  std::vector<std::string> names;
  for (const auto& p : personas)
    if (std::find(names.begin(), names.end(), p.first_name) == names.end()) names.push_back(p.first_name);
  migration::AccountPool pool(migration::AccountPool::default_entries(names));
  prompt::DialogueBackend& backend = use_scripted ? static_cast<prompt::DialogueBackend&>(scripted) : stub;
  hp = std::make_unique<Honeypot>(clock, platforms, std::move(personas), persona::PolicyLibrary::defaults(),
                                  std::move(pool), backend, captioner, opts);
  hp->set_observer([this](const json& e) { events.push_back(e); });
  hp->provision();
}

void Rig::scammer_says(PlatformId platform, const std::string& handle, const std::string& persona_id,
                       const std::string& text, std::optional<MediaRef> media) {
  auto& sp = platforms.get(platform);
  if (!sp.has_account(handle)) sp.register_account(handle, AccountMetadata{handle, "", 10, 20, 30});
  sp.counterparty_send(handle, hp->origin_handle(persona_id), Payload{text, std::move(media)});
}

void Rig::scammer_says_wa(const std::string& number, const std::string& persona_id, const std::string& text,
                          std::optional<MediaRef> media) {
  auto& wa = platforms.get(PlatformId::wa_like);
  if (!wa.has_account(number)) wa.register_account(number, AccountMetadata{number, "", 0, 0, 0});
  const auto& p = hp->persona(persona_id);
  wa.counterparty_send(number, hp->pool().allocate(p.first_name).phone, Payload{text, std::move(media)});
}

void Rig::run_for(Seconds d) { hp->run_until(clock, clock.now() + d); }

std::string Rig::only_thread() const {
  auto ts = hp->threads();
  if (ts.size() != 1) throw std::runtime_error("expected exactly one thread, have " + std::to_string(ts.size()));
  return ts.front().thread_id;
}

// ---------------------------------------------------------------------------

sim::Scenario random_auto_trace(std::uint64_t seed) {
  std::mt19937_64 rng(seed * 7919 + 17);
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto chance = [&](double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; };
  static const std::vector<std::string> lines = {
      "how are you today?", "what are you doing now", "I just got back from the gym", "do you like music?",
      "tell me about your family", "I am cooking dinner", "the weather is nice here", "what do you do for work?",
      "do you have kids?", "I like traveling a lot", "good morning dear", "have you eaten yet?",
      "my uncle trades crypto", "are you a real person?", "what are your hobbies?", "I miss talking to you"};
  static const std::vector<int> waits = {20, 45, 120, 600, 1800, 3 * 3600, 9 * 3600, 20 * 3600};

  sim::Scenario s;
  s.name = "trace-" + std::to_string(seed);
  s.seed = seed;
  s.start = parse_utc("2025-07-07T14:00:00Z");
  s.personas.push_back({"p", 1000 + seed, "", "", uni(0, 1) ? "New York" : "Chicago"});
  sim::ActorSpec a;
  a.key = "s";
  a.persona = "p";
  a.platform = uni(0, 1) ? PlatformId::ts_like : PlatformId::bs_like;
  a.handle = "scammer_" + std::to_string(seed);
  a.wa_number = "+1 (646) 555-0" + std::to_string(uni(100, 999));
  a.metadata = AccountMetadata{a.handle, "", uni(0, 500), uni(0, 500), static_cast<double>(uni(1, 900))};
  s.actors.push_back(a);
  s.final_wait = Seconds{2 * 24 * 3600};

  sim::Step first;
  first.label = "hello";
  first.actor = "s";
  first.send = Payload{"hi there", std::nullopt};
  first.follow = true;
  s.steps.push_back(first);

  const int n = uni(15, 45);
  bool migrated = false;
  for (int i = 1; i <= n; ++i) {
    sim::Step st;
    st.label = "m" + std::to_string(i);
    st.actor = "s";
    st.wait = Seconds{waits[static_cast<std::size_t>(uni(0, static_cast<int>(waits.size()) - 1))]};
    std::string text = lines[static_cast<std::size_t>(uni(0, static_cast<int>(lines.size()) - 1))];
    if (migrated) {
      st.platform = PlatformId::wa_like;
      if (chance(0.05)) text = "can you send me a selfie?";
    } else if (i > 12 && chance(0.06)) {
      text = "add me on WhatsApp, my number is " + a.wa_number;
      migrated = true;
      st.wait = Seconds{uni(1, 3) * 3600};
    }
    st.send = Payload{text, std::nullopt};
    s.steps.push_back(st);
    if (migrated && st.platform != PlatformId::wa_like) s.steps.back().reply_timeout = Seconds{3600};
  }
  return s;
}

TraceCheck check_events(const std::vector<json>& events, int checkpoint_every, int first_n_human) {
  TraceCheck out;
  struct PerThread {
    int since_review = 0;
    int persona_turns = 0;
  };
  std::map<std::string, PerThread> threads;
  std::map<std::string, std::string> origin;
  for (const auto& e : events) {
    const auto type = e.at("type").get<std::string>();
    const auto tid = e.value("thread_id", std::string{});
    auto& t = threads[tid];
    if (type == "inbound") {
      if (e.at("message").at("role") == "scammer") ++t.since_review;
    } else if (type == "review") {
      t.since_review = 0;
      ++out.reviews;
    } else if (type == "enqueue") {
      origin[e.at("item").at("item_id").get<std::string>()] = e.at("item").at("origin").get<std::string>();
    } else if (type == "migration_approved") {
      ++t.persona_turns;
    } else if (type == "dispatched") {
      const auto o = origin[e.at("item_id").get<std::string>()];
      if (o == "auto") {
        ++out.auto_dispatches;
        if (t.since_review > checkpoint_every) {
          ++out.checkpoint_violations;
          out.details.push_back(tid + ": auto reply after " + std::to_string(t.since_review) +
                                " scammer messages without review (seq " + std::to_string(e.value("seq", 0)) + ")");
        }
        if (t.persona_turns < first_n_human) {
          ++out.bootstrap_violations;
          out.details.push_back(tid + ": auto reply at persona turn " + std::to_string(t.persona_turns + 1));
        }
      }
      ++t.persona_turns;
    }
  }
  return out;
}

int serialization_violations(const std::vector<ConversationThread>& threads, std::vector<std::string>* details) {
  int n = 0;
  for (const auto& t : threads)
    for (const auto& seg : t.segments)
      for (std::size_t i = 1; i < seg.messages.size(); ++i) {
        const auto& a = seg.messages[i - 1];
        const auto& b = seg.messages[i];
        if (a.role == Role::persona && b.role == Role::persona && b.origin != "reintro") {
          ++n;
          if (details)
            details->push_back(t.thread_id + " " + std::string(platform_code(seg.platform)) + " messages " +
                               std::to_string(a.index) + "," + std::to_string(b.index));
        }
      }
  return n;
}

namespace {

void compare(const json& a, const json& e, const std::string& path, double tol, std::vector<std::string>& out) {
  if (e.is_null()) {
    if (!a.is_null()) out.push_back(path + ": expected null, got " + a.dump());
    return;
  }
  if (e.is_number()) {
    if (!a.is_number()) {
      out.push_back(path + ": expected " + e.dump() + ", got " + a.dump());
      return;
    }
    if (std::fabs(a.get<double>() - e.get<double>()) > tol)
      out.push_back(path + ": expected " + e.dump() + ", got " + a.dump());
    return;
  }
  if (e.is_object()) {
    if (!a.is_object()) {
      out.push_back(path + ": expected an object");
      return;
    }
    for (const auto& [k, v] : e.items()) {
      if (!a.contains(k)) {
        out.push_back(path + "." + k + ": missing");
        continue;
      }
      compare(a.at(k), v, path + "." + k, tol, out);
    }
    return;
  }
  if (e.is_array()) {
    if (!a.is_array() || a.size() != e.size()) {
      out.push_back(path + ": expected " + std::to_string(e.size()) + " entries, got " + a.dump().substr(0, 200));
      return;
    }
    for (std::size_t i = 0; i < e.size(); ++i) compare(a[i], e[i], path + "[" + std::to_string(i) + "]", tol, out);
    return;
  }
  if (a != e) out.push_back(path + ": expected " + e.dump() + ", got " + a.dump());
}

}  // namespace

std::vector<std::string> compare_report(const json& actual, const json& expected, double tol) {
  std::vector<std::string> out;
  compare(actual, expected, "report", tol, out);
  return out;
}

std::string crash_replay_mismatch(const fs::path& scenario, std::uint64_t k, std::uint64_t* total_events) {
  const auto dir = temp_dir("crash");
  const auto log_path = dir / "events.jsonl";
  std::string captured;
  {
    queue::EventLog log(log_path);
    sim::RunnerOptions opts;
    opts.log = &log;
    sim::ScenarioRunner* self = nullptr;
    opts.observer = [&](const json& e) {
      if (e.value("seq", std::uint64_t{0}) == k && self) captured = self->honeypot().snapshot_text();
    };
    sim::ScenarioRunner runner(sim::load_scenario(scenario), opts);
    self = &runner;
    runner.run();
    if (total_events) *total_events = runner.honeypot().events_emitted();
  }
  if (captured.empty()) return "event " + std::to_string(k) + " never happened";

  // The process died while writing record k+1.
  std::ifstream in(log_path, std::ios::binary);
  std::ostringstream torn;
  std::string line;
  for (std::uint64_t i = 0; i <= k && std::getline(in, line); ++i) torn << line << '\n';
  if (std::getline(in, line)) torn << line.substr(0, line.size() / 2);
  const auto crashed = dir / "crashed.jsonl";
  std::ofstream(crashed, std::ios::binary) << torn.str();

  auto events = queue::EventLog::read(crashed);
  if (events.size() != k + 1) return "expected " + std::to_string(k + 1) + " complete records, read " + std::to_string(events.size());
  sim::ScenarioRunner fresh(sim::load_scenario(scenario));
  fresh.honeypot().replay(events);
  const auto replayed = fresh.honeypot().snapshot_text();
  fs::remove_all(dir);
  if (replayed == captured) return "";
  std::size_t at = 0;
  while (at < replayed.size() && at < captured.size() && replayed[at] == captured[at]) ++at;
  return "snapshots differ at byte " + std::to_string(at) + ": live ..." + captured.substr(at > 80 ? at - 80 : 0, 200) +
         " replayed ..." + replayed.substr(at > 80 ? at - 80 : 0, 200);
}

}  // namespace testsupport
