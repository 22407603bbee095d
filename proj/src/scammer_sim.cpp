#include <chatterbox/errors.hpp>
#include <chatterbox/scammer_sim.hpp>

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>

namespace chatterbox::sim {

using nlohmann::json;

namespace {

Seconds duration_field(const json& j, const char* key, Seconds fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  try {
    if (v.is_number_integer()) return Seconds{v.get<std::int64_t>()};
    if (v.is_string()) return parse_duration(v.get<std::string>());
  } catch (const ParseError& e) {
    throw ParseError(path + "." + key, e.what());
  }
  throw ParseError(path + "." + key, "expected a duration");
}

std::vector<std::string> string_list(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) return {};
  const auto& v = j.at(key);
  if (v.is_string()) return {v.get<std::string>()};
  if (!v.is_array()) throw ParseError(path + "." + key, "expected a string or list");
  std::vector<std::string> out;
  for (const auto& s : v) {
    if (!s.is_string()) throw ParseError(path + "." + key, "expected strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

PlatformId platform_field(const json& j, const std::string& path) {
  try {
    return parse_platform(j.get<std::string>());
  } catch (const std::exception& e) {
    throw ParseError(path, e.what());
  }
}

Expect parse_expect(const json& j, const std::string& path) {
  if (!j.is_object()) throw ParseError(path, "expected an object");
  Expect e;
  e.reply = j.value("reply", false);
  e.no_reply = j.value("no_reply", false);
  e.contains = string_list(j, "contains", path);
  e.not_contains = string_list(j, "not_contains", path);
  if (j.contains("matches")) {
    e.matches = j.at("matches").get<std::string>();
    try {
      std::regex test(*e.matches);
    } catch (const std::regex_error&) {
      throw ParseError(path + ".matches", "invalid pattern");
    }
  }
  e.no_phone = j.value("no_phone", false);
  if (j.contains("platform")) e.platform = platform_field(j.at("platform"), path + ".platform");
  if (j.contains("refusal")) e.refusal = j.at("refusal").get<bool>();
  if (j.contains("media")) e.media = j.at("media").get<bool>();
  if (j.contains("state")) {
    try {
      e.state = parse_thread_state(j.at("state").get<std::string>());
    } catch (const std::exception& ex) {
      throw ParseError(path + ".state", ex.what());
    }
  }
  if (e.no_reply && e.wants_reply()) throw ParseError(path, "no_reply conflicts with reply predicates");
  return e;
}

bool icontains(const std::string& hay, const std::string& needle) {
  auto it = std::search(hay.begin(), hay.end(), needle.begin(), needle.end(), [](char a, char b) {
    return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
  });
  return it != hay.end();
}

}  // namespace

bool Expect::wants_reply() const {
  return reply || !contains.empty() || !not_contains.empty() || matches || no_phone || platform ||
         refusal || media;
}

Scenario parse_scenario(const json& j) {
  if (!j.is_object()) throw ParseError("scenario", "expected an object");
  Scenario s;
  s.name = j.value("name", std::string("unnamed"));
  s.seed = j.value("seed", std::uint64_t{1});
  try {
    s.start = parse_utc(j.value("start", std::string("2025-07-07T14:00:00Z")));
  } catch (const std::exception& e) {
    throw ParseError("start", e.what());
  }

  if (!j.contains("personas") || !j.at("personas").is_array() || j.at("personas").empty())
    throw ParseError("personas", "at least one persona is required");
  std::set<std::string> persona_keys;
  for (std::size_t i = 0; i < j.at("personas").size(); ++i) {
    const auto& p = j.at("personas")[i];
    const auto path = "personas[" + std::to_string(i) + "]";
    PersonaSpec spec;
    spec.key = p.value("key", std::string{});
    if (spec.key.empty()) throw ParseError(path + ".key", "missing");
    if (!persona_keys.insert(spec.key).second) throw ParseError(path + ".key", "duplicate");
    spec.seed = p.value("seed", std::uint64_t{i + 1});
    spec.first_name = p.value("first_name", std::string{});
    spec.last_name = p.value("last_name", std::string{});
    spec.city = p.value("city", std::string{});
    s.personas.push_back(spec);
  }

  if (!j.contains("actors") || !j.at("actors").is_array()) throw ParseError("actors", "expected a list");
  std::set<std::string> actor_keys;
  for (std::size_t i = 0; i < j.at("actors").size(); ++i) {
    const auto& a = j.at("actors")[i];
    const auto path = "actors[" + std::to_string(i) + "]";
    ActorSpec spec;
    spec.key = a.value("key", std::string{});
    if (spec.key.empty()) throw ParseError(path + ".key", "missing");
    if (!actor_keys.insert(spec.key).second) throw ParseError(path + ".key", "duplicate");
    spec.persona = a.value("persona", s.personas.front().key);
    if (!persona_keys.count(spec.persona)) throw ParseError(path + ".persona", "unknown persona " + spec.persona);
    spec.platform = a.contains("platform") ? platform_field(a.at("platform"), path + ".platform") : PlatformId::ts_like;
    if (!is_origin(spec.platform)) throw ParseError(path + ".platform", "actors start on an origin platform");
    spec.handle = a.value("handle", spec.key);
    spec.wa_number = a.value("wa_number", std::string{});
    if (a.contains("metadata")) spec.metadata = account_metadata_from_json(a.at("metadata"));
    if (spec.metadata.username.empty()) spec.metadata.username = spec.handle;
    s.actors.push_back(spec);
  }

  if (j.contains("annotator")) {
    const auto& a = j.at("annotator");
    auto& p = s.annotator;
    p.annotator_id = a.value("annotator_id", p.annotator_id);
    p.interact = a.value("interact", p.interact);
    p.opener_index = a.value("opener_index", p.opener_index);
    p.auto_mode = a.value("auto_mode", p.auto_mode);
    p.approve_migration = a.value("approve_migration", p.approve_migration);
    p.approve_selfie = a.value("approve_selfie", p.approve_selfie);
    if (a.contains("template_index")) p.template_index = a.at("template_index").get<int>();
    p.selfie_asset = a.value("selfie_asset", p.selfie_asset);
    p.selfie_text = a.value("selfie_text", p.selfie_text);
  }
  s.trending = string_list(j, "trending", "scenario");
  s.suggested = string_list(j, "suggested", "scenario");
  s.groups = string_list(j, "groups", "scenario");
  if (j.contains("captions")) s.captions = j.at("captions").get<std::map<std::string, std::string>>();
  s.final_wait = duration_field(j, "final_wait", Seconds{0}, "scenario");

  if (!j.contains("steps") || !j.at("steps").is_array()) throw ParseError("steps", "expected a list");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < j.at("steps").size(); ++i) {
    const auto& st = j.at("steps")[i];
    const auto path = "steps[" + std::to_string(i) + "]";
    Step step;
    step.label = st.value("label", std::string{});
    if (!step.label.empty() && !labels.insert(step.label).second)
      throw ParseError(path + ".label", "duplicate label " + step.label);
    step.actor = st.value("actor", s.actors.empty() ? std::string{} : s.actors.front().key);
    if (!actor_keys.count(step.actor)) throw ParseError(path + ".actor", "unknown actor '" + step.actor + "'");
    step.persona = st.value("persona", std::string{});
    if (!step.persona.empty() && !persona_keys.count(step.persona))
      throw ParseError(path + ".persona", "unknown persona " + step.persona);
    step.wait = duration_field(st, "wait", Seconds{0}, path);
    if (st.contains("platform")) step.platform = platform_field(st.at("platform"), path + ".platform");
    if (st.contains("send")) {
      const auto& snd = st.at("send");
      Payload p;
      if (snd.is_string()) {
        p.text = snd.get<std::string>();
      } else {
        p.text = snd.value("text", std::string{});
        if (snd.contains("media")) p.media = media_from_json(snd.at("media"));
      }
      step.send = p;
    }
    step.follow = st.value("follow", false);
    if (st.contains("expect")) step.expect = parse_expect(st.at("expect"), path + ".expect");
    if (st.contains("branch_on")) {
      const auto& b = st.at("branch_on");
      step.branch_on = Branch{b.at("pattern").get<std::string>(), b.at("goto").get<std::string>()};
    }
    step.reply_timeout = duration_field(st, "reply_timeout", step.reply_timeout, path);
    s.steps.push_back(std::move(step));
  }
  for (std::size_t i = 0; i < s.steps.size(); ++i)
    if (s.steps[i].branch_on && !labels.count(s.steps[i].branch_on->go_to))
      throw ParseError("steps[" + std::to_string(i) + "].branch_on.goto", "unknown label");
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), e.what());
  }
  return parse_scenario(j);
}

json RunResult::trace_json() const {
  json out = json::array();
  for (const auto& e : trace) {
    json j = {{"at", format_utc(e.at)},
              {"side", e.side},
              {"actor", e.actor},
              {"platform", std::string(platform_code(e.platform))},
              {"text", e.text},
              {"step", e.step}};
    if (!e.media.empty()) j["media"] = e.media;
    out.push_back(j);
  }
  return out;
}

// ---------------------------------------------------------------------------

int SimulatedAnnotator::act_once() {
  using V = AnnotatorAction::Verb;
  int n = 0;
  auto rows = hp_.list_triage();
  if (!rows.empty()) {
    std::vector<TriageDecision> batch;
    for (const auto& r : rows)
      batch.push_back({r.thread_id, policy_.interact, policy_.opener_index, policy_.annotator_id, r.version});
    hp_.triage_act(batch);
    n += static_cast<int>(batch.size());
  }

  for (const auto& s : hp_.list_conversations()) {
    if (s.state == ThreadState::halted || s.state == ThreadState::snoozed) continue;
    AnnotatorAction a;
    a.annotator_id = policy_.annotator_id;
    a.thread_id = s.thread_id;
    a.expected_version = s.version;
    try {
      auto t = hp_.thread(s.thread_id);
      if (t.pending_migration) {
        a.verb = policy_.approve_migration ? V::approve_migration : V::deny;
        a.template_index = policy_.template_index;
        hp_.act(a);
        ++n;
        continue;
      }
      if (t.pending_selfie_item) {
        const auto& pool = hp_.persona(t.persona_id).selfie_assets;
        a.verb = policy_.approve_selfie && !pool.empty() ? V::approve_selfie : V::deny;
        if (!pool.empty()) a.asset_id = pool[static_cast<std::size_t>(policy_.selfie_asset) % pool.size()];
        a.text = policy_.selfie_text;
        hp_.act(a);
        ++n;
        continue;
      }
      if (t.state == ThreadState::manual && policy_.auto_mode) {
        a.verb = V::toggle_auto;
        a.expected_version = hp_.act(a).version;
        ++n;
        t = hp_.thread(s.thread_id);
      }
      if (!hp_.needs_review(s.thread_id)) continue;
      const auto* last = t.last_message();
      if (!last || last->role != Role::scammer) continue;
      bool queued = false;
      for (const auto& q : hp_.queue_items())
        if (q.thread_id == s.thread_id && q.open()) queued = true;
      if (queued) continue;
      auto cands = hp_.candidates(s.thread_id, 1, policy_.annotator_id);
      if (cands.empty()) continue;
      a.verb = V::submit;
      a.text = cands.front().text;
      hp_.act(a);
      ++n;
    } catch (const Conflict&) {
    } catch (const SerializationError&) {
    } catch (const StateError&) {
    } catch (const ValidationExhausted&) {
    } catch (const BackendUnavailable&) {
    }
  }
  return n;
}

// ---------------------------------------------------------------------------

struct ScenarioRunner::State {
  Scenario sc;
  RunnerOptions opts;
  SimClock clock;
  PlatformSet platforms;
  prompt::PolicyStubBackend backend;
  caption::StubCaptioner captioner;
  std::map<std::string, std::string> persona_ids;
  std::map<std::string, ActorSpec> actors;
  std::unique_ptr<Honeypot> hp;
  std::unique_ptr<SimulatedAnnotator> annotator;
  std::map<std::pair<PlatformId, std::string>, std::uint64_t> cursors;
  std::vector<TraceEntry> trace;
  std::string current_step;

  State(Scenario s, RunnerOptions o)
      : sc(std::move(s)),
        opts(std::move(o)),
        clock(sc.start),
        platforms(clock),
        backend(prompt::PolicyStubBackend::default_table()),
        captioner(sc.captions) {}

  /// Moves newly delivered persona messages into the trace; returns them.
  std::vector<TraceEntry> drain() {
    std::vector<TraceEntry> out;
    for (const auto& [key, a] : actors) {
      std::vector<std::pair<PlatformId, std::string>> inboxes{{a.platform, a.handle}};
      if (!a.wa_number.empty()) inboxes.emplace_back(PlatformId::wa_like, a.wa_number);
      for (const auto& box : inboxes) {
        auto& cur = cursors[box];
        for (const auto& n : platforms.get(box.first).counterparty_inbox(box.second, cur)) {
          cur = std::max(cur, n.seq);
          TraceEntry e{n.at, "persona", key, box.first, n.payload.text,
                       n.payload.media ? n.payload.media->asset_ref : "", current_step};
          trace.push_back(e);
          out.push_back(e);
        }
      }
    }
    return out;
  }

  /// Runs the system until `until` or until `stop` holds after a wakeup.
  std::vector<TraceEntry> advance(Instant until, const std::function<bool(const std::vector<TraceEntry>&)>& stop) {
    std::vector<TraceEntry> got;
    std::size_t stalls = 0;
    Instant last{};
    for (;;) {
      auto next = hp->next_wakeup();
      if (!next || *next > until) break;
      clock.advance_to(*next);
      if (clock.now() == last) {
        if (++stalls > 10000) throw StateError("simulation stalled at " + format_utc(last));
      } else {
        stalls = 0;
        last = clock.now();
      }
      hp->step();
      annotator->act_once();
      auto fresh = drain();
      got.insert(got.end(), fresh.begin(), fresh.end());
      if (stop && stop(got)) return got;
    }
    clock.advance_to(until);
    auto fresh = drain();
    got.insert(got.end(), fresh.begin(), fresh.end());
    return got;
  }
};

ScenarioRunner::ScenarioRunner(Scenario s, RunnerOptions opts)
    : st_(std::make_unique<State>(std::move(s), std::move(opts))) {
  auto& st = *st_;
  const auto pools = persona::NamePools::defaults();
  auto quota = persona::Quota::uniform(100);
  persona::TemplateBiographySource bio;
  std::vector<persona::Persona> personas;
  std::vector<std::string> first_names;
  for (const auto& spec : st.sc.personas) {
    auto p = persona::generate_persona(spec.seed, pools, quota, bio);
    if (!spec.first_name.empty()) p.first_name = spec.first_name;
    if (!spec.last_name.empty()) p.last_name = spec.last_name;
    if (!spec.city.empty()) {
      const auto* c = pools.city(spec.city);
      if (!c) throw ParseError("personas." + spec.key + ".city", "unknown city " + spec.city);
      p.home_city = c->name;
      p.timezone = c->timezone;
    }
    st.persona_ids[spec.key] = p.persona_id;
    if (std::find(first_names.begin(), first_names.end(), p.first_name) == first_names.end())
      first_names.push_back(p.first_name);
    personas.push_back(std::move(p));
  }
  migration::AccountPool pool(migration::AccountPool::default_entries(first_names));

  for (auto plat : kOriginPlatforms) {
    st.platforms.get(plat).set_trending(st.sc.trending);
    st.platforms.get(plat).set_suggested(st.sc.suggested);
    if (capability(plat).has_groups) st.platforms.get(plat).set_groups(st.sc.groups);
  }
  for (const auto& a : st.sc.actors) {
    st.actors[a.key] = a;
    auto& origin = st.platforms.get(a.platform);
    if (!origin.has_account(a.handle)) origin.register_account(a.handle, a.metadata);
    if (!a.wa_number.empty()) {
      auto& wa = st.platforms.get(PlatformId::wa_like);
      if (!wa.has_account(a.wa_number)) wa.register_account(a.wa_number, a.metadata);
    }
  }

  auto rt = st.opts.runtime_set ? st.opts.runtime : RuntimeOptions{};
  rt.seed = st.sc.seed;
  st.hp = std::make_unique<Honeypot>(st.clock, st.platforms, std::move(personas),
                                     persona::PolicyLibrary::defaults(), std::move(pool), st.backend,
                                     st.captioner, rt);
  if (st.opts.observer) st.hp->set_observer(st.opts.observer);
  st.hp->attach_log(st.opts.log);
  st.hp->provision();
  st.annotator = std::make_unique<SimulatedAnnotator>(*st.hp, st.sc.annotator);
}

ScenarioRunner::~ScenarioRunner() = default;

Honeypot& ScenarioRunner::honeypot() { return *st_->hp; }
SimClock& ScenarioRunner::clock() { return st_->clock; }
PlatformSet& ScenarioRunner::platforms() { return st_->platforms; }
const prompt::PolicyStubBackend& ScenarioRunner::backend() const { return st_->backend; }
const std::map<std::string, std::string>& ScenarioRunner::persona_ids() const { return st_->persona_ids; }

RunResult ScenarioRunner::run() {
  auto& st = *st_;
  auto& hp = *st.hp;
  RunResult result;
  std::map<std::string, std::size_t> label_index;
  for (std::size_t i = 0; i < st.sc.steps.size(); ++i)
    if (!st.sc.steps[i].label.empty()) label_index[st.sc.steps[i].label] = i;

  std::size_t i = 0;
  std::size_t executed = 0;
  while (i < st.sc.steps.size()) {
    if (++executed > 10 * st.sc.steps.size() + 100) throw ScenarioFailure(i, st.sc.steps[i].label, "branch loop");
    const auto& step = st.sc.steps[i];
    const auto& actor = st.actors.at(step.actor);
    const auto& pid = st.persona_ids.at(step.persona.empty() ? actor.persona : step.persona);
    st.current_step = step.label.empty() ? "#" + std::to_string(i) : step.label;

    st.advance(st.clock.now() + step.wait, {});

    const auto plat = step.platform.value_or(actor.platform);
    if (step.send) {
      std::string from, to;
      if (plat == PlatformId::wa_like) {
        if (actor.wa_number.empty()) throw ScenarioFailure(i, step.label, "actor has no wa_number");
        from = actor.wa_number;
        to = hp.pool().allocate(hp.persona(pid).first_name).phone;
      } else {
        from = actor.handle;
        to = hp.origin_handle(pid);
      }
      st.platforms.get(plat).counterparty_send(from, to, *step.send);
      st.trace.push_back({st.clock.now(), "scammer", actor.key, plat, step.send->text,
                          step.send->media ? step.send->media->asset_ref : "", st.current_step});
    }
    if (step.follow) st.platforms.get(actor.platform).counterparty_follow(actor.handle, hp.origin_handle(pid));

    StepResult sr;
    sr.index = i;
    sr.label = step.label;
    std::vector<std::string> failures;
    const auto thread_state = [&]() -> std::optional<ThreadState> {
      auto id = hp.find_thread(pid, actor.platform, actor.handle);
      if (!id) return std::nullopt;
      return hp.thread(*id).state;
    };

    const bool wants_reply = (step.expect && step.expect->wants_reply()) || step.branch_on;
    const auto deadline = st.clock.now() + step.reply_timeout;
    std::optional<TraceEntry> reply;
    const auto from_actor = [&](const std::vector<TraceEntry>& got) -> std::optional<TraceEntry> {
      std::optional<TraceEntry> last;
      for (const auto& e : got)
        if (e.actor == actor.key) last = e;
      return last;
    };
    if (wants_reply) {
      reply = from_actor(st.advance(deadline, [&](const auto& got) { return from_actor(got).has_value(); }));
      if (!reply && step.expect && step.expect->wants_reply())
        failures.push_back("no reply within " + std::to_string(step.reply_timeout.count()) + "s");
    } else if (step.expect && step.expect->no_reply) {
      if (auto got = from_actor(st.advance(deadline, {})))
        failures.push_back("unexpected reply: " + got->text);
    } else if (step.expect && step.expect->state) {
      const auto want = *step.expect->state;
      st.advance(deadline, [&](const auto&) { return thread_state() == want; });
    }
    if (reply) sr.reply = reply->text;

    if (step.expect && reply) {
      const auto& e = *step.expect;
      const auto& text = reply->text;
      for (const auto& c : e.contains)
        if (!icontains(text, c)) failures.push_back("reply lacks '" + c + "'");
      for (const auto& c : e.not_contains)
        if (icontains(text, c)) failures.push_back("reply contains '" + c + "'");
      if (e.matches && !std::regex_search(text, std::regex(*e.matches, std::regex::icase)))
        failures.push_back("reply does not match /" + *e.matches + "/");
      if (e.no_phone && !prompt::find_phone_numbers(text).empty())
        failures.push_back("reply contains a phone number");
      if (e.platform && reply->platform != *e.platform)
        failures.push_back("reply arrived on " + std::string(platform_code(reply->platform)));
      if (e.refusal && st.backend.was_refusal(text) != *e.refusal)
        failures.push_back(*e.refusal ? "reply was not a refusal" : "reply was a refusal");
      if (e.media && reply->media.empty() == *e.media)
        failures.push_back(*e.media ? "reply carries no media" : "reply carries media");
    }
    if (step.expect && step.expect->state) {
      auto s = thread_state();
      if (s != step.expect->state)
        failures.push_back("thread state is " + (s ? std::string(to_string(*s)) : std::string("absent")) +
                           ", expected " + std::string(to_string(*step.expect->state)));
    }

    if (!failures.empty()) {
      sr.ok = false;
      for (const auto& f : failures) sr.detail += (sr.detail.empty() ? "" : "; ") + f;
      result.passed = false;
      if (result.failure.empty())
        result.failure = "step " + std::to_string(i) + (step.label.empty() ? "" : " (" + step.label + ")") +
                         ": " + sr.detail;
      if (st.opts.throw_on_failure) throw ScenarioFailure(i, step.label, sr.detail);
    }
    result.steps.push_back(sr);

    if (step.branch_on && reply && std::regex_search(reply->text, std::regex(step.branch_on->pattern, std::regex::icase)))
      i = label_index.at(step.branch_on->go_to);
    else
      ++i;
  }

  st.current_step = "final";
  st.advance(st.clock.now() + st.sc.final_wait, {});
  result.trace = st.trace;
  result.end = st.clock.now();
  result.threads = hp.threads();
  result.snapshot = hp.snapshot();
  return result;
}

}  // namespace chatterbox::sim
