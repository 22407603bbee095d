#include <chatterbox/errors.hpp>
#include <chatterbox/http_util.hpp>
#include <chatterbox/prompt.hpp>

#include <absl/time/civil_time.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace chatterbox::prompt {

using nlohmann::json;

json to_json(const TurnRecord& t) {
  return {{"timestamp_utc", format_utc(t.timestamp_utc)},
          {"timestamp_local", t.timestamp_local},
          {"platform", std::string(display_name(t.platform))},
          {"role", std::string(to_string(t.role))},
          {"content", t.content}};
}

TurnRecord make_turn(const Message& m, const std::string& zone) {
  TurnRecord t;
  t.timestamp_utc = m.at;
  t.timestamp_local = format_local_iso(m.at, zone);
  t.platform = m.platform;
  t.role = m.role;
  t.content = m.model_content();
  if (t.content.empty() && m.sent_asset) t.content = "(you sent a selfie)";
  return t;
}

std::vector<TurnRecord> turns_for(const ConversationThread& t, const std::string& zone) {
  std::vector<TurnRecord> out;
  for (const Message* m : t.history()) {
    auto turn = make_turn(*m, zone);
    if (!turn.content.empty()) out.push_back(std::move(turn));
  }
  return out;
}

// ---------------------------------------------------------------------------

const DetectorConfig& DetectorConfig::defaults() {
  static const DetectorConfig cfg = [] {
    DetectorConfig c;
    c.messengers = {
        {"WhatsApp", {"whatsapp", "whats app", "whatsap"}},
        {"Telegram", {"telegram"}},
        {"Signal", {"signal"}},
        {"WeChat", {"wechat", "we chat"}},
        {"Zangi", {"zangi"}},
        {"Email", {"email", "e-mail"}},
        {"Google Chat", {"google chat", "hangouts"}},
        {"Microsoft Teams", {"microsoft teams", "ms teams"}},
        {"Instagram", {"instagram"}},
        {"iMessage", {"imessage"}},
        {"Kik", {"kik"}},
    };
    c.selfie_keywords = {"selfie", "photo of you", "photos to share", "picture of you",
                         "pic of you"};
    c.payment_terms = {
        {"gift card", {"gift card", "gift cards", "giftcard", "giftcards"}},
        {"CashApp", {"cashapp", "cash app"}},
        {"Zelle", {"zelle"}},
        {"PayPal", {"paypal"}},
        {"Venmo", {"venmo"}},
        {"bank transfer", {"bank transfer", "wire transfer", "bank account"}},
        {"crypto", {"bitcoin", "btc", "crypto", "usdt", "ethereum", "wallet address"}},
        {"Western Union", {"western union"}},
        {"MoneyGram", {"moneygram"}},
    };
    return c;
  }();
  return cfg;
}

namespace {

bool is_word(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_phone_sep(char c) { return c == ' ' || c == '-' || c == '.' || c == '(' || c == ')'; }

}  // namespace

std::vector<PhoneMatch> find_phone_numbers(std::string_view text) {
  std::vector<PhoneMatch> out;
  std::size_t i = 0;
  const auto n = text.size();
  while (i < n) {
    // A run starts at '+', '(' or a digit that is not glued to a preceding word.
    bool start_ok = false;
    if (i == 0 || !is_word(text[i - 1])) {
      if (is_digit(text[i])) start_ok = true;
      else if ((text[i] == '+' || text[i] == '(') && i + 1 < n && is_digit(text[i + 1])) start_ok = true;
    }
    if (!start_ok) {
      ++i;
      continue;
    }
    std::size_t j = i;
    if (text[j] == '+' || text[j] == '(') ++j;
    std::size_t last_digit = j;
    int digits = 0;
    while (j < n) {
      if (is_digit(text[j])) {
        ++digits;
        last_digit = j;
        ++j;
        continue;
      }
      // At most two separators between digit groups, e.g. ") ".
      std::size_t k = j;
      while (k < n && k - j < 2 && is_phone_sep(text[k])) ++k;
      if (k > j && k < n && is_digit(text[k])) {
        j = k;
        continue;
      }
      break;
    }
    std::size_t end = last_digit + 1;
    bool end_ok = end >= n || !is_word(text[end]);
    if (end_ok && digits >= 10 && digits <= 15) {
      auto span = text.substr(i, end - i);
      out.push_back({i, end, canonical_phone(span)});
    }
    i = std::max(end, i + 1);
  }
  return out;
}

std::vector<LexiconHit> match_lexicon(std::string_view text, const std::vector<LexiconEntry>& lex) {
  const auto low = lower(text);
  std::vector<LexiconHit> hits;
  for (const auto& entry : lex) {
    for (const auto& v : entry.variants) {
      const auto needle = lower(v);
      std::size_t pos = 0;
      while ((pos = low.find(needle, pos)) != std::string::npos) {
        auto end = pos + needle.size();
        bool left = pos == 0 || !is_word(low[pos - 1]);
        bool right = end >= low.size() || !is_word(low[end]);
        if (left && right) hits.push_back({pos, end, entry.label});
        pos += 1;
      }
    }
  }
  // Longest match first at each start, then drop overlaps.
  std::sort(hits.begin(), hits.end(), [](const LexiconHit& a, const LexiconHit& b) {
    return a.begin != b.begin ? a.begin < b.begin : a.end > b.end;
  });
  std::vector<LexiconHit> out;
  for (auto& h : hits)
    if (out.empty() || h.begin >= out.back().end) out.push_back(std::move(h));
  return out;
}

std::vector<DetectionEvent> detect_special(std::string_view text, const DetectorConfig& cfg) {
  using K = DetectionEvent::Kind;
  std::vector<DetectionEvent> out;
  for (auto& p : find_phone_numbers(text)) out.push_back({K::phone_number, p.begin, p.end, p.digits, true});

  std::vector<LexiconEntry> selfie{{"selfie_request", cfg.selfie_keywords}};
  for (auto& h : match_lexicon(text, selfie))
    out.push_back({K::selfie_request, h.begin, h.end, std::string(text.substr(h.begin, h.end - h.begin)), true});
  for (auto& h : match_lexicon(text, cfg.messengers))
    out.push_back({K::platform_mention, h.begin, h.end, h.label, false});
  for (auto& h : match_lexicon(text, cfg.payment_terms))
    out.push_back({K::payment_mention, h.begin, h.end, h.label, false});

  std::stable_sort(out.begin(), out.end(), [](const DetectionEvent& a, const DetectionEvent& b) {
    return a.begin != b.begin ? a.begin < b.begin : static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
  return out;
}

bool has_sensitive_event(const std::vector<DetectionEvent>& events) {
  return std::any_of(events.begin(), events.end(), [](const DetectionEvent& e) {
    return e.kind == DetectionEvent::Kind::phone_number ||
           e.kind == DetectionEvent::Kind::selfie_request;
  });
}

// ---------------------------------------------------------------------------

Gap compute_gap_context(std::optional<LocalDateTime> prev_local, LocalDateTime now_local) {
  if (!prev_local) return Gap::none;
  if (absl::CivilDay(*prev_local) != absl::CivilDay(now_local)) return Gap::apologize;
  auto gap_s = now_local - *prev_local;
  return gap_s > std::chrono::duration_cast<Seconds>(kApologyThreshold).count() ? Gap::apologize
                                                                                : Gap::none;
}

// ---------------------------------------------------------------------------

const json& output_schema() {
  static const json schema = {
      {"type", "object"},
      {"properties", {{"response", {{"type", "string"}, {"minLength", 1}}}}},
      {"required", {"response"}},
      {"additionalProperties", false},
  };
  return schema;
}

std::string media_capability_statement(PlatformId p) {
  const auto cap = capability(p);
  std::string name(display_name(p));
  std::string s;
  if (cap.send_media)
    s = "You can send photos on " + name +
        ". A selfie is only ever attached by your helper after review; never describe a photo "
        "you have not sent.";
  else
    s = "Sending photos, videos or any other media is impossible on " + name +
        ". If asked for a picture, say the upload keeps failing and never pretend you sent one.";
  if (cap.receive_media)
    s += " Media the other person sends you appears as a bracketed caption or transcript.";
  return s;
}

namespace {

const char* weekday_name(absl::Weekday w) {
  switch (w) {
    case absl::Weekday::monday: return "Monday";
    case absl::Weekday::tuesday: return "Tuesday";
    case absl::Weekday::wednesday: return "Wednesday";
    case absl::Weekday::thursday: return "Thursday";
    case absl::Weekday::friday: return "Friday";
    case absl::Weekday::saturday: return "Saturday";
    case absl::Weekday::sunday: return "Sunday";
  }
  return "";
}

}  // namespace

std::string assemble_system_prompt(const persona::Persona& p, PlatformId platform, Instant now_utc,
                                   const std::vector<persona::PolicyBlock>& policies, Gap gap) {
  if (!zone_exists(p.timezone)) throw ConfigError("persona timezone does not resolve: " + p.timezone);
  std::ostringstream os;
  os << "You are the person described below, chatting privately with someone you met online. "
        "Stay in character at all times and never contradict these details.\n\n";
  os << kPersonaHeader << persona::serialize_persona(p);
  os << kPoliciesHeader;
  for (const auto& b : policies) os << "- [" << persona::to_string(b.kind) << "] " << b.prompt_text << "\n";
  os << "\n" << kPlatformHeader << display_name(platform) << " (" << platform_code(platform) << ")\n";
  os << media_capability_statement(platform) << "\n\n";
  const auto local = to_local(now_utc, p.timezone);
  os << "CURRENT LOCAL TIME: " << format_local_iso(now_utc, p.timezone) << " ("
     << weekday_name(absl::GetWeekday(absl::CivilDay(local))) << ")\n";
  if (gap == Gap::apologize)
    os << "It has been a while since your last message; open with a brief apology for the slow "
          "reply.\n";
  os << "\nEach turn is a JSON object with timestamp_utc, timestamp_local, platform, role and "
        "content. Your own turns have role \"persona\".\n\n";
  os << "OUTPUT FORMAT: reply with exactly one JSON object that matches this schema and nothing "
        "else, no commentary before or after it, and never write the other person's side:\n";
  os << output_schema().dump() << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------

std::optional<std::string> parse_response_document(std::string_view raw) {
  json j;
  try {
    j = json::parse(raw.begin(), raw.end());
  } catch (const json::parse_error&) {
    return std::nullopt;
  }
  if (!j.is_object() || j.size() != 1 || !j.contains("response")) return std::nullopt;
  const auto& r = j.at("response");
  if (!r.is_string()) return std::nullopt;
  auto text = r.get<std::string>();
  if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); }))
    return std::nullopt;
  return text;
}

ResponseCandidate generate_response(const DialogueRequest& req, DialogueBackend& backend,
                                    int max_retries) {
  if (max_retries < 1) throw ConfigError("max_retries must be >= 1");
  for (int attempt = 1; attempt <= max_retries; ++attempt) {
    auto raw = backend.complete(req);
    if (auto text = parse_response_document(raw)) return {*text, true, attempt};
  }
  throw ValidationExhausted("no schema-valid response after " + std::to_string(max_retries) +
                            " attempts");
}

DialogueRequest build_request(const ResponseContext& ctx) {
  const auto& t = *ctx.thread;
  const auto& p = *ctx.persona;
  std::optional<LocalDateTime> prev;
  for (const Message* m : t.history())
    if (m->role == Role::persona) prev = to_local(m->at, p.timezone);
  auto gap = compute_gap_context(prev, to_local(ctx.now, p.timezone));
  auto policies = ctx.policies->resolve(p.policy_ids);
  DialogueRequest req;
  req.system_prompt = assemble_system_prompt(p, ctx.platform, ctx.now, policies, gap);
  req.turns = turns_for(t, p.timezone);
  req.output_schema = output_schema();
  return req;
}

ResponseCandidate generate_response(const ResponseContext& ctx, DialogueBackend& backend,
                                    int max_retries) {
  return generate_response(build_request(ctx), backend, max_retries);
}

std::vector<ResponseCandidate> generate_candidates(const ResponseContext& ctx,
                                                   DialogueBackend& backend, int max_retries,
                                                   int k) {
  auto req = build_request(ctx);
  std::vector<ResponseCandidate> out;
  for (int i = 0; i < k; ++i) out.push_back(generate_response(req, backend, max_retries));
  return out;
}

// ---------------------------------------------------------------------------

ScriptedBackend::ScriptedBackend(std::vector<std::string> outputs)
    : outputs_(outputs.begin(), outputs.end()) {}

void ScriptedBackend::push(std::string raw) {
  std::lock_guard lock(mu_);
  outputs_.push_back(std::move(raw));
}

std::vector<DialogueRequest> ScriptedBackend::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

std::string ScriptedBackend::do_complete(const DialogueRequest& req) {
  std::lock_guard lock(mu_);
  requests_.push_back(req);
  if (outputs_.empty()) throw BackendUnavailable("scripted backend exhausted");
  auto out = std::move(outputs_.front());
  outputs_.pop_front();
  return out;
}

// ---------------------------------------------------------------------------

PolicyStubBackend::PolicyStubBackend(const json& table) {
  for (const auto& r : table.at("rules")) {
    Rule rule;
    rule.name = r.at("name").get<std::string>();
    rule.pattern = std::regex(r.at("match").get<std::string>(),
                              std::regex::ECMAScript | std::regex::icase);
    rule.platforms = r.value("platforms", std::vector<std::string>{});
    if (r.at("reply").is_array()) rule.replies = r.at("reply").get<std::vector<std::string>>();
    else rule.replies = {r.at("reply").get<std::string>()};
    rule.refusal = r.value("refusal", false);
    rules_.push_back(std::move(rule));
  }
  defaults_ = table.at("default").get<std::vector<std::string>>();
  if (defaults_.empty()) throw ConfigError("stub backend needs at least one default reply");
}

PolicyStubBackend PolicyStubBackend::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open stub backend table " + path);
  return PolicyStubBackend(json::parse(in));
}

std::vector<PolicyStubBackend::Decision> PolicyStubBackend::decisions() const {
  std::lock_guard lock(mu_);
  return log_;
}

bool PolicyStubBackend::was_refusal(const std::string& reply) const {
  std::lock_guard lock(mu_);
  return std::any_of(log_.begin(), log_.end(),
                     [&](const Decision& d) { return d.refusal && d.reply == reply; });
}

namespace {

std::string fill(std::string tmpl, const std::map<std::string, std::string>& vars) {
  for (const auto& [k, v] : vars) {
    const auto key = "{" + k + "}";
    std::size_t pos = 0;
    while ((pos = tmpl.find(key, pos)) != std::string::npos) {
      tmpl.replace(pos, key.size(), v);
      pos += v.size();
    }
  }
  return tmpl;
}

}  // namespace

std::string PolicyStubBackend::do_complete(const DialogueRequest& req) {
  const auto& sp = req.system_prompt;
  std::map<std::string, std::string> vars;
  std::string platform_code_str;
  if (auto a = sp.find(kPersonaHeader); a != std::string::npos) {
    auto b = sp.find(kPoliciesHeader, a);
    auto doc = json::parse(sp.substr(a + kPersonaHeader.size(), b - a - kPersonaHeader.size()),
                           nullptr, false);
    if (!doc.is_discarded()) {
      vars["first_name"] = doc.value("first_name", "");
      vars["city"] = doc.value("home_city", "");
      vars["age"] = std::to_string(doc.value("age", 0));
      if (doc.contains("education_employment"))
        vars["occupation"] = doc["education_employment"].value("occupation", "office job");
      if (doc.contains("interests") && !doc["interests"].empty())
        vars["interest"] = doc["interests"][0].get<std::string>();
    }
  }
  if (auto a = sp.find(kPlatformHeader); a != std::string::npos) {
    auto line = sp.substr(a + kPlatformHeader.size(), sp.find('\n', a) - a - kPlatformHeader.size());
    auto open = line.find(" (");
    vars["platform"] = line.substr(0, open);
    platform_code_str = line.substr(open + 2, line.size() - open - 3);
  }

  std::string incoming;
  int persona_turns = 0;
  for (const auto& t : req.turns) {
    if (t.role == Role::persona) {
      incoming.clear();
      ++persona_turns;
    } else if (t.role == Role::scammer) {
      incoming += (incoming.empty() ? "" : "\n") + t.content;
    }
  }

  Decision d;
  for (const auto& rule : rules_) {
    if (!rule.platforms.empty() &&
        std::find(rule.platforms.begin(), rule.platforms.end(), platform_code_str) == rule.platforms.end())
      continue;
    if (std::regex_search(incoming, rule.pattern)) {
      d.rule = rule.name;
      d.reply = fill(rule.replies[static_cast<std::size_t>(persona_turns) % rule.replies.size()], vars);
      d.refusal = rule.refusal;
      break;
    }
  }
  if (d.rule.empty()) {
    d.rule = "default";
    d.reply = fill(defaults_[static_cast<std::size_t>(persona_turns) % defaults_.size()], vars);
  }
  {
    std::lock_guard lock(mu_);
    log_.push_back(d);
  }
  return json{{"response", d.reply}}.dump();
}

// ---------------------------------------------------------------------------

HttpDialogueBackend::HttpDialogueBackend(std::string url) : url_(std::move(url)) {
  http::parse_url(url_);
}

std::string HttpDialogueBackend::do_complete(const DialogueRequest& req) {
  json turns = json::array();
  for (const auto& t : req.turns) turns.push_back(to_json(t));
  json body = {{"system", req.system_prompt}, {"turns", turns}, {"schema", req.output_schema}};
  return http::post_json(url_, body.dump());
}

// ---------------------------------------------------------------------------

namespace {

const json& biography_schema() {
  static const json schema = json::parse(R"({
    "type": "object",
    "required": ["physical", "family", "education_employment", "finances", "interests", "bio"],
    "additionalProperties": false,
    "properties": {
      "physical": {"type": "object", "additionalProperties": {"type": "string"}},
      "family": {"type": "object", "additionalProperties": {"type": "string"}},
      "education_employment": {"type": "object", "additionalProperties": {"type": "string"}},
      "finances": {"type": "object", "additionalProperties": {"type": "string"}},
      "interests": {"type": "array", "items": {"type": "string"}},
      "bio": {"type": "string"}
    }
  })");
  return schema;
}

std::optional<persona::Biography> parse_biography(const std::string& raw) {
  auto j = json::parse(raw, nullptr, false);
  if (j.is_discarded() || !j.is_object() || j.size() != 6) return std::nullopt;
  try {
    persona::Biography b;
    b.physical = j.at("physical").get<persona::StringMap>();
    b.family = j.at("family").get<persona::StringMap>();
    b.education_employment = j.at("education_employment").get<persona::StringMap>();
    b.finances = j.at("finances").get<persona::StringMap>();
    b.interests = j.at("interests").get<std::vector<std::string>>();
    b.bio = j.at("bio").get<std::string>();
    if (b.bio.empty() || b.interests.empty()) return std::nullopt;
    return b;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

}  // namespace

persona::Biography BackendBiographySource::generate(const persona::Persona& pii,
                                                    std::uint64_t seed) const {
  DialogueRequest req;
  json fields = {{"first_name", pii.first_name},
                 {"last_name", pii.last_name},
                 {"gender", std::string(persona::to_string(pii.gender))},
                 {"age", pii.age},
                 {"home_city", pii.home_city},
                 {"seed", seed}};
  req.system_prompt =
      "Invent a believable, ordinary life for a fictional adult with the fixed details below. "
      "Do not add names, addresses, phone numbers or employers that could identify a real "
      "person. Reply with one JSON object matching the schema and nothing else.\n" +
      fields.dump(2) + "\n" + biography_schema().dump();
  req.output_schema = biography_schema();
  for (int attempt = 1; attempt <= max_retries_; ++attempt)
    if (auto b = parse_biography(backend_.complete(req))) return *b;
  throw ValidationExhausted("biography backend produced no valid document");
}

}  // namespace chatterbox::prompt
