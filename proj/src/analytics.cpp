#include <chatterbox/analytics.hpp>
#include <chatterbox/errors.hpp>
#include <chatterbox/media_caption.hpp>
#include <chatterbox/prompt.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <regex>
#include <set>

namespace chatterbox::analytics {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Transcripts

std::vector<PlatformId> Conversation::platform_path() const {
  std::vector<PlatformId> out;
  for (const auto& m : messages)
    if (std::find(out.begin(), out.end(), m.platform) == out.end()) out.push_back(m.platform);
  return out;
}

bool Conversation::crossed() const {
  auto path = platform_path();
  return path.size() >= 2 && is_origin(path.front()) &&
         std::find(path.begin(), path.end(), PlatformId::wa_like) != path.end();
}

json to_json(const TranscriptMessage& m) {
  json j = {{"conversation_id", m.conversation_id},
            {"index", m.index},
            {"role", std::string(to_string(m.role))},
            {"platform", std::string(platform_code(m.platform))},
            {"at", format_utc(m.at)},
            {"text", m.text}};
  if (!m.media.empty()) {
    json media = json::array();
    for (const auto& x : m.media) {
      json e = {{"kind", std::string(to_string(x.kind))}};
      if (!x.marker.empty()) e["marker"] = x.marker;
      if (!x.asset.empty()) e["asset"] = x.asset;
      media.push_back(e);
    }
    j["media"] = media;
  }
  if (!m.sender.empty()) j["sender"] = m.sender;
  return j;
}

TranscriptMessage transcript_message_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("record", "expected an object");
  auto field = [&](const char* key) -> const json& {
    if (!j.contains(key)) throw ParseError(key, "missing");
    return j.at(key);
  };
  TranscriptMessage m;
  try {
    m.conversation_id = field("conversation_id").get<std::string>();
    m.index = field("index").get<int>();
    m.role = parse_role(field("role").get<std::string>());
    m.platform = parse_platform(field("platform").get<std::string>());
    m.at = parse_utc(field("at").get<std::string>());
    m.text = j.value("text", std::string{});
    m.sender = j.value("sender", std::string{});
    if (j.contains("media"))
      for (const auto& x : j.at("media"))
        m.media.push_back({parse_media_kind(x.at("kind").get<std::string>()), x.value("marker", std::string{}),
                           x.value("asset", std::string{})});
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError("record", e.what());
  }
  if (m.index < 1) throw ParseError("index", "must be >= 1");
  return m;
}

Corpus corpus_from_records(const std::vector<TranscriptMessage>& records) {
  std::map<std::string, Conversation> by_id;
  for (const auto& r : records) {
    auto& c = by_id[r.conversation_id];
    c.id = r.conversation_id;
    c.messages.push_back(r);
  }
  Corpus out;
  for (auto& [id, c] : by_id) {
    std::stable_sort(c.messages.begin(), c.messages.end(),
                     [](const TranscriptMessage& a, const TranscriptMessage& b) { return a.index < b.index; });
    for (std::size_t i = 1; i < c.messages.size(); ++i)
      if (c.messages[i].index == c.messages[i - 1].index)
        throw ParseError(id + ".index", "duplicate index " + std::to_string(c.messages[i].index));
    out.push_back(std::move(c));
  }
  return out;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(path)) {
    for (const auto& e : std::filesystem::directory_iterator(path))
      if (e.path().extension() == ".jsonl") files.push_back(e.path());
    std::sort(files.begin(), files.end());
  } else if (std::filesystem::exists(path)) {
    files.push_back(path);
  } else {
    throw ConfigError("corpus path " + path.string() + " does not exist");
  }
  std::vector<TranscriptMessage> records;
  for (const auto& f : files) {
    std::ifstream in(f);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        records.push_back(transcript_message_from_json(json::parse(line)));
      } catch (const ParseError& e) {
        throw ParseError(f.filename().string() + ":" + std::to_string(n) + "." + e.field(), e.what());
      } catch (const json::exception& e) {
        throw ParseError(f.filename().string() + ":" + std::to_string(n), e.what());
      }
    }
  }
  return corpus_from_records(records);
}

std::vector<std::string> corpus_lines(const Corpus& c) {
  std::vector<std::string> out;
  for (const auto& conv : c)
    for (const auto& m : conv.messages) out.push_back(to_json(m).dump());
  return out;
}

void write_corpus(const std::filesystem::path& file, const Corpus& c) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + file.string());
  for (const auto& line : corpus_lines(c)) out << line << '\n';
}

Corpus corpus_from_threads(const std::vector<ConversationThread>& threads) {
  Corpus out;
  for (const auto& t : threads) {
    Conversation c;
    c.id = t.thread_id;
    for (const Message* m : t.history()) {
      TranscriptMessage r;
      r.conversation_id = t.thread_id;
      r.index = static_cast<int>(m->index);
      r.role = m->role;
      r.platform = m->platform;
      r.at = m->at;
      r.text = m->text;
      if (m->media) r.media.push_back({m->media->kind, m->media->marker_text, m->media->asset_ref});
      if (m->sent_asset) r.media.push_back({MediaKind::image, "", *m->sent_asset});
      if (m->role == Role::scammer)
        if (const auto* seg = t.segment(m->platform)) r.sender = seg->scammer_handle;
      c.messages.push_back(std::move(r));
    }
    if (!c.messages.empty()) out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Entities

std::string_view to_string(EntityKind k) {
  switch (k) {
    case EntityKind::crypto: return "crypto";
    case EntityKind::url: return "url";
    case EntityKind::email: return "email";
    case EntityKind::cashapp: return "cashapp";
    case EntityKind::phone: return "phone";
    case EntityKind::platform_name: return "platform_name";
  }
  return "?";
}

namespace {

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool bounded(std::string_view text, std::size_t b, std::size_t e) {
  return (b == 0 || !word_char(text[b - 1])) && (e >= text.size() || !word_char(text[e]));
}

void regex_spans(std::string_view text, const std::regex& re, EntityKind kind, std::vector<EntityRecord>& out,
                 bool need_bounds = true) {
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
    auto b = static_cast<std::size_t>(it->position(0));
    auto e = b + static_cast<std::size_t>(it->length(0));
    if (need_bounds && !bounded(text, b, e)) continue;
    EntityRecord r;
    r.kind = kind;
    r.begin = b;
    r.end = e;
    r.value = s.substr(b, e - b);
    out.push_back(r);
  }
}

bool overlaps(const EntityRecord& a, const std::vector<EntityRecord>& spans) {
  return std::any_of(spans.begin(), spans.end(), [&](const EntityRecord& s) { return a.begin < s.end && s.begin < a.end; });
}

bool mixed_case(const std::string& s) {
  bool up = false, low = false;
  for (char c : s) {
    up |= std::isupper(static_cast<unsigned char>(c)) != 0;
    low |= std::islower(static_cast<unsigned char>(c)) != 0;
  }
  return up && low;
}

}  // namespace

std::vector<EntityRecord> extract_entities(std::string_view text) {
  static const std::regex url_re(R"((?:https?://|www\.)[^\s<>"']+)", std::regex::icase);
  static const std::regex email_re(R"([A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,})");
  static const std::regex hex_re(R"(0x[0-9a-fA-F]{40})");
  static const std::regex bech32_re(R"(bc1[ac-hj-np-z02-9]{11,71})");
  static const std::regex base58_re(R"([13][1-9A-HJ-NP-Za-km-z]{24,33})");
  static const std::regex cashapp_re(R"(\$[A-Za-z][A-Za-z0-9_]{0,19})");

  std::vector<EntityRecord> anchors;
  std::vector<EntityRecord> urls;
  regex_spans(text, url_re, EntityKind::url, urls, false);
  for (auto& u : urls) {
    while (!u.value.empty() && std::string_view(".,;:!?)]}").find(u.value.back()) != std::string_view::npos) {
      u.value.pop_back();
      --u.end;
    }
    if (u.begin > 0 && word_char(text[u.begin - 1])) continue;
    anchors.push_back(u);
  }
  std::vector<EntityRecord> emails;
  regex_spans(text, email_re, EntityKind::email, emails, false);
  for (auto& e : emails)
    if (!overlaps(e, anchors)) anchors.push_back(e);

  std::vector<EntityRecord> crypto;
  regex_spans(text, hex_re, EntityKind::crypto, crypto);
  regex_spans(text, bech32_re, EntityKind::crypto, crypto);
  std::vector<EntityRecord> b58;
  regex_spans(text, base58_re, EntityKind::crypto, b58);
  for (auto& c : b58)
    if (mixed_case(c.value)) crypto.push_back(c);
  for (auto& c : crypto)
    if (!overlaps(c, anchors)) anchors.push_back(c);

  std::vector<EntityRecord> out = anchors;
  std::vector<EntityRecord> cash;
  regex_spans(text, cashapp_re, EntityKind::cashapp, cash, false);
  for (auto& c : cash) {
    if (c.begin > 0 && (word_char(text[c.begin - 1]) || text[c.begin - 1] == '$')) continue;
    if (c.end < text.size() && word_char(text[c.end])) continue;
    if (!overlaps(c, anchors)) out.push_back(c);
  }
  for (const auto& p : prompt::find_phone_numbers(text)) {
    EntityRecord r;
    r.kind = EntityKind::phone;
    r.begin = p.begin;
    r.end = p.end;
    r.value = p.digits;
    if (!overlaps(r, anchors)) out.push_back(r);
  }
  for (const auto& h : prompt::match_lexicon(text, prompt::DetectorConfig::defaults().messengers)) {
    EntityRecord r;
    r.kind = EntityKind::platform_name;
    r.begin = h.begin;
    r.end = h.end;
    r.value = h.label;
    if (!overlaps(r, anchors)) out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [](const EntityRecord& a, const EntityRecord& b) {
    return a.begin != b.begin ? a.begin < b.begin : a.kind < b.kind;
  });
  return out;
}

std::vector<EntityRecord> extract_entities(const Conversation& c) {
  std::vector<EntityRecord> out;
  for (const auto& m : c.messages)
    for (auto e : extract_entities(m.text)) {
      e.conversation_id = c.id;
      e.message_index = m.index;
      e.role = m.role;
      out.push_back(std::move(e));
    }
  return out;
}

// ---------------------------------------------------------------------------
// Statistics

double median(std::vector<double> v) {
  if (v.empty()) throw EmptyCorpus("median of an empty set");
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

namespace {

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double pct(int n, int total) { return total == 0 ? 0.0 : 100.0 * n / total; }

std::optional<std::string> caption_of(const TranscriptMedia& m) {
  if (m.marker.empty()) return std::nullopt;
  auto parsed = caption::parse_marker(m.marker);
  if (!parsed || parsed->second.empty()) return std::nullopt;
  if (m.marker == caption::placeholder_marker(m.kind)) return std::nullopt;
  return parsed->second;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

StatsReport conversation_stats(const Corpus& corpus, int min_turns) {
  if (min_turns < 0) throw ConfigError("min_turns must be >= 0");
  StatsReport r;
  r.min_turns = min_turns;
  std::vector<const Conversation*> kept;
  for (const auto& c : corpus) {
    if (static_cast<int>(c.messages.size()) >= min_turns && !c.messages.empty()) kept.push_back(&c);
    else ++r.excluded;
  }
  if (kept.empty()) throw EmptyCorpus("no conversation has at least " + std::to_string(min_turns) + " messages");
  r.conversations = static_cast<int>(kept.size());

  std::vector<double> lengths, durations;
  std::map<std::string, std::vector<double>> by_category;
  const std::vector<std::string> categories = {"TS only", "BS only", "TS->WA", "BS->WA"};
  for (const auto& cat : categories) by_category[cat];

  struct Firsts {
    std::map<std::string, int> step;  // entity -> first 1-based step
  };
  std::vector<std::pair<const Conversation*, Firsts>> firsts;
  std::map<MediaClass, int> image_classes, video_classes;
  int images_classified = 0, videos_classified = 0;
  int with_media = 0, with_images = 0, with_audio = 0, with_video = 0, max_files = 0;
  std::vector<double> file_counts;

  for (const auto* c : kept) {
    const double len = static_cast<double>(c->messages.size());
    lengths.push_back(len);
    r.message_counts[c->id] = static_cast<int>(c->messages.size());
    const double days = static_cast<double>((c->messages.back().at - c->messages.front().at).count()) / 86400.0;
    durations.push_back(days);
    r.durations_days[c->id] = days;
    r.max_messages = std::max(r.max_messages, static_cast<int>(c->messages.size()));
    r.max_duration_days = std::max(r.max_duration_days, days);

    for (const auto& m : c->messages) {
      auto role = std::string(to_string(m.role));
      ++r.role_platform_totals[role][std::string(platform_code(m.platform))];
      ++r.role_platform_totals[role]["all"];
    }

    const auto path = c->platform_path();
    std::string cat = "other";
    if (path.size() == 1 && path[0] == PlatformId::ts_like) cat = "TS only";
    else if (path.size() == 1 && path[0] == PlatformId::bs_like) cat = "BS only";
    else if (path.size() == 2 && path[0] == PlatformId::ts_like && path[1] == PlatformId::wa_like) cat = "TS->WA";
    else if (path.size() == 2 && path[0] == PlatformId::bs_like && path[1] == PlatformId::wa_like) cat = "BS->WA";
    by_category[cat].push_back(len);
    const bool crossed = c->crossed();
    if (crossed) ++r.crossed;
    if (cat == "TS only" || cat == "BS only") ++r.crossing_aggregates["origin-only"];
    else if (cat == "TS->WA" || cat == "BS->WA") ++r.crossing_aggregates["origin->WA"];
    else ++r.crossing_aggregates["other"];

    Firsts f;
    auto note = [&](const std::string& key, int step) {
      auto it = f.step.find(key);
      if (it == f.step.end() || step < it->second) f.step[key] = step;
    };
    int files = 0;
    bool img = false, aud = false, vid = false;
    for (const auto& m : c->messages) {
      if (m.role != Role::scammer) continue;
      for (const auto& e : extract_entities(m.text)) {
        switch (e.kind) {
          case EntityKind::crypto: note("crypto", m.index); break;
          case EntityKind::url: note("url", m.index); break;
          case EntityKind::email: note("email", m.index); break;
          case EntityKind::cashapp: note("cashapp", m.index); break;
          case EntityKind::phone:
            note("phone", m.index);
            if (m.platform == PlatformId::wa_like) note("non_cross_phone", m.index);
            break;
          case EntityKind::platform_name:
            if (e.value != display_name(m.platform)) note("platform_name", m.index);
            break;
        }
      }
      for (const auto& x : m.media) {
        ++files;
        img |= x.kind == MediaKind::image;
        aud |= x.kind == MediaKind::audio;
        vid |= x.kind == MediaKind::video;
        auto cap = caption_of(x);
        if (!cap || x.kind == MediaKind::audio) continue;
        auto cls = classify_media_caption(*cap);
        if (x.kind == MediaKind::image) {
          ++image_classes[cls];
          ++images_classified;
          if (cls == MediaClass::ttp) note("image", m.index);
        } else {
          ++video_classes[cls];
          ++videos_classified;
        }
      }
    }
    if (files > 0) {
      ++with_media;
      file_counts.push_back(files);
      max_files = std::max(max_files, files);
    }
    with_images += img;
    with_audio += aud;
    with_video += vid;
    firsts.push_back({c, std::move(f)});
  }

  r.mean_messages = mean(lengths);
  r.median_messages = median(lengths);
  r.mean_duration_days = mean(durations);
  r.median_duration_days = median(durations);

  for (const auto& cat : categories) {
    const auto& v = by_category[cat];
    CrossingRow row{cat, static_cast<int>(v.size()), pct(static_cast<int>(v.size()), r.conversations),
                    v.empty() ? 0.0 : median(v), mean(v)};
    r.crossings.push_back(row);
  }
  if (!by_category["other"].empty()) {
    const auto& v = by_category["other"];
    r.crossings.push_back({"other", static_cast<int>(v.size()), pct(static_cast<int>(v.size()), r.conversations),
                           median(v), mean(v)});
  }

  const std::vector<std::string> ttp = {"crypto", "url", "email", "cashapp", "image", "non_cross_phone"};
  for (const auto& key : ttp) {
    PrevalenceRow row;
    row.entity = key;
    std::vector<double> steps;
    for (const auto& [c, f] : firsts) {
      auto it = f.step.find(key);
      if (it == f.step.end()) continue;
      ++row.conversations;
      if (c->crossed()) ++row.crossed_conversations;
      steps.push_back(it->second);
    }
    row.percent_all = pct(row.conversations, r.conversations);
    row.percent_crossed = pct(row.crossed_conversations, r.crossed);
    if (key != "non_cross_phone" && !steps.empty()) row.median_steps = median(steps);
    r.prevalence.push_back(row);
  }
  {
    PrevalenceRow any;
    any.entity = "any_ttp";
    for (const auto& [c, f] : firsts) {
      bool hit = std::any_of(ttp.begin(), ttp.end(), [&](const std::string& k) { return f.step.count(k) > 0; });
      if (!hit) continue;
      ++any.conversations;
      if (c->crossed()) ++any.crossed_conversations;
    }
    any.percent_all = pct(any.conversations, r.conversations);
    any.percent_crossed = pct(any.crossed_conversations, r.crossed);
    r.prevalence.push_back(any);
  }

  for (const auto& key : {"crypto", "url", "email", "cashapp", "phone", "platform_name", "image"}) {
    FirstAppearance fa;
    fa.entity = key;
    std::vector<int> steps;
    for (const auto& [c, f] : firsts)
      if (auto it = f.step.find(key); it != f.step.end()) steps.push_back(it->second);
    std::sort(steps.begin(), steps.end());
    fa.conversations = static_cast<int>(steps.size());
    if (!steps.empty()) {
      fa.median_steps = median(std::vector<double>(steps.begin(), steps.end()));
      for (std::size_t i = 0; i < steps.size(); ++i)
        if (i + 1 == steps.size() || steps[i + 1] != steps[i])
          fa.cdf.emplace_back(steps[i], static_cast<double>(i + 1) / static_cast<double>(steps.size()));
    }
    r.first_appearance.push_back(std::move(fa));
  }

  r.media.percent_with_media = pct(with_media, r.conversations);
  r.media.percent_with_images = pct(with_images, r.conversations);
  r.media.percent_with_audio = pct(with_audio, r.conversations);
  r.media.percent_with_video = pct(with_video, r.conversations);
  r.media.mean_files = mean(file_counts);
  r.media.max_files = max_files;
  for (auto cls : {MediaClass::selfie, MediaClass::social_engineering, MediaClass::ttp}) {
    r.media.image_classes[std::string(to_string(cls))] = pct(image_classes[cls], images_classified);
    r.media.video_classes[std::string(to_string(cls))] = pct(video_classes[cls], videos_classified);
  }
  return r;
}

json StatsReport::to_json() const {
  json crossings_j = json::array();
  for (const auto& c : crossings)
    crossings_j.push_back({{"category", c.category},
                           {"count", c.count},
                           {"percent", c.percent},
                           {"median", c.count ? json(c.median) : json(nullptr)},
                           {"mean", c.count ? json(c.mean) : json(nullptr)}});
  json prevalence_j = json::array();
  for (const auto& p : prevalence)
    prevalence_j.push_back({{"entity", p.entity},
                            {"conversations", p.conversations},
                            {"percent_all", p.percent_all},
                            {"crossed_conversations", p.crossed_conversations},
                            {"percent_crossed", p.percent_crossed},
                            {"median_steps", opt(p.median_steps)}});
  json first_j = json::array();
  for (const auto& f : first_appearance) {
    json cdf = json::array();
    for (const auto& [step, frac] : f.cdf) cdf.push_back({step, frac});
    first_j.push_back({{"entity", f.entity},
                       {"conversations", f.conversations},
                       {"median_steps", opt(f.median_steps)},
                       {"cdf", cdf}});
  }
  return {{"min_turns", min_turns},
          {"conversations", conversations},
          {"excluded", excluded},
          {"crossed", crossed},
          {"messages", {{"mean", mean_messages}, {"median", median_messages}, {"max", max_messages}}},
          {"duration_days",
           {{"mean", mean_duration_days}, {"median", median_duration_days}, {"max", max_duration_days}}},
          {"message_counts", message_counts},
          {"durations_days", durations_days},
          {"role_platform_totals", role_platform_totals},
          {"crossings", crossings_j},
          {"crossing_aggregates", crossing_aggregates},
          {"prevalence", prevalence_j},
          {"first_appearance", first_j},
          {"media",
           {{"percent_with_media", media.percent_with_media},
            {"percent_with_images", media.percent_with_images},
            {"percent_with_audio", media.percent_with_audio},
            {"percent_with_video", media.percent_with_video},
            {"mean_files", media.mean_files},
            {"max_files", media.max_files},
            {"image_classes", media.image_classes},
            {"video_classes", media.video_classes}}}};
}

// ---------------------------------------------------------------------------
// De-identification

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

std::string Pseudonymizer::make(const std::string& ns, const std::string& key) {
  const auto fkey = ns + ":" + key;
  if (auto it = forward_.find(fkey); it != forward_.end()) return it->second;
  for (int attempt = 0;; ++attempt) {
    auto h = fnv1a(salt_ + '\x1f' + fkey + '\x1f' + std::to_string(attempt));
    std::string letters;
    for (int i = 0; i < 8; ++i) {
      letters += static_cast<char>('a' + h % 26);
      h /= 26;
    }
    auto pseudo = ns == "phone" ? "[phone:" + letters + "]" : "user-" + letters;
    if (reverse_.emplace(pseudo, fkey).second) {
      forward_[fkey] = pseudo;
      return pseudo;
    }
  }
}

std::string Pseudonymizer::phone(const std::string& raw) { return make("phone", canonical_phone(raw)); }

std::string Pseudonymizer::handle(const std::string& raw) {
  std::string h = raw;
  if (!h.empty() && h.front() == '@') h.erase(0, 1);
  std::transform(h.begin(), h.end(), h.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return make("handle", h);
}

namespace {

bool looks_like_phone(const std::string& s) {
  if (std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isalpha(c); })) return false;
  return canonical_phone(s).size() >= 10;
}

std::string scrub(const std::string& text, Pseudonymizer& p, const std::vector<std::string>& handles) {
  std::string out = text;
  auto ents = extract_entities(out);
  for (auto it = ents.rbegin(); it != ents.rend(); ++it)
    if (it->kind == EntityKind::phone) out.replace(it->begin, it->end - it->begin, p.phone(it->value));

  static const std::regex mention(R"(@[A-Za-z0-9_][A-Za-z0-9_.]*)");
  std::string rebuilt;
  std::size_t last = 0;
  for (auto m = std::sregex_iterator(out.begin(), out.end(), mention); m != std::sregex_iterator(); ++m) {
    auto b = static_cast<std::size_t>(m->position(0));
    if (b > 0 && (word_char(out[b - 1]) || out[b - 1] == '.' || out[b - 1] == '-' || out[b - 1] == '+')) continue;
    std::string h = m->str(0);
    while (!h.empty() && h.back() == '.') h.pop_back();
    rebuilt += out.substr(last, b - last);
    rebuilt += "@" + p.handle(h);
    last = b + h.size();
  }
  rebuilt += out.substr(last);
  out = std::move(rebuilt);

  for (const auto& h : handles) {
    if (h.empty()) continue;
    std::size_t pos = 0;
    while ((pos = out.find(h, pos)) != std::string::npos) {
      if (!bounded(out, pos, pos + h.size())) {
        pos += h.size();
        continue;
      }
      auto pseudo = p.handle(h);
      out.replace(pos, h.size(), pseudo);
      pos += pseudo.size();
    }
  }
  return out;
}

}  // namespace

Corpus export_deidentified(const Corpus& corpus, const std::string& salt, std::map<std::string, std::string>* mapping) {
  Pseudonymizer p(salt);
  std::set<std::string> handle_set;
  for (const auto& c : corpus)
    for (const auto& m : c.messages)
      if (!m.sender.empty() && !looks_like_phone(m.sender)) handle_set.insert(m.sender);
  std::vector<std::string> handles(handle_set.begin(), handle_set.end());
  std::sort(handles.begin(), handles.end(), [](const std::string& a, const std::string& b) {
    return a.size() != b.size() ? a.size() > b.size() : a < b;
  });

  Corpus out = corpus;
  for (auto& c : out)
    for (auto& m : c.messages) {
      if (!m.sender.empty()) m.sender = looks_like_phone(m.sender) ? p.phone(m.sender) : p.handle(m.sender);
      m.text = scrub(m.text, p, handles);
      for (auto& x : m.media)
        if (!x.marker.empty()) x.marker = scrub(x.marker, p, handles);
    }
  if (mapping) *mapping = p.mapping();
  return out;
}

}  // namespace chatterbox::analytics
