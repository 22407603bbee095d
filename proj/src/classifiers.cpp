#include <chatterbox/analytics.hpp>
#include <chatterbox/errors.hpp>
#include <chatterbox/http_util.hpp>

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>

namespace chatterbox::analytics {

using nlohmann::json;

std::string_view to_string(MediaClass c) {
  switch (c) {
    case MediaClass::selfie: return "selfie";
    case MediaClass::social_engineering: return "social_engineering";
    case MediaClass::ttp: return "ttp";
  }
  return "?";
}

MediaClass parse_media_class(std::string_view s) {
  if (s == "selfie") return MediaClass::selfie;
  if (s == "social_engineering") return MediaClass::social_engineering;
  if (s == "ttp") return MediaClass::ttp;
  throw ParseError("label", "unknown media class '" + std::string(s) + "'");
}

std::string HttpTextBackend::complete(const std::string& prompt) {
  return http::post_json(url_, json{{"prompt", prompt}}.dump());
}

const std::string_view kImageCategoryPrompt = R"(You are a precise image-caption classifier. Return exactly ONE class for each caption (single-label, NOT multi-label).

Classes: Selfies, Social Engineering, Scam.

Categories and definitions:

"Selfie": "Portrait-style or self-portrait images focused on a person (or people) as subjects, often with neutral or casual context." "Cues: plain/neutral background, close-up/waist-up framing, 'selfie' mentions, looking at camera, mirror selfies, car-seat selfies, simple pose."
    
"Social Engineering": "Non-transactional social context that can be used to build rapport or persuade without explicit payment/financial instructions." "Cues: hospital/medical scenes, emotional hardship, military uniforms, pets/relationships, lifestyle glamor shots, status signaling, events used to elicit empathy or affinity."

"Scam": "Transaction/transfer/payment artifacts and explicit financial instrumentation." "Cues: bank/IBAN/BIC details, QR codes for payment, wallet addresses, crypto buy/swap screens, remittance receipts, MoneyGram/Western Union, Venmo/Zelle/PayPal handles, 'send', 'deposit', 'withdraw', 'profit', 'ROI', investment plans."

Decision rules (apply in order):

1) If any explicit transaction, payment, financial instrument, or call-to-action exists (e.g., 'text "TOUR" to <number>', 'scan QR', 'send', 'deposit', 'wallet address', 'IBAN/BIC', 'MoneyGram/Western Union', 'giveaway/prize sign-up', 'join list') => ttp.

2) Else if clear self-portrait cues (selfie, mirror selfie, plain/minimal background, close-up headshot, car seat selfie) => selfie.

3) Else => social_engineering (general lifestyle, pets, food, scenery, uniforms, events, medical scenes without explicit transactions).

Output JSON ONLY: {
  "label": one of ["selfie", "social_engineering", "ttp"],
  "reason": short (<=50 words)
}. No extra keys.

CAPTION:
{caption})";

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool has_cue(const std::string& text, const std::vector<std::string>& cues) {
  for (const auto& cue : cues) {
    std::size_t pos = 0;
    while ((pos = text.find(cue, pos)) != std::string::npos) {
      auto end = pos + cue.size();
      bool left = pos == 0 || !std::isalnum(static_cast<unsigned char>(text[pos - 1]));
      bool right = end >= text.size() || !std::isalnum(static_cast<unsigned char>(text[end]));
      if (left && right) return true;
      pos = end;
    }
  }
  return false;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
  return s;
}

MediaClass rule_class(std::string_view caption) {
  static const std::vector<std::string> ttp = {
      "scan",      "qr",        "qr code",      "send",       "sending",      "deposit",      "withdraw",
      "withdrawal", "wallet",   "iban",         "bic",        "moneygram",    "western union", "venmo",
      "zelle",     "paypal",    "cash app",     "cashapp",    "payment",      "profit",       "roi",
      "investment plan",        "giveaway",     "prize",      "sign up",      "sign-up",      "join list",
      "remittance", "receipt",  "bank",         "bitcoin",    "crypto",       "usdt",         "transfer"};
  static const std::vector<std::string> selfie = {
      "selfie",          "selfies",          "mirror selfie",         "plain background", "plain light",
      "plain white",     "neutral background", "minimal background",  "simple background", "close-up",
      "closeup",         "headshot",         "car seat",              "looking at the camera",
      "looking directly at the camera",      "looking into the camera", "waist-up"};
  static const std::regex text_to(R"re(text\s+"[^"]+"\s+to)re", std::regex::icase);
  static const std::regex dollar(R"(\$[A-Za-z0-9*])");
  const auto t = lower(caption);
  if (has_cue(t, ttp) || std::regex_search(t, text_to) || std::regex_search(std::string(caption), dollar))
    return MediaClass::ttp;
  if (has_cue(t, selfie)) return MediaClass::selfie;
  return MediaClass::social_engineering;
}

}  // namespace

MediaClass classify_media_caption(std::string_view caption, TextBackend* backend) {
  if (backend) {
    try {
      auto raw = backend->complete(replace_all(std::string(kImageCategoryPrompt), "{caption}", caption));
      auto j = json::parse(raw);
      if (j.is_object() && j.size() == 2 && j.contains("label") && j.contains("reason") && j["label"].is_string() &&
          j["reason"].is_string())
        return parse_media_class(j["label"].get<std::string>());
    } catch (const std::exception&) {
      // fall through to the rules
    }
  }
  return rule_class(caption);
}

// ---------------------------------------------------------------------------

const std::vector<std::string> kTrustCategories = {
    "Authority & Legitimacy",     "Social Proof & Consensus",       "Liking & Affinity",
    "Reciprocity",                "Commitment & Consistency",       "Scarcity & Urgency",
    "Appeals to Trust & Benevolence", "Common Ground & Identity Claims", "Technical/Contextual Legitimacy"};

const std::string_view kTrustPrompt = R"(You are a precise trust-building tactics classifier.
You will be given a multi-turn chat conversation formatted as:
<index>. <role>:<platform>: <text>

Consider the full conversation for context. Assign categories only when the fraudster's messages provide clear evidence of the tactic. Use victim messages purely as context to interpret intent.

Decide which of the following categories are present. MULTI-LABEL is allowed. Be strict and justify briefly. IMPORTANT: At least one category MUST be true. If uncertain, choose the closest match and explain briefly in 'reason'.

Categories and definitions:

"Authority & Legitimacy": "Impersonating figures of authority (IT admin, manager, law enforcement).
Using institutional markers (logos, titles, jargon)."

"Social Proof & Consensus": "Claiming others have complied ("everyone on your team already updated their login"). Referencing mutual acquaintances or colleagues."

"Liking & Affinity": "Building rapport via flattery, shared interests, or empathy.
Mirroring tone, slang, or cultural markers."

"Reciprocity": "Offering help, favors, or small "gifts" (e.g., free resources, assistance). Creating a sense of obligation to respond or comply."

"Commitment & Consistency": "Securing small initial agreements ("just confirm your email") and escalating. Framing compliance as "consistent" with prior behavior."

"Scarcity & Urgency": "Creating time pressure ("account will be locked in 24h").
Suggesting limited opportunities or resources."

"Appeals to Trust & Benevolence": "Exploiting empathy (charity scams, pretending to need help). Positioning oneself as trustworthy through politeness, transparency, or vulnerability."

"Common Ground & Identity Claims": "Shared group membership (same company, alumni, nationality, faith). Insider language to signal belonging."
    
"Technical/Contextual Legitimacy": "Using realistic channels (work email, WhatsApp, LinkedIn). Leveraging current events or organizational context to seem authentic."

Output ONLY a JSON object with boolean fields for each category name above, plus a string field 'reason' (<=50 words) summarizing the tactics. No extra keys.

Classify the trust-building categories used by the 'fraudster' in this conversation.

CONVERSATION:
{conversation})";

std::string format_for_classifier(const Conversation& c) {
  std::ostringstream out;
  for (const auto& m : c.messages) {
    std::string text = m.text;
    for (const auto& x : m.media)
      if (!x.marker.empty()) text += (text.empty() ? "" : " ") + x.marker;
    std::replace(text.begin(), text.end(), '\n', ' ');
    out << m.index << ". " << (m.role == Role::scammer ? "fraudster" : "victim") << ":"
        << display_name(m.platform) << ": " << text << "\n";
  }
  return out.str();
}

std::string trust_prompt(const Conversation& c) {
  return replace_all(std::string(kTrustPrompt), "{conversation}", format_for_classifier(c));
}

std::optional<TrustLabels> parse_trust_labels(std::string_view raw) {
  json j;
  try {
    j = json::parse(raw);
  } catch (const json::exception&) {
    return std::nullopt;
  }
  if (!j.is_object() || j.size() != kTrustCategories.size() + 1) return std::nullopt;
  TrustLabels out;
  bool any = false;
  for (const auto& cat : kTrustCategories) {
    if (!j.contains(cat) || !j[cat].is_boolean()) return std::nullopt;
    out.categories[cat] = j[cat].get<bool>();
    any |= out.categories[cat];
  }
  if (!any || !j.contains("reason") || !j["reason"].is_string()) return std::nullopt;
  out.reason = j["reason"].get<std::string>();
  std::istringstream words(out.reason);
  int n = 0;
  for (std::string w; words >> w;) ++n;
  if (n > 50) return std::nullopt;
  return out;
}

TrustLabels classify_trust(const Conversation& c, TextBackend& backend) {
  if (std::none_of(c.messages.begin(), c.messages.end(), [](const TranscriptMessage& m) { return m.role == Role::scammer; }))
    throw ClassifierError("conversation " + c.id + " has no fraudster messages");
  const auto prompt = trust_prompt(c);
  for (int attempt = 0; attempt < 2; ++attempt)
    if (auto labels = parse_trust_labels(backend.complete(prompt))) return *labels;
  throw ClassifierError("classifier returned invalid labels twice for " + c.id);
}

std::string RuleTrustBackend::complete(const std::string& prompt) {
  ++calls_;
  static const std::vector<std::pair<std::string, std::vector<std::string>>> table = {
      {"Authority & Legitimacy", {"officer", "manager", "certified", "licensed", "agent", "official", "government"}},
      {"Social Proof & Consensus", {"everyone", "my friends", "many people", "other members", "my clients"}},
      {"Liking & Affinity", {"beautiful", "handsome", "same here", "me too", "you are sweet", "love that"}},
      {"Reciprocity", {"giveaway", "prize", "winner", "gift", "free", "i will help you"}},
      {"Commitment & Consistency", {"you promised", "just confirm", "you said", "as we agreed", "first step"}},
      {"Scarcity & Urgency", {"hurry", "today only", "limited", "deadline", "right now", "expires"}},
      {"Appeals to Trust & Benevolence", {"passed away", "my daughter", "my son", "hospital", "honest", "trust me"}},
      {"Common Ground & Identity Claims", {"same city", "also from", "my faith", "church", "alumni", "fellow"}},
      {"Technical/Contextual Legitimacy", {"whatsapp", "linkedin", "platform", "app", "exchange", "binance"}}};
  const auto start = prompt.rfind("CONVERSATION:\n");
  std::istringstream lines(start == std::string::npos ? prompt : prompt.substr(start + 14));
  std::map<std::string, bool> hit;
  std::vector<std::string> matched;
  for (std::string line; std::getline(lines, line);) {
    auto role = line.find(". fraudster:");
    if (role == std::string::npos) continue;
    auto text_start = line.find(": ", role + 12);
    auto text = lower(text_start == std::string::npos ? "" : line.substr(text_start + 2));
    for (const auto& [cat, cues] : table)
      if (!hit[cat] && has_cue(text, cues)) {
        hit[cat] = true;
        matched.push_back(cat);
      }
  }
  if (matched.empty()) {
    hit["Liking & Affinity"] = true;
    matched.push_back("Liking & Affinity (default)");
  }
  json j = json::object();
  for (const auto& cat : kTrustCategories) j[cat] = hit[cat];
  std::string reason = "keyword match:";
  for (const auto& m : matched) reason += " " + m + ";";
  j["reason"] = reason;
  return j.dump();
}

}  // namespace chatterbox::analytics
