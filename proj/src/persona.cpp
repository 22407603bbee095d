#include <chatterbox/errors.hpp>
#include <chatterbox/persona.hpp>
#include <chatterbox/time.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace chatterbox::persona {

using nlohmann::json;

namespace {

constexpr std::array kGenderNames{"male", "female"};
constexpr std::array kPolicyKindNames{
    "platform_migration", "payment",         "temporal",
    "selfie",             "linguistic_texture", "personality",
    "emotional_regulation", "romantic_optionality", "interests",
};

template <typename T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
  return v[d(rng)];
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string format_day(absl::CivilDay d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04lld-%02d-%02d", static_cast<long long>(d.year()), d.month(),
                d.day());
  return buf;
}

absl::CivilDay parse_day(const std::string& s, const std::string& field) {
  int y = 0, m = 0, d = 0;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2d%c", &y, &m, &d, &tail) != 3)
    throw ParseError(field, "expected YYYY-MM-DD");
  absl::CivilDay day(y, m, d);
  if (day.year() != y || day.month() != m || day.day() != d)
    throw ParseError(field, "invalid calendar date");
  return day;
}

}  // namespace

std::string_view to_string(Gender g) { return kGenderNames[static_cast<std::size_t>(g)]; }

Gender parse_gender(std::string_view s) {
  for (std::size_t i = 0; i < kGenderNames.size(); ++i)
    if (s == kGenderNames[i]) return static_cast<Gender>(i);
  throw ParseError("gender", "unknown value '" + std::string(s) + "'");
}

std::string_view to_string(PolicyKind k) { return kPolicyKindNames[static_cast<std::size_t>(k)]; }

PolicyKind parse_policy_kind(std::string_view s) {
  for (std::size_t i = 0; i < kPolicyKindNames.size(); ++i)
    if (s == kPolicyKindNames[i]) return static_cast<PolicyKind>(i);
  throw ParseError("kind", "unknown policy kind '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// PolicyLibrary

void PolicyLibrary::add(PolicyBlock block) {
  if (block.prompt_text.empty())
    throw ConfigError("policy " + block.policy_id + ": prompt_text must be non-empty");
  auto id = block.policy_id;
  blocks_[id] = std::move(block);
}

const PolicyBlock* PolicyLibrary::find(const std::string& id) const {
  auto it = blocks_.find(id);
  return it == blocks_.end() ? nullptr : &it->second;
}

std::vector<PolicyBlock> PolicyLibrary::resolve(const std::vector<std::string>& ids) const {
  std::vector<PolicyBlock> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const auto* b = find(id);
    if (!b) throw ConfigError("unknown policy id '" + id + "'");
    out.push_back(*b);
  }
  return out;
}

std::vector<std::string> PolicyLibrary::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : blocks_) out.push_back(id);
  return out;
}

PolicyLibrary PolicyLibrary::from_json(const json& j) {
  PolicyLibrary lib;
  if (!j.is_array()) throw ParseError("policies", "expected array");
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    auto path = "policies[" + std::to_string(i) + "]";
    try {
      lib.add({e.at("policy_id").get<std::string>(),
               parse_policy_kind(e.at("kind").get<std::string>()),
               e.at("prompt_text").get<std::string>(), e.value("trigger_note", std::string{})});
    } catch (const json::exception& ex) {
      throw ParseError(path, ex.what());
    }
  }
  return lib;
}

json PolicyLibrary::to_json() const {
  json arr = json::array();
  for (const auto& [id, b] : blocks_) {
    arr.push_back({{"policy_id", id},
                   {"kind", std::string(persona::to_string(b.kind))},
                   {"prompt_text", b.prompt_text},
                   {"trigger_note", b.trigger_note}});
  }
  return arr;
}

// ---------------------------------------------------------------------------
// Pools and quota

const City* NamePools::city(const std::string& name) const {
  for (const auto& c : cities)
    if (c.name == name) return &c;
  return nullptr;
}

bool NamePools::has_first_name(const std::string& name) const {
  return std::find(shared_first_names.begin(), shared_first_names.end(), name) !=
         shared_first_names.end();
}

bool NamePools::has_last_name(const std::string& name) const {
  return std::find(last_names.begin(), last_names.end(), name) != last_names.end();
}

void Quota::set(Gender g, int age_lo, int age_hi, int count) {
  if (age_lo > age_hi || count < 0) throw ConfigError("invalid quota cell");
  cells_[{g, age_lo, age_hi}] = count;
}

int Quota::remaining(const QuotaCell& cell) const {
  auto it = cells_.find(cell);
  return it == cells_.end() ? 0 : it->second;
}

int Quota::total_remaining() const {
  int n = 0;
  for (const auto& [_, c] : cells_) n += c;
  return n;
}

QuotaCell Quota::draw(std::uint64_t r) const {
  auto total = total_remaining();
  if (total == 0) throw QuotaExhausted("persona quota exhausted");
  auto target = static_cast<int>(r % static_cast<std::uint64_t>(total));
  for (const auto& [cell, count] : cells_) {
    if (target < count) return cell;
    target -= count;
  }
  throw QuotaExhausted("persona quota exhausted");
}

void Quota::take(const QuotaCell& cell) {
  auto it = cells_.find(cell);
  if (it == cells_.end() || it->second == 0) throw QuotaExhausted("quota cell exhausted");
  --it->second;
}

Quota Quota::paper_cohort() {
  Quota q;
  const std::array<std::array<int, 3>, 5> rows{{
      {30, 3, 6}, {40, 4, 3}, {50, 7, 5}, {60, 3, 4}, {70, 0, 2},
  }};
  for (const auto& [lo, male, female] : rows) {
    q.set(Gender::male, lo, lo + 9, male);
    q.set(Gender::female, lo, lo + 9, female);
  }
  return q;
}

Quota Quota::uniform(int per_cell) {
  Quota q;
  for (int lo = kMinAge; lo <= kMaxAge; lo += 10) {
    q.set(Gender::male, lo, lo + 9, per_cell);
    q.set(Gender::female, lo, lo + 9, per_cell);
  }
  return q;
}

// ---------------------------------------------------------------------------
// Generation

int age_on(absl::CivilDay dob, absl::CivilDay as_of) {
  int years = static_cast<int>(as_of.year() - dob.year());
  if (std::pair(as_of.month(), as_of.day()) < std::pair(dob.month(), dob.day())) --years;
  return years;
}

TemplateBiographySource::TemplateBiographySource(json tables) : tables_(std::move(tables)) {}

Biography TemplateBiographySource::generate(const Persona& pii, std::uint64_t seed) const {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  auto fill = [&](const char* section) {
    StringMap out;
    for (const auto& [key, options] : tables_.at(section).items())
      out[key] = pick(options.get<std::vector<std::string>>(), rng);
    return out;
  };
  Biography b;
  b.physical = fill("physical");
  b.family = fill("family");
  b.education_employment = fill("education_employment");
  b.finances = fill("finances");
  auto pool = tables_.at("interests").get<std::vector<std::string>>();
  std::shuffle(pool.begin(), pool.end(), rng);
  b.interests.assign(pool.begin(), pool.begin() + std::min<std::size_t>(4, pool.size()));
  std::sort(b.interests.begin(), b.interests.end());
  b.bio = b.education_employment["occupation"] + " in " + pii.home_city + ". Into " +
          b.interests.front() + " and " + b.interests.back() + ".";
  b.bio[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(b.bio[0])));
  return b;
}

Persona generate_persona(std::uint64_t seed, const NamePools& pools, Quota& quota,
                         const BiographySource& bio, const GenerationOptions& opts) {
  if (pools.shared_first_names.empty()) throw ConfigError("shared first-name pool is empty");
  if (pools.last_names.empty()) throw ConfigError("surname pool is empty");
  if (pools.cities.empty()) throw ConfigError("city pool is empty");
  if (pools.email_domains.empty()) throw ConfigError("email domain pool is empty");

  std::mt19937_64 rng(seed);
  const QuotaCell cell = quota.draw(rng());

  Persona p;
  p.persona_id = "persona-" + std::to_string(seed);
  p.gender = cell.gender;
  p.age = std::uniform_int_distribution<int>(cell.age_lo, cell.age_hi)(rng);
  // Latest birthday giving `age` on as_of, minus up to a year.
  const absl::CivilDay latest(opts.as_of.year() - p.age, opts.as_of.month(), opts.as_of.day());
  const absl::CivilDay earliest =
      absl::CivilDay(opts.as_of.year() - p.age - 1, opts.as_of.month(), opts.as_of.day()) + 1;
  p.date_of_birth = latest - std::uniform_int_distribution<long>(0, latest - earliest)(rng);
  p.first_name = pick(pools.shared_first_names, rng);
  p.last_name = pick(pools.last_names, rng);
  const City& city = pick(pools.cities, rng);
  p.home_city = city.name;
  p.timezone = city.timezone;
  char suffix[8];
  std::snprintf(suffix, sizeof suffix, "%02d", std::uniform_int_distribution<int>(10, 99)(rng));
  p.email = lower(p.first_name) + "." + lower(p.last_name) + suffix + "@" +
            pick(pools.email_domains, rng);
  // 555-01xx is reserved for fictional use.
  char phone[32];
  std::snprintf(phone, sizeof phone, "+1-%s-555-01%02d", city.area_code.c_str(),
                std::uniform_int_distribution<int>(0, 99)(rng));
  p.phone = phone;

  auto b = bio.generate(p, rng());
  p.physical = std::move(b.physical);
  p.family = std::move(b.family);
  p.education_employment = std::move(b.education_employment);
  p.finances = std::move(b.finances);
  p.interests = std::move(b.interests);
  p.bio = std::move(b.bio);

  for (std::size_t i = 1; i <= kSelfiesPerPersona; ++i)
    p.selfie_assets.push_back(opts.asset_root + "/" + p.persona_id + "/selfie-" +
                              std::to_string(i) + ".jpg");
  p.policy_ids = opts.policy_ids;

  quota.take(cell);
  return p;
}

// ---------------------------------------------------------------------------
// Validation

std::vector<std::string> validate_persona(const Persona& p, const ValidationContext& ctx) {
  std::vector<std::string> v;
  if (p.persona_id.empty()) v.push_back("persona_id empty");
  if (ctx.pools) {
    if (!ctx.pools->has_first_name(p.first_name)) v.push_back("first_name not in shared-name set");
    if (!ctx.pools->has_last_name(p.last_name)) v.push_back("last_name not in surname list");
    const City* c = ctx.pools->city(p.home_city);
    if (!c) {
      v.push_back("home_city not in city list");
    } else if (c->timezone != p.timezone) {
      v.push_back("timezone does not match home_city");
    }
  }
  if (p.age < kMinAge || p.age > kMaxAge) v.push_back("age outside [30, 79]");
  if (ctx.as_of && age_on(p.date_of_birth, *ctx.as_of) != p.age)
    v.push_back("age does not match date_of_birth");
  if (!zone_exists(p.timezone)) v.push_back("timezone does not resolve");
  if (p.selfie_assets.size() != kSelfiesPerPersona) v.push_back("selfie_assets length ≠ 4");
  if (p.email.find('@') == std::string::npos) v.push_back("email malformed");
  if (ctx.policies) {
    std::set<PolicyKind> kinds;
    for (const auto& id : p.policy_ids) {
      const auto* b = ctx.policies->find(id);
      if (!b) {
        v.push_back("unknown policy_id " + id);
      } else if (!kinds.insert(b->kind).second) {
        v.push_back("policy kind " + std::string(to_string(b->kind)) + " attached more than once");
      }
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Serialization

json to_json(const Persona& p) {
  json j = {
      {"persona_id", p.persona_id},
      {"first_name", p.first_name},
      {"last_name", p.last_name},
      {"gender", std::string(to_string(p.gender))},
      {"date_of_birth", format_day(p.date_of_birth)},
      {"age", p.age},
      {"home_city", p.home_city},
      {"timezone", p.timezone},
      {"email", p.email},
      {"physical", p.physical},
      {"family", p.family},
      {"education_employment", p.education_employment},
      {"finances", p.finances},
      {"interests", p.interests},
      {"bio", p.bio},
      {"selfie_assets", p.selfie_assets},
      {"policy_ids", p.policy_ids},
  };
  if (p.phone) j["phone"] = *p.phone;
  return j;
}

namespace {

const std::set<std::string>& known_fields() {
  static const std::set<std::string> f{
      "persona_id", "first_name", "last_name", "gender",  "date_of_birth", "age",
      "home_city",  "timezone",   "email",     "phone",   "physical",      "family",
      "education_employment", "finances", "interests", "bio", "selfie_assets", "policy_ids"};
  return f;
}

const json& field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw ParseError(name, "missing");
  return *it;
}

std::string str_field(const json& j, const char* name) {
  const auto& v = field(j, name);
  if (!v.is_string()) throw ParseError(name, "expected string");
  return v.get<std::string>();
}

StringMap map_field(const json& j, const char* name) {
  const auto& v = field(j, name);
  if (!v.is_object()) throw ParseError(name, "expected object");
  StringMap out;
  for (const auto& [k, val] : v.items()) {
    if (!val.is_string()) throw ParseError(std::string(name) + "." + k, "expected string");
    out[k] = val.get<std::string>();
  }
  return out;
}

std::vector<std::string> list_field(const json& j, const char* name) {
  const auto& v = field(j, name);
  if (!v.is_array()) throw ParseError(name, "expected array");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string())
      throw ParseError(std::string(name) + "[" + std::to_string(i) + "]", "expected string");
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

}  // namespace

Persona persona_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("$", "expected object");
  for (const auto& [k, _] : j.items())
    if (!known_fields().count(k)) throw ParseError(k, "unknown field");
  Persona p;
  p.persona_id = str_field(j, "persona_id");
  p.first_name = str_field(j, "first_name");
  p.last_name = str_field(j, "last_name");
  try {
    p.gender = parse_gender(str_field(j, "gender"));
  } catch (const ParseError& e) {
    if (e.field() == "gender") throw;
    throw ParseError("gender", e.what());
  }
  p.date_of_birth = parse_day(str_field(j, "date_of_birth"), "date_of_birth");
  const auto& age = field(j, "age");
  if (!age.is_number_integer()) throw ParseError("age", "expected integer");
  p.age = age.get<int>();
  p.home_city = str_field(j, "home_city");
  p.timezone = str_field(j, "timezone");
  p.email = str_field(j, "email");
  if (j.contains("phone")) p.phone = str_field(j, "phone");
  p.physical = map_field(j, "physical");
  p.family = map_field(j, "family");
  p.education_employment = map_field(j, "education_employment");
  p.finances = map_field(j, "finances");
  p.interests = list_field(j, "interests");
  p.bio = str_field(j, "bio");
  p.selfie_assets = list_field(j, "selfie_assets");
  p.policy_ids = list_field(j, "policy_ids");
  return p;
}

std::string serialize_persona(const Persona& p) { return to_json(p).dump(2) + "\n"; }

Persona deserialize_persona(std::string_view doc) {
  json j;
  try {
    j = json::parse(doc);
  } catch (const json::parse_error& e) {
    throw ParseError("$", e.what());
  }
  return persona_from_json(j);
}

std::vector<Persona> load_personas(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw ConfigError("personas_dir '" + dir.string() + "' is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<Persona> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      out.push_back(deserialize_persona(ss.str()));
    } catch (const ParseError& e) {
      throw ParseError(f.filename().string() + ":" + e.field(), e.what());
    }
  }
  return out;
}

void save_persona(const std::filesystem::path& dir, const Persona& p) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / (p.persona_id + ".json"), std::ios::binary);
  out << serialize_persona(p);
}

}  // namespace chatterbox::persona
