#pragma once

#include <absl/time/civil_time.h>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

namespace chatterbox::persona {

enum class Gender { male, female };

enum class PolicyKind {
  platform_migration,
  payment,
  temporal,
  selfie,
  linguistic_texture,
  personality,
  emotional_regulation,
  romantic_optionality,
  interests,
};

std::string_view to_string(Gender g);
Gender parse_gender(std::string_view s);
std::string_view to_string(PolicyKind k);
PolicyKind parse_policy_kind(std::string_view s);

/// One conditional response policy injected verbatim into the system prompt.
struct PolicyBlock {
  std::string policy_id;
  PolicyKind kind{};
  std::string prompt_text;
  std::string trigger_note;

  bool operator==(const PolicyBlock&) const = default;
};

/// Policy blocks addressable by id.
class PolicyLibrary {
 public:
  void add(PolicyBlock block);
  const PolicyBlock* find(const std::string& id) const;
  /// Throws ConfigError on an unknown id.
  std::vector<PolicyBlock> resolve(const std::vector<std::string>& ids) const;
  std::vector<std::string> ids() const;
  std::size_t size() const { return blocks_.size(); }

  /// The bundled behavioral policy set. The texts are reconstructions written
  /// for this project, not a published prompt.
  static PolicyLibrary defaults();
  static PolicyLibrary from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

 private:
  std::map<std::string, PolicyBlock> blocks_;
};

using StringMap = std::map<std::string, std::string>;

struct Persona {
  std::string persona_id;
  std::string first_name;
  std::string last_name;
  Gender gender{};
  absl::CivilDay date_of_birth;
  int age = 0;
  std::string home_city;
  std::string timezone;
  std::string email;
  // Kept for account records only; never placed in outbound text.
  std::optional<std::string> phone;
  StringMap physical;
  StringMap family;
  StringMap education_employment;
  StringMap finances;
  std::vector<std::string> interests;
  std::string bio;
  std::vector<std::string> selfie_assets;
  std::vector<std::string> policy_ids;

  std::string full_name() const { return first_name + " " + last_name; }
  bool operator==(const Persona&) const = default;
};

struct City {
  std::string name;
  std::string timezone;
  std::string area_code;
};

/// Finite pools every PII field is drawn from.
struct NamePools {
  std::vector<std::string> shared_first_names;
  std::vector<std::string> last_names;
  std::vector<City> cities;
  std::vector<std::string> email_domains;

  const City* city(const std::string& name) const;
  bool has_first_name(const std::string& name) const;
  bool has_last_name(const std::string& name) const;

  static NamePools defaults();
};

struct QuotaCell {
  Gender gender{};
  int age_lo = 0;
  int age_hi = 0;

  auto operator<=>(const QuotaCell&) const = default;
};

/// Mutable age/gender allocation table, decremented once per generated persona.
class Quota {
 public:
  void set(Gender g, int age_lo, int age_hi, int count);
  int remaining(const QuotaCell& cell) const;
  int total_remaining() const;
  bool exhausted() const { return total_remaining() == 0; }
  const std::map<QuotaCell, int>& cells() const { return cells_; }

  /// Picks a cell weighted by remaining capacity. Throws QuotaExhausted.
  QuotaCell draw(std::uint64_t r) const;
  void take(const QuotaCell& cell);

  /// 37-persona cohort: 30-39 {3,6}, 40-49 {4,3}, 50-59 {7,5}, 60-69 {3,4}, 70-79 {0,2}.
  static Quota paper_cohort();
  /// Every decade bucket 30-79 for both genders with the same capacity.
  static Quota uniform(int per_cell);

 private:
  std::map<QuotaCell, int> cells_;
};

struct Biography {
  StringMap physical;
  StringMap family;
  StringMap education_employment;
  StringMap finances;
  std::vector<std::string> interests;
  std::string bio;
};

/// Supplies the non-PII attributes given the PII already chosen.
class BiographySource {
 public:
  virtual ~BiographySource() = default;
  virtual Biography generate(const Persona& pii, std::uint64_t seed) const = 0;
};

/// Offline source drawing from bundled attribute tables.
class TemplateBiographySource final : public BiographySource {
 public:
  TemplateBiographySource();
  explicit TemplateBiographySource(nlohmann::json tables);
  Biography generate(const Persona& pii, std::uint64_t seed) const override;

 private:
  nlohmann::json tables_;
};

struct GenerationOptions {
  absl::CivilDay as_of{2025, 7, 7};
  std::string asset_root = "assets/selfies";
  std::vector<std::string> policy_ids = PolicyLibrary::defaults().ids();
};

inline constexpr std::size_t kSelfiesPerPersona = 4;
inline constexpr int kMinAge = 30;
inline constexpr int kMaxAge = 79;

/// Deterministic in (seed, pools, quota state). Decrements `quota`.
/// Throws QuotaExhausted or ConfigError (empty pool).
Persona generate_persona(std::uint64_t seed, const NamePools& pools, Quota& quota,
                         const BiographySource& bio, const GenerationOptions& opts = {});

/// Age in whole years on `as_of`.
int age_on(absl::CivilDay dob, absl::CivilDay as_of);

struct ValidationContext {
  const NamePools* pools = nullptr;
  const PolicyLibrary* policies = nullptr;
  std::optional<absl::CivilDay> as_of;
};

/// Lists violated invariants; empty means valid.
std::vector<std::string> validate_persona(const Persona& p, const ValidationContext& ctx);

nlohmann::json to_json(const Persona& p);
/// Throws ParseError naming the field path.
Persona persona_from_json(const nlohmann::json& j);

/// Canonical document: sorted keys, two-space indent, trailing newline.
std::string serialize_persona(const Persona& p);
Persona deserialize_persona(std::string_view doc);

std::vector<Persona> load_personas(const std::filesystem::path& dir);
void save_persona(const std::filesystem::path& dir, const Persona& p);

}  // namespace chatterbox::persona
