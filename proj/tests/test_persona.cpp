#include "support.hpp"

#include <chatterbox/errors.hpp>
#include <chatterbox/persona.hpp>
#include <chatterbox/prompt.hpp>

#include <gtest/gtest.h>

#include <set>

using namespace chatterbox;
using namespace chatterbox::persona;

namespace {

std::vector<Persona> cohort(std::uint64_t first_seed = 1) {
  auto pools = NamePools::defaults();
  auto quota = Quota::paper_cohort();
  TemplateBiographySource bio;
  std::vector<Persona> out;
  for (std::uint64_t s = first_seed; s < first_seed + 37; ++s) out.push_back(generate_persona(s, pools, quota, bio));
  return out;
}

}  // namespace

TEST(Persona, CohortMatchesAgeGenderTable) {
  auto ps = cohort();
  std::map<std::pair<Gender, int>, int> cells;
  int male = 0, female = 0;
  for (const auto& p : ps) {
    ++cells[{p.gender, (p.age / 10) * 10}];
    (p.gender == Gender::male ? male : female)++;
  }
  EXPECT_EQ(male, 17);
  EXPECT_EQ(female, 20);
  EXPECT_EQ(ps.size(), 37u);
  EXPECT_EQ(cells[std::make_pair(Gender::male, 50)] + cells[std::make_pair(Gender::female, 50)], 12);
  EXPECT_EQ(cells[std::make_pair(Gender::male, 30)], 3);
  EXPECT_EQ(cells[std::make_pair(Gender::female, 30)], 6);
  EXPECT_EQ(cells[std::make_pair(Gender::male, 40)], 4);
  EXPECT_EQ(cells[std::make_pair(Gender::female, 40)], 3);
  EXPECT_EQ(cells[std::make_pair(Gender::male, 60)], 3);
  EXPECT_EQ(cells[std::make_pair(Gender::female, 60)], 4);
  EXPECT_EQ(cells[std::make_pair(Gender::male, 70)], 0);
  EXPECT_EQ(cells[std::make_pair(Gender::female, 70)], 2);
}

TEST(Persona, EveryGeneratedPersonaValidates) {
  auto pools = NamePools::defaults();
  auto policies = PolicyLibrary::defaults();
  ValidationContext ctx{&pools, &policies, absl::CivilDay(2025, 7, 7)};
  std::set<std::string> ids;
  for (const auto& p : cohort()) {
    EXPECT_TRUE(validate_persona(p, ctx).empty()) << p.persona_id;
    EXPECT_TRUE(ids.insert(p.persona_id).second);
    EXPECT_TRUE(pools.has_first_name(p.first_name));
    EXPECT_GE(p.age, kMinAge);
    EXPECT_LE(p.age, kMaxAge);
    EXPECT_EQ(p.age, age_on(p.date_of_birth, absl::CivilDay(2025, 7, 7)));
    EXPECT_EQ(p.selfie_assets.size(), kSelfiesPerPersona);
    EXPECT_TRUE(zone_exists(p.timezone));
    ASSERT_NE(pools.city(p.home_city), nullptr);
    EXPECT_EQ(pools.city(p.home_city)->timezone, p.timezone);
  }
}

TEST(Persona, SharedFirstNamesIncludeGenderNeutralNames) {
  auto pools = NamePools::defaults();
  EXPECT_TRUE(pools.has_first_name("Alex"));
  EXPECT_TRUE(pools.has_first_name("Casey"));
}

TEST(Persona, GenerationIsDeterministic) {
  EXPECT_EQ(cohort(), cohort());
  EXPECT_NE(cohort(1).front(), cohort(2).front());
}

TEST(Persona, QuotaExhaustionAndEmptyPools) {
  auto pools = NamePools::defaults();
  auto quota = Quota::paper_cohort();
  TemplateBiographySource bio;
  for (int i = 0; i < 37; ++i) generate_persona(static_cast<std::uint64_t>(i), pools, quota, bio);
  EXPECT_TRUE(quota.exhausted());
  EXPECT_THROW(generate_persona(99, pools, quota, bio), QuotaExhausted);

  auto empty = pools;
  empty.shared_first_names.clear();
  auto q2 = Quota::uniform(1);
  EXPECT_THROW(generate_persona(1, empty, q2, bio), ConfigError);
}

TEST(Persona, SerializationRoundTrip) {
  for (const auto& p : cohort()) {
    auto doc = serialize_persona(p);
    EXPECT_EQ(deserialize_persona(doc), p);
    EXPECT_EQ(serialize_persona(deserialize_persona(doc)), doc);
  }
}

TEST(Persona, ParseErrorsNameTheField) {
  auto j = to_json(cohort().front());
  j["gender"] = "robot";
  try {
    persona_from_json(j);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("gender"), std::string::npos);
  }
  auto k = to_json(cohort().front());
  k.erase("timezone");
  EXPECT_THROW(persona_from_json(k), ParseError);
}

TEST(Persona, SaveAndLoadDirectory) {
  auto dir = testsupport::temp_dir("personas");
  auto ps = cohort();
  for (const auto& p : ps) save_persona(dir, p);
  auto loaded = load_personas(dir);
  ASSERT_EQ(loaded.size(), ps.size());
  std::map<std::string, Persona> by_id;
  for (const auto& p : ps) by_id[p.persona_id] = p;
  for (const auto& p : loaded) EXPECT_EQ(p, by_id.at(p.persona_id));
  std::filesystem::remove_all(dir);
}

TEST(Persona, ValidationCatchesBrokenInvariants) {
  auto pools = NamePools::defaults();
  auto policies = PolicyLibrary::defaults();
  ValidationContext ctx{&pools, &policies, absl::CivilDay(2025, 7, 7)};
  auto p = cohort().front();
  p.selfie_assets.pop_back();
  EXPECT_FALSE(validate_persona(p, ctx).empty());
  p = cohort().front();
  p.timezone = "Mars/Olympus";
  EXPECT_FALSE(validate_persona(p, ctx).empty());
  p = cohort().front();
  p.first_name = "Bartholomew";
  EXPECT_FALSE(validate_persona(p, ctx).empty());
  p = cohort().front();
  p.policy_ids.push_back("no-such-policy");
  EXPECT_FALSE(validate_persona(p, ctx).empty());
}

TEST(Persona, PolicyLibraryCoversEveryKind) {
  auto lib = PolicyLibrary::defaults();
  std::set<PolicyKind> kinds;
  for (const auto& id : lib.ids()) kinds.insert(lib.find(id)->kind);
  EXPECT_EQ(kinds.size(), 9u);
  EXPECT_THROW(lib.resolve({"missing"}), ConfigError);
  EXPECT_EQ(PolicyLibrary::from_json(lib.to_json()).ids(), lib.ids());
}

TEST(Persona, TemplateBiographyHasNoPhoneNumbers) {
  for (const auto& p : cohort()) {
    EXPECT_TRUE(prompt::find_phone_numbers(p.bio).empty()) << p.bio;
    for (const auto& s : p.interests) EXPECT_TRUE(prompt::find_phone_numbers(s).empty());
  }
}
