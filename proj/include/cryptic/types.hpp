#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "cryptic/time.hpp"

namespace cryptic {

using IndividualId = std::uint64_t;
using CityId = std::uint64_t;
using ProvinceId = std::uint64_t;
using AddressId = std::uint64_t;

enum class Gender : std::uint8_t { kMale, kFemale };
enum class Education : std::uint8_t { kCollegeOrLower, kBachelor, kPostgraduate };
enum class Occupation : std::uint8_t {
  kHospitalStaff,
  kEducationResearch,
  kWhiteCollar,
  kGovernment,
  kBlueCollar,
  kAgriForestryHusbandryFishery,
  kIndividualOperationService,
};
enum class AddressKind : std::uint8_t { kHome, kSchoolDorm, kCompany };

inline constexpr std::array<std::string_view, 2> kGenderNames{"male", "female"};
inline constexpr std::array<std::string_view, 3> kEducationNames{"college_or_lower", "bachelor",
                                                                 "postgraduate"};
inline constexpr std::array<std::string_view, 7> kOccupationNames{
    "hospital_staff", "education_research", "white_collar", "government", "blue_collar",
    "agri_forestry_husbandry_fishery", "individual_operation_service"};
inline constexpr std::array<std::string_view, 3> kAddressKindNames{"home", "school_dorm",
                                                                   "company"};

template <typename Enum, std::size_t N>
std::optional<Enum> parse_enum(std::string_view text, const std::array<std::string_view, N>& names) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == text) {
      return static_cast<Enum>(i);
    }
  }
  return std::nullopt;
}

inline std::string_view to_string(Gender v) { return kGenderNames[static_cast<std::size_t>(v)]; }
inline std::string_view to_string(Education v) {
  return kEducationNames[static_cast<std::size_t>(v)];
}
inline std::string_view to_string(Occupation v) {
  return kOccupationNames[static_cast<std::size_t>(v)];
}
inline std::string_view to_string(AddressKind v) {
  return kAddressKindNames[static_cast<std::size_t>(v)];
}

inline constexpr int kMinPurchasingPower = 1;
inline constexpr int kMaxPurchasingPower = 7;

struct Individual {
  IndividualId id = 0;
  Gender gender = Gender::kMale;
  int age = 0;
  Education education = Education::kBachelor;
  Occupation occupation = Occupation::kWhiteCollar;
  int purchasing_power = 1;
  bool has_child = false;
  bool married = false;
  CityId home_city = 0;
  bool qualified = false;

  bool operator==(const Individual&) const = default;
};

/// Age brackets used by the alternative regression encoding.
enum class AgeBracket : std::uint8_t { kUnder18, k18To24, k25To49, k50Plus };
inline constexpr std::array<std::string_view, 4> kAgeBracketNames{"lt18", "18_24", "25_49",
                                                                  "ge50"};

inline AgeBracket age_bracket(int age) {
  if (age < 18) return AgeBracket::kUnder18;
  if (age <= 24) return AgeBracket::k18To24;
  if (age <= 49) return AgeBracket::k25To49;
  return AgeBracket::k50Plus;
}

struct Region {
  CityId city_id = 0;
  ProvinceId province_id = 0;
  std::string name;
  double distance_to_epicenter = 0.0;  // km
  double gdp = 0.0;
  std::vector<std::int64_t> daily_confirmed_cases;
  double cultural_tightness = 0.0;
  double paddy_rice_pct = 0.0;
  double innovation_index = 0.0;
  double illiteracy_pct = 0.0;
  double multi_ethnic_household_pct = 0.0;
  std::int64_t population_count = 1;

  bool operator==(const Region&) const = default;
};

struct QueryEvent {
  IndividualId individual_id = 0;
  Timestamp timestamp = 0;
  std::string query_text;

  bool operator==(const QueryEvent&) const = default;
};

struct PurchaseEvent {
  IndividualId individual_id = 0;
  Timestamp timestamp = 0;
  std::string category;
  bool is_ppe = false;

  bool operator==(const PurchaseEvent&) const = default;
};

struct AddressRecord {
  IndividualId individual_id = 0;
  AddressId address_id = 0;
  AddressKind kind = AddressKind::kHome;
  Timestamp start = 0;
  Timestamp end = 0;

  bool operator==(const AddressRecord&) const = default;
};

/// Query and purchase streams, each kept sorted by (individual_id, timestamp).
struct EventLog {
  std::vector<QueryEvent> queries;
  std::vector<PurchaseEvent> purchases;

  std::size_t size() const { return queries.size() + purchases.size(); }
  bool operator==(const EventLog&) const = default;
};

enum class EventType : std::uint8_t { kQuery, kPurchase };

/// Reference into one of the two streams of an EventLog.
struct EventRef {
  EventType type;
  std::size_t index;
};

inline bool query_less(const QueryEvent& a, const QueryEvent& b) {
  return std::tie(a.individual_id, a.timestamp, a.query_text) <
         std::tie(b.individual_id, b.timestamp, b.query_text);
}

inline bool purchase_less(const PurchaseEvent& a, const PurchaseEvent& b) {
  return std::tie(a.individual_id, a.timestamp, a.category, a.is_ppe) <
         std::tie(b.individual_id, b.timestamp, b.category, b.is_ppe);
}

inline bool address_less(const AddressRecord& a, const AddressRecord& b) {
  return std::tie(a.individual_id, a.address_id, a.kind, a.start, a.end) <
         std::tie(b.individual_id, b.address_id, b.kind, b.start, b.end);
}

inline void sort_canonical(EventLog& log) {
  std::sort(log.queries.begin(), log.queries.end(), query_less);
  std::sort(log.purchases.begin(), log.purchases.end(), purchase_less);
}

/// Global chronological view; ties broken by stream then per-individual order.
inline std::vector<EventRef> chronological_order(const EventLog& log) {
  std::vector<EventRef> refs;
  refs.reserve(log.size());
  for (std::size_t i = 0; i < log.queries.size(); ++i) refs.push_back({EventType::kQuery, i});
  for (std::size_t i = 0; i < log.purchases.size(); ++i) {
    refs.push_back({EventType::kPurchase, i});
  }
  auto ts = [&](const EventRef& r) {
    return r.type == EventType::kQuery ? log.queries[r.index].timestamp
                                       : log.purchases[r.index].timestamp;
  };
  std::stable_sort(refs.begin(), refs.end(),
                   [&](const EventRef& a, const EventRef& b) { return ts(a) < ts(b); });
  return refs;
}

struct Dataset {
  std::vector<Individual> individuals;  // sorted by id
  std::vector<Region> regions;          // sorted by city_id
  std::vector<AddressRecord> addresses;
  EventLog events;
  Calendar calendar;

  /// Dense index of an individual id, or nullopt.
  std::optional<std::size_t> index_of(IndividualId id) const {
    auto it = std::lower_bound(individuals.begin(), individuals.end(), id,
                               [](const Individual& ind, IndividualId v) { return ind.id < v; });
    if (it == individuals.end() || it->id != id) return std::nullopt;
    return static_cast<std::size_t>(it - individuals.begin());
  }

  const Region* region(CityId city) const {
    auto it = std::lower_bound(regions.begin(), regions.end(), city,
                               [](const Region& r, CityId v) { return r.city_id < v; });
    if (it == regions.end() || it->city_id != city) return nullptr;
    return &*it;
  }

  std::vector<IndividualId> ids() const {
    std::vector<IndividualId> out;
    out.reserve(individuals.size());
    for (const auto& ind : individuals) out.push_back(ind.id);
    return out;
  }

  void sort_canonical() {
    std::sort(individuals.begin(), individuals.end(),
              [](const Individual& a, const Individual& b) { return a.id < b.id; });
    std::sort(regions.begin(), regions.end(),
              [](const Region& a, const Region& b) { return a.city_id < b.city_id; });
    std::sort(addresses.begin(), addresses.end(), address_less);
    cryptic::sort_canonical(events);
  }

  bool operator==(const Dataset&) const = default;
};

}  // namespace cryptic
