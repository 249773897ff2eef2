#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cryptic/error.hpp"
#include "cryptic/io.hpp"
#include "cryptic/types.hpp"

namespace cryptic {

/// Earliest admissible timestamp for historical records.
inline const Timestamp kHistoryStart = local_midnight(2010, 1, 1);

struct Violation {
  std::string rule;
  std::string detail;
  std::vector<IndividualId> ids;  // offending individual ids, when applicable
};

struct ValidationReport {
  std::size_t n_individuals = 0;
  std::size_t n_qualified = 0;
  std::size_t n_regions = 0;
  std::size_t n_provinces = 0;
  std::size_t n_addresses = 0;
  std::size_t n_queries = 0;
  std::size_t n_purchases = 0;
  std::map<std::string, std::map<std::string, std::size_t>> histograms;
  std::vector<Violation> violations;
  /// Individuals holding more than one distinct home address; allowed, reported only.
  std::size_t multi_home_individuals = 0;

  bool ok() const { return violations.empty(); }

  std::string summary() const {
    std::ostringstream os;
    for (const auto& v : violations) {
      os << v.rule << ": " << v.detail;
      if (!v.ids.empty()) {
        os << " [ids:";
        for (std::size_t i = 0; i < v.ids.size() && i < 20; ++i) os << ' ' << v.ids[i];
        if (v.ids.size() > 20) os << " ...";
        os << ']';
      }
      os << '\n';
    }
    return os.str();
  }
};

namespace validate_detail {

template <typename T>
std::vector<T> duplicates(std::vector<T> keys) {
  std::sort(keys.begin(), keys.end());
  std::vector<T> dups;
  for (std::size_t i = 1; i < keys.size(); ++i) {
    if (keys[i] == keys[i - 1] && (dups.empty() || dups.back() != keys[i])) {
      dups.push_back(keys[i]);
    }
  }
  return dups;
}

template <typename T>
std::vector<T> duplicates_free(std::vector<T> keys) {
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

inline bool in_unit(double v){ return v >= 0.0 && v <= 1.0; }

}  // namespace validate_detail

/// Checks every dataset invariant; never throws.
inline ValidationReport validate_dataset(const Dataset& ds) {
  using namespace validate_detail;
  ValidationReport rep;
  rep.n_individuals = ds.individuals.size();
  rep.n_regions = ds.regions.size();
  rep.n_addresses = ds.addresses.size();
  rep.n_queries = ds.events.queries.size();
  rep.n_purchases = ds.events.purchases.size();

  std::vector<IndividualId> ids;
  ids.reserve(ds.individuals.size());
  for (const auto& ind : ds.individuals) ids.push_back(ind.id);
  std::vector<IndividualId> sorted_ids = ids;
  std::sort(sorted_ids.begin(), sorted_ids.end());
  auto known_id = [&](IndividualId id) {
    return std::binary_search(sorted_ids.begin(), sorted_ids.end(), id);
  };

  if (auto dups = duplicates(ids); !dups.empty()) {
    rep.violations.push_back({"duplicate_individual_id", std::to_string(dups.size()) +
                                                             " id(s) appear more than once",
                              dups});
  }

  std::vector<CityId> city_ids;
  std::vector<ProvinceId> provinces;
  for (const auto& r : ds.regions) {
    city_ids.push_back(r.city_id);
    provinces.push_back(r.province_id);
  }
  std::sort(provinces.begin(), provinces.end());
  provinces.erase(std::unique(provinces.begin(), provinces.end()), provinces.end());
  rep.n_provinces = provinces.size();
  if (auto dups = duplicates(city_ids); !dups.empty()) {
    std::string detail;
    for (auto c : dups) detail += " " + std::to_string(c);
    rep.violations.push_back({"duplicate_city_id", "cities:" + detail, {}});
  }
  std::vector<CityId> sorted_cities = city_ids;
  std::sort(sorted_cities.begin(), sorted_cities.end());

  bool has_epicenter = false;
  for (const auto& r : ds.regions) {
    const std::string where = "city " + std::to_string(r.city_id);
    if (r.distance_to_epicenter == 0.0) has_epicenter = true;
    if (!(r.distance_to_epicenter >= 0.0)) {
      rep.violations.push_back({"region_distance", where + " has negative distance", {}});
    }
    if (!(r.gdp >= 0.0)) rep.violations.push_back({"region_gdp", where + " has negative gdp", {}});
    if (!in_unit(r.paddy_rice_pct) || !in_unit(r.illiteracy_pct) ||
        !in_unit(r.multi_ethnic_household_pct)) {
      rep.violations.push_back({"region_percentage", where + " has a percentage outside [0,1]", {}});
    }
    if (r.population_count <= 0) {
      rep.violations.push_back({"region_population", where + " has non-positive population", {}});
    }
    if (static_cast<int>(r.daily_confirmed_cases.size()) != ds.calendar.size()) {
      rep.violations.push_back({"region_case_series", where + " case series length " +
                                                          std::to_string(r.daily_confirmed_cases.size()) +
                                                          " != calendar length " +
                                                          std::to_string(ds.calendar.size()),
                                {}});
    }
    for (auto c : r.daily_confirmed_cases) {
      if (c < 0) {
        rep.violations.push_back({"region_case_series", where + " has negative case count", {}});
        break;
      }
    }
  }
  if (!ds.regions.empty() && !has_epicenter) {
    rep.violations.push_back({"epicenter_missing", "no region has distance_to_epicenter = 0", {}});
  }

  std::vector<IndividualId> bad_city, bad_pp, bad_age;
  for (const auto& ind : ds.individuals) {
    if (!std::binary_search(sorted_cities.begin(), sorted_cities.end(), ind.home_city)) {
      bad_city.push_back(ind.id);
    }
    if (ind.purchasing_power < kMinPurchasingPower || ind.purchasing_power > kMaxPurchasingPower) {
      bad_pp.push_back(ind.id);
    }
    if (ind.age < 0) bad_age.push_back(ind.id);
    if (ind.qualified) ++rep.n_qualified;
    rep.histograms["gender"][std::string(to_string(ind.gender))]++;
    rep.histograms["education"][std::string(to_string(ind.education))]++;
    rep.histograms["occupation"][std::string(to_string(ind.occupation))]++;
    rep.histograms["purchasing_power"][std::to_string(ind.purchasing_power)]++;
    rep.histograms["has_child"][ind.has_child ? "true" : "false"]++;
    rep.histograms["married"][ind.married ? "true" : "false"]++;
  }
  if (!bad_city.empty()) {
    rep.violations.push_back({"unknown_home_city", "home_city not in region table", bad_city});
  }
  if (!bad_pp.empty()) {
    rep.violations.push_back({"purchasing_power_range", "purchasing_power outside [1,7]", bad_pp});
  }
  if (!bad_age.empty()) rep.violations.push_back({"age_range", "negative age", bad_age});

  std::vector<IndividualId> bad_interval, dangling_addr;
  std::map<IndividualId, std::vector<AddressId>> homes;
  for (const auto& a : ds.addresses) {
    if (a.start > a.end) bad_interval.push_back(a.individual_id);
    if (!known_id(a.individual_id)) dangling_addr.push_back(a.individual_id);
    if (a.kind == AddressKind::kHome) homes[a.individual_id].push_back(a.address_id);
    rep.histograms["address_kind"][std::string(to_string(a.kind))]++;
  }
  for (auto& [id, addrs] : homes) {
    std::sort(addrs.begin(), addrs.end());
    if (std::unique(addrs.begin(), addrs.end()) - addrs.begin() > 1) ++rep.multi_home_individuals;
  }
  if (!bad_interval.empty()) {
    rep.violations.push_back(
        {"address_interval_order", std::to_string(bad_interval.size()) + " record(s) with start > end",
         bad_interval});
  }
  if (!dangling_addr.empty()) {
    rep.violations.push_back({"address_unknown_individual", "address references unknown individual",
                              duplicates_free(dangling_addr)});
  }

  std::vector<IndividualId> dangling_evt, out_of_window;
  auto check_event = [&](IndividualId id, Timestamp ts) {
    if (!known_id(id)) dangling_evt.push_back(id);
    if (ts < kHistoryStart || ts >= ds.calendar.end()) out_of_window.push_back(id);
  };
  for (const auto& q : ds.events.queries) check_event(q.individual_id, q.timestamp);
  for (const auto& p : ds.events.purchases) check_event(p.individual_id, p.timestamp);
  if (!dangling_evt.empty()) {
    rep.violations.push_back({"event_unknown_individual", "event references unknown individual",
                              duplicates_free(dangling_evt)});
  }
  if (!out_of_window.empty()) {
    rep.violations.push_back({"event_timestamp_window",
                              std::to_string(out_of_window.size()) + " event(s) outside the window",
                              duplicates_free(out_of_window)});
  }
  return rep;
}

/// Loads, canonically sorts, and validates the four dataset files.
inline Dataset load_dataset(const DatasetPaths& paths, const Calendar& calendar = Calendar{}) {
  Dataset ds;
  ds.calendar = calendar;
  ds.individuals = read_population(paths.population);
  ds.regions = read_regions(paths.regions);
  ds.addresses = read_addresses(paths.addresses);
  ds.events = read_events(paths.events);
  ds.sort_canonical();
  const ValidationReport rep = validate_dataset(ds);
  if (!rep.ok()) throw IntegrityError("dataset failed validation:\n" + rep.summary());
  return ds;
}

inline Dataset load_dataset(const std::filesystem::path& population,
                            const std::filesystem::path& regions,
                            const std::filesystem::path& addresses,
                            const std::filesystem::path& events,
                            const Calendar& calendar = Calendar{}) {
  return load_dataset(DatasetPaths{population, regions, addresses, events}, calendar);
}

}  // namespace cryptic
