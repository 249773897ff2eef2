#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cryptic/awareness.hpp"
#include "cryptic/dataset.hpp"
#include "cryptic/error.hpp"
#include "cryptic/netinfer.hpp"
#include "cryptic/parallel.hpp"
#include "cryptic/rng.hpp"
#include "cryptic/types.hpp"

namespace cryptic {

enum class ShockScope : std::uint8_t { kNational, kProvince, kCity };
inline constexpr std::array<std::string_view, 3> kShockScopeNames{"national", "province", "city"};

/// A dated news event. In the simulator it adds `magnitude` to the linear
/// predictor of in-scope individuals on its day, decaying geometrically after.
struct ShockEvent {
  std::string label;
  std::string date;  // YYYY-MM-DD, local
  double magnitude = 0.0;
  ShockScope scope = ShockScope::kNational;
  std::uint64_t scope_id = 0;    // province or city id for scoped events
  std::optional<double> decay;   // overrides the hazard's shock_decay

  Timestamp timestamp() const { return parse_local_date(date); }
};

/// The eleven dated events of the observation window, with simulator magnitudes
/// tuned to give a slow start, a late-January surge and saturation. Local Wuhan news
/// fades within days; national news lingers.
inline std::vector<ShockEvent> default_events() {
  return {
      {"COVID-19 case reported in retrospective studies", "2019-12-08", 0.0, ShockScope::kCity, 1},
      {"Wuhan MHC released a briefing (pneumonia outbreak)", "2019-12-31", 11.0, ShockScope::kCity, 1, 0.5},
      {"Wuhan MHC reported 59 cases of viral pneumonia", "2020-01-05", 7.0, ShockScope::kCity, 1, 0.5},
      {"Strict exit screening measures activated in Wuhan", "2020-01-16", 7.0, ShockScope::kCity, 1, 0.5},
      {"China NHC confirmed human-to-human transmission", "2020-01-20", 10.5, ShockScope::kNational, 0},
      {"Wuhan lockdown", "2020-01-23", 3.5, ShockScope::kNational, 0},
      {"Hubei activated first-level public health emergency", "2020-01-24", 2.0, ShockScope::kProvince, 1},
      {"China activated first-level public health emergency", "2020-01-25", 2.0, ShockScope::kNational, 0},
      {"WHO declared the novel coronavirus outbreak a PHEIC", "2020-01-31", 2.0, ShockScope::kNational, 0},
      {"Wuhan launched quarantine strategies", "2020-02-02", 2.0, ShockScope::kCity, 1},
      {"WHO named COVID-19 officially", "2020-02-11", 15.0, ShockScope::kNational, 0},
  };
}

/// Coefficients of the logistic awareness hazard.
struct HazardCoefficients {
  double intercept = -14.0;
  double female = 0.1;
  double age_per_year = -0.01;  // applied to (age - age_center)
  double age_center = 40.0;
  std::array<double, 3> education{-0.8, 0.0, 0.8};  // indexed by Education
  std::array<double, 7> occupation{1.0, 0.5, 0.0, 0.2, -0.5, -0.8, -0.3};  // by Occupation
  double purchasing_power_per_level = 0.15;  // applied to (level - 4)
  double has_child = 0.2;
  double married = -0.1;
  std::array<double, 3> layer_weight{4.0, 3.0, 2.0};  // family, schoolmate, workmate
  double shock_scale = 1.0;
  double shock_decay = 0.97;   // per-day multiplier of an event's contribution
  double distance_coef = 0.6;  // subtracted per distance_scale_km
  double distance_scale_km = 1000.0;
};

/// Demographic-only part of the linear predictor.
inline double demographic_predictor(const HazardCoefficients& c, const Individual& ind) {
  double eta = c.intercept;
  if (ind.gender == Gender::kFemale) eta += c.female;
  eta += c.age_per_year * (static_cast<double>(ind.age) - c.age_center);
  eta += c.education[static_cast<std::size_t>(ind.education)];
  eta += c.occupation[static_cast<std::size_t>(ind.occupation)];
  eta += c.purchasing_power_per_level * (static_cast<double>(ind.purchasing_power) - 4.0);
  if (ind.has_child) eta += c.has_child;
  if (ind.married) eta += c.married;
  return eta;
}

inline double logistic(double eta) {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

/// Per-day awareness probability. Fractions for degree-0 layers are passed as 0.
inline double hazard(const HazardCoefficients& c, const Individual& ind, double distance_km,
                     const std::array<double, 3>& neighbor_fractions, double active_shock) {
  double eta = demographic_predictor(c, ind);
  for (std::size_t l = 0; l < 3; ++l) eta += c.layer_weight[l] * neighbor_fractions[l];
  eta += c.shock_scale * active_shock;
  eta -= c.distance_coef * distance_km / c.distance_scale_km;
  return logistic(eta);
}

struct SimConfig {
  std::uint64_t rng_seed = 20191201;
  std::size_t n_individuals = 10000;

  // Observation window.
  std::string start_date = "2019-12-01";
  int n_days = 88;

  // Regions.
  std::size_t n_cities = 366;
  std::size_t n_provinces = 31;
  double epicenter_weight = 0.04;  // share of individuals living in the epicenter city
  double max_distance_km = 3500.0;

  // Demographic marginals.
  double female_prob = 0.5;
  int min_age = 16;
  int max_age = 75;
  std::array<double, 3> education_probs{0.6, 0.3, 0.1};
  std::array<double, 7> occupation_probs{0.04, 0.06, 0.35, 0.08, 0.22, 0.10, 0.15};
  double qualified_fraction = 0.8;

  // Networks.
  double mean_family_size = 3.0;
  int fixed_family_size = 0;  // >0 forces every family to this size
  double school_prob = 0.5;   // of individuals aged <= 30
  double mean_school_size = 40.0;
  double company_prob = 0.6;  // of working-age individuals
  double mean_company_size = 30.0;
  double former_tenant_prob = 0.05;
  GroupCaps caps;

  // Activity.
  double background_queries = 2.0;  // mean non-matching queries per individual in window
  double window_purchases = 1.0;    // mean non-PPE purchases per individual in window
  int history_months = 60;

  std::vector<ShockEvent> events = default_events();
  HazardCoefficients hazard;
  std::string stockout_date = "2020-01-27";
  double query_noise = 0.0;

  Calendar calendar() const { return Calendar::from_dates(start_date, n_days); }

  void validate() const {
    auto prob = [](double p, const char* name) {
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0,1]");
    };
    if (n_individuals == 0) throw ConfigError("n_individuals must be > 0");
    if (n_days <= 0) throw ConfigError("n_days must be > 0");
    if (n_cities == 0 || n_provinces == 0) throw ConfigError("need at least one city and province");
    if (n_provinces > n_cities) throw ConfigError("n_provinces exceeds n_cities");
    prob(epicenter_weight, "epicenter_weight");
    prob(female_prob, "female_prob");
    prob(qualified_fraction, "qualified_fraction");
    prob(school_prob, "school_prob");
    prob(company_prob, "company_prob");
    prob(former_tenant_prob, "former_tenant_prob");
    prob(query_noise, "query_noise");
    for (double p : education_probs) prob(p, "education_probs");
    for (double p : occupation_probs) prob(p, "occupation_probs");
    if (min_age < 0 || max_age < min_age) throw ConfigError("invalid age range");
    if (mean_family_size < 1.0) throw ConfigError("mean_family_size must be >= 1");
    if (caps.family < 1) throw ConfigError("family cap must be >= 1");
    if (fixed_family_size < 0) throw ConfigError("fixed_family_size must be >= 0");
    if (static_cast<std::size_t>(fixed_family_size) > n_individuals) {
      throw ConfigError("fixed_family_size exceeds the population");
    }
    if (static_cast<std::size_t>(fixed_family_size) > caps.family) {
      throw ConfigError("fixed_family_size exceeds the family cap");
    }
    if (mean_school_size < 1.0 || mean_company_size < 1.0) {
      throw ConfigError("institution sizes must be >= 1");
    }
    if (history_months < 1) throw ConfigError("history_months must be >= 1");
    if (!(hazard.shock_decay >= 0.0 && hazard.shock_decay <= 1.0)) {
      throw ConfigError("shock_decay must lie in [0,1]");
    }
    if (hazard.distance_scale_km <= 0.0) throw ConfigError("distance_scale_km must be > 0");
    if (background_queries < 0.0 || window_purchases < 0.0) {
      throw ConfigError("activity rates must be >= 0");
    }
    try {
      (void)parse_local_date(start_date);
      (void)parse_local_date(stockout_date);
      for (const auto& e : events) {
        (void)e.timestamp();
        if (e.decay && !(*e.decay >= 0.0 && *e.decay <= 1.0)) {
          throw ConfigError("decay of event '" + e.label + "' must lie in [0,1]");
        }
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
};

namespace sim_detail {

using nlohmann::json;

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> known,
                           const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool found = false;
    for (const char* k : known) found = found || it.key() == k;
    if (!found) throw ConfigError(std::string("unknown key '") + it.key() + "' in " + where);
  }
}

}  // namespace sim_detail

inline HazardCoefficients hazard_from_json(const nlohmann::json& j) {
  using namespace sim_detail;
  HazardCoefficients c;
  reject_unknown(j,
                 {"intercept", "female", "age_per_year", "age_center", "education", "occupation",
                  "purchasing_power_per_level", "has_child", "married", "layer_weight",
                  "shock_scale", "shock_decay", "distance_coef", "distance_scale_km"},
                 "hazard");
  read_opt(j, "intercept", c.intercept);
  read_opt(j, "female", c.female);
  read_opt(j, "age_per_year", c.age_per_year);
  read_opt(j, "age_center", c.age_center);
  read_opt(j, "education", c.education);
  read_opt(j, "occupation", c.occupation);
  read_opt(j, "purchasing_power_per_level", c.purchasing_power_per_level);
  read_opt(j, "has_child", c.has_child);
  read_opt(j, "married", c.married);
  read_opt(j, "layer_weight", c.layer_weight);
  read_opt(j, "shock_scale", c.shock_scale);
  read_opt(j, "shock_decay", c.shock_decay);
  read_opt(j, "distance_coef", c.distance_coef);
  read_opt(j, "distance_scale_km", c.distance_scale_km);
  return c;
}

inline nlohmann::json to_json(const HazardCoefficients& c) {
  return {{"intercept", c.intercept},
          {"female", c.female},
          {"age_per_year", c.age_per_year},
          {"age_center", c.age_center},
          {"education", c.education},
          {"occupation", c.occupation},
          {"purchasing_power_per_level", c.purchasing_power_per_level},
          {"has_child", c.has_child},
          {"married", c.married},
          {"layer_weight", c.layer_weight},
          {"shock_scale", c.shock_scale},
          {"shock_decay", c.shock_decay},
          {"distance_coef", c.distance_coef},
          {"distance_scale_km", c.distance_scale_km}};
}

inline std::vector<ShockEvent> events_from_json(const nlohmann::json& j) {
  using namespace sim_detail;
  if (!j.is_array()) throw ConfigError("'events' must be an array");
  std::vector<ShockEvent> out;
  for (const auto& e : j) {
    if (!e.is_object()) throw ConfigError("event entries must be objects");
    reject_unknown(e, {"label", "date", "magnitude", "scope", "scope_id", "decay"}, "event");
    ShockEvent ev;
    read_opt(e, "label", ev.label);
    read_opt(e, "date", ev.date);
    read_opt(e, "magnitude", ev.magnitude);
    std::string scope = "national";
    read_opt(e, "scope", scope);
    auto parsed = parse_enum<ShockScope>(scope, kShockScopeNames);
    if (!parsed) throw ConfigError("unknown event scope '" + scope + "'");
    ev.scope = *parsed;
    read_opt(e, "scope_id", ev.scope_id);
    if (auto it = e.find("decay"); it != e.end() && !it->is_null()) {
      if (!it->is_number()) throw ConfigError("event decay must be a number");
      ev.decay = it->get<double>();
    }
    if (ev.date.empty()) throw ConfigError("event '" + ev.label + "' has no date");
    out.push_back(std::move(ev));
  }
  return out;
}

inline nlohmann::json to_json(const std::vector<ShockEvent>& events) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : events) {
    arr.push_back({{"label", e.label},
                   {"date", e.date},
                   {"magnitude", e.magnitude},
                   {"scope", kShockScopeNames[static_cast<std::size_t>(e.scope)]},
                   {"scope_id", e.scope_id}});
    if (e.decay) arr.back()["decay"] = *e.decay;
  }
  return arr;
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline SimConfig sim_config_from_json(const nlohmann::json& j) {
  using namespace sim_detail;
  if (!j.is_object()) throw ConfigError("simulator config must be an object");
  reject_unknown(j,
                 {"rng_seed", "n_individuals", "start_date", "n_days", "n_cities", "n_provinces",
                  "epicenter_weight", "max_distance_km", "female_prob", "min_age", "max_age",
                  "education_probs", "occupation_probs", "qualified_fraction", "mean_family_size",
                  "fixed_family_size", "school_prob", "mean_school_size", "company_prob",
                  "mean_company_size", "former_tenant_prob", "caps", "background_queries",
                  "window_purchases", "history_months", "events", "hazard", "stockout_date",
                  "query_noise"},
                 "simulator config");
  SimConfig c;
  read_opt(j, "rng_seed", c.rng_seed);
  read_opt(j, "n_individuals", c.n_individuals);
  read_opt(j, "start_date", c.start_date);
  read_opt(j, "n_days", c.n_days);
  read_opt(j, "n_cities", c.n_cities);
  read_opt(j, "n_provinces", c.n_provinces);
  read_opt(j, "epicenter_weight", c.epicenter_weight);
  read_opt(j, "max_distance_km", c.max_distance_km);
  read_opt(j, "female_prob", c.female_prob);
  read_opt(j, "min_age", c.min_age);
  read_opt(j, "max_age", c.max_age);
  read_opt(j, "education_probs", c.education_probs);
  read_opt(j, "occupation_probs", c.occupation_probs);
  read_opt(j, "qualified_fraction", c.qualified_fraction);
  read_opt(j, "mean_family_size", c.mean_family_size);
  read_opt(j, "fixed_family_size", c.fixed_family_size);
  read_opt(j, "school_prob", c.school_prob);
  read_opt(j, "mean_school_size", c.mean_school_size);
  read_opt(j, "company_prob", c.company_prob);
  read_opt(j, "mean_company_size", c.mean_company_size);
  read_opt(j, "former_tenant_prob", c.former_tenant_prob);
  if (auto it = j.find("caps"); it != j.end()) {
    reject_unknown(*it, {"family", "schoolmate", "workmate"}, "caps");
    read_opt(*it, "family", c.caps.family);
    read_opt(*it, "schoolmate", c.caps.schoolmate);
    read_opt(*it, "workmate", c.caps.workmate);
  }
  read_opt(j, "background_queries", c.background_queries);
  read_opt(j, "window_purchases", c.window_purchases);
  read_opt(j, "history_months", c.history_months);
  if (auto it = j.find("events"); it != j.end()) c.events = events_from_json(*it);
  if (auto it = j.find("hazard"); it != j.end()) c.hazard = hazard_from_json(*it);
  read_opt(j, "stockout_date", c.stockout_date);
  read_opt(j, "query_noise", c.query_noise);
  c.validate();
  return c;
}

inline nlohmann::json to_json(const SimConfig& c) {
  return {{"rng_seed", c.rng_seed},
          {"n_individuals", c.n_individuals},
          {"start_date", c.start_date},
          {"n_days", c.n_days},
          {"n_cities", c.n_cities},
          {"n_provinces", c.n_provinces},
          {"epicenter_weight", c.epicenter_weight},
          {"max_distance_km", c.max_distance_km},
          {"female_prob", c.female_prob},
          {"min_age", c.min_age},
          {"max_age", c.max_age},
          {"education_probs", c.education_probs},
          {"occupation_probs", c.occupation_probs},
          {"qualified_fraction", c.qualified_fraction},
          {"mean_family_size", c.mean_family_size},
          {"fixed_family_size", c.fixed_family_size},
          {"school_prob", c.school_prob},
          {"mean_school_size", c.mean_school_size},
          {"company_prob", c.company_prob},
          {"mean_company_size", c.mean_company_size},
          {"former_tenant_prob", c.former_tenant_prob},
          {"caps", {{"family", c.caps.family}, {"schoolmate", c.caps.schoolmate},
                    {"workmate", c.caps.workmate}}},
          {"background_queries", c.background_queries},
          {"window_purchases", c.window_purchases},
          {"history_months", c.history_months},
          {"events", to_json(c.events)},
          {"hazard", to_json(c.hazard)},
          {"stockout_date", c.stockout_date},
          {"query_noise", c.query_noise}};
}

/// Simulator-side truth used to verify the analytics pipeline.
struct GroundTruth {
  AwarenessTimeline first_aware;  // aligned with the population's sorted ids
  MultiplexGraph graph;
};

struct SimPopulation {
  Dataset dataset;  // individuals, regions, addresses, historical purchases; no window events
  MultiplexGraph graph;
};

namespace sim_detail {

inline constexpr std::array<std::string_view, 6> kPurchaseCategories{
    "groceries", "apparel", "electronics", "household", "books", "beauty"};

inline constexpr std::array<std::string_view, 6> kMatchingQueries{
    "n95 face mask",          "KN95 Face Mask",        "kf94 FACE MASK xl",
    "buy N95 face mask",      "kn95  face mask 50pcs", "face mask n95 adult"};

// None of these satisfy the default pattern set.
inline constexpr std::array<std::string_view, 8> kBackgroundQueries{
    "rice cooker",      "face mask",    "n95 respirator filter", "winter coat",
    "hand sanitizer",   "phone case",   "kids face masks",       "kf94 replacement filter"};

inline AddressId address_id(AddressKind kind, std::uint64_t seq) {
  return (static_cast<std::uint64_t>(kind) + 1) << 40 | seq;
}

inline Timestamp month_start(std::int64_t month_index) {
  const int year = static_cast<int>(month_index / 12);
  const unsigned month = static_cast<unsigned>(month_index % 12) + 1;
  return local_midnight(year, month, 1);
}

inline void add_clique(std::vector<Edge>& out, const std::vector<NodeIndex>& members) {
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) out.emplace_back(members[i], members[j]);
  }
}

}  // namespace sim_detail

/// Builds regions, individuals, address records and the true multiplex graph,
/// plus monthly purchase histories (complete for qualified individuals).
inline SimPopulation generate_population(const SimConfig& cfg) {
  using namespace sim_detail;
  cfg.validate();
  const Calendar cal = cfg.calendar();
  SimPopulation pop;
  Dataset& ds = pop.dataset;
  ds.calendar = cal;

  // Regions: city ids 1..n, province ids 1..p; city 1 is the epicenter in province 1.
  std::vector<double> province_distance(cfg.n_provinces);
  {
    StreamRng rng(cfg.rng_seed, Stream::kRegions, 0);
    for (std::size_t p = 0; p < cfg.n_provinces; ++p) {
      province_distance[p] = p == 0 ? 150.0 : rng.uniform(300.0, cfg.max_distance_km);
    }
  }
  const int onset_day = std::max(0, cal.day_of(local_midnight(2019, 12, 31)));
  std::vector<double> city_weight(cfg.n_cities);
  ds.regions.resize(cfg.n_cities);
  for (std::size_t c = 0; c < cfg.n_cities; ++c) {
    StreamRng rng(cfg.rng_seed, Stream::kRegions, c + 1);
    Region& r = ds.regions[c];
    r.city_id = c + 1;
    const std::size_t province = c < cfg.n_provinces ? c : rng.below(cfg.n_provinces);
    r.province_id = province + 1;
    r.name = "city-" + std::to_string(c + 1);
    r.distance_to_epicenter =
        c == 0 ? 0.0 : std::max(1.0, province_distance[province] + rng.uniform(-150.0, 150.0));
    city_weight[c] = std::exp(rng.normal() * 0.6);
    const double closeness = 1.0 / (1.0 + r.distance_to_epicenter / 400.0);
    r.gdp = std::round(city_weight[c] * 5.0e10 * (0.6 + 0.8 * closeness) * std::exp(0.2 * rng.normal()));
    r.cultural_tightness = rng.normal();
    r.paddy_rice_pct = rng.uniform();
    r.innovation_index = std::exp(rng.normal());
    r.illiteracy_pct = rng.uniform(0.01, 0.15);
    r.multi_ethnic_household_pct = rng.uniform(0.0, 0.3);
    r.population_count = static_cast<std::int64_t>(std::max(1.0, std::round(city_weight[c] * 1.0e6)));
    r.daily_confirmed_cases.assign(static_cast<std::size_t>(cal.size()), 0);
    for (int d = onset_day; d < cal.size(); ++d) {
      const double base = (c == 0 ? 40.0 : 4.0 * closeness) * std::exp(0.08 * (d - onset_day));
      r.daily_confirmed_cases[static_cast<std::size_t>(d)] =
          static_cast<std::int64_t>(std::floor(base * rng.uniform(0.8, 1.2)));
    }
  }
  {
    double others = 0.0;
    for (std::size_t c = 1; c < cfg.n_cities; ++c) others += city_weight[c];
    if (cfg.n_cities == 1) {
      city_weight[0] = 1.0;
    } else {
      city_weight[0] = others * cfg.epicenter_weight / std::max(1e-12, 1.0 - cfg.epicenter_weight);
    }
  }

  // Families share a home city and a home address.
  const std::size_t n = cfg.n_individuals;
  std::vector<std::size_t> family_of(n);
  std::vector<std::vector<NodeIndex>> families;
  std::vector<std::size_t> family_city;
  {
    StreamRng rng(cfg.rng_seed, Stream::kFamilies, 0);
    std::size_t next = 0;
    while (next < n) {
      std::size_t size = 0;
      if (cfg.fixed_family_size > 0) {
        size = static_cast<std::size_t>(cfg.fixed_family_size);
      } else {
        size = 1 + static_cast<std::size_t>(rng.poisson(cfg.mean_family_size - 1.0));
      }
      size = std::min({size, cfg.caps.family, n - next});
      std::vector<NodeIndex> members;
      for (std::size_t k = 0; k < size; ++k) {
        family_of[next] = families.size();
        members.push_back(static_cast<NodeIndex>(next++));
      }
      families.push_back(std::move(members));
      family_city.push_back(draw_weighted(rng, city_weight));
    }
  }

  ds.individuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Individual& ind = ds.individuals[i];
    ind.id = i + 1;
    StreamRng rng(cfg.rng_seed, Stream::kDemographics, ind.id);
    ind.gender = rng.bernoulli(cfg.female_prob) ? Gender::kFemale : Gender::kMale;
    ind.age = cfg.min_age + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.max_age - cfg.min_age + 1)));
    ind.education = static_cast<Education>(draw_weighted(rng, cfg.education_probs));
    ind.occupation = static_cast<Occupation>(draw_weighted(rng, cfg.occupation_probs));
    const double edu_shift = static_cast<double>(static_cast<int>(ind.education)) - 0.5;
    const double level = std::round(3.5 + 0.9 * edu_shift + 1.3 * rng.normal());
    ind.purchasing_power = static_cast<int>(std::clamp(level, 1.0, 7.0));
    const bool parenting_age = ind.age >= 25 && ind.age <= 55;
    ind.has_child = rng.bernoulli(parenting_age ? 0.45 : 0.1);
    ind.married = rng.bernoulli(ind.age > 26 ? 0.7 : 0.15);
    ind.home_city = ds.regions[family_city[family_of[i]]].city_id;
    ind.qualified = rng.bernoulli(cfg.qualified_fraction);
  }

  // Address records. Current residents' intervals all cover the window.
  const Timestamp resident_start = local_midnight(2013, 1, 1);
  const Timestamp resident_end = cal.end() + 365 * kSecondsPerDay;
  std::array<std::vector<Edge>, 3> truth;
  for (std::size_t f = 0; f < families.size(); ++f) {
    const AddressId addr = address_id(AddressKind::kHome, f);
    StreamRng rng(cfg.rng_seed, Stream::kTenants, f);
    for (NodeIndex m : families[f]) {
      const Timestamp start = resident_start + static_cast<Timestamp>(rng.below(400)) * kSecondsPerDay;
      ds.addresses.push_back({ds.individuals[m].id, addr, AddressKind::kHome, start, resident_end});
    }
    add_clique(truth[0], families[f]);
    // A former occupant from another family whose tenancy ended before the current one.
    if (n > families[f].size() && families[f].size() < cfg.caps.family &&
        rng.bernoulli(cfg.former_tenant_prob)) {
      std::size_t other = rng.below(n);
      while (family_of[other] == f) other = (other + 1) % n;
      const Timestamp end = resident_start - 30 * kSecondsPerDay;
      ds.addresses.push_back({ds.individuals[other].id, addr, AddressKind::kHome, kHistoryStart, end});
    }
  }

  // Schools and companies: per-city pools chunked into capped groups.
  auto make_institutions = [&](AddressKind kind, auto&& eligible, double join_prob, double mean_size,
                               std::size_t cap, std::vector<Edge>& out, std::uint32_t sub) {
    std::vector<std::vector<NodeIndex>> pool(cfg.n_cities);
    for (std::size_t i = 0; i < n; ++i) {
      StreamRng rng(cfg.rng_seed, Stream::kInstitutions, ds.individuals[i].id, sub);
      if (eligible(ds.individuals[i]) && rng.bernoulli(join_prob)) {
        pool[ds.individuals[i].home_city - 1].push_back(static_cast<NodeIndex>(i));
      }
    }
    std::uint64_t seq = 0;
    for (std::size_t c = 0; c < cfg.n_cities; ++c) {
      auto& members = pool[c];
      StreamRng rng(cfg.rng_seed, Stream::kInstitutions, c, 100 + sub);
      for (std::size_t k = members.size(); k > 1; --k) std::swap(members[k - 1], members[rng.below(k)]);
      std::size_t pos = 0;
      while (pos < members.size()) {
        const auto hi_size = static_cast<std::uint64_t>(std::max(2.0, 2.0 * mean_size - 1.0));
        std::size_t size = 1 + static_cast<std::size_t>(rng.below(hi_size));
        size = std::min({size, cap, members.size() - pos});
        std::vector<NodeIndex> group(members.begin() + static_cast<std::ptrdiff_t>(pos),
                                     members.begin() + static_cast<std::ptrdiff_t>(pos + size));
        const AddressId addr = address_id(kind, seq++);
        for (NodeIndex m : group) {
          ds.addresses.push_back({ds.individuals[m].id, addr, kind, resident_start, resident_end});
        }
        add_clique(out, group);
        pos += size;
      }
    }
  };
  make_institutions(
      AddressKind::kSchoolDorm, [](const Individual& ind) { return ind.age <= 30; }, cfg.school_prob,
      cfg.mean_school_size, cfg.caps.schoolmate, truth[1], 1);
  make_institutions(
      AddressKind::kCompany,
      [](const Individual& ind) {
        return ind.age >= 20 && ind.age <= 60 &&
               ind.occupation != Occupation::kAgriForestryHusbandryFishery &&
               ind.occupation != Occupation::kIndividualOperationService;
      },
      cfg.company_prob, cfg.mean_company_size, cfg.caps.workmate, truth[2], 2);

  // Monthly purchase histories over the months preceding the window.
  const QualificationWindow window = QualificationWindow::before(cal.start(), cfg.history_months);
  for (std::size_t i = 0; i < n; ++i) {
    const Individual& ind = ds.individuals[i];
    StreamRng rng(cfg.rng_seed, Stream::kHistory, ind.id);
    const auto skipped = static_cast<int>(rng.below(static_cast<std::uint64_t>(window.n_months)));
    for (int m = 0; m < window.n_months; ++m) {
      if (!ind.qualified && (m == skipped || !rng.bernoulli(0.5))) continue;
      const Timestamp t0 = month_start(window.first_month + m);
      const Timestamp ts = t0 + static_cast<Timestamp>(rng.below(28 * kSecondsPerDay));
      const auto cat = kPurchaseCategories[rng.below(kPurchaseCategories.size())];
      ds.events.purchases.push_back({ind.id, ts, std::string(cat), false});
    }
  }

  std::vector<IndividualId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = ds.individuals[i].id;
  pop.graph = MultiplexGraph(std::move(ids), std::move(truth));
  ds.sort_canonical();
  return pop;
}

/// Linear-predictor shock per city per day: sum of in-scope event magnitudes,
/// each multiplied by its decay factor for every day after its event.
inline std::vector<std::vector<double>> shock_table(const SimConfig& cfg,
                                                    const std::vector<Region>& regions,
                                                    const Calendar& cal) {
  std::vector<std::vector<double>> table(static_cast<std::size_t>(cal.size()),
                                         std::vector<double>(regions.size(), 0.0));
  for (const auto& ev : cfg.events) {
    const int day0 = cal.day_of(ev.timestamp());
    const double decay = ev.decay.value_or(cfg.hazard.shock_decay);
    for (int d = std::max(0, day0); d < cal.size(); ++d) {
      const double value = ev.magnitude * std::pow(decay, d - day0);
      if (value == 0.0) continue;
      for (std::size_t c = 0; c < regions.size(); ++c) {
        const bool in_scope = ev.scope == ShockScope::kNational ||
                              (ev.scope == ShockScope::kProvince && regions[c].province_id == ev.scope_id) ||
                              (ev.scope == ShockScope::kCity && regions[c].city_id == ev.scope_id);
        if (in_scope) table[static_cast<std::size_t>(d)][c] += value;
      }
    }
  }
  return table;
}

/// Per-day awareness process over the true graph, then query/purchase emission.
/// Returns the window events (sorted) and the ground truth.
inline std::pair<EventLog, GroundTruth> simulate_diffusion(const SimPopulation& pop,
                                                           const SimConfig& cfg,
                                                           unsigned jobs = 1) {
  using namespace sim_detail;
  cfg.validate();
  const Dataset& ds = pop.dataset;
  const MultiplexGraph& g = pop.graph;
  const Calendar cal = ds.calendar;
  const std::size_t n = ds.individuals.size();
  const int n_days = cal.size();

  std::vector<std::size_t> city_index(n);
  std::vector<double> distance(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Individual& ind = ds.individuals[i];
    const auto it = std::lower_bound(ds.regions.begin(), ds.regions.end(), ind.home_city,
                                     [](const Region& r, CityId v) { return r.city_id < v; });
    if (it == ds.regions.end() || it->city_id != ind.home_city) {
      throw IntegrityError("individual " + std::to_string(ind.id) + " has unknown home city");
    }
    city_index[i] = static_cast<std::size_t>(it - ds.regions.begin());
    distance[i] = it->distance_to_epicenter;
  }
  const auto shocks = shock_table(cfg, ds.regions, cal);

  constexpr int kNever = -1;
  std::vector<int> aware_day(n, kNever);
  std::array<std::vector<std::uint32_t>, 3> aware_nbrs;
  for (auto& v : aware_nbrs) v.assign(n, 0);
  std::vector<std::uint8_t> becomes(n, 0);

  for (int d = 0; d < n_days; ++d) {
    parallel_for(n, jobs, [&](std::size_t i) {
      becomes[i] = 0;
      if (aware_day[i] != kNever) return;
      std::array<double, 3> frac{0.0, 0.0, 0.0};
      for (std::size_t l = 0; l < 3; ++l) {
        const std::size_t deg = g.degree(kLayers[l], static_cast<NodeIndex>(i));
        if (deg > 0) frac[l] = static_cast<double>(aware_nbrs[l][i]) / static_cast<double>(deg);
      }
      const double shock = shocks[static_cast<std::size_t>(d)][city_index[i]];
      const double p = hazard(cfg.hazard, ds.individuals[i], distance[i], frac, shock);
      StreamRng rng(cfg.rng_seed, Stream::kHazard, ds.individuals[i].id, static_cast<std::uint32_t>(d));
      if (rng.uniform() < p) becomes[i] = 1;
    });
    for (std::size_t i = 0; i < n; ++i) {
      if (!becomes[i]) continue;
      aware_day[i] = d;
      for (std::size_t l = 0; l < 3; ++l) {
        for (NodeIndex j : g.neighbors(kLayers[l], static_cast<NodeIndex>(i))) ++aware_nbrs[l][j];
      }
    }
  }

  // Emission. Each individual writes into its own slot; slots are concatenated in id order.
  const int stockout_day = cal.day_of(parse_local_date(cfg.stockout_date));
  std::vector<EventLog> per(n);
  std::vector<Timestamp> truth(n, kNeverAware);
  parallel_for(n, jobs, [&](std::size_t i) {
    const IndividualId id = ds.individuals[i].id;
    EventLog& out = per[i];
    StreamRng qrng(cfg.rng_seed, Stream::kQueries, id);
    const int n_bg = qrng.poisson(cfg.background_queries);
    for (int k = 0; k < n_bg; ++k) {
      const Timestamp ts = cal.start() + static_cast<Timestamp>(qrng.below(static_cast<std::uint64_t>(cal.end() - cal.start())));
      out.queries.push_back({id, ts, std::string(kBackgroundQueries[qrng.below(kBackgroundQueries.size())])});
    }
    StreamRng prng(cfg.rng_seed, Stream::kPurchases, id);
    const int n_buy = prng.poisson(cfg.window_purchases);
    for (int k = 0; k < n_buy; ++k) {
      const Timestamp ts = cal.start() + static_cast<Timestamp>(prng.below(static_cast<std::uint64_t>(cal.end() - cal.start())));
      out.purchases.push_back({id, ts, std::string(kPurchaseCategories[prng.below(kPurchaseCategories.size())]), false});
    }
    const int d = aware_day[i];
    if (d == kNever) return;
    // Three submissions on the aware day; the third marks the true first-aware time.
    std::array<Timestamp, 3> times{};
    for (auto& t : times) t = cal.day_start(d) + static_cast<Timestamp>(qrng.below(kSecondsPerDay));
    std::sort(times.begin(), times.end());
    truth[i] = times[2];
    int emitted = 0;
    for (Timestamp t : times) {
      if (qrng.uniform() < cfg.query_noise) continue;
      out.queries.push_back({id, t, std::string(kMatchingQueries[qrng.below(kMatchingQueries.size())])});
      ++emitted;
    }
    // Suppressed submissions are retried one per day.
    for (int day = d + 1; emitted < 3 && day < n_days; ++day) {
      const Timestamp t = cal.day_start(day) + static_cast<Timestamp>(qrng.below(kSecondsPerDay));
      if (qrng.uniform() < cfg.query_noise) continue;
      out.queries.push_back({id, t, std::string(kMatchingQueries[qrng.below(kMatchingQueries.size())])});
      ++emitted;
    }
    // PPE order follows the awareness moment; unavailable once stock runs out.
    const Timestamp buy = std::min(truth[i] + 60 + static_cast<Timestamp>(prng.below(3600)), cal.day_end(d));
    if (d <= stockout_day) out.purchases.push_back({id, buy, "face_mask", true});
  });

  EventLog log;
  std::size_t nq = 0, np = 0;
  for (const auto& e : per) {
    nq += e.queries.size();
    np += e.purchases.size();
  }
  log.queries.reserve(nq);
  log.purchases.reserve(np);
  for (auto& e : per) {
    std::move(e.queries.begin(), e.queries.end(), std::back_inserter(log.queries));
    std::move(e.purchases.begin(), e.purchases.end(), std::back_inserter(log.purchases));
  }
  sort_canonical(log);

  GroundTruth gt{AwarenessTimeline(ds.ids(), std::move(truth)), g};
  return {std::move(log), std::move(gt)};
}

struct Simulation {
  Dataset dataset;  // complete, including history and window events
  GroundTruth truth;
};

/// generate_population followed by simulate_diffusion, merged into one dataset.
inline Simulation simulate(const SimConfig& cfg, unsigned jobs = 1) {
  SimPopulation pop = generate_population(cfg);
  auto [log, truth] = simulate_diffusion(pop, cfg, jobs);
  Dataset ds = std::move(pop.dataset);
  std::move(log.queries.begin(), log.queries.end(), std::back_inserter(ds.events.queries));
  std::move(log.purchases.begin(), log.purchases.end(), std::back_inserter(ds.events.purchases));
  sort_canonical(ds.events);
  return {std::move(ds), std::move(truth)};
}

}  // namespace cryptic
