#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cryptic/awareness.hpp"
#include "cryptic/error.hpp"
#include "cryptic/netinfer.hpp"
#include "cryptic/stats.hpp"
#include "cryptic/types.hpp"

namespace cryptic {

// Undefined values are NaN and unbounded ratios are +inf throughout this module;
// table writers render them as "NA" and "INF".
inline constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Daily series

struct DailyCounts {
  std::vector<std::int64_t> new_aware;
  std::vector<std::int64_t> cumulative;
};

/// New and cumulative aware counts per calendar day over `cohort`.
inline DailyCounts daily_counts(const AwarenessTimeline& tl, std::span<const std::size_t> cohort,
                                const Calendar& cal) {
  DailyCounts out;
  const auto days = static_cast<std::size_t>(cal.size());
  out.new_aware.assign(days, 0);
  out.cumulative.assign(days, 0);
  for (std::size_t i : cohort) {
    const auto fa = tl.first_aware(i);
    if (!fa) continue;
    const int d = cal.day_of(*fa);
    if (d >= 0 && d < cal.size()) ++out.new_aware[static_cast<std::size_t>(d)];
  }
  std::int64_t run = 0;
  for (std::size_t d = 0; d < days; ++d) {
    run += out.new_aware[d];
    out.cumulative[d] = run;
  }
  return out;
}

/// Day-over-day relative change. A zero previous value gives +inf when the current
/// value is positive, else 0.
inline double growth_rate(double prev, double cur) {
  if (prev == 0.0) return cur > 0.0 ? kInfinity : 0.0;
  return (cur - prev) / prev;
}

/// Growth rate per day. Day 0 is measured against 0; NaN inputs give NaN.
inline std::vector<double> growth_rates(std::span<const double> series) {
  std::vector<double> out(series.size(), kUndefined);
  for (std::size_t d = 0; d < series.size(); ++d) {
    const double prev = d == 0 ? 0.0 : series[d - 1];
    if (std::isnan(series[d]) || std::isnan(prev)) continue;
    out[d] = growth_rate(prev, series[d]);
  }
  return out;
}

/// Grouping of individuals used by trend tables.
enum class Grouping : std::uint8_t {
  kGender,
  kEducation,
  kOccupation,
  kPurchasingPower,
  kHasChild,
  kMarried,
  kAgeBracket,
  kCity,
  kProvince,
};
inline constexpr std::array<std::string_view, 9> kGroupingNames{
    "gender", "education", "occupation", "purchasing_power", "has_child",
    "married", "age_bracket", "city",    "province"};

/// Group index per individual plus group names.
struct GroupLabels {
  std::vector<std::string> names;
  std::vector<std::size_t> group_of;  // aligned with dataset individuals
};

inline GroupLabels group_labels(const Dataset& ds, Grouping grouping) {
  GroupLabels gl;
  gl.group_of.resize(ds.individuals.size());
  auto fill_names = [&](auto const& names) {
    for (auto n : names) gl.names.emplace_back(n);
  };
  switch (grouping) {
    case Grouping::kGender: fill_names(kGenderNames); break;
    case Grouping::kEducation: fill_names(kEducationNames); break;
    case Grouping::kOccupation: fill_names(kOccupationNames); break;
    case Grouping::kPurchasingPower:
      for (int l = kMinPurchasingPower; l <= kMaxPurchasingPower; ++l) gl.names.push_back(std::to_string(l));
      break;
    case Grouping::kHasChild: gl.names = {"without_child", "with_child"}; break;
    case Grouping::kMarried: gl.names = {"unmarried", "married"}; break;
    case Grouping::kAgeBracket: fill_names(kAgeBracketNames); break;
    case Grouping::kCity:
      for (const auto& r : ds.regions) gl.names.push_back(std::to_string(r.city_id));
      break;
    case Grouping::kProvince: {
      std::vector<ProvinceId> ps;
      for (const auto& r : ds.regions) ps.push_back(r.province_id);
      std::sort(ps.begin(), ps.end());
      ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
      for (auto p : ps) gl.names.push_back(std::to_string(p));
      break;
    }
  }
  std::vector<ProvinceId> provinces;
  if (grouping == Grouping::kProvince) {
    for (const auto& r : ds.regions) provinces.push_back(r.province_id);
    std::sort(provinces.begin(), provinces.end());
    provinces.erase(std::unique(provinces.begin(), provinces.end()), provinces.end());
  }
  for (std::size_t i = 0; i < ds.individuals.size(); ++i) {
    const Individual& ind = ds.individuals[i];
    std::size_t g = 0;
    switch (grouping) {
      case Grouping::kGender: g = static_cast<std::size_t>(ind.gender); break;
      case Grouping::kEducation: g = static_cast<std::size_t>(ind.education); break;
      case Grouping::kOccupation: g = static_cast<std::size_t>(ind.occupation); break;
      case Grouping::kPurchasingPower: g = static_cast<std::size_t>(ind.purchasing_power - 1); break;
      case Grouping::kHasChild: g = ind.has_child ? 1 : 0; break;
      case Grouping::kMarried: g = ind.married ? 1 : 0; break;
      case Grouping::kAgeBracket: g = static_cast<std::size_t>(age_bracket(ind.age)); break;
      case Grouping::kCity: {
        const Region* r = ds.region(ind.home_city);
        if (!r) throw LookupError("unknown home city for individual " + std::to_string(ind.id));
        g = static_cast<std::size_t>(r - ds.regions.data());
        break;
      }
      case Grouping::kProvince: {
        const Region* r = ds.region(ind.home_city);
        if (!r) throw LookupError("unknown home city for individual " + std::to_string(ind.id));
        g = static_cast<std::size_t>(
            std::lower_bound(provinces.begin(), provinces.end(), r->province_id) - provinces.begin());
        break;
      }
    }
    gl.group_of[i] = g;
  }
  return gl;
}

/// Per-group, per-day values; rows follow `names`.
struct TrendSeries {
  std::string grouping;
  std::vector<std::string> names;
  std::vector<std::size_t> sizes;                // cohort members per group
  std::vector<std::vector<double>> values;       // [group][day]; NaN for empty groups
};

/// Awareness percentage per group per day (label at the end of each day).
inline TrendSeries group_trend(const AwarenessTimeline& tl, std::span<const std::size_t> cohort,
                               const GroupLabels& labels, const Calendar& cal,
                               std::string grouping_name = {}) {
  const std::size_t g_count = labels.names.size();
  const auto days = static_cast<std::size_t>(cal.size());
  TrendSeries ts;
  ts.grouping = std::move(grouping_name);
  ts.names = labels.names;
  ts.sizes.assign(g_count, 0);
  std::vector<std::vector<double>> new_aware(g_count, std::vector<double>(days, 0.0));
  for (std::size_t i : cohort) {
    const std::size_t g = labels.group_of[i];
    ++ts.sizes[g];
    if (const auto fa = tl.first_aware(i)) {
      const int d = cal.day_of(*fa);
      if (d >= 0 && d < cal.size()) new_aware[g][static_cast<std::size_t>(d)] += 1.0;
    }
  }
  ts.values.assign(g_count, std::vector<double>(days, kUndefined));
  for (std::size_t g = 0; g < g_count; ++g) {
    if (ts.sizes[g] == 0) continue;
    double run = 0.0;
    for (std::size_t d = 0; d < days; ++d) {
      run += new_aware[g][d];
      ts.values[g][d] = run / static_cast<double>(ts.sizes[g]);
    }
  }
  return ts;
}

/// National awareness percentage per day.
inline std::vector<double> national_series(const AwarenessTimeline& tl,
                                           std::span<const std::size_t> cohort,
                                           const Calendar& cal) {
  if (cohort.empty()) throw UndefinedCohortError("national series over an empty cohort");
  const DailyCounts dc = daily_counts(tl, cohort, cal);
  std::vector<double> out(dc.cumulative.size());
  for (std::size_t d = 0; d < out.size(); ++d) {
    out[d] = static_cast<double>(dc.cumulative[d]) / static_cast<double>(cohort.size());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Phase segmentation

enum class Phase : std::uint8_t { kNormal, kBeginning, kGrowth, kPeak, kPostPeak };
inline constexpr std::array<std::string_view, 5> kPhaseNames{"Normal", "Beginning", "Growth", "Peak",
                                                             "PostPeak"};

inline std::string_view to_string(Phase p) { return kPhaseNames[static_cast<std::size_t>(p)]; }

/// Rule thresholds; fractions, not percent.
struct PhaseThresholds {
  double onset_growth = 1.0;          // some province grows > 100%
  double onset_national = 0.00001;    // national awareness > 0.001%
  double peak_growth = 0.10;          // provinces growing > 10%
  double peak_share = 0.95;           // ... more than 95% of them
  double peak_national = 0.001;       // national awareness > 0.1%
  double post_peak_growth = 0.10;     // provinces growing < 10%
  double post_peak_share = 0.95;
  int post_peak_days = 3;             // sustained this many consecutive days
};

struct PhaseSpan {
  Phase phase;
  int start_day;
  int end_day;  // inclusive

  bool operator==(const PhaseSpan&) const = default;
};

struct PhaseSegmentation {
  std::vector<PhaseSpan> spans;
  /// True when a later phase's rule was never met and the last span runs to the end.
  bool truncated = false;

  std::optional<Phase> phase_of(int day) const {
    for (const auto& s : spans) {
      if (day >= s.start_day && day <= s.end_day) return s.phase;
    }
    return std::nullopt;
  }

  std::optional<int> start_of(Phase p) const {
    for (const auto& s : spans) {
      if (s.phase == p) return s.start_day;
    }
    return std::nullopt;
  }

  bool operator==(const PhaseSegmentation&) const = default;
};

/// Applies the threshold rules to per-province percentage and growth series
/// ([province][day]) and the national series. Provinces whose growth on a day is
/// NaN count as not meeting that day's rule.
inline PhaseSegmentation segment_phases(const std::vector<std::vector<double>>& province_pct,
                                        const std::vector<std::vector<double>>& province_growth,
                                        std::span<const double> national,
                                        const PhaseThresholds& th = {}) {
  (void)province_pct;
  const int n_days = static_cast<int>(national.size());
  const std::size_t n_prov = province_growth.size();
  for (const auto& g : province_growth) {
    if (g.size() != national.size()) throw std::invalid_argument("province series length mismatch");
  }
  auto growth = [&](std::size_t p, int d) { return province_growth[p][static_cast<std::size_t>(d)]; };
  auto onset = [&](int d) {
    if (!(national[static_cast<std::size_t>(d)] > th.onset_national)) return false;
    for (std::size_t p = 0; p < n_prov; ++p) {
      if (growth(p, d) > th.onset_growth) return true;
    }
    return false;
  };
  auto share = [&](int d, auto pred) {
    if (n_prov == 0) return 0.0;
    std::size_t hits = 0;
    for (std::size_t p = 0; p < n_prov; ++p) {
      if (pred(growth(p, d))) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n_prov);
  };
  auto peak = [&](int d) {
    return national[static_cast<std::size_t>(d)] > th.peak_national &&
           share(d, [&](double r) { return r > th.peak_growth; }) > th.peak_share;
  };
  auto calm = [&](int d) {
    return share(d, [&](double r) { return r < th.post_peak_growth; }) > th.post_peak_share;
  };

  std::array<int, 5> starts{0, -1, -1, -1, -1};
  int d = 0;
  for (; d < n_days && starts[1] < 0; ++d) {
    if (onset(d)) starts[1] = d;
  }
  for (; starts[1] >= 0 && d < n_days && starts[2] < 0; ++d) {
    if (onset(d)) starts[2] = d;
  }
  for (; starts[2] >= 0 && d < n_days && starts[3] < 0; ++d) {
    if (peak(d)) starts[3] = d;
  }
  for (; starts[3] >= 0 && d + th.post_peak_days <= n_days && starts[4] < 0; ++d) {
    bool sustained = true;
    for (int k = 0; k < th.post_peak_days && sustained; ++k) sustained = calm(d + k);
    if (sustained) starts[4] = d;
  }

  PhaseSegmentation seg;
  int reached = 0;
  for (int k = 1; k < 5 && starts[static_cast<std::size_t>(k)] >= 0; ++k) reached = k;
  seg.truncated = reached < 4;
  for (int k = 0; k <= reached; ++k) {
    const int s = starts[static_cast<std::size_t>(k)];
    const int e = k < reached ? starts[static_cast<std::size_t>(k) + 1] - 1 : n_days - 1;
    if (e >= s) seg.spans.push_back({static_cast<Phase>(k), s, e});
  }
  return seg;
}

/// Growth rates computed from the percentage series.
inline PhaseSegmentation segment_phases(const std::vector<std::vector<double>>& province_pct,
                                        std::span<const double> national,
                                        const PhaseThresholds& th = {}) {
  std::vector<std::vector<double>> growth;
  growth.reserve(province_pct.size());
  for (const auto& s : province_pct) growth.push_back(growth_rates(s));
  return segment_phases(province_pct, growth, national, th);
}

/// Mean of the finite values of a daily series within each phase span.
inline std::vector<double> phase_means(std::span<const double> daily, const PhaseSegmentation& seg) {
  std::vector<double> out;
  for (const auto& s : seg.spans) {
    double sum = 0.0;
    int n = 0;
    for (int d = s.start_day; d <= s.end_day && d < static_cast<int>(daily.size()); ++d) {
      const double v = daily[static_cast<std::size_t>(d)];
      if (std::isfinite(v)) {
        sum += v;
        ++n;
      }
    }
    out.push_back(n ? sum / n : kUndefined);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ratios

/// P(g1)/P(g2) at t; NaN when both are 0, +inf when only the denominator is 0.
inline double cross_group_ratio(const AwarenessTimeline& tl, std::span<const std::size_t> g1,
                                std::span<const std::size_t> g2, Timestamp t) {
  const double p1 = awareness_percentage(tl, g1, t);
  const double p2 = awareness_percentage(tl, g2, t);
  if (p2 == 0.0) return p1 == 0.0 ? kUndefined : kInfinity;
  return p1 / p2;
}

enum class RatioStatus : std::uint8_t {
  kDefined,
  kInfinite,             // unaware mean is 0, aware mean positive
  kBothZero,             // both means 0
  kNoAwareWithNeighbors,
  kNoUnawareWithNeighbors,
};
inline constexpr std::array<std::string_view, 5> kRatioStatusNames{
    "ok", "infinite", "both_zero", "no_aware_with_neighbors", "no_unaware_with_neighbors"};

struct NeighborhoodRatio {
  double ratio = kUndefined;
  double aware_mean = kUndefined;
  double unaware_mean = kUndefined;
  RatioStatus status = RatioStatus::kDefined;
};

/// Mean aware-neighbor fraction of aware individuals over that of unaware ones, both
/// restricted to focal individuals with at least one neighbor in `layer`. Timeline
/// indices must coincide with graph node indices. An empty `focal` means all nodes.
inline NeighborhoodRatio neighborhood_awareness_ratio(const MultiplexGraph& g, Layer layer,
                                                      const AwarenessTimeline& tl, Timestamp t,
                                                      std::span<const std::size_t> focal = {}) {
  if (tl.size() != g.node_count()) throw std::invalid_argument("timeline and graph node sets differ");
  double sum_aware = 0.0, sum_unaware = 0.0;
  std::size_t n_aware = 0, n_unaware = 0;
  auto visit = [&](std::size_t i) {
    const auto frac = neighbor_awareness_fraction(g, layer, static_cast<NodeIndex>(i),
                                                  [&](NodeIndex j) { return tl.label(j, t); });
    if (!frac) return;
    if (tl.label(i, t)) {
      sum_aware += *frac;
      ++n_aware;
    } else {
      sum_unaware += *frac;
      ++n_unaware;
    }
  };
  if (focal.empty()) {
    for (std::size_t i = 0; i < g.node_count(); ++i) visit(i);
  } else {
    for (std::size_t i : focal) visit(i);
  }
  NeighborhoodRatio r;
  if (n_aware == 0) {
    r.status = RatioStatus::kNoAwareWithNeighbors;
    return r;
  }
  if (n_unaware == 0) {
    r.status = RatioStatus::kNoUnawareWithNeighbors;
    r.aware_mean = sum_aware / static_cast<double>(n_aware);
    return r;
  }
  r.aware_mean = sum_aware / static_cast<double>(n_aware);
  r.unaware_mean = sum_unaware / static_cast<double>(n_unaware);
  if (r.unaware_mean == 0.0) {
    r.status = r.aware_mean == 0.0 ? RatioStatus::kBothZero : RatioStatus::kInfinite;
    r.ratio = r.aware_mean == 0.0 ? kUndefined : kInfinity;
    return r;
  }
  r.ratio = r.aware_mean / r.unaware_mean;
  return r;
}

/// Mean purchasing power of each group's members aware at t; NaN for groups without any.
inline std::vector<double> aware_purchasing_power(const AwarenessTimeline& tl,
                                                  std::span<const Individual> individuals,
                                                  std::span<const std::size_t> cohort,
                                                  const GroupLabels& labels, Timestamp t) {
  std::vector<double> sum(labels.names.size(), 0.0);
  std::vector<std::size_t> count(labels.names.size(), 0);
  for (std::size_t i : cohort) {
    if (!tl.label(i, t)) continue;
    const std::size_t g = labels.group_of[i];
    sum[g] += individuals[i].purchasing_power;
    ++count[g];
  }
  std::vector<double> out(sum.size(), kUndefined);
  for (std::size_t g = 0; g < sum.size(); ++g) {
    if (count[g]) out[g] = sum[g] / static_cast<double>(count[g]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Event hysteresis

class UndefinedBaselineError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Sorted first-aware times of the cohort members that ever became aware.
inline std::vector<Timestamp> aware_times(const AwarenessTimeline& tl,
                                          std::span<const std::size_t> cohort) {
  std::vector<Timestamp> out;
  for (std::size_t i : cohort) {
    if (const auto fa = tl.first_aware(i)) out.push_back(*fa);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Seconds after `event` until the cumulative aware count first reaches
/// N_e * (1 + f) for each factor f, where N_e counts those aware at `event`.
inline std::vector<std::optional<std::int64_t>> hysteresis(std::span<const Timestamp> sorted_times,
                                                           Timestamp event,
                                                           std::span<const double> factors) {
  const auto base = static_cast<std::size_t>(
      std::upper_bound(sorted_times.begin(), sorted_times.end(), event) - sorted_times.begin());
  if (base == 0) throw UndefinedBaselineError("no aware individuals at the event time");
  std::vector<std::optional<std::int64_t>> out;
  for (double f : factors) {
    // Smallest integer count >= base * (1 + f), guarding against representation error.
    const double target = static_cast<double>(base) * (1.0 + f);
    auto k = static_cast<std::size_t>(std::ceil(target - 1e-9 * target));
    k = std::max(k, base + 1);
    if (k > sorted_times.size()) {
      out.emplace_back(std::nullopt);
    } else {
      out.emplace_back(sorted_times[k - 1] - event);
    }
  }
  return out;
}

inline const std::vector<double>& default_hysteresis_factors() {
  static const std::vector<double> kFactors{0.10, 0.50, 1.00};
  return kFactors;
}

// ---------------------------------------------------------------------------
// Lead-day comparison

struct LeadDays {
  int a_leads = 0;
  int b_leads = 0;
  int ties = 0;
  int defined_days = 0;
};

/// Largest growth rate across groups per day; NaN if no group has a defined rate.
inline std::vector<double> max_group_growth(const TrendSeries& ts) {
  const std::size_t days = ts.values.empty() ? 0 : ts.values.front().size();
  std::vector<double> out(days, kUndefined);
  for (const auto& series : ts.values) {
    const auto rates = growth_rates(series);
    for (std::size_t d = 0; d < days; ++d) {
      if (std::isnan(rates[d])) continue;
      if (std::isnan(out[d]) || rates[d] > out[d]) out[d] = rates[d];
    }
  }
  return out;
}

/// Per day, compares the maximum group growth rate of two factorizations.
inline LeadDays lead_days(const TrendSeries& a, const TrendSeries& b) {
  const auto ma = max_group_growth(a);
  const auto mb = max_group_growth(b);
  LeadDays out;
  for (std::size_t d = 0; d < std::min(ma.size(), mb.size()); ++d) {
    if (std::isnan(ma[d]) || std::isnan(mb[d])) continue;
    ++out.defined_days;
    if (ma[d] > mb[d]) {
      ++out.a_leads;
    } else if (mb[d] > ma[d]) {
      ++out.b_leads;
    } else {
      ++out.ties;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Geographic correlation

enum class GeoLevel : std::uint8_t { kCity, kProvince };

enum class GeoFactor : std::uint8_t {
  kDistance,
  kConfirmedCases,  // cumulative through the day
  kGdp,
  kCulturalTightness,
  kPaddyRice,
  kInnovation,
  kIlliteracy,
  kMultiEthnic,
};
inline constexpr std::array<std::string_view, 8> kGeoFactorNames{
    "distance_to_epicenter", "confirmed_cases",  "gdp",        "cultural_tightness",
    "paddy_rice_pct",        "innovation_index", "illiteracy_pct", "multi_ethnic_household_pct"};

/// Regional units at a level: each unit's member cities.
struct GeoUnits {
  std::vector<std::string> names;
  std::vector<std::vector<std::size_t>> cities;  // indices into dataset regions
};

inline GeoUnits geo_units(const Dataset& ds, GeoLevel level) {
  GeoUnits u;
  if (level == GeoLevel::kCity) {
    for (std::size_t c = 0; c < ds.regions.size(); ++c) {
      u.names.push_back(std::to_string(ds.regions[c].city_id));
      u.cities.push_back({c});
    }
    return u;
  }
  std::vector<ProvinceId> ps;
  for (const auto& r : ds.regions) ps.push_back(r.province_id);
  std::sort(ps.begin(), ps.end());
  ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
  u.cities.resize(ps.size());
  for (auto p : ps) u.names.push_back(std::to_string(p));
  for (std::size_t c = 0; c < ds.regions.size(); ++c) {
    const auto k = std::lower_bound(ps.begin(), ps.end(), ds.regions[c].province_id) - ps.begin();
    u.cities[static_cast<std::size_t>(k)].push_back(c);
  }
  return u;
}

/// Factor value of a unit on a day. Extensive quantities (cases, GDP) are summed over
/// member cities; intensive ones are population-weighted means.
inline double geo_factor_value(const Dataset& ds, const std::vector<std::size_t>& cities,
                               GeoFactor f, int day) {
  double sum = 0.0, weight = 0.0;
  for (std::size_t c : cities) {
    const Region& r = ds.regions[c];
    const double w = static_cast<double>(r.population_count);
    double v = 0.0;
    switch (f) {
      case GeoFactor::kConfirmedCases: {
        for (int d = 0; d <= day && d < static_cast<int>(r.daily_confirmed_cases.size()); ++d) {
          v += static_cast<double>(r.daily_confirmed_cases[static_cast<std::size_t>(d)]);
        }
        sum += v;
        continue;
      }
      case GeoFactor::kGdp: sum += r.gdp; continue;
      case GeoFactor::kDistance: v = r.distance_to_epicenter; break;
      case GeoFactor::kCulturalTightness: v = r.cultural_tightness; break;
      case GeoFactor::kPaddyRice: v = r.paddy_rice_pct; break;
      case GeoFactor::kInnovation: v = r.innovation_index; break;
      case GeoFactor::kIlliteracy: v = r.illiteracy_pct; break;
      case GeoFactor::kMultiEthnic: v = r.multi_ethnic_household_pct; break;
    }
    sum += w * v;
    weight += w;
  }
  if (f == GeoFactor::kConfirmedCases || f == GeoFactor::kGdp) return sum;
  return weight > 0 ? sum / weight : kUndefined;
}

/// Awareness percentage per unit per day ([unit][day]); NaN for units with no cohort members.
inline std::vector<std::vector<double>> geo_awareness(const Dataset& ds, const GeoUnits& units,
                                                      const AwarenessTimeline& tl,
                                                      std::span<const std::size_t> cohort,
                                                      const Calendar& cal) {
  std::vector<std::size_t> unit_of_city(ds.regions.size(), 0);
  for (std::size_t u = 0; u < units.cities.size(); ++u) {
    for (std::size_t c : units.cities[u]) unit_of_city[c] = u;
  }
  GroupLabels labels;
  labels.names = units.names;
  labels.group_of.resize(ds.individuals.size());
  for (std::size_t i = 0; i < ds.individuals.size(); ++i) {
    const Region* r = ds.region(ds.individuals[i].home_city);
    if (!r) throw LookupError("unknown home city for individual " + std::to_string(ds.individuals[i].id));
    labels.group_of[i] = unit_of_city[static_cast<std::size_t>(r - ds.regions.data())];
  }
  return group_trend(tl, cohort, labels, cal).values;
}

/// Per-day Spearman correlation between unit factor values and unit awareness.
/// `factor(unit, day)` supplies the factor; days whose correlation is undefined are NaN.
inline std::vector<double> geo_correlation_series(
    const std::vector<std::vector<double>>& unit_awareness, int n_days,
    const std::function<double(std::size_t, int)>& factor) {
  std::vector<double> out(static_cast<std::size_t>(n_days), kUndefined);
  std::vector<double> xs, ys;
  for (int d = 0; d < n_days; ++d) {
    xs.clear();
    ys.clear();
    for (std::size_t u = 0; u < unit_awareness.size(); ++u) {
      const double a = unit_awareness[u][static_cast<std::size_t>(d)];
      const double f = factor(u, d);
      if (std::isnan(a) || std::isnan(f)) continue;
      xs.push_back(f);
      ys.push_back(a);
    }
    try {
      out[static_cast<std::size_t>(d)] = spearman(xs, ys);
    } catch (const StatisticsError&) {
      // constant or too-short vectors leave a missing point
    }
  }
  return out;
}

inline std::vector<double> geo_correlation_series(const Dataset& ds, GeoFactor factor,
                                                  const AwarenessTimeline& tl,
                                                  std::span<const std::size_t> cohort,
                                                  const Calendar& cal, GeoLevel level) {
  const GeoUnits units = geo_units(ds, level);
  const auto awareness = geo_awareness(ds, units, tl, cohort, cal);
  return geo_correlation_series(awareness, cal.size(), [&](std::size_t u, int d) {
    return geo_factor_value(ds, units.cities[u], factor, d);
  });
}

}  // namespace cryptic
