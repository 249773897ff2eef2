#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace cryptic;

namespace {

const Simulation& shared_sim() {
  static const Simulation sim = [] {
    SimConfig cfg;
    cfg.n_individuals = 5000;
    return simulate(cfg, default_jobs());
  }();
  return sim;
}

std::vector<std::size_t> all_of(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

AwarenessTimeline timeline_on_days(const Calendar& cal, const std::vector<int>& days) {
  std::vector<IndividualId> ids;
  std::vector<Timestamp> t;
  for (std::size_t i = 0; i < days.size(); ++i) {
    ids.push_back(i + 1);
    t.push_back(days[i] < 0 ? kNeverAware : cal.day_start(days[i]) + 3600);
  }
  return {ids, t};
}


}  // namespace

// ---- daily counts and growth -------------------------------------------------

TEST(DailyCounts, NobodyAware) {
  const Calendar cal;
  const auto tl = timeline_on_days(cal, {-1, -1, -1});
  const auto dc = daily_counts(tl, all_of(3), cal);
  EXPECT_TRUE(std::all_of(dc.cumulative.begin(), dc.cumulative.end(), [](auto c) { return c == 0; }));
  EXPECT_TRUE(std::all_of(dc.new_aware.begin(), dc.new_aware.end(), [](auto c) { return c == 0; }));
}

TEST(DailyCounts, FiveOnDayOne) {
  const Calendar cal;
  const auto tl = timeline_on_days(cal, {1, 1, 1, 1, 1, -1});
  const auto dc = daily_counts(tl, all_of(6), cal);
  EXPECT_EQ(dc.cumulative[0], 0);
  for (int d = 1; d < cal.size(); ++d) EXPECT_EQ(dc.cumulative[static_cast<std::size_t>(d)], 5);
  EXPECT_EQ(dc.new_aware[1], 5);
}

TEST(DailyCounts, SimulatorTotalsMatchTruth) {
  const auto& sim = shared_sim();
  const auto& tl = sim.truth.first_aware;
  const auto dc = daily_counts(tl, all_of(tl.size()), sim.dataset.calendar);
  std::int64_t aware = 0;
  for (std::size_t i = 0; i < tl.size(); ++i) aware += tl.first_aware(i).has_value();
  EXPECT_EQ(dc.cumulative.back(), aware);
}

TEST(Growth, RatesReconstructCumulative) {
  const auto& sim = shared_sim();
  const auto& tl = sim.truth.first_aware;
  const auto dc = daily_counts(tl, all_of(tl.size()), sim.dataset.calendar);
  std::vector<double> cum(dc.cumulative.begin(), dc.cumulative.end());
  const auto r = growth_rates(cum);
  double value = 0;
  for (std::size_t d = 0; d < cum.size(); ++d) {
    if (std::isinf(r[d])) {
      value = cum[d];  // restart from the first positive day
    } else if (value == 0) {
      EXPECT_EQ(r[d], 0.0);
    } else {
      value = std::round(value * (1 + r[d]));
    }
    EXPECT_EQ(value, cum[d]) << "day " << d;
  }
}

TEST(Growth, ZeroPreviousDay) {
  EXPECT_EQ(growth_rate(0, 0), 0.0);
  EXPECT_TRUE(std::isinf(growth_rate(0, 0.1)));
  EXPECT_DOUBLE_EQ(growth_rate(0.2, 0.3), 0.5);
  const std::vector<double> s{0.0, NAN, 2.0};
  const auto r = growth_rates(s);
  EXPECT_EQ(r[0], 0.0);
  EXPECT_TRUE(std::isnan(r[1]));
  EXPECT_TRUE(std::isnan(r[2]));
}

// ---- phases ------------------------------------------------------------------

TEST(Phases, FlatZeroIsAllNormal) {
  const std::vector<std::vector<double>> p(3, std::vector<double>(30, 0.0));
  const auto seg = segment_phases(p, std::vector<double>(30, 0.0));
  ASSERT_EQ(seg.spans.size(), 1u);
  EXPECT_EQ(seg.spans[0], (PhaseSpan{Phase::kNormal, 0, 29}));
  EXPECT_TRUE(seg.truncated);
}

TEST(Phases, TwoProvinceFixture) {
  const auto f = fixture::two_provinces();
  const auto seg = segment_phases(f.pct, f.national);
  const std::vector<PhaseSpan> expected{{Phase::kNormal, 0, 2},   {Phase::kBeginning, 3, 4},
                                        {Phase::kGrowth, 5, 7},   {Phase::kPeak, 8, 12},
                                        {Phase::kPostPeak, 13, 19}};
  EXPECT_EQ(seg.spans, expected);
  EXPECT_FALSE(seg.truncated);
  const auto expect = oracle::phase_starts(f.pct, f.national, {});
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(seg.spans[k].start_day, expect[k]);
}

TEST(Phases, ThresholdsAreHonoured) {
  const auto f = fixture::two_provinces();
  PhaseThresholds th;
  th.peak_national = 0.004;  // delays Peak until the national share exceeds 0.4%
  th.post_peak_days = 5;
  const auto seg = segment_phases(f.pct, f.national, th);
  const auto expect = oracle::phase_starts(f.pct, f.national, th);
  ASSERT_EQ(seg.spans.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(seg.spans[k].start_day, expect[k]);
  EXPECT_EQ(seg.start_of(Phase::kPeak), 9);
}

TEST(Phases, ProvinceOrderDoesNotMatter) {
  auto f = fixture::two_provinces();
  const auto a = segment_phases(f.pct, f.national);
  std::swap(f.pct[0], f.pct[1]);
  EXPECT_EQ(segment_phases(f.pct, f.national), a);
}

TEST(Phases, RandomCurvesAreContiguousAndOrdered) {
  StreamRng rng(31, Stream::kSampling, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const int days = 10 + static_cast<int>(rng.below(60));
    const std::size_t np = 1 + rng.below(6);
    std::vector<std::vector<double>> pct(np, std::vector<double>(static_cast<std::size_t>(days)));
    for (auto& s : pct) {
      double v = 0;
      for (auto& x : s) {
        if (rng.bernoulli(0.4)) v += rng.uniform() * (v + 0.0005);
        x = std::min(v, 1.0);
      }
    }
    std::vector<double> nat(static_cast<std::size_t>(days), 0.0);
    for (std::size_t d = 0; d < nat.size(); ++d) {
      for (const auto& s : pct) nat[d] += s[d] / static_cast<double>(np);
    }
    const auto seg = segment_phases(pct, nat);
    ASSERT_FALSE(seg.spans.empty());
    EXPECT_EQ(seg.spans.front().start_day, 0);
    EXPECT_EQ(seg.spans.back().end_day, days - 1);
    for (std::size_t k = 1; k < seg.spans.size(); ++k) {
      EXPECT_EQ(seg.spans[k].start_day, seg.spans[k - 1].end_day + 1);
      EXPECT_GT(seg.spans[k].phase, seg.spans[k - 1].phase);
    }
    EXPECT_EQ(seg.truncated, seg.spans.back().phase != Phase::kPostPeak);
    const auto expect = oracle::phase_starts(pct, nat, {});
    for (const auto& s : seg.spans) EXPECT_EQ(s.start_day, expect[static_cast<std::size_t>(s.phase)]);
    EXPECT_EQ(segment_phases(pct, nat), seg);
  }
}

TEST(Phases, DefaultPresetFollowsShockDesign) {
  const auto seg = fixture::segment(shared_sim());
  ASSERT_EQ(seg.spans.size(), 5u);
  const Calendar& cal = shared_sim().dataset.calendar;
  auto near = [&](Phase p, const char* date) {
    const int design = cal.day_of(parse_local_date(date));
    EXPECT_LE(std::abs(*seg.start_of(p) - design), 1) << to_string(p);
  };
  near(Phase::kBeginning, "2019-12-31");
  near(Phase::kGrowth, "2020-01-20");
  near(Phase::kPeak, "2020-01-23");
}

TEST(Phases, PhaseMeans) {
  PhaseSegmentation seg;
  seg.spans = {{Phase::kNormal, 0, 1}, {Phase::kBeginning, 2, 4}};
  const std::vector<double> v{1, 3, NAN, 4, INFINITY};
  const auto m = phase_means(v, seg);
  EXPECT_DOUBLE_EQ(m[0], 2.0);
  EXPECT_DOUBLE_EQ(m[1], 4.0);
}

// ---- ratios ------------------------------------------------------------------

TEST(CrossGroup, Basics) {
  const Calendar cal;
  std::vector<int> days(2000, -1);
  for (int i = 0; i < 2; ++i) days[static_cast<std::size_t>(i)] = 3;      // 2 of 1000 in g1
  days[1000] = 3;                                                          // 1 of 1000 in g2
  const auto tl = timeline_on_days(cal, days);
  std::vector<std::size_t> g1(1000), g2(1000);
  std::iota(g1.begin(), g1.end(), 0);
  std::iota(g2.begin(), g2.end(), 1000);
  const Timestamp t = cal.day_end(5);
  EXPECT_DOUBLE_EQ(cross_group_ratio(tl, g1, g2, t), 2.0);
  EXPECT_DOUBLE_EQ(cross_group_ratio(tl, g1, g1, t), 1.0);
  EXPECT_TRUE(std::isnan(cross_group_ratio(tl, g1, g2, cal.day_end(0))));
  std::vector<std::size_t> g3(g2.begin() + 1, g2.end());
  EXPECT_TRUE(std::isinf(cross_group_ratio(tl, g1, g3, t)));
}

TEST(CrossGroup, Reciprocal) {
  const auto& sim = shared_sim();
  const auto& ds = sim.dataset;
  const auto labels = group_labels(ds, Grouping::kEducation);
  std::vector<std::vector<std::size_t>> groups(labels.names.size());
  for (std::size_t i = 0; i < ds.individuals.size(); ++i) groups[labels.group_of[i]].push_back(i);
  for (int d = 0; d < ds.calendar.size(); d += 3) {
    const Timestamp t = ds.calendar.day_end(d);
    for (std::size_t a = 0; a < groups.size(); ++a) {
      for (std::size_t b = 0; b < groups.size(); ++b) {
        const double r1 = cross_group_ratio(sim.truth.first_aware, groups[a], groups[b], t);
        const double r2 = cross_group_ratio(sim.truth.first_aware, groups[b], groups[a], t);
        if (std::isfinite(r1) && std::isfinite(r2)) EXPECT_NEAR(r1 * r2, 1.0, 1e-12);
      }
    }
  }
}

TEST(Neighborhood, PathGraph) {
  MultiplexGraph g({1, 2, 3, 4}, {std::vector<Edge>{{0, 1}, {1, 2}, {2, 3}}, {}, {}});
  const AwarenessTimeline tl({1, 2, 3, 4}, {0, 0, kNeverAware, kNeverAware});
  const auto r = neighborhood_awareness_ratio(g, Layer::kFamily, tl, 10);
  EXPECT_EQ(r.status, RatioStatus::kDefined);
  EXPECT_DOUBLE_EQ(r.aware_mean, 0.75);
  EXPECT_DOUBLE_EQ(r.unaware_mean, 0.25);
  EXPECT_DOUBLE_EQ(r.ratio, 3.0);
}

TEST(Neighborhood, SeparateComponentsGiveInfinity) {
  MultiplexGraph g({1, 2, 3, 4}, {std::vector<Edge>{{0, 1}, {2, 3}}, {}, {}});
  const AwarenessTimeline tl({1, 2, 3, 4}, {0, 0, kNeverAware, kNeverAware});
  const auto r = neighborhood_awareness_ratio(g, Layer::kFamily, tl, 10);
  EXPECT_EQ(r.status, RatioStatus::kInfinite);
  EXPECT_TRUE(std::isinf(r.ratio));
  EXPECT_EQ(format_value(r.ratio), "INF");
}

TEST(Neighborhood, EveryoneAwareIsUndefined) {
  MultiplexGraph g({1, 2, 3}, {std::vector<Edge>{{0, 1}, {1, 2}}, {}, {}});
  const AwarenessTimeline tl({1, 2, 3}, {0, 0, 0});
  const auto r = neighborhood_awareness_ratio(g, Layer::kFamily, tl, 10);
  EXPECT_EQ(r.status, RatioStatus::kNoUnawareWithNeighbors);
  EXPECT_TRUE(std::isnan(r.ratio));
  EXPECT_EQ(format_value(r.ratio), "NA");
}

TEST(Neighborhood, MatchesBruteForce) {
  StreamRng rng(500, Stream::kSampling, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto sg = oracle::random_graph(rng);
    std::vector<IndividualId> ids;
    std::vector<Timestamp> t;
    std::vector<Edge> es;
    for (int i = 0; i < sg.n; ++i) {
      ids.push_back(static_cast<IndividualId>(i + 1));
      t.push_back(sg.aware[i] ? 0 : kNeverAware);
      for (int j = i + 1; j < sg.n; ++j) {
        if (sg.adj[i][j]) es.emplace_back(i, j);
      }
    }
    const MultiplexGraph g(ids, {std::vector<Edge>{}, es, std::vector<Edge>{}});
    const auto r = neighborhood_awareness_ratio(g, Layer::kSchoolmate, AwarenessTimeline(ids, t), 1);
    const auto o = oracle::neighborhood_means(sg);
    if (!o.aware_mean) {
      EXPECT_EQ(r.status, RatioStatus::kNoAwareWithNeighbors);
    } else if (!o.unaware_mean) {
      EXPECT_EQ(r.status, RatioStatus::kNoUnawareWithNeighbors);
    } else if (*o.unaware_mean == 0) {
      EXPECT_EQ(r.status, *o.aware_mean == 0 ? RatioStatus::kBothZero : RatioStatus::kInfinite);
    } else {
      EXPECT_EQ(r.status, RatioStatus::kDefined);
      EXPECT_NEAR(r.ratio, *o.aware_mean / *o.unaware_mean, 1e-12);
    }
  }
}

// ---- group trends ------------------------------------------------------------

TEST(GroupTrend, SingleGroupEqualsNational) {
  const auto& sim = shared_sim();
  const auto& ds = sim.dataset;
  const auto cohort = fixture::qualified(ds);
  GroupLabels one{{"all"}, std::vector<std::size_t>(ds.individuals.size(), 0)};
  const auto ts = group_trend(sim.truth.first_aware, cohort, one, ds.calendar);
  EXPECT_EQ(ts.values[0], national_series(sim.truth.first_aware, cohort, ds.calendar));
}

TEST(GroupTrend, WeightedMeanIsNational) {
  const auto& sim = shared_sim();
  const auto& ds = sim.dataset;
  const auto cohort = fixture::qualified(ds);
  const auto labels = group_labels(ds, Grouping::kOccupation);
  const auto ts = group_trend(sim.truth.first_aware, cohort, labels, ds.calendar);
  const auto nat = national_series(sim.truth.first_aware, cohort, ds.calendar);
  for (std::size_t d = 0; d < nat.size(); ++d) {
    double num = 0;
    std::size_t den = 0;
    for (std::size_t g = 0; g < ts.names.size(); ++g) {
      if (ts.sizes[g] == 0) continue;
      num += ts.values[g][d] * static_cast<double>(ts.sizes[g]);
      den += ts.sizes[g];
    }
    EXPECT_NEAR(num / static_cast<double>(den), nat[d], 1e-12);
  }
}

TEST(GroupTrend, EducationGradient) {
  const auto& sim = shared_sim();
  const auto& ds = sim.dataset;
  const auto ts = group_trend(sim.truth.first_aware, fixture::qualified(ds), group_labels(ds, Grouping::kEducation),
                              ds.calendar);
  const auto& post = ts.values[static_cast<std::size_t>(Education::kPostgraduate)];
  const auto& low = ts.values[static_cast<std::size_t>(Education::kCollegeOrLower)];
  int ok = 0;
  for (std::size_t d = 0; d < post.size(); ++d) ok += post[d] >= low[d];
  EXPECT_GE(ok, static_cast<int>(0.9 * static_cast<double>(post.size())));
}

TEST(GroupTrend, EmptyGroupIsNaN) {
  const Calendar cal;
  const auto tl = timeline_on_days(cal, {1, 2});
  GroupLabels gl{{"a", "b"}, {0, 0}};
  const auto ts = group_trend(tl, all_of(2), gl, cal);
  EXPECT_TRUE(std::isnan(ts.values[1][10]));
  EXPECT_DOUBLE_EQ(ts.values[0][1], 0.5);
  EXPECT_THROW(national_series(tl, std::vector<std::size_t>{}, cal), UndefinedCohortError);
}

// ---- purchasing power --------------------------------------------------------

TEST(PurchasingPower, MeanOfAware) {
  std::vector<Individual> people{fixture::person(1), fixture::person(2), fixture::person(3)};
  people[0].purchasing_power = 3;
  people[1].purchasing_power = 5;
  people[2].purchasing_power = 7;
  const AwarenessTimeline tl({1, 2, 3}, {0, 0, kNeverAware});
  GroupLabels gl{{"g", "empty"}, {0, 0, 0}};
  const auto pp = aware_purchasing_power(tl, people, all_of(3), gl, 5);
  EXPECT_DOUBLE_EQ(pp[0], 4.0);
  EXPECT_TRUE(std::isnan(pp[1]));
}

TEST(PurchasingPower, MatchesDirectAveraging) {
  StreamRng rng(50, Stream::kSampling, 0);
  std::vector<Individual> people;
  std::vector<IndividualId> ids;
  std::vector<Timestamp> t;
  GroupLabels gl{{"a", "b", "c"}, {}};
  for (IndividualId id = 1; id <= 50; ++id) {
    auto ind = fixture::person(id);
    ind.purchasing_power = 1 + static_cast<int>(rng.below(7));
    people.push_back(ind);
    ids.push_back(id);
    t.push_back(rng.bernoulli(0.6) ? static_cast<Timestamp>(rng.below(100)) : kNeverAware);
    gl.group_of.push_back(rng.below(3));
  }
  const AwarenessTimeline tl(ids, t);
  const auto pp = aware_purchasing_power(tl, people, all_of(50), gl, 60);
  for (std::size_t g = 0; g < 3; ++g) {
    double s = 0;
    int n = 0;
    for (std::size_t i = 0; i < 50; ++i) {
      if (gl.group_of[i] == g && t[i] <= 60) {
        s += people[i].purchasing_power;
        ++n;
      }
    }
    EXPECT_DOUBLE_EQ(pp[g], s / n);
  }
}

// ---- hysteresis --------------------------------------------------------------

TEST(Hysteresis, TenPercentInTwoHours) {
  std::vector<Timestamp> times(100, 0);
  for (int k = 0; k < 9; ++k) times.push_back(1000 + 3600 + k);
  times.push_back(1000 + 7200);
  times.push_back(1000 + 90000);
  std::sort(times.begin(), times.end());
  const std::vector<double> f{0.10};
  const auto h = hysteresis(times, 1000, f);
  ASSERT_TRUE(h[0]);
  EXPECT_EQ(*h[0], 7200);
}

TEST(Hysteresis, FlatAfterEvent) {
  const std::vector<Timestamp> times{1, 2, 3};
  const auto h = hysteresis(times, 10, default_hysteresis_factors());
  for (const auto& x : h) EXPECT_FALSE(x);
  EXPECT_THROW(hysteresis(times, 0, default_hysteresis_factors()), UndefinedBaselineError);
}

TEST(Hysteresis, MatchesScanOracleAndIsOrdered) {
  SimConfig cfg;
  cfg.n_individuals = 2000;
  cfg.events = {{"seed", "2019-12-05", 11.0, ShockScope::kCity, 1},
                {"national", "2020-01-10", 9.0, ShockScope::kNational, 0}};
  const auto sim = simulate(cfg, 4);
  const auto& tl = sim.truth.first_aware;
  const auto times = aware_times(tl, all_of(tl.size()));
  const Timestamp ev = cfg.events[1].timestamp();
  const std::vector<double> f{0.1, 0.5, 1.0};
  const auto h = hysteresis(times, ev, f);
  std::size_t base = 0;
  for (Timestamp x : tl.raw()) base += x <= ev;
  ASSERT_GT(base, 0u);
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double target = static_cast<double>(base) * (1 + f[k]);
    std::optional<std::int64_t> oracle;
    for (Timestamp cand : tl.raw()) {
      if (cand == kNeverAware || cand <= ev) continue;
      std::size_t count = 0;
      for (Timestamp x : tl.raw()) count += x <= cand;
      if (static_cast<double>(count) >= target && (!oracle || cand - ev < *oracle)) oracle = cand - ev;
    }
    EXPECT_EQ(h[k], oracle) << "factor " << f[k];
  }
  if (h[0] && h[1]) EXPECT_LE(*h[0], *h[1]);
  if (h[1] && h[2]) EXPECT_LE(*h[1], *h[2]);
}

// ---- lead days ---------------------------------------------------------------

TEST(LeadDays, IdenticalFactorizationsTie) {
  TrendSeries a;
  a.names = {"x", "y"};
  a.values = {{0.1, 0.2, 0.4}, {0.2, 0.3, 0.3}};
  const auto r = lead_days(a, a);
  EXPECT_EQ(r.ties, r.defined_days);
  EXPECT_EQ(r.a_leads + r.b_leads, 0);
}

TEST(LeadDays, HandScan) {
  TrendSeries a, b;
  a.values = {{0.1, 0.2, 0.3}, {0.1, 0.1, 0.2}};  // rates: inf,1,.5 and inf,0,1 -> max inf,1,1
  b.values = {{0.2, 0.5, 0.5}};                   // rates: inf,1.5,0
  const auto r = lead_days(a, b);
  EXPECT_EQ(r.defined_days, 3);
  EXPECT_EQ(r.ties, 1);
  EXPECT_EQ(r.a_leads, 1);
  EXPECT_EQ(r.b_leads, 1);
}

TEST(LeadDays, PartitionIdentity) {
  const auto& sim = shared_sim();
  const auto& ds = sim.dataset;
  const auto cohort = fixture::qualified(ds);
  const auto a = group_trend(sim.truth.first_aware, cohort, group_labels(ds, Grouping::kOccupation), ds.calendar);
  const auto b = group_trend(sim.truth.first_aware, cohort, group_labels(ds, Grouping::kPurchasingPower), ds.calendar);
  const auto r = lead_days(a, b);
  EXPECT_EQ(r.a_leads + r.b_leads + r.ties, r.defined_days);
  EXPECT_EQ(r.defined_days, ds.calendar.size());
}

// ---- geography ---------------------------------------------------------------

TEST(Geo, AwarenessAgainstItself) {
  const std::vector<std::vector<double>> aw{{0.1, 0.2}, {0.3, 0.1}, {0.2, 0.4}};
  const auto rho = geo_correlation_series(aw, 2, [&](std::size_t u, int d) { return aw[u][static_cast<std::size_t>(d)]; });
  EXPECT_DOUBLE_EQ(rho[0], 1.0);
  EXPECT_DOUBLE_EQ(rho[1], 1.0);
}

TEST(Geo, ConstantFactorLeavesGaps) {
  const std::vector<std::vector<double>> aw{{0.1, 0.2}, {0.3, 0.1}, {0.2, 0.4}};
  const auto rho = geo_correlation_series(aw, 2, [](std::size_t, int) { return 7.0; });
  EXPECT_TRUE(std::isnan(rho[0]));
  EXPECT_TRUE(std::isnan(rho[1]));
}

TEST(Geo, DistanceCorrelationNegativeAfterOnset) {
  SimConfig cfg;
  cfg.n_individuals = 10000;
  cfg.hazard.distance_coef = 2.5;
  const auto sim = simulate(cfg, default_jobs());
  const auto& ds = sim.dataset;
  const auto cohort = fixture::qualified(ds);
  const auto rho = geo_correlation_series(ds, GeoFactor::kDistance, sim.truth.first_aware, cohort, ds.calendar,
                                          GeoLevel::kProvince);
  const auto seg = fixture::segment(sim);
  ASSERT_TRUE(seg.start_of(Phase::kBeginning));
  int defined = 0;
  for (int d = *seg.start_of(Phase::kBeginning); d < ds.calendar.size(); ++d) {
    const double r = rho[static_cast<std::size_t>(d)];
    if (std::isnan(r)) continue;
    ++defined;
    EXPECT_LT(r, 0.0) << ds.calendar.date_label(d);
  }
  EXPECT_GT(defined, 20);
}

TEST(Geo, FactorAggregation) {
  Dataset ds;
  ds.regions = {fixture::region(1, 1, 0, 3), fixture::region(2, 1, 100, 3)};
  ds.regions[0].population_count = 1;
  ds.regions[1].population_count = 3;
  ds.regions[0].daily_confirmed_cases = {1, 2, 3};
  ds.regions[1].daily_confirmed_cases = {0, 5, 0};
  const auto u = geo_units(ds, GeoLevel::kProvince);
  ASSERT_EQ(u.cities.size(), 1u);
  EXPECT_DOUBLE_EQ(geo_factor_value(ds, u.cities[0], GeoFactor::kDistance, 0), 75.0);
  EXPECT_DOUBLE_EQ(geo_factor_value(ds, u.cities[0], GeoFactor::kConfirmedCases, 1), 8.0);
  EXPECT_DOUBLE_EQ(geo_factor_value(ds, u.cities[0], GeoFactor::kGdp, 0), 300.0);
}
