#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "fixtures.hpp"

using namespace cryptic;

namespace {

const Simulation& shared_sim() {
  static const Simulation sim = [] {
    SimConfig cfg;
    cfg.n_individuals = 6000;
    cfg.rng_seed = 11;
    return simulate(cfg, default_jobs());
  }();
  return sim;
}

// Random population over a few cities, a random three-layer graph that omits some
// individuals, and random first-aware times.
struct World {
  Dataset ds;
  MultiplexGraph g;
  AwarenessTimeline tl;
};

World random_world(std::size_t n, std::uint32_t seed) {
  std::mt19937_64 rng(seed);
  World w;
  w.ds.regions = {fixture::region(1, 1, 0.0), fixture::region(2, 1, 350.0), fixture::region(3, 2, 1200.0),
                  fixture::region(4, 3, 2900.0)};
  std::uniform_int_distribution<int> age(12, 80), pp(1, 7), occ(0, 6), edu(0, 2), city(1, 5), coin(0, 1);
  for (std::size_t i = 0; i < n; ++i) {
    Individual ind;
    ind.id = 100 + 3 * i;
    ind.gender = coin(rng) ? Gender::kFemale : Gender::kMale;
    ind.age = age(rng);
    ind.education = static_cast<Education>(edu(rng));
    ind.occupation = static_cast<Occupation>(occ(rng));
    ind.purchasing_power = pp(rng);
    ind.has_child = coin(rng);
    ind.married = coin(rng);
    ind.home_city = static_cast<CityId>(city(rng));  // city 5 has no region row
    ind.qualified = true;
    w.ds.individuals.push_back(ind);
  }
  w.ds.sort_canonical();

  // Graph over the first 90% of ids only.
  std::vector<IndividualId> nodes;
  for (std::size_t i = 0; i < n * 9 / 10; ++i) nodes.push_back(w.ds.individuals[i].id);
  std::array<std::vector<Edge>, 3> edges;
  std::uniform_int_distribution<NodeIndex> pick(0, static_cast<NodeIndex>(nodes.size() - 1));
  for (auto& es : edges) {
    for (std::size_t k = 0; k < 2 * n; ++k) es.emplace_back(pick(rng), pick(rng));
  }
  w.g = MultiplexGraph(nodes, edges);

  const Calendar cal;
  std::uniform_int_distribution<int> day(-20, cal.size() - 1);
  std::vector<Timestamp> first;
  for (std::size_t i = 0; i < n; ++i) {
    const int d = day(rng);
    first.push_back(d < 0 ? kNeverAware : cal.day_start(d) + 7200);
  }
  w.tl = AwarenessTimeline(w.ds.ids(), first);
  return w;
}

// Column-by-column encoder written against the feature names, independent of DesignBuilder.
Eigen::MatrixXd hand_encode(const World& w, const std::vector<std::size_t>& sample, Timestamp t) {
  const auto names = feature_names({});
  const auto n = static_cast<Eigen::Index>(sample.size());
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(names.size()));
  const std::set<std::size_t> in_sample(sample.begin(), sample.end());

  auto zscore = [](std::vector<double> v) {
    double mean = 0, var = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / static_cast<double>(v.size()));
    for (double& x : v) x = sd > 0 ? (x - mean) / sd : 0.0;
    return v;
  };
  std::vector<double> age, dist, pp;
  for (std::size_t i : sample) {
    const auto& ind = w.ds.individuals[i];
    age.push_back(ind.age);
    const Region* r = w.ds.region(ind.home_city);
    dist.push_back(r ? r->distance_to_epicenter : 0.0);
    pp.push_back(ind.purchasing_power);
  }
  age = zscore(age);
  dist = zscore(dist);
  pp = zscore(pp);

  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& ind = w.ds.individuals[sample[static_cast<std::size_t>(r)]];
    for (std::size_t c = 0; c < names.size(); ++c) {
      const std::string& f = names[c];
      double v = 0.0;
      if (f == "intercept") v = 1;
      else if (f == "female") v = ind.gender == Gender::kFemale;
      else if (f == "age") v = age[static_cast<std::size_t>(r)];
      else if (f.rfind("occ_", 0) == 0) v = f.substr(4) == to_string(ind.occupation);
      else if (f == "edu_college_or_lower") v = ind.education == Education::kCollegeOrLower;
      else if (f == "edu_postgraduate") v = ind.education == Education::kPostgraduate;
      else if (f == "distance_to_epicenter") v = dist[static_cast<std::size_t>(r)];
      else if (f == "purchasing_power") v = pp[static_cast<std::size_t>(r)];
      else if (f == "has_child") v = ind.has_child;
      else if (f == "married") v = ind.married;
      X(r, static_cast<Eigen::Index>(c)) = v;
    }
    // Neighbors from the edge lists, excluding sample members.
    for (std::size_t l = 0; l < 3; ++l) {
      std::set<IndividualId> nbrs;
      for (const auto& [a, b] : w.g.edges(kLayers[l])) {
        if (w.g.id_of(a) == ind.id) nbrs.insert(w.g.id_of(b));
        if (w.g.id_of(b) == ind.id) nbrs.insert(w.g.id_of(a));
      }
      std::size_t total = 0, aware = 0;
      for (IndividualId id : nbrs) {
        const std::size_t j = *w.ds.index_of(id);
        if (in_sample.count(j)) continue;
        ++total;
        aware += w.tl.label(j, t);
      }
      const auto pct = static_cast<Eigen::Index>(std::find(names.begin(), names.end(),
                                                           std::string(kLayerNames[l]) + "_aware_pct") -
                                                 names.begin());
      X(r, pct) = total ? static_cast<double>(aware) / static_cast<double>(total) : 0.0;
      X(r, pct + 3) = total ? 1.0 : 0.0;
    }
  }
  return X;
}

std::vector<std::size_t> first_n(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

CheckpointModel fake_model(const std::vector<std::string>& features, Timestamp t, double p, double coef) {
  CheckpointModel m;
  m.checkpoint = {"x", t, 0};
  m.features = features;
  m.used.assign(features.size(), 1);
  m.coefficients.assign(features.size(), coef);
  m.odds_ratios.assign(features.size(), std::exp(coef));
  m.p_values.assign(features.size(), p);
  m.std_errors.assign(features.size(), 1.0);
  m.z.assign(features.size(), coef);
  return m;
}

}  // namespace

TEST(Features, ColumnCounts) {
  EXPECT_EQ(feature_names({}).size(), 21u);
  EXPECT_EQ(feature_names({.age_brackets = true}).size(), 23u);
  EXPECT_EQ(feature_names({.age_brackets = false, .network = false}).size(), 15u);
  const auto names = feature_names({});
  EXPECT_EQ(std::set<std::string>(names.begin(), names.end()).size(), names.size());
  EXPECT_EQ(std::count(names.begin(), names.end(), "occ_white_collar"), 0);
  EXPECT_EQ(std::count(names.begin(), names.end(), "edu_bachelor"), 0);
}

TEST(Design, OneIndividualHasSpecWidth) {
  const World w = random_world(30, 1);
  for (const FeatureSpec spec : {FeatureSpec{}, FeatureSpec{true, true}, FeatureSpec{false, false}}) {
    const auto [X, y] = build_design(w.ds, w.g, w.tl, {4}, Calendar{}.day_start(40), spec);
    EXPECT_EQ(X.rows(), 1);
    EXPECT_EQ(static_cast<std::size_t>(X.cols()), feature_names(spec).size());
    EXPECT_EQ(y.size(), 1);
  }
}

TEST(Design, AllZeroBeforeAnyoneAware) {
  const World w = random_world(200, 2);
  const auto [X, y] = build_design(w.ds, w.g, w.tl, first_n(100), Calendar{}.start() - 1);
  EXPECT_EQ(y.sum(), 0.0);
  const auto names = feature_names({});
  for (std::size_t l = 0; l < 3; ++l) {
    const auto c = std::find(names.begin(), names.end(), std::string(kLayerNames[l]) + "_aware_pct") - names.begin();
    EXPECT_EQ(X.col(c).sum(), 0.0);
  }
}

TEST(Design, MatchesHandEncoder) {
  for (std::uint32_t seed : {3u, 4u, 5u}) {
    const World w = random_world(200, seed);
    std::vector<std::size_t> sample;
    for (std::size_t i = 0; i < 200; i += 2) sample.push_back(i);
    for (int day : {10, 45, 87}) {
      const Timestamp t = Calendar{}.day_start(day) + 7200;
      const auto [X, y] = build_design(w.ds, w.g, w.tl, sample, t);
      const Eigen::MatrixXd expect = hand_encode(w, sample, t);
      ASSERT_EQ(X.rows(), expect.rows());
      ASSERT_EQ(X.cols(), expect.cols());
      EXPECT_LT((X - expect).cwiseAbs().maxCoeff(), 1e-12) << "seed " << seed << " day " << day;
      for (std::size_t r = 0; r < sample.size(); ++r) {
        EXPECT_EQ(y[static_cast<Eigen::Index>(r)], w.tl.label(sample[r], t) ? 1.0 : 0.0);
      }
    }
  }
}

TEST(Design, MissingFromGraphIsDegreeZero) {
  const World w = random_world(100, 6);
  // The last tenth of individuals are not graph nodes.
  const auto [X, y] = build_design(w.ds, w.g, w.tl, {95, 96, 97}, Calendar{}.end());
  EXPECT_EQ(X.rightCols(6).cwiseAbs().sum(), 0.0);
}

TEST(Design, MisalignedTimelineRejected) {
  const World w = random_world(50, 7);
  const AwarenessTimeline short_tl({1, 2}, {0, 0});
  EXPECT_THROW(DesignBuilder(w.ds, w.g, short_tl, {0}), std::invalid_argument);
}

TEST(Design, StandardizedColumnsHaveUnitScale) {
  const World w = random_world(400, 8);
  const auto [X, y] = build_design(w.ds, w.g, w.tl, first_n(400), Calendar{}.end());
  const auto names = feature_names({});
  for (const char* f : {"age", "distance_to_epicenter", "purchasing_power"}) {
    const auto c = std::find(names.begin(), names.end(), f) - names.begin();
    const double mean = X.col(c).mean();
    const double var = (X.col(c).array() - mean).square().mean();
    EXPECT_NEAR(mean, 0.0, 1e-12) << f;
    EXPECT_NEAR(var, 1.0, 1e-12) << f;
  }
}

TEST(Sample, DrawIsSortedSubsetAndDeterministic) {
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < 500; ++i) pool.push_back(3 * i + 1);
  const auto a = draw_sample(pool, 120, 9);
  EXPECT_EQ(a.size(), 120u);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_EQ(std::adjacent_find(a.begin(), a.end()), a.end());
  for (auto v : a) EXPECT_TRUE(std::binary_search(pool.begin(), pool.end(), v));
  EXPECT_EQ(a, draw_sample(pool, 120, 9));
  EXPECT_NE(a, draw_sample(pool, 120, 10));
  EXPECT_EQ(draw_sample(pool, 9999, 1).size(), pool.size());
}

TEST(Checkpoints, SeriesReachingThreePercent) {
  // 100 individuals, 3 of them aware.
  const std::vector<Timestamp> times{1000, 2000, 3000};
  const auto s = checkpoint_schedule(times, 100, {});
  ASSERT_EQ(s.entries.size(), 3u);
  EXPECT_EQ(s.missing_percentages, 92);
  EXPECT_EQ(s.entries[0].trigger, "pct_1");
  EXPECT_EQ(s.entries[2].time, 3000);

  const auto events = default_events();
  EXPECT_EQ(checkpoint_schedule(times, 100, events).entries.size(), 3u + events.size());
}

TEST(Checkpoints, FullSeriesWithDefaultEventsGives106) {
  std::vector<Timestamp> times;
  const Calendar cal;
  for (int i = 0; i < 1000; ++i) times.push_back(cal.start() + 6000 * i);
  const auto s = checkpoint_schedule(times, 1000, default_events());
  EXPECT_EQ(s.entries.size(), 106u);
  EXPECT_EQ(s.missing_percentages, 0);
  EXPECT_TRUE(std::is_sorted(s.entries.begin(), s.entries.end(),
                             [](const auto& a, const auto& b) { return a.time < b.time; }));
}

TEST(Checkpoints, CoincidentEventKept) {
  const std::vector<Timestamp> times{Calendar{}.day_start(30), Calendar{}.day_start(31)};
  ShockEvent ev{"same", "2019-12-31", 1.0, ShockScope::kNational, 0};
  ASSERT_EQ(ev.timestamp(), times[0]);
  const auto s = checkpoint_schedule(times, 100, std::vector<ShockEvent>{ev});
  ASSERT_EQ(s.entries.size(), 3u);
  EXPECT_EQ(s.entries[0].time, s.entries[1].time);
  EXPECT_EQ(s.entries[0].trigger, "pct_1");
  EXPECT_EQ(s.entries[1].trigger, "event:same");
}

TEST(Checkpoints, UnsortedTimesRejected) {
  const std::vector<Timestamp> times{5, 3};
  EXPECT_THROW(checkpoint_schedule(times, 10, {}), std::invalid_argument);
}

TEST(Checkpoints, SimulatedTimesMatchLinearScan) {
  const auto& sim = shared_sim();
  const auto coh = fixture::qualified(sim.dataset);
  const auto times = aware_times(sim.truth.first_aware, coh);
  const auto s = checkpoint_schedule(times, coh.size(), {});

  // Walk every individual's awareness time in order and record each first crossing.
  std::map<int, Timestamp> expect;
  std::size_t count = 0;
  for (Timestamp t : times) {
    ++count;
    const double pct = 100.0 * static_cast<double>(count) / static_cast<double>(coh.size());
    for (int k = 1; k <= 95; ++k) {
      if (pct >= k && !expect.count(k)) expect[k] = t;
    }
  }
  ASSERT_EQ(s.entries.size(), expect.size());
  for (const auto& c : s.entries) EXPECT_EQ(c.time, expect.at(c.percent)) << c.trigger;
}

TEST(TimeEvolving, EmptySchedule) {
  const World w = random_world(50, 9);
  const DesignBuilder b(w.ds, w.g, w.tl, first_n(25));
  EXPECT_TRUE(run_time_evolving(b, {}).empty());
}

TEST(TimeEvolving, ThreeCheckpointsKeepOrderAndRecordErrors) {
  const World w = random_world(300, 10);
  const DesignBuilder b(w.ds, w.g, w.tl, first_n(150));
  const Calendar cal;
  const std::vector<Checkpoint> sched{{"early", cal.start() - 10, 0}, {"mid", cal.day_start(40), 0},
                                      {"late", cal.day_start(70), 0}};
  const auto models = run_time_evolving(b, sched, {}, 3);
  ASSERT_EQ(models.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(models[k].checkpoint, sched[k]);
  // Nobody aware before the window: the outcome is constant, but the series continues.
  ASSERT_TRUE(models[0].error.has_value());
  EXPECT_FALSE(models[1].error.has_value());
  EXPECT_FALSE(models[2].error.has_value());
  EXPECT_EQ(models[0].prevalence, 0.0);
}

TEST(TimeEvolving, ParallelMatchesSerial) {
  const auto& sim = shared_sim();
  const auto coh = fixture::qualified(sim.dataset);
  const DesignBuilder b(sim.dataset, sim.truth.graph, sim.truth.first_aware, draw_sample(coh, 1000, 3));
  const auto s = checkpoint_schedule(aware_times(sim.truth.first_aware, coh), coh.size(), default_events());
  const auto serial = run_time_evolving(b, s.entries, {}, 1);
  const auto parallel = run_time_evolving(b, s.entries, {}, 4);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t k = 0; k < serial.size(); ++k) {
    EXPECT_EQ(serial[k].error, parallel[k].error);
    for (std::size_t j = 0; j < serial[k].coefficients.size(); ++j) {
      const double a = serial[k].coefficients[j], c = parallel[k].coefficients[j];
      EXPECT_TRUE((std::isnan(a) && std::isnan(c)) || a == c);
    }
  }
}

TEST(TimeEvolving, OddsRatiosAndPValuesWellFormed) {
  const auto& sim = shared_sim();
  const auto coh = fixture::qualified(sim.dataset);
  const DesignBuilder b(sim.dataset, sim.truth.graph, sim.truth.first_aware, draw_sample(coh, 2000, 5));
  const auto s = checkpoint_schedule(aware_times(sim.truth.first_aware, coh), coh.size(), default_events());
  for (const auto& m : run_time_evolving(b, s.entries, {}, default_jobs())) {
    if (m.error) continue;
    for (std::size_t j = 0; j < m.features.size(); ++j) {
      if (!m.used[j]) {
        EXPECT_TRUE(std::isnan(m.coefficients[j]));
        continue;
      }
      EXPECT_DOUBLE_EQ(m.odds_ratios[j], std::exp(m.coefficients[j]));
      EXPECT_GT(m.odds_ratios[j], 0.0);
      EXPECT_GE(m.p_values[j], 0.0);
      EXPECT_LE(m.p_values[j], 1.0);
    }
  }
}

TEST(TimeEvolving, PrevalenceTracksPercentage) {
  const auto& sim = shared_sim();
  const auto coh = fixture::qualified(sim.dataset);
  const std::size_t n = coh.size() / 2;
  const DesignBuilder b(sim.dataset, sim.truth.graph, sim.truth.first_aware, draw_sample(coh, n, 8));
  const auto s = checkpoint_schedule(aware_times(sim.truth.first_aware, coh), coh.size(), {});
  int outside = 0;
  for (const auto& c : s.entries) {
    const auto [X, y] = b.build(c.time);
    const double p = c.percent / 100.0;
    const double half = 2.576 * std::sqrt(p * (1 - p) / static_cast<double>(n)) + 1.0 / static_cast<double>(n);
    if (std::fabs(y.mean() - p) > half) ++outside;
  }
  // A 99% band allows roughly one miss in 95.
  EXPECT_LE(outside, 3);
}

TEST(TimeEvolving, RescaledDistanceLeavesFitUnchanged) {
  const World w = random_world(400, 12);
  World scaled = w;
  // Pure scaling; the unmatched city keeps distance 0 either way.
  for (auto& r : scaled.ds.regions) r.distance_to_epicenter *= 3.7;
  const Checkpoint cp{"mid", Calendar{}.day_start(50), 0};
  const auto a = fit_checkpoint(DesignBuilder(w.ds, w.g, w.tl, first_n(200)), cp);
  const auto c = fit_checkpoint(DesignBuilder(scaled.ds, scaled.g, scaled.tl, first_n(200)), cp);
  ASSERT_FALSE(a.error);
  ASSERT_FALSE(c.error);
  for (std::size_t j = 0; j < a.coefficients.size(); ++j) {
    EXPECT_NEAR(a.coefficients[j], c.coefficients[j], 1e-9) << a.features[j];
  }
}

TEST(TimeEvolving, RecoversGeneratingSignsMidRange) {
  const auto& sim = shared_sim();
  const auto coh = fixture::qualified(sim.dataset);
  const DesignBuilder b(sim.dataset, sim.truth.graph, sim.truth.first_aware, draw_sample(coh, coh.size() / 2, 1));
  const auto s = checkpoint_schedule(aware_times(sim.truth.first_aware, coh), coh.size(), {});
  std::vector<Checkpoint> mid;
  for (const auto& c : s.entries) {
    if (c.percent >= 30 && c.percent <= 50) mid.push_back(c);
  }
  const auto models = run_time_evolving(b, mid, {}, default_jobs());
  // Signs fixed by the default hazard coefficients.
  const std::vector<std::pair<std::string, int>> expect{{"edu_postgraduate", +1},
                                                        {"edu_college_or_lower", -1},
                                                        {"distance_to_epicenter", -1},
                                                        {"family_aware_pct", +1}};
  for (const auto& m : models) {
    ASSERT_FALSE(m.error) << m.checkpoint.trigger;
    for (const auto& [f, sign] : expect) {
      const auto j = *m.column(f);
      EXPECT_EQ(m.coefficients[j] > 0 ? 1 : -1, sign) << f << " at " << m.checkpoint.trigger;
      EXPECT_LT(m.p_values[j], 0.05) << f << " at " << m.checkpoint.trigger;
    }
  }
}

TEST(Profile, InsignificantModelsGiveEmptyProfile) {
  const auto names = feature_names({});
  const Calendar cal;
  std::vector<CheckpointModel> models;
  for (int d = 0; d < 88; d += 4) models.push_back(fake_model(names, cal.day_start(d) + 1, 0.5, 1.0));
  const PhaseSegmentation seg{{{Phase::kNormal, 0, 29}, {Phase::kBeginning, 30, 87}}, true};
  const auto prof = typical_profile(models, seg, cal);
  ASSERT_EQ(prof.size(), 2u);
  for (const auto& p : prof) {
    EXPECT_GT(p.models, 0);
    EXPECT_TRUE(p.features.empty());
  }
}

TEST(Profile, ConsistentlySignificantFeatureListed) {
  const auto names = feature_names({});
  const Calendar cal;
  const auto female = static_cast<std::size_t>(std::find(names.begin(), names.end(), "female") - names.begin());
  const auto married = static_cast<std::size_t>(std::find(names.begin(), names.end(), "married") - names.begin());
  std::vector<CheckpointModel> models;
  for (int d = 0; d < 10; ++d) {
    auto m = fake_model(names, cal.day_start(d), 0.5, 0.3);
    m.p_values[0] = 1e-6;  // intercept is never reported
    m.p_values[female] = 0.001;
    m.p_values[married] = 0.01;
    m.coefficients[married] = -0.4;
    m.odds_ratios[married] = std::exp(-0.4);
    models.push_back(m);
  }
  models[3].error = "failed";
  const PhaseSegmentation seg{{{Phase::kNormal, 0, 9}}, true};
  const auto prof = typical_profile(models, seg, cal);
  ASSERT_EQ(prof.size(), 1u);
  EXPECT_EQ(prof[0].models, 9);
  const std::vector<ProfileEntry> expect{{"female", +1}, {"married", -1}};
  EXPECT_EQ(prof[0].features, expect);
}

TEST(Profile, NeedsStrictMajority) {
  const auto names = feature_names({});
  const Calendar cal;
  std::vector<CheckpointModel> models;
  for (int d = 0; d < 4; ++d) models.push_back(fake_model(names, cal.day_start(d), d < 2 ? 0.01 : 0.5, 0.3));
  const PhaseSegmentation seg{{{Phase::kNormal, 0, 9}}, true};
  EXPECT_TRUE(typical_profile(models, seg, cal)[0].features.empty());
}
