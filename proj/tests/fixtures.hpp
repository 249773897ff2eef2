// Small hand-built datasets and a scratch directory for tests.
#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <unistd.h>

#include "cryptic.hpp"

namespace fixture {

namespace fs = std::filesystem;

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = fs::temp_directory_path() /
            ("cryptic_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
  fs::path path_;
};

inline void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

inline cryptic::Region region(cryptic::CityId city, cryptic::ProvinceId province, double distance,
                              int n_days = 88) {
  cryptic::Region r;
  r.city_id = city;
  r.province_id = province;
  r.name = "city" + std::to_string(city);
  r.distance_to_epicenter = distance;
  r.gdp = 100.0 * static_cast<double>(city);
  r.daily_confirmed_cases.assign(static_cast<std::size_t>(n_days), 0);
  r.population_count = 1000;
  return r;
}

inline cryptic::Individual person(cryptic::IndividualId id, cryptic::CityId city = 1) {
  cryptic::Individual ind;
  ind.id = id;
  ind.age = 30;
  ind.purchasing_power = 4;
  ind.home_city = city;
  ind.qualified = true;
  return ind;
}

/// Ten individuals over two cities with one home per person and one query each.
inline cryptic::Dataset small_dataset() {
  cryptic::Dataset ds;
  ds.regions = {region(1, 1, 0.0), region(2, 2, 800.0)};
  for (cryptic::IndividualId id = 1; id <= 10; ++id) {
    auto ind = person(id, id <= 5 ? 1 : 2);
    ind.gender = id % 2 ? cryptic::Gender::kFemale : cryptic::Gender::kMale;
    ind.purchasing_power = static_cast<int>(1 + id % 7);
    ind.age = static_cast<int>(18 + 4 * id);
    ds.individuals.push_back(ind);
    ds.addresses.push_back({id, 1000 + (id + 1) / 2, cryptic::AddressKind::kHome,
                            ds.calendar.start() - 86400 * 365, ds.calendar.end()});
    ds.events.queries.push_back({id, ds.calendar.day_start(static_cast<int>(id)) + 60, "n95 face mask"});
    ds.events.purchases.push_back({id, ds.calendar.day_start(3) + static_cast<cryptic::Timestamp>(id),
                                   "food", false});
  }
  ds.sort_canonical();
  return ds;
}

// Two provinces over 20 days, built so each rule first holds on a known day with the
// default thresholds: Beginning 3, Growth 5, Peak 8, PostPeak 13.
struct TwoProvinces {
  std::vector<std::vector<double>> pct;
  std::vector<double> national;
};

inline TwoProvinces two_provinces() {
  TwoProvinces f;
  f.pct = {
      {0, 0, 0, 0.0001, 0.00015, 0.0002, 0.0003, 0.001, 0.003, 0.01, 0.03, 0.06, 0.08, 0.085, 0.088,
       0.09, 0.091, 0.092, 0.0925, 0.093},
      {0, 0, 0, 0, 0, 0.0001, 0.0002, 0.0008, 0.002, 0.008, 0.02, 0.05, 0.07, 0.075, 0.078, 0.08,
       0.081, 0.0815, 0.082, 0.0822},
  };
  f.national.resize(20);
  for (std::size_t d = 0; d < 20; ++d) f.national[d] = 0.5 * (f.pct[0][d] + f.pct[1][d]);
  return f;
}

/// Qualified cohort (timeline indices) of a simulated dataset.
inline std::vector<std::size_t> qualified(const cryptic::Dataset& ds) {
  std::vector<std::size_t> c;
  for (std::size_t i = 0; i < ds.individuals.size(); ++i) {
    if (ds.individuals[i].qualified) c.push_back(i);
  }
  return c;
}

/// Phase segmentation of a simulation's ground-truth curve over its qualified cohort.
inline cryptic::PhaseSegmentation segment(const cryptic::Simulation& sim,
                                          const cryptic::PhaseThresholds& th = {}) {
  const auto& ds = sim.dataset;
  const auto cohort = qualified(ds);
  const auto labels = cryptic::group_labels(ds, cryptic::Grouping::kProvince);
  const auto trend = cryptic::group_trend(sim.truth.first_aware, cohort, labels, ds.calendar);
  return cryptic::segment_phases(trend.values, cryptic::national_series(sim.truth.first_aware, cohort, ds.calendar), th);
}

}  // namespace fixture
