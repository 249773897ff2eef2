#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cryptic/analytics.hpp"
#include "cryptic/awareness.hpp"
#include "cryptic/logistic.hpp"
#include "cryptic/netinfer.hpp"
#include "cryptic/parallel.hpp"
#include "cryptic/rng.hpp"
#include "cryptic/simulate.hpp"
#include "cryptic/types.hpp"

namespace cryptic {

/// Design-matrix encoding. References: male, bachelor, white_collar, age 25-49
/// (bracket mode), no child, unmarried.
struct FeatureSpec {
  bool age_brackets = false;  // replace standardized age with bracket dummies
  bool network = true;        // layer percentages plus degree-presence indicators
};

inline std::vector<std::string> feature_names(const FeatureSpec& spec) {
  std::vector<std::string> names{"intercept", "female"};
  if (spec.age_brackets) {
    names.insert(names.end(), {"age_lt18", "age_18_24", "age_ge50"});
  } else {
    names.emplace_back("age");
  }
  for (std::size_t o = 0; o < kOccupationNames.size(); ++o) {
    if (static_cast<Occupation>(o) == Occupation::kWhiteCollar) continue;
    names.push_back("occ_" + std::string(kOccupationNames[o]));
  }
  names.insert(names.end(), {"edu_college_or_lower", "edu_postgraduate", "distance_to_epicenter",
                             "purchasing_power", "has_child", "married"});
  if (spec.network) {
    for (auto l : kLayerNames) names.push_back(std::string(l) + "_aware_pct");
    for (auto l : kLayerNames) names.push_back("has_" + std::string(l));
  }
  return names;
}

/// Builds (X, y) at arbitrary times for a fixed sample. Network features count only
/// neighbors outside the sample; individuals absent from the graph get degree 0.
/// Timeline indices must align with dataset individuals.
class DesignBuilder {
 public:
  DesignBuilder(const Dataset& ds, const MultiplexGraph& g, const AwarenessTimeline& tl,
                std::vector<std::size_t> sample, FeatureSpec spec = {})
      : tl_(&tl), sample_(std::move(sample)), spec_(spec), names_(feature_names(spec)) {
    if (tl.size() != ds.individuals.size()) {
      throw std::invalid_argument("timeline is not aligned with the dataset");
    }
    build_static(ds);
    if (spec_.network) build_neighbors(ds, g);
  }

  const std::vector<std::string>& columns() const { return names_; }
  const std::vector<std::size_t>& sample() const { return sample_; }

  std::pair<Eigen::MatrixXd, Eigen::VectorXd> build(Timestamp t) const {
    const auto n = static_cast<Eigen::Index>(sample_.size());
    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(names_.size()));
    Eigen::VectorXd y(n);
    X.leftCols(static_cast<Eigen::Index>(n_static_)) = static_;
    for (Eigen::Index r = 0; r < n; ++r) {
      y[r] = tl_->label(sample_[static_cast<std::size_t>(r)], t) ? 1.0 : 0.0;
      if (!spec_.network) continue;
      for (std::size_t l = 0; l < 3; ++l) {
        const auto& off = offsets_[l];
        const std::size_t b = off[static_cast<std::size_t>(r)];
        const std::size_t e = off[static_cast<std::size_t>(r) + 1];
        std::size_t aware = 0;
        for (std::size_t k = b; k < e; ++k) aware += tl_->label(nbrs_[l][k], t) ? 1 : 0;
        const auto c = static_cast<Eigen::Index>(n_static_ + l);
        X(r, c) = e > b ? static_cast<double>(aware) / static_cast<double>(e - b) : 0.0;
        X(r, c + 3) = e > b ? 1.0 : 0.0;
      }
    }
    return {std::move(X), std::move(y)};
  }

 private:
  static void standardize(Eigen::Ref<Eigen::VectorXd> col) {
    const double n = static_cast<double>(col.size());
    if (n == 0) return;
    const double mean = col.sum() / n;
    const double sd = std::sqrt((col.array() - mean).square().sum() / n);
    if (sd > 0) {
      col = (col.array() - mean) / sd;
    } else {
      col.setZero();
    }
  }

  void build_static(const Dataset& ds) {
    n_static_ = names_.size() - (spec_.network ? 6 : 0);
    const auto n = static_cast<Eigen::Index>(sample_.size());
    static_.setZero(n, static_cast<Eigen::Index>(n_static_));
    Eigen::Index age_col = -1, dist_col = -1, pp_col = -1;
    for (Eigen::Index r = 0; r < n; ++r) {
      const Individual& ind = ds.individuals[sample_[static_cast<std::size_t>(r)]];
      const Region* region = ds.region(ind.home_city);
      Eigen::Index c = 0;
      static_(r, c++) = 1.0;
      static_(r, c++) = ind.gender == Gender::kFemale ? 1.0 : 0.0;
      if (spec_.age_brackets) {
        const AgeBracket b = age_bracket(ind.age);
        static_(r, c++) = b == AgeBracket::kUnder18 ? 1.0 : 0.0;
        static_(r, c++) = b == AgeBracket::k18To24 ? 1.0 : 0.0;
        static_(r, c++) = b == AgeBracket::k50Plus ? 1.0 : 0.0;
      } else {
        age_col = c;
        static_(r, c++) = ind.age;
      }
      for (std::size_t o = 0; o < kOccupationNames.size(); ++o) {
        if (static_cast<Occupation>(o) == Occupation::kWhiteCollar) continue;
        static_(r, c++) = static_cast<std::size_t>(ind.occupation) == o ? 1.0 : 0.0;
      }
      static_(r, c++) = ind.education == Education::kCollegeOrLower ? 1.0 : 0.0;
      static_(r, c++) = ind.education == Education::kPostgraduate ? 1.0 : 0.0;
      dist_col = c;
      static_(r, c++) = region ? region->distance_to_epicenter : 0.0;
      pp_col = c;
      static_(r, c++) = ind.purchasing_power;
      static_(r, c++) = ind.has_child ? 1.0 : 0.0;
      static_(r, c++) = ind.married ? 1.0 : 0.0;
    }
    for (Eigen::Index c : {age_col, dist_col, pp_col}) {
      if (c >= 0) standardize(static_.col(c));
    }
  }

  void build_neighbors(const Dataset& ds, const MultiplexGraph& g) {
    std::vector<std::uint8_t> in_sample(ds.individuals.size(), 0);
    for (std::size_t i : sample_) in_sample[i] = 1;
    // Graph node -> dataset index, or npos when the node is not in the dataset.
    constexpr auto npos = static_cast<std::size_t>(-1);
    std::vector<std::size_t> node_to_ds(g.node_count(), npos);
    for (std::size_t v = 0; v < g.node_count(); ++v) {
      if (const auto k = ds.index_of(g.id_of(static_cast<NodeIndex>(v)))) node_to_ds[v] = *k;
    }
    for (std::size_t l = 0; l < 3; ++l) {
      offsets_[l].assign(1, 0);
      for (std::size_t i : sample_) {
        if (const auto v = g.index_of(ds.individuals[i].id)) {
          for (NodeIndex w : g.neighbors(kLayers[l], *v)) {
            const std::size_t j = node_to_ds[w];
            if (j != npos && !in_sample[j]) nbrs_[l].push_back(j);
          }
        }
        offsets_[l].push_back(nbrs_[l].size());
      }
    }
  }

  const AwarenessTimeline* tl_;
  std::vector<std::size_t> sample_;
  FeatureSpec spec_;
  std::vector<std::string> names_;
  std::size_t n_static_ = 0;
  Eigen::MatrixXd static_;
  std::array<std::vector<std::size_t>, 3> nbrs_;
  std::array<std::vector<std::size_t>, 3> offsets_;
};

inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> build_design(const Dataset& ds,
                                                                const MultiplexGraph& g,
                                                                const AwarenessTimeline& tl,
                                                                std::vector<std::size_t> sample,
                                                                Timestamp t,
                                                                const FeatureSpec& spec = {}) {
  return DesignBuilder(ds, g, tl, std::move(sample), spec).build(t);
}

/// Uniform random subset of `pool` of size min(n, |pool|), returned sorted.
inline std::vector<std::size_t> draw_sample(std::span<const std::size_t> pool, std::size_t n,
                                            std::uint64_t seed) {
  std::vector<std::size_t> v(pool.begin(), pool.end());
  n = std::min(n, v.size());
  StreamRng rng(seed, Stream::kSampling, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(v.size() - i));
    std::swap(v[i], v[j]);
  }
  v.resize(n);
  std::sort(v.begin(), v.end());
  return v;
}

// ---------------------------------------------------------------------------
// Checkpoints

struct Checkpoint {
  std::string trigger;  // "pct_<k>" or "event:<label>"
  Timestamp time = 0;
  int percent = 0;      // 0 for event checkpoints

  bool operator==(const Checkpoint&) const = default;
};

struct CheckpointSchedule {
  std::vector<Checkpoint> entries;
  int missing_percentages = 0;  // integer levels never reached
};

/// One checkpoint at the first time the cohort's aware share reaches each integer
/// percentage 1..95, plus one per event; sorted by time, coincident entries kept.
inline CheckpointSchedule checkpoint_schedule(std::span<const Timestamp> sorted_aware_times,
                                              std::size_t cohort_size,
                                              std::span<const ShockEvent> events,
                                              int max_percent = 95) {
  if (!std::is_sorted(sorted_aware_times.begin(), sorted_aware_times.end())) {
    throw std::invalid_argument("aware times must be sorted");
  }
  CheckpointSchedule s;
  for (int k = 1; k <= max_percent; ++k) {
    // Smallest count c with 100 c >= k N.
    const std::size_t needed = (static_cast<std::size_t>(k) * cohort_size + 99) / 100;
    if (cohort_size == 0 || needed > sorted_aware_times.size()) {
      ++s.missing_percentages;
      continue;
    }
    s.entries.push_back({"pct_" + std::to_string(k), sorted_aware_times[std::max<std::size_t>(needed, 1) - 1], k});
  }
  for (const auto& e : events) s.entries.push_back({"event:" + e.label, e.timestamp(), 0});
  std::stable_sort(s.entries.begin(), s.entries.end(),
                   [](const Checkpoint& a, const Checkpoint& b) { return a.time < b.time; });
  return s;
}

struct CheckpointModel {
  Checkpoint checkpoint;
  std::vector<std::string> features;  // all FeatureSpec columns
  std::vector<std::uint8_t> used;     // column entered the fit (non-constant)
  std::vector<double> coefficients, std_errors, z, p_values, odds_ratios;  // NaN when unused
  double prevalence = kUndefined;
  int iterations = 0;
  bool converged = false;
  bool ridge = false;
  std::optional<std::string> error;

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t j = 0; j < features.size(); ++j) {
      if (features[j] == name) return j;
    }
    return std::nullopt;
  }
};

/// Fits one model; constant non-intercept columns are dropped from the fit.
inline CheckpointModel fit_checkpoint(const DesignBuilder& builder, const Checkpoint& cp,
                                      const FitConfig& cfg = {}) {
  CheckpointModel m;
  m.checkpoint = cp;
  m.features = builder.columns();
  const std::size_t p = m.features.size();
  m.used.assign(p, 0);
  for (auto* v : {&m.coefficients, &m.std_errors, &m.z, &m.p_values, &m.odds_ratios}) {
    v->assign(p, kUndefined);
  }
  try {
    auto [X, y] = builder.build(cp.time);
    if (y.size() == 0) throw NumericalError("empty regression sample");
    m.prevalence = y.mean();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const bool constant = (X.col(j).array() == X(0, j)).all();
      if (j == 0 || !constant) keep.push_back(j);
    }
    Eigen::MatrixXd Xk(X.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) Xk.col(static_cast<Eigen::Index>(k)) = X.col(keep[k]);
    const LogisticFit fit = fit_logistic(Xk, y, cfg);
    for (std::size_t k = 0; k < keep.size(); ++k) {
      const auto j = static_cast<std::size_t>(keep[k]);
      const auto kk = static_cast<Eigen::Index>(k);
      m.used[j] = 1;
      m.coefficients[j] = fit.coefficients[kk];
      m.std_errors[j] = fit.std_errors[kk];
      m.z[j] = fit.z[kk];
      m.p_values[j] = fit.p_values[kk];
      m.odds_ratios[j] = fit.odds_ratios[kk];
    }
    m.iterations = fit.iterations;
    m.converged = fit.converged;
    m.ridge = fit.ridge;
  } catch (const NumericalError& e) {
    m.error = e.what();
  }
  return m;
}

/// One independent model per checkpoint, in schedule order.
inline std::vector<CheckpointModel> run_time_evolving(const DesignBuilder& builder,
                                                      std::span<const Checkpoint> schedule,
                                                      const FitConfig& cfg = {},
                                                      unsigned jobs = 1) {
  std::vector<CheckpointModel> out(schedule.size());
  parallel_for(schedule.size(), jobs,
               [&](std::size_t k) { out[k] = fit_checkpoint(builder, schedule[k], cfg); });
  return out;
}

struct ProfileEntry {
  std::string feature;
  int direction = 0;  // +1: OR > 1, -1: OR < 1

  bool operator==(const ProfileEntry&) const = default;
};

struct PhaseProfile {
  Phase phase = Phase::kNormal;
  int models = 0;  // successfully fitted checkpoints within the phase
  std::vector<ProfileEntry> features;
};

/// Features significant (p < alpha) with a consistent direction in a strict majority
/// of each phase's fitted checkpoints. The intercept is never reported.
inline std::vector<PhaseProfile> typical_profile(std::span<const CheckpointModel> models,
                                                 const PhaseSegmentation& seg, const Calendar& cal,
                                                 double alpha = 0.05) {
  std::vector<PhaseProfile> out;
  for (const auto& span : seg.spans) {
    PhaseProfile prof;
    prof.phase = span.phase;
    std::vector<std::string> names;
    std::vector<int> pos, neg;
    for (const auto& m : models) {
      if (m.error) continue;
      const int d = cal.day_of(m.checkpoint.time);
      if (d < span.start_day || d > span.end_day) continue;
      if (names.empty()) {
        names = m.features;
        pos.assign(names.size(), 0);
        neg.assign(names.size(), 0);
      }
      ++prof.models;
      for (std::size_t j = 0; j < m.features.size() && j < names.size(); ++j) {
        if (!m.used[j] || !(m.p_values[j] < alpha)) continue;
        if (m.odds_ratios[j] > 1.0) ++pos[j];
        if (m.odds_ratios[j] < 1.0) ++neg[j];
      }
    }
    for (std::size_t j = 0; j < names.size(); ++j) {
      if (names[j] == "intercept") continue;
      if (2 * pos[j] > prof.models) prof.features.push_back({names[j], +1});
      if (2 * neg[j] > prof.models) prof.features.push_back({names[j], -1});
    }
    out.push_back(std::move(prof));
  }
  return out;
}

}  // namespace cryptic
