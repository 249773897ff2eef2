// Fits the awareness model at a few checkpoints of a simulated run and prints
// odds ratios for the education, distance and family-exposure features.

#include <cstdio>

#include "cryptic.hpp"

int main() {
  cryptic::SimConfig cfg;
  cfg.n_individuals = 5000;
  const unsigned jobs = cryptic::default_jobs();
  const cryptic::Simulation sim = cryptic::simulate(cfg, jobs);
  const auto& ds = sim.dataset;

  std::vector<std::size_t> cohort;
  for (std::size_t i = 0; i < ds.individuals.size(); ++i) {
    if (ds.individuals[i].qualified) cohort.push_back(i);
  }
  const auto& tl = sim.truth.first_aware;
  const cryptic::DesignBuilder builder(ds, sim.truth.graph, tl,
                                       cryptic::draw_sample(cohort, cohort.size() / 2, 1));
  const auto schedule = cryptic::checkpoint_schedule(cryptic::aware_times(tl, cohort), cohort.size(),
                                                     cryptic::default_events());
  std::printf("%zu checkpoints\n", schedule.entries.size());

  std::vector<cryptic::Checkpoint> picked;
  for (const auto& c : schedule.entries) {
    if (c.percent == 10 || c.percent == 40 || c.percent == 80) picked.push_back(c);
  }
  std::printf("%-8s %-20s %10s %10s %10s\n", "trigger", "date", "postgrad", "distance", "family");
  for (const auto& m : cryptic::run_time_evolving(builder, picked, {}, jobs)) {
    if (m.error) {
      std::printf("%-8s failed: %s\n", m.checkpoint.trigger.c_str(), m.error->c_str());
      continue;
    }
    std::printf("%-8s %-20s", m.checkpoint.trigger.c_str(), cryptic::format_local_date(m.checkpoint.time).c_str());
    for (const char* f : {"edu_postgraduate", "distance_to_epicenter", "family_aware_pct"}) {
      std::printf(" %10.3f", m.odds_ratios[*m.column(f)]);
    }
    std::printf("\n");
  }
  return 0;
}
