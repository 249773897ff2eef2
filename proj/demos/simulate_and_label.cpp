// Simulates a small population, labels awareness from its query log and checks the
// labels against the simulator's ground truth.

#include <cstdio>

#include "cryptic.hpp"

int main() {
  cryptic::SimConfig cfg;
  cfg.n_individuals = 2000;
  const cryptic::Simulation sim = cryptic::simulate(cfg, cryptic::default_jobs());

  const auto ids = sim.dataset.ids();
  const auto matcher = cryptic::compile_query_set(cryptic::default_patterns());
  const auto timeline =
      cryptic::label_awareness(ids, sim.dataset.events.queries, matcher, sim.dataset.calendar);

  std::size_t aware = 0, mismatches = 0;
  for (std::size_t i = 0; i < timeline.size(); ++i) {
    aware += timeline.first_aware(i).has_value();
    mismatches += timeline.raw()[i] != sim.truth.first_aware.raw()[i];
  }
  std::printf("individuals %zu, aware %zu, label mismatches %zu\n", timeline.size(), aware, mismatches);

  const auto graph = cryptic::infer_networks(sim.dataset.addresses, cfg.caps, ids);
  for (auto layer : cryptic::kLayers) {
    std::printf("%-10s edges %zu\n", std::string(cryptic::to_string(layer)).c_str(),
                graph.edge_count(layer));
  }
  return mismatches == 0 ? 0 : 1;
}
