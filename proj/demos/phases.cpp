// Segments a hand-made two-province awareness curve into phases.

#include <cstdio>
#include <vector>

#include "cryptic.hpp"

int main() {
  // Daily awareness percentage per province (fractions of the cohort).
  const std::vector<std::vector<double>> provinces{
      {0, 0, 0.0001, 0.0003, 0.001, 0.003, 0.008, 0.02, 0.05, 0.10, 0.104, 0.106, 0.107, 0.108},
      {0, 0, 0, 0.0001, 0.0004, 0.002, 0.006, 0.015, 0.04, 0.08, 0.083, 0.085, 0.086, 0.087},
  };
  std::vector<double> national(provinces[0].size());
  for (std::size_t d = 0; d < national.size(); ++d) {
    national[d] = 0.5 * (provinces[0][d] + provinces[1][d]);
  }
  const auto seg = cryptic::segment_phases(provinces, national);
  for (const auto& span : seg.spans) {
    std::printf("%-10s days %d..%d\n", std::string(cryptic::to_string(span.phase)).c_str(),
                span.start_day, span.end_day);
  }
  if (seg.truncated) std::printf("(segmentation truncated)\n");
  return 0;
}
