#pragma once

#include <random>
#include <vector>

#include "benthos/detfuse.hpp"

namespace benthos::test {

// n fused detections with ids 1..n, random classes, embeddings and world
// centers in [0, 50)^2.
inline std::vector<FusedDetection> make_detections(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0), w(0.0, 50.0), s(0.35, 1.0);
  std::uniform_int_distribution<std::size_t> c(0, kClassCount - 1);
  std::vector<FusedDetection> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& d = out[i];
    d.id = static_cast<std::uint32_t>(i + 1);
    d.cls = kAllClasses[c(rng)];
    d.raw.cls = d.cls;
    d.raw.frame_id = std::to_string(i % 7);
    d.raw.t = static_cast<double>(i) * 0.5;
    d.raw.bbox = {1.0, 2.0, 10.0, 12.0};
    d.raw.scores[index_of(d.cls)] = s(rng);
    d.embedding = {u(rng), u(rng)};
    d.world = WorldFootprint{w(rng), w(rng), 0.25};
    d.uncovered = i % 3 == 0;
    for (std::size_t k = 0; k < kPatternSize; ++k) d.features.values[k] = w(rng) / 50.0;
    d.features.set_probability(d.raw.scores);
  }
  return out;
}

}  // namespace benthos::test
