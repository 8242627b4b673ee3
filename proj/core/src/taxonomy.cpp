#include "benthos/taxonomy.hpp"

namespace benthos {

namespace {
constexpr std::array<std::string_view, kClassCount> kClassNames{
    "bottle", "plastic", "anchor", "tire", "metal", "other", "starfish"};
constexpr std::array<std::string_view, 4> kStateNames{
    "unverified", "verified", "reclassified", "rejected"};
}  // namespace

std::string_view to_string(DebrisClass cls) noexcept {
  return kClassNames[index_of(cls)];
}

std::optional<DebrisClass> parse_class(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kClassCount; ++i) {
    if (kClassNames[i] == name) return kAllClasses[i];
  }
  return std::nullopt;
}

DebrisClass argmax_class(const ClassScores& scores) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < kClassCount; ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return kAllClasses[best];
}

double max_score(const ClassScores& scores) noexcept {
  return scores[index_of(argmax_class(scores))];
}

std::string_view to_string(ReviewState state) noexcept {
  return kStateNames[static_cast<std::size_t>(state)];
}

std::optional<ReviewState> parse_review_state(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kStateNames.size(); ++i) {
    if (kStateNames[i] == name) return static_cast<ReviewState>(i);
  }
  return std::nullopt;
}

}  // namespace benthos
