#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace benthos {

/// Closed class set. Declaration order is the tie-break order for argmax.
enum class DebrisClass : std::size_t {
  bottle,
  plastic,
  anchor,
  tire,
  metal,
  other,
  starfish,
};

inline constexpr std::size_t kClassCount = 7;

inline constexpr std::array<DebrisClass, kClassCount> kAllClasses{
    DebrisClass::bottle, DebrisClass::plastic, DebrisClass::anchor,
    DebrisClass::tire,   DebrisClass::metal,   DebrisClass::other,
    DebrisClass::starfish};

std::string_view to_string(DebrisClass cls) noexcept;
std::optional<DebrisClass> parse_class(std::string_view name) noexcept;

inline constexpr std::size_t index_of(DebrisClass cls) noexcept {
  return static_cast<std::size_t>(cls);
}

using ClassScores = std::array<double, kClassCount>;

/// Highest-scoring class; ties resolved toward the earlier class.
DebrisClass argmax_class(const ClassScores& scores) noexcept;
double max_score(const ClassScores& scores) noexcept;

enum class ReviewState { unverified, verified, reclassified, rejected };

std::string_view to_string(ReviewState state) noexcept;
std::optional<ReviewState> parse_review_state(std::string_view name) noexcept;

}  // namespace benthos
