#pragma once

#include <array>
#include <string_view>

namespace courtside {

enum class QueryCategory {
    MatchStatistics,
    PlayerStatistics,
    Predictions,
    Biographies,
    Logistics,
    LivePointByPoint,
};

inline constexpr std::array<QueryCategory, 6> kAllCategories{
    QueryCategory::MatchStatistics, QueryCategory::PlayerStatistics, QueryCategory::Predictions,
    QueryCategory::Biographies,     QueryCategory::Logistics,        QueryCategory::LivePointByPoint,
};

inline constexpr std::size_t kCategoryCount = kAllCategories.size();

inline constexpr std::size_t category_index(QueryCategory c) { return static_cast<std::size_t>(c); }

std::string_view to_string(QueryCategory c);
/// Throws ValidationError on an unknown name.
QueryCategory category_from_string(std::string_view name);

} // namespace courtside
