#include "courtside/category.hpp"

#include "courtside/errors.hpp"

#include <string>

namespace courtside {

std::string_view to_string(QueryCategory c) {
    switch (c) {
    case QueryCategory::MatchStatistics: return "MatchStatistics";
    case QueryCategory::PlayerStatistics: return "PlayerStatistics";
    case QueryCategory::Predictions: return "Predictions";
    case QueryCategory::Biographies: return "Biographies";
    case QueryCategory::Logistics: return "Logistics";
    case QueryCategory::LivePointByPoint: return "LivePointByPoint";
    }
    return "?";
}

QueryCategory category_from_string(std::string_view name) {
    for (auto c : kAllCategories)
        if (to_string(c) == name) return c;
    throw ValidationError("unknown category: " + std::string(name));
}

} // namespace courtside
