#pragma once

#include "courtside/feed_hub.hpp"
#include "courtside/match_state.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace courtside {

struct PlayerProfile {
    PlayerSlot slot = PlayerSlot::P1;
    std::string id;
    std::string name;  // canonical display name
    std::string first_name;
    std::string last_name;
    std::vector<std::string> aliases;
    std::string tour;  // "ATP" or "WTA"

    /// Every single-word form the player may be referred to by.
    std::vector<std::string> name_tokens() const;
};

struct MatchContext {
    std::string match_id;
    std::vector<PlayerProfile> players;
};

/// Player profiles from the PlayerStats snapshot; empty players when absent.
MatchContext match_context_from_feeds(const FeedHub& hub, const std::string& match_id);

/// Players referred to in `text` by any name token (case and diacritic
/// insensitive, possessives stripped), in slot order.
std::vector<PlayerSlot> mentioned_players(std::string_view text, const MatchContext& ctx);

} // namespace courtside
