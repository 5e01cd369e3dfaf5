#include "courtside/match_context.hpp"

#include "courtside/text.hpp"

#include <set>

namespace courtside {

std::vector<std::string> PlayerProfile::name_tokens() const {
    std::vector<std::string> out;
    auto add = [&](const std::string& s) {
        for (const auto& t : text::tokenize(s)) out.push_back(t.text);
    };
    add(first_name);
    add(last_name);
    for (const auto& a : aliases) add(a);
    return out;
}

MatchContext match_context_from_feeds(const FeedHub& hub, const std::string& match_id) {
    MatchContext ctx{match_id, {}};
    const auto snap = hub.find_snapshot(FeedKind::PlayerStats, match_id);
    if (!snap) return ctx;
    const auto& players = snap->latest.payload.at("players");
    for (std::size_t i = 0; i < players.size() && i < 2; ++i) {
        const auto& p = players[i];
        PlayerProfile prof;
        prof.slot = i == 0 ? PlayerSlot::P1 : PlayerSlot::P2;
        prof.id = p.value("id", std::string{});
        prof.name = p.value("name", std::string{});
        prof.first_name = p.value("first_name", std::string{});
        prof.last_name = p.value("last_name", prof.name);
        prof.aliases = p.value("aliases", std::vector<std::string>{});
        prof.tour = p.value("tour", std::string{"ATP"});
        ctx.players.push_back(std::move(prof));
    }
    return ctx;
}

std::vector<PlayerSlot> mentioned_players(std::string_view s, const MatchContext& ctx) {
    std::set<std::string> words;
    for (const auto& t : text::tokenize(s)) words.insert(text::fold(text::strip_possessive(t.text)));
    std::vector<PlayerSlot> out;
    for (const auto& p : ctx.players) {
        for (const auto& n : p.name_tokens()) {
            if (words.count(text::fold(n))) {
                out.push_back(p.slot);
                break;
            }
        }
    }
    return out;
}

} // namespace courtside
