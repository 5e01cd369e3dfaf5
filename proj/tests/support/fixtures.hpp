#pragma once

#include "courtside/feed_hub.hpp"
#include "courtside/live_tracker.hpp"

#include <filesystem>
#include <memory>
#include <string>

namespace fixtures {

inline const std::filesystem::path kSource = COURTSIDE_SOURCE_DIR;
inline const std::filesystem::path kM1 = kSource / "data/replay/m1_alcaraz_sinner_bo5.ndjson";
inline const std::filesystem::path kM2 = kSource / "data/replay/m2_sabalenka_swiatek_bo3.ndjson";

/// Hub with a replay fully applied (tracker-derived feeds included).
struct LoadedHub {
    std::unique_ptr<courtside::FeedHub> hub = std::make_unique<courtside::FeedHub>();
    std::unique_ptr<courtside::LiveTracker> tracker =
        std::make_unique<courtside::LiveTracker>(*hub, courtside::WinProbConfig{});
};

inline std::unique_ptr<LoadedHub> load(const std::filesystem::path& replay) {
    auto h = std::make_unique<LoadedHub>();
    courtside::run_replay(*h->hub, courtside::load_replay(replay), courtside::kAsFastAsPossible);
    return h;
}

} // namespace fixtures
