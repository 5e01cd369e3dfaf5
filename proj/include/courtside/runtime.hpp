#pragma once

#include "courtside/agent_graph.hpp"
#include "courtside/classifier.hpp"
#include "courtside/feed_hub.hpp"
#include "courtside/gateway.hpp"
#include "courtside/live_tracker.hpp"
#include "courtside/providers.hpp"
#include "courtside/safety.hpp"
#include "courtside/synthesizer.hpp"
#include "courtside/win_probability.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace courtside {

struct ServerConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t threads = 8;
    /// How often an idle SSE stream checks for completion and shutdown.
    std::chrono::milliseconds stream_poll{200};
};

/// Everything `courtside serve` needs, resolved against the config file's directory.
struct AppConfig {
    std::filesystem::path data_dir;
    WinProbConfig win_probability;
    CategoryThresholds thresholds;
    double z_threshold = kDefaultZThreshold;
    AgentGraphConfig agents;
    GatewayConfig gateway;
    ProviderConfig providers;
    ServerConfig server;
    std::vector<std::filesystem::path> replays;
    /// Replay speed multiplier; infinity applies events without sleeping.
    double replay_speed = kAsFastAsPossible;
    bool knowledge_base = true;

    /// Relative paths inside `j` are resolved against `base_dir`.
    static AppConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
    static AppConfig load(const std::filesystem::path& path);
    /// Defaults pointing at the data directory of a source checkout.
    static AppConfig defaults(const std::filesystem::path& data_dir);
};

/// Wired services. Construction order matters: the tracker subscribes to the
/// hub, the gateway borrows both.
struct Runtime {
    AppConfig config;
    std::unique_ptr<FeedHub> hub;
    std::unique_ptr<LiveTracker> tracker;
    Providers providers;
    std::shared_ptr<const SafetyPipeline> safety;
    std::shared_ptr<const QueryClassifier> classifier;
    std::shared_ptr<AgentServices> agents;
    std::shared_ptr<const KnowledgeBase> kb;
    std::shared_ptr<const SubquestionCatalog> catalog;
    std::unique_ptr<Gateway> gateway;

    /// Loads every data file; throws ConfigurationError on bad data.
    static std::unique_ptr<Runtime> build(AppConfig config);
    /// Replays the configured files into the hub at `speed`.
    void load_replays(double speed) const;
    void load_replays() const { load_replays(config.replay_speed); }
};

} // namespace courtside
