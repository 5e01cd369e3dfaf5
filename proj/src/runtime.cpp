#include "courtside/runtime.hpp"

#include "courtside/errors.hpp"
#include "courtside/text.hpp"

#include <cmath>
#include <thread>

namespace courtside {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

GatewayConfig gateway_config_from_json(const json& j) {
    GatewayConfig c;
    c.max_input_chars = j.value("max_input_chars", c.max_input_chars);
    c.cache_ttl = std::chrono::milliseconds(j.value("cache_ttl_ms", static_cast<long long>(c.cache_ttl.count())));
    c.confirmation_ttl = std::chrono::milliseconds(
        j.value("confirmation_ttl_ms", static_cast<long long>(c.confirmation_ttl.count())));
    c.pool_capacity = j.value("pool_capacity", c.pool_capacity);
    c.no_answer_message = j.value("no_answer_message", c.no_answer_message);
    c.capacity_message = j.value("capacity_message", c.capacity_message);
    c.confirmation_message = j.value("confirmation_message", c.confirmation_message);
    if (c.max_input_chars == 0) throw ConfigurationError("gateway.max_input_chars must be positive");
    if (c.pool_capacity == 0) throw ConfigurationError("gateway.pool_capacity must be positive");
    if (c.cache_ttl.count() < 0) throw ConfigurationError("gateway.cache_ttl_ms must not be negative");
    return c;
}

ServerConfig server_config_from_json(const json& j) {
    ServerConfig c;
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
    c.threads = j.value("threads", c.threads);
    c.stream_poll = std::chrono::milliseconds(j.value("stream_poll_ms", 200));
    if (c.port < 0 || c.port > 65535) throw ConfigurationError("server.port out of range");
    if (c.threads == 0) throw ConfigurationError("server.threads must be positive");
    return c;
}

} // namespace

AppConfig AppConfig::defaults(const fs::path& data_dir) {
    AppConfig c;
    c.data_dir = data_dir;
    c.replays = {data_dir / "replay/m1_alcaraz_sinner_bo5.ndjson", data_dir / "replay/m2_sabalenka_swiatek_bo3.ndjson"};
    return c;
}

AppConfig AppConfig::from_json(const json& j, const fs::path& base_dir) {
    try {
        AppConfig c = defaults(resolve(base_dir, j.value("data_dir", std::string("data"))));
        if (j.contains("win_probability")) c.win_probability = win_prob_config_from_json(j["win_probability"]);
        if (j.contains("thresholds")) c.thresholds = CategoryThresholds::from_json(j["thresholds"]);
        c.z_threshold = j.value("z_threshold", c.z_threshold);
        if (j.contains("agents")) c.agents = AgentGraphConfig::from_json(j["agents"]);
        if (j.contains("gateway")) c.gateway = gateway_config_from_json(j["gateway"]);
        if (j.contains("providers")) c.providers = provider_config_from_json(j["providers"]);
        if (j.contains("server")) c.server = server_config_from_json(j["server"]);
        if (j.contains("replays")) {
            c.replays.clear();
            for (const auto& r : j["replays"]) c.replays.push_back(resolve(base_dir, r.get<std::string>()));
        }
        if (j.contains("replay_speed") && !j["replay_speed"].is_null()) {
            c.replay_speed = j["replay_speed"].get<double>();
            if (!(c.replay_speed > 0)) throw ConfigurationError("replay_speed must be positive");
        }
        c.knowledge_base = j.value("knowledge_base", c.knowledge_base);
        return c;
    } catch (const json::exception& e) {
        throw ConfigurationError(std::string("config: ") + e.what());
    }
}

AppConfig AppConfig::load(const fs::path& path) {
    json j;
    try {
        j = json::parse(text::read_file(path));
    } catch (const json::exception& e) {
        throw ConfigurationError(path.string() + ": " + e.what());
    }
    return from_json(j, path.parent_path());
}

std::unique_ptr<Runtime> Runtime::build(AppConfig config) {
    auto rt = std::make_unique<Runtime>();
    rt->config = std::move(config);
    const auto& c = rt->config;
    const auto& data = c.data_dir;

    rt->hub = std::make_unique<FeedHub>();
    rt->tracker = std::make_unique<LiveTracker>(*rt->hub, c.win_probability,
                                                std::make_shared<LogisticStubProvider>());
    rt->providers = make_providers(c.providers);
    rt->safety = std::make_shared<SafetyPipeline>(SafetyConfig::load(data / "safety"));
    rt->classifier = std::make_shared<QueryClassifier>(
        QueryClassifier::load(data / "classifier", rt->providers.embedder, c.z_threshold));

    auto agents = std::make_shared<AgentServices>();
    agents->hub = rt->hub.get();
    agents->synthesizer = std::make_shared<DataSynthesizer>(load_patterns(data / "synth/patterns.json"), c.thresholds);
    agents->llm = rt->providers.completion;
    agents->embedder = rt->providers.embedder;
    agents->judge = rt->providers.judge;
    agents->rules = std::make_shared<CorrectionRules>(CorrectionRules::load(data / "agents/corrections.json"));
    agents->corpora = std::make_shared<CorpusCache>();
    agents->config = c.agents;
    rt->agents = agents;

    if (c.knowledge_base) rt->kb = std::make_shared<KnowledgeBase>(KnowledgeBase::load(data / "kb/faq.json"));
    rt->catalog = std::make_shared<SubquestionCatalog>(SubquestionCatalog::load(data / "categories.json"));

    GatewayDeps deps;
    deps.hub = rt->hub.get();
    deps.safety = rt->safety;
    deps.classifier = rt->classifier;
    deps.agents = rt->agents;
    deps.kb = rt->kb;
    deps.catalog = rt->catalog;
    deps.config = c.gateway;
    rt->gateway = std::make_unique<Gateway>(std::move(deps));
    return rt;
}

void Runtime::load_replays(double speed) const {
    std::vector<std::vector<FeedEvent>> streams;
    for (const auto& path : config.replays) streams.push_back(load_replay(path));
    if (std::isinf(speed)) {
        for (const auto& s : streams) run_replay(*hub, s, speed);
        return;
    }
    // Paced replays run side by side, like concurrent matches.
    std::vector<std::thread> threads;
    for (const auto& s : streams) threads.emplace_back([this, &s, speed] { run_replay(*hub, s, speed); });
    for (auto& t : threads) t.join();
}

} // namespace courtside
