#include "courtside/errors.hpp"
#include "courtside/eval.hpp"
#include "courtside/http_server.hpp"
#include "courtside/runtime.hpp"
#include "courtside/simulate.hpp"
#include "courtside/text.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

using namespace courtside;
using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

std::filesystem::path default_config() {
    for (const auto* candidate : {"config/courtside.json", "../config/courtside.json"})
        if (std::filesystem::exists(candidate)) return candidate;
    return "config/courtside.json";
}

AppConfig load_config(const std::string& path) {
    return AppConfig::load(path.empty() ? default_config() : std::filesystem::path(path));
}

/// "host:port" -> pair; port defaults to 80.
std::pair<std::string, int> split_url(std::string url) {
    if (auto p = url.find("://"); p != std::string::npos) url = url.substr(p + 3);
    if (!url.empty() && url.back() == '/') url.pop_back();
    const auto colon = url.rfind(':');
    if (colon == std::string::npos) return {url, 80};
    return {url.substr(0, colon), std::stoi(url.substr(colon + 1))};
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw NotFoundError("cannot write " + path);
    out << j.dump(2) << "\n";
}

int cmd_serve(const std::string& config_path, int port_override) {
    auto config = load_config(config_path);
    if (port_override >= 0) config.server.port = port_override;
    auto rt = Runtime::build(config);
    std::thread replay([&rt] {
        try {
            rt->load_replays();
            spdlog::info("replays finished");
        } catch (const std::exception& e) {
            spdlog::error("replay failed: {}", e.what());
        }
    });
    HttpServer server(*rt->gateway, *rt->hub, rt->tracker.get(), config.server);
    const int port = server.start();
    spdlog::info("listening on http://{}:{} ({} threads, providers: {})", config.server.host, port,
                 config.server.threads, config.providers.mode);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    spdlog::info("stopping; draining in-flight requests");
    server.stop();
    replay.join();
    return 0;
}

int cmd_replay(const std::string& file, double speed, bool dump) {
    FeedHub hub;
    LiveTracker tracker(hub, WinProbConfig{});
    const auto events = load_replay(file);
    const auto t0 = std::chrono::steady_clock::now();
    run_replay(hub, events, speed);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (dump) {
        std::cout << hub.dump_snapshots().dump(2) << "\n";
        return 0;
    }
    std::cout << "events " << events.size() << " in " << secs << " s\n";
    for (const auto& id : hub.match_ids()) {
        const auto trace = tracker.trace(id);
        std::cout << id << ": " << trace.size() << " points";
        if (const auto snap = hub.find_snapshot(FeedKind::Scores, id)) {
            const auto& p = snap->latest.payload;
            std::cout << ", sets " << p["sets"].dump() << ", completed " << p.value("completed", false);
        }
        if (!trace.empty()) std::cout << ", last published " << likelihood_payload(trace.back(), tracker.config())["published"].dump();
        std::cout << "\n";
    }
    if (tracker.inconsistencies() > 0) std::cout << "inconsistent point labels: " << tracker.inconsistencies() << "\n";
    return 0;
}

int cmd_simulate(const std::string& format, std::uint64_t seed, bool trace) {
    const auto m = simulate_match(match_format_from_name(format), seed);
    if (trace)
        for (const auto& rec : m.trace) std::cout << to_json(rec).dump() << "\n";
    std::cout << to_json(m).dump() << "\n";
    return 0;
}

int cmd_eval(const std::string& gold_path, const std::string& config_path, const std::string& url,
             const std::string& json_out) {
    const auto gold = load_gold(gold_path);
    const auto config = load_config(config_path);
    std::unique_ptr<Runtime> rt;
    std::unique_ptr<ChatClient> client;
    EvalOptions options;
    if (url.empty()) {
        rt = Runtime::build(config);
        rt->load_replays(kAsFastAsPossible);
        client = std::make_unique<InProcessClient>(*rt->gateway);
        options.judge = rt->providers.judge;
    } else {
        const auto [host, port] = split_url(url);
        client = std::make_unique<HttpChatClient>(host, port);
        options.judge = make_providers(config.providers).judge;
    }
    const auto report = run_gold(gold, *client, options);
    std::cout << format_report(report);
    if (!json_out.empty()) write_json(json_out, to_json(report, true));
    return 0;
}

int cmd_loadtest(double rps, double duration_s, const std::string& config_path, const std::string& url,
                 std::size_t workers, bool hang, const std::string& json_out) {
    auto config = load_config(config_path);
    LoadOptions options;
    options.rps = rps;
    options.duration = std::chrono::milliseconds(static_cast<long long>(duration_s * 1000));
    options.workers = workers;

    std::unique_ptr<Runtime> rt;
    std::unique_ptr<HttpServer> server;
    std::string host = "127.0.0.1";
    int port = 0;
    std::vector<ChatRequest> mix;
    if (url.empty()) {
        // Self-contained run: a mock-backed service on a free local port.
        config.server.port = 0;
        config.server.host = "127.0.0.1";
        rt = Runtime::build(config);
        rt->load_replays(kAsFastAsPossible);
        if (hang) {
            if (auto* mock = dynamic_cast<MockCompletionProvider*>(rt->providers.completion.get()))
                mock->script().set_default(MockBehavior::hang(std::chrono::seconds(30)));
        }
        server = std::make_unique<HttpServer>(*rt->gateway, *rt->hub, rt->tracker.get(), config.server);
        port = server->start();
        mix = load_mix(*rt->catalog, options.match_ids, 4096, options.seed);
    } else {
        std::tie(host, port) = split_url(url);
        mix = load_mix(SubquestionCatalog::load(config.data_dir / "categories.json"), options.match_ids, 4096,
                       options.seed);
    }
    HttpChatClient client(host, port);
    const auto report = run_load(client, mix, options);
    std::cout << format_load_report(report);
    if (!json_out.empty()) write_json(json_out, to_json(report));
    if (server) server->stop();
    return report.errors == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"courtside: live tennis assistant service"};
    app.require_subcommand(1);

    std::string config_path;
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    int port = -1;
    serve->add_option("--config", config_path, "Configuration file")->check(CLI::ExistingFile);
    serve->add_option("--port", port, "Override the configured port");

    auto* replay = app.add_subcommand("replay", "Replay a feed file through the hub");
    std::string replay_file;
    std::string speed_text = "inf";
    bool dump = false;
    replay->add_option("--file", replay_file, "Replay file (NDJSON)")->required()->check(CLI::ExistingFile);
    replay->add_option("--speed", speed_text, "Speed multiplier, or inf");
    replay->add_flag("--dump", dump, "Print every final snapshot");

    auto* simulate = app.add_subcommand("simulate", "Play a random match through the engine");
    std::string format = "bo3";
    std::uint64_t seed = 1;
    bool trace = false;
    simulate->add_option("--format", format, "bo3 or bo5")->check(CLI::IsMember({"bo3", "bo5"}));
    simulate->add_option("--seed", seed, "Random seed");
    simulate->add_flag("--trace", trace, "Print the per-point win probabilities");

    auto* eval = app.add_subcommand("eval", "Run the gold question set");
    std::string gold_path, url, json_out;
    eval->add_option("--gold", gold_path, "Gold question file")->required()->check(CLI::ExistingFile);
    eval->add_option("--config", config_path, "Configuration file")->check(CLI::ExistingFile);
    eval->add_option("--url", url, "Running service as host:port; in-process when omitted");
    eval->add_option("--json", json_out, "Write the full report as JSON");

    auto* load = app.add_subcommand("loadtest", "Open-loop load test");
    double rps = 120, duration = 60;
    std::size_t workers = 256;
    bool hang = false;
    load->add_option("--rps", rps, "Target requests per second")->check(CLI::PositiveNumber);
    load->add_option("--duration", duration, "Seconds")->check(CLI::PositiveNumber);
    load->add_option("--config", config_path, "Configuration file")->check(CLI::ExistingFile);
    load->add_option("--url", url, "Running service as host:port; a local mock-backed service when omitted");
    load->add_option("--workers", workers, "Concurrent client workers")->check(CLI::PositiveNumber);
    load->add_flag("--hang", hang, "Script the local mock completion provider to hang");
    load->add_option("--json", json_out, "Write the report as JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*serve) return cmd_serve(config_path, port);
        if (*replay) {
            const double speed = speed_text == "inf" ? kAsFastAsPossible : std::stod(speed_text);
            if (!(speed > 0)) throw ValidationError("--speed must be positive");
            return cmd_replay(replay_file, speed, dump);
        }
        if (*simulate) return cmd_simulate(format, seed, trace);
        if (*eval) return cmd_eval(gold_path, config_path, url, json_out);
        if (*load) return cmd_loadtest(rps, duration, config_path, url, workers, hang, json_out);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 2;
    }
    return 0;
}
