#include "courtside/feed_hub.hpp"

#include "courtside/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

namespace courtside {

namespace {

constexpr std::array<std::string_view, 9> kKindNames = {
    "HeadToHead", "MatchStats", "Scores", "LikelihoodToWin", "PowerIndex",
    "PlayerStats", "Draw", "MatchLogistics", "SlamPointByPoint",
};

enum class Type { number, string, array, boolean, object };

struct Field {
    const char* name;
    Type type;
};

bool has_type(const nlohmann::json& v, Type t) {
    switch (t) {
    case Type::number: return v.is_number();
    case Type::string: return v.is_string();
    case Type::array: return v.is_array();
    case Type::boolean: return v.is_boolean();
    case Type::object: return v.is_object();
    }
    return false;
}

std::vector<Field> required_fields(FeedKind kind) {
    switch (kind) {
    case FeedKind::HeadToHead:
        return {{"players", Type::array}, {"matches", Type::number}, {"sets_won", Type::array}};
    case FeedKind::MatchStats: return {{"players", Type::array}};
    case FeedKind::Scores:
        return {{"sets", Type::array}, {"games", Type::array}, {"points_played", Type::number},
                {"completed", Type::boolean}};
    case FeedKind::LikelihoodToWin:
        return {{"point_index", Type::number}, {"live", Type::array}, {"normalized", Type::array}};
    case FeedKind::PowerIndex: return {{"values", Type::array}};
    case FeedKind::PlayerStats: return {{"players", Type::array}};
    case FeedKind::Draw: return {{"round", Type::string}, {"players", Type::array}};
    case FeedKind::MatchLogistics: return {{"court", Type::string}, {"best_of", Type::number}};
    case FeedKind::SlamPointByPoint:
        return {{"set", Type::number}, {"game", Type::number}, {"winner", Type::number}};
    }
    return {};
}

} // namespace

std::string_view to_string(FeedKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

FeedKind feed_kind_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i)
        if (kKindNames[i] == name) return static_cast<FeedKind>(i);
    throw ValidationError("unknown feed kind: " + std::string(name));
}

nlohmann::json to_json(const FeedEvent& e) {
    return {{"kind", to_string(e.kind)}, {"match_id", e.match_id}, {"seq", e.sequence},
            {"ts_ms", e.timestamp_ms}, {"payload", e.payload}};
}

FeedEvent feed_event_from_json(const nlohmann::json& r) {
    if (!r.is_object()) throw ValidationError("record is not an object");
    for (const char* key : {"kind", "match_id", "seq", "ts_ms", "payload"})
        if (!r.contains(key)) throw ValidationError(std::string("record missing '") + key + "'");
    if (!r["kind"].is_string() || !r["match_id"].is_string() || !r["seq"].is_number_unsigned() ||
        !r["ts_ms"].is_number_integer())
        throw ValidationError("record field has wrong type");
    FeedEvent e;
    e.kind = feed_kind_from_string(r["kind"].get<std::string>());
    e.match_id = r["match_id"].get<std::string>();
    e.sequence = r["seq"].get<std::uint64_t>();
    e.timestamp_ms = r["ts_ms"].get<std::int64_t>();
    e.payload = r["payload"];
    validate_payload(e.kind, e.payload);
    return e;
}

void validate_payload(FeedKind kind, const nlohmann::json& payload) {
    if (!payload.is_object())
        throw ValidationError(std::string(to_string(kind)) + " payload must be an object");
    for (const auto& f : required_fields(kind)) {
        const auto it = payload.find(f.name);
        if (it == payload.end() || !has_type(*it, f.type))
            throw ValidationError(std::string(to_string(kind)) + " payload: missing or mistyped '" +
                                  f.name + "'");
    }
    if (kind == FeedKind::PlayerStats || kind == FeedKind::MatchStats) {
        if (payload["players"].size() != 2)
            throw ValidationError(std::string(to_string(kind)) + " payload must list two players");
    }
    if (kind == FeedKind::PlayerStats) {
        for (const auto& p : payload["players"])
            if (!p.is_object() || !p.contains("name") || !p.contains("tour"))
                throw ValidationError("PlayerStats player needs name and tour");
    }
    if (kind == FeedKind::SlamPointByPoint) {
        const int w = payload["winner"].get<int>();
        if (w != 1 && w != 2) throw ValidationError("SlamPointByPoint winner must be 1 or 2");
    }
}

nlohmann::json FeedSnapshot::to_json() const {
    nlohmann::json j = {{"kind", to_string(kind)},
                        {"match_id", match_id},
                        {"sequence", latest.sequence},
                        {"latest", courtside::to_json(latest)}};
    if (kind == FeedKind::SlamPointByPoint) {
        nlohmann::json sets = nlohmann::json::array();
        for (const auto& [set_no, games] : points) {
            nlohmann::json g = nlohmann::json::array();
            for (const auto& [game_no, pts] : games)
                g.push_back({{"game", game_no}, {"points", pts}});
            sets.push_back({{"set", set_no}, {"games", std::move(g)}});
        }
        j["history"] = std::move(sets);
        j["point_count"] = point_count;
    }
    return j;
}

Subscription& Subscription::operator=(Subscription&& other) noexcept {
    if (this != &other) {
        cancel();
        active_ = std::move(other.active_);
    }
    return *this;
}

void Subscription::cancel() noexcept {
    if (active_) active_->store(false);
    active_.reset();
}

bool Subscription::active() const noexcept { return active_ && active_->load(); }

std::shared_ptr<FeedHub::Topic> FeedHub::topic(FeedKind kind, const std::string& match_id,
                                               bool create) const {
    const TopicKey key{static_cast<int>(kind), match_id};
    {
        std::shared_lock lock(topics_mutex_);
        if (auto it = topics_.find(key); it != topics_.end()) return it->second;
    }
    if (!create) return nullptr;
    std::unique_lock lock(topics_mutex_);
    auto& slot = topics_[key];
    if (!slot) slot = std::make_shared<Topic>();
    return slot;
}

std::vector<std::shared_ptr<FeedHub::Subscriber>> FeedHub::wildcard_subscribers(FeedKind kind) const {
    std::lock_guard lock(subs_mutex_);
    auto it = wildcard_.find(static_cast<int>(kind));
    return it == wildcard_.end() ? std::vector<std::shared_ptr<Subscriber>>{} : it->second;
}

void FeedHub::deliver(const std::vector<std::shared_ptr<Subscriber>>& subs, const FeedEvent& e) {
    for (const auto& s : subs)
        if (s->active->load()) s->handler(e);
}

void FeedHub::publish(FeedEvent event) {
    validate_payload(event.kind, event.payload);
    auto t = topic(event.kind, event.match_id, true);
    std::lock_guard lock(t->publish_mutex);

    const auto prev = std::atomic_load(&t->snap);
    const std::uint64_t last = prev ? prev->sequence() : 0;
    if (event.sequence != last + 1)
        throw OrderingError(std::string(to_string(event.kind)) + "/" + event.match_id +
                            ": expected sequence " + std::to_string(last + 1) + ", got " +
                            std::to_string(event.sequence));

    auto next = prev ? std::make_shared<FeedSnapshot>(*prev) : std::make_shared<FeedSnapshot>();
    next->kind = event.kind;
    next->match_id = event.match_id;
    next->latest = event;
    if (event.kind == FeedKind::SlamPointByPoint) {
        next->points[event.payload["set"].get<int>()][event.payload["game"].get<int>()].push_back(
            event.payload);
        next->point_count += 1;
    }
    std::atomic_store(&t->snap, std::shared_ptr<const FeedSnapshot>(std::move(next)));

    std::vector<std::shared_ptr<Subscriber>> subs;
    {
        std::lock_guard sl(subs_mutex_);
        subs = t->subscribers;
        if (auto it = wildcard_.find(static_cast<int>(event.kind)); it != wildcard_.end())
            subs.insert(subs.end(), it->second.begin(), it->second.end());
    }
    deliver(subs, event);
}

Subscription FeedHub::subscribe(FeedKind kind, std::optional<std::string> match_id,
                                FeedHandler handler, SubscribeOptions options) {
    auto flag = std::make_shared<std::atomic<bool>>(true);
    auto sub = std::make_shared<Subscriber>(Subscriber{std::move(handler), flag});

    if (match_id) {
        auto t = topic(kind, *match_id, true);
        std::lock_guard lock(t->publish_mutex);
        if (options.snapshot_first)
            if (auto snap = std::atomic_load(&t->snap)) sub->handler(snap->latest);
        std::lock_guard sl(subs_mutex_);
        t->subscribers.push_back(sub);
    } else {
        // Hold every existing topic of this kind so no event slips between the
        // snapshot and live delivery. Topic creation waits on the map lock.
        std::shared_lock map_lock(topics_mutex_);
        std::vector<std::unique_lock<std::mutex>> held;
        std::vector<std::shared_ptr<Topic>> topics;
        for (auto& [key, t] : topics_) {
            if (key.first != static_cast<int>(kind)) continue;
            held.emplace_back(t->publish_mutex);
            topics.push_back(t);
        }
        if (options.snapshot_first)
            for (const auto& t : topics)
                if (auto snap = std::atomic_load(&t->snap)) sub->handler(snap->latest);
        std::lock_guard sl(subs_mutex_);
        wildcard_[static_cast<int>(kind)].push_back(sub);
    }
    return Subscription(flag);
}

std::shared_ptr<const FeedSnapshot> FeedHub::find_snapshot(FeedKind kind,
                                                           std::string_view match_id) const noexcept {
    std::shared_ptr<Topic> t;
    {
        std::shared_lock lock(topics_mutex_);
        auto it = topics_.find(TopicKey{static_cast<int>(kind), std::string(match_id)});
        if (it == topics_.end()) return nullptr;
        t = it->second;
    }
    return std::atomic_load(&t->snap);
}

std::shared_ptr<const FeedSnapshot> FeedHub::snapshot(FeedKind kind, std::string_view match_id) const {
    auto s = find_snapshot(kind, match_id);
    if (!s)
        throw NotFoundError("no snapshot for " + std::string(to_string(kind)) + "/" +
                            std::string(match_id));
    return s;
}

std::uint64_t FeedHub::last_sequence(FeedKind kind, std::string_view match_id) const noexcept {
    auto s = find_snapshot(kind, match_id);
    return s ? s->sequence() : 0;
}

std::vector<std::string> FeedHub::match_ids() const {
    std::shared_lock lock(topics_mutex_);
    std::vector<std::string> ids;
    for (const auto& [key, t] : topics_) {
        if (!std::atomic_load(&t->snap)) continue;
        if (ids.empty() || ids.back() != key.second) {
            if (std::find(ids.begin(), ids.end(), key.second) == ids.end()) ids.push_back(key.second);
        }
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

nlohmann::json FeedHub::dump_snapshots() const {
    std::shared_lock lock(topics_mutex_);
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [key, t] : topics_)
        if (auto s = std::atomic_load(&t->snap)) out.push_back(s->to_json());
    return out;
}

void EventQueue::push(FeedEvent e) {
    {
        std::lock_guard lock(mutex_);
        if (closed_) return;
        items_.push_back(std::move(e));
    }
    cv_.notify_one();
}

std::optional<FeedEvent> EventQueue::pop_for(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mutex_);
    cv_.wait_for(lock, timeout, [&] { return !items_.empty() || closed_; });
    if (items_.empty()) return std::nullopt;
    FeedEvent e = std::move(items_.front());
    items_.pop_front();
    return e;
}

void EventQueue::close() {
    {
        std::lock_guard lock(mutex_);
        closed_ = true;
    }
    cv_.notify_all();
}

bool EventQueue::closed() const {
    std::lock_guard lock(mutex_);
    return closed_;
}

std::vector<FeedEvent> load_replay(std::istream& in) {
    std::vector<FeedEvent> events;
    std::map<std::pair<int, std::string>, std::uint64_t> last;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        FeedEvent e;
        try {
            e = feed_event_from_json(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& ex) {
            throw ParseError(ex.what(), line_no);
        } catch (const ValidationError& ex) {
            throw ParseError(ex.what(), line_no);
        }
        auto& prev = last[{static_cast<int>(e.kind), e.match_id}];
        if (e.sequence != prev + 1)
            throw OrderingError("line " + std::to_string(line_no) + ": " +
                                std::string(to_string(e.kind)) + "/" + e.match_id +
                                " expected sequence " + std::to_string(prev + 1) + ", got " +
                                std::to_string(e.sequence));
        prev = e.sequence;
        events.push_back(std::move(e));
    }
    return events;
}

std::vector<FeedEvent> load_replay(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open replay file " + path.string());
    return load_replay(in);
}

void run_replay(FeedHub& hub, const std::vector<FeedEvent>& events, double speed_multiplier) {
    if (!(speed_multiplier > 0.0)) throw ConfigurationError("speed multiplier must be positive");
    if (events.empty()) return;
    const bool paced = std::isfinite(speed_multiplier);
    const auto start = std::chrono::steady_clock::now();
    const std::int64_t t0 = events.front().timestamp_ms;
    for (const auto& e : events) {
        if (paced) {
            const double offset_ms = static_cast<double>(e.timestamp_ms - t0) / speed_multiplier;
            std::this_thread::sleep_until(
                start + std::chrono::microseconds(static_cast<std::int64_t>(offset_ms * 1000.0)));
        }
        hub.publish(e);
    }
}

} // namespace courtside
