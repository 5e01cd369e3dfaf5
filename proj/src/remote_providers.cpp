#include "courtside/errors.hpp"
#include "courtside/providers.hpp"

#include <httplib.h>

#include <cmath>

namespace courtside {

namespace {

nlohmann::json post_json(const RemoteEndpoint& ep, const std::string& path, const nlohmann::json& body,
                         std::chrono::milliseconds timeout) {
    if (timeout.count() <= 0) throw ProviderTimeout("no time left for " + path);
    httplib::Client client(ep.base_url);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res) {
        if (res.error() == httplib::Error::Read || res.error() == httplib::Error::ConnectionTimeout)
            throw ProviderTimeout(path + " timed out");
        throw ProviderError(path + " transport failure: " + httplib::to_string(res.error()));
    }
    if (res->status != 200)
        throw ProviderError(path + " returned HTTP " + std::to_string(res->status));
    try {
        return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(path + " returned malformed JSON: " + e.what());
    }
}

} // namespace

CompletionResult RemoteCompletionProvider::complete(const CompletionRequest& request) {
    const auto start = Clock::now();
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(request.deadline - start);
    const auto j = post_json(endpoint_, "/complete",
                             {{"prompt", request.prompt}, {"max_tokens", request.max_completion_tokens}},
                             std::min(remaining, endpoint_.request_timeout));
    if (Clock::now() > request.deadline) throw ProviderTimeout("completion arrived after the deadline");
    try {
        CompletionResult r;
        r.text = j.at("text").get<std::string>();
        r.prompt_token_count = std::max(0, j.value("prompt_tokens", whitespace_tokens(request.prompt)));
        r.completion_token_count = std::max(0, j.value("completion_tokens", whitespace_tokens(r.text)));
        r.latency_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("completion response: ") + e.what());
    }
}

Embedding RemoteEmbedder::embed(std::string_view text) const {
    if (text.empty()) throw ValidationError("cannot embed empty text");
    const auto j = post_json(endpoint_, "/embed", {{"text", text}}, endpoint_.request_timeout);
    Embedding v;
    try {
        v = j.at("vector").get<Embedding>();
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("embedding response: ") + e.what());
    }
    if (v.size() != dimension_)
        throw ProviderError("embedding dimension " + std::to_string(v.size()) + " != " +
                            std::to_string(dimension_));
    double norm = 0;
    for (double x : v) norm += x * x;
    if (norm == 0) throw ProviderError("zero embedding vector");
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

} // namespace courtside
