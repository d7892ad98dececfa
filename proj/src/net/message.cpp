#include <fnfleet/net/message.hpp>

#include <fnfleet/common/error.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>

namespace fnfleet::net {

namespace {

bool iequals(const std::string& a, const std::string& b)
{
    return std::equal(a.begin(), a.end(), b.begin(), b.end(),
                      [](char x, char y) { return std::tolower(x) == std::tolower(y); });
}

} // namespace

std::string Request::header(const std::string& name) const
{
    for (const auto& [key, value] : headers) {
        if (iequals(key, name)) {
            return value;
        }
    }
    return {};
}

Response Client::post_json(const std::string& target, const std::string& path, const std::string& body,
                           std::map<std::string, std::string> headers)
{
    Request request;
    request.method = "POST";
    request.path = path;
    request.body = body;
    request.headers = std::move(headers);
    request.headers.emplace("Content-Type", "application/json");
    return send(target, request);
}

Response Client::get(const std::string& target, const std::string& path, std::map<std::string, std::string> query,
                     std::map<std::string, std::string> headers)
{
    Request request;
    request.method = "GET";
    request.path = path;
    request.query = std::move(query);
    request.headers = std::move(headers);
    return send(target, request);
}

Url Url::parse(const std::string& text)
{
    std::string rest = text;
    if (auto scheme = rest.find("://"); scheme != std::string::npos) {
        if (rest.substr(0, scheme) != "http") {
            throw ValidationError("only http URLs are supported: " + text);
        }
        rest = rest.substr(scheme + 3);
    }
    Url url;
    auto slash = rest.find('/');
    std::string authority = rest.substr(0, slash);
    if (slash != std::string::npos) {
        url.path = rest.substr(slash);
    }
    auto colon = authority.rfind(':');
    if (colon != std::string::npos) {
        url.host = authority.substr(0, colon);
        auto port_text = authority.substr(colon + 1);
        auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), url.port);
        if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || url.port <= 0 || url.port > 65535) {
            throw ValidationError("bad port in URL: " + text);
        }
    } else {
        url.host = authority;
    }
    if (url.host.empty()) {
        throw ValidationError("URL has no host: " + text);
    }
    return url;
}

} // namespace fnfleet::net
