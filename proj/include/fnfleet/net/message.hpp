#pragma once

#include <functional>
#include <map>
#include <string>

namespace fnfleet::net {

struct Request {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::map<std::string, std::string> headers;
    std::string body;

    std::string header(const std::string& name) const;
};

struct Response {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

using Handler = std::function<Response(const Request&)>;

/// Sends a request to `target` ("host:port" or "http://host:port").
/// Throws ConnectionError when the peer cannot be reached at all; any HTTP
/// status, including errors, comes back as a Response.
class Client {
public:
    virtual ~Client() = default;
    virtual Response send(const std::string& target, const Request& request) = 0;

    Response post_json(const std::string& target, const std::string& path, const std::string& body,
                       std::map<std::string, std::string> headers = {});
    Response get(const std::string& target, const std::string& path, std::map<std::string, std::string> query = {},
                 std::map<std::string, std::string> headers = {});
};

/// A parsed `http://host:port/path` URL. Scheme defaults to http, port to 80.
struct Url {
    std::string host;
    int port = 80;
    std::string path = "/";

    std::string authority() const { return host + ":" + std::to_string(port); }

    static Url parse(const std::string& text);
};

} // namespace fnfleet::net
