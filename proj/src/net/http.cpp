#include <fnfleet/net/http.hpp>

#include <fnfleet/common/error.hpp>

#include <httplib.h>

namespace fnfleet::net {

namespace {

Response to_response(const httplib::Result& result)
{
    Response response;
    response.status = result->status;
    response.body = result->body;
    response.content_type = result->get_header_value("Content-Type");
    return response;
}

} // namespace

Response HttpClient::send(const std::string& target, const Request& request)
{
    Url url = Url::parse(target);
    httplib::Client client(url.host, url.port);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);

    httplib::Headers headers;
    for (const auto& [key, value] : request.headers) {
        if (key != "Content-Type") {
            headers.emplace(key, value);
        }
    }
    std::string path = request.path;
    if (!request.query.empty()) {
        httplib::Params params(request.query.begin(), request.query.end());
        path = httplib::append_query_params(path, params);
    }
    auto content_type = request.header("Content-Type");
    if (content_type.empty()) {
        content_type = "application/json";
    }

    httplib::Result result;
    if (request.method == "GET") {
        result = client.Get(path, headers);
    } else if (request.method == "POST") {
        result = client.Post(path, headers, request.body, content_type);
    } else if (request.method == "PUT") {
        result = client.Put(path, headers, request.body, content_type);
    } else if (request.method == "DELETE") {
        result = client.Delete(path, headers);
    } else {
        throw ValidationError("unsupported method " + request.method);
    }
    if (!result) {
        throw ConnectionError(target + ": " + httplib::to_string(result.error()));
    }
    return to_response(result);
}

struct HttpServer::Impl {
    httplib::Server server;
};

HttpServer::HttpServer(Handler handler) : impl_(std::make_unique<Impl>())
{
    auto dispatch = [handler = std::move(handler)](const httplib::Request& in, httplib::Response& out) {
        Request request;
        request.method = in.method;
        request.path = in.path;
        request.body = in.body;
        for (const auto& [key, value] : in.params) {
            request.query[key] = value;
        }
        for (const auto& [key, value] : in.headers) {
            request.headers[key] = value;
        }
        Response response;
        try {
            response = handler(request);
        } catch (const std::exception& e) {
            response.status = 500;
            response.body = std::string("{\"error\":\"internal\",\"detail\":\"") + e.what() + "\"}";
        }
        out.status = response.status;
        out.set_content(response.body, response.content_type.c_str());
    };
    impl_->server.Get(".*", dispatch);
    impl_->server.Post(".*", dispatch);
    impl_->server.Put(".*", dispatch);
    impl_->server.Delete(".*", dispatch);
}

HttpServer::~HttpServer()
{
    stop();
}

int HttpServer::start(const std::string& host, int port)
{
    if (port == 0) {
        port_ = impl_->server.bind_to_any_port(host);
    } else {
        port_ = impl_->server.bind_to_port(host, port) ? port : -1;
    }
    if (port_ <= 0) {
        throw ConnectionError("cannot bind " + host + ":" + std::to_string(port));
    }
    thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port_;
}

void HttpServer::listen(const std::string& host, int port)
{
    if (!impl_->server.bind_to_port(host, port)) {
        throw ConnectionError("cannot bind " + host + ":" + std::to_string(port));
    }
    port_ = port;
    impl_->server.listen_after_bind();
}

void HttpServer::stop()
{
    impl_->server.stop();
    if (thread_.joinable()) {
        thread_.join();
    }
}

} // namespace fnfleet::net
