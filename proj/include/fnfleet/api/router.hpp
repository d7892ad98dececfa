#pragma once

#include <fnfleet/api/control_plane.hpp>
#include <fnfleet/common/error.hpp>
#include <fnfleet/net/message.hpp>

#include <string>

namespace fnfleet::api {

/// One HTTP status per error code.
int http_status(ErrorCode code);

/// Maps the HTTP endpoint table onto the control plane. Device-facing
/// endpoints (POST /devices, POST /telemetry) are open; everything else
/// needs `Authorization: Bearer <admin token>`.
class Router {
public:
    Router(ControlPlane& plane, std::string admin_token) : plane_(plane), admin_token_(std::move(admin_token)) {}

    net::Response route(const net::Request& request);

    net::Handler handler()
    {
        return [this](const net::Request& request) { return route(request); };
    }

private:
    net::Response dispatch(const net::Request& request);
    bool authorized(const net::Request& request) const;

    ControlPlane& plane_;
    std::string admin_token_;
};

} // namespace fnfleet::api
