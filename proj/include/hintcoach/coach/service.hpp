// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "hintcoach/coach/context.hpp"

namespace hintcoach::coach {

struct ServiceRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

struct ServiceResponse {
    int status = 200;
    nlohmann::json body;
};

/// REST facade over a run directory (endpoints are listed in docs/api.md). Reads never change
/// state; every write needs an "author" and leaves an audit record.
class CoachService {
public:
    explicit CoachService(RunContext& context);
    ~CoachService();

    /// Dispatches one request without any network involved.
    ServiceResponse handle(const ServiceRequest& request);

    /// Binds the HTTP listener. Port 0 picks a free port; the bound port is returned.
    int bind(const std::string& host, int port);
    /// Serves until stop() is called. Requires bind().
    void listen();
    void stop();

private:
    ServiceResponse route(const ServiceRequest& request);
    void audit(const std::string& author, const std::string& action, const std::string& target,
               const nlohmann::json& details);

    RunContext& ctx_;
    struct Server;
    std::unique_ptr<Server> server_;
};

} // namespace hintcoach::coach
