#include "owmm/remote.hpp"

#include <atomic>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "owmm/bank.hpp"
#include "owmm/oracle.hpp"
#include "owmm/rng.hpp"
#include "owmm/wire.hpp"

namespace owmm {

RemotePolicy::RemotePolicy(const SceneSpec& scene, const RemoteConfig& config)
    : scene_(&scene), config_(config) {}
RemotePolicy::~RemotePolicy() = default;

PolicyOutput RemotePolicy::decide(const PolicyInput& input) {
    PolicyOutput out;
    const std::string body =
        build_decision_request(input, *scene_, config_.include_raster).dump();

    httplib::Client client(config_.host, config_.port);
    client.set_connection_timeout(0, config_.timeout_ms * 1000);
    client.set_read_timeout(0, config_.timeout_ms * 1000);
    client.set_write_timeout(0, config_.timeout_ms * 1000);

    std::string last_error;
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
        httplib::Result res = client.Post(config_.path, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "server error: HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            out.error = "rejected: HTTP " + std::to_string(res->status) + " " + res->body;
            return out;
        }
        const WireResponse wire = parse_decision_response(res->body);
        if (!wire.ok) {
            out.error = wire.error;
            return out;
        }
        out.ok = true;
        out.raw_text = wire.raw_text;
        return out;
    }
    out.error = last_error + " after " + std::to_string(config_.retries + 1) + " attempts";
    return out;
}

struct MockPolicyServer::Impl {
    MockServerConfig config;
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> requests{0};
    std::mutex rng_mutex;
    Rng rng;

    explicit Impl(const MockServerConfig& cfg) : config(cfg), rng(cfg.seed) {}

    bool inject_failure() {
        const int n = requests.fetch_add(1) + 1;
        if (config.fail_every > 0 && n % config.fail_every == 0) return true;
        if (config.fail_rate > 0.0) {
            std::lock_guard<std::mutex> lock(rng_mutex);
            return rng.uniform() < config.fail_rate;
        }
        return false;
    }

    void handle(const httplib::Request& req, httplib::Response& res) {
        if (inject_failure()) {
            res.status = 500;
            res.set_content(R"({"error":"injected failure"})", "application/json");
            return;
        }
        if (config.mode == MockServerConfig::Mode::fixed) {
            res.set_content(config.fixed_body, "application/json");
            return;
        }
        json request = json::parse(req.body, nullptr, false);
        if (request.is_discarded()) {
            res.status = 400;
            res.set_content(R"({"error":"request body is not JSON"})", "application/json");
            return;
        }
        const WireDecisionView view = decision_view_from_wire(request);
        if (!view.ok) {
            res.status = 400;
            res.set_content(json{{"error", view.error}}.dump(), "application/json");
            return;
        }
        const ParsedDecision decision = oracle_decide(view.view, default_template_bank());
        res.set_content(json{{"raw_text", decision_to_text(decision)}}.dump(),
                        "application/json");
    }
};

MockPolicyServer::MockPolicyServer(const MockServerConfig& config)
    : impl_(new Impl(config)) {
    impl_->server.Post(impl_->config.path, [this](const httplib::Request& req,
                                                  httplib::Response& res) {
        impl_->handle(req, res);
    });
}

MockPolicyServer::~MockPolicyServer() { stop(); }

bool MockPolicyServer::start(int port) {
    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
        if (impl_->port <= 0) return false;
    } else {
        if (!impl_->server.bind_to_port("127.0.0.1", port)) return false;
        impl_->port = port;
    }
    impl_->thread = std::thread([this]() { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return true;
}

void MockPolicyServer::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

void MockPolicyServer::wait() {
    if (impl_->thread.joinable()) impl_->thread.join();
}

int MockPolicyServer::port() const { return impl_->port; }

int MockPolicyServer::requests_served() const { return impl_->requests.load(); }

}  // namespace owmm
