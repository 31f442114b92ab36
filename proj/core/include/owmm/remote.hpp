#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "owmm/policy.hpp"
#include "owmm/scene.hpp"

namespace owmm {

struct RemoteConfig {
    std::string host = "127.0.0.1";
    int port = 8777;
    std::string path = "/decide";
    int timeout_ms = 5000;
    int retries = 2;  // extra attempts after a transport error or 5xx
    bool include_raster = false;
};

// Forwards each decision step to an HTTP endpoint speaking the wire
// protocol. Transport errors and 5xx responses are retried up to
// `retries` times; 4xx responses and malformed bodies fail immediately.
// The scene resolves the task binding serialized into each request.
class RemotePolicy : public Policy {
public:
    RemotePolicy(const SceneSpec& scene, const RemoteConfig& config);
    ~RemotePolicy() override;

    std::string name() const override { return "remote"; }
    PolicyOutput decide(const PolicyInput& input) override;

private:
    const SceneSpec* scene_;
    RemoteConfig config_;
};

struct MockServerConfig {
    enum class Mode { echo_oracle, fixed };
    Mode mode = Mode::echo_oracle;
    std::string path = "/decide";
    std::string fixed_body;  // mode fixed: verbatim response body
    // Failure injection, applied before answering: every `fail_every`-th
    // request (when > 0) or with probability `fail_rate` (seeded) the server
    // answers 500 so client retry handling can be exercised.
    double fail_rate = 0.0;
    int fail_every = 0;
    uint64_t seed = 0;
};

// In-process HTTP endpoint that impersonates a decision model. The
// echo_oracle mode rebuilds the observation view from the wire payload and
// answers with the scripted expert's decision, which makes remote-vs-local
// equivalence testable end to end.
class MockPolicyServer {
public:
    explicit MockPolicyServer(const MockServerConfig& config);
    ~MockPolicyServer();

    MockPolicyServer(const MockPolicyServer&) = delete;
    MockPolicyServer& operator=(const MockPolicyServer&) = delete;

    // Binds 127.0.0.1:`port` (0 picks an ephemeral port) and serves on a
    // background thread. Returns false when the port cannot be bound.
    bool start(int port = 0);
    void stop();
    // Blocks until stop() is called from elsewhere (CLI foreground mode).
    void wait();

    int port() const;
    int requests_served() const;  // includes injected failures

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace owmm
