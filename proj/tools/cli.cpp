#include "cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <thread>

#include <CLI11.hpp>

#include "owmm/agent.hpp"
#include "owmm/datagen.hpp"
#include "owmm/eval.hpp"
#include "owmm/oracle.hpp"
#include "owmm/pivot.hpp"
#include "owmm/remote.hpp"
#include "owmm/rng.hpp"

namespace owmm {
namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfra = 2;
constexpr int kExitValidation = 3;

// OWMM_SEED beats the flag so sweeps can rewire the seed without touching
// command lines.
uint64_t apply_seed_env(uint64_t seed) {
    const char* env = std::getenv("OWMM_SEED");
    if (env == nullptr || *env == '\0') return seed;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
        std::cerr << "warning: OWMM_SEED is not an integer, keeping --seed\n";
        return seed;
    }
    return static_cast<uint64_t>(v);
}

// ---------------------------------------------------------------- policies

struct PolicySpec {
    enum class Kind { oracle, noisy, remote, pivot } kind = Kind::oracle;
    NoiseParams noise;
    RemoteConfig remote;
    uint64_t pivot_seed = 0;
    std::string text = "oracle";
};

bool parse_policy_spec(const std::string& text, PolicySpec& out, std::string& error) {
    out.text = text;
    if (text == "oracle") {
        out.kind = PolicySpec::Kind::oracle;
        return true;
    }
    if (text.rfind("noisy:", 0) == 0) {
        out.kind = PolicySpec::Kind::noisy;
        const std::string args = text.substr(6);
        double sigma = 0.0, p_wrong = 0.0;
        unsigned long long seed = 0;
        const int got = std::sscanf(args.c_str(), "%lf,%lf,%llu", &sigma, &p_wrong, &seed);
        if (got < 2 || sigma < 0.0 || p_wrong < 0.0 || p_wrong > 1.0) {
            error = "noisy policy wants noisy:<sigma_px>,<p_wrong_kind>[,<seed>]";
            return false;
        }
        out.noise.sigma_px = sigma;
        out.noise.p_wrong_kind = p_wrong;
        out.noise.seed = got >= 3 ? seed : 0;
        return true;
    }
    if (text.rfind("remote:", 0) == 0) {
        out.kind = PolicySpec::Kind::remote;
        const std::string rest = text.substr(7);
        const size_t colon = rest.find(':');
        if (colon == std::string::npos || colon == 0) {
            error = "remote policy wants remote:<host>:<port>[/path]";
            return false;
        }
        out.remote.host = rest.substr(0, colon);
        const size_t slash = rest.find('/', colon);
        const std::string port_text = slash == std::string::npos
                                          ? rest.substr(colon + 1)
                                          : rest.substr(colon + 1, slash - colon - 1);
        char* end = nullptr;
        const long port = std::strtol(port_text.c_str(), &end, 10);
        if (end == port_text.c_str() || *end != '\0' || port <= 0 || port > 65535) {
            error = "remote policy has a malformed port";
            return false;
        }
        out.remote.port = static_cast<int>(port);
        if (slash != std::string::npos) out.remote.path = rest.substr(slash);
        return true;
    }
    if (text == "pivot" || text.rfind("pivot:", 0) == 0) {
        out.kind = PolicySpec::Kind::pivot;
        if (text.size() > 6) {
            char* end = nullptr;
            const unsigned long long seed = std::strtoull(text.c_str() + 6, &end, 10);
            if (end == text.c_str() + 6 || *end != '\0') {
                error = "pivot policy wants pivot[:<seed>]";
                return false;
            }
            out.pivot_seed = seed;
        }
        return true;
    }
    error = "unknown policy \"" + text + "\" (oracle | noisy:s,p[,seed] | "
            "remote:host:port[/path] | pivot[:seed])";
    return false;
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const SceneSpec& scene) {
    switch (spec.kind) {
        case PolicySpec::Kind::oracle: return std::make_unique<OraclePolicy>(scene);
        case PolicySpec::Kind::noisy:
            return std::make_unique<NoisyOraclePolicy>(scene, spec.noise);
        case PolicySpec::Kind::remote:
            return std::make_unique<RemotePolicy>(scene, spec.remote);
        case PolicySpec::Kind::pivot:
            return std::make_unique<PivotPolicy>(scene, spec.pivot_seed);
    }
    return nullptr;
}

// Measures each decide() call; timings go to a sidecar, never into traces.
class TimedPolicy : public Policy {
public:
    TimedPolicy(Policy& inner, std::vector<double>& sink) : inner_(&inner), sink_(&sink) {}

    std::string name() const override { return inner_->name(); }
    PolicyOutput decide(const PolicyInput& input) override {
        const auto t0 = std::chrono::steady_clock::now();
        PolicyOutput out = inner_->decide(input);
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        sink_->push_back(dt.count());
        return out;
    }

private:
    Policy* inner_;
    std::vector<double>* sink_;
};

// ---------------------------------------------------------------- helpers

int fail_validation(const std::string& message) {
    std::cerr << "error: " << message << "\n";
    return kExitValidation;
}

int fail_infra(const std::string& message) {
    std::cerr << "error: " << message << "\n";
    return kExitInfra;
}

bool make_dirs(const fs::path& dir, std::string& error) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        error = "cannot create " + dir.string() + ": " + ec.message();
        return false;
    }
    return true;
}

struct WorldSet {
    std::vector<SceneSpec> scenes;
    std::vector<TaskInstance> tasks;        // tasks_per_scene per scene, in order
    std::vector<int> task_scene;            // scene index per task
    GoalThresholds thresholds;
};

// Scene battery, distance thresholds and task list shared by run-episodes
// and synth-data: scene i from seed+i, task ti of a scene from seed ti.
bool build_world(uint64_t seed, int scenes, int tasks_per_scene, WorldSet& out,
                 std::string& error) {
    for (int i = 0; i < scenes; ++i) {
        SceneGenResult gen = generate_scene(seed + static_cast<uint64_t>(i));
        if (gen.status != SceneGenStatus::ok) {
            error = "scene generation failed: " + gen.error;
            return false;
        }
        out.scenes.push_back(std::move(gen.scene));
    }
    std::vector<double> diagonals;
    for (const auto& scene : out.scenes)
        for (const auto& rec : scene.receptacles) diagonals.push_back(receptacle_diagonal(rec));
    out.thresholds = compute_goal_thresholds(diagonals);
    if (!out.thresholds.ok) {
        error = out.thresholds.error;
        return false;
    }
    for (size_t si = 0; si < out.scenes.size(); ++si) {
        for (int ti = 0; ti < tasks_per_scene; ++ti) {
            TaskSpawnResult spawned = spawn_task(out.scenes[si], static_cast<uint64_t>(ti),
                                                 out.thresholds.strict, out.thresholds.lenient);
            if (spawned.status != TaskSpawnStatus::ok) {
                error = "task spawn failed: " + spawned.error;
                return false;
            }
            out.tasks.push_back(std::move(spawned.task));
            out.task_scene.push_back(static_cast<int>(si));
        }
    }
    return true;
}

bool write_world(const fs::path& dir, const WorldSet& world, std::string& error) {
    if (!make_dirs(dir / "scenes", error) || !make_dirs(dir / "tasks", error)) return false;
    try {
        for (const auto& scene : world.scenes)
            write_text_file(dir / "scenes" / (scene.scene_id + ".json"),
                            canonical_dump(scene.to_json()) + "\n");
        for (const auto& task : world.tasks)
            write_text_file(dir / "tasks" / (task.task_id + ".json"),
                            canonical_dump(task.to_json()) + "\n");
    } catch (const std::exception& e) {
        error = e.what();
        return false;
    }
    return true;
}

// ---------------------------------------------------------------- gen-scenes

struct GenScenesArgs {
    int count = 2;
    uint64_t seed = 7;
    std::string out_dir;
};

int cmd_gen_scenes(const GenScenesArgs& args) {
    const uint64_t seed = apply_seed_env(args.seed);
    std::string error;
    if (!make_dirs(args.out_dir, error)) return fail_infra(error);
    for (int i = 0; i < args.count; ++i) {
        SceneGenResult gen = generate_scene(seed + static_cast<uint64_t>(i));
        if (gen.status != SceneGenStatus::ok)
            return fail_validation("scene generation failed: " + gen.error);
        try {
            write_text_file(fs::path(args.out_dir) / (gen.scene.scene_id + ".json"),
                            canonical_dump(gen.scene.to_json()) + "\n");
        } catch (const std::exception& e) {
            return fail_infra(e.what());
        }
    }
    std::cout << "wrote " << args.count << " scenes to " << args.out_dir << "\n";
    return kExitOk;
}

// ------------------------------------------------------------- run-episodes

struct RunEpisodesArgs {
    int scenes = 2;
    int tasks_per_scene = 25;
    uint64_t seed = 7;
    std::string policy = "oracle";
    std::string out_dir;
    int max_steps = 20;
    int parallel = 1;
};

struct EpisodeProduct {
    std::string trace_text;
    json timing_line;
    std::string terminal;
    bool success_lenient = false;
    std::string error;  // non-empty = setup failure
};

EpisodeProduct run_one_episode(const SceneSpec& scene, const TaskInstance& task,
                               int episode_index, uint64_t run_seed, const PolicySpec& spec,
                               const AgentConfig& agent_config, const SimParams& sim) {
    EpisodeProduct product;
    const uint64_t episode_seed = Rng::derive(run_seed, fnv1a64(task.task_id));
    SetupResult setup = prepare_episode(scene, task, sim, episode_seed);
    if (!setup.ok) {
        product.error = "episode setup failed for " + task.task_id + ": " + setup.error;
        return product;
    }
    std::vector<double> seconds;
    const std::unique_ptr<Policy> policy = make_policy(spec, setup.setup.scene);
    TimedPolicy timed(*policy, seconds);
    const EpisodeResult result = run_episode(setup.setup, timed, agent_config);

    json frames = json::array();
    for (const auto& frame : setup.setup.frames)
        frames.push_back(json{{"index", frame.index}, {"provenance", frame.provenance}});
    const json start{{"type", "episode_start"}, {"scene_id", scene.scene_id},
                     {"task_id", task.task_id}, {"episode", episode_index},
                     {"seed", episode_seed},    {"policy", spec.text},
                     {"frames", std::move(frames)}};
    product.trace_text = canonical_line(start);
    for (const auto& step : result.steps) product.trace_text += canonical_line(step.to_json());
    product.trace_text += canonical_line(
        episode_end_json(result, scene.scene_id, task.task_id, episode_index, episode_seed));
    product.timing_line = json{{"task_id", task.task_id},
                               {"episode", episode_index},
                               {"decision_seconds", seconds}};
    product.terminal = terminal_name(result.terminal);
    product.success_lenient = result.success_lenient;
    return product;
}

int cmd_run_episodes(const RunEpisodesArgs& args) {
    const uint64_t seed = apply_seed_env(args.seed);
    PolicySpec spec;
    std::string error;
    if (!parse_policy_spec(args.policy, spec, error)) {
        std::cerr << "error: " << error << "\n";
        return kExitUsage;
    }
    WorldSet world;
    if (!build_world(seed, args.scenes, args.tasks_per_scene, world, error))
        return fail_validation(error);
    const fs::path out_dir(args.out_dir);
    if (!make_dirs(out_dir, error)) return fail_infra(error);
    if (!write_world(out_dir, world, error)) return fail_infra(error);

    AgentConfig agent_config;
    agent_config.max_steps = args.max_steps;
    const SimParams sim;

    const int total = static_cast<int>(world.tasks.size());
    std::vector<EpisodeProduct> products(static_cast<size_t>(total));
    std::atomic<int> next{0};
    const int workers = std::max(1, std::min(args.parallel, total));
    const auto worker = [&]() {
        for (int job = next.fetch_add(1); job < total; job = next.fetch_add(1)) {
            products[static_cast<size_t>(job)] =
                run_one_episode(world.scenes[static_cast<size_t>(world.task_scene
                                    [static_cast<size_t>(job)])],
                                world.tasks[static_cast<size_t>(job)], job, seed, spec,
                                agent_config, sim);
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(static_cast<size_t>(workers));
        for (int i = 0; i < workers; ++i) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    std::string trace_text, timings_text;
    std::map<std::string, int> terminals;
    int lenient_successes = 0;
    for (const auto& product : products) {
        if (!product.error.empty()) return fail_validation(product.error);
        trace_text += product.trace_text;
        timings_text += canonical_line(product.timing_line);
        ++terminals[product.terminal];
        lenient_successes += product.success_lenient ? 1 : 0;
    }
    const json config{{"seed", seed},
                      {"scenes", args.scenes},
                      {"tasks_per_scene", args.tasks_per_scene},
                      {"policy", spec.text},
                      {"max_steps", args.max_steps},
                      {"thresholds", json{{"lenient", world.thresholds.lenient},
                                          {"strict", world.thresholds.strict}}}};
    try {
        write_text_file(out_dir / "trace.jsonl", trace_text);
        write_text_file(out_dir / "timings.jsonl", timings_text);
        write_text_file(out_dir / "config.json", canonical_dump(config) + "\n");
    } catch (const std::exception& e) {
        return fail_infra(e.what());
    }

    std::cout << "ran " << total << " episodes with policy " << spec.text << " -> "
              << args.out_dir << "\n";
    std::cout << "lenient successes: " << lenient_successes << "/" << total << "; terminals:";
    for (const auto& [name, count] : terminals) std::cout << " " << name << "=" << count;
    std::cout << "\n";
    return kExitOk;
}

// --------------------------------------------------------------- synth-data

struct SynthDataArgs {
    int scenes = 2;
    int tasks_per_scene = 25;
    uint64_t seed = 7;
    std::string out_dir;
    int waypoint_interval = 5;
    int arm_frames = 3;
};

int cmd_synth_data(const SynthDataArgs& args) {
    DatagenParams params;
    params.scenes = args.scenes;
    params.tasks_per_scene = args.tasks_per_scene;
    params.seed = apply_seed_env(args.seed);
    params.waypoint_interval = args.waypoint_interval;
    params.arm_frames = args.arm_frames;

    const SynthResult result = synthesize_dataset(params);
    if (!result.ok) return fail_validation(result.error);

    const fs::path out_dir(args.out_dir);
    std::string error;
    if (!make_dirs(out_dir / "scenes", error) || !make_dirs(out_dir / "tasks", error))
        return fail_infra(error);
    std::string train_text, test_text;
    for (const auto& record : result.train) train_text += canonical_line(record.to_json());
    for (const auto& record : result.test) test_text += canonical_line(record.to_json());
    json manifest = result.manifest();
    manifest["seed"] = params.seed;
    manifest["scenes"] = params.scenes;
    manifest["tasks_per_scene"] = params.tasks_per_scene;
    try {
        write_text_file(out_dir / "train.jsonl", train_text);
        write_text_file(out_dir / "test.jsonl", test_text);
        write_text_file(out_dir / "manifest.json", canonical_dump(manifest) + "\n");
        for (const auto& scene : result.scenes)
            write_text_file(out_dir / "scenes" / (scene.scene_id + ".json"),
                            canonical_dump(scene.to_json()) + "\n");
        for (const auto& task : result.tasks)
            write_text_file(out_dir / "tasks" / (task.task_id + ".json"),
                            canonical_dump(task.to_json()) + "\n");
    } catch (const std::exception& e) {
        return fail_infra(e.what());
    }
    std::cout << "synthesized " << result.train.size() << " train + " << result.test.size()
              << " test records -> " << args.out_dir << "\n";
    std::cout << "episodes " << result.stats.episodes_valid << "/" << result.stats.episodes_total
              << " valid; candidates " << result.stats.candidates << ", dropped filter "
              << result.stats.dropped_filter << ", off-role " << result.stats.dropped_role
              << ", off-split " << result.stats.dropped_train_leakage << "+"
              << result.stats.dropped_test_offsplit << "\n";
    return kExitOk;
}

// -------------------------------------------------------------- eval-single

struct EvalSingleArgs {
    std::string records_path;
    std::string predictions_path;
    std::string policy;
    std::string report_path;
};

bool load_records(const std::string& path, std::vector<QARecord>& out, std::string& error) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const std::exception& e) {
        error = e.what();
        return false;
    }
    size_t pos = 0;
    int line_no = 0;
    while (pos < text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        const std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            error = path + ":" + std::to_string(line_no) + ": not valid JSON";
            return false;
        }
        QARecord record;
        std::string record_error;
        if (!QARecord::from_json(j, record, record_error)) {
            error = path + ":" + std::to_string(line_no) + ": " + record_error;
            return false;
        }
        out.push_back(std::move(record));
    }
    return true;
}

bool load_predictions(const std::string& path, std::map<std::string, Prediction>& out,
                      std::string& error) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const std::exception& e) {
        error = e.what();
        return false;
    }
    size_t pos = 0;
    int line_no = 0;
    while (pos < text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        const std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("record_id") ||
            !j["record_id"].is_string() || !j.contains("response") ||
            !j["response"].is_string()) {
            error = path + ":" + std::to_string(line_no) +
                    ": prediction lines are {\"record_id\", \"response\"}";
            return false;
        }
        out[j["record_id"].get<std::string>()] =
            prediction_from_text(j["response"].get<std::string>());
    }
    return true;
}

int cmd_eval_single(const EvalSingleArgs& args) {
    if (args.predictions_path.empty() == args.policy.empty()) {
        std::cerr << "error: pass exactly one of --predictions or --policy\n";
        return kExitUsage;
    }
    std::vector<QARecord> records;
    std::string error;
    if (!load_records(args.records_path, records, error)) return fail_validation(error);
    if (records.empty()) return fail_validation("no records in " + args.records_path);

    std::map<std::string, Prediction> predictions;
    if (!args.predictions_path.empty()) {
        if (!load_predictions(args.predictions_path, predictions, error))
            return fail_validation(error);
    } else {
        PolicySpec spec;
        if (!parse_policy_spec(args.policy, spec, error)) {
            std::cerr << "error: " << error << "\n";
            return kExitUsage;
        }
        if (spec.kind != PolicySpec::Kind::oracle && spec.kind != PolicySpec::Kind::noisy) {
            std::cerr << "error: eval-single supports oracle and noisy policies\n";
            return kExitUsage;
        }
        predictions = predictions_from_expert(records, spec.noise);
    }

    const SingleStepMetrics metrics = evaluate_single_step(records, predictions);
    std::cout << metrics.render_table();
    if (!args.report_path.empty()) {
        try {
            write_text_file(args.report_path, canonical_dump(metrics.to_json()) + "\n");
        } catch (const std::exception& e) {
            return fail_infra(e.what());
        }
    }
    return kExitOk;
}

// ------------------------------------------------------------ eval-episodic

struct EvalEpisodicArgs {
    std::string run_dir;
    bool timings = false;
    std::string report_path;
};

int cmd_eval_episodic(const EvalEpisodicArgs& args) {
    const fs::path run_dir(args.run_dir);
    if (!fs::exists(run_dir / "trace.jsonl"))
        return fail_infra("no trace.jsonl under " + args.run_dir);
    const TraceParseResult trace = parse_trace_file((run_dir / "trace.jsonl").string());
    if (!trace.ok) return fail_validation("trace.jsonl: " + trace.error);

    std::map<std::string, SceneSpec> scenes;
    std::map<std::string, TaskInstance> tasks;
    try {
        for (const auto& entry : fs::directory_iterator(run_dir / "scenes")) {
            SceneSpec scene = SceneSpec::from_json(parse_json_file(entry.path()));
            scenes[scene.scene_id] = std::move(scene);
        }
        for (const auto& entry : fs::directory_iterator(run_dir / "tasks")) {
            TaskInstance task = TaskInstance::from_json(parse_json_file(entry.path()));
            tasks[task.task_id] = std::move(task);
        }
    } catch (const std::exception& e) {
        return fail_validation(e.what());
    }

    std::vector<double> decision_seconds;
    if (args.timings) {
        std::string text;
        try {
            text = read_text_file(run_dir / "timings.jsonl");
        } catch (const std::exception& e) {
            return fail_infra(e.what());
        }
        size_t pos = 0;
        while (pos < text.size()) {
            size_t end = text.find('\n', pos);
            if (end == std::string::npos) end = text.size();
            const std::string line = text.substr(pos, end - pos);
            pos = end + 1;
            if (line.empty()) continue;
            const json j = json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object() || !j.contains("decision_seconds") ||
                !j["decision_seconds"].is_array())
                return fail_validation("timings.jsonl: malformed line");
            for (const auto& v : j["decision_seconds"])
                if (v.is_number()) decision_seconds.push_back(v.get<double>());
        }
    }

    const EpisodicEvalResult result =
        evaluate_episodes(trace.episodes, scenes, tasks, {}, decision_seconds);
    if (!result.ok) return fail_validation(result.error);
    std::cout << result.metrics.render_table();
    if (!args.report_path.empty()) {
        try {
            write_text_file(args.report_path, canonical_dump(result.metrics.to_json()) + "\n");
        } catch (const std::exception& e) {
            return fail_infra(e.what());
        }
    }
    return kExitOk;
}

// -------------------------------------------------------------- mock-policy

struct MockPolicyArgs {
    int port = 8777;
    std::string mode = "echo-oracle";
    std::string fixed_body;
    double fail_rate = 0.0;
    int fail_every = 0;
    uint64_t seed = 0;
};

MockPolicyServer* g_mock_server = nullptr;

void handle_mock_signal(int) {
    if (g_mock_server != nullptr) g_mock_server->stop();
}

int cmd_mock_policy(const MockPolicyArgs& args) {
    MockServerConfig config;
    if (args.mode == "echo-oracle") {
        config.mode = MockServerConfig::Mode::echo_oracle;
    } else if (args.mode == "fixed") {
        config.mode = MockServerConfig::Mode::fixed;
        if (args.fixed_body.empty()) {
            std::cerr << "error: --mode fixed needs --fixed-body\n";
            return kExitUsage;
        }
    } else {
        std::cerr << "error: --mode is echo-oracle or fixed\n";
        return kExitUsage;
    }
    config.fixed_body = args.fixed_body;
    config.fail_rate = args.fail_rate;
    config.fail_every = args.fail_every;
    config.seed = apply_seed_env(args.seed);

    MockPolicyServer server(config);
    if (!server.start(args.port))
        return fail_infra("cannot bind 127.0.0.1:" + std::to_string(args.port));
    g_mock_server = &server;
    std::signal(SIGINT, handle_mock_signal);
    std::signal(SIGTERM, handle_mock_signal);
    std::cout << "mock policy (" << args.mode << ") listening on 127.0.0.1:" << server.port()
              << std::endl;
    server.wait();
    g_mock_server = nullptr;
    std::cout << "served " << server.requests_served() << " requests\n";
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Desk-scale benchmark kit for open-world mobile manipulation"};
    app.require_subcommand(1);
    app.set_config("--config", "", "INI config file; command-line flags take precedence");

    GenScenesArgs gen_args;
    CLI::App* gen = app.add_subcommand("gen-scenes", "Generate scene files");
    gen->add_option("--count", gen_args.count, "Scenes to generate")->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_args.seed, "Base seed (scene i uses seed+i)");
    gen->add_option("--out", gen_args.out_dir, "Output directory")->required();

    RunEpisodesArgs run_args;
    CLI::App* run = app.add_subcommand("run-episodes", "Run episodes and write a trace");
    run->add_option("--scenes", run_args.scenes, "Scenes to generate")
        ->check(CLI::PositiveNumber);
    run->add_option("--tasks-per-scene", run_args.tasks_per_scene, "Tasks (episodes) per scene")
        ->check(CLI::PositiveNumber);
    run->add_option("--seed", run_args.seed, "Run seed");
    run->add_option("--policy", run_args.policy,
                    "oracle | noisy:s,p[,seed] | remote:host:port[/path] | pivot[:seed]");
    run->add_option("--out", run_args.out_dir, "Run directory")->required();
    run->add_option("--max-steps", run_args.max_steps, "Decision budget per episode")
        ->check(CLI::PositiveNumber);
    run->add_option("--parallel", run_args.parallel, "Worker threads (same bytes regardless)")
        ->check(CLI::PositiveNumber);

    SynthDataArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth-data", "Synthesize instruction-tuning data");
    synth->add_option("--scenes", synth_args.scenes, "Scenes to generate")
        ->check(CLI::PositiveNumber);
    synth->add_option("--tasks-per-scene", synth_args.tasks_per_scene, "Expert episodes per scene")
        ->check(CLI::PositiveNumber);
    synth->add_option("--seed", synth_args.seed, "Pipeline seed");
    synth->add_option("--out", synth_args.out_dir, "Dataset directory")->required();
    synth->add_option("--waypoint-interval", synth_args.waypoint_interval,
                      "Checkpoints between interior navigation key steps")
        ->check(CLI::PositiveNumber);
    synth->add_option("--arm-frames", synth_args.arm_frames, "Records per pick/place actuation")
        ->check(CLI::PositiveNumber);

    EvalSingleArgs single_args;
    CLI::App* single = app.add_subcommand("eval-single", "Score single-step predictions");
    single->add_option("--records", single_args.records_path, "QA records (JSONL)")->required();
    single->add_option("--predictions", single_args.predictions_path,
                       "Predictions JSONL ({record_id, response})");
    single->add_option("--policy", single_args.policy,
                       "Score a built-in policy instead: oracle | noisy:s,p[,seed]");
    single->add_option("--report", single_args.report_path, "Write metrics JSON here");

    EvalEpisodicArgs episodic_args;
    CLI::App* episodic = app.add_subcommand("eval-episodic", "Score a run directory");
    episodic->add_option("--run", episodic_args.run_dir, "Directory from run-episodes")
        ->required();
    episodic->add_flag("--timings", episodic_args.timings, "Fold timings.jsonl into the report");
    episodic->add_option("--report", episodic_args.report_path, "Write metrics JSON here");

    MockPolicyArgs mock_args;
    CLI::App* mock = app.add_subcommand("mock-policy", "Serve the HTTP decision protocol");
    mock->add_option("--port", mock_args.port, "Port on 127.0.0.1 (0 = ephemeral)");
    mock->add_option("--mode", mock_args.mode, "echo-oracle | fixed");
    mock->add_option("--fixed-body", mock_args.fixed_body, "Verbatim response for --mode fixed");
    mock->add_option("--fail-rate", mock_args.fail_rate, "Probability of an injected 500")
        ->check(CLI::Range(0.0, 1.0));
    mock->add_option("--fail-every", mock_args.fail_every, "Every Nth request answers 500");
    mock->add_option("--seed", mock_args.seed, "Seed for --fail-rate draws");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) return cmd_gen_scenes(gen_args);
        if (run->parsed()) return cmd_run_episodes(run_args);
        if (synth->parsed()) return cmd_synth_data(synth_args);
        if (single->parsed()) return cmd_eval_single(single_args);
        if (episodic->parsed()) return cmd_eval_episodic(episodic_args);
        if (mock->parsed()) return cmd_mock_policy(mock_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfra;
    }
    return kExitUsage;
}

}  // namespace owmm
