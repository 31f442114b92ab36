#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "owmm/sim.hpp"
#include "support.hpp"

using namespace owmm;

namespace {

const ObservedEntity* find_entity(const Observation& obs, const std::string& id) {
    for (const auto& e : obs.entities)
        if (e.id == id) return &e;
    return nullptr;
}

}  // namespace

TEST_CASE("step clamps commands and integrates with the pre-step heading") {
    SceneSpec scene = test::make_empty_scene(32, 32);
    SimParams params;
    RobotState robot;
    robot.position = {4.0, 4.0};
    robot.yaw = 0.0;

    // Velocity clamp: asking for 5 m/s moves v_max * dt.
    RobotState next = step(scene, robot, {5.0, 0.0}, params);
    CHECK(next.position.x == doctest::Approx(4.0 + params.v_max * params.dt));
    CHECK(next.position.y == doctest::Approx(4.0));

    // Turn clamp.
    next = step(scene, robot, {0.0, 100.0}, params);
    CHECK(next.yaw == doctest::Approx(params.omega_max * params.dt));
    next = step(scene, robot, {0.0, -100.0}, params);
    CHECK(next.yaw == doctest::Approx(-params.omega_max * params.dt));

    // Translation uses the heading before the turn is applied.
    next = step(scene, robot, {1.0, 1.0}, params);
    CHECK(next.position.x == doctest::Approx(4.0 + params.v_max * params.dt));
    CHECK(next.position.y == doctest::Approx(4.0));
    CHECK(next.yaw == doctest::Approx(params.omega_max * params.dt));
}

TEST_CASE("step refuses to enter blocked or out-of-range cells") {
    SceneSpec scene = test::make_empty_scene(16, 16);
    test::add_receptacle(scene, "rec_0", "cabinet", {2.0, 2.0}, 0.5, 0.5, 0.6);
    SimParams params;
    RobotState robot;
    robot.position = {1.55, 2.0};  // just west of the blocked footprint
    robot.yaw = 0.0;               // facing it

    RobotState cur = robot;
    for (int i = 0; i < 50; ++i) cur = step(scene, cur, {1.0, 0.3}, params);
    CHECK(scene.navigable_at(cur.position));

    // Walking off the west edge of the grid is blocked the same way.
    RobotState edge;
    edge.position = {0.1, 2.0};
    edge.yaw = 3.14159265358979;
    for (int i = 0; i < 30; ++i) edge = step(scene, edge, {1.0, 0.0}, params);
    CHECK(edge.position.x >= 0.0);
    CHECK(scene.navigable_at(edge.position));
}

TEST_CASE("raycast reports the nearest surface along the ray") {
    SceneSpec scene = test::make_empty_scene(32, 32);
    test::add_receptacle(scene, "rec_0", "dresser", {2.0, 0.125}, 1.0, 1.0, 0.5);
    test::add_object(scene, "obj_0", "mug", {1.0, 0.125, 0.3}, 0.1, "floor");

    const Vec3 origin{0.0, 0.125, 0.3};
    const Vec3 east{1.0, 0.0, 0.0};

    // Nearest hit wins: the mug sits in front of the dresser.
    RayHit hit = raycast(scene, origin, east, 20.0);
    CHECK(hit.kind == HitKind::object);
    CHECK(hit.id == "obj_0");
    CHECK(hit.range == doctest::Approx(0.9));  // 1.0 minus the 0.1 radius

    // Ignoring that object exposes the dresser face at x = 1.5.
    hit = raycast(scene, origin, east, 20.0, "obj_0");
    CHECK(hit.kind == HitKind::receptacle);
    CHECK(hit.id == "rec_0");
    CHECK(hit.range == doctest::Approx(1.5));

    // include_objects=false skips every object without naming one.
    hit = raycast(scene, origin, east, 20.0, "", false);
    CHECK(hit.kind == HitKind::receptacle);
    CHECK(hit.id == "rec_0");

    // Passing above the furniture, a level ray escapes to max range.
    hit = raycast(scene, {0.0, 0.125, 0.8}, east, 20.0);
    CHECK(hit.kind == HitKind::none);

    // Straight down hits the floor at the camera height.
    hit = raycast(scene, {5.0, 5.0, 1.0}, {0.0, 0.0, -1.0}, 20.0);
    CHECK(hit.kind == HitKind::floor);
    CHECK(hit.range == doctest::Approx(1.0));

    // Range cap.
    hit = raycast(scene, origin, east, 0.5);
    CHECK(hit.kind == HitKind::none);
}

TEST_CASE("observe_from lists visible entities with calibrated boxes") {
    SceneSpec scene = test::make_empty_scene(32, 32);
    test::add_receptacle(scene, "rec_0", "desk", {4.0, 2.0}, 1.0, 1.0, 0.5);
    test::add_object(scene, "obj_0", "cup", {4.0, 2.0, 0.58}, 0.08, "rec_0");
    SimParams params;

    CameraPose cam;
    cam.position = {1.0, 2.0, 1.2};
    cam.yaw = 0.0;       // looking east, straight at the desk
    cam.pitch = -0.35;

    const Observation obs = observe_from(scene, cam, params);
    const ObservedEntity* rec = find_entity(obs, "rec_0");
    const ObservedEntity* obj = find_entity(obs, "obj_0");
    REQUIRE(rec != nullptr);
    REQUIRE(obj != nullptr);
    CHECK(rec->kind == "receptacle");
    CHECK(rec->label == "desk");
    CHECK(obj->kind == "object");

    // Anchors: receptacle top-face center, object center.
    const PixelPoint rec_px = project_point(cam, params.intrinsics, {4.0, 2.0, 0.5});
    CHECK(rec->anchor_u == doctest::Approx(rec_px.u));
    CHECK(rec->anchor_v == doctest::Approx(rec_px.v));
    CHECK(rec->depth_m == doctest::Approx(rec_px.range));
    const PixelPoint obj_px = project_point(cam, params.intrinsics, {4.0, 2.0, 0.58});
    CHECK(obj->anchor_u == doctest::Approx(obj_px.u));
    CHECK(obj->depth_m == doctest::Approx(obj_px.range));

    // Boxes are ordered, inside the protocol range, and contain their anchor.
    for (const auto& e : obs.entities) {
        CHECK(e.bbox.ordered());
        CHECK(e.bbox.x1 >= 0);
        CHECK(e.bbox.y2 <= 1000);
        const int au = std::clamp(static_cast<int>(e.anchor_u * 1000.0 / 512.0), 0, 1000);
        const int av = std::clamp(static_cast<int>(e.anchor_v * 1000.0 / 512.0), 0, 1000);
        CHECK(e.bbox.x1 <= au);
        CHECK(au <= e.bbox.x2);
        CHECK(e.bbox.y1 <= av);
        CHECK(av <= e.bbox.y2);
    }
}

TEST_CASE("objects never hide furniture, but hide each other") {
    SceneSpec scene = test::make_empty_scene(32, 32);
    test::add_receptacle(scene, "rec_0", "sideboard", {4.0, 2.0}, 1.0, 1.0, 0.5);
    SimParams params;
    CameraPose cam;
    cam.position = {1.0, 2.0, 0.5};  // level with the top face
    cam.yaw = 0.0;
    cam.pitch = 0.0;

    // A ball exactly on the sight line to the receptacle anchor.
    test::add_object(scene, "obj_blocker", "ball", {2.0, 2.0, 0.5}, 0.09, "floor");
    Observation obs = observe_from(scene, cam, params);
    CHECK(find_entity(obs, "rec_0") != nullptr);       // furniture stays visible
    CHECK(find_entity(obs, "obj_blocker") != nullptr);

    // A second object behind the first on the same line is occluded.
    test::add_object(scene, "obj_hidden", "coin", {3.0, 2.0, 0.5}, 0.05, "floor");
    obs = observe_from(scene, cam, params);
    CHECK(find_entity(obs, "obj_blocker") != nullptr);
    CHECK(find_entity(obs, "obj_hidden") == nullptr);

    // Furniture does occlude objects.
    SceneSpec walled = test::make_empty_scene(32, 32);
    test::add_receptacle(walled, "rec_wall", "wardrobe", {2.0, 2.0}, 1.0, 1.0, 0.9);
    test::add_object(walled, "obj_behind", "pen", {4.0, 2.0, 0.3}, 0.06, "floor");
    const Observation blocked = observe_from(walled, cam, params);
    CHECK(find_entity(blocked, "obj_behind") == nullptr);
}

TEST_CASE("entities outside the frustum or behind the camera are not observed") {
    SceneSpec scene = test::make_empty_scene(32, 32);
    test::add_object(scene, "obj_behind", "sock", {1.0, 2.0, 0.3}, 0.08, "floor");
    SimParams params;
    CameraPose cam;
    cam.position = {4.0, 2.0, 1.2};
    cam.yaw = 0.0;  // looking east; the sock is west
    cam.pitch = -0.35;
    const Observation obs = observe_from(scene, cam, params);
    CHECK(obs.entities.empty());
}

TEST_CASE("exclude_obj drops the held object from the view") {
    SceneSpec scene = test::make_empty_scene(32, 32);
    test::add_object(scene, "obj_0", "apple", {3.0, 2.0, 0.3}, 0.08, "floor");
    SimParams params;
    CameraPose cam;
    cam.position = {1.0, 2.0, 1.2};
    cam.pitch = -0.35;
    CHECK(find_entity(observe_from(scene, cam, params), "obj_0") != nullptr);
    CHECK(find_entity(observe_from(scene, cam, params, false, "obj_0"), "obj_0") == nullptr);
}

TEST_CASE("depth raster matches per-pixel raycasts") {
    SceneSpec scene = test::make_empty_scene(32, 32);
    test::add_receptacle(scene, "rec_0", "counter", {4.0, 2.0}, 1.2, 1.2, 0.6);
    SimParams params;
    CameraPose cam;
    cam.position = {1.0, 2.0, 1.2};
    cam.pitch = -0.35;

    const Observation obs = observe_from(scene, cam, params, true);
    REQUIRE(obs.depth.size() ==
            static_cast<size_t>(params.intrinsics.width) * params.intrinsics.height);
    for (const auto uv : {std::pair{256, 256}, std::pair{100, 400}, std::pair{500, 40}}) {
        const Vec3 dir = pixel_ray(cam, params.intrinsics, uv.first + 0.5, uv.second + 0.5);
        const RayHit hit = raycast(scene, cam.position, dir, params.max_range);
        const float expect = static_cast<float>(
            hit.kind == HitKind::none ? params.max_range : hit.range);
        const float got = obs.depth[static_cast<size_t>(uv.second) * 512 + uv.first];
        CHECK(got == doctest::Approx(expect).epsilon(1e-4));
    }
}

TEST_CASE("head camera and carry point follow the base") {
    SimParams params;
    RobotState robot;
    robot.position = {2.0, 3.0};
    robot.yaw = 1.0;
    const CameraPose cam = head_camera(robot, params);
    CHECK(cam.position.x == doctest::Approx(2.0));
    CHECK(cam.position.y == doctest::Approx(3.0));
    CHECK(cam.position.z == doctest::Approx(params.camera_height));
    CHECK(cam.yaw == doctest::Approx(1.0));
    CHECK(cam.pitch == doctest::Approx(params.camera_pitch));

    const Vec3 carry = held_carry_point(robot, params);
    CHECK(carry.x == doctest::Approx(2.0 + params.ee_forward * std::cos(1.0)));
    CHECK(carry.y == doctest::Approx(3.0 + params.ee_forward * std::sin(1.0)));
    CHECK(carry.z == doctest::Approx(params.ee_height));

    // settle_held keeps the carried object glued to the gripper.
    SceneSpec scene = test::make_empty_scene(32, 32);
    test::add_object(scene, "obj_0", "mug", {0.0, 0.0, 0.0}, 0.08, kRestingHeld);
    robot.held = "obj_0";
    settle_held(scene, robot, params);
    const ObjectInstance* obj = scene.find_object("obj_0");
    REQUIRE(obj != nullptr);
    CHECK(obj->position.x == doctest::Approx(carry.x));
    CHECK(obj->position.z == doctest::Approx(carry.z));

    // A held object is invisible to its own head camera's raycasts.
    const Observation obs = observe(scene, robot, params);
    CHECK(find_entity(obs, "obj_0") == nullptr);
}

TEST_CASE("spawn_robot lands on a navigable cell clear of furniture") {
    const SceneGenResult gen = generate_scene(21);
    REQUIRE(gen.status == SceneGenStatus::ok);
    SimParams params;
    const RobotState robot = spawn_robot(gen.scene, params);
    CHECK(gen.scene.navigable_at(robot.position));
    for (const auto& rec : gen.scene.receptacles) {
        CHECK(rect_distance(robot.position, rec.center, rec.dx, rec.dy) >=
              params.standoff_radius - 1e-9);
    }
    // Deterministic.
    const RobotState again = spawn_robot(gen.scene, params);
    CHECK(robot.position.x == again.position.x);
    CHECK(robot.position.y == again.position.y);
    CHECK(robot.yaw == again.yaw);
}

TEST_CASE("pose graph covers every receptacle deterministically") {
    const SceneGenResult gen = generate_scene(33);
    REQUIRE(gen.status == SceneGenStatus::ok);
    SimParams params;
    const PoseGraphResult a = render_pose_graph(gen.scene, params, 99);
    const PoseGraphResult b = render_pose_graph(gen.scene, params, 99);
    REQUIRE(a.ok);
    REQUIRE(b.ok);
    REQUIRE(a.frames.size() ==
            gen.scene.receptacles.size() + static_cast<size_t>(params.pose_graph_random_frames));

    // Frame indices are positional, provenance covers every receptacle once.
    std::set<std::string> provenance;
    int randoms = 0;
    for (size_t i = 0; i < a.frames.size(); ++i) {
        CHECK(a.frames[i].index == static_cast<int>(i));
        if (a.frames[i].provenance == "random") {
            ++randoms;
        } else {
            CHECK(provenance.insert(a.frames[i].provenance).second);
            // The frame shot for a receptacle actually shows it.
            CHECK(find_entity(a.frames[i].observation, a.frames[i].provenance) != nullptr);
        }
        CHECK(gen.scene.navigable_at(a.frames[i].camera.position.xy()));
    }
    CHECK(randoms == params.pose_graph_random_frames);
    CHECK(provenance.size() == gen.scene.receptacles.size());

    // Determinism: identical poses and entity lists.
    for (size_t i = 0; i < a.frames.size(); ++i) {
        CHECK(a.frames[i].provenance == b.frames[i].provenance);
        CHECK(a.frames[i].camera.position.x == b.frames[i].camera.position.x);
        CHECK(a.frames[i].camera.yaw == b.frames[i].camera.yaw);
        REQUIRE(a.frames[i].observation.entities.size() ==
                b.frames[i].observation.entities.size());
        for (size_t k = 0; k < a.frames[i].observation.entities.size(); ++k)
            CHECK(a.frames[i].observation.entities[k].id ==
                  b.frames[i].observation.entities[k].id);
    }

    // A different seed shuffles the frame order (provenance sequence differs
    // for this fixture).
    const PoseGraphResult c = render_pose_graph(gen.scene, params, 100);
    REQUIRE(c.ok);
    bool any_diff = false;
    for (size_t i = 0; i < a.frames.size(); ++i)
        any_diff |= a.frames[i].provenance != c.frames[i].provenance;
    CHECK(any_diff);
}
