#pragma once

#include <cmath>
#include <cstdint>

#include "owmm/canonical_json.hpp"
#include "owmm/geom.hpp"

namespace owmm {

// Pinhole camera, square pixels, principal point at the image center.
struct CameraIntrinsics {
    int width = 512;
    int height = 512;
    double hfov = 1.5707963267948966;  // horizontal field of view, radians

    double focal() const { return (width / 2.0) / std::tan(0.5 * hfov); }
    double cx() const { return width / 2.0; }
    double cy() const { return height / 2.0; }
};

// World-frame camera pose. Yaw about +z, then pitch about the image-right
// axis; positive pitch looks up, negative looks down. No roll.
struct CameraPose {
    Vec3 position;
    double yaw = 0.0;
    double pitch = 0.0;

    Vec3 forward() const {
        const double cp = std::cos(pitch);
        return {std::cos(yaw) * cp, std::sin(yaw) * cp, std::sin(pitch)};
    }
    // Direction that maps to +u (image right).
    Vec3 image_right() const { return {-std::sin(yaw), std::cos(yaw), 0.0}; }
    // Direction that maps to +v (image down).
    Vec3 image_down() const { return image_right().cross(forward()); }
};

// Projection of a world point. `range` is the Euclidean distance from the
// camera center (the convention used for every depth value in this project).
struct PixelPoint {
    double u = 0.0;
    double v = 0.0;
    double range = 0.0;
    bool in_front = false;  // forward component above a small epsilon
};

PixelPoint project_point(const CameraPose& pose, const CameraIntrinsics& intr, const Vec3& p);

// Axis-aligned box in raw pixel coordinates.
struct BBoxPx {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
};

// Box in the normalized integer coordinate space [0, 1000] used by the
// action protocol: floor(px * 1000 / image_size), clamped.
struct BBoxNorm {
    int x1 = 0, y1 = 0, x2 = 0, y2 = 0;

    json to_json() const { return json::array({x1, y1, x2, y2}); }
    bool ordered() const { return x1 <= x2 && y1 <= y2; }
};

BBoxNorm normalize_bbox(const BBoxPx& box, const CameraIntrinsics& intr);

// Center of a normalized box converted back to raw pixels.
Vec2 bbox_center_px(const BBoxNorm& box, const CameraIntrinsics& intr);

// Conservative screen-space square around a projected sphere.
struct SphereProjection {
    bool in_front = false;
    PixelPoint center;
    double radius_px = 0.0;
    BBoxPx bbox;
};

SphereProjection project_sphere(const CameraPose& pose, const CameraIntrinsics& intr,
                                const Vec3& center, double radius);

// Unit ray direction through pixel (u, v).
Vec3 pixel_ray(const CameraPose& pose, const CameraIntrinsics& intr, double u, double v);

// Point at Euclidean distance `range` along the ray through (u, v).
Vec3 unproject_px(const CameraPose& pose, const CameraIntrinsics& intr, double u, double v,
                  double range);

// Horizontal (xy-plane) distance from the camera axis to the point seen at
// pixel (u, v) with Euclidean range `range`. Independent of yaw and position,
// so it can be evaluated from an image alone given pitch and intrinsics.
double planar_range_from_pixel(const CameraIntrinsics& intr, double pitch, double u, double v,
                               double range);

}  // namespace owmm
