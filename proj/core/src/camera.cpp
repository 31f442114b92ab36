#include "owmm/camera.hpp"

#include <algorithm>

namespace owmm {
namespace {
constexpr double kMinForward = 1e-9;
}

PixelPoint project_point(const CameraPose& pose, const CameraIntrinsics& intr, const Vec3& p) {
    PixelPoint out;
    const Vec3 q = p - pose.position;
    const double zf = dot(q, pose.forward());
    out.range = q.norm();
    if (zf <= kMinForward) return out;
    const double f = intr.focal();
    out.u = intr.cx() + f * dot(q, pose.image_right()) / zf;
    out.v = intr.cy() + f * dot(q, pose.image_down()) / zf;
    out.in_front = true;
    return out;
}

BBoxNorm normalize_bbox(const BBoxPx& box, const CameraIntrinsics& intr) {
    const auto norm = [](double px, int size) {
        const int n = static_cast<int>(std::floor(px * 1000.0 / static_cast<double>(size)));
        return std::clamp(n, 0, 1000);
    };
    BBoxNorm out;
    out.x1 = norm(std::min(box.x0, box.x1), intr.width);
    out.y1 = norm(std::min(box.y0, box.y1), intr.height);
    out.x2 = norm(std::max(box.x0, box.x1), intr.width);
    out.y2 = norm(std::max(box.y0, box.y1), intr.height);
    return out;
}

Vec2 bbox_center_px(const BBoxNorm& box, const CameraIntrinsics& intr) {
    const double cx = 0.5 * (box.x1 + box.x2) * static_cast<double>(intr.width) / 1000.0;
    const double cy = 0.5 * (box.y1 + box.y2) * static_cast<double>(intr.height) / 1000.0;
    return {cx, cy};
}

SphereProjection project_sphere(const CameraPose& pose, const CameraIntrinsics& intr,
                                const Vec3& center, double radius) {
    SphereProjection out;
    out.center = project_point(pose, intr, center);
    if (!out.center.in_front) return out;
    const Vec3 q = center - pose.position;
    const double zf = dot(q, pose.forward());
    if (zf <= radius) return out;  // camera inside or beside the sphere
    // Conservative square: screen radius from the forward distance.
    out.radius_px = intr.focal() * radius / std::sqrt(zf * zf - radius * radius);
    out.bbox = {out.center.u - out.radius_px, out.center.v - out.radius_px,
                out.center.u + out.radius_px, out.center.v + out.radius_px};
    out.in_front = true;
    return out;
}

Vec3 pixel_ray(const CameraPose& pose, const CameraIntrinsics& intr, double u, double v) {
    const double f = intr.focal();
    const Vec3 dir = pose.forward() + pose.image_right() * ((u - intr.cx()) / f) +
                     pose.image_down() * ((v - intr.cy()) / f);
    return dir.normalized();
}

Vec3 unproject_px(const CameraPose& pose, const CameraIntrinsics& intr, double u, double v,
                  double range) {
    return pose.position + pixel_ray(pose, intr, u, v) * range;
}

double planar_range_from_pixel(const CameraIntrinsics& intr, double pitch, double u, double v,
                               double range) {
    CameraPose canonical;
    canonical.pitch = pitch;  // yaw = 0, position = origin
    const Vec3 p = unproject_px(canonical, intr, u, v, range);
    return std::sqrt(p.x * p.x + p.y * p.y);
}

}  // namespace owmm
