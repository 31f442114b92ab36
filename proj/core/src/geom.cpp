#include "owmm/geom.hpp"

#include <algorithm>
#include <numbers>

namespace owmm {

double wrap_angle(double a) {
    const double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a, two_pi);
    if (a <= -std::numbers::pi) a += two_pi;
    if (a > std::numbers::pi) a -= two_pi;
    return a;
}

double rect_distance(const Vec2& p, const Vec2& center, double dx, double dy) {
    const double ex = std::max(0.0, std::abs(p.x - center.x) - 0.5 * dx);
    const double ey = std::max(0.0, std::abs(p.y - center.y) - 0.5 * dy);
    return std::sqrt(ex * ex + ey * ey);
}

}  // namespace owmm
