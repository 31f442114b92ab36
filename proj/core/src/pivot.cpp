#include "owmm/pivot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "owmm/rng.hpp"

namespace owmm {
namespace {
constexpr uint64_t kStreamPivot = 0x71f0;
}  // namespace

PivotResult run_pivot(const PointScorer& scorer, uint64_t seed, const PivotParams& params) {
    Rng rng(Rng::derive(seed, kStreamPivot));
    PivotResult result;
    result.best_score = -std::numeric_limits<double>::infinity();

    Vec2 mean = params.mean;
    Vec2 stddev = params.stddev;
    const double max_x = static_cast<double>(params.width - 1);
    const double max_y = static_cast<double>(params.height - 1);

    const int rounds = 1 + std::max(0, params.iters);
    for (int round = 0; round < rounds; ++round) {
        PivotIteration iter;
        iter.samples.reserve(static_cast<size_t>(params.n_samples_init));
        for (int i = 0; i < params.n_samples_init; ++i) {
            Vec2 p{std::clamp(rng.normal(mean.x, stddev.x), 0.0, max_x),
                   std::clamp(rng.normal(mean.y, stddev.y), 0.0, max_y)};
            iter.samples.push_back(p);
            const double score = scorer(p);
            iter.scores.push_back(score);
            if (score > result.best_score) {
                result.best_score = score;
                result.best = p;
            }
        }

        // Keep the best n_samples_opt draws (earlier draw wins ties).
        std::vector<size_t> order(iter.samples.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            return iter.scores[a] > iter.scores[b];
        });
        const size_t keep = std::min<size_t>(static_cast<size_t>(std::max(1, params.n_samples_opt)),
                                             order.size());
        Vec2 centroid{0.0, 0.0};
        for (size_t i = 0; i < keep; ++i) {
            centroid.x += iter.samples[order[i]].x;
            centroid.y += iter.samples[order[i]].y;
        }
        centroid.x /= static_cast<double>(keep);
        centroid.y /= static_cast<double>(keep);
        Vec2 var{0.0, 0.0};
        for (size_t i = 0; i < keep; ++i) {
            const double dx = iter.samples[order[i]].x - centroid.x;
            const double dy = iter.samples[order[i]].y - centroid.y;
            var.x += dx * dx;
            var.y += dy * dy;
        }
        mean = centroid;
        stddev = {std::max(params.min_std, std::sqrt(var.x / static_cast<double>(keep))),
                  std::max(params.min_std, std::sqrt(var.y / static_cast<double>(keep)))};
        iter.fit_mean = mean;
        iter.fit_stddev = stddev;
        result.iterations.push_back(std::move(iter));
    }
    return result;
}

PolicyOutput PivotPolicy::decide(const PolicyInput& input) {
    PolicyOutput out = inner_.decide(input);
    if (!out.ok) return out;
    const ParseResult parsed = parse_decision(out.raw_text);
    if (parsed.status != ParseStatus::ok ||
        parsed.decision.action.kind == ActionKind::search_scene_frame)
        return out;

    const CameraIntrinsics& intr = input.params->intrinsics;
    ParsedDecision decision = parsed.decision;
    const Vec2 peak = bbox_center_px(decision.action.bbox, intr);
    const PointScorer scorer = [&peak](const Vec2& p) {
        const double dx = p.x - peak.x, dy = p.y - peak.y;
        return -(dx * dx + dy * dy);
    };
    PivotParams params = params_;
    params.width = intr.width;
    params.height = intr.height;
    const uint64_t h = fnv1a64(input.history + "@" + std::to_string(input.step));
    const PivotResult res = run_pivot(scorer, Rng::derive(seed_, h), params);

    const auto to_norm = [](double px, int size) {
        return std::clamp(static_cast<int>(std::floor(px * 1000.0 / size)), 0, 1000);
    };
    const int half_x = std::max(1, (decision.action.bbox.x2 - decision.action.bbox.x1) / 2);
    const int half_y = std::max(1, (decision.action.bbox.y2 - decision.action.bbox.y1) / 2);
    const int cx = to_norm(res.best.x, intr.width);
    const int cy = to_norm(res.best.y, intr.height);
    decision.action.bbox = {std::max(0, cx - half_x), std::max(0, cy - half_y),
                            std::min(1000, cx + half_x), std::min(1000, cy + half_y)};
    out.raw_text = decision_to_text(decision);
    return out;
}

}  // namespace owmm
