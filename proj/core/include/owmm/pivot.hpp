#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "owmm/geom.hpp"
#include "owmm/oracle.hpp"

namespace owmm {

// Iterative visual-prompt point optimization: sample candidate pixels from a
// Gaussian, score them, keep the best few, refit the Gaussian, repeat.
struct PivotParams {
    int n_samples_init = 10;  // draws per round
    int n_samples_opt = 6;    // kept per round for the refit
    int iters = 2;            // refit rounds after the initial one
    Vec2 mean{256.0, 256.0};
    Vec2 stddev{100.0, 100.0};
    double min_std = 2.0;  // pixel floor so the fit never collapses
    int width = 512;
    int height = 512;
};

struct PivotIteration {
    std::vector<Vec2> samples;
    std::vector<double> scores;
    Vec2 fit_mean;    // after keeping the best n_samples_opt
    Vec2 fit_stddev;  // population std, floored at min_std
};

struct PivotResult {
    Vec2 best;  // best-scoring sample across every round
    double best_score = 0.0;
    std::vector<PivotIteration> iterations;
};

// Higher is better. The scorer stands in for VLM preference feedback.
using PointScorer = std::function<double(const Vec2&)>;

// Runs 1 + iters rounds of n_samples_init draws each. Samples are clamped to
// the image; ties in the keep step resolve by draw order. Deterministic for
// a given seed.
PivotResult run_pivot(const PointScorer& scorer, uint64_t seed, const PivotParams& params = {});

// Expert whose grounding boxes are re-derived through the PIVOT loop: the
// scripted decision supplies the action kind and a preference peak (its box
// center), and the returned box is recentered on the best sampled pixel.
class PivotPolicy : public Policy {
public:
    PivotPolicy(const SceneSpec& scene, uint64_t seed, const PivotParams& params = {})
        : inner_(scene), seed_(seed), params_(params) {}

    std::string name() const override { return "pivot"; }
    PolicyOutput decide(const PolicyInput& input) override;

private:
    OraclePolicy inner_;
    uint64_t seed_;
    PivotParams params_;
};

}  // namespace owmm
