#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "fakeres/errors.hpp"
#include "fakeres/grid.hpp"
#include "fakeres/numerics.hpp"
#include "fakeres/resample.hpp"

using namespace fakeres;

namespace {

VolumeGrid random_volume(const GridSpec& spec, std::uint64_t seed, double lo = -2.0,
                         double hi = 3.0) {
    std::mt19937_64 gen(seed);
    std::vector<double> data(static_cast<std::size_t>(spec.node_count()));
    for (double& v : data)
        v = uniform_in(gen, lo, hi);
    return VolumeGrid(spec, std::move(data));
}

VolumeGrid sampled(const GridSpec& spec, double (*f)(const vec3&)) {
    VolumeGrid out(spec);
    for (int k = 1; k <= spec.shape[2]; ++k)
        for (int j = 1; j <= spec.shape[1]; ++j)
            for (int i = 1; i <= spec.shape[0]; ++i)
                out.at(i, j, k) = f(node_coordinate(spec, {i, j, k}));
    return out;
}

double affine_field(const vec3& p) { return p[0] + 2.0 * p[1] + 3.0 * p[2]; }

} // namespace

TEST_CASE("windowed evaluation equals the full sum bit for bit") {
    // The window drops only terms whose weight is an exact zero, so the two
    // evaluators must agree exactly, not merely within tolerance.
    std::mt19937_64 gen(404);
    for (std::uint64_t v = 0; v < 3; ++v) {
        GridSpec spec(Domain{{-1.0, 0.0, 2.0}, {1.0, 3.0, 4.5}}, {8, 8, 8});
        VolumeGrid vol = random_volume(spec, 500 + v);
        for (KernelKind kind : {KernelKind::trilinear, KernelKind::nearest}) {
            for (int trial = 0; trial < 120; ++trial) {
                vec3 p;
                for (int d = 0; d < 3; ++d)
                    p[d] = uniform_in(gen, spec.domain.lower[d], spec.domain.upper[d]);
                double fast = eval_point(vol, kind, p);
                double slow = eval_point_bruteforce(vol, kind, p);
                CHECK(fast == slow);
            }
        }
    }
}

TEST_CASE("interpolant reproduces node samples") {
    // Awkward spacing (h = 0.6) so node coordinates are not exact binary
    // values; the interpolation conditions still hold to the contract
    // tolerance even when a neighbor weight rounds to an ulp above zero.
    GridSpec spec = GridSpec::cube(-1.0, 2.0, 6);
    VolumeGrid vol = random_volume(spec, 77);
    for (KernelKind kind : {KernelKind::trilinear, KernelKind::nearest})
        for (int k = 1; k <= 6; ++k)
            for (int j = 1; j <= 6; ++j)
                for (int i = 1; i <= 6; ++i)
                    CHECK(std::abs(eval_point(vol, kind, node_coordinate(spec, {i, j, k})) -
                                   vol.at(i, j, k)) <= 1e-12);
}

TEST_CASE("constant volumes evaluate to the constant everywhere") {
    GridSpec spec = GridSpec::cube(0.0, 1.0, 5);
    VolumeGrid vol(spec, std::vector<double>(125, 4.25));
    std::mt19937_64 gen(405);
    for (KernelKind kind : {KernelKind::trilinear, KernelKind::nearest})
        for (int trial = 0; trial < 200; ++trial) {
            vec3 p{uniform01(gen), uniform01(gen), uniform01(gen)};
            CHECK(std::abs(eval_point(vol, kind, p) - 4.25) <= 1e-12);
        }
}

TEST_CASE("trilinear reproduces affine fields") {
    GridSpec spec = GridSpec::cube(0.0, 1.0, 4);
    VolumeGrid vol = sampled(spec, affine_field);
    CHECK(eval_point(vol, KernelKind::trilinear, {0.5, 0.5, 0.5}) ==
          doctest::Approx(3.0).epsilon(1e-13));
    std::mt19937_64 gen(406);
    for (int trial = 0; trial < 200; ++trial) {
        vec3 p{uniform01(gen), uniform01(gen), uniform01(gen)};
        CHECK(std::abs(eval_point(vol, KernelKind::trilinear, p) - affine_field(p)) <= 1e-12);
    }
}

TEST_CASE("out-of-domain policies") {
    GridSpec spec = GridSpec::cube(0.0, 1.0, 3);
    VolumeGrid vol = random_volume(spec, 9);
    vec3 outside{1.5, 0.5, 0.5};
    CHECK(eval_point(vol, KernelKind::trilinear, outside, OutOfDomainPolicy::zero) == 0.0);
    CHECK(eval_point(vol, KernelKind::trilinear, outside, OutOfDomainPolicy::clamp) ==
          eval_point(vol, KernelKind::trilinear, {1.0, 0.5, 0.5}));
    CHECK_THROWS_AS(eval_point(vol, KernelKind::trilinear, outside, OutOfDomainPolicy::error),
                    domain_error);
}

TEST_CASE("resample plan validates grids") {
    GridSpec a = GridSpec::cube(0.0, 1.0, 4);
    GridSpec b = GridSpec::cube(0.0, 2.0, 8);
    CHECK_THROWS_AS(ResamplePlan(a, b), plan_error);
    GridSpec c = GridSpec::cube(0.0, 1.0, 8);
    ResamplePlan plan(a, c);
    VolumeGrid wrong = random_volume(c, 1);
    CHECK_THROWS_AS(resample_volume(wrong, plan), plan_error);
}

TEST_CASE("identity resampling is exact") {
    GridSpec spec = GridSpec::cube(-0.5, 0.75, 9);
    VolumeGrid vol = random_volume(spec, 11);
    for (KernelKind kind : {KernelKind::trilinear, KernelKind::nearest}) {
        VolumeGrid out = resample_volume(vol, ResamplePlan(spec, spec, kind));
        for (std::size_t u = 0; u < out.values().size(); ++u)
            CHECK(out.values()[u] == vol.values()[u]);
    }
}

TEST_CASE("resampled volume equals pointwise evaluation at target nodes") {
    GridSpec src = GridSpec::cube(0.0, 1.0, 5);
    GridSpec tgt(Domain::cube(0.0, 1.0), {7, 4, 9});
    VolumeGrid vol = random_volume(src, 21);
    for (KernelKind kind : {KernelKind::trilinear, KernelKind::nearest}) {
        VolumeGrid out = resample_volume(vol, ResamplePlan(src, tgt, kind));
        for (int k = 1; k <= tgt.shape[2]; ++k)
            for (int j = 1; j <= tgt.shape[1]; ++j)
                for (int i = 1; i <= tgt.shape[0]; ++i)
                    CHECK(out.at(i, j, k) ==
                          eval_point(vol, kind, node_coordinate(tgt, {i, j, k})));
    }
}

TEST_CASE("oversampling a ramp is exact for trilinear") {
    GridSpec src = GridSpec::cube(0.0, 1.0, 8);
    GridSpec tgt = GridSpec::cube(0.0, 1.0, 16);
    VolumeGrid ramp = sampled(src, [](const vec3& p) { return p[0]; });
    VolumeGrid out = resample_volume(ramp, ResamplePlan(src, tgt, KernelKind::trilinear));
    for (int k = 1; k <= 16; ++k)
        for (int j = 1; j <= 16; ++j)
            for (int i = 1; i <= 16; ++i)
                CHECK(std::abs(out.at(i, j, k) - node_coordinate(tgt, {i, j, k})[0]) <= 1e-12);
}

TEST_CASE("trilinear output obeys the max principle") {
    GridSpec src = GridSpec::cube(0.0, 1.0, 6);
    GridSpec tgt = GridSpec::cube(0.0, 1.0, 13);
    VolumeGrid vol = random_volume(src, 31);
    VolumeGrid out = resample_volume(vol, ResamplePlan(src, tgt, KernelKind::trilinear));
    double lo = vol.min_value();
    double hi = vol.max_value();
    for (double v : out.values()) {
        CHECK(v >= lo - 1e-12);
        CHECK(v <= hi + 1e-12);
    }
}

TEST_CASE("resampling is bit-identical across thread counts") {
    GridSpec src = GridSpec::cube(0.0, 1.0, 12);
    GridSpec tgt = GridSpec::cube(0.0, 1.0, 29);
    VolumeGrid vol = random_volume(src, 41);
    VolumeGrid one = resample_volume(vol, ResamplePlan(src, tgt), 1);
    VolumeGrid many = resample_volume(vol, ResamplePlan(src, tgt), 8);
    for (std::size_t u = 0; u < one.values().size(); ++u)
        CHECK(one.values()[u] == many.values()[u]);
}

TEST_CASE("resample_to_grid handles offset targets") {
    GridSpec src = GridSpec::cube(0.0, 1.0, 9);
    VolumeGrid vol = random_volume(src, 51);
    // Target nodes sit between source nodes and overhang both ends.
    GridSpec tgt(Domain::cube(-0.05, 1.05), {12, 12, 12});
    VolumeGrid out = resample_to_grid(vol, tgt, KernelKind::trilinear,
                                      OutOfDomainPolicy::clamp);
    for (int k = 1; k <= 12; ++k)
        for (int j = 1; j <= 12; ++j)
            for (int i = 1; i <= 12; ++i) {
                vec3 p = node_coordinate(tgt, {i, j, k});
                for (int d = 0; d < 3; ++d)
                    p[d] = std::clamp(p[d], 0.0, 1.0);
                CHECK(out.at(i, j, k) == eval_point(vol, KernelKind::trilinear, p));
            }

    VolumeGrid zeroed = resample_to_grid(vol, tgt, KernelKind::trilinear,
                                         OutOfDomainPolicy::zero);
    CHECK(zeroed.at(1, 1, 1) == 0.0);
    CHECK(zeroed.at(12, 6, 6) == 0.0);
    CHECK(zeroed.at(6, 6, 6) == out.at(6, 6, 6));
    CHECK_THROWS_AS(
        resample_to_grid(vol, tgt, KernelKind::trilinear, OutOfDomainPolicy::error),
        domain_error);
}

TEST_CASE("label transfer onto the identical grid copies labels") {
    GridSpec spec = GridSpec::cube(0.0, 1.0, 6);
    std::mt19937_64 gen(61);
    std::vector<std::int32_t> labels(216);
    for (auto& l : labels)
        l = static_cast<std::int32_t>(gen() % 3);
    SegmentationMask mask(spec, 3, labels);
    SegmentationMask out = downsample_labels(mask, spec);
    CHECK(out.label_count() == 3);
    for (std::size_t u = 0; u < labels.size(); ++u)
        CHECK(out.labels()[u] == mask.labels()[u]);
}

TEST_CASE("label transfer picks the nearest node with ties to the left") {
    // 3-node source at {0, 0.5, 1}; 4-node target at {0, 1/3, 2/3, 1}.
    GridSpec src = GridSpec::cube(0.0, 1.0, 3);
    GridSpec tgt = GridSpec::cube(0.0, 1.0, 4);
    std::vector<std::int32_t> labels(27);
    for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 3; ++i)
                labels[static_cast<std::size_t>(i + 3 * (j + 3 * k))] =
                    static_cast<std::int32_t>(i);
    SegmentationMask mask(src, 3, labels);
    SegmentationMask out = downsample_labels(mask, tgt);
    // 1/3 is nearest source node 0.5? no: |1/3-0|=0.333, |1/3-0.5|=0.167.
    CHECK(out.at(1, 1, 1) == 0);
    CHECK(out.at(2, 1, 1) == 1);
    CHECK(out.at(3, 1, 1) == 1);
    CHECK(out.at(4, 1, 1) == 2);

    // A target node exactly midway between two source nodes keeps the lower.
    GridSpec mid = GridSpec::cube(0.0, 1.0, 5);
    SegmentationMask tie = downsample_labels(mask, mid);
    CHECK(tie.at(2, 1, 1) == 0); // 0.25 is equidistant from 0 and 0.5
    CHECK(tie.at(4, 1, 1) == 1); // 0.75 is equidistant from 0.5 and 1
}

TEST_CASE("label transfer requires a shared domain") {
    GridSpec src = GridSpec::cube(0.0, 1.0, 4);
    GridSpec tgt = GridSpec::cube(0.0, 2.0, 4);
    SegmentationMask mask(src, 2);
    CHECK_THROWS_AS(downsample_labels(mask, tgt), plan_error);
}

TEST_CASE("half-space labels move their boundary by at most one coarse cell") {
    // Node counts chosen so coarse nodes do not coincide with fine ones.
    GridSpec fine = GridSpec::cube(0.0, 1.0, 33);
    GridSpec coarse = GridSpec::cube(0.0, 1.0, 15);
    const double split = 0.4923;
    std::vector<std::int32_t> labels(33 * 33 * 33);
    for (int k = 0; k < 33; ++k)
        for (int j = 0; j < 33; ++j)
            for (int i = 0; i < 33; ++i)
                labels[static_cast<std::size_t>(i + 33 * (j + 33 * k))] =
                    node_coordinate_axis(fine, 0, i + 1) >= split ? 1 : 0;
    SegmentationMask mask(fine, 2, labels);
    SegmentationMask out = downsample_labels(mask, coarse);
    double h = coarse.spacing()[0];
    for (int k = 1; k <= 15; ++k)
        for (int j = 1; j <= 15; ++j)
            for (int i = 1; i <= 15; ++i) {
                double x = node_coordinate_axis(coarse, 0, i);
                int analytic = x >= split ? 1 : 0;
                if (std::abs(x - split) > h)
                    CHECK(out.at(i, j, k) == analytic);
            }
}
