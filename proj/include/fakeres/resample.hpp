#pragma once

#include "fakeres/grid.hpp"
#include "fakeres/kernels.hpp"

namespace fakeres {

// What to do when a query point falls outside the source domain.
enum class OutOfDomainPolicy {
    clamp, // project the point onto the domain boundary
    zero,  // return 0 without evaluating
    error  // throw domain_error
};

// Validated description of one resampling pass. Source and target must cover
// the same physical domain; only the node counts differ.
struct ResamplePlan {
    GridSpec source;
    GridSpec target;
    KernelKind kernel = KernelKind::trilinear;
    OutOfDomainPolicy policy = OutOfDomainPolicy::clamp;

    ResamplePlan(const GridSpec& src, const GridSpec& tgt,
                 KernelKind kind = KernelKind::trilinear,
                 OutOfDomainPolicy pol = OutOfDomainPolicy::clamp);
};

// Interpolant value at one physical point: sum of node samples weighted by
// the separable kernel, restricted to the nodes whose weight can be nonzero
// (the 2a nodes per axis around the cell containing the point). Terms are
// accumulated k-major, then j, then i, into a single accumulator.
double eval_point(const VolumeGrid& volume, KernelKind kernel, const vec3& point,
                  OutOfDomainPolicy policy = OutOfDomainPolicy::clamp);

// Same interpolant, summing over every node of the volume in the same k, j, i
// order. The windowed evaluator must agree with this bit for bit, because the
// terms it skips are exact zeros. Reference implementation for tests; O(n^3)
// per point.
double eval_point_bruteforce(const VolumeGrid& volume, KernelKind kernel, const vec3& point,
                             OutOfDomainPolicy policy = OutOfDomainPolicy::clamp);

// Evaluates the interpolant of `volume` at every node of plan.target.
// Per-axis weights are precomputed, but products and sums follow the exact
// accumulation order of eval_point, so every output voxel is bit-identical to
// an eval_point call there, for any thread count. Throws plan_error if
// volume does not match plan.source.
VolumeGrid resample_volume(const VolumeGrid& volume, const ResamplePlan& plan, int threads = 0);

// Same pass onto an arbitrary target grid, which may cover a different
// physical domain than the source. Target nodes outside the source domain
// follow `policy`, exactly as eval_point would. This is the entry for
// resampling between grids whose sample positions are offset from each other
// (staggered acquisition conventions); same-domain passes should go through
// a ResamplePlan, which validates that assumption.
VolumeGrid resample_to_grid(const VolumeGrid& volume, const GridSpec& target, KernelKind kernel,
                            OutOfDomainPolicy policy = OutOfDomainPolicy::clamp, int threads = 0);

// Nearest-node label transfer onto `target`. Each target node copies the
// label of the closest source node along each axis, ties going to the
// lower-index node, matching the nearest kernel's tie rule. Labels are moved
// by pure index gather, never averaged. Target must cover the same domain.
SegmentationMask downsample_labels(const SegmentationMask& mask, const GridSpec& target);

} // namespace fakeres
