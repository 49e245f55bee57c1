#include "fakeres/resample.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fakeres/errors.hpp"
#include "fakeres/parallel.hpp"

namespace fakeres {

namespace {

constexpr int kMaxWindow = 8;

// Applies the out-of-domain policy to one point. Returns false when the
// caller should produce 0 (zero policy); otherwise `point` is in-domain on
// return (clamp projects, error throws).
bool admit_point(const Domain& domain, OutOfDomainPolicy policy, vec3& point) {
    if (domain_contains(domain, point))
        return true;
    switch (policy) {
    case OutOfDomainPolicy::zero:
        return false;
    case OutOfDomainPolicy::error:
        throw domain_error("query point (" + std::to_string(point[0]) + ", " +
                           std::to_string(point[1]) + ", " + std::to_string(point[2]) +
                           ") outside the source domain");
    case OutOfDomainPolicy::clamp:
        for (int d = 0; d < 3; ++d)
            point[d] = std::clamp(point[d], domain.lower[d], domain.upper[d]);
        return true;
    }
    return true;
}

// Nonzero-weight node range around the cell containing x: with support
// radius a cells, nodes [p-a+1, p+a] clipped to [1, n].
void window_bounds(const GridSpec& spec, int axis, double x, int a, int& begin, int& end) {
    int p = locate_cell_axis(spec, axis, x);
    begin = std::max(1, p - a + 1);
    end = std::min(spec.shape[axis], p + a);
}

struct AxisWindow {
    int begin = 1;
    int count = 0;
    bool outside = false;
    double w[kMaxWindow] = {};
};

std::vector<AxisWindow> build_axis_windows(const GridSpec& src, int axis, const GridSpec& tgt,
                                           const BasisKernel& kernel, OutOfDomainPolicy policy) {
    int a = kernel.support_radius_cells();
    std::vector<AxisWindow> windows(static_cast<std::size_t>(tgt.shape[axis]));
    for (int it = 1; it <= tgt.shape[axis]; ++it) {
        AxisWindow& win = windows[static_cast<std::size_t>(it - 1)];
        double x = node_coordinate_axis(tgt, axis, it);
        double lo = src.domain.lower[axis];
        double hi = src.domain.upper[axis];
        if (x < lo || x > hi) {
            switch (policy) {
            case OutOfDomainPolicy::zero:
                win.outside = true;
                continue;
            case OutOfDomainPolicy::error:
                throw domain_error("target node " + std::to_string(it) + " on axis " +
                                   std::to_string(axis) + " lies outside the source domain");
            case OutOfDomainPolicy::clamp:
                x = std::clamp(x, lo, hi);
                break;
            }
        }
        int begin = 1, end = 0;
        window_bounds(src, axis, x, a, begin, end);
        win.begin = begin;
        win.count = end - begin + 1;
        for (int m = begin; m <= end; ++m)
            win.w[m - begin] = kernel.evaluate(x - node_coordinate_axis(src, axis, m));
    }
    return windows;
}

} // namespace

ResamplePlan::ResamplePlan(const GridSpec& src, const GridSpec& tgt, KernelKind kind,
                           OutOfDomainPolicy pol)
    : source(src), target(tgt), kernel(kind), policy(pol) {
    if (!(src.domain == tgt.domain))
        throw plan_error("resampling plan requires source and target to share one domain");
}

double eval_point(const VolumeGrid& volume, KernelKind kernel, const vec3& point,
                  OutOfDomainPolicy policy) {
    const GridSpec& spec = volume.spec();
    vec3 q = point;
    if (!admit_point(spec.domain, policy, q))
        return 0.0;
    vec3 h = spec.spacing();
    BasisKernel bx = BasisKernel::make(kernel, h[0]);
    BasisKernel by = BasisKernel::make(kernel, h[1]);
    BasisKernel bz = BasisKernel::make(kernel, h[2]);
    int a = bx.support_radius_cells();
    int i0 = 0, i1 = 0, j0 = 0, j1 = 0, k0 = 0, k1 = 0;
    window_bounds(spec, 0, q[0], a, i0, i1);
    window_bounds(spec, 1, q[1], a, j0, j1);
    window_bounds(spec, 2, q[2], a, k0, k1);

    double acc = 0.0;
    for (int k = k0; k <= k1; ++k) {
        double z = node_coordinate_axis(spec, 2, k);
        for (int j = j0; j <= j1; ++j) {
            double y = node_coordinate_axis(spec, 1, j);
            for (int i = i0; i <= i1; ++i) {
                double x = node_coordinate_axis(spec, 0, i);
                double weight = separable_weight(bx, by, bz, {q[0] - x, q[1] - y, q[2] - z});
                acc += weight * volume.at(i, j, k);
            }
        }
    }
    return acc;
}

double eval_point_bruteforce(const VolumeGrid& volume, KernelKind kernel, const vec3& point,
                             OutOfDomainPolicy policy) {
    const GridSpec& spec = volume.spec();
    vec3 q = point;
    if (!admit_point(spec.domain, policy, q))
        return 0.0;
    vec3 h = spec.spacing();
    BasisKernel bx = BasisKernel::make(kernel, h[0]);
    BasisKernel by = BasisKernel::make(kernel, h[1]);
    BasisKernel bz = BasisKernel::make(kernel, h[2]);

    double acc = 0.0;
    for (int k = 1; k <= spec.shape[2]; ++k) {
        double z = node_coordinate_axis(spec, 2, k);
        for (int j = 1; j <= spec.shape[1]; ++j) {
            double y = node_coordinate_axis(spec, 1, j);
            for (int i = 1; i <= spec.shape[0]; ++i) {
                double x = node_coordinate_axis(spec, 0, i);
                double weight = separable_weight(bx, by, bz, {q[0] - x, q[1] - y, q[2] - z});
                acc += weight * volume.at(i, j, k);
            }
        }
    }
    return acc;
}

VolumeGrid resample_volume(const VolumeGrid& volume, const ResamplePlan& plan, int threads) {
    if (!(volume.spec() == plan.source))
        throw plan_error("volume grid does not match the plan's source grid");
    return resample_to_grid(volume, plan.target, plan.kernel, plan.policy, threads);
}

VolumeGrid resample_to_grid(const VolumeGrid& volume, const GridSpec& tgt, KernelKind kernel,
                            OutOfDomainPolicy policy, int threads) {
    const GridSpec& src = volume.spec();
    vec3 h = src.spacing();
    BasisKernel bx = BasisKernel::make(kernel, h[0]);
    BasisKernel by = BasisKernel::make(kernel, h[1]);
    BasisKernel bz = BasisKernel::make(kernel, h[2]);

    std::vector<AxisWindow> wx = build_axis_windows(src, 0, tgt, bx, policy);
    std::vector<AxisWindow> wy = build_axis_windows(src, 1, tgt, by, policy);
    std::vector<AxisWindow> wz = build_axis_windows(src, 2, tgt, bz, policy);

    VolumeGrid out(tgt);
    std::span<double> dst = out.values();
    std::span<const double> srcv = volume.values();
    const std::int64_t snx = src.shape[0];
    const std::int64_t sny = src.shape[1];
    const std::int64_t tnx = tgt.shape[0];
    const std::int64_t tny = tgt.shape[1];

    parallel_for(tgt.shape[2], threads, [&](std::int64_t zb, std::int64_t ze) {
        for (std::int64_t kt = zb; kt < ze; ++kt) {
            const AxisWindow& winz = wz[static_cast<std::size_t>(kt)];
            for (std::int64_t jt = 0; jt < tny; ++jt) {
                const AxisWindow& winy = wy[static_cast<std::size_t>(jt)];
                std::int64_t row = tnx * (jt + tny * kt);
                for (std::int64_t it = 0; it < tnx; ++it) {
                    const AxisWindow& winx = wx[static_cast<std::size_t>(it)];
                    if (winx.outside || winy.outside || winz.outside) {
                        dst[static_cast<std::size_t>(row + it)] = 0.0;
                        continue;
                    }
                    // Accumulation order matches eval_point: k, then j, then
                    // i, products associated (x*y)*z, one accumulator.
                    double acc = 0.0;
                    for (int kk = 0; kk < winz.count; ++kk) {
                        std::int64_t koff = (winz.begin - 1 + kk);
                        for (int jj = 0; jj < winy.count; ++jj) {
                            std::int64_t base =
                                (winx.begin - 1) + snx * ((winy.begin - 1 + jj) + sny * koff);
                            for (int ii = 0; ii < winx.count; ++ii) {
                                double weight = (winx.w[ii] * winy.w[jj]) * winz.w[kk];
                                acc += weight * srcv[static_cast<std::size_t>(base + ii)];
                            }
                        }
                    }
                    dst[static_cast<std::size_t>(row + it)] = acc;
                }
            }
        }
    });

    out.ensure_finite("resampled volume");
    return out;
}

SegmentationMask downsample_labels(const SegmentationMask& mask, const GridSpec& target) {
    const GridSpec& src = mask.spec();
    if (!(src.domain == target.domain))
        throw plan_error("label transfer requires source and target to share one domain");

    // Per-axis nearest source index, tie to the lower index: round-half-down
    // of the continuous source position.
    auto nearest_index = [&](int axis) {
        std::vector<int> out(static_cast<std::size_t>(target.shape[axis]));
        double lo = src.domain.lower[axis];
        double h = (src.domain.upper[axis] - lo) / (src.shape[axis] - 1);
        for (int it = 1; it <= target.shape[axis]; ++it) {
            double u = (node_coordinate_axis(target, axis, it) - lo) / h;
            int s = static_cast<int>(std::ceil(u - 0.5));
            out[static_cast<std::size_t>(it - 1)] = std::clamp(s + 1, 1, src.shape[axis]);
        }
        return out;
    };
    std::vector<int> sx = nearest_index(0);
    std::vector<int> sy = nearest_index(1);
    std::vector<int> sz = nearest_index(2);

    SegmentationMask out(target, mask.label_count());
    for (int k = 1; k <= target.shape[2]; ++k)
        for (int j = 1; j <= target.shape[1]; ++j)
            for (int i = 1; i <= target.shape[0]; ++i)
                out.at(i, j, k) = mask.at(sx[static_cast<std::size_t>(i - 1)],
                                          sy[static_cast<std::size_t>(j - 1)],
                                          sz[static_cast<std::size_t>(k - 1)]);
    return out;
}

} // namespace fakeres
