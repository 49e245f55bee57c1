#include "fakeres/fakenodes.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "fakeres/errors.hpp"
#include "fakeres/numerics.hpp"
#include "fakeres/parallel.hpp"

namespace fakeres {

namespace {

// Half-sample reflection of a 0-based index into [0, n): ... 1 0 | 0 1 ... n-1 | n-1 ...
std::int64_t reflect_index(std::int64_t i, std::int64_t n) {
    if (n == 1)
        return 0;
    std::int64_t period = 2 * n;
    std::int64_t m = i % period;
    if (m < 0)
        m += period;
    return m < n ? m : period - 1 - m;
}

std::vector<double> gaussian_taps(double sigma, double truncation_radius) {
    std::int64_t radius = static_cast<std::int64_t>(std::floor(truncation_radius * sigma));
    std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
    double wsum = 0.0;
    for (std::int64_t j = -radius; j <= radius; ++j) {
        double w = std::exp(-0.5 * (static_cast<double>(j) / sigma) * (static_cast<double>(j) / sigma));
        taps[static_cast<std::size_t>(j + radius)] = w;
        wsum += w;
    }
    for (double& w : taps)
        w /= wsum;
    return taps;
}

} // namespace

void FakeStackConfig::validate() const {
    if (!(smoothing_sigma > 0.0) || !std::isfinite(smoothing_sigma))
        throw parameter_error("smoothing sigma must be positive and finite, got " +
                              std::to_string(smoothing_sigma));
    if (smoothing_iterations < 1)
        throw parameter_error("smoothing iterations must be >= 1, got " +
                              std::to_string(smoothing_iterations));
    if (!(kernel_truncation_radius > 0.0) || !std::isfinite(kernel_truncation_radius))
        throw parameter_error("kernel truncation radius must be positive and finite, got " +
                              std::to_string(kernel_truncation_radius));
}

int FakeStack::block_index_of(int label) const {
    if (label < 0 || label >= label_count)
        throw input_error("label " + std::to_string(label) + " outside [0, " +
                          std::to_string(label_count) + ")");
    for (std::size_t b = 0; b < block_labels.size(); ++b)
        if (block_labels[b] == label)
            return static_cast<int>(b);
    // Labels recorded as empty read from block 0 by convention.
    return 0;
}

VolumeGrid FakeStack::assemble_stacked() const {
    if (blocks.empty())
        throw input_error("cannot stack an empty block list");
    // Concatenation along the first axis, one block per segment, block 0
    // first. Consecutive blocks are spaced one cell apart so the result is a
    // valid uniform grid (sharing the boundary node would duplicate it).
    const GridSpec& bs = block_spec;
    double hx = bs.spacing()[0];
    const int nx = bs.shape[0];
    const int total_x = nx * static_cast<int>(blocks.size());
    Domain dom = bs.domain;
    dom.upper[0] = dom.lower[0] + hx * (total_x - 1);
    GridSpec stacked_spec(dom, {total_x, bs.shape[1], bs.shape[2]});
    VolumeGrid out(stacked_spec);
    std::span<double> dst = out.values();
    const std::int64_t ny = bs.shape[1];
    const std::int64_t nz = bs.shape[2];
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        std::span<const double> src = blocks[b].values();
        for (std::int64_t k = 0; k < nz; ++k)
            for (std::int64_t j = 0; j < ny; ++j) {
                std::int64_t srow = nx * (j + ny * k);
                std::int64_t drow = static_cast<std::int64_t>(b) * nx + total_x * (j + ny * k);
                std::copy(src.begin() + srow, src.begin() + srow + nx, dst.begin() + drow);
            }
    }
    return out;
}

void gaussian_blur(VolumeGrid& volume, double sigma_voxels, double truncation_radius,
                   int threads) {
    if (!(sigma_voxels > 0.0) || !std::isfinite(sigma_voxels))
        throw parameter_error("blur sigma must be positive and finite, got " +
                              std::to_string(sigma_voxels));
    if (!(truncation_radius > 0.0) || !std::isfinite(truncation_radius))
        throw parameter_error("blur truncation radius must be positive and finite, got " +
                              std::to_string(truncation_radius));
    std::vector<double> taps = gaussian_taps(sigma_voxels, truncation_radius);
    std::int64_t radius = (static_cast<std::int64_t>(taps.size()) - 1) / 2;
    if (radius < 1)
        return;

    const index3& shape = volume.spec().shape;
    const std::int64_t nx = shape[0];
    const std::int64_t ny = shape[1];
    const std::int64_t nz = shape[2];
    std::vector<double> tmp(static_cast<std::size_t>(volume.size()));
    std::span<double> cur = volume.values();

    // Strides of the three axes in the fixed x-fastest layout.
    const std::int64_t stride[3] = {1, nx, nx * ny};
    const std::int64_t extent[3] = {nx, ny, nz};

    for (int axis = 0; axis < 3; ++axis) {
        std::span<const double> src = cur;
        std::span<double> dst = tmp;
        parallel_for(nz, threads, [&](std::int64_t zb, std::int64_t ze) {
            for (std::int64_t k = zb; k < ze; ++k) {
                for (std::int64_t j = 0; j < ny; ++j) {
                    std::int64_t row = nx * (j + ny * k);
                    for (std::int64_t i = 0; i < nx; ++i) {
                        std::int64_t pos[3] = {i, j, k};
                        std::int64_t base = row + i;
                        double acc = 0.0;
                        for (std::int64_t t = -radius; t <= radius; ++t) {
                            std::int64_t p = reflect_index(pos[axis] + t, extent[axis]);
                            std::int64_t off = base + (p - pos[axis]) * stride[axis];
                            acc += taps[static_cast<std::size_t>(t + radius)] *
                                   src[static_cast<std::size_t>(off)];
                        }
                        dst[static_cast<std::size_t>(base)] = acc;
                    }
                }
            }
        });
        std::copy(tmp.begin(), tmp.end(), cur.begin());
    }
    volume.ensure_finite("smoothed volume");
}

FakeStack build_fake_stack(const VolumeGrid& functional, const SegmentationMask& low_mask,
                           const FakeStackConfig& config, int threads) {
    config.validate();
    if (!(functional.spec() == low_mask.spec()))
        throw input_error("fake-node blocks need the volume and segmentation on one grid");

    FakeStack stack;
    stack.block_spec = functional.spec();
    stack.label_count = low_mask.label_count();

    std::span<const double> fvals = functional.values();
    std::span<const std::int32_t> labels = low_mask.labels();
    const std::size_t n = fvals.size();

    for (int label = 0; label < stack.label_count; ++label) {
        std::int64_t count = low_mask.count_of(label);
        if (count == 0) {
            if (!config.skip_empty)
                throw empty_segment_error(label, "segment " + std::to_string(label) +
                                                     " has no node on the source grid");
            stack.empty_labels.push_back(label);
            continue;
        }

        double fill = 0.0;
        if (config.background_fill == BackgroundFill::segment_mean) {
            CompensatedSum sum;
            for (std::size_t idx = 0; idx < n; ++idx)
                if (labels[idx] == label)
                    sum.add(fvals[idx]);
            fill = sum.value() / static_cast<double>(count);
        }

        VolumeGrid block(functional.spec());
        std::span<double> bvals = block.values();
        for (std::size_t idx = 0; idx < n; ++idx)
            bvals[idx] = labels[idx] == label ? fvals[idx] : fill;

        for (int round = 0; round < config.smoothing_iterations; ++round) {
            gaussian_blur(block, config.smoothing_sigma, config.kernel_truncation_radius,
                          threads);
            // Restore the segment's own samples; only off-segment nodes keep
            // the diffused values.
            std::span<double> bv = block.values();
            for (std::size_t idx = 0; idx < n; ++idx)
                if (labels[idx] == label)
                    bv[idx] = fvals[idx];
        }

        stack.blocks.push_back(std::move(block));
        stack.block_labels.push_back(label);
    }

    if (stack.blocks.empty())
        throw input_error("segmentation has no populated segment");
    return stack;
}

FakeResampleResult fake_resample(const VolumeGrid& low, const SegmentationMask& high_mask,
                                 const ResamplePlan& plan, const FakeStackConfig& config,
                                 int threads) {
    SegmentationMask low_mask = downsample_labels(high_mask, plan.source);
    return fake_resample(low, low_mask, high_mask, plan, config, threads);
}

FakeResampleResult fake_resample(const VolumeGrid& low, const SegmentationMask& low_mask,
                                 const SegmentationMask& high_mask, const ResamplePlan& plan,
                                 const FakeStackConfig& config, int threads) {
    if (!(low.spec() == plan.source))
        throw plan_error("low-resolution volume does not match the plan's source grid");
    if (!(high_mask.spec() == plan.target))
        throw input_error("target segmentation does not match the plan's target grid");
    return fake_resample(low, low_mask, high_mask, plan.kernel, plan.policy, config, threads);
}

FakeResampleResult fake_resample(const VolumeGrid& low, const SegmentationMask& low_mask,
                                 const SegmentationMask& high_mask, KernelKind kernel,
                                 OutOfDomainPolicy policy, const FakeStackConfig& config,
                                 int threads) {
    if (!(low_mask.spec() == low.spec()))
        throw input_error("source segmentation does not match the low-resolution grid");
    if (low_mask.label_count() != high_mask.label_count())
        throw input_error("source and target segmentations disagree on the number of labels");

    FakeStack stack = build_fake_stack(low, low_mask, config, threads);

    // Target nodes indexed by the block that serves their label.
    std::span<const std::int32_t> hlabels = high_mask.labels();
    std::vector<int> block_of(static_cast<std::size_t>(stack.label_count));
    for (int label = 0; label < stack.label_count; ++label)
        block_of[static_cast<std::size_t>(label)] = stack.block_index_of(label);

    VolumeGrid out(high_mask.spec());
    std::span<double> ovals = out.values();
    for (std::size_t b = 0; b < stack.blocks.size(); ++b) {
        // Each block is upsampled in full; the recomposition then keeps only
        // the nodes this block serves. Every node is written exactly once.
        VolumeGrid high_block =
            resample_to_grid(stack.blocks[b], high_mask.spec(), kernel, policy, threads);
        std::span<const double> hb = high_block.values();
        const int bi = static_cast<int>(b);
        parallel_for(static_cast<std::int64_t>(ovals.size()), threads,
                     [&](std::int64_t lo, std::int64_t hi) {
                         for (std::int64_t idx = lo; idx < hi; ++idx) {
                             std::size_t u = static_cast<std::size_t>(idx);
                             if (block_of[static_cast<std::size_t>(hlabels[u])] == bi)
                                 ovals[u] = hb[u];
                         }
                     });
    }

    return FakeResampleResult{std::move(out), std::move(stack)};
}

} // namespace fakeres
