#pragma once

#include <vector>

#include "fakeres/grid.hpp"
#include "fakeres/resample.hpp"

namespace fakeres {

// Value written to off-segment nodes when a per-segment block is initialized.
enum class BackgroundFill {
    zero,         // off-segment nodes start at 0
    segment_mean  // off-segment nodes start at the segment's mean value
};

// Parameters of the per-segment block construction.
struct FakeStackConfig {
    // Width of the smoothing kernel, in voxel units of the block grid.
    double smoothing_sigma = 1.0;
    // Smooth-and-restore rounds per block. Each round diffuses segment values
    // outward, then rewrites the segment's own nodes with their originals.
    int smoothing_iterations = 3;
    // Smoothing taps cover |offset| <= floor(truncation_radius * sigma) voxels.
    double kernel_truncation_radius = 3.0;
    BackgroundFill background_fill = BackgroundFill::zero;
    // With skip_empty, labels that own no node get no block and later read
    // from block 0 instead; otherwise they raise empty_segment_error.
    bool skip_empty = false;

    void validate() const;
};

// One extended-value block per populated segment, all on the same grid. Block
// b holds the functional values of segment block_labels[b] on that segment's
// nodes and smoothly continued values everywhere else, so interpolating block
// b near the segment boundary never mixes in foreign-segment samples.
struct FakeStack {
    GridSpec block_spec;
    std::vector<VolumeGrid> blocks;
    std::vector<int> block_labels;
    std::vector<int> empty_labels;
    int label_count = 0;

    // Block that serves `label`: its own block when populated, block 0 for
    // recorded empty labels. Throws input_error for labels outside the mask's
    // range.
    int block_index_of(int label) const;

    // Blocks concatenated along the first axis into one volume, block 0
    // first, with the x extent of the grid extended accordingly. Export and
    // inspection only; the algorithm itself resamples blocks independently.
    VolumeGrid assemble_stacked() const;
};

// In-place separable Gaussian smoothing. sigma_voxels is in voxel units on
// each axis; taps beyond floor(truncation_radius * sigma_voxels) are dropped
// and the remainder renormalized, so sigma under one voxel of reach leaves
// the volume unchanged. Borders reflect half-sample style (edge duplicated).
void gaussian_blur(VolumeGrid& volume, double sigma_voxels, double truncation_radius = 3.0,
                   int threads = 0);

// Builds the per-segment blocks from a functional volume and its same-grid
// segmentation: initialize each block with the segment's values plus the
// configured fill, then run smooth-and-restore rounds.
FakeStack build_fake_stack(const VolumeGrid& functional, const SegmentationMask& low_mask,
                           const FakeStackConfig& config = {}, int threads = 0);

struct FakeResampleResult {
    // Recomposed volume on plan.target: every node takes its value from the
    // upsampled block of its own segment.
    VolumeGrid volume;
    // The low-resolution blocks the output was interpolated from.
    FakeStack stack;
};

// Segment-aware resampling with the target-grid segmentation only: the
// segmentation is first transferred to the source grid by nearest-node label
// transfer, then each segment is extended, upsampled on its own, and the
// results recomposed under the target labels.
FakeResampleResult fake_resample(const VolumeGrid& low, const SegmentationMask& high_mask,
                                 const ResamplePlan& plan, const FakeStackConfig& config = {},
                                 int threads = 0);

// Same pipeline with an explicitly provided source-grid segmentation, for
// callers that have a native segmentation at both resolutions and do not want
// the nearest-node transfer to decide source-side labels.
FakeResampleResult fake_resample(const VolumeGrid& low, const SegmentationMask& low_mask,
                                 const SegmentationMask& high_mask, const ResamplePlan& plan,
                                 const FakeStackConfig& config = {}, int threads = 0);

// Plan-free form of the two-segmentation pipeline: the target grid is the one
// the high-resolution segmentation lives on, and it may cover a different
// physical domain than the source (offset sampling conventions). Target nodes
// outside the source domain follow `policy` during block upsampling.
FakeResampleResult fake_resample(const VolumeGrid& low, const SegmentationMask& low_mask,
                                 const SegmentationMask& high_mask, KernelKind kernel,
                                 OutOfDomainPolicy policy = OutOfDomainPolicy::clamp,
                                 const FakeStackConfig& config = {}, int threads = 0);

} // namespace fakeres
