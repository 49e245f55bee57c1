#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fakeres/grid.hpp"
#include "fakeres/kernels.hpp"

namespace fakeres {

// Per-label summary of a volume under a segmentation. Statistics are unset
// for labels that own no node. abs_error is |mean - reference|, the bias of
// the segment mean, matching how resampling quality is scored here.
struct LabelStats {
    int label = 0;
    std::int64_t voxel_count = 0;
    std::optional<double> mean;
    std::optional<double> median;
    std::optional<double> min;
    std::optional<double> max;
    std::optional<double> reference;
    std::optional<double> abs_error;
};

struct SegmentStats {
    std::vector<LabelStats> labels;
};

// Means use compensated summation in storage order; medians are exact (full
// selection, even counts average the two central values). `references`, when
// non-empty, must carry one value per label (input_error otherwise).
SegmentStats segment_stats(const VolumeGrid& volume, const SegmentationMask& mask,
                           std::span<const double> references = {});

// Ratio of the hot segment's mean to the cold segment's mean. Throws
// empty_segment_error when either label owns no node and numeric_error when
// the cold mean is zero.
double fbr(const VolumeGrid& volume, const SegmentationMask& mask, int hot_label,
           int cold_label);

// 1-D intensity k-means (Lloyd) with farthest-point initialization from the
// seeded generator: at most 300 rounds or until centroids move < 1e-9.
// Output labels are ordered by ascending centroid, so label 0 is the darkest
// class. Throws clustering_error when the volume has fewer than k distinct
// values, parameter_error for k < 2.
SegmentationMask kmeans_segment(const VolumeGrid& volume, int k, std::uint64_t seed);

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    double df = 0.0;
};

// Welch's unequal-variance two-sample t-test, two-sided p-value via the
// regularized incomplete beta function, Welch-Satterthwaite degrees of
// freedom. Groups need >= 2 samples each (input_error). When both groups
// have zero variance the statistic degenerates: equal means give (t=0, p=1),
// different means (t=+-inf, p=0).
TTestResult welch_ttest(std::span<const double> group_a, std::span<const double> group_b);

// Piecewise continuity description of a field over a segmented domain:
// per-segment Lipschitz constants (under the max-norm distance), pairwise
// boundary jumps, and their worst-case aggregation into one global modulus
// omega(d) = lipschitz_K * d + aggregated_D.
struct ContinuityModel {
    int segment_count = 1;
    std::vector<double> segment_k;  // one Lipschitz constant per label
    std::vector<double> jump;       // dense segment_count^2, symmetric, zero diagonal
    double lipschitz_K = 0.0;       // aggregated K
    double aggregated_D = 0.0;      // aggregated jump term
    double delta_star = 0.0;        // kernel reach in physical units; 0 = not yet bound to a grid

    double jump_at(int i, int j) const;
    double max_pair_jump() const;

    // Builds the aggregate constants from per-segment data: one segment keeps
    // its own k with no jump; two segments add their k's and take their one
    // jump; s > 2 segments fall back to the worst case s*max(k) and s*max(jump).
    static ContinuityModel aggregate(std::vector<double> segment_k, std::vector<double> jump);
};

using ScalarField = std::function<double(const vec3&)>;
using SegmentField = std::function<int(const vec3&)>;

// Segment membership by nearest mask node (ties to the lower index), making
// the discrete segmentation a piecewise-constant field on the whole domain.
SegmentField segment_field_from_mask(const SegmentationMask& mask);

// Membership function of an unsegmented domain: label 0 everywhere.
SegmentField single_segment();

// Empirical ContinuityModel of an analytic field: per-segment Lipschitz
// constants from max difference ratios over seeded probe pairs at steps of
// one, one half, and one quarter grid spacing (axis-aligned and random
// directions, max-norm denominators), and jumps from face-adjacent node pairs
// of `mask` whose labels differ. delta_star is set to the mask grid's largest
// spacing (the reach of the shipped kernels). Throws input_error for
// probe_count < 10. Segments no probe pair lands in keep k = 0.
ContinuityModel estimate_continuity(const ScalarField& f, const SegmentField& segment_of,
                                    const SegmentationMask& mask, int probe_count,
                                    std::uint64_t seed);

// Same estimate with a discrete volume as proxy for the field: probe pairs
// are same-segment node pairs at lattice offsets of 1, 2, and 4 nodes.
ContinuityModel estimate_continuity(const VolumeGrid& volume, const SegmentationMask& mask,
                                    int probe_count, std::uint64_t seed);

// Outcome of one empirical error-bound check.
struct BoundReport {
    double delta_star = 0.0;
    double bound_global = 0.0;    // K * delta_star + D
    double bound_interior = 0.0;  // K * delta_star
    double sup_error_global = 0.0;
    double sup_error_interior = 0.0;
    std::int64_t probe_total = 0;
    std::int64_t probe_interior = 0;
    bool pass_global = false;
    bool pass_interior = false;
};

// Samples f on `source`, interpolates with `kernel` (respaced per axis), and
// probes the interpolant at probe_count seeded points plus extra_probes.
// A probe is interior when every node in its interpolation window shares its
// segment; those probes must obey the jump-free bound K * delta_star, all
// probes the full bound K * delta_star + D. Pass flags allow rounding slack
// of 1e-12 * (1 + field scale). delta_star is recomputed from the grid and
// kernel; model.delta_star is ignored.
BoundReport verify_error_bound(const GridSpec& source, const BasisKernel& kernel,
                               const ScalarField& f, const SegmentField& segment_of,
                               const ContinuityModel& model, int probe_count,
                               std::uint64_t seed, std::span<const vec3> extra_probes = {});

} // namespace fakeres
