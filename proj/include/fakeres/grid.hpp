#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace fakeres {

using vec3 = std::array<double, 3>;
using index3 = std::array<int, 3>;

// Axis-aligned box [lower[0],upper[0]] x [lower[1],upper[1]] x [lower[2],upper[2]].
struct Domain {
    vec3 lower{0.0, 0.0, 0.0};
    vec3 upper{1.0, 1.0, 1.0};

    static Domain cube(double lo, double hi) { return Domain{{lo, lo, lo}, {hi, hi, hi}}; }

    // Throws parameter_error unless lower < upper componentwise and all
    // bounds are finite.
    void validate() const;

    friend bool operator==(const Domain&, const Domain&) = default;
};

// Node-centered rectilinear grid: along each axis d, shape[d] >= 2 nodes span
// the domain inclusively. Node i (1-based) sits at lower + (i-1)*h with
// h = (upper-lower)/(shape-1); the first node is on the lower face and the
// last on the upper face. All public indices in this library are 1-based.
struct GridSpec {
    Domain domain;
    index3 shape{2, 2, 2};

    GridSpec() = default;
    GridSpec(const Domain& dom, const index3& shp);

    static GridSpec cube(double lo, double hi, int n);

    vec3 spacing() const;
    std::int64_t node_count() const;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// Coordinate of 1-based node index i along one axis. Endpoint indices map to
// the domain bounds exactly (no accumulated rounding). Throws range_error for
// i outside [1, shape].
double node_coordinate_axis(const GridSpec& spec, int axis, int i);

vec3 node_coordinate(const GridSpec& spec, const index3& idx);

bool domain_contains(const Domain& domain, const vec3& point);

// Index p of the cell [node_p, node_{p+1}) containing coordinate x along one
// axis, with p in [1, shape-1]. Points exactly on an interior node belong to
// the cell whose lower corner is that node; the domain's upper bound maps to
// the last cell. Throws domain_error for x outside the domain.
int locate_cell_axis(const GridSpec& spec, int axis, double x);

index3 locate_cell(const GridSpec& spec, const vec3& point);

// Scalar samples on the nodes of a GridSpec, stored x-fastest then y then z.
class VolumeGrid {
public:
    VolumeGrid() = default;
    // Zero-initialized storage.
    explicit VolumeGrid(const GridSpec& spec);
    // Takes ownership of data; throws input_error on size mismatch and
    // numeric_error if any sample is non-finite.
    VolumeGrid(const GridSpec& spec, std::vector<double> data);

    const GridSpec& spec() const { return spec_; }
    const Domain& domain() const { return spec_.domain; }
    const index3& shape() const { return spec_.shape; }
    std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

    // Linear storage offset of 1-based node index (i, j, k).
    std::int64_t offset(int i, int j, int k) const {
        return (i - 1) +
               static_cast<std::int64_t>(spec_.shape[0]) *
                   ((j - 1) + static_cast<std::int64_t>(spec_.shape[1]) * (k - 1));
    }

    double at(int i, int j, int k) const { return data_[static_cast<std::size_t>(offset(i, j, k))]; }
    double& at(int i, int j, int k) { return data_[static_cast<std::size_t>(offset(i, j, k))]; }

    std::span<const double> values() const { return data_; }
    std::span<double> values() { return data_; }

    double min_value() const;
    double max_value() const;

    // Throws numeric_error naming `context` if any sample is NaN or infinite.
    void ensure_finite(const char* context) const;

private:
    GridSpec spec_;
    std::vector<double> data_;
};

// Integer segment labels on the nodes of a GridSpec. Labels are in
// [0, label_count); label 0 is the background by convention. Storage order
// matches VolumeGrid.
class SegmentationMask {
public:
    SegmentationMask() = default;
    // All-background mask with the given number of classes.
    SegmentationMask(const GridSpec& spec, int label_count);
    // Throws input_error on size mismatch or any label outside [0, label_count).
    SegmentationMask(const GridSpec& spec, int label_count, std::vector<std::int32_t> labels);

    const GridSpec& spec() const { return spec_; }
    const index3& shape() const { return spec_.shape; }
    int label_count() const { return label_count_; }
    std::int64_t size() const { return static_cast<std::int64_t>(labels_.size()); }

    std::int64_t offset(int i, int j, int k) const {
        return (i - 1) +
               static_cast<std::int64_t>(spec_.shape[0]) *
                   ((j - 1) + static_cast<std::int64_t>(spec_.shape[1]) * (k - 1));
    }

    std::int32_t at(int i, int j, int k) const {
        return labels_[static_cast<std::size_t>(offset(i, j, k))];
    }
    std::int32_t& at(int i, int j, int k) {
        return labels_[static_cast<std::size_t>(offset(i, j, k))];
    }

    std::span<const std::int32_t> labels() const { return labels_; }
    std::span<std::int32_t> labels() { return labels_; }

    // Number of nodes carrying `label`.
    std::int64_t count_of(int label) const;

private:
    GridSpec spec_;
    int label_count_ = 1;
    std::vector<std::int32_t> labels_;
};

} // namespace fakeres
