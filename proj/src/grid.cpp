#include "fakeres/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fakeres/errors.hpp"

namespace fakeres {

namespace {

const char* axis_name(int axis) {
    static const char* names[3] = {"x", "y", "z"};
    return names[axis];
}

} // namespace

void Domain::validate() const {
    for (int d = 0; d < 3; ++d) {
        if (!std::isfinite(lower[d]) || !std::isfinite(upper[d]))
            throw parameter_error(std::string("domain bounds on axis ") + axis_name(d) +
                                  " must be finite");
        if (!(lower[d] < upper[d]))
            throw parameter_error(std::string("domain must satisfy lower < upper on axis ") +
                                  axis_name(d) + ", got [" + std::to_string(lower[d]) + ", " +
                                  std::to_string(upper[d]) + "]");
    }
}

GridSpec::GridSpec(const Domain& dom, const index3& shp) : domain(dom), shape(shp) {
    domain.validate();
    for (int d = 0; d < 3; ++d)
        if (shape[d] < 2)
            throw parameter_error(std::string("grid needs at least 2 nodes per axis, axis ") +
                                  axis_name(d) + " has " + std::to_string(shape[d]));
}

GridSpec GridSpec::cube(double lo, double hi, int n) {
    return GridSpec(Domain::cube(lo, hi), {n, n, n});
}

vec3 GridSpec::spacing() const {
    vec3 h;
    for (int d = 0; d < 3; ++d)
        h[d] = (domain.upper[d] - domain.lower[d]) / (shape[d] - 1);
    return h;
}

std::int64_t GridSpec::node_count() const {
    return static_cast<std::int64_t>(shape[0]) * shape[1] * shape[2];
}

double node_coordinate_axis(const GridSpec& spec, int axis, int i) {
    int n = spec.shape[axis];
    if (i < 1 || i > n)
        throw range_error(std::string("node index ") + std::to_string(i) + " outside [1, " +
                          std::to_string(n) + "] on axis " + axis_name(axis));
    // Convex blend of the bounds rather than lower + (i-1)*h: endpoint indices
    // then hit the bounds exactly regardless of rounding in h.
    double t = static_cast<double>(i - 1) / static_cast<double>(n - 1);
    return spec.domain.lower[axis] * (1.0 - t) + spec.domain.upper[axis] * t;
}

vec3 node_coordinate(const GridSpec& spec, const index3& idx) {
    return {node_coordinate_axis(spec, 0, idx[0]), node_coordinate_axis(spec, 1, idx[1]),
            node_coordinate_axis(spec, 2, idx[2])};
}

bool domain_contains(const Domain& domain, const vec3& point) {
    for (int d = 0; d < 3; ++d)
        if (!(point[d] >= domain.lower[d] && point[d] <= domain.upper[d]))
            return false;
    return true;
}

int locate_cell_axis(const GridSpec& spec, int axis, double x) {
    double lo = spec.domain.lower[axis];
    double hi = spec.domain.upper[axis];
    if (!(x >= lo && x <= hi))
        throw domain_error(std::string("coordinate ") + std::to_string(x) + " outside [" +
                           std::to_string(lo) + ", " + std::to_string(hi) + "] on axis " +
                           axis_name(axis));
    int n = spec.shape[axis];
    double h = (hi - lo) / (n - 1);
    int p = static_cast<int>(std::floor((x - lo) / h)) + 1;
    p = std::clamp(p, 1, n - 1);
    // The division above can land one cell off when x sits within a rounding
    // error of a node; settle against exact node coordinates.
    while (p + 1 <= n - 1 && x >= node_coordinate_axis(spec, axis, p + 1))
        ++p;
    while (p > 1 && x < node_coordinate_axis(spec, axis, p))
        --p;
    return p;
}

index3 locate_cell(const GridSpec& spec, const vec3& point) {
    return {locate_cell_axis(spec, 0, point[0]), locate_cell_axis(spec, 1, point[1]),
            locate_cell_axis(spec, 2, point[2])};
}

VolumeGrid::VolumeGrid(const GridSpec& spec)
    : spec_(spec), data_(static_cast<std::size_t>(spec.node_count()), 0.0) {}

VolumeGrid::VolumeGrid(const GridSpec& spec, std::vector<double> data)
    : spec_(spec), data_(std::move(data)) {
    if (static_cast<std::int64_t>(data_.size()) != spec_.node_count())
        throw input_error("volume data has " + std::to_string(data_.size()) +
                          " samples, grid expects " + std::to_string(spec_.node_count()));
    ensure_finite("volume construction");
}

double VolumeGrid::min_value() const {
    if (data_.empty())
        throw input_error("min of an empty volume");
    return *std::min_element(data_.begin(), data_.end());
}

double VolumeGrid::max_value() const {
    if (data_.empty())
        throw input_error("max of an empty volume");
    return *std::max_element(data_.begin(), data_.end());
}

void VolumeGrid::ensure_finite(const char* context) const {
    for (std::size_t idx = 0; idx < data_.size(); ++idx) {
        if (!std::isfinite(data_[idx]))
            throw numeric_error(std::string(context) + ": non-finite sample at linear offset " +
                                std::to_string(idx));
    }
}

SegmentationMask::SegmentationMask(const GridSpec& spec, int label_count)
    : spec_(spec), label_count_(label_count),
      labels_(static_cast<std::size_t>(spec.node_count()), 0) {
    if (label_count < 1)
        throw parameter_error("label_count must be >= 1, got " + std::to_string(label_count));
}

SegmentationMask::SegmentationMask(const GridSpec& spec, int label_count,
                                   std::vector<std::int32_t> labels)
    : spec_(spec), label_count_(label_count), labels_(std::move(labels)) {
    if (label_count < 1)
        throw parameter_error("label_count must be >= 1, got " + std::to_string(label_count));
    if (static_cast<std::int64_t>(labels_.size()) != spec_.node_count())
        throw input_error("mask data has " + std::to_string(labels_.size()) +
                          " labels, grid expects " + std::to_string(spec_.node_count()));
    for (std::size_t idx = 0; idx < labels_.size(); ++idx) {
        std::int32_t v = labels_[idx];
        if (v < 0 || v >= label_count_)
            throw input_error("label " + std::to_string(v) + " at linear offset " +
                              std::to_string(idx) + " outside [0, " +
                              std::to_string(label_count_) + ")");
    }
}

std::int64_t SegmentationMask::count_of(int label) const {
    return std::count(labels_.begin(), labels_.end(), static_cast<std::int32_t>(label));
}

} // namespace fakeres
