#pragma once

#include <span>
#include <string>
#include <vector>

#include "fakeres/grid.hpp"

namespace fakeres {

// One ellipsoid of an additive phantom: points inside contribute
// additive_intensity to the field. Rotation is about the z axis, in radians.
struct EllipsoidSpec {
    vec3 center{0.0, 0.0, 0.0};
    vec3 semi_axes{1.0, 1.0, 1.0};
    double z_rotation = 0.0;
    double additive_intensity = 0.0;
};

// Piecewise-constant synthetic volume: a sum of ellipsoid indicator functions.
// Every connected region of constant value is one segment; label_values, when
// non-empty, pins both the expected region values and the label numbering
// (label i <-> label_values[i], label 0 should be the background value 0).
struct PhantomDefinition {
    std::vector<EllipsoidSpec> ellipsoids;
    Domain domain = Domain::cube(-1.0, 1.0);
    std::vector<double> label_values;

    // Ten-ellipsoid head phantom on [-1,1]^3 with intensities adjusted so the
    // six tissue classes take the distinct values 0, 1, 0.05, 0.2, 0.3, 0.15
    // (labels 0..5 in that order).
    static PhantomDefinition shepp_logan();

    // Text format, one ellipsoid per line:
    //   cx cy cz ax ay az zrot_deg intensity
    // plus optional directives "domain x0 x1 y0 y1 z0 z1" and
    // "labels v0 v1 ...". '#' starts a comment. Rotation is given in degrees
    // and stored in radians. Throws format_error with the offending line.
    static PhantomDefinition from_file(const std::string& path);
};

// Field value at a point: intensities of all ellipsoids containing it, summed
// in definition order (fixed order keeps region values bitwise constant).
double eval_phantom(const PhantomDefinition& def, const vec3& point);

struct RasterizedPhantom {
    VolumeGrid volume;
    SegmentationMask mask;
    std::vector<double> label_values;
};

// Samples the phantom on the nodes of `spec`, whose domain must equal
// def.domain (input_error otherwise), and labels every node by its region
// value. With def.label_values set, each sample must match a listed value
// within 1e-9 and is stored as that exact value (input_error otherwise).
// Without it, the distinct sample values become the labels: background 0
// first, the rest ascending; values closer than 1e-9 merge.
RasterizedPhantom rasterize_phantom(const PhantomDefinition& def, const GridSpec& spec,
                                    int threads = 0);

// Two-compartment activity phantom: a cold ellipsoidal compartment (value
// cold_value) wrapped in a half-intensity shell, containing one hot sphere of
// value hot_value per entry of sphere_radii. A single sphere sits at the
// domain center; several are spaced evenly on a ring in the central z plane.
// Radii and the ring are in units of the smallest domain half-extent.
// Labels: 0 background, 1 shell, 2 cold, 3 hot (assigned geometrically, so
// equal region values such as hot == cold are fine). Throws geometry_error
// if spheres touch each other or leave the cold compartment.
PhantomDefinition two_compartment_definition(const Domain& domain,
                                             std::span<const double> sphere_radii,
                                             double hot_value, double cold_value);

// two_compartment_definition rasterized onto `spec` in one step.
RasterizedPhantom make_two_compartment(const GridSpec& spec,
                                       std::span<const double> sphere_radii, double hot_value,
                                       double cold_value, int threads = 0);

// Ring of six sphere radii spanning roughly a 4x diameter range; the default
// sphere set for recovery experiments.
std::vector<double> default_two_compartment_radii();

} // namespace fakeres
