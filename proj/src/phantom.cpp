#include "fakeres/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "fakeres/errors.hpp"
#include "fakeres/parallel.hpp"

namespace fakeres {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kValueSnapTolerance = 1e-9;
constexpr int kMaxDerivedLabels = 4096;

double degrees_to_radians(double deg) { return deg * (kPi / 180.0); }

// Ellipsoid with its rotation trig and bounding-sphere radius precomputed,
// so the per-point membership test is trig-free.
struct PreparedEllipsoid {
    vec3 center;
    vec3 semi;
    double cos_rot;
    double sin_rot;
    double bound_sq; // squared radius of the bounding sphere
    double intensity;
};

std::vector<PreparedEllipsoid> prepare_ellipsoids(const PhantomDefinition& def) {
    std::vector<PreparedEllipsoid> out;
    out.reserve(def.ellipsoids.size());
    for (const EllipsoidSpec& e : def.ellipsoids) {
        double m = std::max({e.semi_axes[0], e.semi_axes[1], e.semi_axes[2]});
        out.push_back({e.center, e.semi_axes, std::cos(e.z_rotation), std::sin(e.z_rotation),
                       m * m, e.additive_intensity});
    }
    return out;
}

double eval_prepared(const std::vector<PreparedEllipsoid>& ellipsoids, const vec3& p) {
    double acc = 0.0;
    for (const PreparedEllipsoid& e : ellipsoids) {
        double dx = p[0] - e.center[0];
        double dy = p[1] - e.center[1];
        double dz = p[2] - e.center[2];
        if (dx * dx + dy * dy + dz * dz > e.bound_sq)
            continue;
        double xr = e.cos_rot * dx + e.sin_rot * dy;
        double yr = -e.sin_rot * dx + e.cos_rot * dy;
        double qx = xr / e.semi[0];
        double qy = yr / e.semi[1];
        double qz = dz / e.semi[2];
        if (qx * qx + qy * qy + qz * qz <= 1.0)
            acc += e.intensity;
    }
    return acc;
}

} // namespace

PhantomDefinition PhantomDefinition::shepp_logan() {
    PhantomDefinition def;
    def.domain = Domain::cube(-1.0, 1.0);
    // Classic head geometry; intensities chosen so every tissue class sums to
    // a value distinct from all others.
    auto add = [&](vec3 c, vec3 ax, double rot_deg, double intensity) {
        def.ellipsoids.push_back({c, ax, degrees_to_radians(rot_deg), intensity});
    };
    add({0.0, 0.0, 0.0}, {0.69, 0.92, 0.81}, 0.0, 1.0);         // skull
    add({0.0, -0.0184, 0.0}, {0.6624, 0.874, 0.78}, 0.0, -0.8); // brain
    add({0.22, 0.0, 0.0}, {0.11, 0.31, 0.22}, -18.0, -0.15);    // right ventricle
    add({-0.22, 0.0, 0.0}, {0.16, 0.41, 0.28}, 18.0, -0.15);    // left ventricle
    add({0.0, 0.35, -0.15}, {0.21, 0.25, 0.41}, 0.0, 0.1);      // large lesion
    add({0.0, 0.1, 0.25}, {0.046, 0.046, 0.05}, 0.0, 0.1);      // small lesion
    add({0.0, -0.1, 0.25}, {0.046, 0.046, 0.05}, 0.0, 0.1);     // small lesion
    add({-0.08, -0.605, 0.0}, {0.046, 0.023, 0.05}, 0.0, -0.05); // low spot
    add({0.0, -0.606, 0.0}, {0.023, 0.023, 0.02}, 0.0, -0.05);   // low spot
    add({0.06, -0.605, 0.0}, {0.023, 0.046, 0.02}, 0.0, -0.05);  // low spot
    // Region values: background 0, skull 1, ventricles 0.05, brain 0.2,
    // lesions 0.3, low spots 0.15. Label numbering follows this order.
    def.label_values = {0.0, 1.0, 0.05, 0.2, 0.3, 0.15};
    return def;
}

PhantomDefinition PhantomDefinition::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open phantom description " + path);
    PhantomDefinition def;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::string head;
        if (!(ls >> head))
            continue;
        auto fail = [&](const std::string& what) -> format_error {
            return format_error("phantom file " + path + " line " + std::to_string(line_no) +
                                ": " + what);
        };
        if (head == "domain") {
            double b[6];
            for (double& v : b)
                if (!(ls >> v))
                    throw fail("domain needs 6 numbers: x0 x1 y0 y1 z0 z1");
            def.domain = Domain{{b[0], b[2], b[4]}, {b[1], b[3], b[5]}};
            try {
                def.domain.validate();
            } catch (const parameter_error& e) {
                throw fail(e.what());
            }
            continue;
        }
        if (head == "labels") {
            def.label_values.clear();
            double v;
            while (ls >> v)
                def.label_values.push_back(v);
            if (def.label_values.empty())
                throw fail("labels directive needs at least one value");
            continue;
        }
        std::istringstream es(line);
        double f[8];
        for (int m = 0; m < 8; ++m)
            if (!(es >> f[m]))
                throw fail("expected 8 numbers: cx cy cz ax ay az zrot_deg intensity");
        std::string trailing;
        if (es >> trailing)
            throw fail("unexpected token \"" + trailing + "\" after 8 numbers");
        if (!(f[3] > 0.0 && f[4] > 0.0 && f[5] > 0.0))
            throw fail("semi-axes must be positive");
        def.ellipsoids.push_back(
            {{f[0], f[1], f[2]}, {f[3], f[4], f[5]}, degrees_to_radians(f[6]), f[7]});
    }
    if (def.ellipsoids.empty())
        throw format_error("phantom file " + path + " defines no ellipsoids");
    return def;
}

double eval_phantom(const PhantomDefinition& def, const vec3& point) {
    return eval_prepared(prepare_ellipsoids(def), point);
}

RasterizedPhantom rasterize_phantom(const PhantomDefinition& def, const GridSpec& spec,
                                    int threads) {
    for (int d = 0; d < 3; ++d)
        if (spec.domain.lower[d] < def.domain.lower[d] ||
            spec.domain.upper[d] > def.domain.upper[d])
            throw input_error("rasterization grid extends outside the phantom domain");
    const index3& shape = spec.shape;
    VolumeGrid raw(spec);
    std::span<double> vals = raw.values();
    const std::int64_t nx = shape[0];
    const std::int64_t ny = shape[1];
    const std::vector<PreparedEllipsoid> prepared = prepare_ellipsoids(def);

    parallel_for(shape[2], threads, [&](std::int64_t zb, std::int64_t ze) {
        for (std::int64_t k = zb; k < ze; ++k) {
            double z = node_coordinate_axis(spec, 2, static_cast<int>(k) + 1);
            for (std::int64_t j = 0; j < ny; ++j) {
                double y = node_coordinate_axis(spec, 1, static_cast<int>(j) + 1);
                std::int64_t row = nx * (j + ny * k);
                for (std::int64_t i = 0; i < nx; ++i) {
                    double x = node_coordinate_axis(spec, 0, static_cast<int>(i) + 1);
                    vals[static_cast<std::size_t>(row + i)] = eval_prepared(prepared, {x, y, z});
                }
            }
        }
    });

    std::vector<double> table = def.label_values;
    if (!table.empty()) {
        for (std::size_t a = 0; a < table.size(); ++a)
            for (std::size_t b = a + 1; b < table.size(); ++b)
                if (std::abs(table[a] - table[b]) <= 2.0 * kValueSnapTolerance)
                    throw input_error("phantom label values " + std::to_string(table[a]) +
                                      " and " + std::to_string(table[b]) +
                                      " are too close to tell apart");
    } else {
        // Derive the table from the data: distinct sample values, merged when
        // closer than the snap tolerance, background 0 first then ascending.
        std::set<double> distinct;
        for (double v : vals) {
            distinct.insert(v);
            if (static_cast<int>(distinct.size()) > kMaxDerivedLabels)
                throw input_error("phantom produces more than " +
                                  std::to_string(kMaxDerivedLabels) +
                                  " distinct values; provide an explicit labels directive");
        }
        std::vector<double> merged;
        for (double v : distinct) {
            if (merged.empty() || v - merged.back() > kValueSnapTolerance)
                merged.push_back(v);
        }
        auto zero = std::find_if(merged.begin(), merged.end(), [](double v) {
            return std::abs(v) <= kValueSnapTolerance;
        });
        if (zero != merged.end()) {
            double z = *zero;
            merged.erase(zero);
            merged.insert(merged.begin(), z);
        }
        table = std::move(merged);
    }

    std::vector<std::int32_t> labels(vals.size());
    const int label_count = static_cast<int>(table.size());
    parallel_for(static_cast<std::int64_t>(vals.size()), threads,
                 [&](std::int64_t b, std::int64_t e) {
                     for (std::int64_t idx = b; idx < e; ++idx) {
                         double v = vals[static_cast<std::size_t>(idx)];
                         int found = -1;
                         for (int l = 0; l < label_count; ++l) {
                             if (std::abs(v - table[static_cast<std::size_t>(l)]) <=
                                 kValueSnapTolerance) {
                                 found = l;
                                 break;
                             }
                         }
                         if (found < 0)
                             throw input_error("phantom sample " + std::to_string(v) +
                                               " matches no expected region value");
                         labels[static_cast<std::size_t>(idx)] = found;
                         vals[static_cast<std::size_t>(idx)] = table[static_cast<std::size_t>(found)];
                     }
                 });

    return RasterizedPhantom{std::move(raw),
                             SegmentationMask(spec, label_count, std::move(labels)),
                             std::move(table)};
}

PhantomDefinition two_compartment_definition(const Domain& domain,
                                             std::span<const double> sphere_radii,
                                             double hot_value, double cold_value) {
    domain.validate();
    if (sphere_radii.empty())
        throw parameter_error("two-compartment phantom needs at least one sphere radius");
    if (!std::isfinite(hot_value) || !std::isfinite(cold_value))
        throw parameter_error("hot and cold values must be finite");

    vec3 c, half;
    for (int d = 0; d < 3; ++d) {
        c[d] = 0.5 * (domain.lower[d] + domain.upper[d]);
        half[d] = 0.5 * (domain.upper[d] - domain.lower[d]);
    }
    double m = std::min({half[0], half[1], half[2]});
    double shell_value = 0.5 * cold_value;

    // Equal region values (hot == cold, say) are allowed; the dedicated
    // rasterizer labels by geometry, not by value.
    std::vector<double> values{0.0, shell_value, cold_value, hot_value};

    PhantomDefinition def;
    def.domain = domain;
    def.label_values = values;
    vec3 shell_axes{0.92 * half[0], 0.92 * half[1], 0.92 * half[2]};
    vec3 cold_axes{0.86 * half[0], 0.86 * half[1], 0.86 * half[2]};
    def.ellipsoids.push_back({c, shell_axes, 0.0, shell_value});
    def.ellipsoids.push_back({c, cold_axes, 0.0, cold_value - shell_value});

    // One sphere sits at the center; several are spaced evenly on a ring so
    // none touches another. Either way each must stay strictly inside the
    // cold compartment, otherwise labeling by containment count breaks.
    const std::size_t count = sphere_radii.size();
    double ring = count > 1 ? 0.55 * m : 0.0;
    double cold_min_axis = std::min({cold_axes[0], cold_axes[1], cold_axes[2]});
    std::vector<vec3> centers;
    std::vector<double> radii_abs;
    for (std::size_t k = 0; k < count; ++k) {
        if (!(sphere_radii[k] > 0.0))
            throw parameter_error("sphere radii must be positive");
        double theta = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(count);
        vec3 p{c[0] + ring * std::cos(theta), c[1] + ring * std::sin(theta), c[2]};
        double r = sphere_radii[k] * m;
        // Conservative containment: scaled center norm plus worst-case scaled
        // radius must stay inside the unit ball of the cold compartment.
        double qn = 0.0;
        for (int d = 0; d < 3; ++d) {
            double q = (p[d] - c[d]) / cold_axes[d];
            qn += q * q;
        }
        if (std::sqrt(qn) + r / cold_min_axis >= 1.0)
            throw geometry_error("sphere " + std::to_string(k) +
                                 " does not fit inside the cold compartment");
        centers.push_back(p);
        radii_abs.push_back(r);
    }
    for (std::size_t a = 0; a < count; ++a)
        for (std::size_t b = a + 1; b < count; ++b) {
            double dx = centers[a][0] - centers[b][0];
            double dy = centers[a][1] - centers[b][1];
            double dz = centers[a][2] - centers[b][2];
            double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
            if (dist <= radii_abs[a] + radii_abs[b])
                throw geometry_error("spheres " + std::to_string(a) + " and " +
                                     std::to_string(b) + " overlap");
        }
    for (std::size_t k = 0; k < count; ++k)
        def.ellipsoids.push_back({centers[k],
                                  {radii_abs[k], radii_abs[k], radii_abs[k]},
                                  0.0,
                                  hot_value - cold_value});
    return def;
}

RasterizedPhantom make_two_compartment(const GridSpec& spec,
                                       std::span<const double> sphere_radii, double hot_value,
                                       double cold_value, int threads) {
    PhantomDefinition def =
        two_compartment_definition(spec.domain, sphere_radii, hot_value, cold_value);
    // The compartments are strictly nested (spheres inside cold inside shell)
    // and the spheres are pairwise disjoint, so the number of ellipsoids
    // containing a point is exactly its label. Labeling by geometry keeps the
    // phantom usable when region values coincide.
    const std::vector<PreparedEllipsoid> prepared = prepare_ellipsoids(def);
    VolumeGrid vol(spec);
    std::span<double> vals = vol.values();
    std::vector<std::int32_t> labels(vals.size());
    const index3& shape = spec.shape;
    const std::int64_t nx = shape[0];
    const std::int64_t ny = shape[1];

    parallel_for(shape[2], threads, [&](std::int64_t zb, std::int64_t ze) {
        for (std::int64_t k = zb; k < ze; ++k) {
            double z = node_coordinate_axis(spec, 2, static_cast<int>(k) + 1);
            for (std::int64_t j = 0; j < ny; ++j) {
                double y = node_coordinate_axis(spec, 1, static_cast<int>(j) + 1);
                std::int64_t row = nx * (j + ny * k);
                for (std::int64_t i = 0; i < nx; ++i) {
                    vec3 p{node_coordinate_axis(spec, 0, static_cast<int>(i) + 1), y, z};
                    int inside = 0;
                    for (const PreparedEllipsoid& e : prepared) {
                        double dx = p[0] - e.center[0];
                        double dy = p[1] - e.center[1];
                        double dz = p[2] - e.center[2];
                        if (dx * dx + dy * dy + dz * dz > e.bound_sq)
                            continue;
                        double qx = dx / e.semi[0];
                        double qy = dy / e.semi[1];
                        double qz = dz / e.semi[2];
                        if (qx * qx + qy * qy + qz * qz <= 1.0)
                            ++inside;
                    }
                    int label = std::min(inside, 3);
                    std::size_t u = static_cast<std::size_t>(row + i);
                    labels[u] = label;
                    vals[u] = def.label_values[static_cast<std::size_t>(label)];
                }
            }
        }
    });

    return RasterizedPhantom{std::move(vol), SegmentationMask(spec, 4, std::move(labels)),
                             def.label_values};
}

std::vector<double> default_two_compartment_radii() {
    return {0.05, 0.065, 0.085, 0.11, 0.14, 0.185};
}

} // namespace fakeres
