#pragma once

#include <string>

#include "fakeres/grid.hpp"

namespace fakeres {

enum class KernelKind { nearest, trilinear };

// Separable interpolation basis for one grid spacing h. The 3-D weight of a
// node is the product of three 1-D evaluations at the per-axis offsets from
// the query point. Both kernels reproduce node samples exactly (b(0) = 1,
// b(k*h) = 0 for k != 0) and form a partition of unity inside the domain.
class BasisKernel {
public:
    // Hat function: b(t) = 1 - |t|/h for |t| < h, else 0.
    static BasisKernel trilinear(double h);
    // Box function with ties to the left node: b(t) = 1 on (-h/2, h/2], else 0,
    // so a point midway between nodes takes the lower-index node.
    static BasisKernel nearest(double h);
    static BasisKernel make(KernelKind kind, double h);
    // Accepts "nearest" or "trilinear"; throws parameter_error otherwise.
    static BasisKernel by_name(const std::string& name, double h);

    double evaluate(double t) const;

    double spacing() const { return h_; }
    KernelKind kind() const { return kind_; }
    const char* name() const;
    // Nodes within this many cells of the query contribute; 1 for both kernels.
    int support_radius_cells() const { return 1; }

    BasisKernel with_spacing(double h) const { return make(kind_, h); }

private:
    BasisKernel(KernelKind kind, double h);

    KernelKind kind_;
    double h_;
};

// Product of per-axis evaluations at offset = point - node, in the fixed
// order (x * y) * z so results are bit-identical across call sites.
double separable_weight(const BasisKernel& bx, const BasisKernel& by, const BasisKernel& bz,
                        const vec3& offset);

} // namespace fakeres
