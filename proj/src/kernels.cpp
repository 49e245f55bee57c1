#include "fakeres/kernels.hpp"

#include <cmath>
#include <string>

#include "fakeres/errors.hpp"

namespace fakeres {

BasisKernel::BasisKernel(KernelKind kind, double h) : kind_(kind), h_(h) {
    if (!(h > 0.0) || !std::isfinite(h))
        throw parameter_error("kernel spacing must be positive and finite, got " +
                              std::to_string(h));
}

BasisKernel BasisKernel::trilinear(double h) { return BasisKernel(KernelKind::trilinear, h); }

BasisKernel BasisKernel::nearest(double h) { return BasisKernel(KernelKind::nearest, h); }

BasisKernel BasisKernel::make(KernelKind kind, double h) { return BasisKernel(kind, h); }

BasisKernel BasisKernel::by_name(const std::string& name, double h) {
    if (name == "trilinear")
        return trilinear(h);
    if (name == "nearest")
        return nearest(h);
    throw parameter_error("unknown kernel \"" + name + "\" (expected nearest or trilinear)");
}

double BasisKernel::evaluate(double t) const {
    if (kind_ == KernelKind::trilinear) {
        double a = std::abs(t);
        return a >= h_ ? 0.0 : 1.0 - a / h_;
    }
    // Half-open box (-h/2, h/2]: the right endpoint is in so that a midpoint
    // query weights exactly one node (the left one), keeping the partition of
    // unity exact everywhere.
    if (t == 0.5 * h_)
        return 1.0;
    return std::abs(t) < 0.5 * h_ ? 1.0 : 0.0;
}

const char* BasisKernel::name() const {
    return kind_ == KernelKind::trilinear ? "trilinear" : "nearest";
}

double separable_weight(const BasisKernel& bx, const BasisKernel& by, const BasisKernel& bz,
                        const vec3& offset) {
    return (bx.evaluate(offset[0]) * by.evaluate(offset[1])) * bz.evaluate(offset[2]);
}

} // namespace fakeres
