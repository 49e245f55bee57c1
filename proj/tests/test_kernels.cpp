#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "fakeres/errors.hpp"
#include "fakeres/kernels.hpp"
#include "fakeres/numerics.hpp"

using namespace fakeres;

TEST_CASE("trilinear hat values") {
    const double h = 0.25;
    BasisKernel b = BasisKernel::trilinear(h);
    CHECK(b.evaluate(0.0) == 1.0);
    CHECK(b.evaluate(0.5 * h) == 0.5);
    CHECK(b.evaluate(-0.5 * h) == 0.5);
    CHECK(b.evaluate(h) == 0.0);
    CHECK(b.evaluate(-h) == 0.0);
    CHECK(b.evaluate(1.5 * h) == 0.0);
    CHECK(b.evaluate(0.25 * h) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(b.support_radius_cells() == 1);
}

TEST_CASE("nearest box values and tie to the left node") {
    const double h = 0.1;
    BasisKernel b = BasisKernel::nearest(h);
    CHECK(b.evaluate(0.0) == 1.0);
    CHECK(b.evaluate(0.49 * h) == 1.0);
    CHECK(b.evaluate(0.51 * h) == 0.0);
    // A point midway between nodes is offset +h/2 from the lower node and
    // -h/2 from the upper one; only the lower node may claim it.
    CHECK(b.evaluate(0.5 * h) == 1.0);
    CHECK(b.evaluate(-0.5 * h) == 0.0);
    CHECK(b.evaluate(-0.49 * h) == 1.0);
    CHECK(b.support_radius_cells() == 1);
}

TEST_CASE("kernels are cardinal at lattice offsets") {
    for (KernelKind kind : {KernelKind::trilinear, KernelKind::nearest}) {
        BasisKernel b = BasisKernel::make(kind, 0.3);
        CHECK(b.evaluate(0.0) == 1.0);
        for (int k = -3; k <= 3; ++k) {
            if (k == 0)
                continue;
            CHECK(b.evaluate(k * 0.3) == 0.0);
        }
    }
}

TEST_CASE("construction validates spacing") {
    CHECK_THROWS_AS(BasisKernel::trilinear(0.0), parameter_error);
    CHECK_THROWS_AS(BasisKernel::nearest(-1.0), parameter_error);
    CHECK_THROWS_AS(BasisKernel::trilinear(std::numeric_limits<double>::quiet_NaN()),
                    parameter_error);
}

TEST_CASE("kernel lookup by name") {
    CHECK(BasisKernel::by_name("trilinear", 1.0).kind() == KernelKind::trilinear);
    CHECK(BasisKernel::by_name("nearest", 1.0).kind() == KernelKind::nearest);
    CHECK(std::string(BasisKernel::by_name("nearest", 1.0).name()) == "nearest");
    CHECK_THROWS_AS(BasisKernel::by_name("cubic", 1.0), parameter_error);
    CHECK_THROWS_AS(BasisKernel::by_name("", 1.0), parameter_error);
}

TEST_CASE("randomized partition of unity on a lattice") {
    std::mt19937_64 gen(402);
    for (KernelKind kind : {KernelKind::trilinear, KernelKind::nearest}) {
        const double h = 0.37;
        BasisKernel b = BasisKernel::make(kind, h);
        for (int trial = 0; trial < 1000; ++trial) {
            double t = uniform_in(gen, 0.0, h);
            double sum = 0.0;
            for (int k = -4; k <= 4; ++k)
                sum += b.evaluate(t - k * h);
            CHECK(std::abs(sum - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("separable weight is the product of axis evaluations") {
    std::mt19937_64 gen(403);
    BasisKernel bx = BasisKernel::trilinear(0.5);
    BasisKernel by = BasisKernel::trilinear(0.25);
    BasisKernel bz = BasisKernel::nearest(0.125);
    for (int trial = 0; trial < 1000; ++trial) {
        vec3 off{uniform_in(gen, -0.6, 0.6), uniform_in(gen, -0.3, 0.3),
                 uniform_in(gen, -0.15, 0.15)};
        double expect = (bx.evaluate(off[0]) * by.evaluate(off[1])) * bz.evaluate(off[2]);
        CHECK(separable_weight(bx, by, bz, off) == expect);
    }
}

TEST_CASE("separable weight special values") {
    BasisKernel b = BasisKernel::trilinear(0.5);
    CHECK(separable_weight(b, b, b, {0.0, 0.0, 0.0}) == 1.0);
    CHECK(separable_weight(b, b, b, {0.25, 0.25, 0.25}) == 0.125);
    // One component at or beyond the support edge kills the product.
    CHECK(separable_weight(b, b, b, {0.5, 0.0, 0.1}) == 0.0);
    CHECK(separable_weight(b, b, b, {0.1, -0.7, 0.0}) == 0.0);
}

TEST_CASE("respacing keeps the kind") {
    BasisKernel b = BasisKernel::nearest(1.0);
    BasisKernel c = b.with_spacing(0.2);
    CHECK(c.kind() == KernelKind::nearest);
    CHECK(c.spacing() == 0.2);
    CHECK(c.evaluate(0.09) == 1.0);
    CHECK(c.evaluate(0.11) == 0.0);
}
