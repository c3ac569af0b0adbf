#include <doctest.h>

#include "support.hpp"

using namespace dqtest;

TEST_CASE("quaternion identity and unit products") {
    Quaternion one = Quaternion::identity();
    Quaternion p = one * one;
    CHECK(p.vec.isZero(0));
    CHECK(p.scalar == 1.0);

    // i * j = k from the product formula
    Quaternion i{Vec3(1, 0, 0), 0.0};
    Quaternion j{Vec3(0, 1, 0), 0.0};
    Quaternion k = i * j;
    CHECK(k.vec.isApprox(Vec3(0, 0, 1), 1e-15));
    CHECK(k.scalar == doctest::Approx(0.0));
}

TEST_CASE("product matches the left-multiplication matrix oracle") {
    Rng rng(101);
    for (int it = 0; it < 2000; ++it) {
        Quaternion a = random_quat(rng);
        Quaternion b = random_quat(rng);
        Vec4 oracle = left_mul_matrix(a) * b.to_vec4();
        Vec4 got = (a * b).to_vec4();
        CHECK((oracle - got).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("norm multiplicativity over 1e4 random pairs") {
    Rng rng(7);
    for (int it = 0; it < 10000; ++it) {
        Quaternion a = random_quat(rng);
        Quaternion b = random_quat(rng);
        double lhs = (a * b).norm();
        double rhs = a.norm() * b.norm();
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, rhs));
    }
}

TEST_CASE("conjugation is an involution and matches the norm identity") {
    Rng rng(13);
    for (int it = 0; it < 1000; ++it) {
        Quaternion a = random_quat(rng);
        Quaternion cc = conj(conj(a));
        CHECK(cc.vec.isApprox(a.vec, 1e-15));
        CHECK(cc.scalar == a.scalar);
        // ‖a‖² = a a* = a* a = a·a
        Quaternion aa = a * conj(a);
        CHECK(aa.vec.norm() < 1e-13);
        CHECK(aa.scalar == doctest::Approx(a.norm2()).epsilon(1e-13));
        CHECK(dot(a, a) == doctest::Approx(a.norm2()).epsilon(1e-13));
    }
}

TEST_CASE("dot and cross split the product") {
    Rng rng(17);
    for (int it = 0; it < 1000; ++it) {
        Quaternion a = random_quat(rng);
        Quaternion b = random_quat(rng);
        // dot = (a*b + b*a)/2 restricted to the scalar slot
        Quaternion sym = 0.5 * (conj(a) * b + conj(b) * a);
        CHECK(sym.vec.norm() < 1e-13);
        CHECK(sym.scalar == doctest::Approx(dot(a, b)).epsilon(1e-12));
        // cross = (ab − b*a*)/2 with zero scalar
        Quaternion anti = 0.5 * (a * b - conj(b) * conj(a));
        Quaternion cr = cross(a, b);
        CHECK(anti.vec.isApprox(cr.vec, 1e-12));
        CHECK(std::abs(anti.scalar) < 1e-13);
        CHECK(cr.scalar == 0.0);
    }
}

TEST_CASE("matrix star acts blockwise") {
    Rng rng(23);
    for (int it = 0; it < 200; ++it) {
        Mat4 m;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) m(r, c) = rng.uniform(-1, 1);
        Quaternion q = random_quat(rng);
        Quaternion got = mat_star(m, q);
        Vec4 expect = m * q.to_vec4();
        CHECK((got.to_vec4() - expect).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("unit quaternion construction enforces the tolerance") {
    CHECK_THROWS_AS(UnitQuaternion(Quaternion{Vec3(0.1, 0, 0), 1.0}), ContractViolation);
    CHECK_NOTHROW(UnitQuaternion(Quaternion::identity()));
    CHECK_THROWS_AS(UnitQuaternion::normalized(Quaternion::zero()), DomainError);

    UnitQuaternion r = UnitQuaternion::from_axis_angle(Vec3(0, 0, 1), M_PI / 2.0);
    Vec3 v = r.rotate(Vec3(1, 0, 0));
    CHECK(v.isApprox(Vec3(0, 1, 0), 1e-12));
    CHECK(r.rotate_back(v).isApprox(Vec3(1, 0, 0), 1e-12));
}
