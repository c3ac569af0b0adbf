#pragma once

#include <Eigen/Dense>

#include "dqtrack/dual_quat.hpp"
#include "dqtrack/rng.hpp"

namespace dqtest {

using namespace dqtrack;

// Random sampling for the algebra properties: components uniform in [-1,1];
// unit dual quaternions from a normalized rotation plus a translation in
// [-5,5]^3 metres.

inline Quaternion random_quat(Rng& rng) {
    return {Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)),
            rng.uniform(-1, 1)};
}

inline DualQuaternion random_dq(Rng& rng) {
    return {random_quat(rng), random_quat(rng)};
}

inline DualVector random_dual_vector(Rng& rng, double scale = 1.0) {
    return {scale * Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)),
            scale * Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1))};
}

inline UnitQuaternion random_rotation(Rng& rng) {
    Quaternion q;
    do {
        q = random_quat(rng);
    } while (q.norm() < 1e-3);
    return UnitQuaternion::normalized(q);
}

inline UnitDualQuaternion random_unit_dq(Rng& rng) {
    Vec3 t(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
    return pose_from_parts(random_rotation(rng), t);
}

// Independent 4x4 left-multiplication oracle in the (x, y, z, w) layout:
// L(a) * vec4(b) must equal vec4(a b).
inline Mat4 left_mul_matrix(const Quaternion& a) {
    const double a1 = a.vec.x(), a2 = a.vec.y(), a3 = a.vec.z(), a4 = a.scalar;
    Mat4 L;
    L <<  a4, -a3,  a2, a1,
          a3,  a4, -a1, a2,
         -a2,  a1,  a4, a3,
         -a1, -a2, -a3, a4;
    return L;
}

// 8x8 oracle from the 4x4 blocks and the nilpotent dual structure.
inline Mat8 left_mul_matrix8(const DualQuaternion& a) {
    Mat8 L = Mat8::Zero();
    L.block<4, 4>(0, 0) = left_mul_matrix(a.real);
    L.block<4, 4>(4, 4) = left_mul_matrix(a.real);
    L.block<4, 4>(4, 0) = left_mul_matrix(a.dual);
    return L;
}

inline Mat8 random_mat8(Rng& rng) {
    Mat8 m;
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c) m(r, c) = rng.uniform(-1, 1);
    return m;
}

}  // namespace dqtest
