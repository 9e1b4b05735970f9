#include "cir/systems.hpp"

namespace cir::systems {

ContinuousModel spring_damper_continuous(const SpringDamperParams& s) {
    ContinuousModel m;
    m.A.resize(4, 4);
    m.A << 0, 1, 0, 0,
           -(s.k1 + s.k2) / s.m1, -(s.b1 + s.b2) / s.m1, s.k2 / s.m1, s.b2 / s.m1,
           0, 0, 0, 1,
           s.k2 / s.m2, s.b2 / s.m2, -s.k2 / s.m2, -s.b2 / s.m2;
    m.B.resize(4, 2);
    m.B << 0, 0,
           1 / s.m2, 0,
           0, 0,
           0, 1 / s.m2;
    m.C.resize(2, 4);
    m.C << 0, 1, 0, 0,
           0, 0, 0, 1;
    return m;
}

StateSpaceModel spring_damper(double dt, const SpringDamperParams& params) {
    auto c = spring_damper_continuous(params);
    return StateSpaceModel::from_continuous(c.A, c.B, c.C, dt);
}

ContinuousModel rc_circuit_continuous(const RcCircuitParams& r) {
    ContinuousModel m;
    m.A.resize(2, 2);
    m.A << -(r.R1 + r.R3) / (r.C1 * r.R1 * r.R3), 1 / (r.C1 * r.R3),
           1 / (r.C2 * r.R3), -(r.R2 + r.R3) / (r.C2 * r.R2 * r.R3);
    m.B.resize(2, 2);
    m.B << 1 / (r.C1 * r.R1), 0,
           0, 1 / (r.C2 * r.R2);
    m.C = Matrix::Identity(2, 2);
    return m;
}

StateSpaceModel rc_circuit(double dt, const RcCircuitParams& params) {
    auto c = rc_circuit_continuous(params);
    return StateSpaceModel::from_continuous(c.A, c.B, c.C, dt);
}

namespace {

Matrix demo_dynamics() {
    Matrix A(4, 4);
    A << 0.1, -0.7, 0.0, 0.0,
         0.7, 0.2, -0.7, 0.0,
         0.0, 0.7, 0.3, -0.7,
         0.0, 0.0, 0.7, 0.4;
    return A;
}

} // namespace

StateSpaceModel tall_demo() {
    Matrix B(4, 1);
    B << 0, 1, 0, 0;
    Matrix C(2, 4);
    C << 0, 1, 0, 0,
         1, 0, 0, 0;
    return StateSpaceModel(demo_dynamics(), B, C);
}

StateSpaceModel wide_demo() {
    Matrix B(4, 2);
    B << 0, 0,
         1, 0,
         0, 1,
         0, 0;
    Matrix C(1, 4);
    C << 0, 1, 0, 0;
    return StateSpaceModel(demo_dynamics(), B, C);
}

} // namespace cir::systems
