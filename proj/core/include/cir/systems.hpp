#pragma once

#include "cir/model.hpp"

namespace cir::systems {

struct ContinuousModel {
    Matrix A;
    Matrix B;
    Matrix C;
};

// Two masses coupled by springs/dampers, force inputs on each mass, velocity
// outputs. States [x1, x1', x2, x2'].
struct SpringDamperParams {
    double m1 = 1.0, m2 = 1.0;
    double k1 = 4.0, k2 = 8.0;
    double b1 = 2.0, b2 = 4.0;
};
ContinuousModel spring_damper_continuous(const SpringDamperParams& params = {});
StateSpaceModel spring_damper(double dt = 0.05, const SpringDamperParams& params = {});

// Two-capacitor RC ladder driven by two source voltages; outputs are the
// capacitor voltages.
struct RcCircuitParams {
    double R1 = 1e3, R2 = 1e3, R3 = 1e3;
    double C1 = 1e-6, C2 = 330e-6;
};
ContinuousModel rc_circuit_continuous(const RcCircuitParams& params = {});
StateSpaceModel rc_circuit(double dt = 0.1, const RcCircuitParams& params = {});

// Fourth-order single-input, two-output discrete system used for the
// projection and output-dropping workflows.
StateSpaceModel tall_demo();

// Same dynamics with two inputs and one output, CB = [1, 0].
StateSpaceModel wide_demo();

} // namespace cir::systems
