#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace fkmc {

enum class Model { nelson, polaron };

// Physical and regularization parameters shared by every kernel and
// estimator.  Momentum-space conventions:
//
//   dispersion        omega(k) = |k|
//   infrared cutoff   |k| >= lambda        (lambda >= 0)
//   UV regularization exp(-epsilon |k|^2)  (epsilon >= 0; epsilon = 0 is the
//                                           removed-cutoff limit)
//
// The pair interaction for the translation-invariant model is
//   W(x, t)    = int_{|k|>=lambda} e^{-eps k^2} e^{-ik.x} e^{-omega|t|} / (2 omega) dk
// and its once-integrated companion carries beta(k) = 1/(omega + k^2/2):
//   rho(x, t)  = int_{|k|>=lambda} e^{-eps k^2} e^{-ik.x} e^{-omega|t|} beta(k) / (2 omega) dk.
// The strong-coupling variant replaces 1/(2 omega) by 1/(2 omega^2) and the
// time factor by e^{-|t|}.
struct ModelParams {
    Model model = Model::nelson;
    int d = 3;                  // spatial dimension, 2 or 3
    double g = 1.0;             // coupling constant
    double lambda = 1.0;        // infrared cutoff (>= 0; > 0 for nelson)
    double epsilon = 1.0;       // UV regularization parameter (>= 0)
    Eigen::VectorXd total_momentum = Eigen::VectorXd::Zero(3);  // P, size d
    double horizon = 1.0;       // T; nelson paths live on [-T, T], polaron on [0, T]

    // Throws std::invalid_argument on out-of-range values.
    void validate() const;

    // FNV-1a hash of a canonical text serialization; estimators stamp this
    // into their results so runs can be matched to the exact parameter set.
    std::string fingerprint() const;
};

double omega(double k);            // |k|
double propagator_beta(double k);  // 1/(omega + k^2/2); domain error for k <= 0

}  // namespace fkmc
