#pragma once

#include <stdexcept>

#include "dhelm/util.hpp"

namespace dhelm {

/// Physical parameters of the damped time-harmonic wave problem:
/// angular frequency omega, first-order damping strength r and
/// viscoelastic damping strength gamma. The two damping mechanisms may be
/// active simultaneously; r = gamma = 0 is the classical undamped problem.
struct PhysicalParams {
    double omega;
    double r;
    double gamma;

    PhysicalParams(double omega_, double r_ = 0.0, double gamma_ = 0.0)
        : omega(omega_), r(r_), gamma(gamma_) {
        if (!(omega > 0.0)) throw std::invalid_argument("PhysicalParams: omega must be > 0");
        if (!(r >= 0.0)) throw std::invalid_argument("PhysicalParams: r must be >= 0");
        if (!(gamma >= 0.0)) throw std::invalid_argument("PhysicalParams: gamma must be >= 0");
    }
};

/// The complex zeroth-order coefficient eta = -omega^2 (1 - i r/omega) / (1 + i gamma omega)
/// of the normalized damped Helmholtz equation  -Lap(u) + eta u = f / (1 + i gamma omega),
/// together with its principal square root s = sqrt(eta) (the impedance
/// parameter of the transmission conditions) and the right-hand-side scaling.
///
/// Damping moves eta into the closed upper half-plane, so Re(sqrt_eta) >= 0
/// and the undamped case reduces to eta = -omega^2, sqrt_eta = i omega.
struct DampedCoefficient {
    PhysicalParams params;
    cx eta;
    cx sqrt_eta;
    cx rhs_scale; // 1 / (1 + i gamma omega)
};

/// Principal complex square root: Re(w) >= 0, with the negative real axis
/// mapped to the positive imaginary axis (so sqrt(-omega^2) = +i omega,
/// matching the outgoing convention under the e^{i omega t} ansatz).
cx principal_sqrt(cx z);

DampedCoefficient compute_eta(const PhysicalParams& params);

/// Case selector for the asymptotic forms of omega^2 / (1 + i omega gamma).
enum class GammaRegime { Small, Unit, Large };

struct ZerothOrderApprox {
    cx value;
    double omega_gamma;
    /// Set when the requested regime disagrees with omega*gamma by more than
    /// a factor of 3 (Small expects <= 1/3, Unit within [1/3, 3], Large >= 3).
    /// Advisory only; the approximation is still returned.
    bool regime_mismatch;
};

/// Asymptotic approximation of the viscoelastic zeroth-order coefficient
/// omega^2 / (1 + i omega gamma):
///   Small:  omega^2 - i omega^3 gamma
///   Unit:   c omega^2 (1 - i),  c = 1 / (1 + omega^2 gamma^2)
///   Large:  gamma^{-2} - i omega gamma^{-1}
/// Requires gamma > 0.
ZerothOrderApprox zeroth_order_approx(const PhysicalParams& params, GammaRegime regime);

/// Ratio Im/Re of the zeroth-order coefficient -eta. Equals -omega*gamma for
/// pure viscoelastic damping and -r/omega for pure first-order damping.
/// Requires exactly one of r, gamma nonzero.
double imag_real_ratio(const PhysicalParams& params);

} // namespace dhelm
