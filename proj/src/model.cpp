#include "dhelm/model.hpp"

#include <cmath>

namespace dhelm {

cx principal_sqrt(cx z) {
    // On the negative real axis the branch is fixed independently of the
    // sign of the (zero) imaginary part.
    if (z.imag() == 0.0) {
        if (z.real() < 0.0) return cx(0.0, std::sqrt(-z.real()));
        return cx(std::sqrt(z.real()), 0.0);
    }
    cx w = std::sqrt(z);
    if (w.real() < 0.0) w = -w;
    return w;
}

DampedCoefficient compute_eta(const PhysicalParams& params) {
    const double w = params.omega;
    // -w^2 (1 - i r/w) expanded to -w^2 + i w r, which is exact when gamma = 0
    const cx numerator(-w * w, w * params.r);
    const cx visco(1.0, params.gamma * w);
    const cx eta = numerator / visco;
    return DampedCoefficient{params, eta, principal_sqrt(eta), 1.0 / visco};
}

ZerothOrderApprox zeroth_order_approx(const PhysicalParams& params, GammaRegime regime) {
    if (!(params.gamma > 0.0))
        throw std::invalid_argument("zeroth_order_approx: gamma must be > 0");
    const double w = params.omega;
    const double g = params.gamma;
    const double wg = w * g;

    cx value;
    bool mismatch = false;
    switch (regime) {
        case GammaRegime::Small:
            value = cx(w * w, -w * w * w * g);
            mismatch = wg > 1.0 / 3.0;
            break;
        case GammaRegime::Unit: {
            const double c = 1.0 / (1.0 + wg * wg);
            value = c * w * w * cx(1.0, -1.0);
            mismatch = wg < 1.0 / 3.0 || wg > 3.0;
            break;
        }
        case GammaRegime::Large:
            value = cx(1.0 / (g * g), -w / g);
            mismatch = wg < 3.0;
            break;
    }
    return ZerothOrderApprox{value, wg, mismatch};
}

double imag_real_ratio(const PhysicalParams& params) {
    const bool have_r = params.r > 0.0;
    const bool have_g = params.gamma > 0.0;
    if (have_r == have_g)
        throw std::invalid_argument(
            "imag_real_ratio: exactly one of r, gamma must be nonzero");
    const cx coeff = -compute_eta(params).eta;
    return coeff.imag() / coeff.real();
}

} // namespace dhelm
