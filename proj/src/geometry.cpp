#include "dhelm/geometry.hpp"

#include <string>

namespace dhelm {

Decomposition build_decomposition(int n_subdomains, double overlap) {
    if (n_subdomains < 2)
        throw std::invalid_argument("build_decomposition: need at least 2 subdomains");
    if (overlap < 0.0 || overlap >= 1.0)
        throw InvalidOverlapError("build_decomposition: overlap must lie in [0, 1)");

    const double pitch = (1.0 - overlap) / n_subdomains;
    if (n_subdomains >= 3 && overlap >= pitch)
        throw TripleOverlapError(
            "build_decomposition: overlap " + std::to_string(overlap) +
            " >= pitch " + std::to_string(pitch) + ", non-neighbors would intersect");

    Decomposition d;
    d.n_subdomains = n_subdomains;
    d.overlap = overlap;
    d.nonoverlap_pitch = pitch;
    d.intervals.reserve(static_cast<std::size_t>(n_subdomains));
    for (int j = 1; j <= n_subdomains; ++j) {
        const double a = (j - 1) * pitch;
        const double b = (j == n_subdomains) ? 1.0 : j * pitch + overlap;
        d.intervals.emplace_back(a, b);
    }
    return d;
}

} // namespace dhelm
