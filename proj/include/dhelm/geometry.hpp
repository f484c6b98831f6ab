#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

namespace dhelm {

struct InvalidOverlapError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Overlap so large that non-neighboring strips would intersect.
struct TripleOverlapError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Uniform strip decomposition of (0,1) along x: N subdomains of equal width
/// H + L with pitch H = (1 - L)/N, so that a_j = (j-1) H, b_j = j H + L and
/// consecutive strips share a band of width exactly L.
struct Decomposition {
    int n_subdomains;
    double overlap;             // L
    double nonoverlap_pitch;    // H = (1 - L)/N
    std::vector<std::pair<double, double>> intervals; // (a_j, b_j), j = 1..N

    double a(int j) const { return intervals[static_cast<std::size_t>(j - 1)].first; }
    double b(int j) const { return intervals[static_cast<std::size_t>(j - 1)].second; }
};

/// Builds the decomposition. Requires N >= 2, 0 <= L < 1, and L < (1-L)/N
/// for N >= 3 so that only neighbors overlap.
Decomposition build_decomposition(int n_subdomains, double overlap);

} // namespace dhelm
