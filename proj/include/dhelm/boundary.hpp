#pragma once

#include <stdexcept>
#include <string>

namespace dhelm {

/// Condition imposed on one edge of the unit square.
enum class EdgeCondition {
    Dirichlet, ///< u = 0 (sound-soft wall)
    Impedance, ///< du/dn + sqrt(eta) u = g (outgoing radiation)
};

/// Boundary setup for the global problem. The Schwarz splitting happens in x,
/// so the x = 0 / x = 1 edges are the "outer" ends of the strip chain and the
/// y edges are shared by every subdomain.
struct BoundaryConfig {
    EdgeCondition left_x = EdgeCondition::Impedance;
    EdgeCondition right_x = EdgeCondition::Impedance;
    EdgeCondition bottom_y = EdgeCondition::Dirichlet;
    EdgeCondition top_y = EdgeCondition::Dirichlet;

    /// Radiation on the x ends, walls on the y sides.
    static BoundaryConfig waveguide() { return {}; }

    /// Walls all around.
    static BoundaryConfig cavity() {
        return {EdgeCondition::Dirichlet, EdgeCondition::Dirichlet, EdgeCondition::Dirichlet,
              EdgeCondition::Dirichlet};
    }

    /// Radiation all around.
    static BoundaryConfig free_space() {
        return {EdgeCondition::Impedance, EdgeCondition::Impedance, EdgeCondition::Impedance,
              EdgeCondition::Impedance};
    }

    /// Whether the y sides are Dirichlet walls, which is what makes a discrete
    /// sine expansion in y exact. The mode analysis requires this.
    bool lateral_dirichlet() const {
        return bottom_y == EdgeCondition::Dirichlet && top_y == EdgeCondition::Dirichlet;
    }

    std::string name() const {
        if (left_x == EdgeCondition::Impedance && right_x == EdgeCondition::Impedance &&
            lateral_dirichlet())
            return "waveguide";
        if (left_x == EdgeCondition::Dirichlet && right_x == EdgeCondition::Dirichlet &&
            lateral_dirichlet())
            return "cavity";
        if (left_x == EdgeCondition::Impedance && right_x == EdgeCondition::Impedance &&
            bottom_y == EdgeCondition::Impedance && top_y == EdgeCondition::Impedance)
            return "free-space";
        return "custom";
    }

    static BoundaryConfig from_name(const std::string& name) {
        if (name == "waveguide") return waveguide();
        if (name == "cavity") return cavity();
        if (name == "free-space" || name == "free_space") return free_space();
        throw std::invalid_argument("unknown boundary config: " + name);
    }
};

} // namespace dhelm
