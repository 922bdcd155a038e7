#pragma once

#include <limits>
#include <vector>

#include "cusplab/geometry.hpp"

namespace cusplab {

/// Target node spacing used by remeshing:
/// min(h_max, max(h_min, grading·|x|), curvature/κ), the |x| term only for corner contours.
struct MeshSpec {
    bool enabled = false;
    double h_min = 0.0;
    double h_max = std::numeric_limits<double>::infinity();
    double grading = 0.15;
    double curvature = 0.1;
};

/// Closed counterclockwise polygon. When corner_at_origin is set, node 0 is the corner.
struct Contour {
    std::vector<Vec2> nodes;
    bool corner_at_origin = false;
    MeshSpec mesh;
};

enum class Symmetry {
    none,
    /// Two contours; contour 1 is the π-rotation of contour 0, node for node.
    half_turn_pair,
};

/// Vorticity 1 inside the union of the contours, 0 outside.
struct PatchState {
    double t = 0.0;
    std::vector<Contour> contours;
    Symmetry symmetry = Symmetry::none;

    std::size_t node_count() const {
        std::size_t n = 0;
        for (const auto& c : contours) n += c.nodes.size();
        return n;
    }
};

} // namespace cusplab
