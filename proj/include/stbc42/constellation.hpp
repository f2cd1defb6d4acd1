#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "stbc42/errors.hpp"
#include "stbc42/linalg.hpp"

namespace stbc42 {

/// Finite complex signal set, normalized to unit average energy.
struct Constellation {
    std::vector<cdouble> points;
    std::string label;

    std::size_t size() const { return points.size(); }

    double average_energy() const {
        double e = 0.0;
        for (const auto& p : points) e += std::norm(p);
        return e / static_cast<double>(points.size());
    }
};

/// 2x2 rotation J(theta) = [[cos, -sin], [sin, cos]]; acting on the
/// (Re, Im) pair of x it agrees with complex multiplication by e^{j theta}.
struct RotationMatrix {
    double theta = 0.0;

    RealMat matrix() const {
        RealMat j(2, 2);
        j(0, 0) = std::cos(theta);
        j(0, 1) = -std::sin(theta);
        j(1, 0) = std::sin(theta);
        j(1, 1) = std::cos(theta);
        return j;
    }
};

namespace detail {
// Binary-reflected Gray encode of a small index.
inline std::uint32_t gray(std::uint32_t i) { return i ^ (i >> 1); }
}

/// Gray-ordered square M-QAM on the odd-integer grid {+-1, +-3, ...},
/// scaled to unit average energy.  M must be a perfect square with an
/// even side (4, 16, 64, 256).
inline Constellation square_qam(std::size_t m) {
    const auto side = static_cast<std::size_t>(std::lround(std::sqrt(double(m))));
    if (side * side != m || side % 2 != 0 || m < 4 || m > 256)
        throw NotSquareQam("square_qam: M=" + std::to_string(m) +
                           " is not a supported square QAM order");

    // Per-axis mean of {1^2, 3^2, ..., (side-1)^2} over the odd levels.
    double axis_energy = 0.0;
    for (std::size_t k = 0; k < side; ++k) {
        const double amp = 2.0 * double(k) - double(side - 1);
        axis_energy += amp * amp;
    }
    axis_energy /= double(side);
    const double scale = 1.0 / std::sqrt(2.0 * axis_energy);

    Constellation c;
    c.label = std::to_string(m) + "-QAM";
    c.points.reserve(m);
    for (std::size_t iy = 0; iy < side; ++iy)
        for (std::size_t ix = 0; ix < side; ++ix) {
            const double ax = 2.0 * double(detail::gray(std::uint32_t(ix))) - double(side - 1);
            const double ay = 2.0 * double(detail::gray(std::uint32_t(iy))) - double(side - 1);
            c.points.emplace_back(ax * scale, ay * scale);
        }
    return c;
}

/// Every point multiplied by e^{j theta}; energies unchanged.
inline Constellation rotate(const Constellation& c, double theta) {
    Constellation out = c;
    const cdouble rot = std::polar(1.0, theta);
    for (auto& p : out.points) p *= rot;
    return out;
}

/// The rotation angle that makes the coordinate-interleaved design
/// full-diversity over QAM: arctan(2)/2 radians (about 31.7175 degrees).
inline double ciod_angle() { return std::atan(2.0) / 2.0; }

/// True iff all real parts are pairwise distinct and all imaginary parts
/// are pairwise distinct (tolerance 1e-9).  Required of the rotated
/// constellation for the coordinate-interleaved blocks to be full rank.
inline bool coordinate_distinctness(const Constellation& c, double tol = 1e-9) {
    const auto n = c.points.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::abs(c.points[i].real() - c.points[j].real()) <= tol) return false;
            if (std::abs(c.points[i].imag() - c.points[j].imag()) <= tol) return false;
        }
    return true;
}

/// Grid search for the angle maximizing the evaluator; ties broken by the
/// smallest angle.  The result is independent of evaluation order.
inline double angle_sweep(const std::vector<double>& grid,
                          const std::function<double(double)>& evaluator) {
    double best_angle = grid.front();
    double best_gain = evaluator(grid.front());
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double g = evaluator(grid[i]);
        if (g > best_gain || (g == best_gain && grid[i] < best_angle)) {
            best_gain = g;
            best_angle = grid[i];
        }
    }
    return best_angle;
}

/// Inclusive degree grid start:stop:step, in radians.
inline std::vector<double> degree_grid(double start_deg, double stop_deg, double step_deg) {
    std::vector<double> grid;
    const double deg = std::acos(-1.0) / 180.0;
    for (int i = 0;; ++i) {
        const double d = start_deg + i * step_deg;
        if (d > stop_deg + 1e-12) break;
        grid.push_back(d * deg);
    }
    return grid;
}

} // namespace stbc42
