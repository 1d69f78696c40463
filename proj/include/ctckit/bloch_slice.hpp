#pragma once

// Membership of qubit states in Q_U(rho) over a square grid on a plane through
// the centre of the Bloch ball.

#include <ostream>
#include <string>
#include <vector>

#include "ctckit/deutsch_map.hpp"

namespace ctckit {

enum class BlochPlane { XZ, XY, YZ };

inline std::string to_string(BlochPlane p) {
    switch (p) {
        case BlochPlane::XZ: return "xz";
        case BlochPlane::XY: return "xy";
        case BlochPlane::YZ: return "yz";
    }
    return "?";
}

inline BlochPlane parse_bloch_plane(const std::string& s) {
    if (s == "xz") return BlochPlane::XZ;
    if (s == "xy") return BlochPlane::XY;
    if (s == "yz") return BlochPlane::YZ;
    throw ParseError("unknown Bloch plane '" + s + "' (expected xz, xy or yz)");
}

// Axis names of the two in-plane coordinates.
inline std::pair<std::string, std::string> plane_axes(BlochPlane p) {
    const std::string s = to_string(p);
    return {s.substr(0, 1), s.substr(1, 1)};
}

struct BlochSliceRow {
    Index i = 0, j = 0;  // grid indices
    double a = 0.0, b = 0.0;
    bool member = false;
    double entropy = 0.0;
};

struct BlochSlice {
    BlochPlane plane = BlochPlane::XZ;
    Index resolution = 0;
    double step = 0.0;  // grid spacing
    std::vector<BlochSliceRow> rows;
};

// Grid coordinate i of n: (2i - (n - 1)) / (n - 1), so the grid spans [-1, 1]
// and, for odd n, contains the axes exactly. Cells outside the unit disc are
// omitted.
inline BlochSlice bloch_slice(const UnitaryGate& u, const DensityOperator& rho, BlochPlane plane = BlochPlane::XZ,
                              Index resolution = 201, const FixedPointOptions& fopt = {}) {
    if (u.dim2() != 2) throw DimensionError("bloch-slice needs a qubit time traveller (dim2 = 2)");
    if (resolution < 2) throw InvalidStateError("bloch-slice resolution must be at least 2");
    const FixedPointSet fps = fixed_point_set(u, rho, fopt);
    BlochSlice s{plane, resolution, 2.0 / static_cast<double>(resolution - 1), {}};
    const double den = static_cast<double>(resolution - 1);
    for (Index i = 0; i < resolution; ++i) {
        const double a = static_cast<double>(2 * i - (resolution - 1)) / den;
        for (Index j = 0; j < resolution; ++j) {
            const double b = static_cast<double>(2 * j - (resolution - 1)) / den;
            if (a * a + b * b > 1.0 + tol::kBloch) continue;
            BlochVector v{};
            switch (plane) {
                case BlochPlane::XZ: v = {a, 0.0, b}; break;
                case BlochPlane::XY: v = {a, b, 0.0}; break;
                case BlochPlane::YZ: v = {0.0, a, b}; break;
            }
            const double n = v.norm();
            if (n > 1.0) v = {v.x / n, v.y / n, v.z / n};
            const DensityOperator sigma = from_bloch(v);
            s.rows.push_back({i, j, a, b, membership(fps, sigma).member, von_neumann_entropy(sigma)});
        }
    }
    return s;
}

inline void write_csv(const BlochSlice& s, std::ostream& os) {
    const auto [ax, bx] = plane_axes(s.plane);
    os << ax << ',' << bx << ",member,entropy\n";
    const auto old = os.precision(17);
    for (const auto& r : s.rows) os << r.a << ',' << r.b << ',' << (r.member ? 1 : 0) << ',' << r.entropy << '\n';
    os.precision(old);
}

}  // namespace ctckit
