#pragma once

#include <array>

// Published reference results for the 2 x 1 cell with a centered hole of radius 1/4,
// E = 1, plane strain (quadratic 8-node elements, about 30k nodes).
namespace cellhom::reference {

inline constexpr std::array<double, 7> kPoisson{1e-6, 1e-4, 0.1, 0.2, 0.3, 0.4, 0.49};

// Effective stiffness entries, truncated to three decimals. Rows: B1, B4, B2, B6.
inline constexpr std::array<int, 4> kStiffnessEntries{1, 4, 2, 6};
inline constexpr std::array<std::array<double, 7>, 4> kStiffness{{
    {0.756, 0.756, 0.776, 0.835, 0.970, 1.324, 2.716},
    {0.806, 0.806, 0.827, 0.890, 1.034, 1.412, 2.894},
    {0.037, 0.037, 0.107, 0.209, 0.382, 0.775, 2.233},
    {0.309, 0.309, 0.292, 0.279, 0.268, 0.260, 0.255},
}};

// Geometric modulus entries, rounded to five decimals. Rows: D1, D2, D4, D6.
inline constexpr std::array<int, 4> kGeometricEntries{1, 2, 4, 6};
inline constexpr std::array<std::array<double, 7>, 4> kGeometric{{
    {0.33123, 0.33125, 0.33125, 0.33123, 0.33123, 0.33125, 0.33120},
    {0.23466, 0.23466, 0.23466, 0.23466, 0.23466, 0.23464, 0.23468},
    {0.31078, 0.31078, 0.31078, 0.31078, 0.31078, 0.31080, 0.31078},
    {0.30835, 0.30835, 0.30835, 0.30835, 0.30833, 0.30833, 0.30835},
}};

}  // namespace cellhom::reference
