// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace qpm::constants {

inline constexpr double hartree_eV = 27.211386245988;
inline constexpr double angstrom_bohr = 1.8897259886;
inline constexpr double speed_of_light = 137.035999;
inline constexpr double pi = 3.14159265358979323846;

inline constexpr double eV_to_hartree(double e) { return e / hartree_eV; }
inline constexpr double hartree_to_eV(double e) { return e * hartree_eV; }

}  // namespace qpm::constants
