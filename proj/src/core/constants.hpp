#ifndef NEURODIFFUSE_CORE_CONSTANTS_HPP
#define NEURODIFFUSE_CORE_CONSTANTS_HPP

namespace neurodiffuse {

// SI base units throughout: K, C, mol, m, s, J, V, Pa.
struct PhysicalConstants {
    double temperature = 310.0;        // K
    double faraday = 96485.0;          // C/mol
    double gas_constant = 8.3144598;   // J/(K mol)

    double rt() const { return gas_constant * temperature; }
    // Thermal voltage R*T/F (V).
    double psi() const { return gas_constant * temperature / faraday; }
};

} // namespace neurodiffuse

#endif
