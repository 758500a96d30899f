#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "pnp/errors.hpp"

namespace pnp {

/// One ion species in physical units.
struct IonSpecies {
    double valence = 1.0;                       ///< z_i
    double diffusion = 1.0e9;                   ///< D_i in Å²/s
    double initial_concentration = 1.2044e-3;   ///< ions/Å³
};

/// Physical inputs in the Å / s / V / K unit system. Defaults correspond to a
/// potassium channel filled with a 2 molar binary electrolyte at room
/// temperature.
struct PhysicalParameters {
    double e = 1.602176634e-19;      ///< unit charge, C
    double kB = 1.380649e-23;        ///< Boltzmann constant, J/K
    double T = 298.0;                ///< absolute temperature, K
    double eps0 = 8.854187817e-12;   ///< vacuum permittivity, F/m
    double eps_r = 78.5;             ///< relative permittivity (water)
    double eps_t = 6.950537436e-20;  ///< characteristic permittivity, F/Å
    double L = 60.0;                 ///< half channel length, Å
    double c0 = 1.2044e-3;           ///< average initial concentration, ions/Å³
    double D0 = 1.0e9;               ///< reference diffusion coefficient, Å²/s
    double phi0 = 0.08;              ///< characteristic potential, V
    double eta = 2.78e-3;            ///< Robin length, Å
    double phi_minus = 0.08;         ///< far-field potential at x = -L, V
    double phi_plus = -0.08;         ///< far-field potential at x = +L, V
    std::vector<IonSpecies> species;
    /// Permanent charge density in C/Å³ over x in [-L, L]; empty means zero.
    std::function<double(double)> rho0;
};

/// Dimensionless parameter set consumed by the discretization. The permittivity
/// and fixed-charge entries are profiles over x' in [-1, 1] so spatially varying
/// coefficients stay representable; empty functions mean the constants 1 and 0.
struct DimensionlessParameters {
    double chi1 = 3.1;        ///< e phi0 / (kB T)
    double chi2 = 125.4;      ///< e c0 L² / (phi0 eps_t)
    double eta_prime = 4.63e-5;
    double phi_minus = 1.0;
    double phi_plus = -1.0;
    std::function<double(double)> eps_prime;
    std::function<double(double)> rho0_prime;
    std::vector<double> z;        ///< valence per species
    std::vector<double> d_prime;  ///< D_i / D0 per species
    std::vector<double> c_init;   ///< initial concentration per species
    std::vector<double> c_ref;    ///< reference concentration per species

    std::size_t n_species() const { return z.size(); }
    double eps_at(double x) const { return eps_prime ? eps_prime(x) : 1.0; }
    double rho0_at(double x) const { return rho0_prime ? rho0_prime(x) : 0.0; }

    /// Two species of opposite unit valence, unit diffusivity and unit initial
    /// concentration. Covers every parameter set used by the studies.
    static DimensionlessParameters binary_symmetric(double chi1, double chi2, double eta_prime,
                                                    double phi_minus, double phi_plus) {
        DimensionlessParameters p;
        p.chi1 = chi1;
        p.chi2 = chi2;
        p.eta_prime = eta_prime;
        p.phi_minus = phi_minus;
        p.phi_plus = phi_plus;
        p.z = {1.0, -1.0};
        p.d_prime = {1.0, 1.0};
        p.c_init = {1.0, 1.0};
        p.c_ref = {1.0, 1.0};
        return p;
    }

    void validate() const {
        auto require = [](bool ok, const std::string& what) {
            if (!ok) throw ConfigError("invalid parameters: " + what);
        };
        require(chi1 > 0.0, "chi1 must be positive");
        require(chi2 > 0.0, "chi2 must be positive");
        require(eta_prime > 0.0, "etaPrime must be positive");
        require(!z.empty(), "species list is empty");
        require(d_prime.size() == z.size() && c_init.size() == z.size() && c_ref.size() == z.size(),
                "per-species arrays have mismatched lengths");
        for (std::size_t i = 0; i < z.size(); ++i) {
            require(d_prime[i] > 0.0, "dPrime." + std::to_string(i + 1) + " must be positive");
            require(c_init[i] > 0.0, "cInit." + std::to_string(i + 1) + " must be positive");
            require(c_ref[i] > 0.0, "cRef." + std::to_string(i + 1) + " must be positive");
        }
        for (double x : {-1.0, 0.0, 1.0})
            require(eps_at(x) > 0.0, "epsPrime must be positive on [-1, 1]");
    }
};

/// Builds the dimensionless groups from physical inputs. The permittivity is
/// converted from F/m to F/Å (factor 1e-10) before dividing by eps_t, and the
/// reference concentrations default to the scaled initial concentrations.
inline DimensionlessParameters nondimensionalize(const PhysicalParameters& p) {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0))
            throw ConfigError(std::string("invalid parameters: ") + name + " must be positive");
    };
    positive(p.T, "T");
    positive(p.phi0, "phi0");
    positive(p.eps_t, "epst");
    positive(p.L, "L");
    positive(p.D0, "D0");
    positive(p.c0, "c0");
    positive(p.eta, "eta");
    positive(p.e, "e");
    positive(p.kB, "kB");
    if (p.species.empty()) throw ConfigError("invalid parameters: species list is empty");

    DimensionlessParameters d;
    d.chi1 = p.e * p.phi0 / (p.kB * p.T);
    d.chi2 = p.e * p.c0 * p.L * p.L / (p.phi0 * p.eps_t);
    d.eta_prime = p.eta / p.L;
    d.phi_minus = p.phi_minus / p.phi0;
    d.phi_plus = p.phi_plus / p.phi0;

    const double eps_const = p.eps_r * p.eps0 * 1e-10 / p.eps_t;
    d.eps_prime = [eps_const](double) { return eps_const; };
    if (p.rho0) {
        const double scale = p.L * p.L / (p.phi0 * p.eps_t);
        const double half_length = p.L;
        auto rho0 = p.rho0;
        d.rho0_prime = [rho0, scale, half_length](double x) { return rho0(x * half_length) * scale; };
    }

    d.z.reserve(p.species.size());
    for (std::size_t i = 0; i < p.species.size(); ++i) {
        const IonSpecies& s = p.species[i];
        positive(s.diffusion, "D");
        positive(s.initial_concentration, "cInit");
        d.z.push_back(s.valence);
        d.d_prime.push_back(s.diffusion / p.D0);
        d.c_init.push_back(s.initial_concentration / p.c0);
        d.c_ref.push_back(s.initial_concentration / p.c0);
    }
    d.validate();
    return d;
}

}  // namespace pnp
