/**
 * @file excess_current.hpp
 * @brief Excess (steric) current along a branch solution: pointwise profile,
 *        integral over [x1, x2] by x-quadrature and by substitution in Sigma,
 *        and the species-sum form used as a cross-check.
 */
#pragma once

#include "pnpsteric/bvp_solver.hpp"

#include <string>
#include <vector>

namespace pnpsteric {

struct DiffusionSet {
    std::vector<double> d;     ///< per-species diffusion constants
    double charge_scale = 1.0; ///< elementary charge prefactor

    void validate(std::size_t species) const;
};

/// Uniform-grid derivative: central inside, second-order one-sided at the ends.
std::vector<double> grid_derivative(const std::vector<double>& x, const std::vector<double>& y);

/**
 * Piecewise quadratic through consecutive node triples (x0,x1,x2), (x2,x3,x4), ...
 * The last lone interval, if any, reuses the final three nodes.
 */
class PiecewiseQuadratic {
public:
    PiecewiseQuadratic(std::vector<double> x, std::vector<double> y);
    double operator()(double t) const;
    /// Exact integral of the interpolant over [a, b] (a <= b).
    double integral(double a, double b) const;

private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::size_t panel_of(double t) const;
    std::size_t center_of(std::size_t panel) const;
};

struct CurrentProfile {
    std::vector<double> x;
    std::vector<double> phi;
    std::vector<double> current;
    /// The end nodes use one-sided derivatives and are less accurate.
    std::size_t first_accurate = 1;
    std::size_t last_accurate = 0;
};

/// Coefficient i(Sigma) with I = q e i(Sigma) dphi/dx for one coupled pair.
double pair_current_density(double sigma, const TwoSpeciesParams& p, Branch b, double d_lo,
                            double d_hi);

/// Integrand in Sigma such that the pair's current integral is q e * integral of it.
double pair_sigma_integrand(double sigma, const TwoSpeciesParams& p, Branch b, double d_lo,
                            double d_hi);

CurrentProfile pointwise_current_three(const BvpSolution& sol, const ThreeSpeciesModel& model,
                                       const DiffusionSet& diff, Branch label);
CurrentProfile pointwise_current_four(const BvpSolution& sol, const FourSpeciesModel& model,
                                      const DiffusionSet& diff, Branch label);

/// x-route integral of a pointwise profile. x1 == x2 gives 0.
double integral_current_x(const CurrentProfile& profile, double x1, double x2);

/// Sigma-route integral; warnings (if given) receive endpoint notices.
double integral_current_sigma_three(const BvpSolution& sol, const ThreeSpeciesModel& model,
                                    const DiffusionSet& diff, Branch label, double x1, double x2,
                                    std::vector<std::string>* warnings = nullptr);

struct FourSpeciesIntegral {
    double sigma_route;
    double x_route;
};

FourSpeciesIntegral integral_current_four(const BvpSolution& sol, const FourSpeciesModel& model,
                                          const DiffusionSet& diff, Branch label, double x1,
                                          double x2, std::vector<std::string>* warnings = nullptr);

struct SpeciesSystem {
    std::vector<double> valences;
    std::vector<std::vector<double>> coupling; ///< symmetric g_ij
};

struct GenericCurrent {
    std::vector<double> total;
    std::vector<std::vector<double>> per_species;
    double max_algebraic_residual = 0.0;
};

/**
 * Species sum  sum_i z_i e D_i (c_i' + z_i c_i phi'), evaluated as
 * z_i e D_i c_i (ln c_i + z_i phi)' so that Boltzmann species cancel exactly.
 * Throws ConsistencyError if ln c_i + z_i phi + sum_j g_ij c_j exceeds tol anywhere.
 */
GenericCurrent generic_current(const std::vector<double>& x, const std::vector<double>& phi,
                               const std::vector<std::vector<double>>& conc,
                               const SpeciesSystem& sys, const DiffusionSet& diff,
                               double tol = 1e-8);

SpeciesSystem three_species_system(const ThreeSpeciesConfig& cfg);
SpeciesSystem four_species_system(const FourSpeciesConfig& cfg);

struct CurrentReport {
    CurrentProfile pointwise;
    double integral_x = 0.0;
    double integral_sigma = 0.0;
    Branch label = Branch::A;
    double x1 = 0.0;
    double x2 = 0.0;
    std::vector<std::string> warnings;
};

CurrentReport current_report(const BvpSolution& sol, const ThreeSpeciesModel& model,
                             const DiffusionSet& diff, Branch label, double x1, double x2);
CurrentReport current_report(const BvpSolution& sol, const FourSpeciesModel& model,
                             const DiffusionSet& diff, Branch label, double x1, double x2);

} // namespace pnpsteric
