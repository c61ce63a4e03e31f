/**
 * @file bvp_solver.hpp
 * @brief eps phi'' = f(phi) on (-1, 1) with Robin ends
 *        phi(-1) - eta phi'(-1) = phi0_left, phi(1) + eta phi'(1) = phi0_right.
 */
#pragma once

#include "pnpsteric/rhs_assembly.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pnpsteric {

struct RobinBC {
    double phi0_left = 0.0;
    double phi0_right = 0.0;
    double eta = 0.0; ///< 0 gives Dirichlet data
};

enum class Profile { InteriorMin, InteriorMax, Increasing, Decreasing, Constant };

std::string to_string(Profile p);

struct BvpProblem {
    double epsilon;
    RhsFunction rhs;
    RobinBC bc;
    std::optional<std::size_t> n_nodes; ///< layer rule when empty
};

struct SolveOptions {
    /// Constant starting profile; defaults to the rhs root, else the mean boundary datum.
    std::optional<double> initial_constant;
    /// Full starting profile (must match the node count).
    std::optional<std::vector<double>> initial_guess;
    /// Below this epsilon the solve walks down from a larger epsilon by halving.
    double continuation_threshold = 1e-4;
    int max_iterations = 200;
};

struct BvpSolution {
    std::vector<double> nodes;
    std::vector<double> values;
    double residual_norm = 0.0;
    double tolerance = 0.0;
    int iterations = 0;
    std::optional<Profile> classification;
    double epsilon = 0.0;
    RobinBC bc;

    double h() const { return nodes[1] - nodes[0]; }
};

/// Minimum of fprime sampled on [lo, hi] (endpoints included).
double min_derivative(const std::function<double(double)>& fprime, double lo, double hi,
                      int samples = 401);

/// Node count resolving a layer of width sqrt(eps/alpha0) with about 20 nodes.
std::size_t default_node_count(double epsilon, double alpha0);

/// Discrete residual of the scheme at a given profile (boundary rows first and last).
std::vector<double> discrete_residual(double epsilon, const RhsFunction& rhs, const RobinBC& bc,
                                      const std::vector<double>& values);

BvpSolution solve(const BvpProblem& problem, const SolveOptions& opts = {});

/// Shape of a profile relative to its root; see Profile.
Profile classify_solution(const BvpSolution& sol, double c, double slack = 1e-8);

struct EnvelopeReport {
    bool satisfied = true;
    double worst_margin = 0.0; ///< min over nodes of envelope - (phi - c)^2
    std::size_t worst_index = 0;
    double alpha0 = 0.0;
    double amplitude = 0.0;
};

EnvelopeReport envelope_check(const BvpSolution& sol, const RhsFunction& rhs, double c,
                              double slack = 1e-10);

/// Limits of phi(-1), phi(+1) as eps -> 0 with eps/(2 eta^2) -> gamma.
std::pair<double, double> boundary_layer_limits(const RhsFunction& rhs, double c,
                                                const RobinBC& bc, double gamma);

struct EigenReport {
    double lambda;
    double mu0;
};

/// Smallest eigenvalue of -eps v'' + f'(phi) v with homogeneous Robin ends.
EigenReport linearized_smallest_eigenvalue(const BvpSolution& sol,
                                           const std::function<double(double)>& fprime);

struct GrowthReport {
    std::vector<double> epsilons;
    std::vector<double> sup_norms;
    std::vector<double> growth_factors; ///< sup_norms[i+1] / sup_norms[i]
    bool growth_confirmed = false;      ///< last factor >= 1.5 (for halving steps)
};

/// Solves with a rootless rhs over a list of decreasing epsilons.
GrowthReport unbounded_growth_probe(const RhsFunction& rhs, const std::vector<double>& epsilons,
                                    const RobinBC& bc = {});

} // namespace pnpsteric
