/**
 * @file rhs_assembly.hpp
 * @brief Right-hand sides f_A, f_B of the reduced Poisson equation for the
 *        three- and four-species configurations.
 */
#pragma once

#include "pnpsteric/branch_algebra.hpp"

#include <array>
#include <functional>
#include <memory>
#include <optional>

namespace pnpsteric {

struct RhsValue {
    double f;
    double df;
};

/// Scalar monotone map phi -> f(phi) on an interval, with optional known root.
class RhsFunction {
public:
    using Evaluator = std::function<RhsValue(double)>;

    RhsFunction(Evaluator ev, Interval domain, std::optional<double> root = std::nullopt,
                std::optional<Branch> label = std::nullopt);

    /// Convenience constructor from separate value and derivative maps.
    static RhsFunction from(std::function<double(double)> f, std::function<double(double)> df,
                            Interval domain, std::optional<double> root = std::nullopt);

    double operator()(double phi) const { return ev_(phi).f; }
    double derivative(double phi) const { return ev_(phi).df; }
    RhsValue evaluate(double phi) const { return ev_(phi); }

    const Interval& domain() const { return domain_; }
    std::optional<double> root() const { return root_; }
    std::optional<Branch> label() const { return label_; }

private:
    Evaluator ev_;
    Interval domain_;
    std::optional<double> root_;
    std::optional<Branch> label_;
};

double third_species_concentration(double phi, double z3);

/// Span of Sigma beyond Sigma_c kept on the unbounded segments, in units of 1/(g+z).
inline constexpr double kSigmaSpanScale = 50.0;

struct ThreeSpeciesConfig {
    TwoSpeciesParams pair;
    double z3 = 1.0;
    double rho0 = 0.0;
};

struct FourSpeciesConfig {
    TwoSpeciesParams pair12;
    TwoSpeciesParams pair34;
    double rho0 = 0.0;
};

/// Segment of pair 1-2 used by each branch label.
inline Segment primary_segment(Branch label) {
    return label == Branch::A ? Segment::A1 : Segment::B1;
}

/// Segment of pair 3-4 paired with each label: M1 (B-type) for A, N1 (A-type) for B.
inline Segment partner_segment(Branch label) {
    return label == Branch::A ? Segment::B1 : Segment::A1;
}

class ThreeSpeciesModel {
public:
    explicit ThreeSpeciesModel(const ThreeSpeciesConfig& cfg);

    const ThreeSpeciesConfig& config() const { return cfg_; }
    const BranchCurves& curves() const { return *curves_; }

    Interval domain(Branch label) const;
    RhsFunction assemble(Branch label) const;
    /// (c1, c2, c3) at potential phi on the given branch.
    std::array<double, 3> concentrations(double phi, Branch label) const;

private:
    ThreeSpeciesConfig cfg_;
    std::shared_ptr<const BranchCurves> curves_;
};

class FourSpeciesModel {
public:
    explicit FourSpeciesModel(const FourSpeciesConfig& cfg);

    const FourSpeciesConfig& config() const { return cfg_; }
    const BranchCurves& curves12() const { return *c12_; }
    const BranchCurves& curves34() const { return *c34_; }

    /// Throws EmptyDomainError if the two segment domains do not overlap.
    Interval domain(Branch label) const;
    RhsFunction assemble(Branch label) const;
    std::array<double, 4> concentrations(double phi, Branch label) const;

private:
    FourSpeciesConfig cfg_;
    std::shared_ptr<const BranchCurves> c12_;
    std::shared_ptr<const BranchCurves> c34_;
};

RhsFunction assemble_three_species(const ThreeSpeciesConfig& cfg, Branch label);
RhsFunction assemble_four_species(const FourSpeciesConfig& cfg, Branch label);

} // namespace pnpsteric
