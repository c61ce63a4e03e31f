/**
 * @file branch_algebra.hpp
 * @brief Two-species steric algebraic system: branches, critical constants and
 *        inverse maps from potential back to total concentration.
 *
 * Total concentration is Sigma = c1 + c2. The product satisfies
 * c1 c2 = exp(-(g+z) Sigma), which leaves two branches A (c1 > c2) and
 * B (c1 < c2) joined at Sigma_z.
 */
#pragma once

#include <optional>
#include <string>

namespace pnpsteric {

struct TwoSpeciesParams {
    double g = 0.0; ///< self-steric coupling
    double z = 0.0; ///< cross-steric coupling
    double q = 1.0; ///< valence magnitude

    TwoSpeciesParams() = default;
    /// Throws DomainError unless g >= 0, z >= 0, q >= 1 (all finite).
    TwoSpeciesParams(double g_, double z_, double q_ = 1.0);

    double k() const { return g + z; }
};

enum class Branch { A, B };
enum class Segment { A1, A2, B1, B2 };

Branch branch_of(Segment s);
std::string to_string(Branch b);
std::string to_string(Segment s);

/// Closed interval; infinite ends are represented by +-infinity.
struct Interval {
    double lo;
    double hi;
    bool contains(double x) const { return x >= lo && x <= hi; }
};

struct ConcentrationPair {
    double c1;
    double c2;
};

struct CriticalSet {
    double sigma_z;
    double g_c;
    std::optional<double> sigma_c;
    std::optional<double> phi_Ac;
};

double sigma_z(const TwoSpeciesParams& p);

/// Sigma^2 - 4 exp(-k Sigma) evaluated in factored form. Throws DomainError below sigma_z.
double discriminant(double sigma, const TwoSpeciesParams& p);

ConcentrationPair concentrations(double sigma, const TwoSpeciesParams& p, Branch b);
double c_diff(double sigma, const TwoSpeciesParams& p, Branch b);
double phi_on_branch(double sigma, const TwoSpeciesParams& p, Branch b);
double dphi_dsigma(double sigma, const TwoSpeciesParams& p, Branch b);

/// (1 + g Sigma) + (g^2 - z^2) exp(-k Sigma): same sign as f_z(Sigma), never overflows.
double turning_factor(double sigma, const TwoSpeciesParams& p);

/// 4(1 + g s)/s^2 + g^2 - z^2 with s = sigma_z(g, z).
double crossing_function(double g, double z);

double g_crit(double g);
bool is_supercritical(const TwoSpeciesParams& p);

double sigma_c(const TwoSpeciesParams& p);
double phi_Ac(const TwoSpeciesParams& p);
CriticalSet critical_set(const TwoSpeciesParams& p);

Interval segment_domain(const TwoSpeciesParams& p, Segment s);

double inverse_sigma(double phi, const TwoSpeciesParams& p, Segment s);

/// c1 - c2 along the A1 or B1 segment.
double c_diff_on_segment(double phi, const TwoSpeciesParams& p, Segment s);

/// d/dphi of (c1 - c2) along a segment, written in terms of Sigma on branch b.
double dc_diff_dphi_at_sigma(double sigma, const TwoSpeciesParams& p, Branch b);

/// d/dphi of c_diff_on_segment.
double dc_diff_on_segment(double phi, const TwoSpeciesParams& p, Segment s);

/// Single-valued inverse for the subcritical case 0 <= z < g_c.
double unified_sigma(double phi, const TwoSpeciesParams& p);

/**
 * Parameter triple with its critical constants computed once. The free
 * functions above rebuild this on every call; repeated evaluations (rhs
 * assembly, currents) should hold one of these instead.
 */
class BranchCurves {
public:
    explicit BranchCurves(const TwoSpeciesParams& p);

    const TwoSpeciesParams& params() const { return p_; }
    const CriticalSet& critical() const { return crit_; }
    bool supercritical() const { return crit_.sigma_c.has_value(); }

    /// Throws SubcriticalError when z <= g_c.
    double sigma_c() const;
    double phi_Ac() const;

    Interval segment_domain(Segment s) const;
    double inverse_sigma(double phi, Segment s) const;
    double c_diff_on_segment(double phi, Segment s) const;
    double dc_diff_on_segment(double phi, Segment s) const;
    double unified_sigma(double phi) const;

private:
    TwoSpeciesParams p_;
    CriticalSet crit_;
};

} // namespace pnpsteric
