#include "pnpsteric/branch_algebra.hpp"

#include "pnpsteric/errors.hpp"
#include "pnpsteric/numerics.hpp"

#include <cfloat>
#include <cmath>
#include <limits>
#include <sstream>

namespace pnpsteric {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.69314718055994530942;
// queries this close to a segment endpoint are snapped onto it
constexpr double kEndpointSnap = 1e-12;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// sqrt of the discriminant, or -1 when sigma is genuinely below sigma_z
double root_disc(double sigma, double k) {
    double e = 2.0 * std::exp(-0.5 * k * sigma);
    double s = sigma - e;
    if (s < 0.0) {
        if (s < -8.0 * DBL_EPSILON * std::max(sigma, e)) return -1.0;
        s = 0.0;
    }
    return std::sqrt(s * (sigma + e));
}

double checked_root_disc(double sigma, const TwoSpeciesParams& p) {
    if (!(sigma > 0.0)) throw DomainError("sigma must be positive, got " + fmt(sigma));
    double r = root_disc(sigma, p.k());
    if (r < 0.0)
        throw DomainError("sigma " + fmt(sigma) + " below sigma_z (negative discriminant)");
    return r;
}

double phi_from_root(double sigma, double r, const TwoSpeciesParams& p, Branch b) {
    const double k = p.k();
    if (b == Branch::A)
        return (std::log(0.5 * (sigma + r)) + 0.5 * k * sigma + 0.5 * (p.g - p.z) * r) / p.q;
    // (Sigma - r)/2 = 2 exp(-k Sigma)/(Sigma + r), taken in logs
    return (kLn2 - std::log(sigma + r) - 0.5 * k * sigma + 0.5 * (p.z - p.g) * r) / p.q;
}

double turning(double sigma, const TwoSpeciesParams& p) {
    return (1.0 + p.g * sigma) + (p.g * p.g - p.z * p.z) * std::exp(-p.k() * sigma);
}

// (phi_b(Sigma) - target, dphi_b/dSigma); derivative NaN where the root vanishes
std::pair<double, double> phi_residual(double sigma, const TwoSpeciesParams& p, Branch b,
                                       double target) {
    double r = root_disc(sigma, p.k());
    if (r < 0.0) r = 0.0;
    double phi = phi_from_root(sigma, r, p, b);
    double d = std::numeric_limits<double>::quiet_NaN();
    if (r > 0.0) {
        d = turning(sigma, p) / (p.q * r);
        if (b == Branch::B) d = -d;
    }
    return {phi - target, d};
}

} // namespace

TwoSpeciesParams::TwoSpeciesParams(double g_, double z_, double q_) : g(g_), z(z_), q(q_) {
    if (!std::isfinite(g) || !std::isfinite(z) || !std::isfinite(q))
        throw DomainError("TwoSpeciesParams: non-finite value");
    if (g < 0.0) throw DomainError("TwoSpeciesParams: g must be >= 0, got " + fmt(g));
    if (z < 0.0) throw DomainError("TwoSpeciesParams: z must be >= 0, got " + fmt(z));
    if (q < 1.0) throw DomainError("TwoSpeciesParams: q must be >= 1, got " + fmt(q));
}

Branch branch_of(Segment s) {
    return (s == Segment::A1 || s == Segment::A2) ? Branch::A : Branch::B;
}

std::string to_string(Branch b) { return b == Branch::A ? "A" : "B"; }

std::string to_string(Segment s) {
    switch (s) {
    case Segment::A1: return "A1";
    case Segment::A2: return "A2";
    case Segment::B1: return "B1";
    case Segment::B2: return "B2";
    }
    return "?";
}

double sigma_z(const TwoSpeciesParams& p) {
    const double k = p.k();
    if (k == 0.0) return 2.0;
    // h is increasing with h(2) = k > 0
    auto h = [k](double s) { return std::log(s) - kLn2 + 0.5 * k * s; };
    double lo = 1.0;
    while (h(lo) > 0.0) lo *= 0.5;
    return numerics::bisect(h, lo, 2.0);
}

double discriminant(double sigma, const TwoSpeciesParams& p) {
    double r = checked_root_disc(sigma, p);
    return r * r;
}

ConcentrationPair concentrations(double sigma, const TwoSpeciesParams& p, Branch b) {
    double r = checked_root_disc(sigma, p);
    double big = 0.5 * (sigma + r);
    double small = 2.0 * std::exp(-p.k() * sigma) / (sigma + r);
    if (b == Branch::A) return {big, small};
    return {small, big};
}

double c_diff(double sigma, const TwoSpeciesParams& p, Branch b) {
    double r = checked_root_disc(sigma, p);
    return b == Branch::A ? r : -r;
}

double phi_on_branch(double sigma, const TwoSpeciesParams& p, Branch b) {
    double r = checked_root_disc(sigma, p);
    return phi_from_root(sigma, r, p, b);
}

double dphi_dsigma(double sigma, const TwoSpeciesParams& p, Branch b) {
    double r = checked_root_disc(sigma, p);
    if (r == 0.0)
        throw DomainError("dphi_dsigma is singular at sigma_z (sigma = " + fmt(sigma) + ")");
    double d = turning(sigma, p) / (p.q * r);
    return b == Branch::A ? d : -d;
}

double turning_factor(double sigma, const TwoSpeciesParams& p) { return turning(sigma, p); }

double crossing_function(double g, double z) {
    TwoSpeciesParams p(g, z);
    double s = sigma_z(p);
    return 4.0 * (1.0 + g * s) / (s * s) + g * g - z * z;
}

double g_crit(double g) {
    if (!std::isfinite(g) || g < 0.0) throw DomainError("g_crit: g must be >= 0");
    double lo = std::sqrt(1.0 + g * g);
    auto F = [g](double z) { return crossing_function(g, z); };
    double hi = numerics::grow_bracket_up(F, lo, lo + 1.0);
    return numerics::bisect(F, lo, hi);
}

bool is_supercritical(const TwoSpeciesParams& p) {
    if (p.z <= std::sqrt(1.0 + p.g * p.g)) return false;
    return crossing_function(p.g, p.z) < 0.0;
}

double sigma_c(const TwoSpeciesParams& p) {
    if (!is_supercritical(p))
        throw SubcriticalError("no turning point: z = " + fmt(p.z) + " <= g_c(" + fmt(p.g) + ")");
    const double k = p.k();
    const double lnz2g2 = std::log(p.z * p.z - p.g * p.g);
    auto L = [&](double s) { return std::log1p(p.g * s) + k * s - lnz2g2; };
    return numerics::bisect(L, 0.0, lnz2g2 / k);
}

double phi_Ac(const TwoSpeciesParams& p) { return -phi_on_branch(sigma_c(p), p, Branch::A); }

CriticalSet critical_set(const TwoSpeciesParams& p) {
    CriticalSet cs{sigma_z(p), g_crit(p.g), std::nullopt, std::nullopt};
    if (is_supercritical(p)) {
        double sc = sigma_c(p);
        cs.sigma_c = sc;
        cs.phi_Ac = -phi_on_branch(sc, p, Branch::A);
    }
    return cs;
}

Interval segment_domain(const TwoSpeciesParams& p, Segment s) {
    return BranchCurves(p).segment_domain(s);
}

double inverse_sigma(double phi, const TwoSpeciesParams& p, Segment s) {
    return BranchCurves(p).inverse_sigma(phi, s);
}

double c_diff_on_segment(double phi, const TwoSpeciesParams& p, Segment s) {
    return BranchCurves(p).c_diff_on_segment(phi, s);
}

double dc_diff_dphi_at_sigma(double sigma, const TwoSpeciesParams& p, Branch b) {
    (void)b; // identical on both branches
    checked_root_disc(sigma, p);
    const double k = p.k();
    return p.q * (sigma + 2.0 * k * std::exp(-k * sigma)) / turning(sigma, p);
}

double dc_diff_on_segment(double phi, const TwoSpeciesParams& p, Segment s) {
    return BranchCurves(p).dc_diff_on_segment(phi, s);
}

double unified_sigma(double phi, const TwoSpeciesParams& p) {
    return BranchCurves(p).unified_sigma(phi);
}

// ---------------------------------------------------------------------------

BranchCurves::BranchCurves(const TwoSpeciesParams& p) : p_(p), crit_(critical_set(p)) {}

double BranchCurves::sigma_c() const {
    if (!crit_.sigma_c)
        throw SubcriticalError("no turning point: z = " + fmt(p_.z) + " <= g_c = " +
                               fmt(crit_.g_c));
    return *crit_.sigma_c;
}

double BranchCurves::phi_Ac() const {
    sigma_c();
    return *crit_.phi_Ac;
}

Interval BranchCurves::segment_domain(Segment s) const {
    double a = phi_Ac();
    switch (s) {
    case Segment::A1: return {-a, kInf};
    case Segment::A2: return {-a, 0.0};
    case Segment::B1: return {-kInf, a};
    case Segment::B2: return {0.0, a};
    }
    return {0.0, 0.0};
}

double BranchCurves::inverse_sigma(double phi, Segment s) const {
    const Interval dom = segment_domain(s);
    if (std::isnan(phi)) throw DomainError("inverse_sigma: phi is NaN");
    if (phi < dom.lo) {
        if (dom.lo - phi > kEndpointSnap)
            throw DomainError("inverse_sigma: phi = " + fmt(phi) + " outside " + to_string(s) +
                              " domain");
        phi = dom.lo;
    }
    if (phi > dom.hi) {
        if (phi - dom.hi > kEndpointSnap)
            throw DomainError("inverse_sigma: phi = " + fmt(phi) + " outside " + to_string(s) +
                              " domain");
        phi = dom.hi;
    }

    const double sc = *crit_.sigma_c;
    const double sz = crit_.sigma_z;
    const double a = *crit_.phi_Ac;
    const Branch b = branch_of(s);

    // endpoints are known exactly
    if (std::fabs(phi) >= a - kEndpointSnap && std::fabs(std::fabs(phi) - a) <= kEndpointSnap) {
        bool at_turn = (b == Branch::A) ? phi < 0.0 : phi > 0.0;
        if (at_turn) return sc;
    }
    if ((s == Segment::A2 || s == Segment::B2) && std::fabs(phi) <= kEndpointSnap) return sz;

    auto fdf = [&](double sigma) { return phi_residual(sigma, p_, b, phi); };

    if (s == Segment::A2 || s == Segment::B2) return numerics::safeguarded_newton(fdf, sz, sc);

    auto f = [&](double sigma) { return fdf(sigma).first; };
    double hi = numerics::grow_bracket_up(f, sc, sc + 1.0);
    return numerics::safeguarded_newton(fdf, sc, hi);
}

double BranchCurves::c_diff_on_segment(double phi, Segment s) const {
    double sigma = inverse_sigma(phi, s);
    double r = root_disc(sigma, p_.k());
    if (r < 0.0) r = 0.0;
    return branch_of(s) == Branch::A ? r : -r;
}

double BranchCurves::dc_diff_on_segment(double phi, Segment s) const {
    return dc_diff_dphi_at_sigma(inverse_sigma(phi, s), p_, branch_of(s));
}

double BranchCurves::unified_sigma(double phi) const {
    if (supercritical())
        throw SupercriticalError("unified_sigma requires z < g_c; z = " + fmt(p_.z) +
                                 ", g_c = " + fmt(crit_.g_c));
    if (std::isnan(phi)) throw DomainError("unified_sigma: phi is NaN");
    const double sz = crit_.sigma_z;
    if (phi == 0.0) return sz;
    const Branch b = phi > 0.0 ? Branch::A : Branch::B;
    auto fdf = [&](double sigma) { return phi_residual(sigma, p_, b, phi); };
    auto f = [&](double sigma) { return fdf(sigma).first; };
    double hi = numerics::grow_bracket_up(f, sz, sz + 1.0);
    return numerics::safeguarded_newton(fdf, sz, hi);
}

} // namespace pnpsteric
