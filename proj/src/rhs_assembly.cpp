#include "pnpsteric/rhs_assembly.hpp"

#include "pnpsteric/errors.hpp"
#include "pnpsteric/numerics.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace pnpsteric {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::optional<double> locate_root(const RhsFunction::Evaluator& ev, const Interval& dom,
                                  const std::string& what) {
    double flo = ev(dom.lo).f;
    double fhi = ev(dom.hi).f;
    if (!(flo < 0.0 && fhi > 0.0))
        throw NoIntersectionError(what + ": no sign change on [" + fmt(dom.lo) + ", " +
                                  fmt(dom.hi) + "] (f = " + fmt(flo) + ", " + fmt(fhi) + ")");
    return numerics::bisect([&](double phi) { return ev(phi).f; }, dom.lo, dom.hi);
}

// far end of an unbounded segment: phi at Sigma_c + span
double truncation_phi(const BranchCurves& bc, Branch b) {
    const auto& p = bc.params();
    double sigma = bc.sigma_c() + kSigmaSpanScale / p.k();
    return phi_on_branch(sigma, p, b);
}

} // namespace

RhsFunction::RhsFunction(Evaluator ev, Interval domain, std::optional<double> root,
                         std::optional<Branch> label)
    : ev_(std::move(ev)), domain_(domain), root_(root), label_(label) {
    if (!(domain_.lo < domain_.hi)) throw EmptyDomainError("RhsFunction: empty domain");
}

RhsFunction RhsFunction::from(std::function<double(double)> f, std::function<double(double)> df,
                              Interval domain, std::optional<double> root) {
    return RhsFunction([f = std::move(f), df = std::move(df)](double x) {
        return RhsValue{f(x), df(x)};
    }, domain, root);
}

double third_species_concentration(double phi, double z3) { return std::exp(-z3 * phi); }

// ---------------------------------------------------------------------------

ThreeSpeciesModel::ThreeSpeciesModel(const ThreeSpeciesConfig& cfg)
    : cfg_(cfg), curves_(std::make_shared<const BranchCurves>(cfg.pair)) {
    if (!std::isfinite(cfg.z3) || cfg.z3 <= 0.0)
        throw DomainError("three-species: z3 must be > 0, got " + fmt(cfg.z3));
    if (!std::isfinite(cfg.rho0)) throw DomainError("three-species: rho0 must be finite");
    curves_->sigma_c(); // SubcriticalError if z <= g_c
}

Interval ThreeSpeciesModel::domain(Branch label) const {
    const double a = curves_->phi_Ac();
    if (label == Branch::A) return {-a, truncation_phi(*curves_, Branch::A)};
    return {truncation_phi(*curves_, Branch::B), a};
}

RhsFunction ThreeSpeciesModel::assemble(Branch label) const {
    auto curves = curves_;
    const double q = cfg_.pair.q;
    const double z3 = cfg_.z3;
    const double rho0 = cfg_.rho0;
    const Segment seg = primary_segment(label);
    RhsFunction::Evaluator ev = [curves, q, z3, rho0, seg](double phi) {
        double sigma = curves->inverse_sigma(phi, seg);
        const auto& p = curves->params();
        double cd = c_diff(sigma, p, branch_of(seg));
        double e3 = std::exp(-z3 * phi);
        double dcd = dc_diff_dphi_at_sigma(sigma, p, branch_of(seg));
        return RhsValue{q * cd - z3 * e3 + rho0, q * dcd + z3 * z3 * e3};
    };
    Interval dom = domain(label);
    auto root = locate_root(ev, dom, "three-species f_" + to_string(label));
    return RhsFunction(ev, dom, root, label);
}

std::array<double, 3> ThreeSpeciesModel::concentrations(double phi, Branch label) const {
    const Segment seg = primary_segment(label);
    double sigma = curves_->inverse_sigma(phi, seg);
    auto c = pnpsteric::concentrations(sigma, cfg_.pair, branch_of(seg));
    return {c.c1, c.c2, third_species_concentration(phi, cfg_.z3)};
}

// ---------------------------------------------------------------------------

FourSpeciesModel::FourSpeciesModel(const FourSpeciesConfig& cfg)
    : cfg_(cfg),
      c12_(std::make_shared<const BranchCurves>(cfg.pair12)),
      c34_(std::make_shared<const BranchCurves>(cfg.pair34)) {
    if (!std::isfinite(cfg.rho0)) throw DomainError("four-species: rho0 must be finite");
    c12_->sigma_c();
    c34_->sigma_c();
}

Interval FourSpeciesModel::domain(Branch label) const {
    Interval a = c12_->segment_domain(primary_segment(label));
    Interval b = c34_->segment_domain(partner_segment(label));
    Interval out{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
    if (!(out.lo < out.hi))
        throw EmptyDomainError("four-species f_" + to_string(label) +
                               ": segment domains do not overlap");
    return out;
}

RhsFunction FourSpeciesModel::assemble(Branch label) const {
    auto c12 = c12_;
    auto c34 = c34_;
    const double q1 = cfg_.pair12.q;
    const double q2 = cfg_.pair34.q;
    const double rho0 = cfg_.rho0;
    const Segment s12 = primary_segment(label);
    const Segment s34 = partner_segment(label);
    RhsFunction::Evaluator ev = [=](double phi) {
        double sa = c12->inverse_sigma(phi, s12);
        double sb = c34->inverse_sigma(phi, s34);
        const auto& pa = c12->params();
        const auto& pb = c34->params();
        double f = q1 * c_diff(sa, pa, branch_of(s12)) + q2 * c_diff(sb, pb, branch_of(s34)) - rho0;
        double df = q1 * dc_diff_dphi_at_sigma(sa, pa, branch_of(s12)) +
                    q2 * dc_diff_dphi_at_sigma(sb, pb, branch_of(s34));
        return RhsValue{f, df};
    };
    Interval dom = domain(label);
    auto root = locate_root(ev, dom, "four-species f_" + to_string(label));
    return RhsFunction(ev, dom, root, label);
}

std::array<double, 4> FourSpeciesModel::concentrations(double phi, Branch label) const {
    const Segment s12 = primary_segment(label);
    const Segment s34 = partner_segment(label);
    auto a = pnpsteric::concentrations(c12_->inverse_sigma(phi, s12), cfg_.pair12, branch_of(s12));
    auto b = pnpsteric::concentrations(c34_->inverse_sigma(phi, s34), cfg_.pair34, branch_of(s34));
    return {a.c1, a.c2, b.c1, b.c2};
}

RhsFunction assemble_three_species(const ThreeSpeciesConfig& cfg, Branch label) {
    return ThreeSpeciesModel(cfg).assemble(label);
}

RhsFunction assemble_four_species(const FourSpeciesConfig& cfg, Branch label) {
    return FourSpeciesModel(cfg).assemble(label);
}

} // namespace pnpsteric
