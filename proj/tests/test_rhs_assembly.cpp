#include "oracles.hpp"
#include "pnpsteric/errors.hpp"
#include "pnpsteric/rhs_assembly.hpp"

#include <doctest.h>

#include <cmath>

using namespace pnpsteric;
using oracle::quad;

namespace {

// Sigma on the unbounded segment of branch A or B, bisected in quad
quad sigma_outer(quad phi, quad g, quad z, quad q, bool a) {
    quad sc = oracle::sigma_c(g, z);
    auto h = [&](quad s) {
        return a ? oracle::phi_A(s, g, z, q) - phi : phi - oracle::phi_B(s, g, z, q);
    };
    quad hi = sc + 1;
    while (h(hi) < 0) hi = sc + 2 * (hi - sc);
    return oracle::bisect<quad>(h, sc, hi, 230);
}

quad cd_outer(quad phi, quad g, quad z, quad q, bool a) {
    quad s = sigma_outer(phi, g, z, q, a);
    quad r = oracle::c_diff_A(s, g, z);
    return a ? r : -r;
}

double three_root_oracle(double g, double z, double z3, double rho0, bool a, double lo, double hi) {
    auto f = [&](quad phi) { return cd_outer(phi, g, z, 1, a) - z3 * expq(-z3 * phi) + rho0; };
    return double(oracle::bisect<quad>(f, quad(lo), quad(hi), 120));
}

} // namespace

TEST_CASE("third species concentration") {
    CHECK(third_species_concentration(0.0, 3.0) == 1.0);
    CHECK(std::fabs(third_species_concentration(1.0, 1.0) - std::exp(-1.0)) < 1e-16);
    CHECK(std::fabs(third_species_concentration(-2.0, 0.5) - std::exp(1.0)) < 1e-15);
}

TEST_CASE("three-species A root against the quad oracle") {
    ThreeSpeciesConfig cfg{TwoSpeciesParams(1, 20), 1.0, 0.5};
    ThreeSpeciesModel m(cfg);
    RhsFunction fa = m.assemble(Branch::A);
    REQUIRE(fa.root().has_value());
    double c = *fa.root();
    CHECK(std::fabs(fa(c)) < 1e-12);
    auto d = fa.domain();
    CHECK(d.lo == doctest::Approx(-m.curves().phi_Ac()).epsilon(1e-15));
    double ref = three_root_oracle(1, 20, 1, 0.5, true, d.lo, d.hi);
    CHECK(std::fabs(c - ref) < 1e-11);
    CHECK(fa.label() == Branch::A);
}

TEST_CASE("three-species B has no root at z = 20 but one at z = 40") {
    ThreeSpeciesConfig cfg{TwoSpeciesParams(1, 20), 1.0, 0.5};
    CHECK_THROWS_AS(assemble_three_species(cfg, Branch::B), NoIntersectionError);
    // the largest value of f_B sits at the right end and is still negative
    double pac = phi_Ac(cfg.pair);
    double fb_end = double(cd_outer(pac * (1 - 1e-14), 1, 20, 1, false)) - std::exp(-pac) + 0.5;
    CHECK(fb_end < 0.0);

    ThreeSpeciesConfig cfg40{TwoSpeciesParams(1, 40), 1.0, 0.5};
    ThreeSpeciesModel m(cfg40);
    RhsFunction fa = m.assemble(Branch::A);
    RhsFunction fb = m.assemble(Branch::B);
    REQUIRE(fb.root().has_value());
    double ref = three_root_oracle(1, 40, 1, 0.5, false, fb.domain().lo, fb.domain().hi);
    CHECK(std::fabs(*fb.root() - ref) < 1e-10);
    CHECK(std::fabs(*fa.root() - *fb.root()) > 1e-3);
}

TEST_CASE("three-species rhs is increasing with matching derivative") {
    ThreeSpeciesModel m({TwoSpeciesParams(1, 25), 1.0, 0.5});
    for (Branch b : {Branch::A}) {
        RhsFunction f = m.assemble(b);
        double lo = f.domain().lo + 1e-3;
        double prev = f(lo);
        for (int i = 1; i <= 100; ++i) {
            double phi = lo + i * 0.03;
            double v = f(phi);
            CHECK(v > prev);
            prev = v;
            double h = 1e-6;
            double fd = (f(phi + h) - f(phi - h)) / (2 * h);
            CHECK(std::fabs(f.derivative(phi) - fd) < 1e-6 * std::max(1.0, std::fabs(fd)));
            auto ev = f.evaluate(phi);
            CHECK(ev.f == v);
        }
    }
}

TEST_CASE("three-species concentrations satisfy the pair relations") {
    ThreeSpeciesModel m({TwoSpeciesParams(1, 20), 1.0, 0.5});
    double pac = m.curves().phi_Ac();
    for (double phi : {-pac + 0.01, 0.0, 1.0}) {
        auto c = m.concentrations(phi, Branch::A);
        double k = 21.0;
        CHECK(std::fabs(std::log(c[0] * c[1]) + k * (c[0] + c[1])) < 1e-10);
        CHECK(c[0] > c[1]);
        CHECK(c[2] == std::exp(-phi));
    }
}

TEST_CASE("three-species with non-positive rho0 loses the B root") {
    for (double rho0 : {0.0, -0.5}) {
        ThreeSpeciesConfig cfg{TwoSpeciesParams(1, 40), 1.0, rho0};
        CHECK_THROWS_AS(assemble_three_species(cfg, Branch::B), NoIntersectionError);
    }
}

TEST_CASE("three-species input validation") {
    CHECK_THROWS_AS(ThreeSpeciesModel({TwoSpeciesParams(1, 20), 0.0, 0.5}), DomainError);
    CHECK_THROWS_AS(ThreeSpeciesModel({TwoSpeciesParams(1, 20), 1.0, NAN}), DomainError);
    CHECK_THROWS_AS(ThreeSpeciesModel({TwoSpeciesParams(1, 1), 1.0, 0.5}), SubcriticalError);
}

TEST_CASE("four-species roots with either sign of rho0") {
    for (double rho0 : {-0.3, 0.3}) {
        FourSpeciesConfig cfg{TwoSpeciesParams(1, 25, 1), TwoSpeciesParams(1, 25, 2), rho0};
        FourSpeciesModel m(cfg);
        for (Branch b : {Branch::A, Branch::B}) {
            RhsFunction f = m.assemble(b);
            REQUIRE(f.root().has_value());
            CHECK(std::fabs(f(*f.root())) < 1e-12);
            bool a = b == Branch::A;
            auto fo = [&](quad phi) {
                return cd_outer(phi, 1, 25, 1, a) + 2 * cd_outer(phi, 1, 25, 2, !a) - rho0;
            };
            // the turning-point ends are ill-conditioned for the oracle, stay just inside
            quad lo = quad(f.domain().lo) + quad(1e-9), hi = quad(f.domain().hi) - quad(1e-9);
            double ref = double(oracle::bisect<quad>(fo, lo, hi, 120));
            CHECK(std::fabs(*f.root() - ref) < 1e-10);
        }
    }
}

TEST_CASE("four-species reference roots") {
    FourSpeciesModel m({TwoSpeciesParams(1, 25, 1), TwoSpeciesParams(1, 25, 2), -0.3});
    CHECK(*m.assemble(Branch::A).root() == doctest::Approx(0.154326).epsilon(1e-5));
    CHECK(*m.assemble(Branch::B).root() == doctest::Approx(-0.507872).epsilon(1e-5));
}

TEST_CASE("four-species domain is the segment intersection") {
    FourSpeciesConfig cfg{TwoSpeciesParams(1, 25, 1), TwoSpeciesParams(1, 25, 2), -0.3};
    FourSpeciesModel m(cfg);
    auto d = m.domain(Branch::A);
    CHECK(d.lo == doctest::Approx(-m.curves12().phi_Ac()));
    CHECK(d.hi == doctest::Approx(m.curves34().phi_Ac()));
    auto c = m.concentrations(0.1, Branch::A);
    CHECK(c[0] > c[1]);
    CHECK(c[2] < c[3]);
}

TEST_CASE("RhsFunction rejects an empty domain") {
    CHECK_THROWS_AS(RhsFunction([](double) { return RhsValue{0, 0}; }, Interval{1.0, 1.0}),
                    EmptyDomainError);
}

TEST_CASE("RhsFunction from separate maps") {
    auto f = RhsFunction::from([](double x) { return x - 1; }, [](double) { return 1.0; },
                               Interval{-5, 5}, 1.0);
    CHECK(f(3.0) == 2.0);
    CHECK(f.derivative(0.0) == 1.0);
    CHECK(f.root() == 1.0);
    CHECK_FALSE(f.label().has_value());
}

TEST_CASE("segment pairing per label") {
    CHECK(primary_segment(Branch::A) == Segment::A1);
    CHECK(primary_segment(Branch::B) == Segment::B1);
    CHECK(partner_segment(Branch::A) == Segment::B1);
    CHECK(partner_segment(Branch::B) == Segment::A1);
}
