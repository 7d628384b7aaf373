#include <cmath>
#include <string>

#include "doctest.h"
#include "mwalk/errors.hpp"
#include "mwalk/membrane.hpp"
#include "mwalk/verify.hpp"

using namespace mwalk;

namespace {

const CheckResult& find_check(const VerificationReport& rep, const std::string& name) {
    for (const auto& ch : rep.checks)
        if (ch.name == name) return ch;
    REQUIRE_MESSAGE(false, "missing check ", name);
    static CheckResult dummy;
    return dummy;
}

} // namespace

TEST_CASE("ks critical values match the Stephens table") {
    // lambda at 1% is 1.6276, at 5% 1.3581
    CHECK(ks_critical(100, 0.05) == doctest::Approx(1.3581 / (10.0 + 0.12 + 0.011))
              .epsilon(2e-3));
    CHECK(ks_critical(400, 0.01) == doctest::Approx(1.6276 / (20.0 + 0.12 + 0.0055))
              .epsilon(2e-3));
    CHECK(ks_critical(100, 0.01) > ks_critical(100, 0.05));
}

TEST_CASE("invariance suite passes on the worked membrane and echoes the pipeline") {
    ValidatedMembrane mem(builtin_fig1a(0.5));
    WalkModel model = WalkModel::two_sided(mem);
    VerificationReport rep = verify_invariance(model, 10000, 8000, 371, 2);

    CHECK(rep.suite == "invariance");
    CHECK(rep.m == 2);
    CHECK(rep.gamma == doctest::Approx(0.04551544771284072).epsilon(1e-12));
    REQUIRE(rep.pi.size() == 4);
    CHECK(rep.checks.size() == 3);
    for (const auto& ch : rep.checks) {
        INFO(ch.name, " statistic ", ch.statistic, " target ", ch.target);
        CHECK(ch.pass);
    }
    CHECK(rep.all_pass());
    CHECK(find_check(rep, "sign_frequency").target ==
          doctest::Approx((1.0 + rep.gamma) / 2.0));

    OneSidedEnvironment env = OneSidedEnvironment::periodic(2, {2}, {0.4, 0.6});
    WalkModel one = WalkModel::one_sided(env);
    CHECK_THROWS_AS(verify_invariance(one, 100, 100, 1), PipelineMissing);
}

TEST_CASE("slide suite passes on the worked membrane") {
    ValidatedMembrane mem(builtin_fig1a(0.5));
    WalkModel model = WalkModel::two_sided(mem);
    VerificationReport rep = verify_slide(model, 10000, 8000, 72, 2);

    REQUIRE(rep.c.size() == 1);
    CHECK(rep.c[0] == doctest::Approx(-0.23862113807178983).epsilon(1e-12));
    for (const auto& ch : rep.checks) {
        INFO(ch.name, " statistic ", ch.statistic, " target ", ch.target);
        CHECK(ch.pass);
    }
    double loc = std::sqrt(2.0 / M_PI) / std::sqrt(2.0);
    CHECK(find_check(rep, "mean_displacement[0]").target ==
          doctest::Approx(rep.c[0] * loc));
    CHECK(find_check(rep, "slide_identity[0]").target == 0.0);
}

TEST_CASE("slide suite is exact on a slide-free membrane") {
    ValidatedMembrane mem(builtin_transparent(2));
    WalkModel model = WalkModel::two_sided(mem);
    VerificationReport rep = verify_slide(model, 4000, 2000, 73);
    const CheckResult& ident = find_check(rep, "slide_identity[0]");
    CHECK(ident.statistic == 0.0);
    CHECK(ident.threshold == 0.0);
    CHECK(ident.pass);
    CHECK(rep.all_pass());
}

TEST_CASE("stationarity suite matches the embedded stationary law") {
    ValidatedMembrane mem(builtin_fig1a(0.5));
    WalkModel model = WalkModel::two_sided(mem);
    VerificationReport rep = verify_visit_stationarity(model, 2000000, 74, 2);

    CHECK(rep.suite == "stationarity");
    const CheckResult& visits = find_check(rep, "visit_frequency_linf");
    CHECK(visits.statistic < visits.threshold);
    const CheckResult& types = find_check(rep, "departure_type_linf");
    CHECK(types.statistic < types.threshold);
    CHECK(rep.all_pass());

    CHECK_THROWS_AS(verify_visit_stationarity(model, 0, 74), NoVisits);
}

TEST_CASE("one-sided suite recovers the mean pass-through rate") {
    SUBCASE("periodic environment") {
        OneSidedEnvironment env = OneSidedEnvironment::periodic(2, {2}, {0.35, 0.75});
        VerificationReport rep = verify_one_sided(env, 10000, 8000, 75, 2);
        CHECK(rep.gamma == doctest::Approx(2.0 * 0.55 - 1.0));
        for (const auto& ch : rep.checks) {
            INFO(ch.name, " statistic ", ch.statistic, " target ", ch.target);
            CHECK(ch.pass);
        }
    }
    SUBCASE("iid environment averaged over redraws") {
        OneSidedEnvironment env =
            OneSidedEnvironment::iid(2, {0.3, 0.9}, {0.5, 0.5}, 2024);
        VerificationReport rep = verify_one_sided(env, 10000, 8000, 76, 2);
        CHECK(rep.gamma == doctest::Approx(0.2));
        for (const auto& ch : rep.checks) {
            INFO(ch.name, " statistic ", ch.statistic, " target ", ch.target);
            CHECK(ch.pass);
        }
    }
}

TEST_CASE("stable suite separates the stated scale from the consistent one") {
    VerificationReport rep = verify_stable_hitting(2, 400, 4000, 77);

    CHECK(find_check(rep, "shape_consistent_scale").pass);
    CHECK(find_check(rep, "iqr_consistent_scale").pass);
    CHECK(find_check(rep, "sign_symmetry").pass);
    // the stated 1/sqrt(m) scale does not match the sampled law
    CHECK_FALSE(find_check(rep, "shape_stated_scale").pass);
    CHECK_FALSE(find_check(rep, "iqr_stated_scale").pass);
    CHECK_FALSE(rep.all_pass());

    CHECK_THROWS_AS(verify_stable_hitting(2, 0, 4000, 77), TooFewSamples);
    CHECK_THROWS_AS(verify_stable_hitting(2, 400, 5, 77), TooFewSamples);
}

TEST_CASE("martingale suite passes clean walks and flags a drift injection") {
    ValidatedMembrane mem(builtin_fig1a(0.5));
    WalkModel model = WalkModel::two_sided(mem);

    VerificationReport clean = verify_martingales(model, 4000, 4000, 78, 2);
    CHECK(clean.checks.size() == 8);
    for (const auto& ch : clean.checks) {
        INFO(ch.name, " statistic ", ch.statistic);
        CHECK(ch.pass);
    }

    VerificationReport drift = verify_martingales(model, 4000, 4000, 78, 2, 0.05);
    CHECK_FALSE(drift.all_pass());
}

TEST_CASE("verification reports replay bit-identically") {
    ValidatedMembrane mem(builtin_fig1a(0.25));
    WalkModel model = WalkModel::two_sided(mem);
    VerificationReport a = verify_invariance(model, 2000, 2000, 79, 2);
    VerificationReport b = verify_invariance(model, 2000, 2000, 79, 1);
    REQUIRE(a.checks.size() == b.checks.size());
    for (size_t i = 0; i < a.checks.size(); ++i) {
        CHECK(a.checks[i].statistic == b.checks[i].statistic);
        CHECK(a.checks[i].pass == b.checks[i].pass);
    }

    VerificationReport c = verify_invariance(model, 2000, 2000, 80, 2);
    bool same = true;
    for (size_t i = 0; i < a.checks.size(); ++i)
        same = same && a.checks[i].statistic == c.checks[i].statistic;
    CHECK_FALSE(same);
}
