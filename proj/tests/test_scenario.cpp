#include <doctest.h>

#include <cmath>
#include <string>

#include "zpc/scenario.hpp"

using namespace zpc;
using namespace zpc::scenario;

namespace {

const char* kGoodText = R"(
# Fig. 6 style record
kind = as
coupling = 1
kappa_ex = 3
gamma = 1
bath_occupation = 10

segment type=unconditioned duration=12
segment type=click at=12
segment type=unconditioned duration=10
)";

SystemParams fig6_rates() {
    SystemParams p;
    p.coupling = 1.0;
    p.kappa_ex = 3.0;
    p.gamma = 1.0;
    p.bath_occupation = 10.0;
    return p;
}

} // namespace

TEST_CASE("scenario parsing") {
    SUBCASE("well formed text") {
        const auto f = parse_scenario_text(kGoodText, "good");
        CHECK(f.scenario.kind == Interaction::antiStokes);
        CHECK(f.params.kappa_ex == 3.0);
        CHECK(f.scenario.segments.size() == 3);
        CHECK(f.scenario.segments[1].type == Segment::Type::click_at);
        CHECK(f.scenario.segments[1].eta == 1.0);
        CHECK_NOTHROW(f.scenario.validate(f.params));
    }
    SUBCASE("unknown key reports its line number") {
        try {
            parse_scenario_text("kind = as\nbogus = 1\n", "cfg");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("cfg:2") != std::string::npos);
        }
    }
    SUBCASE("malformed segment reports its line number") {
        try {
            parse_scenario_text("kind = as\nsegment type=zero_click\n", "cfg");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("cfg:2") != std::string::npos);
            CHECK(std::string(e.what()).find("duration") != std::string::npos);
        }
    }
    SUBCASE("numbers are checked") {
        CHECK_THROWS_AS(parse_scenario_text("kind = as\ngamma = abc\n", "cfg"),
                        ParseError);
    }
    SUBCASE("missing kind") {
        CHECK_THROWS_AS(parse_scenario_text("gamma = 1\n", "cfg"), ParseError);
    }
}

TEST_CASE("scenario validation") {
    const SystemParams p = fig6_rates();
    SUBCASE("click must land on a segment boundary") {
        Scenario sc;
        sc.kind = Interaction::antiStokes;
        sc.segments.push_back({Segment::Type::unconditioned, 5.0, 0.0, 0.0});
        sc.segments.push_back({Segment::Type::click_at, 0.0, 4.0, 1.0});
        sc.segments.push_back({Segment::Type::unconditioned, 5.0, 0.0, 0.0});
        CHECK_THROWS_AS(sc.validate(p), DomainError);
    }
    SUBCASE("click strictly inside the span") {
        Scenario sc;
        sc.kind = Interaction::antiStokes;
        sc.segments.push_back({Segment::Type::unconditioned, 5.0, 0.0, 0.0});
        sc.segments.push_back({Segment::Type::click_at, 0.0, 5.0, 1.0});
        CHECK_THROWS_AS(sc.validate(p), DomainError);
    }
    SUBCASE("zero-click may not start inside the re-Gaussification window") {
        Scenario sc;
        sc.kind = Interaction::antiStokes;
        sc.segments.push_back({Segment::Type::unconditioned, 5.0, 0.0, 0.0});
        sc.segments.push_back({Segment::Type::click_at, 0.0, 5.0, 1.0});
        sc.segments.push_back({Segment::Type::zero_click, 5.0, 0.0, 1.0});
        CHECK_THROWS_AS(sc.validate(p), DomainError);
        // an unconditioned buffer of one window length makes it legal
        sc.segments.insert(sc.segments.begin() + 2,
                           {Segment::Type::unconditioned,
                            moments::regauss_window(p), 0.0, 0.0});
        CHECK_NOTHROW(sc.validate(p));
    }
    SUBCASE("durations must be positive") {
        Scenario sc;
        sc.kind = Interaction::antiStokes;
        sc.segments.push_back({Segment::Type::unconditioned, 0.0, 0.0, 0.0});
        CHECK_THROWS_AS(sc.validate(p), DomainError);
    }
}

TEST_CASE("run_scenario") {
    const SystemParams p = fig6_rates();
    SUBCASE("eta = 0 monitoring equals unconditioned relaxation") {
        Scenario a;
        a.kind = Interaction::antiStokes;
        a.segments.push_back({Segment::Type::unconditioned, 4.0, 0.0, 0.0});
        a.segments.push_back({Segment::Type::zero_click, 4.0, 0.0, 0.0});
        Scenario b;
        b.kind = Interaction::antiStokes;
        b.segments.push_back({Segment::Type::unconditioned, 8.0, 0.0, 0.0});
        const auto ra = run_scenario(a, p);
        const auto rb = run_scenario(b, p);
        CHECK(ra.log_record_probability == 0.0);
        CHECK(ra.back().n_mech ==
              doctest::Approx(rb.back().n_mech).epsilon(1e-9));
    }
    SUBCASE("click doubles the optical occupation exactly") {
        const auto f = parse_scenario_text(kGoodText, "good");
        const auto r = run_scenario(f.scenario, f.params);
        REQUIRE(r.event_rows.size() == 1);
        const std::size_t i = r.event_rows[0];
        REQUIRE(i > 0);
        CHECK(r.states[i].n_opt == 2.0 * r.states[i - 1].n_opt);
        CHECK(r.states[i].u == 2.0 * r.states[i - 1].u);
    }
    SUBCASE("zero-click record probability is negative log") {
        Scenario sc;
        sc.kind = Interaction::antiStokes;
        sc.segments.push_back({Segment::Type::unconditioned, 5.0, 0.0, 0.0});
        sc.segments.push_back({Segment::Type::zero_click, 5.0, 0.0, 1.0});
        const auto r = run_scenario(sc, p);
        CHECK(r.log_record_probability < 0.0);
        for (std::size_t i = 1; i < r.t.size(); ++i)
            CHECK(r.t[i] > r.t[i - 1]);
        for (double lr : r.log_record) CHECK(lr <= 0.0);
    }
    SUBCASE("determinism") {
        const auto f = parse_scenario_text(kGoodText, "good");
        const auto r1 = run_scenario(f.scenario, f.params);
        const auto r2 = run_scenario(f.scenario, f.params);
        REQUIRE(r1.t.size() == r2.t.size());
        for (std::size_t i = 0; i < r1.t.size(); ++i) {
            CHECK(r1.t[i] == r2.t[i]);
            CHECK(r1.states[i].n_mech == r2.states[i].n_mech);
        }
    }
}

TEST_CASE("sample_trajectory") {
    const SystemParams p = fig6_rates();
    SUBCASE("eta = 0 never clicks and tracks the unconditioned solution") {
        const auto r = sample_trajectory(Interaction::antiStokes, p, 0.0, 4.0,
                                         1e-3, 42);
        CHECK(r.events.empty());
        CHECK(r.log_record_probability == 0.0);
        const moments::MomentState s0{Interaction::antiStokes, 0.0, 0.0,
                                      p.bath_occupation};
        const auto exact = moments::integrate(s0, p, 0.0, 0.0, 4.0);
        CHECK(r.back().n_mech ==
              doctest::Approx(exact.back().n_mech).epsilon(1e-8));
    }
    SUBCASE("deterministic given the seed") {
        const auto r1 = sample_trajectory(Interaction::antiStokes, p, 1.0, 6.0,
                                          1e-3, 7);
        const auto r2 = sample_trajectory(Interaction::antiStokes, p, 1.0, 6.0,
                                          1e-3, 7);
        CHECK(r1.events == r2.events);
        CHECK(r1.log_record_probability == r2.log_record_probability);
        CHECK(r1.back().n_mech == r2.back().n_mech);
    }
    SUBCASE("oversized steps are rejected") {
        CHECK_THROWS_AS(sample_trajectory(Interaction::antiStokes, p, 1.0,
                                          20.0, 0.12, 3),
                        StepSizeError);
    }
    SUBCASE("click statistics near the conditioned steady state") {
        // between clicks the state hugs the conditioned fixed point, and a
        // 3/min(gamma,kappa) window after each click is unmonitored; a
        // renewal estimate with that dead time predicts the mean count
        const auto cond =
            moments::conditioned_steady_state(Interaction::antiStokes, p, 1.0);
        const double eta = 1.0, t_relax = 4.0, t_obs = 6.0;
        const double rate = 2.0 * eta * p.kappa_ex * cond.n_opt;
        const double window = moments::regauss_window(p);
        int clicks = 0;
        const int n_seeds = 400;
        for (int s = 0; s < n_seeds; ++s) {
            // unmonitored relaxation first, then monitoring from equilibrium
            const auto r = sample_trajectory(Interaction::antiStokes, p, eta,
                                             t_relax + t_obs, 1e-3,
                                             1000 + s, 3.0, 1 << 20);
            for (double te : r.events)
                if (te >= t_relax) ++clicks;
        }
        const double mean_clicks = static_cast<double>(clicks) / n_seeds;
        const double expect = t_obs / (1.0 / rate + window);
        CHECK(mean_clicks > 0.7 * expect);
        CHECK(mean_clicks < 1.3 * expect);
    }
}
