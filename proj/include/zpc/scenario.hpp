#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zpc/moments.hpp"
#include "zpc/params.hpp"

namespace zpc::scenario {

/// One timed entry of a measurement record.
struct Segment {
    enum class Type { unconditioned, zero_click, click_at };
    Type type = Type::unconditioned;
    double duration = 0.0;  // unconditioned / zero_click
    double at = 0.0;        // click_at: absolute instant, must land on the
                            // boundary reached by the preceding segments
    double eta = 0.0;       // zero_click; click_at defaults to 1
};

/// Ordered measurement record plus the initial condition.
struct Scenario {
    Interaction kind = Interaction::antiStokes;
    std::vector<Segment> segments;
    bool start_from_bath = true;      // vacuum optics, mechanics at N_bath
    moments::MomentState initial;     // used when start_from_bath is false
    double regauss_multiplier = 3.0;

    double span() const;
    /// Checks segment invariants, including the re-Gaussification exclusion
    /// window after each click.  Throws DomainError on violation.
    void validate(const SystemParams& p) const;
};

struct TrajectoryResult {
    std::vector<double> t;
    std::vector<moments::MomentState> states;
    std::vector<double> log_record;   // cumulative log record weight per sample
    std::vector<double> events;       // click instants
    std::vector<std::size_t> event_rows;  // sample rows holding post-click states
    double log_record_probability = 0.0;
    bool step_warning = false;        // sample_trajectory: P1 per step > 0.05

    const moments::MomentState& back() const { return states.back(); }
};

/// Deterministic segment-by-segment execution of a scenario.  Samples are
/// emitted on a uniform grid of spacing sample_dt (0 selects span/1000) via
/// dense interpolation of the adaptive solution; rows at click instants carry
/// the post-click state.
TrajectoryResult run_scenario(const Scenario& sc, const SystemParams& p,
                              const moments::Tolerances& tol = {},
                              double sample_dt = 0.0);

/// Stochastic photon-counting unraveling with one uniform draw per step
/// against P1 = 2 eta kappa_ex <a+a> dt.  Deterministic given seed.  Samples
/// every record_stride-th step (the final state is always recorded).
TrajectoryResult sample_trajectory(Interaction kind, const SystemParams& p,
                                   double eta, double duration, double dt,
                                   std::uint64_t seed,
                                   double regauss_multiplier = 3.0,
                                   int record_stride = 1);

/// A scenario file bundles the system parameters with the record.
struct ScenarioFile {
    SystemParams params;
    Scenario scenario;
    double sample_dt = 0.0;
};

/// Flat key-value text with repeated `segment` lines; errors carry the line
/// number.  Schema documented in the README.
ScenarioFile parse_scenario_text(const std::string& text,
                                 const std::string& name = "<string>");
ScenarioFile parse_scenario_file(const std::string& path);

} // namespace zpc::scenario
