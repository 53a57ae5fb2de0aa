#include "zpc/scenario.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "zpc/errors.hpp"
#include "zpc/ode.hpp"

namespace zpc::scenario {

using moments::MomentState;
using Eigen::Vector3d;
using Eigen::Vector4d;

double Scenario::span() const {
    double s = 0.0;
    for (const auto& seg : segments)
        if (seg.type != Segment::Type::click_at) s += seg.duration;
    return s;
}

void Scenario::validate(const SystemParams& p) const {
    p.validate();
    if (segments.empty()) throw DomainError("scenario: no segments");
    const double total = span();
    const double window = moments::regauss_window(p, regauss_multiplier);
    const double eps = 1e-9 * std::max(1.0, total);
    double t = 0.0;
    double last_click = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& seg = segments[i];
        switch (seg.type) {
        case Segment::Type::click_at:
            if (!(seg.at > 0.0) || !(seg.at < total))
                throw DomainError(
                    "scenario: click instant must lie strictly inside the span");
            if (std::abs(seg.at - t) > eps)
                throw DomainError(
                    "scenario: click instant does not match the boundary "
                    "reached by the preceding segments");
            validate_efficiency(seg.eta);
            last_click = t;
            break;
        case Segment::Type::zero_click:
            validate_efficiency(seg.eta);
            if (t - last_click < window - eps)
                throw DomainError(
                    "scenario: zero-click segment begins inside the post-click "
                    "re-Gaussification window");
            [[fallthrough]];
        case Segment::Type::unconditioned:
            if (!(seg.duration > 0.0))
                throw DomainError("scenario: segment durations must be > 0");
            t += seg.duration;
            break;
        }
    }
    if (!start_from_bath && initial.kind != kind)
        throw DomainError("scenario: initial state interaction mismatch");
}

namespace {

MomentState initial_state(const Scenario& sc, const SystemParams& p) {
    if (!sc.start_from_bath) return sc.initial;
    return {sc.kind, 0.0, 0.0, p.bath_occupation};
}

// one classical RK4 step of the moment drift
MomentState rk4_step(const MomentState& s, const SystemParams& p, double eta,
                     double h) {
    const Vector3d y = s.vec();
    auto f = [&](const Vector3d& v) {
        return moments::drift(MomentState::from_vec(s.kind, v), p, eta);
    };
    const Vector3d k1 = f(y);
    const Vector3d k2 = f(y + 0.5 * h * k1);
    const Vector3d k3 = f(y + 0.5 * h * k2);
    const Vector3d k4 = f(y + h * k3);
    return MomentState::from_vec(
        s.kind, y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

} // namespace

TrajectoryResult run_scenario(const Scenario& sc, const SystemParams& p,
                              const moments::Tolerances& tol,
                              double sample_dt) {
    sc.validate(p);
    const double total = sc.span();
    const double dt_out = sample_dt > 0.0 ? sample_dt : total / 1000.0;
    const double eps = 1e-9 * std::max(1.0, total);

    TrajectoryResult out;
    MomentState state = initial_state(sc, p);
    double t = 0.0;
    double logw = 0.0;
    out.t.push_back(0.0);
    out.states.push_back(state);
    out.log_record.push_back(0.0);

    std::int64_t next_k = 1;  // next output grid index
    for (const auto& seg : sc.segments) {
        if (seg.type == Segment::Type::click_at) {
            const double eta_click = seg.eta > 0.0 ? seg.eta : 1.0;
            const double rate = 2.0 * eta_click * p.kappa_ex * state.n_opt;
            state = moments::apply_click(state);
            if (!(rate > 0.0))
                throw ZeroRateError("run_scenario: click with zero rate");
            logw += std::log(rate);
            out.events.push_back(t);
            // post-click row, kept strictly after the pre-click one
            out.t.push_back(std::nextafter(t, total));
            out.states.push_back(state);
            out.log_record.push_back(logw);
            out.event_rows.push_back(out.t.size() - 1);
            continue;
        }

        const double eta = seg.type == Segment::Type::zero_click ? seg.eta : 0.0;
        const double t0 = t, t1 = t + seg.duration;
        // augmented state: (u, n_opt, n_mech, 2 eta kappa_ex int n_opt dt)
        auto f = [&](double, const Vector4d& v) -> Vector4d {
            const MomentState ms = MomentState::from_vec(sc.kind, v.head<3>());
            Vector4d d;
            d.head<3>() = moments::drift(ms, p, eta);
            d[3] = 2.0 * eta * p.kappa_ex * ms.n_opt;
            return d;
        };
        ode::Options opt;
        opt.abs_tol = tol.abs_tol;
        opt.rel_tol = tol.rel_tol;
        Vector4d y0;
        y0.head<3>() = state.vec();
        y0[3] = 0.0;
        const auto series = ode::integrate_adaptive(f, y0, t0, t1, opt);

        while (next_k * dt_out <= t1 + eps) {
            const double tk = next_k * dt_out;
            ++next_k;
            if (tk <= t0 + eps) continue;  // boundary already emitted
            const Vector4d v = ode::sample(series, std::min(tk, t1));
            out.t.push_back(std::min(tk, t1));
            out.states.push_back(MomentState::from_vec(sc.kind, v.head<3>()));
            out.log_record.push_back(logw - v[3]);
        }
        const Vector4d vend = series.y.back();
        state = MomentState::from_vec(sc.kind, vend.head<3>());
        logw -= vend[3];
        t = t1;
        if (out.t.back() < t1 - eps) {  // always emit the segment boundary
            out.t.push_back(t1);
            out.states.push_back(state);
            out.log_record.push_back(logw);
        } else {  // snap the last emitted row to the exact endpoint value
            out.t.back() = t1;
            out.states.back() = state;
            out.log_record.back() = logw;
        }
    }
    out.log_record_probability = logw;
    return out;
}

TrajectoryResult sample_trajectory(Interaction kind, const SystemParams& p,
                                   double eta, double duration, double dt,
                                   std::uint64_t seed,
                                   double regauss_multiplier,
                                   int record_stride) {
    p.validate();
    validate_efficiency(eta);
    if (!(duration > 0.0) || !(dt > 0.0) || record_stride < 1)
        throw DomainError("sample_trajectory: need duration, dt > 0 and "
                          "record_stride >= 1");

    const double window = moments::regauss_window(p, regauss_multiplier);
    const auto steps = static_cast<std::int64_t>(std::llround(duration / dt));
    if (steps < 1) throw DomainError("sample_trajectory: duration < dt");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    TrajectoryResult out;
    MomentState state{kind, 0.0, 0.0, p.bath_occupation};
    double t = 0.0, logw = 0.0;
    double regauss_until = -1.0;
    out.t.push_back(0.0);
    out.states.push_back(state);
    out.log_record.push_back(0.0);

    for (std::int64_t s = 0; s < steps; ++s) {
        const bool monitored = eta > 0.0 && t >= regauss_until;
        double eta_step = 0.0;
        if (monitored) {
            const double p1 = 2.0 * eta * p.kappa_ex * state.n_opt * dt;
            if (p1 > 0.2)
                throw StepSizeError(
                    "sample_trajectory: click probability per step exceeds "
                    "0.2; reduce dt");
            if (p1 > 0.05) out.step_warning = true;
            if (unif(rng) < p1) {
                state = moments::apply_click(state);
                logw += std::log(p1);
                out.events.push_back(t);
                out.t.push_back(std::nextafter(t, duration));
                out.states.push_back(state);
                out.log_record.push_back(logw);
                out.event_rows.push_back(out.t.size() - 1);
                regauss_until = t + window;
            } else {
                logw -= p1;
                eta_step = eta;
            }
        }
        state = rk4_step(state, p, eta_step, dt);
        t = (s + 1 == steps) ? duration : (s + 1) * dt;
        if ((s + 1) % record_stride == 0 || s + 1 == steps) {
            out.t.push_back(t);
            out.states.push_back(state);
            out.log_record.push_back(logw);
        }
    }
    out.log_record_probability = logw;
    return out;
}

namespace {

[[noreturn]] void parse_fail(const std::string& name, int line,
                             const std::string& msg) {
    throw ParseError(name + ":" + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& s, const std::string& name, int line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) parse_fail(name, line, "trailing junk in number '" + s + "'");
        return v;
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        parse_fail(name, line, "expected a number, got '" + s + "'");
    }
}

Interaction parse_kind(const std::string& v, const std::string& name, int line) {
    if (v == "as" || v == "anti-stokes" || v == "antistokes")
        return Interaction::antiStokes;
    if (v == "s" || v == "stokes") return Interaction::stokes;
    parse_fail(name, line, "kind must be 'as' or 's', got '" + v + "'");
}

Segment parse_segment(const std::string& rest, const std::string& name,
                      int line) {
    Segment seg;
    bool has_type = false, has_duration = false, has_at = false, has_eta = false;
    std::istringstream iss(rest);
    std::string tok;
    while (iss >> tok) {
        const std::size_t eq = tok.find('=');
        if (eq == std::string::npos)
            parse_fail(name, line, "segment fields must be key=value, got '" + tok + "'");
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "type") {
            has_type = true;
            if (val == "unconditioned") seg.type = Segment::Type::unconditioned;
            else if (val == "zero_click") seg.type = Segment::Type::zero_click;
            else if (val == "click") seg.type = Segment::Type::click_at;
            else parse_fail(name, line, "unknown segment type '" + val + "'");
        } else if (key == "duration") {
            has_duration = true;
            seg.duration = to_double(val, name, line);
        } else if (key == "at") {
            has_at = true;
            seg.at = to_double(val, name, line);
        } else if (key == "eta") {
            has_eta = true;
            seg.eta = to_double(val, name, line);
        } else {
            parse_fail(name, line, "unknown segment field '" + key + "'");
        }
    }
    if (!has_type) parse_fail(name, line, "segment is missing type=");
    if (seg.type == Segment::Type::click_at) {
        if (!has_at) parse_fail(name, line, "click segment needs at=");
        if (has_duration) parse_fail(name, line, "click segment takes no duration");
        if (!has_eta) seg.eta = 1.0;
    } else {
        if (!has_duration) parse_fail(name, line, "segment needs duration=");
        if (has_at) parse_fail(name, line, "only click segments take at=");
        if (seg.type == Segment::Type::unconditioned && has_eta)
            parse_fail(name, line, "unconditioned segments take no eta");
    }
    return seg;
}

} // namespace

ScenarioFile parse_scenario_text(const std::string& text,
                                 const std::string& name) {
    ScenarioFile f;
    bool has_kind = false;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::size_t hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;

        if (line.rfind("segment", 0) == 0 &&
            (line.size() == 7 || std::isspace(static_cast<unsigned char>(line[7])))) {
            f.scenario.segments.push_back(
                parse_segment(line.substr(7), name, lineno));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            parse_fail(name, lineno, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            parse_fail(name, lineno, "expected 'key = value'");

        if (key == "kind") {
            f.scenario.kind = parse_kind(val, name, lineno);
            has_kind = true;
        } else if (key == "coupling") {
            f.params.coupling = to_double(val, name, lineno);
        } else if (key == "kappa_ex") {
            f.params.kappa_ex = to_double(val, name, lineno);
        } else if (key == "kappa_in") {
            f.params.kappa_in = to_double(val, name, lineno);
        } else if (key == "gamma") {
            f.params.gamma = to_double(val, name, lineno);
        } else if (key == "bath_occupation") {
            f.params.bath_occupation = to_double(val, name, lineno);
        } else if (key == "regauss_multiplier") {
            f.scenario.regauss_multiplier = to_double(val, name, lineno);
        } else if (key == "sample_dt") {
            f.sample_dt = to_double(val, name, lineno);
        } else if (key == "initial") {
            if (val == "bath") {
                f.scenario.start_from_bath = true;
            } else {
                std::istringstream iv(val);
                double u, no, nm;
                if (!(iv >> u >> no >> nm))
                    parse_fail(name, lineno,
                               "initial must be 'bath' or 'u n_opt n_mech'");
                f.scenario.start_from_bath = false;
                f.scenario.initial = {f.scenario.kind, u, no, nm};
            }
        } else {
            parse_fail(name, lineno, "unknown key '" + key + "'");
        }
    }
    if (!has_kind) parse_fail(name, lineno, "missing required key 'kind'");
    if (!f.scenario.start_from_bath)
        f.scenario.initial.kind = f.scenario.kind;
    return f;
}

ScenarioFile parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open scenario file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario_text(ss.str(), path);
}

} // namespace zpc::scenario
