#include "zpc/cli.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "zpc/errors.hpp"
#include "zpc/fock.hpp"
#include "zpc/moments.hpp"
#include "zpc/pulsed.hpp"
#include "zpc/scenario.hpp"

namespace zpc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kSchemaVersion = 1;

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<double> make_grid(double lo, double hi, long long steps,
                              const std::string& scale) {
    if (steps < 1) throw DomainError("grid: steps must be >= 1");
    if (scale != "linear" && scale != "log")
        throw DomainError("grid: scale must be 'linear' or 'log'");
    if (scale == "log" && !(lo > 0.0 && hi > 0.0))
        throw DomainError("grid: log scale requires positive bounds");
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(steps));
    if (steps == 1) {
        g.push_back(lo);
        return g;
    }
    for (long long i = 0; i < steps; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(steps - 1);
        g.push_back(scale == "linear"
                        ? lo + f * (hi - lo)
                        : std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))));
    }
    return g;
}

void commit_file(const fs::path& final_path, const std::string& content) {
    const fs::path tmp = final_path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + tmp.string());
        f << content;
        if (!f) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, final_path);
}

void write_manifest_json(const GlobalOptions& opt, const std::string& command,
                         const json& raw,
                         const std::vector<std::string>& outputs, double wall_s,
                         const json& extra = json::object()) {
    json m;
    m["schema_version"] = kSchemaVersion;
    m["version"] = kVersion;
    m["command"] = command;
    m["config"] = raw;
    m["options"] = {{"out", opt.out_dir},
                    {"tol", opt.tol},
                    {"jobs", opt.jobs},
                    {"seed", opt.seed_set ? json(opt.seed) : json(nullptr)}};
    m["outputs"] = outputs;
    m["wall_time_s"] = wall_s;
    if (!extra.empty()) m["details"] = extra;
    commit_file(fs::path(opt.out_dir) / (command + ".manifest.json"),
                m.dump(2) + "\n");
}

void write_manifest(const GlobalOptions& opt, const std::string& command,
                    const Config& cfg, const std::vector<std::string>& outputs,
                    double wall_s, const json& extra = json::object()) {
    json raw = json::object();
    for (const auto& [k, v] : cfg.entries()) raw[k] = v.first;
    write_manifest_json(opt, command, raw, outputs, wall_s, extra);
}

int resolve_jobs(const GlobalOptions& opt) {
    if (opt.jobs > 0) return opt.jobs;
    if (const char* env = std::getenv("ZPC_JOBS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

Interaction kind_from(const Config& cfg) {
    const std::string v = cfg.get_string("kind");
    if (v == "as" || v == "anti-stokes" || v == "antistokes")
        return Interaction::antiStokes;
    if (v == "s" || v == "stokes") return Interaction::stokes;
    throw DomainError("kind: must be 'as' or 's', got '" + v + "'");
}

SystemParams params_from(const Config& cfg, bool need_coupling) {
    SystemParams p;
    p.kappa_ex = cfg.get_double("kappa_ex");
    p.kappa_in = cfg.get_double("kappa_in", 0.0);
    p.gamma = cfg.get_double("gamma");
    p.bath_occupation = cfg.get_double("bath_occupation");
    if (cfg.has("coupling")) {
        p.coupling = cfg.get_double("coupling");
    } else if (cfg.has("cooperativity")) {
        p.coupling = std::sqrt(cfg.get_double("cooperativity") * p.kappa() *
                               p.gamma);
    } else if (need_coupling) {
        throw DomainError("config: need 'coupling' or 'cooperativity'");
    }
    p.validate();
    return p;
}

void ensure_out_dir(const GlobalOptions& opt) {
    fs::create_directories(opt.out_dir);
}

} // namespace

// --- Config --------------------------------------------------------------

Config Config::from_text(const std::string& text, const std::string& name) {
    Config c;
    c.name_ = name;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::size_t hash = raw.find('#');
        const std::string line =
            trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(name + ":" + std::to_string(lineno) +
                             ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ParseError(name + ":" + std::to_string(lineno) +
                             ": expected 'key = value'");
        if (c.kv_.count(key))
            throw ParseError(name + ":" + std::to_string(lineno) +
                             ": duplicate key '" + key + "'");
        c.kv_[key] = {val, lineno};
    }
    return c;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str(), path);
}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string Config::get_string(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end())
        throw DomainError(name_ + ": missing required key '" + key + "'");
    return it->second.first;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second.first;
}

double Config::get_double(const std::string& key) const {
    const std::string v = get_string(key);
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ParseError(name_ + ":" + std::to_string(kv_.at(key).second) +
                         ": key '" + key + "' is not a number: '" + v + "'");
    }
}

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long long Config::get_int(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get_string(key);
    try {
        std::size_t pos = 0;
        const long long d = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ParseError(name_ + ":" + std::to_string(kv_.at(key).second) +
                         ": key '" + key + "' is not an integer: '" + v + "'");
    }
}

std::vector<double> Config::get_list(const std::string& key) const {
    std::string v = get_string(key);
    std::vector<double> out;
    std::replace(v.begin(), v.end(), ',', ' ');
    std::istringstream iss(v);
    double x;
    while (iss >> x) out.push_back(x);
    if (out.empty() || !iss.eof())
        throw ParseError(name_ + ":" + std::to_string(kv_.at(key).second) +
                         ": key '" + key + "' is not a number list");
    return out;
}

void Config::restrict_keys(const std::vector<std::string>& allowed) const {
    for (const auto& [k, v] : kv_) {
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
            throw ParseError(name_ + ":" + std::to_string(v.second) +
                             ": unknown key '" + k + "'");
    }
}

// --- pulsed --------------------------------------------------------------

int cmd_pulsed(const Config& cfg, const GlobalOptions& opt) {
    const auto t_start = std::chrono::steady_clock::now();
    cfg.restrict_keys({"kind", "nbar", "eta", "gtau_min", "gtau_max",
                       "gtau_steps", "gtau_scale"});
    const Interaction kind = kind_from(cfg);
    const double nbar = cfg.get_double("nbar");
    if (nbar < 0.0) throw DomainError("nbar must be non-negative");
    const auto etas = cfg.get_list("eta");
    for (double e : etas) validate_efficiency(e);
    const auto gtaus =
        make_grid(cfg.get_double("gtau_min"), cfg.get_double("gtau_max"),
                  cfg.get_int("gtau_steps", 0),
                  cfg.get_string("gtau_scale", "linear"));

    std::ostringstream csv;
    csv << "# zpc pulsed v" << kVersion << "\n"
        << "# kind=" << to_string(kind) << " nbar=" << fmt17(nbar) << "\n"
        << "gtau,eta,occupation,probability,baseline\n";
    for (double gtau : gtaus) {
        const double baseline = kind == Interaction::antiStokes
                                    ? pulsed::laser_cooled_occupation(nbar, gtau)
                                    : pulsed::tms_occupation(nbar, gtau);
        for (double eta : etas) {
            const auto r = kind == Interaction::antiStokes
                               ? pulsed::as_zero_click(nbar, gtau, eta, 0)
                               : pulsed::s_zero_click(nbar, gtau, eta, 0);
            csv << fmt17(gtau) << ',' << fmt17(eta) << ','
                << fmt17(r.occupation) << ',' << fmt17(r.probability) << ','
                << fmt17(baseline) << "\n";
        }
    }
    ensure_out_dir(opt);
    commit_file(fs::path(opt.out_dir) / "pulsed.csv", csv.str());
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    write_manifest(opt, "pulsed", cfg, {"pulsed.csv"}, wall);
    return 0;
}

// --- sweep ---------------------------------------------------------------

int cmd_sweep(const Config& cfg, const GlobalOptions& opt) {
    const auto t_start = std::chrono::steady_clock::now();
    cfg.restrict_keys({"kind", "bath_occupation", "kappa_ex", "kappa_in",
                       "gamma", "eta_min", "eta_max", "eta_steps", "eta_scale",
                       "c_min", "c_max", "c_steps", "c_scale"});
    const Interaction kind = kind_from(cfg);
    SystemParams base;
    base.kappa_ex = cfg.get_double("kappa_ex");
    base.kappa_in = cfg.get_double("kappa_in", 0.0);
    base.gamma = cfg.get_double("gamma");
    base.bath_occupation = cfg.get_double("bath_occupation");
    base.validate();
    const auto etas =
        make_grid(cfg.get_double("eta_min"), cfg.get_double("eta_max"),
                  cfg.get_int("eta_steps", 0),
                  cfg.get_string("eta_scale", "linear"));
    const auto cs = make_grid(cfg.get_double("c_min"), cfg.get_double("c_max"),
                              cfg.get_int("c_steps", 0),
                              cfg.get_string("c_scale", "log"));
    for (double e : etas) validate_efficiency(e);
    const double ss_tol = opt.tol > 0.0 ? opt.tol : 1e-10;

    struct Row {
        double eta = 0.0, coop = 0.0;
        double n_cond = std::nan(""), n_uncond = std::nan("");
        double ratio = std::nan(""), rec_prob = std::nan("");
        bool converged = false;
    };
    std::vector<Row> rows(etas.size() * cs.size());
    std::atomic<std::size_t> next{0};
    const int jobs = resolve_jobs(opt);

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= rows.size()) return;
            Row& row = rows[i];
            row.eta = etas[i / cs.size()];
            row.coop = cs[i % cs.size()];
            SystemParams p = base;
            p.coupling = std::sqrt(row.coop * p.kappa() * p.gamma);
            try {
                const auto ss =
                    moments::conditioned_steady_state(kind, p, row.eta, ss_tol);
                row.n_cond = ss.n_mech;
                // steady zero-click weight per unit time
                row.rec_prob = std::exp(-2.0 * row.eta * p.kappa_ex * ss.n_opt);
            } catch (const std::exception&) {
            }
            try {
                row.n_uncond =
                    moments::unconditioned_steady_state(kind, p).n_mech;
            } catch (const std::exception&) {
            }
            row.converged =
                std::isfinite(row.n_cond) && std::isfinite(row.n_uncond);
            if (row.converged) row.ratio = row.n_cond / row.n_uncond;
        }
    };
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::ostringstream csv;
    csv << "# zpc sweep v" << kVersion << "\n"
        << "# kind=" << to_string(kind)
        << " Nbar=" << fmt17(base.bath_occupation)
        << " kappa_ex=" << fmt17(base.kappa_ex)
        << " kappa_in=" << fmt17(base.kappa_in)
        << " gamma=" << fmt17(base.gamma) << "\n"
        << "# record_probability is the steady zero-click weight per unit time\n"
        << "eta,cooperativity,n_conditioned,n_unconditioned,ratio,"
           "record_probability,converged\n";
    for (const Row& r : rows)
        csv << fmt17(r.eta) << ',' << fmt17(r.coop) << ',' << fmt17(r.n_cond)
            << ',' << fmt17(r.n_uncond) << ',' << fmt17(r.ratio) << ','
            << fmt17(r.rec_prob) << ',' << (r.converged ? 1 : 0) << "\n";
    ensure_out_dir(opt);
    commit_file(fs::path(opt.out_dir) / "sweep.csv", csv.str());
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    write_manifest(opt, "sweep", cfg, {"sweep.csv"}, wall,
                   {{"steady_state_tol", ss_tol}, {"jobs", jobs}});
    return 0;
}

// --- threshold -----------------------------------------------------------

int cmd_threshold(const Config& cfg, const GlobalOptions& opt) {
    const std::string mode = cfg.get_string("mode");
    if (mode == "pulsed") {
        cfg.restrict_keys({"mode", "nbar"});
        const double nbar = cfg.get_double("nbar");
        const double eta_star = pulsed::threshold_efficiency(nbar);
        std::cout << "mode: pulsed\nnbar: " << fmt17(nbar)
                  << "\neta_star: " << fmt17(eta_star) << "\n";
        return 0;
    }
    if (mode != "continuous")
        throw DomainError("mode must be 'pulsed' or 'continuous'");
    cfg.restrict_keys({"mode", "bath_occupation", "kappa_ex", "kappa_in",
                       "gamma", "coupling", "cooperativity"});
    const SystemParams p = params_from(cfg, true);
    const double tol = opt.tol > 0.0 ? opt.tol : 1e-4;
    const double eta_star = moments::threshold_efficiency_continuous(p, tol);
    std::cout << "mode: continuous\ncooperativity: "
              << fmt17(p.cooperativity()) << "\neta_star: " << fmt17(eta_star)
              << "\nbracket_halfwidth: " << fmt17(tol) << "\n";
    return 0;
}

// --- scenario ------------------------------------------------------------

int cmd_scenario(const GlobalOptions& opt) {
    const auto t_start = std::chrono::steady_clock::now();
    const auto file = scenario::parse_scenario_file(opt.config_path);
    moments::Tolerances tol;
    if (opt.tol > 0.0) tol.rel_tol = opt.tol;
    const auto traj =
        scenario::run_scenario(file.scenario, file.params, tol, file.sample_dt);

    std::ostringstream csv;
    csv << "# zpc scenario v" << kVersion << "\n"
        << "# kind=" << to_string(file.scenario.kind)
        << " Nbar=" << fmt17(file.params.bath_occupation) << "\n"
        << "t,event,n_opt,n_mech,u,log_record_prob\n";
    std::size_t ev = 0;
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
        const bool is_click =
            ev < traj.event_rows.size() && traj.event_rows[ev] == i;
        if (is_click) ++ev;
        const auto& s = traj.states[i];
        csv << fmt17(traj.t[i]) << ',' << (is_click ? "click" : "") << ','
            << fmt17(s.n_opt) << ',' << fmt17(s.n_mech) << ',' << fmt17(s.u)
            << ',' << fmt17(traj.log_record[i]) << "\n";
    }
    ensure_out_dir(opt);
    commit_file(fs::path(opt.out_dir) / "scenario.csv", csv.str());
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    // scenario files allow repeated segment lines, so the manifest echoes
    // the file verbatim instead of a key-value map
    std::ifstream rawf(opt.config_path);
    std::ostringstream rawtext;
    rawtext << rawf.rdbuf();
    write_manifest_json(opt, "scenario",
                        {{"file", opt.config_path}, {"text", rawtext.str()}},
                        {"scenario.csv"}, wall,
                        {{"log_record_probability", traj.log_record_probability},
                         {"clicks", traj.events.size()}});
    return 0;
}

// --- verify --------------------------------------------------------------

namespace {

struct CheckOutcome {
    bool ok = true;
    std::string detail;
};

void check_close(CheckOutcome& out, const std::string& what, double expected,
                 double actual, double tol, bool relative) {
    const double denom = relative ? std::max(std::abs(expected), 1e-300) : 1.0;
    const double dev = std::abs(actual - expected) / denom;
    if (!(dev <= tol)) {
        out.ok = false;
        if (!out.detail.empty()) out.detail += "; ";
        out.detail += what + ": expected " + fmt17(expected) + ", actual " +
                      fmt17(actual) + ", tol " + fmt17(tol);
    }
}

// closed-form zero-click outcome against the full density-matrix pipeline
CheckOutcome verify_pulsed(Interaction kind, double nbar, int dim,
                           double tol) {
    CheckOutcome out;
    const std::vector<double> gtaus =
        kind == Interaction::antiStokes ? std::vector<double>{0.4, 1.0}
                                        : std::vector<double>{0.3, 0.5};
    for (double gtau : gtaus)
        for (double eta : {0.3, 1.0}) {
            auto state = fock::thermal_product_state(nbar, dim, dim);
            state = fock::apply_pulsed_unitary(state, kind, gtau);
            state = fock::apply_loss(state, eta);
            auto [cond, prob] = fock::project_photon_number(state, 0);
            const auto cf = kind == Interaction::antiStokes
                                ? pulsed::as_zero_click(nbar, gtau, eta, 0)
                                : pulsed::s_zero_click(nbar, gtau, eta, 0);
            const std::string tag = to_string(kind) + " gtau=" + fmt17(gtau) +
                                    " eta=" + fmt17(eta);
            check_close(out, tag + " occupation", cf.occupation,
                        cond.mechanical_mean(), tol, true);
            check_close(out, tag + " probability", cf.probability, prob, tol,
                        true);
        }
    return out;
}

CheckOutcome verify_steady_integration() {
    CheckOutcome out;
    for (auto [kind, coop] :
         {std::pair{Interaction::antiStokes, 1.0},
          std::pair{Interaction::stokes, 0.5}}) {
        SystemParams p;
        p.kappa_ex = 40.0;
        p.gamma = 1.0;
        p.bath_occupation = 5.0;
        p.coupling = std::sqrt(coop * p.kappa() * p.gamma);
        const auto exact = moments::unconditioned_steady_state(kind, p);
        const moments::MomentState s0{kind, 0.0, 0.0, p.bath_occupation};
        const auto series = moments::integrate(s0, p, 0.0, 0.0, 30.0);
        check_close(out, to_string(kind) + " n_mech", exact.n_mech,
                    series.back().n_mech, 1e-8, true);
    }
    return out;
}

CheckOutcome verify_conditioned_oracle() {
    CheckOutcome out;
    SystemParams p;
    p.coupling = 1.0;
    p.kappa_ex = 3.0;
    p.gamma = 1.0;
    p.bath_occupation = 1.0;
    const double eta = 1.0, t1 = 1.0;

    auto state = fock::thermal_product_state(p.bath_occupation, 8, 30);
    fock::OracleParams op{p, eta, Interaction::antiStokes};
    auto [cond, log_p0] = fock::evolve_conditioned_no_click(state, op, t1, 5e-4);

    const moments::MomentState s0{Interaction::antiStokes, 0.0, 0.0,
                                  p.bath_occupation};
    const auto series = moments::integrate(s0, p, eta, 0.0, t1);
    check_close(out, "n_mech", cond.mechanical_mean(), series.back().n_mech,
                1e-3, true);

    scenario::Scenario sc;
    sc.kind = Interaction::antiStokes;
    sc.segments.push_back(
        {scenario::Segment::Type::zero_click, t1, 0.0, eta});
    const auto traj = scenario::run_scenario(sc, p);
    check_close(out, "record probability", std::exp(log_p0),
                std::exp(traj.log_record_probability), 1e-6, false);
    return out;
}

CheckOutcome verify_click_map(bool perturb) {
    CheckOutcome out;
    for (Interaction kind : {Interaction::antiStokes, Interaction::stokes}) {
        SystemParams p;
        p.coupling = 1.0;
        p.kappa_ex = 3.0;
        p.gamma = 1.0;
        p.bath_occupation = 0.5;
        auto state = fock::thermal_product_state(p.bath_occupation, 12, 30);
        fock::OracleParams op{p, 0.0, kind};
        state = fock::evolve_unconditional(state, op, 0.1, 5e-4);
        const auto m = fock::second_moments(state);
        const double u = kind == Interaction::antiStokes
                             ? -2.0 * std::imag(m.adag_b)
                             : 2.0 * std::imag(m.ab);
        moments::MomentState g{kind, u, m.n_opt, m.n_mech};
        auto clicked = moments::apply_click(g);
        if (perturb) clicked.u = -clicked.u;  // test hook: mutation sanity
        auto [jumped, rate] = fock::apply_click_jump_exact(state);
        const auto mj = fock::second_moments(jumped);
        const double uj = kind == Interaction::antiStokes
                              ? -2.0 * std::imag(mj.adag_b)
                              : 2.0 * std::imag(mj.ab);
        const std::string tag = to_string(kind);
        check_close(out, tag + " n_opt", mj.n_opt, clicked.n_opt, 1e-8, true);
        check_close(out, tag + " n_mech", mj.n_mech, clicked.n_mech, 1e-8, true);
        check_close(out, tag + " u", uj, clicked.u, 1e-8, true);
    }
    return out;
}

CheckOutcome verify_closure() {
    CheckOutcome out;
    for (Interaction kind : {Interaction::antiStokes, Interaction::stokes})
        for (double eta : {0.0, 1.0}) {
            SystemParams p;
            p.coupling = 1.0;
            p.kappa_ex = 3.0;
            p.gamma = 1.0;
            p.bath_occupation = 10.0;
            moments::ExtendedMomentState s0;
            s0.base = {kind, 0.0, 0.0, p.bath_occupation};
            const auto series =
                moments::integrate_extended(s0, p, eta, 0.0, 10.0 / p.gamma);
            const auto end = series.back();
            const double worst = std::max(
                {std::abs(end.c_aa), std::abs(end.c_cross), std::abs(end.c_bb)});
            check_close(out,
                        to_string(kind) + " eta=" + fmt17(eta) + " anomalous",
                        0.0, worst, 1e-10, false);
        }
    return out;
}

} // namespace

int cmd_verify(const Config& cfg, const GlobalOptions& opt) {
    cfg.restrict_keys({"profile", "nbar", "d_mech", "perturb_drift_sign"});
    const double nbar = cfg.get_double("nbar", 0.5);
    const int dim = static_cast<int>(cfg.get_int("d_mech", 30));
    const bool perturb = cfg.get_int("perturb_drift_sign", 0) != 0;
    if (dim > 34)
        throw DomainError("verify: d_mech too large for the small-instance "
                          "guard (max 34)");

    struct Entry {
        std::string name;
        std::function<CheckOutcome()> fn;
    };
    const std::vector<Entry> checks = {
        {"pulsed_antistokes_oracle",
         [&] { return verify_pulsed(Interaction::antiStokes, nbar, dim, 1e-8); }},
        {"pulsed_stokes_oracle",
         [&] { return verify_pulsed(Interaction::stokes, nbar, dim, 1e-6); }},
        {"steady_state_integration", verify_steady_integration},
        {"conditioned_no_click_oracle", verify_conditioned_oracle},
        {"click_jump_map", [&] { return verify_click_map(perturb); }},
        {"anomalous_moment_closure", verify_closure},
    };

    bool all_ok = true;
    for (const auto& c : checks) {
        const auto t0 = std::chrono::steady_clock::now();
        CheckOutcome r;
        try {
            r = c.fn();
        } catch (const std::exception& e) {
            r.ok = false;
            r.detail = e.what();
        }
        const double dt =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        char t[32];
        std::snprintf(t, sizeof(t), "%.2f", dt);
        if (r.ok) {
            std::cout << "PASS " << c.name << " (" << t << " s)\n";
        } else {
            std::cout << "FAIL " << c.name << ": " << r.detail << " (" << t
                      << " s)\n";
            all_ok = false;
        }
    }
    return all_ok ? 0 : 2;
}

// --- dispatch ------------------------------------------------------------

int run(int argc, char** argv) {
    CLI::App app{"conditional cooling of a mechanical oscillator by "
                 "zero-photon detection"};
    app.require_subcommand(1);
    GlobalOptions opt;
    const std::vector<std::pair<std::string, std::string>> meta = {
        {"pulsed", "closed-form pulsed protocol tables"},
        {"sweep", "steady-state (eta, cooperativity) sweeps"},
        {"threshold", "pulsed or continuous threshold efficiency"},
        {"scenario", "timed measurement-record runs"},
        {"verify", "oracle cross-check suite"},
    };
    for (const auto& [name, desc] : meta) {
        CLI::App* sub = app.add_subcommand(name, desc);
        CLI::Option* c = sub->add_option("--config", opt.config_path,
                                         "structured text config file");
        if (name != "verify") c->required();
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--seed", opt.seed, "random seed");
        sub->add_option("--jobs", opt.jobs,
                        "worker threads (default: ZPC_JOBS or hardware)");
        sub->add_option("--tol", opt.tol, "tolerance override");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    CLI::App* active = app.get_subcommands().front();
    opt.seed_set = active->count("--seed") > 0;
    const std::string command = active->get_name();

    try {
        if (command == "scenario") return cmd_scenario(opt);
        const Config cfg = opt.config_path.empty()
                               ? Config::from_text("", "<default>")
                               : Config::load(opt.config_path);
        if (command == "pulsed") return cmd_pulsed(cfg, opt);
        if (command == "sweep") return cmd_sweep(cfg, opt);
        if (command == "threshold") return cmd_threshold(cfg, opt);
        return cmd_verify(cfg, opt);
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NoRootError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const InstabilityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const TruncationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ZeroRateError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const StepSizeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace zpc::cli
