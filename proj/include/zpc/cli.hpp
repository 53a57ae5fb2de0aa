#pragma once

#include <map>
#include <string>
#include <vector>

namespace zpc::cli {

/// Flat key = value config file with '#' comments; values keep their source
/// line for error reporting.
class Config {
public:
    static Config load(const std::string& path);
    static Config from_text(const std::string& text,
                            const std::string& name = "<string>");

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::vector<double> get_list(const std::string& key) const;

    /// Rejects keys outside the allowed set, reporting the offending line.
    void restrict_keys(const std::vector<std::string>& allowed) const;

    const std::map<std::string, std::pair<std::string, int>>& entries() const {
        return kv_;
    }
    const std::string& name() const { return name_; }

private:
    std::map<std::string, std::pair<std::string, int>> kv_;
    std::string name_;
};

/// Shared command-line options.
struct GlobalOptions {
    std::string config_path;
    std::string out_dir = ".";
    unsigned long long seed = 0;
    bool seed_set = false;
    int jobs = 0;       // 0 -> ZPC_JOBS env var, then hardware concurrency
    double tol = 0.0;   // 0 -> per-command default
};

int cmd_pulsed(const Config& cfg, const GlobalOptions& opt);
int cmd_sweep(const Config& cfg, const GlobalOptions& opt);
int cmd_threshold(const Config& cfg, const GlobalOptions& opt);
int cmd_scenario(const GlobalOptions& opt);
int cmd_verify(const Config& cfg, const GlobalOptions& opt);

/// Full dispatch; returns the process exit code
/// (0 ok, 1 validation, 2 numerical failure, 3 non-convergence).
int run(int argc, char** argv);

} // namespace zpc::cli
