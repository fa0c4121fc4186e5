#pragma once

#include "boundwalk/lattice.hpp"
#include "boundwalk/protocols.hpp"

#include <json.hpp>

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace boundwalk {

/// Raised for malformed or inconsistent configuration input; the CLI maps it
/// to exit code 2 (numeric failures map to 3).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Fully resolved run parameters: the sector/scheme setup plus the sweep
/// grids consumed by individual subcommands.
struct RunConfig {
    ExperimentConfig experiment;
    std::vector<double> phi_grid;
    std::vector<double> gamma_list;  // in units of the closed-form J_eff
    std::vector<double> u_list;      // interaction sweep (units of J)
    int dyson_order = -1;            // -1: default M - 1
    double fisher_phi = 0.0;
    std::map<std::string, std::string> echo;  // raw key = value pairs
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("config: key '" + key + "' has non-numeric entry '" + item + "'");
        }
    }
    return out;
}

/// Key-value store that tracks consumption so leftovers can be reported as
/// unknown keys.
class KeyStore {
public:
    void insert(const std::string& key, const std::string& value) {
        if (!values_.emplace(key, value).second)
            throw ConfigError("config: duplicate key '" + key + "'");
    }

    bool has(const std::string& key) {
        auto it = values_.find(key);
        if (it == values_.end()) return false;
        consumed_.insert(key);
        return true;
    }

    std::string raw(const std::string& key, const std::string& fallback = "") {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        consumed_.insert(key);
        return it->second;
    }

    double number(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        const std::string v = raw(key);
        try {
            std::size_t pos = 0;
            const double x = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
        }
    }

    int integer(const std::string& key, int fallback) {
        const double x = number(key, fallback);
        const int i = static_cast<int>(std::llround(x));
        if (x != static_cast<double>(i))
            throw ConfigError("config: key '" + key + "' expects an integer");
        return i;
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const std::string v = raw(key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ConfigError("config: key '" + key + "' expects true/false, got '" + v + "'");
    }

    /// Numeric value where the literal "auto" selects the closed form.
    double number_or_auto(const std::string& key, double fallback, double auto_value) {
        if (!has(key)) return fallback;
        if (raw(key) == "auto") return auto_value;
        return number(key, fallback);
    }

    void finish() const {
        for (const auto& [key, value] : values_)
            if (!consumed_.count(key))
                throw ConfigError("config: unknown key '" + key + "'");
    }

    const std::map<std::string, std::string>& all() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    std::set<std::string> consumed_;
};

}  // namespace detail

/// Parses flat `key = value` text ('#' comments, scheme sections as dotted
/// keys). Unknown keys are rejected by name.
inline RunConfig parse_config_text(const std::string& text) {
    detail::KeyStore kv;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " is not 'key = value'");
        kv.insert(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }

    RunConfig rc;
    ExperimentConfig& ex = rc.experiment;
    for (const char* key : {"L", "M", "U"})
        if (!kv.has(key)) throw ConfigError(std::string("config: missing required key '") + key + "'");
    ex.L = kv.integer("L", 0);
    ex.M = kv.integer("M", 0);
    ex.J = kv.number("J", 1.0);
    ex.U = kv.number("U", 0.0);
    if (ex.L < 2) throw ConfigError("config: constraint violated: L >= 2");
    if (ex.M < 1 || ex.M > 3) throw ConfigError("config: constraint violated: M in {1,2,3}");
    if (ex.J < 0) throw ConfigError("config: constraint violated: J >= 0");
    if (ex.M > 1 && ex.U <= 0)
        throw ConfigError("config: constraint violated: U > 0 (bound states need repulsion)");

    ex.gamma = kv.number("gamma", 0.0);
    if (ex.gamma < 0) throw ConfigError("config: constraint violated: gamma >= 0");
    ex.window_factor = kv.number("window_factor", 2.0);
    ex.scan_points = kv.integer("scan_points", 2000);
    if (ex.scan_points < 10) throw ConfigError("config: constraint violated: scan_points >= 10");
    const std::string conv = kv.raw("convention", "n_minus_one");
    if (conv == "n_minus_one") ex.convention = OnsiteConvention::NMinusOne;
    else if (conv == "n_plus_one") ex.convention = OnsiteConvention::NPlusOne;
    else throw ConfigError("config: key 'convention' expects n_minus_one or n_plus_one");
    ex.literal_phase_segment = kv.boolean("literal_phase_segment", false);
    ex.beta_L = kv.number("beta_L", 1.0);

    // scheme sections (a section is active when any of its keys appears)
    if (kv.has("edge_unlocked.beta_prime")) {
        const double auto_value =
            ex.M >= 2 ? edge_unlock_field(ex.M, ex.J, ex.U) : 0.0;
        ex.schemes.push_back(SchemeDescriptor::edge_unlocked(
            kv.number_or_auto("edge_unlocked.beta_prime", 0.0, auto_value)));
    }
    if (kv.has("split_impurity.beta")) {
        const double auto_value =
            ex.M >= 2 ? splitting_fit_coefficient(ex.M) * std::pow(ex.J, ex.M) /
                            std::pow(ex.U, ex.M - 1)
                      : 0.0;
        ex.schemes.push_back(SchemeDescriptor::split_impurity(
            kv.number_or_auto("split_impurity.beta", 0.0, auto_value)));
    }
    if (kv.has("minimal_engineered.J0")) {
        const double J0 = kv.number("minimal_engineered.J0", ex.J);
        const auto [b1, b2] = ex.M >= 2 ? minimal_engineering_fields(ex.M, ex.J, J0, ex.U)
                                        : std::pair<double, double>{0.0, 0.0};
        ex.schemes.push_back(SchemeDescriptor::minimal_engineered(
            J0, kv.number_or_auto("minimal_engineered.beta1", 0.0, b1),
            kv.number_or_auto("minimal_engineered.beta2", 0.0, b2)));
    }
    if (kv.has("even_chain.variant")) {
        const std::string variant = kv.raw("even_chain.variant");
        if (variant != "printed" && variant != "corrected")
            throw ConfigError("config: key 'even_chain.variant' expects printed or corrected");
        const auto [jm, b1, b2] = variant == "printed" ? even_chain_scheme(ex.J, ex.U)
                                                       : even_chain_scheme_corrected(ex.J, ex.U);
        ex.schemes.push_back(SchemeDescriptor::even_chain(jm, b1, b2));
    }

    const double pi = std::acos(-1.0);
    const double phi_min = kv.number("phi_min", -2.0 * pi);
    const double phi_max = kv.number("phi_max", 2.0 * pi);
    const int phi_points = kv.integer("phi_points", 201);
    if (phi_points < 2 || phi_max <= phi_min)
        throw ConfigError("config: constraint violated: phi grid must be increasing");
    rc.phi_grid = linspace(phi_min, phi_max, phi_points);

    rc.gamma_list = detail::parse_list("gamma_list", kv.raw("gamma_list", ""));
    for (double g : rc.gamma_list)
        if (g < 0) throw ConfigError("config: constraint violated: gamma_list entries >= 0");
    rc.u_list = detail::parse_list("u_list", kv.raw("u_list", ""));
    for (double u : rc.u_list)
        if (u <= 0) throw ConfigError("config: constraint violated: u_list entries > 0");

    if (kv.has("dyson_order")) {
        if (kv.raw("dyson_order") == "auto") rc.dyson_order = -1;
        else {
            rc.dyson_order = kv.integer("dyson_order", -1);
            if (rc.dyson_order < 0)
                throw ConfigError("config: constraint violated: dyson_order >= 0");
        }
    }
    rc.fisher_phi = kv.number("fisher_phi", 0.0);

    kv.finish();
    rc.echo = kv.all();
    return rc;
}

inline RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

/// Built-in figure catalog; --preset expands to one of these texts. The same
/// texts are checked into presets/.
inline const std::map<std::string, std::string>& preset_catalog() {
    static const std::map<std::string, std::string> presets = {
        {"fig2",
         "# bound-pair transfer with the edge-unlocking field\n"
         "L = 5\nM = 2\nJ = 1\nU = 5\n"
         "edge_unlocked.beta_prime = auto\n"},
        {"fig2_locked",
         "# bound-pair transfer without unlocking (edge-locking signature)\n"
         "L = 5\nM = 2\nJ = 1\nU = 5\n"},
        {"fig5",
         "# balanced pair splitting; barrier from the L = 5 finite-size fit\n"
         "L = 5\nM = 2\nJ = 1\nU = 5\n"
         "edge_unlocked.beta_prime = auto\n"
         "split_impurity.beta = 0.0789\n"},
        {"fig6",
         "# balanced-barrier fit across interactions, M = 2\n"
         "L = 5\nM = 2\nJ = 1\nU = 5\n"
         "edge_unlocked.beta_prime = auto\n"
         "u_list = 5, 8, 10, 15, 20\n"},
        {"fig7",
         "# balanced triple splitting\n"
         "L = 5\nM = 3\nJ = 1\nU = 5\n"
         "edge_unlocked.beta_prime = auto\n"
         "split_impurity.beta = auto\n"},
        {"fig8",
         "# balanced-barrier fit across interactions, M = 3\n"
         "L = 5\nM = 3\nJ = 1\nU = 5\n"
         "edge_unlocked.beta_prime = auto\n"
         "u_list = 5, 8, 10, 15, 20\n"},
        {"fig9",
         "# interferometer fringes for the generated pair state\n"
         "L = 5\nM = 2\nJ = 1\nU = 5\n"
         "edge_unlocked.beta_prime = auto\n"
         "split_impurity.beta = auto\n"
         "phi_points = 201\n"},
        {"fig10",
         "# phase-estimation precision across interactions, M = 2\n"
         "L = 5\nM = 2\nJ = 1\nU = 5\n"
         "edge_unlocked.beta_prime = auto\n"
         "split_impurity.beta = auto\n"
         "u_list = 5, 8, 10, 15, 20\n"},
        {"fig10_m3",
         "# phase-estimation precision across interactions, M = 3\n"
         "L = 5\nM = 3\nJ = 1\nU = 5\n"
         "edge_unlocked.beta_prime = auto\n"
         "split_impurity.beta = auto\n"
         "u_list = 5, 8, 10\n"},
        {"deco_m2",
         "# dephasing robustness of pair transfer\n"
         "L = 5\nM = 2\nJ = 1\nU = 3\n"
         "edge_unlocked.beta_prime = auto\n"
         "gamma_list = 0, 1e-4, 1e-3\n"},
        {"deco_m3",
         "# dephasing robustness of triple transfer\n"
         "L = 5\nM = 3\nJ = 1\nU = 2\n"
         "edge_unlocked.beta_prime = auto\n"
         "gamma_list = 0, 1e-5, 1e-4\n"},
    };
    return presets;
}

inline RunConfig load_preset(const std::string& name) {
    const auto& cat = preset_catalog();
    auto it = cat.find(name);
    if (it == cat.end()) {
        std::string known;
        for (const auto& [k, v] : cat) known += (known.empty() ? "" : ", ") + k;
        throw ConfigError("unknown preset '" + name + "' (available: " + known + ")");
    }
    return parse_config_text(it->second);
}

/// Shortest round-trip decimal form; locale-independent dot decimal.
inline std::string format_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

/// Single-table CSV writer: one header row, comma separated, no trailing
/// commas, deterministic %.12g numbers.
class CsvFile {
public:
    CsvFile(const std::filesystem::path& path, const std::vector<std::string>& header)
        : out_(path), columns_(header.size()) {
        if (!out_) throw std::runtime_error("cannot open output file " + path.string());
        write_strings(header);
    }

    void row(const std::vector<double>& values) {
        std::vector<std::string> cells;
        cells.reserve(values.size());
        for (double v : values) cells.push_back(format_number(v));
        write_strings(cells);
    }

private:
    void write_strings(const std::vector<std::string>& cells) {
        if (cells.size() != columns_)
            throw std::runtime_error("CSV row width does not match the header");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    std::ofstream out_;
    std::size_t columns_;
};

struct RunManifest {
    std::string kind;
    std::map<std::string, std::string> config_echo;
    std::vector<std::string> outputs;
};

inline constexpr const char* kVersion = "0.1.0";

inline void write_manifest(const std::filesystem::path& out_dir, const RunManifest& manifest) {
    nlohmann::json j;
    j["kind"] = manifest.kind;
    j["version"] = kVersion;
    j["config"] = manifest.config_echo;
    j["outputs"] = manifest.outputs;
    char stamp[32];
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    j["timestamp"] = stamp;
    std::ofstream out(out_dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest in " + out_dir.string());
    out << j.dump(2) << '\n';
}

}  // namespace boundwalk
