#pragma once

#include "hyprelax/errors.hpp"
#include "hyprelax/euler.hpp"
#include "hyprelax/relax.hpp"
#include "hyprelax/system.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace hyprelax {

/// Sectioned key-value document. Sections keep insertion order so that the
/// emitted canonical text is stable; parse(emit(cfg)) == cfg.
class RunConfiguration {
public:
    struct Section {
        std::string name;
        std::vector<std::pair<std::string, std::string>> entries;

        bool has(const std::string& key) const {
            for (const auto& [k, v] : entries)
                if (k == key) return true;
            return false;
        }
    };

    static RunConfiguration parse(std::istream& in) {
        RunConfiguration cfg;
        std::string line;
        Section* cur = nullptr;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string t = strip(strip_comment(line));
            if (t.empty()) continue;
            if (t.front() == '[') {
                if (t.back() != ']')
                    throw ConfigError("config line " + std::to_string(lineno) + ": bad section header");
                cur = &cfg.section(strip(t.substr(1, t.size() - 2)));
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
            if (!cur) throw ConfigError("config line " + std::to_string(lineno) + ": key outside any section");
            const std::string key = strip(t.substr(0, eq));
            const std::string value = strip(t.substr(eq + 1));
            if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
            if (cur->has(key))
                throw ConfigError("config: duplicate key '" + key + "' in [" + cur->name + "]");
            cur->entries.emplace_back(key, value);
        }
        return cfg;
    }

    static RunConfiguration parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("config: cannot open '" + path + "'");
        return parse(in);
    }

    static RunConfiguration parse_string(const std::string& text) {
        std::istringstream in(text);
        return parse(in);
    }

    std::string emit() const {
        std::ostringstream out;
        bool first = true;
        for (const auto& sec : sections_) {
            if (!first) out << "\n";
            first = false;
            out << "[" << sec.name << "]\n";
            for (const auto& [k, v] : sec.entries) out << k << " = " << v << "\n";
        }
        return out.str();
    }

    bool operator==(const RunConfiguration& o) const {
        if (sections_.size() != o.sections_.size()) return false;
        for (std::size_t i = 0; i < sections_.size(); ++i)
            if (sections_[i].name != o.sections_[i].name ||
                sections_[i].entries != o.sections_[i].entries)
                return false;
        return true;
    }

    bool has_section(const std::string& name) const {
        return std::any_of(sections_.begin(), sections_.end(),
                           [&](const Section& s) { return s.name == name; });
    }

    Section& section(const std::string& name) {
        for (auto& s : sections_)
            if (s.name == name) return s;
        sections_.push_back({name, {}});
        return sections_.back();
    }

    const Section* find_section(const std::string& name) const {
        for (const auto& s : sections_)
            if (s.name == name) return &s;
        return nullptr;
    }

    const std::vector<Section>& sections() const { return sections_; }

    void set(const std::string& sec, const std::string& key, const std::string& value) {
        auto& s = section(sec);
        for (auto& [k, v] : s.entries)
            if (k == key) {
                v = value;
                return;
            }
        s.entries.emplace_back(key, value);
    }

private:
    static std::string strip_comment(const std::string& s) {
        const auto pos = s.find('#');
        return pos == std::string::npos ? s : s.substr(0, pos);
    }
    static std::string strip(const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        const auto b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }

    std::vector<Section> sections_;

    friend class SectionReader;
};

/// Strict reader over one section: every key must be consumed or the
/// configuration is rejected.
class SectionReader {
public:
    SectionReader(const RunConfiguration& cfg, const std::string& name) : name_(name) {
        const auto* sec = cfg.find_section(name);
        if (sec)
            for (const auto& [k, v] : sec->entries) pending_.emplace(k, v);
    }

    bool empty() const { return pending_.empty(); }

    std::optional<std::string> take(const std::string& key) {
        auto it = pending_.find(key);
        if (it == pending_.end()) return std::nullopt;
        std::string v = it->second;
        pending_.erase(it);
        return v;
    }

    std::string require(const std::string& key) {
        auto v = take(key);
        if (!v) throw ConfigError("config: missing key '" + key + "' in [" + name_ + "]");
        return *v;
    }

    double number(const std::string& key, std::optional<double> def = std::nullopt) {
        auto v = take(key);
        if (!v) {
            if (def) return *def;
            throw ConfigError("config: missing key '" + key + "' in [" + name_ + "]");
        }
        return to_number(*v, key);
    }

    long integer(const std::string& key, std::optional<long> def = std::nullopt) {
        const double x = number(key, def ? std::optional<double>(static_cast<double>(*def))
                                         : std::nullopt);
        const long n = std::lround(x);
        if (x != static_cast<double>(n))
            throw ConfigError("config: key '" + key + "' must be an integer");
        return n;
    }

    bool boolean(const std::string& key, std::optional<bool> def = std::nullopt) {
        auto v = take(key);
        if (!v) {
            if (def) return *def;
            throw ConfigError("config: missing key '" + key + "' in [" + name_ + "]");
        }
        if (*v == "true" || *v == "1") return true;
        if (*v == "false" || *v == "0") return false;
        throw ConfigError("config: key '" + key + "' must be true or false");
    }

    std::string text(const std::string& key, std::optional<std::string> def = std::nullopt) {
        auto v = take(key);
        if (v) return *v;
        if (def) return *def;
        throw ConfigError("config: missing key '" + key + "' in [" + name_ + "]");
    }

    std::vector<double> numbers(const std::string& key,
                                std::optional<std::vector<double>> def = std::nullopt) {
        auto v = take(key);
        if (!v) {
            if (def) return *def;
            throw ConfigError("config: missing key '" + key + "' in [" + name_ + "]");
        }
        return parse_list(*v, key);
    }

    void finish() const {
        if (!pending_.empty())
            throw ConfigError("config: unknown key '" + pending_.begin()->first + "' in [" + name_ +
                              "]");
    }

    static std::vector<double> parse_list(const std::string& raw, const std::string& key) {
        std::string s = raw;
        if (s.size() < 2 || s.front() != '[' || s.back() != ']')
            throw ConfigError("config: key '" + key + "' must be a bracketed list");
        s = s.substr(1, s.size() - 2);
        std::vector<double> out;
        std::string item;
        std::istringstream iss(s);
        while (std::getline(iss, item, ',')) {
            const auto a = item.find_first_not_of(" \t");
            if (a == std::string::npos) continue;
            const auto b = item.find_last_not_of(" \t");
            out.push_back(to_number(item.substr(a, b - a + 1), key));
        }
        return out;
    }

private:
    static double to_number(const std::string& s, const std::string& key) {
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(s, &used);
        } catch (const std::exception&) {
            throw ConfigError("config: key '" + key + "' has a non-numeric value '" + s + "'");
        }
        if (used != s.size())
            throw ConfigError("config: key '" + key + "' has trailing characters in '" + s + "'");
        return x;
    }

    std::string name_;
    std::map<std::string, std::string> pending_;
};

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string format_list(const std::vector<double>& xs) {
    std::string out = "[";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ", ";
        out += format_double(xs[i]);
    }
    return out + "]";
}

// ---------------------------------------------------------------------------
// schema bindings

inline EulerParams euler_params_from(const RunConfiguration& cfg, double* d_out = nullptr) {
    SectionReader r(cfg, "euler");
    EulerParams p;
    p.gamma = r.number("gamma", 2.0);
    p.A = r.number("A", 0.5);
    p.rho_bar = r.number("rho_bar", 1.0);
    p.epsilon = r.number("epsilon", 1.0);
    const long d = r.integer("d", 1L);
    if (d_out) *d_out = static_cast<double>(d);
    r.finish();
    p.check();
    return p;
}

/// Load a system from the explicit [system] section, or build the gas system
/// from [euler].
inline PartiallyDissipativeSystem system_from(const RunConfiguration& cfg) {
    if (cfg.has_section("system")) {
        SectionReader r(cfg, "system");
        PartiallyDissipativeSystem sys;
        sys.d = static_cast<int>(r.integer("d", 1L));
        sys.n1 = static_cast<int>(r.integer("n1"));
        sys.n2 = static_cast<int>(r.integer("n2"));
        const int n = sys.n1 + sys.n2;
        auto to_matrix = [&](const std::vector<double>& flat, const std::string& key) {
            if (static_cast<int>(flat.size()) != n * n)
                throw ConfigError("config: matrix '" + key + "' must have " + std::to_string(n * n) +
                                  " entries (row-major)");
            Mat m(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) m(i, j) = flat[static_cast<std::size_t>(i * n + j)];
            return m;
        };
        for (int k = 1; k <= sys.d; ++k) {
            const std::string key = "A_bar_" + std::to_string(k);
            sys.A_bar.push_back(to_matrix(r.numbers(key), key));
        }
        sys.T.assign(static_cast<std::size_t>(sys.d), {});
        for (int k = 1; k <= sys.d; ++k)
            for (int m = 1; m <= n; ++m) {
                const std::string key = "T_" + std::to_string(k) + "_" + std::to_string(m);
                sys.T[static_cast<std::size_t>(k - 1)].push_back(to_matrix(r.numbers(key), key));
            }
        sys.L = to_matrix(r.numbers("L"), "L");
        r.finish();
        sys.check_dimensions();
        return sys;
    }
    if (cfg.has_section("euler")) {
        double d = 1.0;
        const EulerParams p = euler_params_from(cfg, &d);
        return euler_system(p, static_cast<int>(d));
    }
    throw ConfigError("config: need a [system] or [euler] section");
}

inline RunConfiguration system_to_config(const PartiallyDissipativeSystem& sys) {
    sys.check_dimensions();
    RunConfiguration cfg;
    auto& sec = cfg.section("system");
    auto put = [&](const std::string& k, const std::string& v) { sec.entries.emplace_back(k, v); };
    put("d", std::to_string(sys.d));
    put("n1", std::to_string(sys.n1));
    put("n2", std::to_string(sys.n2));
    auto flat = [](const Mat& m) {
        std::vector<double> out;
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
        return out;
    };
    for (int k = 0; k < sys.d; ++k)
        put("A_bar_" + std::to_string(k + 1), format_list(flat(sys.A_bar[static_cast<std::size_t>(k)])));
    for (int k = 0; k < sys.d; ++k)
        for (int m = 0; m < sys.n(); ++m)
            put("T_" + std::to_string(k + 1) + "_" + std::to_string(m + 1),
                format_list(flat(sys.T[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)])));
    put("L", format_list(flat(sys.L)));
    return cfg;
}

inline TorusGrid grid_from(const RunConfiguration& cfg, int default_d = 1) {
    SectionReader r(cfg, "grid");
    TorusGrid g;
    g.d = static_cast<int>(r.integer("d", static_cast<long>(default_d)));
    g.N = static_cast<int>(r.integer("N", 256L));
    g.L_len = r.number("L_len", 1.0);
    r.finish();
    g.check();
    return g;
}

struct SolverFileConfig {
    SolverConfig solver;
    InitOptions init;
    std::string csv_path;        ///< empty means stdout
    std::string snapshot_prefix; ///< empty disables snapshots
    int snapshot_every = 0;
};

inline SolverFileConfig solver_from(const RunConfiguration& cfg, const TorusGrid& grid,
                                    double epsilon) {
    SolverFileConfig out;
    SectionReader r(cfg, "solver");
    out.solver.grid = grid;
    out.solver.dt = r.number("dt", 1e-3);
    out.solver.T = r.number("T", 1.0);
    out.solver.dealias = r.boolean("dealias", true);
    out.solver.rescaled = r.boolean("rescaled", false);
    out.solver.diag_every = static_cast<int>(r.integer("diag_every", 1L));
    const std::string scheme = r.text("scheme", "ifrk4");
    if (scheme == "ifrk4")
        out.solver.scheme = Scheme::IfRk4;
    else if (scheme == "linear-exact")
        out.solver.scheme = Scheme::LinearExact;
    else
        throw ConfigError("config: scheme must be ifrk4 or linear-exact");
    r.finish();

    SectionReader d(cfg, "diagnostics");
    out.solver.besov_p = d.number("p", 2.0);
    const int k_p = static_cast<int>(d.integer("k_p", 2L));
    out.solver.split_J = threshold(epsilon, k_p);
    out.csv_path = d.text("csv", "");
    out.snapshot_prefix = d.text("snapshots", "");
    out.snapshot_every = static_cast<int>(d.integer("snapshot_every", 0L));
    d.finish();

    SectionReader i(cfg, "init");
    const std::string kind = i.text("kind", "random-band");
    if (kind == "mode")
        out.init.kind = InitKind::Mode;
    else if (kind == "random-band")
        out.init.kind = InitKind::RandomBand;
    else
        throw ConfigError("config: init kind must be mode or random-band");
    out.init.amplitude = i.number("amplitude", 1e-2);
    out.init.seed = static_cast<std::uint64_t>(i.integer("seed", 1L));
    out.init.mode_k = static_cast<int>(i.integer("mode_k", 1L));
    out.init.band_j_lo = static_cast<int>(i.integer("band_j_lo", 1L));
    out.init.band_j_hi = static_cast<int>(i.integer("band_j_hi", 3L));
    out.init.with_velocity = i.boolean("with_velocity", false);
    i.finish();
    return out;
}

inline SweepConfig sweep_from(const RunConfiguration& cfg) {
    SweepConfig sw;
    double d = 1.0;
    if (cfg.has_section("euler")) sw.params = euler_params_from(cfg, &d);
    sw.grid = grid_from(cfg, static_cast<int>(d));
    SectionReader r(cfg, "sweep");
    sw.epsilons = r.numbers("epsilons", {{0.2, 0.1, 0.05, 0.025}});
    sw.p = r.number("p", 2.0);
    sw.k_p = static_cast<int>(r.integer("k_p", 2L));
    sw.amplitude = r.number("amplitude", 1e-2);
    sw.seed = static_cast<std::uint64_t>(r.integer("seed", 1L));
    sw.T = r.number("T", 1.0);
    sw.band_j_lo = static_cast<int>(r.integer("band_j_lo", 0L));
    sw.band_j_hi = static_cast<int>(r.integer("band_j_hi", 2L));
    sw.dt = r.number("dt", 0.0);
    sw.diag_every = static_cast<int>(r.integer("diag_every", 2L));
    sw.density_offset_eps_scale = r.number("density_offset_eps_scale", 0.0);
    const std::string vel = r.text("velocity", "darcy");
    if (vel == "darcy")
        sw.velocity = VelocityPrep::Darcy;
    else if (vel == "zero")
        sw.velocity = VelocityPrep::Zero;
    else if (vel == "fixed-unrescaled")
        sw.velocity = VelocityPrep::FixedUnrescaled;
    else
        throw ConfigError("config: velocity must be darcy, zero or fixed-unrescaled");
    r.finish();
    sw.check();
    return sw;
}

/// Canonical resolved form of the sweep configuration, embedded in output
/// headers so that results are self-describing.
inline RunConfiguration sweep_to_config(const SweepConfig& sw) {
    RunConfiguration cfg;
    auto& e = cfg.section("euler");
    e.entries = {{"gamma", format_double(sw.params.gamma)},
                 {"A", format_double(sw.params.A)},
                 {"rho_bar", format_double(sw.params.rho_bar)},
                 {"epsilon", format_double(sw.params.epsilon)},
                 {"d", std::to_string(sw.grid.d)}};
    auto& g = cfg.section("grid");
    g.entries = {{"d", std::to_string(sw.grid.d)},
                 {"N", std::to_string(sw.grid.N)},
                 {"L_len", format_double(sw.grid.L_len)}};
    auto& s = cfg.section("sweep");
    s.entries = {{"epsilons", format_list(sw.epsilons)},
                 {"p", format_double(sw.p)},
                 {"k_p", std::to_string(sw.k_p)},
                 {"amplitude", format_double(sw.amplitude)},
                 {"seed", std::to_string(sw.seed)},
                 {"T", format_double(sw.T)},
                 {"velocity", to_string(sw.velocity)},
                 {"band_j_lo", std::to_string(sw.band_j_lo)},
                 {"band_j_hi", std::to_string(sw.band_j_hi)},
                 {"dt", format_double(sw.dt)},
                 {"diag_every", std::to_string(sw.diag_every)},
                 {"density_offset_eps_scale", format_double(sw.density_offset_eps_scale)}};
    return cfg;
}

// ---------------------------------------------------------------------------
// field files: little-endian int64 d, int64 N, double L_len, then N^d
// doubles of samples in row-major order.

inline void write_field(std::ostream& out, const SpectralField& f) {
    auto put64 = [&](std::int64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    put64(f.grid().d);
    put64(f.grid().N);
    const double L = f.grid().L_len;
    out.write(reinterpret_cast<const char*>(&L), 8);
    const auto& vals = f.values();
    out.write(reinterpret_cast<const char*>(vals.data()),
              static_cast<std::streamsize>(vals.size() * 8));
}

inline void write_field_file(const std::string& path, const SpectralField& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("field: cannot open '" + path + "' for writing");
    write_field(out, f);
}

inline SpectralField read_field(std::istream& in) {
    auto get64 = [&]() {
        std::int64_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    const std::int64_t d = get64();
    const std::int64_t N = get64();
    double L = 0.0;
    in.read(reinterpret_cast<char*>(&L), 8);
    if (!in) throw ConfigError("field: truncated header");
    TorusGrid grid(static_cast<int>(d), static_cast<int>(N), L);
    std::vector<double> vals(grid.size());
    in.read(reinterpret_cast<char*>(vals.data()), static_cast<std::streamsize>(vals.size() * 8));
    if (!in) throw ConfigError("field: truncated data");
    return SpectralField::from_values(grid, std::move(vals));
}

inline SpectralField read_field_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("field: cannot open '" + path + "'");
    return read_field(in);
}

/// One sample value per line; the line count must be a power of two.
inline SpectralField read_field_csv(const std::string& path, double L_len = 1.0) {
    std::ifstream in(path);
    if (!in) throw ConfigError("field: cannot open '" + path + "'");
    std::vector<double> vals;
    std::string line;
    while (std::getline(in, line)) {
        const auto a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos || line[a] == '#') continue;
        vals.push_back(std::stod(line));
    }
    TorusGrid grid(1, static_cast<int>(vals.size()), L_len);
    return SpectralField::from_values(grid, std::move(vals));
}

} // namespace hyprelax
