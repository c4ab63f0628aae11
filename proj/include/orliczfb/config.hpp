#pragma once

// Experiment configuration in flat `key = value` text.  '#' starts a
// comment.  Keys:
//
//   g, beta                      text expressions (see expression.hpp)
//   domain.kind                  interval | radial | rectangle
//   domain.x_lo, domain.x_hi     interval and rectangle
//   domain.y_lo, domain.y_hi     rectangle
//   domain.r_lo, domain.r_hi     radial
//   domain.dim                   radial
//   domain.nodes                 interval and radial
//   domain.nx, domain.ny         rectangle
//   bc.left, bc.right            dirichlet(v) | natural
//   bc.bottom, bc.top            rectangle only
//   eps_schedule                 comma-separated, strictly decreasing
//   solver.tol                   default 1e-9
//   solver.max_iter              default 200
//   solver.reg_min               default 10
//   solver.reg_n                 fixed n; default max(reg_min, 1/eps)
//   verify.tau                   default: the final eps
//   verify.band                  lo,hi fractions of max u; default 0.3,0.7
//   verify.radii                 default: 10h, 20h, 40h, ... up to 0.2
//   verify.deltas                default: 2h,4h,8h
//   verify.R                     default 0.25
//   verify.t_max                 default 0.25
//   check.t_min, check.t_max     default 1e-4, 1e4
//   check.samples                default 2000
//   output.dir                   default "out"
//   parallel                     true | false, default false

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "expression.hpp"
#include "mesh.hpp"
#include "numerics.hpp"
#include "solver.hpp"

namespace orliczfb {

struct VerifyOptions {
    std::optional<double> tau;
    double band_lo = 0.3;
    double band_hi = 0.7;
    std::vector<double> radii;
    std::vector<double> deltas;
    double R = 0.25;
    double t_max = 0.25;
    friend bool operator==(const VerifyOptions&, const VerifyOptions&) = default;
};

struct CheckOptions {
    double t_min = 1e-4;
    double t_max = 1e4;
    std::size_t samples = 2000;
    friend bool operator==(const CheckOptions&, const CheckOptions&) = default;
};

struct ExperimentConfig {
    std::string g_expr;
    std::string beta_expr;
    Domain domain{Interval{0.0, 1.0, 2}};
    BoundaryData bc;
    std::vector<double> eps_schedule;
    SolverOptions solver;
    VerifyOptions verify;
    CheckOptions check;
    std::string output_dir = "out";
    bool parallel = false;
    /// Directory that relative table paths are resolved against.  Not emitted.
    std::filesystem::path base_dir;

    GFunction gfunction() const { return parse_gfunction(g_expr); }
    ReactionTerm reaction() const { return parse_reaction(beta_expr, base_dir); }

    friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
        return a.g_expr == b.g_expr && a.beta_expr == b.beta_expr && a.domain == b.domain && a.bc == b.bc &&
               a.eps_schedule == b.eps_schedule && a.solver == b.solver && a.verify == b.verify &&
               a.check == b.check && a.output_dir == b.output_dir && a.parallel == b.parallel;
    }
};

namespace config_detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::optional<double> to_number(const std::string& text) {
    std::string_view v = text;
    if (!v.empty() && v.front() == '+')
        v.remove_prefix(1);
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out))
        return std::nullopt;
    return out;
}

struct Entry {
    std::string value;
    std::size_t line;
};

class Reader {
public:
    explicit Reader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    std::optional<std::string> text(const std::string& key) {
        const auto it = entries_.find(key);
        if (it == entries_.end())
            return std::nullopt;
        used_.push_back(key);
        return it->second.value;
    }

    std::optional<double> number(const std::string& key) {
        const auto t = text(key);
        if (!t)
            return std::nullopt;
        const auto v = to_number(*t);
        if (!v)
            throw ParseError(line(key), key + ": expected a number, got '" + *t + "'");
        return v;
    }

    std::optional<std::size_t> count(const std::string& key) {
        const auto v = number(key);
        if (!v)
            return std::nullopt;
        if (*v < 0.0 || *v != std::floor(*v))
            throw ParseError(line(key), key + ": expected a nonnegative integer");
        return static_cast<std::size_t>(*v);
    }

    std::optional<std::vector<double>> list(const std::string& key) {
        const auto t = text(key);
        if (!t)
            return std::nullopt;
        std::vector<double> out;
        std::stringstream ss(*t);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto v = to_number(trim(item));
            if (!v)
                throw ParseError(line(key), key + ": expected a comma-separated list of numbers");
            out.push_back(*v);
        }
        return out;
    }

    std::optional<bool> boolean(const std::string& key) {
        const auto t = text(key);
        if (!t)
            return std::nullopt;
        if (*t == "true")
            return true;
        if (*t == "false")
            return false;
        throw ParseError(line(key), key + ": expected true or false");
    }

    std::optional<BoundaryCondition> boundary(const std::string& key) {
        const auto t = text(key);
        if (!t)
            return std::nullopt;
        if (*t == "natural")
            return BoundaryCondition{NaturalZeroFlux{}};
        const std::string head = "dirichlet(";
        if (t->rfind(head, 0) == 0 && t->back() == ')') {
            const auto v = to_number(trim(t->substr(head.size(), t->size() - head.size() - 1)));
            if (v)
                return BoundaryCondition{Dirichlet{*v}};
        }
        throw ParseError(line(key), key + ": expected dirichlet(<value>) or natural");
    }

    std::size_t line(const std::string& key) const { return entries_.at(key).line; }

    /// Keys present in the file but never read.
    std::vector<std::string> unused() const {
        std::vector<std::string> out;
        for (const auto& [k, e] : entries_)
            if (std::find(used_.begin(), used_.end(), k) == used_.end())
                out.push_back(k);
        return out;
    }

private:
    std::map<std::string, Entry> entries_;
    std::vector<std::string> used_;
};

inline const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys{
        "g",           "beta",           "domain.kind",   "domain.x_lo",   "domain.x_hi",  "domain.y_lo",
        "domain.y_hi", "domain.r_lo",    "domain.r_hi",   "domain.dim",    "domain.nodes", "domain.nx",
        "domain.ny",   "bc.left",        "bc.right",      "bc.bottom",     "bc.top",       "eps_schedule",
        "solver.tol",  "solver.max_iter", "solver.reg_min", "solver.reg_n", "verify.tau",   "verify.band",
        "verify.radii", "verify.deltas", "verify.R",      "verify.t_max",  "check.t_min",  "check.t_max",
        "check.samples", "output.dir",   "parallel"};
    return keys;
}

/// Type-checks every present value so malformed text is reported by line
/// even when the key would later be rejected as unused.
inline void check_syntax(const std::map<std::string, Entry>& entries) {
    Reader r(entries);
    for (const auto& [key, e] : entries) {
        if (key.rfind("bc.", 0) == 0)
            (void)r.boundary(key);
        else if (key == "eps_schedule" || key == "verify.band" || key == "verify.radii" || key == "verify.deltas")
            (void)r.list(key);
        else if (key == "domain.dim" || key == "domain.nodes" || key == "domain.nx" || key == "domain.ny" ||
                 key == "solver.max_iter" || key == "check.samples")
            (void)r.count(key);
        else if (key == "parallel")
            (void)r.boolean(key);
        else if (key != "g" && key != "beta" && key != "domain.kind" && key != "output.dir")
            (void)r.number(key);
    }
}

inline std::string list_text(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? "," : "") + numerics::format_shortest(v[i]);
    return out;
}

inline std::string boundary_text(const BoundaryCondition& c) {
    if (const auto* d = std::get_if<Dirichlet>(&c))
        return "dirichlet(" + numerics::format_shortest(d->value) + ")";
    return "natural";
}

} // namespace config_detail

/// Parses and validates configuration text.  Syntax problems raise
/// ParseError with the offending line; semantic problems raise a single
/// ValidationError listing every bad field.
inline ExperimentConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = {}) {
    using namespace config_detail;
    std::map<std::string, Entry> entries;
    std::istringstream in(text);
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(lineno, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto& keys = known_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw ParseError(lineno, "unknown key '" + key + "'");
        if (entries.count(key))
            throw ParseError(lineno, "duplicate key '" + key + "'");
        if (value.empty())
            throw ParseError(lineno, key + ": empty value");
        entries.emplace(key, Entry{value, lineno});
    }

    check_syntax(entries);
    Reader r(std::move(entries));
    ExperimentConfig cfg;
    cfg.base_dir = base_dir;
    std::vector<std::string> bad;
    std::vector<std::string> why;
    auto fail = [&](const std::string& field, const std::string& msg) {
        bad.push_back(field);
        why.push_back(field + ": " + msg);
    };

    if (auto g = r.text("g")) {
        cfg.g_expr = *g;
        try {
            (void)cfg.gfunction();
        } catch (const std::exception& e) {
            fail("g", e.what());
        }
    } else {
        fail("g", "missing");
    }
    if (auto b = r.text("beta")) {
        cfg.beta_expr = *b;
        try {
            (void)cfg.reaction();
        } catch (const std::exception& e) {
            fail("beta", e.what());
        }
    } else {
        fail("beta", "missing");
    }

    const auto kind = r.text("domain.kind");
    auto need = [&](const std::string& key) {
        auto v = r.number(key);
        if (!v)
            fail(key, "missing");
        return v.value_or(0.0);
    };
    auto need_count = [&](const std::string& key) {
        auto v = r.count(key);
        if (!v)
            fail(key, "missing");
        return v.value_or(0);
    };
    std::optional<Domain::Kind> dk;
    if (!kind) {
        fail("domain.kind", "missing");
    } else if (*kind == "interval") {
        Interval k{need("domain.x_lo"), need("domain.x_hi"), need_count("domain.nodes")};
        dk = k;
    } else if (*kind == "radial") {
        const double lo = need("domain.r_lo");
        const double hi = need("domain.r_hi");
        const auto dim = need_count("domain.dim");
        dk = Radial{lo, hi, static_cast<int>(dim), need_count("domain.nodes")};
    } else if (*kind == "rectangle") {
        const double xl = need("domain.x_lo");
        const double xh = need("domain.x_hi");
        const double yl = need("domain.y_lo");
        const double yh = need("domain.y_hi");
        const auto nx = need_count("domain.nx");
        dk = Rectangle{xl, xh, yl, yh, nx, need_count("domain.ny")};
    } else {
        fail("domain.kind", "expected interval, radial or rectangle");
    }
    const std::size_t bad_before_domain = bad.size();
    if (dk && std::none_of(bad.begin(), bad.end(), [](const std::string& f) { return f.rfind("domain.", 0) == 0; })) {
        try {
            cfg.domain = Domain(*dk);
        } catch (const std::exception& e) {
            fail("domain", e.what());
        }
    }

    const bool planar = dk && std::holds_alternative<Rectangle>(*dk);
    if (auto c = r.boundary("bc.left"))
        cfg.bc.left = *c;
    if (auto c = r.boundary("bc.right"))
        cfg.bc.right = *c;
    if (planar) {
        if (auto c = r.boundary("bc.bottom"))
            cfg.bc.bottom = *c;
        if (auto c = r.boundary("bc.top"))
            cfg.bc.top = *c;
    }
    if (bad.size() == bad_before_domain && dk) {
        try {
            validate_boundary(cfg.domain, cfg.bc);
        } catch (const std::exception& e) {
            fail("bc", e.what());
        }
    }

    if (auto eps = r.list("eps_schedule")) {
        cfg.eps_schedule = *eps;
        try {
            validate_schedule(cfg.eps_schedule);
        } catch (const std::exception& e) {
            std::string msg = e.what();
            if (msg.rfind("epsilon schedule ", 0) == 0)
                msg = msg.substr(17);
            fail("eps_schedule", msg);
        }
    } else {
        fail("eps_schedule", "missing");
    }

    if (auto v = r.number("solver.tol")) {
        cfg.solver.tolerance = *v;
        if (!(*v > 0.0))
            fail("solver.tol", "must be positive");
    }
    if (auto v = r.count("solver.max_iter")) {
        cfg.solver.max_iterations = *v;
        if (*v == 0)
            fail("solver.max_iter", "must be positive");
    }
    if (auto v = r.number("solver.reg_min")) {
        cfg.solver.reg_min = *v;
        if (!(*v > 0.0))
            fail("solver.reg_min", "must be positive");
    }
    if (auto v = r.number("solver.reg_n")) {
        cfg.solver.reg_n = *v;
        if (!(*v > 0.0))
            fail("solver.reg_n", "must be positive");
    }

    if (auto v = r.number("verify.tau")) {
        cfg.verify.tau = *v;
        if (!(*v > 0.0))
            fail("verify.tau", "must be positive");
    }
    if (auto v = r.list("verify.band")) {
        if (v->size() != 2 || !((*v)[0] > 0.0 && (*v)[0] < (*v)[1] && (*v)[1] < 1.0))
            fail("verify.band", "expected lo,hi with 0 < lo < hi < 1");
        else
            std::tie(cfg.verify.band_lo, cfg.verify.band_hi) = std::pair((*v)[0], (*v)[1]);
    }
    if (auto v = r.list("verify.radii")) {
        cfg.verify.radii = *v;
        if (std::any_of(v->begin(), v->end(), [](double x) { return !(x > 0.0); }))
            fail("verify.radii", "must be positive");
    }
    if (auto v = r.list("verify.deltas")) {
        cfg.verify.deltas = *v;
        if (std::any_of(v->begin(), v->end(), [](double x) { return !(x > 0.0); }))
            fail("verify.deltas", "must be positive");
    }
    if (auto v = r.number("verify.R")) {
        cfg.verify.R = *v;
        if (!(*v > 0.0))
            fail("verify.R", "must be positive");
    }
    if (auto v = r.number("verify.t_max")) {
        cfg.verify.t_max = *v;
        if (!(*v > 0.0))
            fail("verify.t_max", "must be positive");
    }

    if (auto v = r.number("check.t_min"))
        cfg.check.t_min = *v;
    if (auto v = r.number("check.t_max"))
        cfg.check.t_max = *v;
    if (!(cfg.check.t_min > 0.0 && cfg.check.t_min < cfg.check.t_max))
        fail("check.t_min", "expected 0 < check.t_min < check.t_max");
    if (auto v = r.count("check.samples")) {
        cfg.check.samples = *v;
        if (*v < 2)
            fail("check.samples", "must be at least 2");
    }

    if (auto v = r.text("output.dir"))
        cfg.output_dir = *v;
    if (auto v = r.boolean("parallel"))
        cfg.parallel = *v;

    for (const auto& key : r.unused())
        fail(key, "not used by a " + kind.value_or("missing") + " domain");

    if (!bad.empty()) {
        std::string msg;
        for (const auto& w : why)
            msg += (msg.empty() ? "" : "; ") + w;
        throw ValidationError(bad, msg);
    }
    return cfg;
}

inline ExperimentConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError(0, "cannot open config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.parent_path());
}

/// Canonical text: every key in a fixed order, defaults written out.
inline std::string emit_config(const ExperimentConfig& cfg) {
    using config_detail::boundary_text;
    using config_detail::list_text;
    using numerics::format_shortest;
    std::ostringstream out;
    out << "g = " << cfg.g_expr << "\n";
    out << "beta = " << cfg.beta_expr << "\n";
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Interval>) {
                out << "domain.kind = interval\n";
                out << "domain.x_lo = " << format_shortest(k.x_lo) << "\n";
                out << "domain.x_hi = " << format_shortest(k.x_hi) << "\n";
                out << "domain.nodes = " << k.nodes << "\n";
            } else if constexpr (std::is_same_v<T, Radial>) {
                out << "domain.kind = radial\n";
                out << "domain.r_lo = " << format_shortest(k.r_lo) << "\n";
                out << "domain.r_hi = " << format_shortest(k.r_hi) << "\n";
                out << "domain.dim = " << k.dim << "\n";
                out << "domain.nodes = " << k.nodes << "\n";
            } else {
                out << "domain.kind = rectangle\n";
                out << "domain.x_lo = " << format_shortest(k.x_lo) << "\n";
                out << "domain.x_hi = " << format_shortest(k.x_hi) << "\n";
                out << "domain.y_lo = " << format_shortest(k.y_lo) << "\n";
                out << "domain.y_hi = " << format_shortest(k.y_hi) << "\n";
                out << "domain.nx = " << k.nx << "\n";
                out << "domain.ny = " << k.ny << "\n";
            }
        },
        cfg.domain.kind());
    out << "bc.left = " << boundary_text(cfg.bc.left) << "\n";
    out << "bc.right = " << boundary_text(cfg.bc.right) << "\n";
    if (cfg.domain.is_planar()) {
        out << "bc.bottom = " << boundary_text(cfg.bc.bottom) << "\n";
        out << "bc.top = " << boundary_text(cfg.bc.top) << "\n";
    }
    out << "eps_schedule = " << list_text(cfg.eps_schedule) << "\n";
    out << "solver.tol = " << format_shortest(cfg.solver.tolerance) << "\n";
    out << "solver.max_iter = " << cfg.solver.max_iterations << "\n";
    out << "solver.reg_min = " << format_shortest(cfg.solver.reg_min) << "\n";
    if (cfg.solver.reg_n)
        out << "solver.reg_n = " << format_shortest(*cfg.solver.reg_n) << "\n";
    if (cfg.verify.tau)
        out << "verify.tau = " << format_shortest(*cfg.verify.tau) << "\n";
    out << "verify.band = " << list_text({cfg.verify.band_lo, cfg.verify.band_hi}) << "\n";
    if (!cfg.verify.radii.empty())
        out << "verify.radii = " << list_text(cfg.verify.radii) << "\n";
    if (!cfg.verify.deltas.empty())
        out << "verify.deltas = " << list_text(cfg.verify.deltas) << "\n";
    out << "verify.R = " << format_shortest(cfg.verify.R) << "\n";
    out << "verify.t_max = " << format_shortest(cfg.verify.t_max) << "\n";
    out << "check.t_min = " << format_shortest(cfg.check.t_min) << "\n";
    out << "check.t_max = " << format_shortest(cfg.check.t_max) << "\n";
    out << "check.samples = " << cfg.check.samples << "\n";
    out << "output.dir = " << cfg.output_dir << "\n";
    out << "parallel = " << (cfg.parallel ? "true" : "false") << "\n";
    return out.str();
}

} // namespace orliczfb
