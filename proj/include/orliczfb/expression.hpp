#pragma once

// Text grammar for g and beta.
//
//   gexpr    := [number '*'] gcall
//   gcall    := 'power(' p ')'
//             | 'powerlog(' a ',' b ',' c ')'
//             | 'piecewise(' c1 ',' a1 ',' a2 ',' knot ')'
//             | 'sum(' gexpr {',' gexpr} ')'
//             | 'product(' gexpr ',' gexpr ')'
//             | 'compose(' outer ',' inner ')'
//             | 'scale(' c ',' gexpr ')'
//             | 'bounds(' delta ',' g0 ',' gexpr ')'
//   betaexpr := 'polybump(' c ')' | 'sinebump(' c ')' | 'table(' path ')'
//             | 'scale(' k ',' betaexpr ')'
//
// Whitespace is ignored except inside table paths.  A leading `w*` outside
// a sum is shorthand for scale(w, ...).

#include <cctype>
#include <charconv>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "gfunc.hpp"
#include "reaction.hpp"

namespace orliczfb {

namespace expr_detail {

class Cursor {
public:
    explicit Cursor(std::string_view text) : text_(text) {}

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }
    bool done() {
        skip_ws();
        return pos_ >= text_.size();
    }
    bool peek(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }
    void expect(char c) {
        if (!peek(c))
            fail(std::string("expected '") + c + "'");
        ++pos_;
    }
    bool accept(char c) {
        if (!peek(c))
            return false;
        ++pos_;
        return true;
    }
    std::string identifier() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        if (start == pos_)
            fail("expected a function name");
        return std::string(text_.substr(start, pos_ - start));
    }
    bool at_number() {
        skip_ws();
        return pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' || text_[pos_] == '-' ||
                text_[pos_] == '+');
    }
    double number() {
        skip_ws();
        std::size_t p = pos_;
        if (p < text_.size() && text_[p] == '+')
            ++p;
        double v = 0.0;
        const auto res = std::from_chars(text_.data() + p, text_.data() + text_.size(), v);
        if (res.ec != std::errc())
            fail("expected a number");
        pos_ = static_cast<std::size_t>(res.ptr - text_.data());
        return v;
    }
    /// Raw text up to the matching ')', trimmed.
    std::string raw_until_close() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != ')')
            ++pos_;
        if (pos_ >= text_.size())
            fail("unterminated argument");
        std::string out(text_.substr(start, pos_ - start));
        const auto b = out.find_first_not_of(" \t");
        const auto e = out.find_last_not_of(" \t");
        return b == std::string::npos ? std::string() : out.substr(b, e - b + 1);
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw DomainError("expression '" + std::string(text_) + "' at offset " + std::to_string(pos_) + ": " + what);
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

inline std::vector<double> numbers(Cursor& c, std::size_t count) {
    std::vector<double> out;
    for (std::size_t i = 0; i < count; ++i) {
        if (i)
            c.expect(',');
        out.push_back(c.number());
    }
    return out;
}

GFunction parse_g(Cursor& c);

inline GFunction parse_g_call(Cursor& c) {
    const std::string name = c.identifier();
    c.expect('(');
    GFunction out = [&]() -> GFunction {
        if (name == "power")
            return GFunction::power(numbers(c, 1)[0]);
        if (name == "powerlog") {
            const auto a = numbers(c, 3);
            return GFunction::power_log(a[0], a[1], a[2]);
        }
        if (name == "piecewise") {
            const auto a = numbers(c, 4);
            return GFunction::piecewise_power(a[0], a[1], a[2], a[3]);
        }
        if (name == "sum") {
            std::vector<std::pair<double, GFunction>> terms;
            do {
                double w = 1.0;
                if (c.at_number()) {
                    w = c.number();
                    c.expect('*');
                }
                terms.emplace_back(w, parse_g_call(c));
            } while (c.accept(','));
            return GFunction::sum(std::move(terms));
        }
        if (name == "product" || name == "compose") {
            GFunction lhs = parse_g(c);
            c.expect(',');
            GFunction rhs = parse_g(c);
            return name == "product" ? GFunction::product(std::move(lhs), std::move(rhs))
                                     : GFunction::compose(std::move(lhs), std::move(rhs));
        }
        if (name == "scale") {
            const double k = c.number();
            c.expect(',');
            return GFunction::scale(k, parse_g(c));
        }
        if (name == "bounds") {
            const auto a = numbers(c, 2);
            c.expect(',');
            return GFunction::with_bounds(a[0], a[1], parse_g(c));
        }
        c.fail("unknown g family '" + name + "'");
    }();
    c.expect(')');
    return out;
}

inline GFunction parse_g(Cursor& c) {
    if (c.at_number()) {
        const double w = c.number();
        c.expect('*');
        return GFunction::scale(w, parse_g_call(c));
    }
    return parse_g_call(c);
}

inline ReactionTerm parse_beta(Cursor& c, const std::filesystem::path& base_dir) {
    const std::string name = c.identifier();
    c.expect('(');
    ReactionTerm out = [&]() -> ReactionTerm {
        if (name == "polybump")
            return ReactionTerm::poly_bump(c.number());
        if (name == "sinebump")
            return ReactionTerm::sine_bump(c.number());
        if (name == "table") {
            const std::string path = c.raw_until_close();
            if (path.empty())
                c.fail("table needs a path");
            const std::filesystem::path p(path);
            auto rt = ReactionTerm::from_csv((p.is_absolute() || base_dir.empty() ? p : base_dir / p).string());
            // Keep the path as written so expressions round-trip.
            return rt.with_source(path);
        }
        if (name == "scale") {
            const double k = c.number();
            c.expect(',');
            return parse_beta(c, base_dir).scaled(k);
        }
        c.fail("unknown reaction shape '" + name + "'");
    }();
    c.expect(')');
    return out;
}

} // namespace expr_detail

inline GFunction parse_gfunction(std::string_view text) {
    expr_detail::Cursor c(text);
    GFunction g = expr_detail::parse_g(c);
    if (!c.done())
        c.fail("trailing characters");
    return g;
}

/// Relative table paths are resolved against base_dir.
inline ReactionTerm parse_reaction(std::string_view text, const std::filesystem::path& base_dir = {}) {
    expr_detail::Cursor c(text);
    ReactionTerm rt = expr_detail::parse_beta(c, base_dir);
    if (!c.done())
        c.fail("trailing characters");
    return rt;
}

} // namespace orliczfb
