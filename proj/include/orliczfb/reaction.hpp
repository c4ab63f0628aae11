#pragma once

// Reaction terms beta supported on [0, 1], their primitive B, the mass
// M = B(1), and the scaled family beta_eps(s) = beta(s / eps) / eps with
// primitive B_eps(s) = B(s / eps).

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"

namespace orliczfb {

class ReactionTerm {
public:
    enum class Shape { poly_bump, sine_bump, table };

    /// beta(s) = c s (1 - s) on (0, 1).
    static ReactionTerm poly_bump(double c) {
        if (!(c > 0.0) || !std::isfinite(c))
            throw DomainError("polybump requires c > 0");
        ReactionTerm rt(Shape::poly_bump, c);
        rt.lipschitz_ = c;
        rt.mass_ = c / 6.0;
        return rt;
    }

    /// beta(s) = c sin(pi s) on (0, 1).
    static ReactionTerm sine_bump(double c) {
        if (!(c > 0.0) || !std::isfinite(c))
            throw DomainError("sinebump requires c > 0");
        ReactionTerm rt(Shape::sine_bump, c);
        rt.lipschitz_ = c * std::numbers::pi;
        rt.mass_ = 2.0 * c / std::numbers::pi;
        return rt;
    }

    /// Piecewise-linear beta through (s, beta) samples.  Samples outside
    /// (0, 1) are dropped and the endpoint zeros are inserted exactly.
    static ReactionTerm table(std::vector<std::pair<double, double>> samples, std::string source = "") {
        std::vector<std::pair<double, double>> pts;
        for (const auto& [s, b] : samples) {
            if (!std::isfinite(s) || !std::isfinite(b))
                throw DomainError("table samples must be finite");
            if (s > 0.0 && s < 1.0) {
                if (!(b > 0.0))
                    throw DomainError("table beta must be positive inside (0, 1)");
                pts.emplace_back(s, b);
            }
        }
        std::sort(pts.begin(), pts.end());
        for (std::size_t i = 1; i < pts.size(); ++i)
            if (pts[i].first == pts[i - 1].first)
                throw DomainError("table has duplicate abscissae");
        if (pts.empty())
            throw DomainError("table needs at least one sample inside (0, 1)");
        pts.insert(pts.begin(), {0.0, 0.0});
        pts.emplace_back(1.0, 0.0);

        auto tab = std::make_shared<Table>();
        tab->s.reserve(pts.size());
        for (const auto& [s, b] : pts) {
            tab->s.push_back(s);
            tab->beta.push_back(b);
        }
        tab->cumulative.assign(pts.size(), 0.0);
        double lip = 0.0;
        for (std::size_t i = 1; i < pts.size(); ++i) {
            const double h = tab->s[i] - tab->s[i - 1];
            tab->cumulative[i] = tab->cumulative[i - 1] + 0.5 * h * (tab->beta[i] + tab->beta[i - 1]);
            lip = std::max(lip, std::abs(tab->beta[i] - tab->beta[i - 1]) / h);
        }
        tab->source = std::move(source);
        ReactionTerm rt(Shape::table, 1.0);
        rt.mass_ = tab->cumulative.back();
        rt.lipschitz_ = lip;
        rt.table_ = std::move(tab);
        return rt;
    }

    /// Reads a two-column CSV (s, beta).  Blank lines, '#' comments and a
    /// non-numeric header line are skipped.
    static ReactionTerm from_csv(const std::string& path) {
        std::ifstream in(path);
        if (!in)
            throw DomainError("cannot open reaction table '" + path + "'");
        std::vector<std::pair<double, double>> samples;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#')
                continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream ls(line);
            double s = 0.0;
            double b = 0.0;
            if (!(ls >> s >> b)) {
                if (samples.empty() && lineno == 1)
                    continue;
                throw ParseError(lineno, "expected two numeric columns in '" + path + "'");
            }
            samples.emplace_back(s, b);
        }
        return table(std::move(samples), path);
    }

    /// k * beta; mass and Lipschitz constant scale by k.
    ReactionTerm scaled(double k) const {
        if (!(k > 0.0) || !std::isfinite(k))
            throw DomainError("reaction scale must be positive");
        ReactionTerm rt = *this;
        rt.scale_ *= k;
        rt.mass_ *= k;
        rt.lipschitz_ *= k;
        return rt;
    }

    /// Same table with a different recorded source path.
    ReactionTerm with_source(std::string source) const {
        ReactionTerm rt = *this;
        if (table_) {
            auto tab = std::make_shared<Table>(*table_);
            tab->source = std::move(source);
            rt.table_ = std::move(tab);
        }
        return rt;
    }

    Shape shape() const { return shape_; }
    double mass() const { return mass_; }
    double lipschitz() const { return lipschitz_; }

    double beta(double s) const {
        if (!(s > 0.0 && s < 1.0))
            return 0.0;
        switch (shape_) {
        case Shape::poly_bump:
            return scale_ * param_ * s * (1.0 - s);
        case Shape::sine_bump:
            return scale_ * param_ * std::sin(std::numbers::pi * s);
        case Shape::table: {
            const auto i = segment(s);
            const double h = table_->s[i + 1] - table_->s[i];
            const double w = (s - table_->s[i]) / h;
            return scale_ * ((1.0 - w) * table_->beta[i] + w * table_->beta[i + 1]);
        }
        }
        return 0.0;
    }

    /// One-sided derivative taken from inside [0, 1]; zero outside.
    double dbeta(double s) const {
        if (!(s >= 0.0 && s <= 1.0))
            return 0.0;
        switch (shape_) {
        case Shape::poly_bump:
            return scale_ * param_ * (1.0 - 2.0 * s);
        case Shape::sine_bump:
            return scale_ * param_ * std::numbers::pi * std::cos(std::numbers::pi * s);
        case Shape::table: {
            const auto i = segment(std::min(s, std::nextafter(1.0, 0.0)));
            return scale_ * (table_->beta[i + 1] - table_->beta[i]) / (table_->s[i + 1] - table_->s[i]);
        }
        }
        return 0.0;
    }

    /// B(w) = int_0^w beta; 0 below 0, M above 1.
    double B(double w) const {
        if (w <= 0.0)
            return 0.0;
        if (w >= 1.0)
            return mass_;
        switch (shape_) {
        case Shape::poly_bump:
            return scale_ * param_ * (0.5 * w * w - w * w * w / 3.0);
        case Shape::sine_bump:
            return scale_ * param_ * (1.0 - std::cos(std::numbers::pi * w)) / std::numbers::pi;
        case Shape::table: {
            const auto i = segment(w);
            const double s0 = table_->s[i];
            const double h = table_->s[i + 1] - s0;
            const double b0 = table_->beta[i];
            const double slope = (table_->beta[i + 1] - b0) / h;
            const double x = w - s0;
            return scale_ * (table_->cumulative[i] + b0 * x + 0.5 * slope * x * x);
        }
        }
        return 0.0;
    }

    double beta_eps(double eps, double s) const { return beta(s / check_eps(eps)) / eps; }
    double dbeta_eps(double eps, double s) const { return dbeta(s / check_eps(eps)) / (eps * eps); }
    double B_eps(double eps, double s) const { return B(s / check_eps(eps)); }

    std::string expression() const {
        std::string base;
        switch (shape_) {
        case Shape::poly_bump:
            base = "polybump(" + numerics::format_shortest(param_) + ")";
            break;
        case Shape::sine_bump:
            base = "sinebump(" + numerics::format_shortest(param_) + ")";
            break;
        case Shape::table:
            base = "table(" + table_->source + ")";
            break;
        }
        return scale_ == 1.0 ? base : "scale(" + numerics::format_shortest(scale_) + "," + base + ")";
    }

private:
    struct Table {
        std::vector<double> s, beta, cumulative;
        std::string source;
    };

    ReactionTerm(Shape shape, double param) : shape_(shape), param_(param) {}

    static double check_eps(double eps) {
        if (!(eps > 0.0) || !std::isfinite(eps))
            throw DomainError("eps must be positive");
        return eps;
    }

    std::size_t segment(double s) const {
        const auto it = std::upper_bound(table_->s.begin(), table_->s.end(), s);
        const auto idx = static_cast<std::size_t>(it - table_->s.begin());
        return std::clamp<std::size_t>(idx, 1, table_->s.size() - 1) - 1;
    }

    Shape shape_;
    double param_;
    double scale_ = 1.0;
    double mass_ = 0.0;
    double lipschitz_ = 0.0;
    std::shared_ptr<const Table> table_;
};

} // namespace orliczfb
