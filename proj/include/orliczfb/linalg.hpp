#pragma once

// Compressed sparse row matrices with a fixed pattern and a diagonally
// preconditioned conjugate gradient solver that reports negative curvature
// instead of failing on indefinite systems.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "errors.hpp"

namespace orliczfb {

class CsrMatrix {
public:
    CsrMatrix() = default;

    /// Builds the pattern from per-row column lists (duplicates allowed).
    explicit CsrMatrix(std::vector<std::vector<std::size_t>> rows) {
        row_ptr_.assign(rows.size() + 1, 0);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            auto& r = rows[i];
            std::sort(r.begin(), r.end());
            r.erase(std::unique(r.begin(), r.end()), r.end());
            row_ptr_[i + 1] = row_ptr_[i] + r.size();
        }
        cols_.reserve(row_ptr_.back());
        for (const auto& r : rows)
            cols_.insert(cols_.end(), r.begin(), r.end());
        vals_.assign(cols_.size(), 0.0);
        diag_.resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            diag_[i] = slot(i, i);
    }

    std::size_t rows() const { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
    std::size_t nonzeros() const { return cols_.size(); }

    void zero() { std::fill(vals_.begin(), vals_.end(), 0.0); }

    /// Index of entry (i, j) in the value array; the entry must be in the pattern.
    std::size_t slot(std::size_t i, std::size_t j) const {
        const auto first = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
        const auto last = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
        const auto it = std::lower_bound(first, last, j);
        if (it == last || *it != j)
            throw DomainError("matrix entry outside the sparsity pattern");
        return static_cast<std::size_t>(it - cols_.begin());
    }

    void add(std::size_t i, std::size_t j, double v) { vals_[slot(i, j)] += v; }
    double& at_slot(std::size_t k) { return vals_[k]; }
    double diagonal(std::size_t i) const { return vals_[diag_[i]]; }
    double& diagonal(std::size_t i) { return vals_[diag_[i]]; }

    double get(std::size_t i, std::size_t j) const {
        const auto first = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
        const auto last = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
        const auto it = std::lower_bound(first, last, j);
        return (it == last || *it != j) ? 0.0 : vals_[static_cast<std::size_t>(it - cols_.begin())];
    }

    /// Zeroes row and column i and puts 1 on the diagonal.
    void pin(std::size_t i) {
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            const std::size_t j = cols_[k];
            vals_[k] = 0.0;
            if (j != i)
                vals_[slot(j, i)] = 0.0;
        }
        vals_[diag_[i]] = 1.0;
    }

    void multiply(const std::vector<double>& x, std::vector<double>& y) const {
        y.resize(rows());
        for (std::size_t i = 0; i < rows(); ++i) {
            double acc = 0.0;
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
                acc += vals_[k] * x[cols_[k]];
            y[i] = acc;
        }
    }

    const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
    const std::vector<std::size_t>& cols() const { return cols_; }
    const std::vector<double>& values() const { return vals_; }

private:
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> cols_;
    std::vector<double> vals_;
    std::vector<std::size_t> diag_;
};

struct CgResult {
    std::size_t iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
    /// p^T A p <= 0 was met; x holds the last iterate before it.
    bool negative_curvature = false;
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

/// Solves A x = b from x = 0 with Jacobi preconditioning.
inline CgResult preconditioned_cg(const CsrMatrix& a, const std::vector<double>& b,
                                  std::vector<double>& x, double rel_tol, std::size_t max_iter) {
    const std::size_t n = a.rows();
    x.assign(n, 0.0);
    CgResult res;
    const double bnorm = std::sqrt(dot(b, b));
    if (bnorm == 0.0) {
        res.converged = true;
        return res;
    }
    std::vector<double> inv_diag(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::abs(a.diagonal(i));
        if (!(d > 0.0) || !std::isfinite(d))
            throw SingularSystem("zero or non-finite diagonal entry in row " + std::to_string(i));
        inv_diag[i] = 1.0 / d;
    }
    std::vector<double> r = b;
    std::vector<double> z(n), p(n), q(n);
    for (std::size_t i = 0; i < n; ++i)
        z[i] = inv_diag[i] * r[i];
    p = z;
    double rho = dot(r, z);
    for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
        a.multiply(p, q);
        const double curvature = dot(p, q);
        if (!std::isfinite(curvature))
            throw SingularSystem("conjugate gradient breakdown (non-finite curvature)");
        if (curvature <= 0.0) {
            res.negative_curvature = true;
            res.relative_residual = std::sqrt(dot(r, r)) / bnorm;
            return res;
        }
        const double step = rho / curvature;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += step * p[i];
            r[i] -= step * q[i];
        }
        res.relative_residual = std::sqrt(dot(r, r)) / bnorm;
        if (res.relative_residual <= rel_tol) {
            ++res.iterations;
            res.converged = true;
            return res;
        }
        for (std::size_t i = 0; i < n; ++i)
            z[i] = inv_diag[i] * r[i];
        const double rho_next = dot(r, z);
        const double beta = rho_next / rho;
        rho = rho_next;
        for (std::size_t i = 0; i < n; ++i)
            p[i] = z[i] + beta * p[i];
    }
    return res;
}

} // namespace orliczfb
