#include "mpmdp/linalg.hpp"

#include <stdexcept>

namespace mpmdp {

std::optional<Matrix> solve_unique_multi(Matrix a, Matrix b) {
    const std::size_t rows = a.size();
    if (b.size() != rows) throw std::invalid_argument("solve_unique_multi: row count mismatch");
    const std::size_t cols = rows == 0 ? 0 : a[0].size();
    const std::size_t nrhs = rows == 0 ? 0 : b[0].size();
    for (std::size_t i = 0; i < rows; ++i) {
        if (a[i].size() != cols || b[i].size() != nrhs)
            throw std::invalid_argument("solve_unique_multi: ragged input");
    }
    if (rows < cols) return std::nullopt;

    std::vector<std::size_t> pivot_row(cols, rows);
    std::size_t next = 0;
    for (std::size_t col = 0; col < cols; ++col) {
        std::size_t chosen = rows;
        for (std::size_t r = next; r < rows; ++r) {
            if (!a[r][col].is_zero()) {
                chosen = r;
                break;
            }
        }
        if (chosen == rows) return std::nullopt; // rank deficient: no unique solution
        std::swap(a[chosen], a[next]);
        std::swap(b[chosen], b[next]);
        const Rational inv = Rational(1) / a[next][col];
        for (std::size_t c = col; c < cols; ++c) a[next][c] = a[next][c] * inv;
        for (std::size_t c = 0; c < nrhs; ++c) b[next][c] = b[next][c] * inv;
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == next || a[r][col].is_zero()) continue;
            const Rational f = a[r][col];
            for (std::size_t c = col; c < cols; ++c) a[r][c] = a[r][c] - f * a[next][c];
            for (std::size_t c = 0; c < nrhs; ++c) b[r][c] = b[r][c] - f * b[next][c];
        }
        pivot_row[col] = next;
        ++next;
    }
    // Remaining rows must have reduced to 0 = 0, otherwise inconsistent.
    for (std::size_t r = next; r < rows; ++r) {
        for (std::size_t c = 0; c < nrhs; ++c) {
            if (!b[r][c].is_zero()) return std::nullopt;
        }
    }
    Matrix x(cols, std::vector<Rational>(nrhs));
    for (std::size_t col = 0; col < cols; ++col) x[col] = b[pivot_row[col]];
    return x;
}

std::optional<std::vector<Rational>> solve_unique(Matrix a, std::vector<Rational> b) {
    Matrix bm(b.size(), std::vector<Rational>(1));
    for (std::size_t i = 0; i < b.size(); ++i) bm[i][0] = b[i];
    auto xm = solve_unique_multi(std::move(a), std::move(bm));
    if (!xm) return std::nullopt;
    std::vector<Rational> x(xm->size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = (*xm)[i][0];
    return x;
}

} // namespace mpmdp
