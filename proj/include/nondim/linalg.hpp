#pragma once

#include "nondim/rational.hpp"

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nondim {

/// Dense row-major matrix over Q.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    static Matrix from_rows(const std::vector<std::vector<Rational>> &rows, std::size_t cols = 0) {
        if (!rows.empty())
            cols = rows.front().size();
        Matrix m(rows.size(), cols);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != cols)
                throw std::invalid_argument("Matrix::from_rows: ragged rows");
            for (std::size_t j = 0; j < cols; ++j)
                m(i, j) = rows[i][j];
        }
        return m;
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = 1;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Rational &operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Rational &operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<Rational> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const Rational> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<Rational> row_vector(std::size_t i) const {
        auto r = row(i);
        return {r.begin(), r.end()};
    }

    std::vector<std::vector<Rational>> to_rows() const {
        std::vector<std::vector<Rational>> out;
        for (std::size_t i = 0; i < rows_; ++i)
            out.push_back(row_vector(i));
        return out;
    }

    void append_row(std::span<const Rational> r) {
        if (rows_ == 0 && cols_ == 0)
            cols_ = r.size();
        if (r.size() != cols_)
            throw std::invalid_argument("Matrix::append_row: width mismatch");
        data_.insert(data_.end(), r.begin(), r.end());
        ++rows_;
    }

    void swap_rows(std::size_t a, std::size_t b) {
        if (a == b)
            return;
        for (std::size_t j = 0; j < cols_; ++j)
            std::swap((*this)(a, j), (*this)(b, j));
    }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                t(j, i) = (*this)(i, j);
        return t;
    }

    friend Matrix operator*(const Matrix &a, const Matrix &b) {
        if (a.cols_ != b.rows_)
            throw std::invalid_argument("Matrix product: shape mismatch");
        Matrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                if (a(i, k) == 0)
                    continue;
                for (std::size_t j = 0; j < b.cols_; ++j)
                    c(i, j) += a(i, k) * b(k, j);
            }
        return c;
    }

    friend bool operator==(const Matrix &a, const Matrix &b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Rational> data_;
};

inline Rational dot(std::span<const Rational> a, std::span<const Rational> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("dot: length mismatch");
    Rational s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

struct Echelon {
    Matrix reduced;                   // reduced row echelon form, zero rows dropped
    std::vector<std::size_t> pivots;  // pivot column of each row of `reduced`
};

/// Reduced row echelon form by Gauss-Jordan elimination. Pivot search only
/// looks at the first `ncols` columns (all columns when 0); the remaining
/// columns are carried along, which is how augmented blocks get tracked.
inline Echelon rref(Matrix m, std::size_t ncols = 0) {
    if (ncols == 0 || ncols > m.cols())
        ncols = m.cols();
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < ncols && r < m.rows(); ++c) {
        std::size_t p = r;
        while (p < m.rows() && m(p, c) == 0)
            ++p;
        if (p == m.rows())
            continue;
        m.swap_rows(p, r);
        Rational inv = 1 / m(r, c);
        for (std::size_t j = 0; j < m.cols(); ++j)
            m(r, j) *= inv;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (i == r || m(i, c) == 0)
                continue;
            Rational f = m(i, c);
            for (std::size_t j = c; j < m.cols(); ++j)
                m(i, j) -= f * m(r, j);
        }
        pivots.push_back(c);
        ++r;
    }
    Matrix reduced(r, m.cols());
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            reduced(i, j) = m(i, j);
    return {std::move(reduced), std::move(pivots)};
}

inline std::size_t rank(const Matrix &m) { return rref(m).pivots.size(); }

/// Right kernel basis. Rows of the result are the basis vectors, returned in
/// reduced row echelon form so the basis only depends on the kernel itself.
inline Matrix nullspace(const Matrix &m) {
    const std::size_t n = m.cols();
    Echelon e = rref(m);
    std::vector<bool> is_pivot(n, false);
    for (auto p : e.pivots)
        is_pivot[p] = true;
    Matrix basis(0, n);
    for (std::size_t free = 0; free < n; ++free) {
        if (is_pivot[free])
            continue;
        std::vector<Rational> v(n);
        v[free] = 1;
        for (std::size_t i = 0; i < e.pivots.size(); ++i)
            v[e.pivots[i]] = -e.reduced(i, free);
        basis.append_row(v);
    }
    if (basis.rows() == 0)
        return basis;
    return rref(basis).reduced;
}

/// Canonical basis of the row space (RREF with zero rows removed).
inline Matrix row_space(const Matrix &m) {
    if (m.rows() == 0)
        return Matrix(0, m.cols());
    return rref(m).reduced;
}

inline bool same_row_space(const Matrix &a, const Matrix &b) {
    if (a.cols() != b.cols())
        return false;
    return row_space(a) == row_space(b);
}

inline bool in_row_space(const Matrix &m, std::span<const Rational> v) {
    Matrix aug = m;
    if (aug.rows() == 0 && aug.cols() == 0)
        aug = Matrix(0, v.size());
    std::size_t before = rank(aug);
    aug.append_row(v);
    return rank(aug) == before;
}

/// Inverse of a square matrix; throws std::domain_error when singular.
inline Matrix inverse(const Matrix &a) {
    if (a.rows() != a.cols())
        throw std::invalid_argument("inverse: matrix not square");
    const std::size_t n = a.rows();
    Matrix aug(n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            aug(i, j) = a(i, j);
        aug(i, n + i) = 1;
    }
    Echelon e = rref(aug, n);
    if (e.pivots.size() != n)
        throw std::domain_error("inverse: singular matrix");
    Matrix inv(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            inv(i, j) = e.reduced(i, n + j);
    return inv;
}

namespace detail {

inline std::vector<std::vector<Rational>> gram_schmidt(const std::vector<std::vector<Rational>> &b) {
    std::vector<std::vector<Rational>> star;
    for (const auto &v : b) {
        std::vector<Rational> w = v;
        for (const auto &s : star) {
            Rational ss = dot(s, s);
            if (ss == 0)
                continue;
            Rational mu = dot(v, s) / ss;
            for (std::size_t k = 0; k < w.size(); ++k)
                w[k] -= mu * s[k];
        }
        star.push_back(std::move(w));
    }
    return star;
}

inline void size_reduce_vector(std::vector<std::vector<Rational>> &b,
                               const std::vector<std::vector<Rational>> &star, std::size_t j) {
    for (std::size_t i = j; i-- > 0;) {
        Rational ss = dot(star[i], star[i]);
        if (ss == 0)
            continue;
        Integer r = round_nearest(dot(b[j], star[i]) / ss);
        if (r == 0)
            continue;
        for (std::size_t k = 0; k < b[j].size(); ++k)
            b[j][k] -= Rational(r) * b[i][k];
    }
}

} // namespace detail

/// Size reduction of a lattice basis against its Gram-Schmidt vectors. Only
/// integral multiples of earlier vectors are subtracted, so the lattice (and
/// its Q-span) is unchanged.
inline std::vector<std::vector<Rational>> size_reduce(std::vector<std::vector<Rational>> b) {
    auto star = detail::gram_schmidt(b);
    for (std::size_t j = 1; j < b.size(); ++j)
        detail::size_reduce_vector(b, star, j);
    return b;
}

/// LLL reduction with delta = 3/4 in exact arithmetic. Input vectors must be
/// linearly independent.
inline std::vector<std::vector<Rational>> lll_reduce(std::vector<std::vector<Rational>> b,
                                                     const Rational &delta = Rational(3, 4)) {
    std::size_t k = 1;
    while (k < b.size()) {
        auto star = detail::gram_schmidt(b);
        detail::size_reduce_vector(b, star, k);
        star = detail::gram_schmidt(b);
        Rational s_prev = dot(star[k - 1], star[k - 1]);
        Rational mu = dot(b[k], star[k - 1]) / s_prev;
        if (dot(star[k], star[k]) >= (delta - mu * mu) * s_prev) {
            ++k;
        } else {
            std::swap(b[k], b[k - 1]);
            k = k > 1 ? k - 1 : 1;
        }
    }
    return b;
}

} // namespace nondim
