#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "scrkit/errors.hpp"

namespace scrkit {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

// Dense row-major complex matrix. Plain value type: every operation returns
// a fresh matrix, nothing is shared, so instances can be used freely across
// threads once constructed.
class ComplexMatrix {
public:
    ComplexMatrix() : rows_(0), cols_(0) {}

    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), entries_(rows * cols, Complex(0.0, 0.0)) {}

    // Row-major construction, mostly for tests and small fixtures.
    ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        entries_.reserve(rows_ * cols_);
        for (const auto& row : rows) {
            if (row.size() != cols_) {
                throw InputError("ComplexMatrix: ragged initializer rows");
            }
            entries_.insert(entries_.end(), row.begin(), row.end());
        }
    }

    static ComplexMatrix zero(std::size_t rows, std::size_t cols) { return ComplexMatrix(rows, cols); }

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix I(n, n);
        for (std::size_t i = 0; i < n; ++i) I(i, i) = Complex(1.0, 0.0);
        return I;
    }

    static ComplexMatrix diagonal(const ComplexVector& d) {
        ComplexMatrix D(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) D(i, i) = d[i];
        return D;
    }

    static ComplexMatrix column(const ComplexVector& v) {
        ComplexMatrix c(v.size(), 1);
        for (std::size_t i = 0; i < v.size(); ++i) c(i, 0) = v[i];
        return c;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return entries_.empty(); }
    bool is_square() const noexcept { return rows_ == cols_; }

    Complex& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

    const std::vector<Complex>& entries() const noexcept { return entries_; }

    bool is_finite() const noexcept {
        for (const Complex& z : entries_) {
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
        }
        return true;
    }

    ComplexMatrix adjoint() const {
        ComplexMatrix out(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
        return out;
    }

    ComplexMatrix transpose() const {
        ComplexMatrix out(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
        return out;
    }

    ComplexMatrix conj() const {
        ComplexMatrix out(rows_, cols_);
        for (std::size_t k = 0; k < entries_.size(); ++k) out.entries_[k] = std::conj(entries_[k]);
        return out;
    }

    ComplexMatrix block(std::size_t row0, std::size_t col0, std::size_t nrows, std::size_t ncols) const {
        if (row0 + nrows > rows_ || col0 + ncols > cols_) {
            throw InputError("ComplexMatrix::block: range out of bounds");
        }
        ComplexMatrix out(nrows, ncols);
        for (std::size_t i = 0; i < nrows; ++i)
            for (std::size_t j = 0; j < ncols; ++j) out(i, j) = (*this)(row0 + i, col0 + j);
        return out;
    }

    void set_block(std::size_t row0, std::size_t col0, const ComplexMatrix& sub) {
        if (row0 + sub.rows() > rows_ || col0 + sub.cols() > cols_) {
            throw InputError("ComplexMatrix::set_block: range out of bounds");
        }
        for (std::size_t i = 0; i < sub.rows(); ++i)
            for (std::size_t j = 0; j < sub.cols(); ++j) (*this)(row0 + i, col0 + j) = sub(i, j);
    }

    double frobenius_norm() const {
        double acc = 0.0;
        for (const Complex& z : entries_) acc += std::norm(z);
        return std::sqrt(acc);
    }

    double max_abs() const {
        double m = 0.0;
        for (const Complex& z : entries_) m = std::max(m, std::abs(z));
        return m;
    }

    friend ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b) {
        require_same_shape(a, b, "operator+");
        ComplexMatrix out = a;
        for (std::size_t k = 0; k < out.entries_.size(); ++k) out.entries_[k] += b.entries_[k];
        return out;
    }

    friend ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b) {
        require_same_shape(a, b, "operator-");
        ComplexMatrix out = a;
        for (std::size_t k = 0; k < out.entries_.size(); ++k) out.entries_[k] -= b.entries_[k];
        return out;
    }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.cols_ != b.rows_) {
            throw InputError("operator*: inner dimensions disagree");
        }
        ComplexMatrix out(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const Complex aik = a(i, k);
                if (aik == Complex(0.0, 0.0)) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
            }
        }
        return out;
    }

    friend ComplexMatrix operator*(const Complex& s, const ComplexMatrix& a) {
        ComplexMatrix out = a;
        for (Complex& z : out.entries_) z *= s;
        return out;
    }

    friend ComplexMatrix operator*(double s, const ComplexMatrix& a) { return Complex(s, 0.0) * a; }

    friend ComplexMatrix operator-(const ComplexMatrix& a) { return Complex(-1.0, 0.0) * a; }

    friend bool operator==(const ComplexMatrix& a, const ComplexMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.entries_ == b.entries_;
    }

private:
    static void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_) {
            throw InputError(std::string(op) + ": shapes disagree");
        }
    }

    std::size_t rows_;
    std::size_t cols_;
    std::vector<Complex> entries_;
};

inline ComplexVector matvec(const ComplexMatrix& a, const ComplexVector& x) {
    if (a.cols() != x.size()) throw InputError("matvec: dimension mismatch");
    ComplexVector y(a.rows(), Complex(0.0, 0.0));
    for (std::size_t i = 0; i < a.rows(); ++i) {
        Complex acc(0.0, 0.0);
        for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

inline double vec_norm(const ComplexVector& x) {
    double acc = 0.0;
    for (const Complex& z : x) acc += std::norm(z);
    return std::sqrt(acc);
}

inline ComplexVector vec_sub(const ComplexVector& a, const ComplexVector& b) {
    if (a.size() != b.size()) throw InputError("vec_sub: dimension mismatch");
    ComplexVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

inline ComplexVector vec_add(const ComplexVector& a, const ComplexVector& b) {
    if (a.size() != b.size()) throw InputError("vec_add: dimension mismatch");
    ComplexVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

inline ComplexVector vec_scale(const Complex& s, const ComplexVector& x) {
    ComplexVector out(x);
    for (Complex& z : out) z *= s;
    return out;
}

// Stacks b below a (block column [a; b]).
inline ComplexMatrix vstack(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.cols()) throw InputError("vstack: column counts disagree");
    ComplexMatrix out(a.rows() + b.rows(), a.cols());
    out.set_block(0, 0, a);
    out.set_block(a.rows(), 0, b);
    return out;
}

inline ComplexMatrix block_diag(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() + b.rows(), a.cols() + b.cols());
    out.set_block(0, 0, a);
    out.set_block(a.rows(), a.cols(), b);
    return out;
}

} // namespace scrkit
