#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dbnot {

/// Dense row-major matrix of doubles. The workhorse container for transport
/// plans and gradients.
class DenseMatrix {
public:
    DenseMatrix() = default;

    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) return {};
        DenseMatrix m(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_)
                throw std::invalid_argument("from_rows: ragged input");
            std::copy(rows[i].begin(), rows[i].end(), m.a_.begin() + static_cast<std::ptrdiff_t>(i * m.cols_));
        }
        return m;
    }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    double* row(std::size_t i) { return a_.data() + i * cols_; }
    const double* row(std::size_t i) const { return a_.data() + i * cols_; }

    std::vector<double>& data() { return a_; }
    const std::vector<double>& data() const { return a_; }

    bool same_shape(const DenseMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    bool all_finite() const {
        for (double x : a_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (double x : a_) s += x * x;
        return std::sqrt(s);
    }

    double max_abs() const {
        double m = 0.0;
        for (double x : a_) m = std::max(m, std::abs(x));
        return m;
    }

    friend DenseMatrix operator-(const DenseMatrix& x, const DenseMatrix& y) {
        if (!x.same_shape(y)) throw std::invalid_argument("matrix subtraction: shape mismatch");
        DenseMatrix r(x.rows_, x.cols_);
        for (std::size_t k = 0; k < x.a_.size(); ++k) r.a_[k] = x.a_[k] - y.a_[k];
        return r;
    }

    friend DenseMatrix operator+(const DenseMatrix& x, const DenseMatrix& y) {
        if (!x.same_shape(y)) throw std::invalid_argument("matrix addition: shape mismatch");
        DenseMatrix r(x.rows_, x.cols_);
        for (std::size_t k = 0; k < x.a_.size(); ++k) r.a_[k] = x.a_[k] + y.a_[k];
        return r;
    }

    DenseMatrix scaled(double s) const {
        DenseMatrix r(rows_, cols_);
        for (std::size_t k = 0; k < a_.size(); ++k) r.a_[k] = s * a_[k];
        return r;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> a_;
};

inline double inner_product(const DenseMatrix& x, const DenseMatrix& y) {
    if (!x.same_shape(y)) throw std::invalid_argument("inner_product: shape mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < x.data().size(); ++k) s += x.data()[k] * y.data()[k];
    return s;
}

/// Convex blend (1-mu)*x + mu*y.
inline DenseMatrix blend(const DenseMatrix& x, const DenseMatrix& y, double mu) {
    if (!x.same_shape(y)) throw std::invalid_argument("blend: shape mismatch");
    DenseMatrix r(x.rows(), x.cols());
    for (std::size_t k = 0; k < x.data().size(); ++k)
        r.data()[k] = (1.0 - mu) * x.data()[k] + mu * y.data()[k];
    return r;
}

/// Symmetric sparse matrix in compressed-row form. Both (i,j) and (j,i) are
/// stored; column indices are sorted and unique within each row.
struct SparseSym {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr;  // size n+1
    std::vector<std::size_t> col;
    std::vector<double> val;

    std::size_t nnz() const { return val.size(); }
};

struct Triplet {
    std::size_t i, j;
    double v;
};

namespace detail {

/// Assemble CSR from unordered triplets. Duplicates are combined with `comb`.
template <typename Combine>
inline SparseSym csr_from_triplets(std::size_t n, std::vector<Triplet> t, Combine comb) {
    std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    SparseSym s;
    s.n = n;
    s.row_ptr.assign(n + 1, 0);
    for (std::size_t k = 0; k < t.size();) {
        std::size_t m = k + 1;
        double v = t[k].v;
        while (m < t.size() && t[m].i == t[k].i && t[m].j == t[k].j) {
            v = comb(v, t[m].v);
            ++m;
        }
        s.col.push_back(t[k].j);
        s.val.push_back(v);
        ++s.row_ptr[t[k].i + 1];
        k = m;
    }
    for (std::size_t i = 0; i < n; ++i) s.row_ptr[i + 1] += s.row_ptr[i];
    return s;
}

}  // namespace detail

/// Symmetric nonnegative affinity matrix with zero diagonal: the graph.
///
/// Construction symmetrizes by keeping max(s_ij, s_ji) on both sides so the
/// stored matrix always satisfies the invariants regardless of the input
/// edge list.
class SparseAffinity {
public:
    SparseAffinity() = default;

    /// Build from an edge list; entries on the diagonal or with non-positive
    /// weight are rejected.
    static SparseAffinity from_edges(std::size_t n, const std::vector<Triplet>& edges) {
        std::vector<Triplet> t;
        t.reserve(edges.size() * 2);
        for (const auto& e : edges) {
            if (e.i >= n || e.j >= n) throw std::invalid_argument("affinity edge index out of range");
            if (e.i == e.j) throw std::invalid_argument("affinity diagonal must be zero");
            if (!(e.v >= 0.0) || !std::isfinite(e.v))
                throw std::invalid_argument("affinity weights must be finite and nonnegative");
            if (e.v == 0.0) continue;
            t.push_back({e.i, e.j, e.v});
            t.push_back({e.j, e.i, e.v});
        }
        SparseAffinity s;
        s.m_ = detail::csr_from_triplets(n, std::move(t),
                                         [](double a, double b) { return std::max(a, b); });
        return s;
    }

    std::size_t n() const { return m_.n; }
    std::size_t nnz() const { return m_.nnz(); }
    const SparseSym& matrix() const { return m_; }

    /// Total edge weight, counting both orientations (1' S 1).
    double total_weight() const {
        double s = 0.0;
        for (double v : m_.val) s += v;
        return s;
    }

private:
    SparseSym m_;
};

/// Y = S * X, accumulated row by row in index order so results are
/// reproducible.
inline DenseMatrix spmm(const SparseSym& s, const DenseMatrix& x) {
    if (s.n != x.rows()) throw std::invalid_argument("spmm: dimension mismatch");
    const std::size_t c = x.cols();
    DenseMatrix y(s.n, c);
    for (std::size_t i = 0; i < s.n; ++i) {
        double* yi = y.row(i);
        for (std::size_t k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k) {
            const double v = s.val[k];
            const double* xr = x.row(s.col[k]);
            for (std::size_t j = 0; j < c; ++j) yi[j] += v * xr[j];
        }
    }
    return y;
}

inline DenseMatrix spmm(const SparseAffinity& s, const DenseMatrix& x) {
    return spmm(s.matrix(), x);
}

inline double frobenius_norm(const SparseSym& s) {
    double acc = 0.0;
    for (double v : s.val) acc += v * v;
    return std::sqrt(acc);
}

inline double frobenius_norm(const SparseAffinity& s) { return frobenius_norm(s.matrix()); }

/// tr(A' S B) computed as sum_i <A_i, (S B)_i> with one c-sized scratch row,
/// never materializing the full product.
inline double trace_quadratic(const DenseMatrix& a, const SparseSym& s, const DenseMatrix& b) {
    if (a.rows() != s.n || b.rows() != s.n || a.cols() != b.cols())
        throw std::invalid_argument("trace_quadratic: dimension mismatch");
    const std::size_t c = a.cols();
    std::vector<double> sb(c);
    double acc = 0.0;
    for (std::size_t i = 0; i < s.n; ++i) {
        std::fill(sb.begin(), sb.end(), 0.0);
        for (std::size_t k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k) {
            const double v = s.val[k];
            const double* br = b.row(s.col[k]);
            for (std::size_t j = 0; j < c; ++j) sb[j] += v * br[j];
        }
        const double* ar = a.row(i);
        for (std::size_t j = 0; j < c; ++j) acc += ar[j] * sb[j];
    }
    return acc;
}

inline double trace_quadratic(const DenseMatrix& a, const SparseAffinity& s, const DenseMatrix& b) {
    return trace_quadratic(a, s.matrix(), b);
}

}  // namespace dbnot
