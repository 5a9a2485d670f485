#include "rptrees/matrix.hpp"

#include <algorithm>
#include <cstdlib>

namespace rpt {

DenseMatrix DenseMatrix::with_layout(Layout layout) const {
    if (layout == layout_) return *this;
    DenseMatrix out(n_rows_, n_cols_, layout);
    for (index_t i = 0; i < n_rows_; ++i)
        for (index_t j = 0; j < n_cols_; ++j) out(i, j) = (*this)(i, j);
    return out;
}

bool DenseMatrix::operator==(const DenseMatrix& other) const {
    if (n_rows_ != other.n_rows_ || n_cols_ != other.n_cols_) return false;
    for (index_t i = 0; i < n_rows_; ++i)
        for (index_t j = 0; j < n_cols_; ++j)
            if ((*this)(i, j) != other(i, j)) return false;
    return true;
}

CscMatrix csc_from_triplets(std::vector<Triplet> triplets, index_t n_rows, index_t n_cols) {
    for (const auto& [r, c, v] : triplets) {
        if (r < 0 || r >= n_rows || c < 0 || c >= n_cols)
            throw IndexError("triplet index out of range");
        (void)v;
    }
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
        return std::get<0>(a) < std::get<0>(b);
    });
    for (std::size_t k = 1; k < triplets.size(); ++k) {
        if (std::get<0>(triplets[k]) == std::get<0>(triplets[k - 1]) &&
            std::get<1>(triplets[k]) == std::get<1>(triplets[k - 1]))
            throw DuplicateEntry("duplicate (row, col) coordinate");
    }

    CscMatrix out;
    out.n_rows = n_rows;
    out.n_cols = n_cols;
    out.indptr.assign(static_cast<std::size_t>(n_cols) + 1, 0);
    for (const auto& [r, c, v] : triplets) {
        if (v == 0.0) continue;  // exact zeros are dropped
        out.indices.push_back(r);
        out.data.push_back(v);
        ++out.indptr[static_cast<std::size_t>(c) + 1];
    }
    for (index_t j = 0; j < n_cols; ++j) out.indptr[j + 1] += out.indptr[j];
    check_csc(out);
    return out;
}

CsrMatrix csc_to_csr(const CscMatrix& m) {
    CsrMatrix out;
    out.n_rows = m.n_rows;
    out.n_cols = m.n_cols;
    out.indptr.assign(static_cast<std::size_t>(m.n_rows) + 1, 0);
    out.indices.resize(m.data.size());
    out.data.resize(m.data.size());
    for (index_t k = 0; k < m.nnz(); ++k) ++out.indptr[m.indices[k] + 1];
    for (index_t i = 0; i < m.n_rows; ++i) out.indptr[i + 1] += out.indptr[i];
    std::vector<index_t> next(out.indptr.begin(), out.indptr.end() - 1);
    for (index_t j = 0; j < m.n_cols; ++j) {
        for (index_t k = m.indptr[j]; k < m.indptr[j + 1]; ++k) {
            const index_t i = m.indices[k];
            const index_t dst = next[i]++;
            out.indices[dst] = j;  // columns come out sorted: j is ascending
            out.data[dst] = m.data[k];
        }
    }
    check_csr(out);
    return out;
}

CscMatrix csr_to_csc(const CsrMatrix& m) {
    CscMatrix t;
    t.n_rows = m.n_cols;
    t.n_cols = m.n_rows;
    t.indptr = m.indptr;
    t.indices = m.indices;
    t.data = m.data;
    CsrMatrix tt = csc_to_csr(t);
    CscMatrix out;
    out.n_rows = m.n_rows;
    out.n_cols = m.n_cols;
    out.indptr = std::move(tt.indptr);
    out.indices = std::move(tt.indices);
    out.data = std::move(tt.data);
    check_csc(out);
    return out;
}

namespace {
void check_cap(index_t n_rows, index_t n_cols, std::size_t byte_cap) {
    const std::size_t bytes =
        static_cast<std::size_t>(n_rows) * static_cast<std::size_t>(n_cols) * sizeof(double);
    if (bytes > byte_cap) throw CapacityError("densify would exceed the byte cap");
}
}  // namespace

DenseMatrix densify(const CscMatrix& m, Layout layout, std::size_t byte_cap) {
    check_cap(m.n_rows, m.n_cols, byte_cap);
    DenseMatrix out(m.n_rows, m.n_cols, layout);
    for (index_t j = 0; j < m.n_cols; ++j)
        for (index_t k = m.indptr[j]; k < m.indptr[j + 1]; ++k)
            out(m.indices[k], j) = m.data[k];
    return out;
}

DenseMatrix densify(const CsrMatrix& m, Layout layout, std::size_t byte_cap) {
    check_cap(m.n_rows, m.n_cols, byte_cap);
    DenseMatrix out(m.n_rows, m.n_cols, layout);
    for (index_t i = 0; i < m.n_rows; ++i)
        for (index_t k = m.indptr[i]; k < m.indptr[i + 1]; ++k)
            out(i, m.indices[k]) = m.data[k];
    return out;
}

CscMatrix sparsify(const DenseMatrix& m) {
    CscMatrix out;
    out.n_rows = m.n_rows();
    out.n_cols = m.n_cols();
    out.indptr.assign(static_cast<std::size_t>(m.n_cols()) + 1, 0);
    for (index_t j = 0; j < m.n_cols(); ++j) {
        for (index_t i = 0; i < m.n_rows(); ++i) {
            const double v = m(i, j);
            if (v != 0.0) {
                out.indices.push_back(i);
                out.data.push_back(v);
            }
        }
        out.indptr[j + 1] = static_cast<index_t>(out.data.size());
    }
    check_csc(out);
    return out;
}

double density(const CscMatrix& m) {
    if (m.n_rows == 0 || m.n_cols == 0) return 0.0;
    return static_cast<double>(m.nnz()) / (static_cast<double>(m.n_rows) * m.n_cols);
}

double density(const CsrMatrix& m) {
    if (m.n_rows == 0 || m.n_cols == 0) return 0.0;
    return static_cast<double>(m.nnz()) / (static_cast<double>(m.n_rows) * m.n_cols);
}

double density(const DenseMatrix& m) {
    if (m.n_rows() == 0 || m.n_cols() == 0) return 0.0;
    index_t nnz = 0;
    for (double v : m.values()) nnz += (v != 0.0);
    return static_cast<double>(nnz) / (static_cast<double>(m.n_rows()) * m.n_cols());
}

void check_csc(const CscMatrix& m) {
    if (static_cast<index_t>(m.indptr.size()) != m.n_cols + 1)
        throw ShapeError("csc indptr length mismatch");
    if (m.indptr.front() != 0 || m.indptr.back() != m.nnz())
        throw ShapeError("csc indptr endpoints invalid");
    for (index_t j = 0; j < m.n_cols; ++j) {
        if (m.indptr[j] > m.indptr[j + 1]) throw ShapeError("csc indptr not non-decreasing");
        for (index_t k = m.indptr[j]; k < m.indptr[j + 1]; ++k) {
            if (m.indices[k] < 0 || m.indices[k] >= m.n_rows)
                throw IndexError("csc row index out of range");
            if (k > m.indptr[j] && m.indices[k] <= m.indices[k - 1])
                throw ShapeError("csc row indices not strictly increasing");
            if (m.data[k] == 0.0) throw ShapeError("csc stores an explicit zero");
        }
    }
}

void check_csr(const CsrMatrix& m) {
    if (static_cast<index_t>(m.indptr.size()) != m.n_rows + 1)
        throw ShapeError("csr indptr length mismatch");
    if (m.indptr.front() != 0 || m.indptr.back() != m.nnz())
        throw ShapeError("csr indptr endpoints invalid");
    for (index_t i = 0; i < m.n_rows; ++i) {
        if (m.indptr[i] > m.indptr[i + 1]) throw ShapeError("csr indptr not non-decreasing");
        for (index_t k = m.indptr[i]; k < m.indptr[i + 1]; ++k) {
            if (m.indices[k] < 0 || m.indices[k] >= m.n_cols)
                throw IndexError("csr column index out of range");
            if (k > m.indptr[i] && m.indices[k] <= m.indices[k - 1])
                throw ShapeError("csr column indices not strictly increasing");
            if (m.data[k] == 0.0) throw ShapeError("csr stores an explicit zero");
        }
    }
}

DenseMatrix take_rows(const DenseMatrix& m, const std::vector<index_t>& rows) {
    DenseMatrix out(static_cast<index_t>(rows.size()), m.n_cols(), m.layout());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (index_t j = 0; j < m.n_cols(); ++j)
            out(static_cast<index_t>(i), j) = m(rows[i], j);
    return out;
}

CscMatrix take_rows(const CscMatrix& m, const std::vector<index_t>& rows) {
    // Row gather through the CSR view keeps per-row work proportional to nnz.
    CsrMatrix r = csc_to_csr(m);
    CsrMatrix out;
    out.n_rows = static_cast<index_t>(rows.size());
    out.n_cols = m.n_cols;
    out.indptr.assign(rows.size() + 1, 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const index_t src = rows[i];
        for (index_t k = r.indptr[src]; k < r.indptr[src + 1]; ++k) {
            out.indices.push_back(r.indices[k]);
            out.data.push_back(r.data[k]);
        }
        out.indptr[i + 1] = static_cast<index_t>(out.data.size());
    }
    return csr_to_csc(out);
}

}  // namespace rpt
