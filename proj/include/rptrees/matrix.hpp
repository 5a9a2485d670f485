#pragma once

#include <cstdint>
#include <tuple>
#include <vector>

#include "rptrees/error.hpp"

namespace rpt {

using index_t = std::int64_t;

enum class Layout { RowMajor, ColMajor };

// Contiguous numeric matrix, row- or column-major.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(index_t n_rows, index_t n_cols, Layout layout = Layout::RowMajor)
        : n_rows_(n_rows), n_cols_(n_cols), layout_(layout),
          values_(static_cast<std::size_t>(n_rows * n_cols), 0.0) {}

    index_t n_rows() const { return n_rows_; }
    index_t n_cols() const { return n_cols_; }
    Layout layout() const { return layout_; }

    double operator()(index_t i, index_t j) const { return values_[offset(i, j)]; }
    double& operator()(index_t i, index_t j) { return values_[offset(i, j)]; }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    DenseMatrix with_layout(Layout layout) const;

    bool operator==(const DenseMatrix& other) const;

private:
    std::size_t offset(index_t i, index_t j) const {
        return layout_ == Layout::RowMajor
                   ? static_cast<std::size_t>(i * n_cols_ + j)
                   : static_cast<std::size_t>(j * n_rows_ + i);
    }

    index_t n_rows_ = 0;
    index_t n_cols_ = 0;
    Layout layout_ = Layout::RowMajor;
    std::vector<double> values_;
};

// Compressed sparse column storage. Canonical form: indptr non-decreasing,
// strictly increasing row indices inside each column, no stored zeros.
struct CscMatrix {
    index_t n_rows = 0;
    index_t n_cols = 0;
    std::vector<index_t> indptr;   // length n_cols + 1
    std::vector<index_t> indices;  // row indices, length nnz
    std::vector<double> data;      // length nnz

    index_t nnz() const { return static_cast<index_t>(data.size()); }
    index_t col_nnz(index_t j) const { return indptr[j + 1] - indptr[j]; }
};

// Compressed sparse row storage, the transpose layout of CscMatrix.
struct CsrMatrix {
    index_t n_rows = 0;
    index_t n_cols = 0;
    std::vector<index_t> indptr;   // length n_rows + 1
    std::vector<index_t> indices;  // column indices, length nnz
    std::vector<double> data;

    index_t nnz() const { return static_cast<index_t>(data.size()); }
};

using Triplet = std::tuple<index_t, index_t, double>;

CscMatrix csc_from_triplets(std::vector<Triplet> triplets, index_t n_rows, index_t n_cols);

CsrMatrix csc_to_csr(const CscMatrix& m);
CscMatrix csr_to_csc(const CsrMatrix& m);

// Default cap of 1 GiB guards against densifying a matrix that only makes
// sense in sparse form.
DenseMatrix densify(const CscMatrix& m, Layout layout = Layout::RowMajor,
                    std::size_t byte_cap = std::size_t{1} << 30);
DenseMatrix densify(const CsrMatrix& m, Layout layout = Layout::RowMajor,
                    std::size_t byte_cap = std::size_t{1} << 30);

CscMatrix sparsify(const DenseMatrix& m);

double density(const CscMatrix& m);
double density(const CsrMatrix& m);
double density(const DenseMatrix& m);

// Throws if the canonical-form invariants are violated.
void check_csc(const CscMatrix& m);
void check_csr(const CsrMatrix& m);

DenseMatrix take_rows(const DenseMatrix& m, const std::vector<index_t>& rows);
CscMatrix take_rows(const CscMatrix& m, const std::vector<index_t>& rows);

}  // namespace rpt
