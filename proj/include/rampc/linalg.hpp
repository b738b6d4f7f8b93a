#pragma once

#include <cstddef>
#include <vector>

namespace rampc {

using Vector = std::vector<double>;

/// Dense row-major matrix. Small problems only; no view machinery.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool empty() const { return rows_ == 0 || cols_ == 0; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// y = A x.
Vector matvec(const Matrix& a, const Vector& x);

/// y = A^T x.
Vector matvec_t(const Matrix& a, const Vector& x);

/// Euclidean norm of a row of A.
double row_norm(const Matrix& a, std::size_t i);

double norm_inf(const Vector& v);

/// Solves the square system A x = b by Gaussian elimination with partial
/// pivoting. Returns false when A is singular to within `tol` (relative to
/// the largest pivot candidate).
bool solve_square(Matrix a, Vector b, Vector& x, double tol = 1e-12);

/// Compressed sparse rows; enough structure for assembling the dualized
/// optimal control problem without densifying it.
struct SparseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> col;
    std::vector<double> val;

    void add_row(const std::vector<std::pair<std::size_t, double>>& entries);
    Vector multiply(const Vector& x) const;
    Vector multiply_t(const Vector& x) const;
    Matrix to_dense() const;
    static SparseMatrix from_dense(const Matrix& a, double drop_tol = 0.0);
};

} // namespace rampc
