#include "rampc/linalg.hpp"

#include "rampc/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace rampc {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Vector matvec(const Matrix& a, const Vector& x) {
    Vector y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        y[i] = kernels::dot(a.row(i), x.data(), a.cols());
    }
    return y;
}

Vector matvec_t(const Matrix& a, const Vector& x) {
    Vector y(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        kernels::axpy(x[i], a.row(i), y.data(), a.cols());
    }
    return y;
}

double row_norm(const Matrix& a, std::size_t i) {
    return std::sqrt(kernels::sum_sq(a.row(i), a.cols()));
}

double norm_inf(const Vector& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

bool solve_square(Matrix a, Vector b, Vector& x, double tol) {
    const std::size_t n = a.rows();
    double scale = 0.0;
    for (std::size_t i = 0; i < n * n; ++i) scale = std::max(scale, std::fabs(a.data()[i]));
    if (scale == 0.0) return false;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::fabs(a(i, k)) > std::fabs(a(p, k))) p = i;
        }
        if (std::fabs(a(p, k)) <= tol * scale) return false;
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
            std::swap(b[k], b[p]);
        }
        const double inv = 1.0 / a(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) * inv;
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            b[i] -= f * b[k];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t ik = n; ik-- > 0;) {
        double s = b[ik];
        for (std::size_t j = ik + 1; j < n; ++j) s -= a(ik, j) * x[j];
        x[ik] = s / a(ik, ik);
    }
    return true;
}

void SparseMatrix::add_row(const std::vector<std::pair<std::size_t, double>>& entries) {
    for (const auto& [c, v] : entries) {
        col.push_back(c);
        val.push_back(v);
    }
    row_ptr.push_back(col.size());
    ++rows;
}

Vector SparseMatrix::multiply(const Vector& x) const {
    Vector y(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        double s = 0.0;
        for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
        y[i] = s;
    }
    return y;
}

Vector SparseMatrix::multiply_t(const Vector& x) const {
    Vector y(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) y[col[k]] += val[k] * x[i];
    }
    return y;
}

Matrix SparseMatrix::to_dense() const {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) m(i, col[k]) += val[k];
    }
    return m;
}

SparseMatrix SparseMatrix::from_dense(const Matrix& a, double drop_tol) {
    SparseMatrix s;
    s.cols = a.cols();
    std::vector<std::pair<std::size_t, double>> row;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        row.clear();
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (std::fabs(a(i, j)) > drop_tol) row.emplace_back(j, a(i, j));
        }
        s.add_row(row);
    }
    return s;
}

} // namespace rampc
