#include "relest/kernels.hpp"

#include <omp.h>

namespace relest::kernels {

namespace serial {

Matrix scatter(const Matrix& rows, const Vector& mu) {
  const Eigen::Index n = rows.rows();
  const Eigen::Index d = rows.cols();
  Matrix c = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) acc += (rows(k, i) - mu(i)) * (rows(k, j) - mu(j));
      c(i, j) = acc / static_cast<double>(n);
      c(j, i) = c(i, j);
    }
  }
  return c;
}

TraceProducts trace_products(std::span<const Matrix> w, const Matrix& v) {
  const auto m = static_cast<Eigen::Index>(w.size());
  TraceProducts out{Matrix::Zero(m, m), Vector::Zero(m)};
  for (Eigen::Index g = 0; g < m; ++g) {
    for (Eigen::Index f = 0; f < m; ++f) out.a(g, f) = (w[g] * w[f]).trace();
    out.b(g) = (w[g] * v).trace();
  }
  return out;
}

}  // namespace serial

namespace omp {

Matrix scatter(const Matrix& rows, const Vector& mu) {
  const Eigen::Index n = rows.rows();
  const Eigen::Index d = rows.cols();
  // Column-major copy of the centred data keeps the inner loop contiguous.
  const Matrix centred = rows.rowwise() - mu.transpose();
  Matrix c = Matrix::Zero(d, d);
  const Eigen::Index pairs = d * (d + 1) / 2;
#pragma omp parallel for schedule(static)
  for (Eigen::Index p = 0; p < pairs; ++p) {
    // Unrank p into (i, j) with i <= j.
    Eigen::Index i = 0;
    Eigen::Index rem = p;
    while (rem >= d - i) {
      rem -= d - i;
      ++i;
    }
    const Eigen::Index j = i + rem;
    const double* xi = centred.col(i).data();
    const double* xj = centred.col(j).data();
    double acc = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) acc += xi[k] * xj[k];
    c(i, j) = acc / static_cast<double>(n);
    c(j, i) = c(i, j);
  }
  return c;
}

TraceProducts trace_products(std::span<const Matrix> w, const Matrix& v) {
  const auto m = static_cast<Eigen::Index>(w.size());
  TraceProducts out{Matrix::Zero(m, m), Vector::Zero(m)};
  if (m == 0) return out;
  const Eigen::Index d = v.rows();
  // tr(X Y) = sum_ij X(i,j) Y(j,i); only g <= f is computed, then mirrored.
  const Eigen::Index pairs = m * (m + 1) / 2 + m;
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index p = 0; p < pairs; ++p) {
    const bool is_b = p >= m * (m + 1) / 2;
    Eigen::Index g = 0;
    Eigen::Index f = 0;
    if (is_b) {
      g = p - m * (m + 1) / 2;
    } else {
      Eigen::Index rem = p;
      while (rem >= m - g) {
        rem -= m - g;
        ++g;
      }
      f = g + rem;
    }
    const Matrix& x = w[g];
    const Matrix& y = is_b ? v : w[f];
    double acc = 0.0;
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) acc += x(i, j) * y(j, i);
    if (is_b) {
      out.b(g) = acc;
    } else {
      out.a(g, f) = acc;
      out.a(f, g) = acc;
    }
  }
  return out;
}

}  // namespace omp

void set_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace relest::kernels
