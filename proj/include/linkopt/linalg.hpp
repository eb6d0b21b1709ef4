#pragma once

#include <cstddef>
#include <vector>

namespace linkopt {

/// Dense row-major matrix. Small and dumb on purpose; the hot paths live in
/// the free kernels below, which both the plain and the taped code share so
/// that the two produce bit-identical values.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
  const double* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }
  size_t size() const { return data.size(); }
};

/// y[b,o] = sum_i x[b,i] * w[o,i] + bias[o].  w is (out x in) row-major, so
/// each output is a dot product of two contiguous rows. bias may be null.
void affine_xwt(const double* x, int batch, int in, const double* w, int out,
                const double* bias, double* y);

/// dx[b,i] += sum_o dy[b,o] * w[o,i]
void affine_xwt_grad_x(const double* dy, int batch, int in, const double* w,
                       int out, double* dx);

/// dw[o,i] += sum_b dy[b,o] * x[b,i];  db[o] += sum_b dy[b,o] (db may be null)
void affine_xwt_grad_w(const double* dy, const double* x, int batch, int in,
                       int out, double* dw, double* db);

}  // namespace linkopt
