#include "linkopt/linalg.hpp"

namespace linkopt {

void affine_xwt(const double* x, int batch, int in, const double* w, int out,
                const double* bias, double* y) {
  for (int b = 0; b < batch; ++b) {
    const double* xb = x + static_cast<size_t>(b) * in;
    double* yb = y + static_cast<size_t>(b) * out;
    for (int o = 0; o < out; ++o) {
      const double* wo = w + static_cast<size_t>(o) * in;
      double acc = bias ? bias[o] : 0.0;
      for (int i = 0; i < in; ++i) acc += xb[i] * wo[i];
      yb[o] = acc;
    }
  }
}

void affine_xwt_grad_x(const double* dy, int batch, int in, const double* w,
                       int out, double* dx) {
  for (int b = 0; b < batch; ++b) {
    const double* dyb = dy + static_cast<size_t>(b) * out;
    double* dxb = dx + static_cast<size_t>(b) * in;
    for (int o = 0; o < out; ++o) {
      const double g = dyb[o];
      if (g == 0.0) continue;
      const double* wo = w + static_cast<size_t>(o) * in;
      for (int i = 0; i < in; ++i) dxb[i] += g * wo[i];
    }
  }
}

void affine_xwt_grad_w(const double* dy, const double* x, int batch, int in,
                       int out, double* dw, double* db) {
  for (int b = 0; b < batch; ++b) {
    const double* dyb = dy + static_cast<size_t>(b) * out;
    const double* xb = x + static_cast<size_t>(b) * in;
    for (int o = 0; o < out; ++o) {
      const double g = dyb[o];
      if (db) db[o] += g;
      if (g == 0.0) continue;
      double* dwo = dw + static_cast<size_t>(o) * in;
      for (int i = 0; i < in; ++i) dwo[i] += g * xb[i];
    }
  }
}

}  // namespace linkopt
