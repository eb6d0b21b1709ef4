#include "linkopt/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace linkopt::ad {

namespace {
const char* op_name(Op op) {
  switch (op) {
    case Op::kLeaf: return "leaf";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kNeg: return "neg";
    case Op::kScale: return "scale";
    case Op::kAddConst: return "add_const";
    case Op::kExp: return "exp";
    case Op::kLog: return "log";
    case Op::kRelu: return "relu";
    case Op::kPowConst: return "pow";
    case Op::kSum: return "sum";
    case Op::kMin: return "min";
    case Op::kMax: return "max";
    case Op::kLinear: return "linear";
    case Op::kLinearConst: return "linear_const";
    case Op::kConcat: return "concat";
  }
  return "?";
}

bool is_scalar_shape(int rows, int cols) { return rows == 1 && cols == 1; }
}  // namespace

int Var::rows() const { return tape_->rows(*this); }
int Var::cols() const { return tape_->cols(*this); }
std::span<const double> Var::value() const { return tape_->value(*this); }

double Var::scalar() const {
  auto v = tape_->value(*this);
  if (v.size() != 1) throw InvalidInput("Var::scalar on a non-scalar node");
  return v[0];
}

const Tape::Node& Tape::node(Var v) const {
  if (v.tape() != this) throw InvalidInput("variable belongs to another tape");
  return nodes_.at(static_cast<size_t>(v.id()));
}

void Tape::clear() {
  nodes_.clear();
  values_.clear();
  grads_.clear();
  has_grads_ = false;
}

int Tape::push(Op op, int rows, int cols, int a, int b, int c, bool needs_grad) {
  Node n;
  n.op = op;
  n.rows = rows;
  n.cols = cols;
  n.off = values_.size();
  n.a = a;
  n.b = b;
  n.c = c;
  n.needs_grad = needs_grad;
  values_.resize(values_.size() + static_cast<size_t>(rows) * cols, 0.0);
  nodes_.push_back(n);
  return static_cast<int>(nodes_.size()) - 1;
}

Var Tape::leaf(std::span<const double> v, int rows, int cols, bool requires_grad) {
  if (static_cast<size_t>(rows) * cols != v.size()) {
    throw InvalidInput("leaf shape does not match value count");
  }
  const int id = push(Op::kLeaf, rows, cols, -1, -1, -1, requires_grad);
  std::copy(v.begin(), v.end(), val_ptr(id));
  return Var(this, id);
}

Var Tape::leaf(double v, bool requires_grad) {
  return leaf(std::span<const double>(&v, 1), 1, 1, requires_grad);
}

Var Tape::binary(Op op, Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  const bool a_scalar = is_scalar_shape(na.rows, na.cols);
  const bool b_scalar = is_scalar_shape(nb.rows, nb.cols);
  int rows, cols;
  if (na.rows == nb.rows && na.cols == nb.cols) {
    rows = na.rows;
    cols = na.cols;
  } else if (b_scalar) {
    rows = na.rows;
    cols = na.cols;
  } else if (a_scalar) {
    rows = nb.rows;
    cols = nb.cols;
  } else {
    throw InvalidInput("shape mismatch in elementwise op");
  }
  const int id = push(op, rows, cols, a.id(), b.id(),
                      -1, na.needs_grad || nb.needs_grad);
  const double* pa = val_ptr(a.id());
  const double* pb = val_ptr(b.id());
  double* out = val_ptr(id);
  const size_t n = count(id);
  const size_t ca = count(a.id());
  const size_t cb = count(b.id());
  for (size_t i = 0; i < n; ++i) {
    const double va = pa[ca == 1 ? 0 : i];
    const double vb = pb[cb == 1 ? 0 : i];
    switch (op) {
      case Op::kAdd: out[i] = va + vb; break;
      case Op::kSub: out[i] = va - vb; break;
      case Op::kMul: out[i] = va * vb; break;
      default: throw InvalidInput("not a binary op");
    }
  }
  return Var(this, id);
}

Var Tape::add(Var a, Var b) { return binary(Op::kAdd, a, b); }
Var Tape::sub(Var a, Var b) { return binary(Op::kSub, a, b); }
Var Tape::mul(Var a, Var b) { return binary(Op::kMul, a, b); }

Var Tape::unary(Op op, Var a, double k) {
  const Node& na = node(a);
  const int id = push(op, na.rows, na.cols, a.id(), -1, -1, na.needs_grad);
  const double* in = val_ptr(a.id());
  double* out = val_ptr(id);
  const size_t n = count(id);
  for (size_t i = 0; i < n; ++i) {
    switch (op) {
      case Op::kNeg: out[i] = -in[i]; break;
      case Op::kScale: out[i] = in[i] * k; break;
      case Op::kAddConst: out[i] = in[i] + k; break;
      case Op::kExp:
        out[i] = std::exp(in[i]);
        if (!std::isfinite(out[i])) {
          throw NumericError("exp overflow at tape node #" +
                             std::to_string(id));
        }
        break;
      case Op::kLog:
        if (!(in[i] > 0.0)) {
          throw NumericError("log of non-positive value at tape node #" +
                             std::to_string(id));
        }
        out[i] = std::log(in[i]);
        break;
      case Op::kRelu: out[i] = in[i] > 0.0 ? in[i] : 0.0; break;
      case Op::kPowConst:
        out[i] = std::pow(in[i], k);
        if (!std::isfinite(out[i])) {
          throw NumericError("pow domain violation at tape node #" +
                             std::to_string(id));
        }
        break;
      default: throw InvalidInput("not a unary op");
    }
  }
  nodes_[id].k = k;
  return Var(this, id);
}

Var Tape::neg(Var a) { return unary(Op::kNeg, a); }
Var Tape::scale(Var a, double k) { return unary(Op::kScale, a, k); }
Var Tape::add_const(Var a, double k) { return unary(Op::kAddConst, a, k); }
Var Tape::exp(Var a) { return unary(Op::kExp, a); }
Var Tape::log(Var a) { return unary(Op::kLog, a); }
Var Tape::relu(Var a) { return unary(Op::kRelu, a); }
Var Tape::pow_const(Var a, double exponent) {
  return unary(Op::kPowConst, a, exponent);
}

Var Tape::sum(Var a) {
  const Node& na = node(a);
  const int id = push(Op::kSum, 1, 1, a.id(), -1, -1, na.needs_grad);
  const double* in = val_ptr(a.id());
  double acc = 0.0;
  for (size_t i = 0, n = count(a.id()); i < n; ++i) acc += in[i];
  *val_ptr(id) = acc;
  return Var(this, id);
}

Var Tape::min(Var a) {
  const Node& na = node(a);
  const int id = push(Op::kMin, 1, 1, a.id(), -1, -1, na.needs_grad);
  const double* in = val_ptr(a.id());
  int best = 0;
  for (size_t i = 1, n = count(a.id()); i < n; ++i) {
    if (in[i] < in[best]) best = static_cast<int>(i);
  }
  *val_ptr(id) = in[best];
  nodes_[id].arg_index = best;
  return Var(this, id);
}

Var Tape::max(Var a) {
  const Node& na = node(a);
  const int id = push(Op::kMax, 1, 1, a.id(), -1, -1, na.needs_grad);
  const double* in = val_ptr(a.id());
  int best = 0;
  for (size_t i = 1, n = count(a.id()); i < n; ++i) {
    if (in[i] > in[best]) best = static_cast<int>(i);
  }
  *val_ptr(id) = in[best];
  nodes_[id].arg_index = best;
  return Var(this, id);
}

Var Tape::linear(Var x, Var w, Var bias) {
  // Copy shapes out: push() may reallocate the node vector.
  const int batch = node(x).rows;
  const int fan_in = node(x).cols;
  const int fan_out = node(w).rows;
  if (fan_in != node(w).cols) throw InvalidInput("linear: input width != fan-in");
  bool needs = node(x).needs_grad || node(w).needs_grad;
  int bid = -1;
  if (bias.valid()) {
    if (static_cast<int>(count(bias.id())) != fan_out) {
      throw InvalidInput("linear: bias length != fan-out");
    }
    needs = needs || node(bias).needs_grad;
    bid = bias.id();
  }
  const int id = push(Op::kLinear, batch, fan_out, x.id(), w.id(), bid, needs);
  affine_xwt(val_ptr(x.id()), batch, fan_in, val_ptr(w.id()), fan_out,
             bid >= 0 ? val_ptr(bid) : nullptr, val_ptr(id));
  return Var(this, id);
}

Var Tape::linear_const(Var x, const Mat* w, const std::vector<double>* bias) {
  const int batch = node(x).rows;
  const int fan_in = node(x).cols;
  if (fan_in != w->cols) throw InvalidInput("linear: input width != fan-in");
  if (bias && static_cast<int>(bias->size()) != w->rows) {
    throw InvalidInput("linear: bias length != fan-out");
  }
  const int id =
      push(Op::kLinearConst, batch, w->rows, x.id(), -1, -1, node(x).needs_grad);
  nodes_[id].w = w;
  nodes_[id].wb = bias;
  affine_xwt(val_ptr(x.id()), batch, fan_in, w->data.data(), w->rows,
             bias ? bias->data() : nullptr, val_ptr(id));
  return Var(this, id);
}

Var Tape::concat(std::initializer_list<Var> parts) {
  if (parts.size() == 0 || parts.size() > 3) {
    throw InvalidInput("concat takes 1 to 3 parts");
  }
  int total = 0;
  bool needs = false;
  int ids[3] = {-1, -1, -1};
  int i = 0;
  for (Var p : parts) {
    const Node& np = node(p);
    if (np.rows != 1) throw InvalidInput("concat expects row vectors");
    total += np.cols;
    needs = needs || np.needs_grad;
    ids[i++] = p.id();
  }
  const int id = push(Op::kConcat, 1, total, ids[0], ids[1], ids[2], needs);
  double* out = val_ptr(id);
  for (int j = 0; j < i; ++j) {
    const double* in = val_ptr(ids[j]);
    const size_t n = count(ids[j]);
    std::copy(in, in + n, out);
    out += n;
  }
  return Var(this, id);
}

std::span<const double> Tape::value(Var v) const {
  const Node& n = node(v);
  return {values_.data() + n.off, static_cast<size_t>(n.rows) * n.cols};
}

std::span<const double> Tape::grad(Var v) const {
  const Node& n = node(v);
  if (!has_grads_) throw InvalidInput("grad requested before backward");
  return {grads_.data() + n.off, static_cast<size_t>(n.rows) * n.cols};
}

void Tape::backward(Var root) {
  const Node& r = node(root);
  if (!is_scalar_shape(r.rows, r.cols)) {
    throw InvalidInput("backward requires a scalar root");
  }
  grads_.assign(values_.size(), 0.0);
  has_grads_ = true;
  grads_[r.off] = 1.0;

  for (int id = root.id(); id >= 0; --id) {
    const Node& n = nodes_[id];
    if (!n.needs_grad || n.op == Op::kLeaf) continue;
    const double* g = grads_.data() + n.off;
    const size_t cnt = count(id);
    switch (n.op) {
      case Op::kAdd:
      case Op::kSub: {
        const double sb = n.op == Op::kSub ? -1.0 : 1.0;
        double* ga = grad_ptr(n.a);
        double* gb = grad_ptr(n.b);
        const size_t ca = count(n.a);
        const size_t cb = count(n.b);
        for (size_t i = 0; i < cnt; ++i) {
          ga[ca == 1 ? 0 : i] += g[i];
          gb[cb == 1 ? 0 : i] += sb * g[i];
        }
        break;
      }
      case Op::kMul: {
        double* ga = grad_ptr(n.a);
        double* gb = grad_ptr(n.b);
        const double* va = val_ptr(n.a);
        const double* vb = val_ptr(n.b);
        const size_t ca = count(n.a);
        const size_t cb = count(n.b);
        for (size_t i = 0; i < cnt; ++i) {
          ga[ca == 1 ? 0 : i] += g[i] * vb[cb == 1 ? 0 : i];
          gb[cb == 1 ? 0 : i] += g[i] * va[ca == 1 ? 0 : i];
        }
        break;
      }
      case Op::kNeg: {
        double* ga = grad_ptr(n.a);
        for (size_t i = 0; i < cnt; ++i) ga[i] -= g[i];
        break;
      }
      case Op::kScale: {
        double* ga = grad_ptr(n.a);
        for (size_t i = 0; i < cnt; ++i) ga[i] += g[i] * n.k;
        break;
      }
      case Op::kAddConst: {
        double* ga = grad_ptr(n.a);
        for (size_t i = 0; i < cnt; ++i) ga[i] += g[i];
        break;
      }
      case Op::kExp: {
        double* ga = grad_ptr(n.a);
        const double* out = val_ptr(id);
        for (size_t i = 0; i < cnt; ++i) ga[i] += g[i] * out[i];
        break;
      }
      case Op::kLog: {
        double* ga = grad_ptr(n.a);
        const double* in = val_ptr(n.a);
        for (size_t i = 0; i < cnt; ++i) ga[i] += g[i] / in[i];
        break;
      }
      case Op::kRelu: {
        // Zero subgradient at exactly 0.
        double* ga = grad_ptr(n.a);
        const double* in = val_ptr(n.a);
        for (size_t i = 0; i < cnt; ++i) {
          if (in[i] > 0.0) ga[i] += g[i];
        }
        break;
      }
      case Op::kPowConst: {
        double* ga = grad_ptr(n.a);
        const double* in = val_ptr(n.a);
        for (size_t i = 0; i < cnt; ++i) {
          ga[i] += g[i] * n.k * std::pow(in[i], n.k - 1.0);
        }
        break;
      }
      case Op::kSum: {
        double* ga = grad_ptr(n.a);
        const double gs = g[0];
        for (size_t i = 0, m = count(n.a); i < m; ++i) ga[i] += gs;
        break;
      }
      case Op::kMin:
      case Op::kMax: {
        grad_ptr(n.a)[n.arg_index] += g[0];
        break;
      }
      case Op::kLinear: {
        const Node& nx = nodes_[n.a];
        const Node& nw = nodes_[n.b];
        if (nodes_[n.a].needs_grad) {
          affine_xwt_grad_x(g, nx.rows, nx.cols, val_ptr(n.b), nw.rows,
                            grad_ptr(n.a));
        }
        if (nodes_[n.b].needs_grad || (n.c >= 0 && nodes_[n.c].needs_grad)) {
          double* db = n.c >= 0 && nodes_[n.c].needs_grad ? grad_ptr(n.c) : nullptr;
          double* dw = nodes_[n.b].needs_grad ? grad_ptr(n.b) : nullptr;
          if (dw) {
            affine_xwt_grad_w(g, val_ptr(n.a), nx.rows, nx.cols, nw.rows, dw, db);
          } else if (db) {
            for (int bi = 0; bi < nx.rows; ++bi) {
              for (int o = 0; o < nw.rows; ++o) {
                db[o] += g[static_cast<size_t>(bi) * nw.rows + o];
              }
            }
          }
        }
        break;
      }
      case Op::kLinearConst: {
        const Node& nx = nodes_[n.a];
        affine_xwt_grad_x(g, nx.rows, nx.cols, n.w->data.data(), n.w->rows,
                          grad_ptr(n.a));
        break;
      }
      case Op::kConcat: {
        const double* gp = g;
        for (int oid : {n.a, n.b, n.c}) {
          if (oid < 0) break;
          double* go = grad_ptr(oid);
          const size_t m = count(oid);
          for (size_t i = 0; i < m; ++i) go[i] += gp[i];
          gp += m;
        }
        break;
      }
      case Op::kLeaf:
        break;
    }
  }
}

std::string Tape::dump() const {
  std::ostringstream os;
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    os << '#' << i << ' ' << op_name(n.op) << ' ' << n.rows << 'x' << n.cols;
    if (n.a >= 0) os << " a=" << n.a;
    if (n.b >= 0) os << " b=" << n.b;
    if (n.c >= 0) os << " c=" << n.c;
    if (n.op == Op::kScale || n.op == Op::kAddConst || n.op == Op::kPowConst) {
      os << " k=" << n.k;
    }
    if (n.arg_index >= 0) os << " arg=" << n.arg_index;
    if (n.needs_grad) os << " [grad]";
    const double* v = values_.data() + n.off;
    os << " v0=" << v[0] << '\n';
  }
  return os.str();
}

}  // namespace linkopt::ad
