#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "linkopt/error.hpp"
#include "linkopt/linalg.hpp"

namespace linkopt::ad {

class Tape;

/// Handle to a tape node. Values are rank-2 (rows x cols); scalars are 1x1.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  int rows() const;
  int cols() const;
  /// Forward value; scalar() requires a 1x1 node.
  std::span<const double> value() const;
  double scalar() const;

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

enum class Op : uint8_t {
  kLeaf,
  kAdd,
  kSub,
  kMul,
  kNeg,
  kScale,
  kAddConst,
  kExp,
  kLog,
  kRelu,
  kPowConst,
  kSum,
  kMin,
  kMax,
  kLinear,       // x(BxI) * W^T(OxI) + b, weights are tape nodes
  kLinearConst,  // same, weights external and constant
  kConcat,       // row vectors, up to 3 parts
};

/// Record of primitive operations with eager forward evaluation and a single
/// reverse sweep. One tape has one writer; independent tapes are independent.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Drops all nodes but keeps allocated capacity for reuse.
  void clear();
  size_t size() const { return nodes_.size(); }

  Var leaf(std::span<const double> v, int rows, int cols,
           bool requires_grad = false);
  Var leaf(double v, bool requires_grad = false);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var neg(Var a);
  Var scale(Var a, double k);
  Var add_const(Var a, double k);
  Var exp(Var a);
  Var log(Var a);
  Var relu(Var a);
  Var pow_const(Var a, double exponent);
  Var sum(Var a);
  Var min(Var a);
  Var max(Var a);
  Var linear(Var x, Var w, Var bias);  // bias may be invalid Var for none
  Var linear_const(Var x, const Mat* w, const std::vector<double>* bias);
  Var concat(std::initializer_list<Var> parts);

  /// Reverse sweep from a scalar root. Gradients of earlier sweeps are
  /// discarded.
  void backward(Var root);

  std::span<const double> value(Var v) const;
  std::span<const double> grad(Var v) const;
  int rows(Var v) const { return node(v).rows; }
  int cols(Var v) const { return node(v).cols; }
  /// Retained argmin/argmax (flat index, lowest on ties) of a min/max node.
  int arg_index(Var v) const { return node(v).arg_index; }

  /// Text dump for debugging.
  std::string dump() const;

 private:
  struct Node {
    Op op = Op::kLeaf;
    int rows = 0;
    int cols = 0;
    size_t off = 0;
    int a = -1;
    int b = -1;
    int c = -1;
    double k = 0.0;
    int arg_index = -1;
    const Mat* w = nullptr;
    const std::vector<double>* wb = nullptr;
    bool needs_grad = false;
  };

  const Node& node(Var v) const;
  int push(Op op, int rows, int cols, int a, int b, int c, bool needs_grad);
  double* val_ptr(int id) { return values_.data() + nodes_[id].off; }
  const double* val_ptr(int id) const { return values_.data() + nodes_[id].off; }
  double* grad_ptr(int id) { return grads_.data() + nodes_[id].off; }
  size_t count(int id) const {
    return static_cast<size_t>(nodes_[id].rows) * nodes_[id].cols;
  }
  Var binary(Op op, Var a, Var b);
  Var unary(Op op, Var a, double k = 0.0);

  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<double> grads_;
  bool has_grads_ = false;
};

// Convenience operators; both operands must live on the same tape.
inline Var operator+(Var a, Var b) { return a.tape()->add(a, b); }
inline Var operator-(Var a, Var b) { return a.tape()->sub(a, b); }
inline Var operator*(Var a, Var b) { return a.tape()->mul(a, b); }
inline Var operator-(Var a) { return a.tape()->neg(a); }

}  // namespace linkopt::ad
