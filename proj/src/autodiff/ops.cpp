// Copyright 2026 The shiftlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "shiftlab/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "shiftlab/errors.hpp"
#include "shiftlab/rng.hpp"

namespace shiftlab::ad {
namespace {

Tape& tape_of(Var a) {
  if (!a.valid()) throw ContractError("use of an unbound Var");
  return *a.tape();
}

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw DimensionError(std::string(op) + " expects a matrix, got " + shape_str(t.shape()));
}

void check_finite(const Tensor& t, const char* op) {
  for (double v : t.data()) {
    if (!std::isfinite(v)) throw NumericError(std::string(op) + " produced a non-finite value");
  }
}

enum class Bcast { kSame, kScalar, kRow };

// How `small` maps onto the element grid of `big`.
bool broadcastable(const Tensor& big, const Tensor& small, Bcast& mode) {
  if (big.shape() == small.shape()) {
    mode = Bcast::kSame;
    return true;
  }
  if (small.size() == 1) {
    mode = Bcast::kScalar;
    return true;
  }
  if (big.rank() == 2) {
    const bool row_vec = (small.rank() == 1 && small.size() == big.cols()) ||
                         (small.rank() == 2 && small.rows() == 1 && small.cols() == big.cols());
    if (row_vec) {
      mode = Bcast::kRow;
      return true;
    }
  }
  return false;
}

inline std::size_t map_index(Bcast mode, std::size_t i, std::size_t cols) {
  switch (mode) {
    case Bcast::kSame: return i;
    case Bcast::kScalar: return 0;
    case Bcast::kRow: return i % cols;
  }
  return i;
}

struct BinaryPlan {
  Shape out_shape;
  Bcast a_mode;
  Bcast b_mode;
  std::size_t cols;
};

BinaryPlan plan_binary(const Tensor& a, const Tensor& b, const char* op) {
  Bcast mode;
  if (broadcastable(a, b, mode)) return {a.shape(), Bcast::kSame, mode, a.cols()};
  if (broadcastable(b, a, mode)) return {b.shape(), mode, Bcast::kSame, b.cols()};
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_str(a.shape()) + " and " +
                       shape_str(b.shape()));
}

// f(x, y) forward; da(x, y, out) and db(x, y, out) are the local partials.
template <typename F, typename DA, typename DB>
Var binary(Var a, Var b, const char* name, F f, DA da, DB db) {
  Tape& tape = tape_of(a);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const BinaryPlan plan = plan_binary(av, bv, name);
  Tensor out(plan.out_shape);
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = f(av[map_index(plan.a_mode, i, plan.cols)], bv[map_index(plan.b_mode, i, plan.cols)]);
  }
  check_finite(out, name);
  const std::size_t aid = a.id(), bid = b.id(), oid = tape.size();
  return tape.record(std::move(out), {a, b}, [=](Tape& t, const Tensor& g) {
    const Tensor& x = t.value(aid);
    const Tensor& y = t.value(bid);
    const Tensor& o = t.value(oid);
    Tensor* ga = t.grad_of(aid);
    Tensor* gb = t.grad_of(bid);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::size_t ia = map_index(plan.a_mode, i, plan.cols);
      const std::size_t ib = map_index(plan.b_mode, i, plan.cols);
      if (ga) (*ga)[ia] += g[i] * da(x[ia], y[ib], o[i]);
      if (gb) (*gb)[ib] += g[i] * db(x[ia], y[ib], o[i]);
    }
  });
}

// f(x) forward; df(x, out) local derivative.
template <typename F, typename DF>
Var unary(Var a, const char* name, F f, DF df) {
  Tape& tape = tape_of(a);
  const Tensor& av = a.value();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = f(av[i]);
  check_finite(out, name);
  const std::size_t aid = a.id(), oid = tape.size();
  return tape.record(std::move(out), {a}, [=](Tape& t, const Tensor& g) {
    const Tensor& x = t.value(aid);
    const Tensor& o = t.value(oid);
    Tensor* ga = t.grad_of(aid);
    for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * df(x[i], o[i]);
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& tape = tape_of(a);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank2(av, "matmul");
  require_rank2(bv, "matmul");
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  if (bv.rows() != k) {
    throw DimensionError("matmul: inner dimensions differ, " + shape_str(av.shape()) + " x " + shape_str(bv.shape()));
  }
  Tensor out({m, n});
  const double* A = av.data().data();
  const double* B = bv.data().data();
  double* C = out.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = B + p * n;
      double* crow = C + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
  const std::size_t aid = a.id(), bid = b.id();
  return tape.record(std::move(out), {a, b}, [=](Tape& t, const Tensor& g) {
    const double* G = g.data().data();
    if (Tensor* ga = t.grad_of(aid)) {
      // dA = G * B^T
      const double* Bv = t.value(bid).data().data();
      double* GA = ga->data().data();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double* brow = Bv + p * n;
          const double* grow = G + i * n;
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
          GA[i * k + p] += acc;
        }
      }
    }
    if (Tensor* gb = t.grad_of(bid)) {
      // dB = A^T * G
      const double* Av = t.value(aid).data().data();
      double* GB = gb->data().data();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = Av[i * k + p];
          if (aip == 0.0) continue;
          const double* grow = G + i * n;
          double* gbrow = GB + p * n;
          for (std::size_t j = 0; j < n; ++j) gbrow[j] += aip * grow[j];
        }
      }
    }
  });
}

Var transpose(Var a) {
  Tape& tape = tape_of(a);
  const Tensor& av = a.value();
  require_rank2(av, "transpose");
  const std::size_t r = av.rows(), c = av.cols();
  Tensor out({c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = av[i * c + j];
  const std::size_t aid = a.id();
  return tape.record(std::move(out), {a}, [=](Tape& t, const Tensor& g) {
    Tensor* ga = t.grad_of(aid);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) (*ga)[i * c + j] += g[j * r + i];
  });
}

Var reshape(Var a, Shape shape) {
  Tape& tape = tape_of(a);
  Tensor out = a.value().reshaped(std::move(shape));
  return tape.record(std::move(out), {a}, [aid = a.id()](Tape& t, const Tensor& g) {
    Tensor* ga = t.grad_of(aid);
    for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
  });
}

Var add(Var a, Var b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; }, [](double, double, double) { return 1.0; },
      [](double, double, double) { return 1.0; });
}

Var sub(Var a, Var b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; }, [](double, double, double) { return 1.0; },
      [](double, double, double) { return -1.0; });
}

Var mul(Var a, Var b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y, double) { return y; },
      [](double x, double, double) { return x; });
}

Var div(Var a, Var b) {
  for (double v : b.value().data()) {
    if (v == 0.0) throw NumericError("div: division by zero");
  }
  return binary(
      a, b, "div", [](double x, double y) { return x / y; }, [](double, double y, double) { return 1.0 / y; },
      [](double, double y, double o) { return -o / y; });
}

Var add_scalar(Var a, double s) {
  return unary(
      a, "add_scalar", [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Var mul_scalar(Var a, double s) {
  return unary(
      a, "mul_scalar", [s](double x) { return x * s; }, [s](double, double) { return s; });
}

Var rsub_scalar(double s, Var a) {
  return unary(
      a, "rsub_scalar", [s](double x) { return s - x; }, [](double, double) { return -1.0; });
}

Var relu(Var a) {
  return unary(
      a, "relu", [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(Var a) {
  return unary(
      a, "sigmoid",
      [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double o) { return o * (1.0 - o); });
}

Var log(Var a) {
  for (double v : a.value().data()) {
    if (!(v >= 0.0)) throw NumericError("log: non-positive input " + std::to_string(v));
  }
  return unary(
      a, "log", [](double x) { return std::log(std::max(x, kLogFloor)); },
      [](double x, double) { return x < kLogFloor ? 0.0 : 1.0 / x; });
}

Var exp(Var a) {
  return unary(
      a, "exp", [](double x) { return std::exp(x); }, [](double, double o) { return o; });
}

Var neg(Var a) {
  return unary(
      a, "neg", [](double x) { return -x; }, [](double, double) { return -1.0; });
}

Var square(Var a) {
  return unary(
      a, "square", [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var clamp(Var a, double lo, double hi) {
  return unary(
      a, "clamp", [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Var dropout(Var a, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ContractError("dropout rate must lie in [0, 1)");
  const double scale = 1.0 / (1.0 - rate);
  const Tensor& av = a.value();
  std::vector<double> keep(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) {
    keep[i] = to_unit(splitmix64(mix_keys({seed, i}))) >= rate ? scale : 0.0;
  }
  Tape& tape = tape_of(a);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * keep[i];
  const std::size_t aid = a.id();
  return tape.record(std::move(out), {a}, [aid, keep = std::move(keep)](Tape& t, const Tensor& g) {
    Tensor* ga = t.grad_of(aid);
    for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * keep[i];
  });
}

Var scatter_sum(Var src, std::span<const std::size_t> index, std::size_t out_size) {
  Tape& tape = tape_of(src);
  const Tensor& sv = src.value();
  const std::size_t e = sv.rows(), d = sv.cols();
  if (index.size() != e) {
    throw DimensionError("scatter_sum: " + std::to_string(index.size()) + " indices for " + std::to_string(e) + " rows");
  }
  for (std::size_t idx : index) {
    if (idx >= out_size) {
      throw IndexError("scatter_sum: index " + std::to_string(idx) + " out of range " + std::to_string(out_size));
    }
  }
  Shape shape = sv.rank() <= 1 ? Shape{out_size} : Shape{out_size, d};
  Tensor out(std::move(shape));
  for (std::size_t r = 0; r < e; ++r) {
    const double* s = sv.data().data() + r * d;
    double* o = out.data().data() + index[r] * d;
    for (std::size_t j = 0; j < d; ++j) o[j] += s[j];
  }
  std::vector<std::size_t> idx(index.begin(), index.end());
  const std::size_t sid = src.id();
  return tape.record(std::move(out), {src}, [sid, d, idx = std::move(idx)](Tape& t, const Tensor& g) {
    Tensor* gs = t.grad_of(sid);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const double* gi = g.data().data() + idx[r] * d;
      double* go = gs->data().data() + r * d;
      for (std::size_t j = 0; j < d; ++j) go[j] += gi[j];
    }
  });
}

Var gather_rows(Var src, std::span<const std::size_t> index) {
  Tape& tape = tape_of(src);
  const Tensor& sv = src.value();
  const std::size_t n = sv.rows(), d = sv.cols();
  for (std::size_t idx : index) {
    if (idx >= n) throw IndexError("gather_rows: index " + std::to_string(idx) + " out of range " + std::to_string(n));
  }
  Shape shape = sv.rank() <= 1 ? Shape{index.size()} : Shape{index.size(), d};
  Tensor out(std::move(shape));
  for (std::size_t r = 0; r < index.size(); ++r) {
    std::copy_n(sv.data().data() + index[r] * d, d, out.data().data() + r * d);
  }
  std::vector<std::size_t> idx(index.begin(), index.end());
  const std::size_t sid = src.id();
  return tape.record(std::move(out), {src}, [sid, d, idx = std::move(idx)](Tape& t, const Tensor& g) {
    Tensor* gs = t.grad_of(sid);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const double* gi = g.data().data() + r * d;
      double* go = gs->data().data() + idx[r] * d;
      for (std::size_t j = 0; j < d; ++j) go[j] += gi[j];
    }
  });
}

Var reduce(Var a, Reduce kind, std::size_t axis) {
  Tape& tape = tape_of(a);
  const Tensor& av = a.value();
  std::size_t outer, inner, count;  // out index = o, reduced index = c
  bool rows_axis;
  Shape out_shape;
  if (av.rank() <= 1) {
    if (axis != 0) throw DimensionError("reduce: axis " + std::to_string(axis) + " invalid for a vector");
    outer = 1;
    count = av.size();
    inner = 1;
    rows_axis = true;
    out_shape = {1};
  } else if (av.rank() == 2 && axis < 2) {
    rows_axis = axis == 0;
    outer = rows_axis ? av.cols() : av.rows();
    count = rows_axis ? av.rows() : av.cols();
    inner = 0;
    out_shape = {outer};
  } else {
    throw DimensionError("reduce: axis " + std::to_string(axis) + " invalid for " + shape_str(av.shape()));
  }
  if (count == 0 && kind != Reduce::kSum) throw NumericError("reduce: empty axis");
  const std::size_t cols = av.rank() <= 1 ? 1 : av.cols();
  // element (o, c) -> flat index
  auto flat = [rows_axis, cols, inner](std::size_t o, std::size_t c) {
    if (inner == 1) return c;
    return rows_axis ? c * cols + o : o * cols + c;
  };
  Tensor out(out_shape);
  std::vector<std::size_t> argmax;
  if (kind == Reduce::kMax) argmax.resize(outer);
  for (std::size_t o = 0; o < outer; ++o) {
    if (kind == Reduce::kMax) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < count; ++c) {
        if (av[flat(o, c)] > av[flat(o, best)]) best = c;
      }
      argmax[o] = best;
      out[o] = av[flat(o, best)];
    } else {
      double acc = 0.0;
      for (std::size_t c = 0; c < count; ++c) acc += av[flat(o, c)];
      out[o] = kind == Reduce::kMean ? acc / static_cast<double>(count) : acc;
    }
  }
  const std::size_t aid = a.id();
  return tape.record(std::move(out), {a}, [=, argmax = std::move(argmax)](Tape& t, const Tensor& g) {
    Tensor* ga = t.grad_of(aid);
    for (std::size_t o = 0; o < outer; ++o) {
      if (kind == Reduce::kMax) {
        (*ga)[flat(o, argmax[o])] += g[o];
        continue;
      }
      const double share = kind == Reduce::kMean ? g[o] / static_cast<double>(count) : g[o];
      for (std::size_t c = 0; c < count; ++c) (*ga)[flat(o, c)] += share;
    }
  });
}

Var sum_all(Var a) {
  const Tensor& av = a.value();
  if (av.rank() <= 1) return reduce(a, Reduce::kSum, 0);
  Tape& tape = tape_of(a);
  return reduce(tape.record(av.reshaped({av.size()}), {a}, [aid = a.id()](Tape& t, const Tensor& g) {
    Tensor* ga = t.grad_of(aid);
    for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
  }), Reduce::kSum, 0);
}

Var mean_all(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw NumericError("mean_all: empty tensor");
  return mul_scalar(sum_all(a), 1.0 / static_cast<double>(n));
}

Var scale_rows(Var x, Var s) {
  Tape& tape = tape_of(x);
  const Tensor& xv = x.value();
  const Tensor& sv = s.value();
  const std::size_t n = xv.rows(), d = xv.cols();
  if (sv.size() != n) {
    throw DimensionError("scale_rows: " + std::to_string(sv.size()) + " scales for " + std::to_string(n) + " rows");
  }
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) out[i * d + j] = xv[i * d + j] * sv[i];
  const std::size_t xid = x.id(), sid = s.id();
  return tape.record(std::move(out), {x, s}, [=](Tape& t, const Tensor& g) {
    const Tensor& xs = t.value(xid);
    const Tensor& ss = t.value(sid);
    if (Tensor* gx = t.grad_of(xid)) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) (*gx)[i * d + j] += g[i * d + j] * ss[i];
    }
    if (Tensor* gs = t.grad_of(sid)) {
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) acc += g[i * d + j] * xs[i * d + j];
        (*gs)[i] += acc;
      }
    }
  });
}

Var row_l2_norm(Var x, double eps) {
  Tape& tape = tape_of(x);
  const Tensor& xv = x.value();
  const std::size_t n = xv.rows(), d = xv.cols();
  Tensor out({n});
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) acc += xv[i * d + j] * xv[i * d + j];
    out[i] = std::max(std::sqrt(acc), eps);
  }
  const std::size_t xid = x.id(), oid = tape.size();
  return tape.record(std::move(out), {x}, [=](Tape& t, const Tensor& g) {
    const Tensor& xs = t.value(xid);
    const Tensor& o = t.value(oid);
    Tensor* gx = t.grad_of(xid);
    for (std::size_t i = 0; i < n; ++i) {
      if (o[i] <= eps) continue;
      const double k = g[i] / o[i];
      for (std::size_t j = 0; j < d; ++j) (*gx)[i * d + j] += k * xs[i * d + j];
    }
  });
}

Var row_dot(Var a, Var b) {
  Tape& tape = tape_of(a);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.shape() != bv.shape()) {
    throw DimensionError("row_dot: " + shape_str(av.shape()) + " vs " + shape_str(bv.shape()));
  }
  const std::size_t n = av.rows(), d = av.cols();
  Tensor out({n});
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) acc += av[i * d + j] * bv[i * d + j];
    out[i] = acc;
  }
  const std::size_t aid = a.id(), bid = b.id();
  return tape.record(std::move(out), {a, b}, [=](Tape& t, const Tensor& g) {
    const Tensor& x = t.value(aid);
    const Tensor& y = t.value(bid);
    Tensor* ga = t.grad_of(aid);
    Tensor* gb = t.grad_of(bid);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        if (ga) (*ga)[i * d + j] += g[i] * y[i * d + j];
        if (gb) (*gb)[i * d + j] += g[i] * x[i * d + j];
      }
    }
  });
}

Var concat_cols(Var a, Var b) {
  Tape& tape = tape_of(a);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const std::size_t n = av.rows(), p = av.cols(), q = bv.cols();
  if (bv.rows() != n) {
    throw DimensionError("concat_cols: row counts " + std::to_string(n) + " and " + std::to_string(bv.rows()));
  }
  const std::size_t w = p + q;
  Tensor out({n, w});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(av.data().data() + i * p, p, out.data().data() + i * w);
    std::copy_n(bv.data().data() + i * q, q, out.data().data() + i * w + p);
  }
  const std::size_t aid = a.id(), bid = b.id();
  return tape.record(std::move(out), {a, b}, [=](Tape& t, const Tensor& g) {
    Tensor* ga = t.grad_of(aid);
    Tensor* gb = t.grad_of(bid);
    for (std::size_t i = 0; i < n; ++i) {
      if (ga)
        for (std::size_t j = 0; j < p; ++j) (*ga)[i * p + j] += g[i * w + j];
      if (gb)
        for (std::size_t j = 0; j < q; ++j) (*gb)[i * q + j] += g[i * w + p + j];
    }
  });
}

Var concat_rows(Var a, Var b) {
  Tape& tape = tape_of(a);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != bv.rank() || av.cols() != bv.cols()) {
    throw DimensionError("concat_rows: " + shape_str(av.shape()) + " vs " + shape_str(bv.shape()));
  }
  Shape shape = av.shape();
  shape[0] = av.rows() + bv.rows();
  std::vector<double> data(av.data().begin(), av.data().end());
  data.insert(data.end(), bv.data().begin(), bv.data().end());
  const std::size_t na = av.size();
  const std::size_t aid = a.id(), bid = b.id();
  return tape.record(Tensor(std::move(shape), std::move(data)), {a, b}, [=](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_of(aid))
      for (std::size_t i = 0; i < na; ++i) (*ga)[i] += g[i];
    if (Tensor* gb = t.grad_of(bid))
      for (std::size_t i = 0; i + na < g.size(); ++i) (*gb)[i] += g[na + i];
  });
}

Var logsumexp_rows(Var x) {
  Tape& tape = tape_of(x);
  const Tensor& xv = x.value();
  require_rank2(xv, "logsumexp_rows");
  const std::size_t n = xv.rows(), c = xv.cols();
  if (c == 0) throw NumericError("logsumexp_rows: empty row");
  Tensor out({n});
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = xv.data().data() + i * c;
    const double m = *std::max_element(row, row + c);
    double acc = 0.0;
    for (std::size_t j = 0; j < c; ++j) acc += std::exp(row[j] - m);
    out[i] = m + std::log(acc);
  }
  check_finite(out, "logsumexp_rows");
  const std::size_t xid = x.id(), oid = tape.size();
  return tape.record(std::move(out), {x}, [=](Tape& t, const Tensor& g) {
    const Tensor& xs = t.value(xid);
    const Tensor& o = t.value(oid);
    Tensor* gx = t.grad_of(xid);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < c; ++j) (*gx)[i * c + j] += g[i] * std::exp(xs[i * c + j] - o[i]);
  });
}

Var softmax_rows(Var x) {
  Tape& tape = tape_of(x);
  const Tensor& xv = x.value();
  require_rank2(xv, "softmax_rows");
  const std::size_t n = xv.rows(), c = xv.cols();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = xv.data().data() + i * c;
    const double m = *std::max_element(row, row + c);
    double acc = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      out[i * c + j] = std::exp(row[j] - m);
      acc += out[i * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] /= acc;
  }
  const std::size_t xid = x.id(), oid = tape.size();
  return tape.record(std::move(out), {x}, [=](Tape& t, const Tensor& g) {
    const Tensor& s = t.value(oid);
    Tensor* gx = t.grad_of(xid);
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += g[i * c + j] * s[i * c + j];
      for (std::size_t j = 0; j < c; ++j) (*gx)[i * c + j] += s[i * c + j] * (g[i * c + j] - dot);
    }
  });
}

Var pick(Var x, std::span<const std::size_t> col) {
  Tape& tape = tape_of(x);
  const Tensor& xv = x.value();
  require_rank2(xv, "pick");
  const std::size_t n = xv.rows(), c = xv.cols();
  if (col.size() != n) throw DimensionError("pick: one column per row required");
  Tensor out({n});
  for (std::size_t i = 0; i < n; ++i) {
    if (col[i] >= c) throw IndexError("pick: column " + std::to_string(col[i]) + " out of range");
    out[i] = xv[i * c + col[i]];
  }
  std::vector<std::size_t> cols(col.begin(), col.end());
  const std::size_t xid = x.id();
  return tape.record(std::move(out), {x}, [xid, c, cols = std::move(cols)](Tape& t, const Tensor& g) {
    Tensor* gx = t.grad_of(xid);
    for (std::size_t i = 0; i < cols.size(); ++i) (*gx)[i * c + cols[i]] += g[i];
  });
}

Var operator+(Var a, Var b) { return add(a, b); }
Var operator-(Var a, Var b) { return sub(a, b); }
Var operator*(Var a, Var b) { return mul(a, b); }
Var operator/(Var a, Var b) { return div(a, b); }
Var operator-(Var a) { return neg(a); }
Var operator*(Var a, double s) { return mul_scalar(a, s); }
Var operator*(double s, Var a) { return mul_scalar(a, s); }
Var operator+(Var a, double s) { return add_scalar(a, s); }
Var operator-(double s, Var a) { return rsub_scalar(s, a); }

}  // namespace shiftlab::ad
