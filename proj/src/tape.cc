// Copyright 2026 The Surgeon Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "surgeon/tape.h"

#include <algorithm>
#include <cmath>

#include "surgeon/error.h"

namespace surgeon {
namespace {

constexpr std::array<std::string_view, kNumOpKinds> kOpNames = {
    "leaf",  "matmul",  "spmm_const", "add",       "add_bias",
    "relu",  "dropout", "row_l2_normalize", "mse_mean", "gram_rows",
    "gram_cols", "sub_identity", "frob_norm", "scale", "mean_pair"};

[[noreturn]] void ShapeError(OpKind kind, const std::string& detail) {
  throw InvalidArgument(std::string(OpName(kind)) + ": " + detail);
}

}  // namespace

std::string_view OpName(OpKind kind) {
  return kOpNames[static_cast<std::size_t>(kind)];
}

std::optional<OpKind> OpFromName(std::string_view name) {
  for (std::size_t i = 0; i < kOpNames.size(); ++i) {
    if (kOpNames[i] == name) return static_cast<OpKind>(i);
  }
  return std::nullopt;
}

template <typename T>
const typename Tape<T>::Node& Tape<T>::node(NodeId id) const {
  if (id.index >= nodes_.size()) {
    throw InvalidArgument("tape: unknown node " + std::to_string(id.index));
  }
  return nodes_[id.index];
}

template <typename T>
typename Tape<T>::Node Tape<T>::MakeNode(
    OpKind kind, std::initializer_list<NodeId> inputs) const {
  Node n;
  n.kind = kind;
  for (NodeId in : inputs) {
    n.requires_grad = n.requires_grad || node(in).requires_grad;
    n.inputs[n.num_inputs++] = in.index;
  }
  return n;
}

template <typename T>
NodeId Tape<T>::Push(Node n) {
  nodes_.push_back(std::move(n));
  return NodeId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
NodeId Tape<T>::Leaf(Matrix<T> value, bool requires_grad) {
  Node n;
  n.kind = OpKind::kLeaf;
  n.requires_grad = requires_grad;
  n.value = std::move(value);
  return Push(std::move(n));
}

template <typename T>
NodeId Tape<T>::MatMul(NodeId a, NodeId b) {
  const auto& av = value(a);
  const auto& bv = value(b);
  if (av.cols() != bv.rows()) {
    ShapeError(OpKind::kMatMul, av.ShapeString() + " * " + bv.ShapeString());
  }
  Node n = MakeNode(OpKind::kMatMul, {a, b});
  n.value = surgeon::MatMul(av, bv);
  return Push(std::move(n));
}

template <typename T>
NodeId Tape<T>::SpMM(std::shared_ptr<const CsrMatrix<T>> s, NodeId x) {
  const auto& xv = value(x);
  if (!s || s->cols != xv.rows()) {
    ShapeError(OpKind::kSpMM,
               (s ? std::to_string(s->rows) + "x" + std::to_string(s->cols)
                  : std::string("null")) +
                   " * " + xv.ShapeString());
  }
  Node n = MakeNode(OpKind::kSpMM, {x});
  n.value = surgeon::SpMM(*s, xv);
  n.sparse = std::move(s);
  return Push(std::move(n));
}

template <typename T>
NodeId Tape<T>::Add(NodeId a, NodeId b) {
  const auto& av = value(a);
  const auto& bv = value(b);
  if (!av.SameShape(bv)) {
    ShapeError(OpKind::kAdd, av.ShapeString() + " + " + bv.ShapeString());
  }
  Node n = MakeNode(OpKind::kAdd, {a, b});
  n.value = av;
  auto out = n.value.values();
  auto bs = bv.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bs[i];
  return Push(std::move(n));
}

template <typename T>
NodeId Tape<T>::AddBias(NodeId x, NodeId bias) {
  const auto& xv = value(x);
  const auto& bv = value(bias);
  if (bv.rows() != 1 || bv.cols() != xv.cols()) {
    ShapeError(OpKind::kAddBias, xv.ShapeString() + " + bias " + bv.ShapeString());
  }
  Node n = MakeNode(OpKind::kAddBias, {x, bias});
  n.value = xv;
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    auto row = n.value.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bv(0, c);
  }
  return Push(std::move(n));
}

template <typename T>
NodeId Tape<T>::Relu(NodeId x) {
  Node n = MakeNode(OpKind::kRelu, {x});
  n.value = value(x);
  for (T& v : n.value.values()) v = v < T(0) ? T(0) : v;  // NaN passes through
  return Push(std::move(n));
}

template <typename T>
NodeId Tape<T>::Dropout(NodeId x, double p, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) {
    ShapeError(OpKind::kDropout, "probability " + std::to_string(p) +
                                     " outside [0, 1)");
  }
  const auto& xv = value(x);
  Node n = MakeNode(OpKind::kDropout, {x});
  n.factor = p;
  n.cache = Matrix<T>(xv.rows(), xv.cols(), T(1));
  if (p > 0.0) {
    std::bernoulli_distribution keep(1.0 - p);
    const T scale = static_cast<T>(1.0 / (1.0 - p));
    for (T& m : n.cache.values()) m = keep(rng) ? scale : T(0);
  }
  n.value = xv;
  auto out = n.value.values();
  auto mask = n.cache.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return Push(std::move(n));
}

template <typename T>
NodeId Tape<T>::RowL2Normalize(NodeId x) {
  const auto& xv = value(x);
  Node n = MakeNode(OpKind::kRowL2Normalize, {x});
  n.value = xv;
  n.cache = Matrix<T>(xv.rows(), 1);
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    auto row = n.value.row(r);
    double ss = 0.0;
    for (T v : row) ss += static_cast<double>(v) * static_cast<double>(v);
    const double norm = std::max(std::sqrt(ss), kNormClamp);
    n.cache(r, 0) = static_cast<T>(norm);
    for (T& v : row) v = static_cast<T>(static_cast<double>(v) / norm);
  }
  return Push(std::move(n));
}

template <typename T>
NodeId Tape<T>::MseMean(NodeId a, NodeId b) {
  const auto& av = value(a);
  const auto& bv = value(b);
  if (!av.SameShape(bv)) {
    ShapeError(OpKind::kMseMean, av.ShapeString() + " vs " + bv.ShapeString());
  }
  if (av.empty()) ShapeError(OpKind::kMseMean, "empty operands");
  Node n = MakeNode(OpKind::kMseMean, {a, b});
  double s = 0.0;
  auto as = av.values();
  auto bs = bv.values();
  for (std::size_t i = 0; i < as.size(); ++i) {
    const double d = static_cast<double>(as[i]) - static_cast<double>(bs[i]);
    s += d * d;
  }
  n.value = Matrix<T>(1, 1, static_cast<T>(s / static_cast<double>(as.size())));
  return Push(std::move(n));
}

template <typename T>
NodeId Tape<T>::GramRows(NodeId x) {
  Node n = MakeNode(OpKind::kGramRows, {x});
  n.value = MatMulTransB(value(x), value(x));
  return Push(std::move(n));
}

template <typename T>
NodeId Tape<T>::GramCols(NodeId x) {
  Node n = MakeNode(OpKind::kGramCols, {x});
  n.value = MatMulTransA(value(x), value(x));
  return Push(std::move(n));
}

template <typename T>
NodeId Tape<T>::SubIdentity(NodeId x) {
  const auto& xv = value(x);
  if (xv.rows() != xv.cols()) {
    ShapeError(OpKind::kSubIdentity, "needs a square matrix, got " +
                                         xv.ShapeString());
  }
  Node n = MakeNode(OpKind::kSubIdentity, {x});
  n.value = xv;
  for (std::size_t i = 0; i < xv.rows(); ++i) n.value(i, i) -= T(1);
  return Push(std::move(n));
}

template <typename T>
NodeId Tape<T>::FrobNorm(NodeId x) {
  Node n = MakeNode(OpKind::kFrobNorm, {x});
  n.value = Matrix<T>(1, 1, static_cast<T>(FrobeniusNorm(value(x))));
  return Push(std::move(n));
}

template <typename T>
NodeId Tape<T>::Scale(NodeId x, double factor) {
  Node n = MakeNode(OpKind::kScale, {x});
  n.factor = factor;
  n.value = value(x);
  const T f = static_cast<T>(factor);
  for (T& v : n.value.values()) v *= f;
  return Push(std::move(n));
}

template <typename T>
NodeId Tape<T>::MeanPair(NodeId a, NodeId b) {
  const auto& av = value(a);
  const auto& bv = value(b);
  if (!av.SameShape(bv)) {
    ShapeError(OpKind::kMeanPair, av.ShapeString() + " vs " + bv.ShapeString());
  }
  Node n = MakeNode(OpKind::kMeanPair, {a, b});
  n.value = av;
  auto out = n.value.values();
  auto bs = bv.values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (out[i] + bs[i]) * T(0.5);
  }
  return Push(std::move(n));
}

template <typename T>
T Tape<T>::scalar(NodeId id) const {
  const auto& v = value(id);
  if (v.rows() != 1 || v.cols() != 1) {
    throw InvalidArgument("tape: node " + std::to_string(id.index) +
                          " is not scalar (" + v.ShapeString() + ")");
  }
  return v(0, 0);
}

template <typename T>
const Matrix<T>* Tape<T>::grad(NodeId id) const {
  const Node& n = node(id);
  return n.has_grad ? &n.grad : nullptr;
}

template <typename T>
void Tape<T>::Accumulate(std::uint32_t target, const Matrix<T>& contribution,
                         OpKind source) {
  Node& t = nodes_[target];
  if (!t.requires_grad) return;
  const bool corrupt = options_.corrupt_backward == source;
  if (!t.has_grad) {
    t.grad = contribution;
    t.has_grad = true;
    if (corrupt) {
      for (T& g : t.grad.values()) g *= T(1.5);
    }
    return;
  }
  auto dst = t.grad.values();
  auto src = contribution.values();
  const T f = corrupt ? T(1.5) : T(1);
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += f * src[i];
}

template <typename T>
void Tape<T>::Backward(NodeId loss) {
  const Node& root = node(loss);
  if (root.value.rows() != 1 || root.value.cols() != 1) {
    throw InvalidArgument("backward: loss must be 1x1, got " +
                          root.value.ShapeString());
  }
  for (Node& n : nodes_) {
    n.has_grad = false;
    n.grad = Matrix<T>();
  }
  if (!root.requires_grad) return;
  nodes_[loss.index].grad = Matrix<T>(1, 1, T(1));
  nodes_[loss.index].has_grad = true;

  for (std::uint32_t i = loss.index + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || n.kind == OpKind::kLeaf) continue;
    const Matrix<T>& g = n.grad;
    const std::uint32_t in0 = n.inputs[0];
    const std::uint32_t in1 = n.inputs[1];
    const Matrix<T>& x0 = nodes_[in0].value;

    switch (n.kind) {
      case OpKind::kLeaf:
        break;
      case OpKind::kMatMul: {
        const Matrix<T>& x1 = nodes_[in1].value;
        if (nodes_[in0].requires_grad) {
          Accumulate(in0, MatMulTransB(g, x1), n.kind);
        }
        if (nodes_[in1].requires_grad) {
          Accumulate(in1, MatMulTransA(x0, g), n.kind);
        }
        break;
      }
      case OpKind::kSpMM:
        if (nodes_[in0].requires_grad) {
          Accumulate(in0, SpMMTransposed(*n.sparse, g), n.kind);
        }
        break;
      case OpKind::kAdd:
        Accumulate(in0, g, n.kind);
        Accumulate(in1, g, n.kind);
        break;
      case OpKind::kAddBias: {
        Accumulate(in0, g, n.kind);
        if (nodes_[in1].requires_grad) {
          Matrix<T> db(1, g.cols());
          for (std::size_t r = 0; r < g.rows(); ++r) {
            for (std::size_t c = 0; c < g.cols(); ++c) db(0, c) += g(r, c);
          }
          Accumulate(in1, db, n.kind);
        }
        break;
      }
      case OpKind::kRelu: {
        Matrix<T> dx = g;
        auto d = dx.values();
        auto xs = x0.values();
        for (std::size_t k = 0; k < d.size(); ++k) {
          if (!(xs[k] > T(0))) d[k] = T(0);
        }
        Accumulate(in0, dx, n.kind);
        break;
      }
      case OpKind::kDropout: {
        Matrix<T> dx = g;
        auto d = dx.values();
        auto m = n.cache.values();
        for (std::size_t k = 0; k < d.size(); ++k) d[k] *= m[k];
        Accumulate(in0, dx, n.kind);
        break;
      }
      case OpKind::kRowL2Normalize: {
        // d(x/|x|) = (I - y y^T) / |x| per row; clamped rows are linear.
        Matrix<T> dx(g.rows(), g.cols());
        for (std::size_t r = 0; r < g.rows(); ++r) {
          const double norm = static_cast<double>(n.cache(r, 0));
          auto y = n.value.row(r);
          auto gr = g.row(r);
          auto out = dx.row(r);
          double dot = 0.0;
          const bool clamped = norm <= kNormClamp;
          if (!clamped) {
            for (std::size_t c = 0; c < y.size(); ++c) {
              dot += static_cast<double>(y[c]) * static_cast<double>(gr[c]);
            }
          }
          for (std::size_t c = 0; c < y.size(); ++c) {
            out[c] = static_cast<T>(
                (static_cast<double>(gr[c]) - dot * static_cast<double>(y[c])) /
                norm);
          }
        }
        Accumulate(in0, dx, n.kind);
        break;
      }
      case OpKind::kMseMean: {
        const Matrix<T>& x1 = nodes_[in1].value;
        const double scale = 2.0 * static_cast<double>(g(0, 0)) /
                             static_cast<double>(x0.size());
        Matrix<T> da(x0.rows(), x0.cols());
        auto d = da.values();
        auto as = x0.values();
        auto bs = x1.values();
        for (std::size_t k = 0; k < d.size(); ++k) {
          d[k] = static_cast<T>(
              scale * (static_cast<double>(as[k]) - static_cast<double>(bs[k])));
        }
        if (nodes_[in1].requires_grad) {
          Matrix<T> db = da;
          for (T& v : db.values()) v = -v;
          Accumulate(in1, db, n.kind);
        }
        Accumulate(in0, da, n.kind);
        break;
      }
      case OpKind::kGramRows: {
        // G = X X^T  =>  dX = (dG + dG^T) X
        Matrix<T> sym = g;
        for (std::size_t r = 0; r < g.rows(); ++r) {
          for (std::size_t c = 0; c < g.cols(); ++c) sym(r, c) += g(c, r);
        }
        Accumulate(in0, surgeon::MatMul(sym, x0), n.kind);
        break;
      }
      case OpKind::kGramCols: {
        // G = X^T X  =>  dX = X (dG + dG^T)
        Matrix<T> sym = g;
        for (std::size_t r = 0; r < g.rows(); ++r) {
          for (std::size_t c = 0; c < g.cols(); ++c) sym(r, c) += g(c, r);
        }
        Accumulate(in0, surgeon::MatMul(x0, sym), n.kind);
        break;
      }
      case OpKind::kSubIdentity:
        Accumulate(in0, g, n.kind);
        break;
      case OpKind::kFrobNorm: {
        const double norm = static_cast<double>(n.value(0, 0));
        Matrix<T> dx(x0.rows(), x0.cols());
        if (norm > 0.0) {
          const double scale = static_cast<double>(g(0, 0)) / norm;
          auto d = dx.values();
          auto xs = x0.values();
          for (std::size_t k = 0; k < d.size(); ++k) {
            d[k] = static_cast<T>(scale * static_cast<double>(xs[k]));
          }
        }
        Accumulate(in0, dx, n.kind);
        break;
      }
      case OpKind::kScale: {
        Matrix<T> dx = g;
        const T f = static_cast<T>(n.factor);
        for (T& v : dx.values()) v *= f;
        Accumulate(in0, dx, n.kind);
        break;
      }
      case OpKind::kMeanPair: {
        Matrix<T> dx = g;
        for (T& v : dx.values()) v *= T(0.5);
        Accumulate(in0, dx, n.kind);
        Accumulate(in1, dx, n.kind);
        break;
      }
    }
  }
}

template <typename T>
std::size_t Tape<T>::CountOps(OpKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      nodes_.begin(), nodes_.end(),
      [kind](const Node& n) { return n.kind == kind; }));
}

template <typename T>
std::size_t Tape<T>::BufferBytes(OpKind kind) const {
  std::size_t total = 0;
  for (const Node& n : nodes_) {
    if (n.kind != kind) continue;
    total += n.value.bytes() + n.cache.bytes();
    if (n.has_grad) total += n.grad.bytes();
  }
  return total;
}

template <typename T>
std::vector<std::uint8_t> Tape<T>::KinkSignature(double radius) const {
  std::vector<std::uint8_t> sig;
  for (const Node& n : nodes_) {
    switch (n.kind) {
      case OpKind::kRelu:
        for (T v : nodes_[n.inputs[0]].value.values()) {
          sig.push_back(v > T(0) ? 1 : 0);
        }
        break;
      case OpKind::kFrobNorm:
        sig.push_back(static_cast<double>(n.value(0, 0)) <= radius ? 2 : 0);
        break;
      case OpKind::kRowL2Normalize:
        for (T norm : n.cache.values()) {
          sig.push_back(static_cast<double>(norm) <= radius ? 2 : 0);
        }
        break;
      default:
        break;
    }
  }
  return sig;
}

template class Tape<float>;
template class Tape<double>;

GradCheckResult GradCheck(const GraphBuilder& build,
                          std::span<const Matrix<double>> inputs,
                          double epsilon, TapeOptions options) {
  // A norm within this radius of zero may be crossed by a perturbation.
  const double radius = 10.0 * epsilon;

  auto run = [&](std::span<const Matrix<double>> values, bool with_backward,
                 std::vector<Matrix<double>>* grads,
                 std::vector<std::uint8_t>* signature) {
    Tape<double> tape(options);
    std::vector<NodeId> ids;
    ids.reserve(values.size());
    for (const auto& v : values) ids.push_back(tape.Leaf(v, true));
    const NodeId loss = build(tape, ids);
    const double out = tape.scalar(loss);
    if (with_backward) {
      tape.Backward(loss);
      grads->clear();
      for (std::size_t i = 0; i < ids.size(); ++i) {
        const Matrix<double>* g = tape.grad(ids[i]);
        grads->push_back(g ? *g
                           : Matrix<double>(values[i].rows(), values[i].cols()));
      }
    }
    if (signature) *signature = tape.KinkSignature(radius);
    return out;
  };

  auto has_flag = [](const std::vector<std::uint8_t>& sig) {
    return std::any_of(sig.begin(), sig.end(),
                       [](std::uint8_t b) { return (b & 2) != 0; });
  };

  std::vector<Matrix<double>> work(inputs.begin(), inputs.end());
  std::vector<Matrix<double>> analytic;
  std::vector<std::uint8_t> base_sig;
  run(work, true, &analytic, &base_sig);

  GradCheckResult result;
  std::vector<std::uint8_t> plus_sig;
  std::vector<std::uint8_t> minus_sig;
  for (std::size_t i = 0; i < work.size(); ++i) {
    for (std::size_t r = 0; r < work[i].rows(); ++r) {
      for (std::size_t c = 0; c < work[i].cols(); ++c) {
        const double original = work[i](r, c);
        work[i](r, c) = original + epsilon;
        const double up = run(work, false, nullptr, &plus_sig);
        work[i](r, c) = original - epsilon;
        const double down = run(work, false, nullptr, &minus_sig);
        work[i](r, c) = original;

        if (plus_sig != minus_sig || has_flag(base_sig) ||
            has_flag(plus_sig) || has_flag(minus_sig)) {
          result.skipped.push_back({i, r, c});
          continue;
        }
        const double fd = (up - down) / (2.0 * epsilon);
        const double ga = analytic[i](r, c);
        const double err = std::abs(ga - fd) / std::max(1.0, std::abs(ga));
        if (result.checked++ == 0 || err > result.max_rel_error || std::isnan(err)) {
          result.max_rel_error = err;
          result.worst = {i, r, c};
        }
      }
    }
  }
  return result;
}

}  // namespace surgeon
