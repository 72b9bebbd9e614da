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

#ifndef SURGEON_GRAPH_H_
#define SURGEON_GRAPH_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "surgeon/matrix.h"
#include "surgeon/rng.h"

namespace surgeon {

using NodeIndex = std::int64_t;

struct Edge {
  NodeIndex src = 0;
  NodeIndex dst = 0;
};

// What Graph::Build dropped while cleaning the input edge list.
struct BuildReport {
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_dropped = 0;
};

// Immutable undirected graph in CSR form. Each undirected edge is stored in
// both directions; no self-loops, no duplicates, neighbors sorted per row.
class Graph {
 public:
  Graph() = default;

  // Symmetrizes, deduplicates and drops self-loops. Throws InvalidArgument
  // naming the first pair with an index outside [0, num_nodes).
  static Graph Build(std::span<const Edge> edges, NodeIndex num_nodes,
                     BuildReport* report = nullptr);

  NodeIndex num_nodes() const { return num_nodes_; }
  // Undirected edges, each counted once.
  NodeIndex num_edges() const {
    return static_cast<NodeIndex>(col_indices_.size() / 2);
  }

  std::span<const NodeIndex> row_offsets() const { return row_offsets_; }
  std::span<const NodeIndex> col_indices() const { return col_indices_; }

  std::span<const NodeIndex> Neighbors(NodeIndex u) const {
    return {col_indices_.data() + row_offsets_[u],
            static_cast<std::size_t>(row_offsets_[u + 1] - row_offsets_[u])};
  }
  NodeIndex Degree(NodeIndex u) const {
    return row_offsets_[u + 1] - row_offsets_[u];
  }
  NodeIndex MaxDegree() const;

  // Undirected edges with src < dst, in CSR order.
  std::vector<Edge> EdgeList() const;

 private:
  NodeIndex num_nodes_ = 0;
  std::vector<NodeIndex> row_offsets_{0};
  std::vector<NodeIndex> col_indices_;
};

// Compressed sparse rows with explicit values. Column indices are local to
// whatever dense operand the matrix multiplies.
template <typename T>
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<NodeIndex> row_offsets{0};
  std::vector<NodeIndex> col_indices;
  std::vector<T> values;

  std::size_t nnz() const { return values.size(); }

  template <typename U>
  CsrMatrix<U> Cast() const {
    CsrMatrix<U> out;
    out.rows = rows;
    out.cols = cols;
    out.row_offsets = row_offsets;
    out.col_indices = col_indices;
    out.values.assign(values.begin(), values.end());
    return out;
  }

  Matrix<T> ToDense() const {
    Matrix<T> d(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      for (NodeIndex k = row_offsets[r]; k < row_offsets[r + 1]; ++k) {
        d(r, static_cast<std::size_t>(col_indices[k])) += values[k];
      }
    }
    return d;
  }
};

// Entry weight of D^{-1/2}(A+I)D^{-1/2} given self-looped degrees.
inline double NormalizedWeight(NodeIndex du, NodeIndex dv) {
  return 1.0 / std::sqrt(static_cast<double>(du) * static_cast<double>(dv));
}

// Symmetrically normalized, self-looped adjacency. Entry (u,v) is
// 1/sqrt(d_u d_v) with d_u = deg(u) + 1; every row carries its diagonal.
class NormalizedAdjacency {
 public:
  explicit NormalizedAdjacency(CsrMatrix<double> m) : matrix_(std::move(m)) {}

  const CsrMatrix<double>& matrix() const { return matrix_; }
  NodeIndex num_nodes() const { return static_cast<NodeIndex>(matrix_.rows); }
  // Stored weight of (u, v), or 0 when absent.
  double Weight(NodeIndex u, NodeIndex v) const;

 private:
  CsrMatrix<double> matrix_;
};

NormalizedAdjacency NormalizeAdjacency(const Graph& g);

// out = S * X. Rows are summed in stored entry order, so results are
// deterministic for a fixed matrix.
template <typename T>
Matrix<T> SpMM(const CsrMatrix<T>& s, const Matrix<T>& x);

// out = S^T * X, scattered in stored entry order.
template <typename T>
Matrix<T> SpMMTransposed(const CsrMatrix<T>& s, const Matrix<T>& x);

// Unbounded fanout: keep every neighbor.
inline constexpr std::size_t kAllNeighbors =
    std::numeric_limits<std::size_t>::max();

// One message-passing layer of a sampled minibatch. `sources` starts with
// `targets` in the same order, so the first targets.size() input rows are
// the targets themselves.
struct SampledLayer {
  std::vector<NodeIndex> targets;
  std::vector<NodeIndex> sources;
  // targets.size() x sources.size(), weights taken from the full graph.
  CsrMatrix<double> propagate;
};

struct SampledBlock {
  std::vector<NodeIndex> seeds;
  // layers[0] consumes the input features; layers.back().targets == seeds.
  std::vector<SampledLayer> layers;

  std::span<const NodeIndex> input_nodes() const { return layers.front().sources; }
};

// Samples up to fanouts[l] neighbors (without replacement) for every target
// of layer l, working backwards from the seeds. Each target keeps its
// self-loop. Entries in a row follow global node order, matching the row
// of NormalizeAdjacency(g).
SampledBlock NeighborSample(const Graph& g, std::span<const NodeIndex> seeds,
                            std::span<const std::size_t> fanouts, Rng& rng);

struct SplitMask {
  std::vector<NodeIndex> train;
  std::vector<NodeIndex> val;
  std::vector<NodeIndex> test;
};

// Random permutation cut into floor(n*train), floor(n*val) and the rest.
SplitMask RandomSplit(NodeIndex n, std::array<double, 3> ratios, Rng& rng);

// `src<TAB>dst` per line, '#' comments ignored. Returns edges as read.
std::vector<Edge> ReadEdgeList(const std::string& path);
void WriteEdgeList(const std::string& path, std::span<const Edge> edges);

}  // namespace surgeon

#endif  // SURGEON_GRAPH_H_
