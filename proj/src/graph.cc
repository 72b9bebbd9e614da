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

#include "surgeon/graph.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "surgeon/error.h"

namespace surgeon {

Graph Graph::Build(std::span<const Edge> edges, NodeIndex num_nodes,
                   BuildReport* report) {
  if (num_nodes < 0) throw InvalidArgument("build_graph: negative node count");
  BuildReport local;
  std::vector<std::pair<NodeIndex, NodeIndex>> pairs;
  pairs.reserve(edges.size() * 2);
  for (const Edge& e : edges) {
    if (e.src < 0 || e.src >= num_nodes || e.dst < 0 || e.dst >= num_nodes) {
      throw InvalidArgument("build_graph: edge (" + std::to_string(e.src) +
                            ", " + std::to_string(e.dst) +
                            ") out of range for " + std::to_string(num_nodes) +
                            " nodes");
    }
    if (e.src == e.dst) {
      ++local.self_loops_dropped;
      continue;
    }
    pairs.emplace_back(e.src, e.dst);
    pairs.emplace_back(e.dst, e.src);
  }
  std::sort(pairs.begin(), pairs.end());
  const std::size_t before = pairs.size();
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  // Each dropped undirected duplicate removes two directed entries.
  local.duplicates_dropped = (before - pairs.size()) / 2;

  Graph g;
  g.num_nodes_ = num_nodes;
  g.row_offsets_.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
  g.col_indices_.reserve(pairs.size());
  for (const auto& [u, v] : pairs) {
    ++g.row_offsets_[u + 1];
    g.col_indices_.push_back(v);
  }
  std::partial_sum(g.row_offsets_.begin(), g.row_offsets_.end(),
                   g.row_offsets_.begin());
  if (local.self_loops_dropped > 0 || local.duplicates_dropped > 0) {
    spdlog::debug("build_graph: dropped {} self-loops, {} duplicate edges",
                  local.self_loops_dropped, local.duplicates_dropped);
  }
  if (report != nullptr) *report = local;
  return g;
}

NodeIndex Graph::MaxDegree() const {
  NodeIndex best = 0;
  for (NodeIndex u = 0; u < num_nodes_; ++u) best = std::max(best, Degree(u));
  return best;
}

std::vector<Edge> Graph::EdgeList() const {
  std::vector<Edge> out;
  out.reserve(col_indices_.size() / 2);
  for (NodeIndex u = 0; u < num_nodes_; ++u) {
    for (NodeIndex v : Neighbors(u)) {
      if (u < v) out.push_back({u, v});
    }
  }
  return out;
}

double NormalizedAdjacency::Weight(NodeIndex u, NodeIndex v) const {
  const auto begin = matrix_.col_indices.begin() + matrix_.row_offsets[u];
  const auto end = matrix_.col_indices.begin() + matrix_.row_offsets[u + 1];
  const auto it = std::lower_bound(begin, end, v);
  if (it == end || *it != v) return 0.0;
  return matrix_.values[static_cast<std::size_t>(
      it - matrix_.col_indices.begin())];
}

NormalizedAdjacency NormalizeAdjacency(const Graph& g) {
  const NodeIndex n = g.num_nodes();
  CsrMatrix<double> m;
  m.rows = m.cols = static_cast<std::size_t>(n);
  m.row_offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  m.col_indices.reserve(g.col_indices().size() + n);
  m.values.reserve(g.col_indices().size() + n);
  for (NodeIndex u = 0; u < n; ++u) {
    const NodeIndex du = g.Degree(u) + 1;
    bool diagonal_done = false;
    for (NodeIndex v : g.Neighbors(u)) {
      if (!diagonal_done && v > u) {
        m.col_indices.push_back(u);
        m.values.push_back(NormalizedWeight(du, du));
        diagonal_done = true;
      }
      m.col_indices.push_back(v);
      m.values.push_back(NormalizedWeight(du, g.Degree(v) + 1));
    }
    if (!diagonal_done) {
      m.col_indices.push_back(u);
      m.values.push_back(NormalizedWeight(du, du));
    }
    m.row_offsets[u + 1] = static_cast<NodeIndex>(m.col_indices.size());
  }
  return NormalizedAdjacency(std::move(m));
}

template <typename T>
Matrix<T> SpMM(const CsrMatrix<T>& s, const Matrix<T>& x) {
  if (s.cols != x.rows()) {
    throw InvalidArgument("spmm: shape mismatch " + std::to_string(s.rows) +
                          "x" + std::to_string(s.cols) + " * " +
                          x.ShapeString());
  }
  const std::size_t k = x.cols();
  Matrix<T> out(s.rows, k);
  for (std::size_t r = 0; r < s.rows; ++r) {
    T* dst = out.data() + r * k;
    for (NodeIndex e = s.row_offsets[r]; e < s.row_offsets[r + 1]; ++e) {
      const T w = s.values[e];
      const T* src = x.data() + static_cast<std::size_t>(s.col_indices[e]) * k;
      for (std::size_t j = 0; j < k; ++j) dst[j] += w * src[j];
    }
  }
  return out;
}

template <typename T>
Matrix<T> SpMMTransposed(const CsrMatrix<T>& s, const Matrix<T>& x) {
  if (s.rows != x.rows()) {
    throw InvalidArgument("spmm_t: shape mismatch (" + std::to_string(s.rows) +
                          "x" + std::to_string(s.cols) + ")^T * " +
                          x.ShapeString());
  }
  const std::size_t k = x.cols();
  Matrix<T> out(s.cols, k);
  for (std::size_t r = 0; r < s.rows; ++r) {
    const T* src = x.data() + r * k;
    for (NodeIndex e = s.row_offsets[r]; e < s.row_offsets[r + 1]; ++e) {
      const T w = s.values[e];
      T* dst = out.data() + static_cast<std::size_t>(s.col_indices[e]) * k;
      for (std::size_t j = 0; j < k; ++j) dst[j] += w * src[j];
    }
  }
  return out;
}

template Matrix<float> SpMM(const CsrMatrix<float>&, const Matrix<float>&);
template Matrix<double> SpMM(const CsrMatrix<double>&, const Matrix<double>&);
template Matrix<float> SpMMTransposed(const CsrMatrix<float>&,
                                      const Matrix<float>&);
template Matrix<double> SpMMTransposed(const CsrMatrix<double>&,
                                       const Matrix<double>&);

SampledBlock NeighborSample(const Graph& g, std::span<const NodeIndex> seeds,
                            std::span<const std::size_t> fanouts, Rng& rng) {
  if (seeds.empty()) throw InvalidArgument("neighbor_sample: empty seed list");
  if (fanouts.empty()) throw InvalidArgument("neighbor_sample: no fanouts");
  for (NodeIndex s : seeds) {
    if (s < 0 || s >= g.num_nodes()) {
      throw InvalidArgument("neighbor_sample: seed " + std::to_string(s) +
                            " out of range");
    }
  }

  SampledBlock block;
  block.seeds.assign(seeds.begin(), seeds.end());
  block.layers.resize(fanouts.size());

  std::vector<NodeIndex> targets = block.seeds;
  std::vector<NodeIndex> scratch;
  std::vector<NodeIndex> picked;
  for (std::size_t li = fanouts.size(); li-- > 0;) {
    SampledLayer& layer = block.layers[li];
    const std::size_t fanout = fanouts[li];

    std::unordered_map<NodeIndex, NodeIndex> local;
    local.reserve(targets.size() * 4);
    layer.targets = targets;
    layer.sources = targets;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if (!local.emplace(targets[i], static_cast<NodeIndex>(i)).second) {
        throw InvalidArgument("neighbor_sample: duplicate seed " +
                              std::to_string(targets[i]));
      }
    }

    CsrMatrix<double>& p = layer.propagate;
    p.rows = targets.size();
    p.row_offsets.assign(targets.size() + 1, 0);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const NodeIndex t = targets[i];
      const auto nbrs = g.Neighbors(t);
      picked.clear();
      if (fanout >= nbrs.size()) {
        picked.assign(nbrs.begin(), nbrs.end());
      } else {
        // Partial Fisher-Yates: first `fanout` slots become the sample.
        scratch.assign(nbrs.begin(), nbrs.end());
        for (std::size_t k = 0; k < fanout; ++k) {
          std::uniform_int_distribution<std::size_t> pick(k,
                                                          scratch.size() - 1);
          std::swap(scratch[k], scratch[pick(rng)]);
        }
        picked.assign(scratch.begin(), scratch.begin() + fanout);
      }
      picked.push_back(t);
      std::sort(picked.begin(), picked.end());

      const NodeIndex dt = g.Degree(t) + 1;
      for (NodeIndex v : picked) {
        auto [it, inserted] =
            local.emplace(v, static_cast<NodeIndex>(layer.sources.size()));
        if (inserted) layer.sources.push_back(v);
        p.col_indices.push_back(it->second);
        p.values.push_back(NormalizedWeight(dt, g.Degree(v) + 1));
      }
      p.row_offsets[i + 1] = static_cast<NodeIndex>(p.col_indices.size());
    }
    p.cols = layer.sources.size();
    targets = layer.sources;
  }
  return block;
}

SplitMask RandomSplit(NodeIndex n, std::array<double, 3> ratios, Rng& rng) {
  const double total = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(total - 1.0) > 1e-9 || ratios[0] < 0 || ratios[1] < 0 ||
      ratios[2] < 0) {
    throw InvalidArgument("random_split: ratios must be nonnegative and sum to 1");
  }
  const auto train = static_cast<NodeIndex>(
      std::floor(static_cast<double>(n) * ratios[0] + 1e-9));
  const auto val = static_cast<NodeIndex>(
      std::floor(static_cast<double>(n) * ratios[1] + 1e-9));
  const NodeIndex test = n - train - val;
  if (train < 1 || val < 1 || test < 1) {
    throw InvalidArgument("random_split: n=" + std::to_string(n) +
                          " gives split sizes (" + std::to_string(train) +
                          ", " + std::to_string(val) + ", " +
                          std::to_string(test) + "); every split needs >= 1");
  }
  std::vector<NodeIndex> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), NodeIndex{0});
  std::shuffle(perm.begin(), perm.end(), rng);

  SplitMask mask;
  mask.train.assign(perm.begin(), perm.begin() + train);
  mask.val.assign(perm.begin() + train, perm.begin() + train + val);
  mask.test.assign(perm.begin() + train + val, perm.end());
  std::sort(mask.train.begin(), mask.train.end());
  std::sort(mask.val.begin(), mask.val.end());
  std::sort(mask.test.begin(), mask.test.end());
  return mask;
}

namespace {

bool ParseIndex(std::string_view s, NodeIndex& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

std::vector<Edge> ReadEdgeList(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list " + path);
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    Edge e;
    if (tab == std::string::npos ||
        !ParseIndex(std::string_view(line).substr(0, tab), e.src) ||
        !ParseIndex(std::string_view(line).substr(tab + 1), e.dst)) {
      throw IoError(path + ":" + std::to_string(line_no) +
                    ": expected `src<TAB>dst`, got '" + line + "'");
    }
    edges.push_back(e);
  }
  return edges;
}

void WriteEdgeList(const std::string& path, std::span<const Edge> edges) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write edge list " + path);
  for (const Edge& e : edges) out << e.src << '\t' << e.dst << '\n';
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace surgeon
