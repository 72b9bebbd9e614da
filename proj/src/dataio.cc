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

#include "surgeon/dataio.h"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <spdlog/spdlog.h>

#include "surgeon/error.h"
#include "surgeon/fileio.h"
#include "surgeon/keyvalue.h"
#include "surgeon/rng.h"

namespace surgeon {
namespace {

constexpr std::string_view kFeatureMagic = "GSFX";
constexpr std::string_view kEmbeddingMagic = "GSEM";
constexpr std::uint32_t kFeatureVersion = 1;
constexpr std::uint32_t kEmbeddingVersion = 1;

std::string JoinPath(const std::string& dir, const char* file) {
  return (std::filesystem::path(dir) / file).string();
}

template <typename Int>
bool ParseInt(std::string_view s, Int& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

std::string EncodeMatrix(std::string_view magic, std::uint32_t version,
                         const Matrix<float>& m) {
  ByteWriter w;
  w.Raw(magic);
  w.U32(version);
  w.U64(m.rows());
  w.U64(m.cols());
  for (float v : m.values()) w.F32(v);
  return w.bytes();
}

Matrix<float> DecodeMatrix(std::string_view magic, std::uint32_t version,
                           const std::string& path) {
  const std::string data = ReadFileBytes(path);
  ByteReader r(data, path);
  if (r.Raw(magic.size()) != magic) {
    throw IoError(path + ": bad magic (expected " + std::string(magic) + ")");
  }
  const std::uint32_t v = r.U32();
  if (v != version) {
    throw IoError(path + ": unsupported version " + std::to_string(v));
  }
  const std::uint64_t rows = r.U64();
  const std::uint64_t cols = r.U64();
  if (cols != 0 && rows > r.remaining() / 4 / cols) {
    throw IoError(path + ": truncated (" + std::to_string(rows) + "x" +
                  std::to_string(cols) + " declared, " +
                  std::to_string(r.remaining()) + " payload bytes)");
  }
  if (r.remaining() != rows * cols * 4) {
    throw IoError(path + ": payload is " + std::to_string(r.remaining()) +
                  " bytes, expected " + std::to_string(rows * cols * 4));
  }
  Matrix<float> m(rows, cols);
  for (float& x : m.values()) x = r.F32();
  return m;
}

const std::string& RequireKey(const KeyValueDoc& doc, const std::string& key,
                              const std::string& path) {
  const std::string* v = doc.Find("", key);
  if (v == nullptr) throw IoError(path + ": missing key '" + key + "'");
  return *v;
}

std::uint64_t RequireCount(const KeyValueDoc& doc, const std::string& key,
                           const std::string& path) {
  std::uint64_t out = 0;
  if (!ParseInt(RequireKey(doc, key, path), out)) {
    throw IoError(path + ": key '" + key + "' is not a nonnegative integer");
  }
  return out;
}

// Reads `node<TAB>value` lines, requiring each node in [0, n) exactly once.
std::vector<std::string> ReadNodeTable(const std::string& path, NodeIndex n) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::string> values(static_cast<std::size_t>(n));
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto where = path + ":" + std::to_string(line_no);
    const auto tab = line.find('\t');
    NodeIndex node = 0;
    if (tab == std::string::npos ||
        !ParseInt(std::string_view(line).substr(0, tab), node)) {
      throw IoError(where + ": expected `node<TAB>value`");
    }
    if (node < 0 || node >= n) {
      throw IoError(where + ": node " + std::to_string(node) +
                    " outside [0, " + std::to_string(n) + ")");
    }
    if (seen[static_cast<std::size_t>(node)]) {
      throw IoError(where + ": node " + std::to_string(node) + " listed twice");
    }
    seen[static_cast<std::size_t>(node)] = true;
    values[static_cast<std::size_t>(node)] = line.substr(tab + 1);
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) throw IoError(path + ": node " + std::to_string(i) + " missing");
  }
  return values;
}

LabelSet ReadLabels(const std::string& path, NodeIndex n, TaskKind task,
                    std::size_t num_classes) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  LabelSet labels;
  labels.task = task;
  labels.num_classes = num_classes;
  const auto count = static_cast<std::size_t>(n);
  if (task == TaskKind::kMultiLabel) {
    labels.multi.assign(count * num_classes, 0);
  } else {
    labels.classes.assign(count, -1);
  }
  std::vector<bool> seen(count, false);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto where = path + ":" + std::to_string(line_no);
    const auto tab = line.find('\t');
    NodeIndex node = 0;
    if (tab == std::string::npos ||
        !ParseInt(std::string_view(line).substr(0, tab), node)) {
      throw IoError(where + ": expected `node<TAB>label`");
    }
    if (node < 0 || node >= n) {
      throw IoError(where + ": node " + std::to_string(node) +
                    " outside [0, " + std::to_string(n) + ")");
    }
    const auto u = static_cast<std::size_t>(node);
    if (seen[u]) throw IoError(where + ": node " + std::to_string(node) + " listed twice");
    seen[u] = true;

    auto parse_class = [&](std::string_view tok) {
      std::int64_t c = 0;
      if (!ParseInt(tok, c)) {
        throw IoError(where + ": bad class '" + std::string(tok) + "'");
      }
      if (c < 0 || static_cast<std::uint64_t>(c) >= num_classes) {
        throw IoError(where + ": class " + std::to_string(c) + " >= C=" +
                      std::to_string(num_classes));
      }
      return static_cast<std::size_t>(c);
    };
    const std::string_view rest = std::string_view(line).substr(tab + 1);
    if (task == TaskKind::kMultiLabel) {
      std::size_t start = 0;
      while (start < rest.size()) {
        auto comma = rest.find(',', start);
        if (comma == std::string_view::npos) comma = rest.size();
        labels.multi[u * num_classes + parse_class(rest.substr(start, comma - start))] = 1;
        start = comma + 1;
      }
    } else {
      labels.classes[u] = static_cast<std::int32_t>(parse_class(rest));
    }
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (!seen[i]) throw IoError(path + ": node " + std::to_string(i) + " missing");
  }
  return labels;
}

}  // namespace

void DatasetBundle::Validate() const {
  const auto n = static_cast<std::size_t>(graph.num_nodes());
  if (features.rows() != n) {
    throw InvalidArgument("dataset: features have " +
                          std::to_string(features.rows()) + " rows, graph has " +
                          std::to_string(n) + " nodes");
  }
  if (!features.AllFinite()) throw InvalidArgument("dataset: non-finite feature");
  if (labels.num_nodes() != n) {
    throw InvalidArgument("dataset: " + std::to_string(labels.num_nodes()) +
                          " labels for " + std::to_string(n) + " nodes");
  }
  labels.Validate();
  std::vector<std::uint8_t> owner(n, 0);
  auto mark = [&](const std::vector<NodeIndex>& split, const char* name) {
    if (split.empty()) throw InvalidArgument(std::string("dataset: empty ") + name + " split");
    for (NodeIndex u : split) {
      if (u < 0 || static_cast<std::size_t>(u) >= n) {
        throw InvalidArgument(std::string("dataset: ") + name + " node out of range");
      }
      if (owner[static_cast<std::size_t>(u)]++ != 0) {
        throw InvalidArgument("dataset: node " + std::to_string(u) +
                              " in more than one split");
      }
    }
  };
  mark(splits.train, "train");
  mark(splits.val, "val");
  mark(splits.test, "test");
}

std::string DatasetBundle::Summary() const {
  std::ostringstream s;
  s << "N=" << graph.num_nodes() << " M=" << graph.num_edges()
    << " F=" << features.cols() << " C=" << labels.num_classes
    << " task=" << TaskKindName(labels.task);
  return s.str();
}

Matrix<float> ReadFeatures(const std::string& path) {
  Matrix<float> m = DecodeMatrix(kFeatureMagic, kFeatureVersion, path);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (!std::isfinite(m(r, c))) {
        throw IoError(path + ": non-finite feature at row " + std::to_string(r) +
                      ", col " + std::to_string(c));
      }
    }
  }
  return m;
}

void WriteFeatures(const std::string& path, const Matrix<float>& features) {
  WriteFileAtomic(path, EncodeMatrix(kFeatureMagic, kFeatureVersion, features));
}

DatasetBundle LoadDataset(const std::string& directory) {
  const std::string meta_path = JoinPath(directory, "meta.toml");
  const KeyValueDoc meta = ParseKeyValue(ReadFileBytes(meta_path), meta_path);

  DatasetBundle b;
  const std::string* name = meta.Find("", "name");
  b.name = name ? *name : std::filesystem::path(directory).filename().string();
  const auto task = ParseTaskKind(RequireKey(meta, "task", meta_path));
  if (!task) throw IoError(meta_path + ": task must be BC, MCC or MLC");
  const auto n = static_cast<NodeIndex>(RequireCount(meta, "num_nodes", meta_path));
  const std::uint64_t m = RequireCount(meta, "num_edges", meta_path);
  const std::uint64_t f = RequireCount(meta, "num_features", meta_path);
  const std::uint64_t c = RequireCount(meta, "num_classes", meta_path);
  if (c == 0) throw IoError(meta_path + ": num_classes must be positive");

  const std::string edges_path = JoinPath(directory, "edges.tsv");
  BuildReport report;
  try {
    b.graph = Graph::Build(ReadEdgeList(edges_path), n, &report);
  } catch (const InvalidArgument& e) {
    throw IoError(edges_path + ": " + e.what());
  }
  if (report.self_loops_dropped + report.duplicates_dropped > 0) {
    spdlog::info("{}: cleaned {} self-loops and {} duplicate edges", edges_path,
                 report.self_loops_dropped, report.duplicates_dropped);
  }
  if (static_cast<std::uint64_t>(b.graph.num_edges()) != m) {
    spdlog::warn("{}: meta declares {} edges, edge list yields {}", meta_path, m,
                 b.graph.num_edges());
  }

  const std::string features_path = JoinPath(directory, "features.bin");
  b.features = ReadFeatures(features_path);
  if (b.features.rows() != static_cast<std::size_t>(n)) {
    throw IoError(features_path + ": declares N=" +
                  std::to_string(b.features.rows()) + " but " + meta_path +
                  " and the edge list have N=" + std::to_string(n));
  }
  if (b.features.cols() != f) {
    throw IoError(features_path + ": declares F=" +
                  std::to_string(b.features.cols()) + " but meta has F=" +
                  std::to_string(f));
  }

  b.labels = ReadLabels(JoinPath(directory, "labels.tsv"), n, *task,
                        static_cast<std::size_t>(c));
  if (*task == TaskKind::kBinary && c != 2) {
    throw IoError(meta_path + ": BC datasets need num_classes = 2");
  }

  const std::string splits_path = JoinPath(directory, "splits.tsv");
  const auto split_values = ReadNodeTable(splits_path, n);
  for (std::size_t u = 0; u < split_values.size(); ++u) {
    const std::string& s = split_values[u];
    const auto node = static_cast<NodeIndex>(u);
    if (s == "train") {
      b.splits.train.push_back(node);
    } else if (s == "val") {
      b.splits.val.push_back(node);
    } else if (s == "test") {
      b.splits.test.push_back(node);
    } else if (s != "none") {
      throw IoError(splits_path + ": node " + std::to_string(u) +
                    " has split '" + s + "' (want train/val/test/none)");
    }
  }
  try {
    b.Validate();
  } catch (const InvalidArgument& e) {
    throw IoError(directory + ": " + e.what());
  }
  return b;
}

void WriteDataset(const std::string& directory, const DatasetBundle& bundle) {
  bundle.Validate();
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec || !fs::is_directory(directory)) {
    throw IoError("cannot create directory " + directory);
  }

  std::ostringstream edges;
  for (const Edge& e : bundle.graph.EdgeList()) edges << e.src << '\t' << e.dst << '\n';
  WriteFileAtomic(JoinPath(directory, "edges.tsv"), edges.str());
  WriteFeatures(JoinPath(directory, "features.bin"), bundle.features);

  const auto n = static_cast<std::size_t>(bundle.graph.num_nodes());
  std::ostringstream labels;
  for (std::size_t u = 0; u < n; ++u) {
    labels << u << '\t';
    if (bundle.labels.task == TaskKind::kMultiLabel) {
      bool first = true;
      for (std::size_t k = 0; k < bundle.labels.num_classes; ++k) {
        if (!bundle.labels.Has(u, k)) continue;
        if (!first) labels << ',';
        labels << k;
        first = false;
      }
    } else {
      labels << bundle.labels.classes[u];
    }
    labels << '\n';
  }
  WriteFileAtomic(JoinPath(directory, "labels.tsv"), labels.str());

  std::vector<const char*> split(n, "none");
  for (NodeIndex u : bundle.splits.train) split[static_cast<std::size_t>(u)] = "train";
  for (NodeIndex u : bundle.splits.val) split[static_cast<std::size_t>(u)] = "val";
  for (NodeIndex u : bundle.splits.test) split[static_cast<std::size_t>(u)] = "test";
  std::ostringstream splits;
  for (std::size_t u = 0; u < n; ++u) splits << u << '\t' << split[u] << '\n';
  WriteFileAtomic(JoinPath(directory, "splits.tsv"), splits.str());

  std::ostringstream meta;
  meta << "name = " << bundle.name << '\n'
       << "task = " << TaskKindName(bundle.labels.task) << '\n'
       << "num_nodes = " << bundle.graph.num_nodes() << '\n'
       << "num_edges = " << bundle.graph.num_edges() << '\n'
       << "num_features = " << bundle.features.cols() << '\n'
       << "num_classes = " << bundle.labels.num_classes << '\n';
  WriteFileAtomic(JoinPath(directory, "meta.toml"), meta.str());
}

void SbmConfig::Validate() const {
  if (blocks == 0 || nodes_per_block == 0) {
    throw InvalidArgument("sbm: blocks and nodes_per_block must be positive");
  }
  if (feature_dim == 0) throw InvalidArgument("sbm: feature_dim must be positive");
  if (!(p_in >= 0.0 && p_in <= 1.0 && p_out >= 0.0 && p_out <= 1.0)) {
    throw InvalidArgument("sbm: probabilities must lie in [0, 1]");
  }
  if (!(p_in > p_out)) {
    throw InvalidArgument("sbm: need p_in > p_out, got p_in=" +
                          std::to_string(p_in) + " p_out=" + std::to_string(p_out));
  }
  if (!(signal_strength >= 0.0) || !std::isfinite(signal_strength)) {
    throw InvalidArgument("sbm: signal_strength must be finite and >= 0");
  }
}

DatasetBundle GenerateSbm(const SbmConfig& config) {
  config.Validate();
  const std::size_t n = config.blocks * config.nodes_per_block;
  const double expected_degree =
      config.p_in * static_cast<double>(config.nodes_per_block - 1) +
      config.p_out * static_cast<double>(n - config.nodes_per_block);
  if (expected_degree < 1.0) {
    spdlog::warn("sbm: expected degree {:.3f} < 1, graph may fragment",
                 expected_degree);
  }

  DatasetBundle b;
  b.name = "sbm";
  auto block_of = [&](std::size_t u) { return u / config.nodes_per_block; };

  Rng edge_rng = MakeRng(config.seed, 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const double p = block_of(u) == block_of(v) ? config.p_in : config.p_out;
      if (unit(edge_rng) < p) {
        edges.push_back({static_cast<NodeIndex>(u), static_cast<NodeIndex>(v)});
      }
    }
  }
  b.graph = Graph::Build(edges, static_cast<NodeIndex>(n));

  Rng mean_rng = MakeRng(config.seed, 2);
  Rng noise_rng = MakeRng(config.seed, 3);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix<double> means(config.blocks, config.feature_dim);
  for (std::size_t k = 0; k < config.blocks; ++k) {
    double ss = 0.0;
    for (double& x : means.row(k)) {
      x = normal(mean_rng);
      ss += x * x;
    }
    const double scale = ss > 0.0 ? config.signal_strength / std::sqrt(ss) : 0.0;
    for (double& x : means.row(k)) x *= scale;
  }
  b.features = Matrix<float>(n, config.feature_dim);
  for (std::size_t u = 0; u < n; ++u) {
    const auto mean = means.row(block_of(u));
    for (std::size_t j = 0; j < config.feature_dim; ++j) {
      b.features(u, j) = static_cast<float>(mean[j] + normal(noise_rng));
    }
  }

  b.labels.task = config.blocks == 2 ? TaskKind::kBinary : TaskKind::kMultiClass;
  b.labels.num_classes = config.blocks;
  b.labels.classes.resize(n);
  for (std::size_t u = 0; u < n; ++u) {
    b.labels.classes[u] = static_cast<std::int32_t>(block_of(u));
  }

  Rng split_rng = MakeRng(config.seed, 4);
  try {
    b.splits = RandomSplit(static_cast<NodeIndex>(n), {0.05, 0.15, 0.80}, split_rng);
  } catch (const InvalidArgument&) {
    if (n < 3) throw InvalidArgument("sbm: need at least 3 nodes for splits");
    spdlog::warn("sbm: {} nodes too few for 5/15/80, using 1/1/{} split", n, n - 2);
    std::vector<NodeIndex> perm(n);
    for (std::size_t u = 0; u < n; ++u) perm[u] = static_cast<NodeIndex>(u);
    std::shuffle(perm.begin(), perm.end(), split_rng);
    b.splits.train = {perm[0]};
    b.splits.val = {perm[1]};
    b.splits.test.assign(perm.begin() + 2, perm.end());
    std::sort(b.splits.test.begin(), b.splits.test.end());
  }
  return b;
}

void SaveEmbeddings(const std::string& path, const Matrix<float>& embeddings) {
  WriteFileAtomic(path, EncodeMatrix(kEmbeddingMagic, kEmbeddingVersion, embeddings));
}

Matrix<float> LoadEmbeddings(const std::string& path) {
  return DecodeMatrix(kEmbeddingMagic, kEmbeddingVersion, path);
}

}  // namespace surgeon
