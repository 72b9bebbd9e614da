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

#ifndef SURGEON_DATAIO_H_
#define SURGEON_DATAIO_H_

#include <cstdint>
#include <string>

#include "surgeon/graph.h"
#include "surgeon/matrix.h"
#include "surgeon/probe.h"

namespace surgeon {

struct DatasetBundle {
  std::string name;
  Graph graph;
  Matrix<float> features;  // N x F
  LabelSet labels;
  SplitMask splits;

  NodeIndex num_nodes() const { return graph.num_nodes(); }
  std::size_t num_features() const { return features.cols(); }
  // Cross-checks every component against graph.num_nodes().
  void Validate() const;
  // "N=.. M=.. F=.. C=.. task=.."
  std::string Summary() const;
};

// Directory layout:
//   edges.tsv     src<TAB>dst per line, '#' comments
//   features.bin  "GSFX", u32 version, u64 N, u64 F, f32 row-major (LE)
//   labels.tsv    node<TAB>class, or node<TAB>c1,c2,... for MLC
//   splits.tsv    node<TAB>{train,val,test,none}
//   meta.toml     key = value lines: name, task, num_nodes, num_edges,
//                 num_features, num_classes
DatasetBundle LoadDataset(const std::string& directory);
void WriteDataset(const std::string& directory, const DatasetBundle& bundle);

Matrix<float> ReadFeatures(const std::string& path);
void WriteFeatures(const std::string& path, const Matrix<float>& features);

struct SbmConfig {
  std::size_t blocks = 4;
  std::size_t nodes_per_block = 250;
  double p_in = 0.05;
  double p_out = 0.005;
  std::size_t feature_dim = 64;
  // Norm of each block's mean feature vector; noise is unit Gaussian.
  double signal_strength = 2.0;
  std::uint64_t seed = 0;

  void Validate() const;
};

// Every node pair is sampled once; labels are block ids; splits are
// 5/15/80 (tiny graphs fall back to one train and one val node).
DatasetBundle GenerateSbm(const SbmConfig& config);

// "GSEM", u32 version, u64 rows, u64 cols, f32 row-major (LE).
void SaveEmbeddings(const std::string& path, const Matrix<float>& embeddings);
Matrix<float> LoadEmbeddings(const std::string& path);

}  // namespace surgeon

#endif  // SURGEON_DATAIO_H_
