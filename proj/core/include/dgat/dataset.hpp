#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dgat/graph.hpp"
#include "dgat/matrix.hpp"
#include "dgat/train.hpp"

namespace dgat {

struct DatasetBundle {
  DirectedGraph graph;
  Matrix features;
  std::vector<int> labels;  // 0/1 per node, -1 for unlabeled
  Split split;
  std::string name;
  int num_classes = 2;
};

// Directory schema:
//   edges.tsv     src<TAB>dst per line, 0-based decimal ids
//   features.csv  one comma-separated row per node, row index = node id
//   labels.csv    node_id,label with label in {0,1}; absent ids = unlabeled
//   splits.csv    node_id,split with split in {train,val,test}
DatasetBundle load_dataset(const std::filesystem::path& dir);
void save_dataset(const DatasetBundle& bundle, const std::filesystem::path& dir);

}  // namespace dgat
