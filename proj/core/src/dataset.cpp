#include "dgat/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace dgat {

namespace {

std::ifstream open_or_throw(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("missing file: " + p.string());
  return in;
}

std::vector<std::string> split_line(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, sep)) out.push_back(field);
  return out;
}

int parse_id(const std::string& s, const char* what) {
  try {
    size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size() || v < 0) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(std::string("bad ") + what + ": '" + s + "'");
  }
}

}  // namespace

DatasetBundle load_dataset(const std::filesystem::path& dir) {
  DatasetBundle bundle;
  bundle.name = dir.filename().string();

  // features first; its row count defines num_nodes
  {
    auto in = open_or_throw(dir / "features.csv");
    std::vector<double> values;
    int cols = -1, rows = 0;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto fields = split_line(line, ',');
      if (cols == -1) cols = static_cast<int>(fields.size());
      if (static_cast<int>(fields.size()) != cols)
        throw std::runtime_error("features.csv row " + std::to_string(rows) + " has " +
                                 std::to_string(fields.size()) + " columns, expected " +
                                 std::to_string(cols));
      for (const auto& f : fields) values.push_back(std::stod(f));
      ++rows;
    }
    if (rows == 0) throw std::runtime_error("features.csv is empty");
    bundle.features = Matrix(rows, cols, std::move(values));
  }
  const int n = bundle.features.rows;

  {
    auto in = open_or_throw(dir / "edges.tsv");
    std::vector<Edge> edges;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto fields = split_line(line, '\t');
      if (fields.size() != 2) throw std::runtime_error("edges.tsv: expected src<TAB>dst: " + line);
      int src = parse_id(fields[0], "node id");
      int dst = parse_id(fields[1], "node id");
      if (src >= n || dst >= n)
        throw std::runtime_error("edges.tsv: node id " + std::to_string(std::max(src, dst)) +
                                 " exceeds feature row count " + std::to_string(n));
      edges.push_back({src, dst});
    }
    bundle.graph = DirectedGraph::build(n, edges);
  }

  bundle.labels.assign(n, -1);
  {
    auto in = open_or_throw(dir / "labels.csv");
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto fields = split_line(line, ',');
      if (fields.size() != 2) throw std::runtime_error("labels.csv: expected node_id,label: " + line);
      int id = parse_id(fields[0], "node id");
      if (id >= n) throw std::runtime_error("labels.csv: node id out of range: " + fields[0]);
      int y = parse_id(fields[1], "label");
      if (y != 0 && y != 1) throw std::runtime_error("labels.csv: non-binary label: " + fields[1]);
      bundle.labels[id] = y;
    }
  }

  {
    auto in = open_or_throw(dir / "splits.csv");
    std::unordered_set<int> assigned;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto fields = split_line(line, ',');
      if (fields.size() != 2) throw std::runtime_error("splits.csv: expected node_id,split: " + line);
      int id = parse_id(fields[0], "node id");
      if (id >= n) throw std::runtime_error("splits.csv: node id out of range: " + fields[0]);
      if (bundle.labels[id] < 0)
        throw std::runtime_error("splits.csv: node " + fields[0] + " is in a split but unlabeled");
      if (!assigned.insert(id).second)
        throw std::runtime_error("splits.csv: node " + fields[0] + " assigned to multiple splits");
      if (fields[1] == "train") bundle.split.train.push_back(id);
      else if (fields[1] == "val") bundle.split.val.push_back(id);
      else if (fields[1] == "test") bundle.split.test.push_back(id);
      else throw std::runtime_error("splits.csv: unknown split '" + fields[1] + "'");
    }
  }
  return bundle;
}

void save_dataset(const DatasetBundle& bundle, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  char buf[64];

  {
    std::ofstream out(dir / "edges.tsv");
    for (const Edge& e : bundle.graph.edges()) out << e.src << '\t' << e.dst << '\n';
  }
  {
    std::ofstream out(dir / "features.csv");
    const Matrix& f = bundle.features;
    for (int i = 0; i < f.rows; ++i) {
      for (int j = 0; j < f.cols; ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", f.at(i, j));
        out << (j ? "," : "") << buf;
      }
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "labels.csv");
    for (size_t i = 0; i < bundle.labels.size(); ++i)
      if (bundle.labels[i] >= 0) out << i << ',' << bundle.labels[i] << '\n';
  }
  {
    std::ofstream out(dir / "splits.csv");
    for (int id : bundle.split.train) out << id << ",train\n";
    for (int id : bundle.split.val) out << id << ",val\n";
    for (int id : bundle.split.test) out << id << ",test\n";
  }
}

}  // namespace dgat
