#include "citegcn/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>

#include "citegcn/errors.hpp"

namespace citegcn::graph {

CitationGraph build_citation_graph(const corpus::CorpusSnapshot& snapshot,
                                   const std::vector<corpus::PaperId>& node_ids) {
  CitationGraph g;
  g.node_ids = node_ids;
  const std::size_t n = node_ids.size();

  std::unordered_map<corpus::PaperId, std::size_t> index;
  index.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!snapshot.contains(node_ids[i]))
      throw DataError("graph node " + std::to_string(node_ids[i]) +
                      " is not in the snapshot");
    if (!index.emplace(node_ids[i], i).second)
      throw DataError("duplicate graph node id " + std::to_string(node_ids[i]));
  }

  g.row_ptr.assign(n + 1, 0);
  g.in_degree.assign(n, 0);
  g.out_degree.assign(n, 0);

  std::vector<std::vector<std::size_t>> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = snapshot.papers.at(node_ids[i]);
    for (corpus::PaperId ref : rec.references) {
      auto it = index.find(ref);
      if (it == index.end()) continue;
      rows[i].push_back(it->second);
    }
    std::sort(rows[i].begin(), rows[i].end());
  }
  for (std::size_t i = 0; i < n; ++i) {
    g.row_ptr[i + 1] = g.row_ptr[i] + rows[i].size();
    g.out_degree[i] = rows[i].size();
    for (std::size_t j : rows[i]) {
      g.col_idx.push_back(j);
      ++g.in_degree[j];
    }
  }
  return g;
}

double NormalizedAdjacency::at(std::size_t i, std::size_t j) const {
  const auto begin = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
  const auto end = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
  const auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return 0.0;
  return values[static_cast<std::size_t>(it - col_idx.begin())];
}

NormalizedAdjacency normalized_adjacency(const CitationGraph& graph) {
  const std::size_t n = graph.size();

  // Symmetrized neighbor sets with self-loops; set semantics keep edges binary.
  std::vector<std::set<std::size_t>> nbrs(n);
  for (std::size_t i = 0; i < n; ++i) {
    nbrs[i].insert(i);
    for (std::size_t e = graph.row_ptr[i]; e < graph.row_ptr[i + 1]; ++e) {
      const std::size_t j = graph.col_idx[e];
      if (j == i) continue;
      nbrs[i].insert(j);
      nbrs[j].insert(i);
    }
  }

  std::vector<double> deg(n);
  for (std::size_t i = 0; i < n; ++i) deg[i] = static_cast<double>(nbrs[i].size());

  NormalizedAdjacency adj;
  adj.n = n;
  adj.row_ptr.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i)
    adj.row_ptr[i + 1] = adj.row_ptr[i] + nbrs[i].size();
  adj.col_idx.reserve(adj.row_ptr[n]);
  adj.values.reserve(adj.row_ptr[n]);

  // Each unordered pair is computed once; the mirrored entry reuses the same
  // double, so A(i,j) == A(j,i) bit for bit.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : nbrs[i]) {
      adj.col_idx.push_back(j);
      if (j >= i) {
        adj.values.push_back(1.0 / std::sqrt(deg[i] * deg[j]));
      } else {
        adj.values.push_back(adj.at(j, i));
      }
    }
  }
  return adj;
}

Matrix spmm(const NormalizedAdjacency& adj, const Matrix& x) {
  if (adj.n != x.rows) throw std::invalid_argument("spmm: dimension mismatch");
  Matrix out(adj.n, x.cols);
  for (std::size_t i = 0; i < adj.n; ++i) {
    double* out_row = out.row(i);
    for (std::size_t e = adj.row_ptr[i]; e < adj.row_ptr[i + 1]; ++e) {
      const double v = adj.values[e];
      const double* x_row = x.row(adj.col_idx[e]);
      for (std::size_t c = 0; c < x.cols; ++c) out_row[c] += v * x_row[c];
    }
  }
  return out;
}

Matrix to_dense(const NormalizedAdjacency& adj) {
  Matrix out(adj.n, adj.n);
  for (std::size_t i = 0; i < adj.n; ++i)
    for (std::size_t e = adj.row_ptr[i]; e < adj.row_ptr[i + 1]; ++e)
      out(i, adj.col_idx[e]) = adj.values[e];
  return out;
}

std::uint64_t fingerprint(const NormalizedAdjacency& adj) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (8 * i)) & 0xff;
      h *= 1099511628211ULL;
    }
  };
  mix(adj.n);
  for (std::size_t v : adj.row_ptr) mix(v);
  for (std::size_t v : adj.col_idx) mix(v);
  for (double v : adj.values) mix(std::bit_cast<std::uint64_t>(v));
  return h;
}

void write_edge_list(const CitationGraph& graph, std::ostream& out) {
  for (std::size_t i = 0; i < graph.size(); ++i)
    for (std::size_t e = graph.row_ptr[i]; e < graph.row_ptr[i + 1]; ++e)
      out << graph.node_ids[i] << "\t" << graph.node_ids[graph.col_idx[e]] << "\n";
}

}  // namespace citegcn::graph
