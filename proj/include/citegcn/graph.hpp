#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "citegcn/corpus.hpp"
#include "citegcn/matrix.hpp"

namespace citegcn::graph {

// Directed citation graph over a fixed node ordering; edge (i -> j) means
// node i cites node j. CSR with columns sorted within each row.
struct CitationGraph {
  std::vector<corpus::PaperId> node_ids;  // row index -> paper id
  std::vector<std::size_t> row_ptr;       // size n+1
  std::vector<std::size_t> col_idx;       // sorted within each row
  std::vector<std::size_t> in_degree;
  std::vector<std::size_t> out_degree;

  std::size_t size() const { return node_ids.size(); }
  std::size_t edge_count() const { return col_idx.size(); }
};

// Edges restricted to references between member nodes. Duplicate node ids
// are an error.
CitationGraph build_citation_graph(const corpus::CorpusSnapshot& snapshot,
                                   const std::vector<corpus::PaperId>& node_ids);

// Symmetric sparse matrix in CSR form; only defined through its builder so
// the symmetry invariant holds by construction.
struct NormalizedAdjacency {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::size_t> col_idx;  // sorted within each row
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const;
};

// Symmetrize (binary, either direction), add self-loops, then scale entry
// (i, j) by 1/sqrt(deg_i * deg_j) where deg is the self-loop-inclusive
// degree. Every entry is computed once and mirrored, so symmetry is exact.
NormalizedAdjacency normalized_adjacency(const CitationGraph& graph);

// Sparse-dense product adj * x with a fixed per-row accumulation order.
Matrix spmm(const NormalizedAdjacency& adj, const Matrix& x);

// Dense copy for oracle comparisons and small problems.
Matrix to_dense(const NormalizedAdjacency& adj);

// Structure-and-values hash; a trained model records it so prediction can
// insist on the training graph.
std::uint64_t fingerprint(const NormalizedAdjacency& adj);

// Rows: src_id<TAB>dst_id, one directed edge per line, in CSR order.
void write_edge_list(const CitationGraph& graph, std::ostream& out);

}  // namespace citegcn::graph
