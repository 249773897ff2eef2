#pragma once

#include <algorithm>
#include <concepts>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cryptic/error.hpp"
#include "cryptic/types.hpp"

namespace cryptic {

enum class Layer : std::uint8_t { kFamily, kSchoolmate, kWorkmate };
inline constexpr std::array<Layer, 3> kLayers{Layer::kFamily, Layer::kSchoolmate, Layer::kWorkmate};
inline constexpr std::array<std::string_view, 3> kLayerNames{"family", "schoolmate", "workmate"};

inline std::string_view to_string(Layer l) { return kLayerNames[static_cast<std::size_t>(l)]; }

inline Layer layer_for(AddressKind kind) {
  switch (kind) {
    case AddressKind::kHome: return Layer::kFamily;
    case AddressKind::kSchoolDorm: return Layer::kSchoolmate;
    case AddressKind::kCompany: return Layer::kWorkmate;
  }
  return Layer::kFamily;
}

/// Maximum group size per address kind; larger groups contribute no edges.
struct GroupCaps {
  std::size_t family = 10;
  std::size_t schoolmate = 500;
  std::size_t workmate = 500;

  std::size_t for_kind(AddressKind kind) const {
    switch (kind) {
      case AddressKind::kHome: return family;
      case AddressKind::kSchoolDorm: return schoolmate;
      case AddressKind::kCompany: return workmate;
    }
    return 0;
  }
};

using NodeIndex = std::uint32_t;
using Edge = std::pair<NodeIndex, NodeIndex>;  // first < second

/// Three undirected layers over a fixed node set. Node i is the i-th smallest id.
class MultiplexGraph {
 public:
  MultiplexGraph() = default;

  /// Edges are canonicalized (ordered, deduplicated, self-loops dropped).
  MultiplexGraph(std::vector<IndividualId> nodes, std::array<std::vector<Edge>, 3> edges)
      : nodes_(std::move(nodes)) {
    for (std::size_t l = 0; l < 3; ++l) {
      auto& es = edges[l];
      for (auto& e : es) {
        if (e.first > e.second) std::swap(e.first, e.second);
      }
      std::erase_if(es, [](const Edge& e) { return e.first == e.second; });
      std::sort(es.begin(), es.end());
      es.erase(std::unique(es.begin(), es.end()), es.end());
      build_csr(l, es);
      edges_[l] = std::move(es);
    }
  }

  std::size_t node_count() const { return nodes_.size(); }
  const std::vector<IndividualId>& nodes() const { return nodes_; }
  IndividualId id_of(NodeIndex i) const { return nodes_[i]; }

  std::optional<NodeIndex> index_of(IndividualId id) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id);
    if (it == nodes_.end() || *it != id) return std::nullopt;
    return static_cast<NodeIndex>(it - nodes_.begin());
  }

  const std::vector<Edge>& edges(Layer l) const { return edges_[idx(l)]; }
  std::size_t edge_count(Layer l) const { return edges_[idx(l)].size(); }

  std::span<const NodeIndex> neighbors(Layer l, NodeIndex i) const {
    const auto& off = offsets_[idx(l)];
    const auto& adj = adjacency_[idx(l)];
    return {adj.data() + off[i], adj.data() + off[i + 1]};
  }

  std::size_t degree(Layer l, NodeIndex i) const { return neighbors(l, i).size(); }

  bool operator==(const MultiplexGraph& o) const { return nodes_ == o.nodes_ && edges_ == o.edges_; }

 private:
  static std::size_t idx(Layer l) { return static_cast<std::size_t>(l); }

  void build_csr(std::size_t l, const std::vector<Edge>& es) {
    auto& off = offsets_[l];
    auto& adj = adjacency_[l];
    off.assign(nodes_.size() + 1, 0);
    for (const auto& [a, b] : es) {
      ++off[a + 1];
      ++off[b + 1];
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) off[i + 1] += off[i];
    adj.assign(off.back(), 0);
    std::vector<std::size_t> cursor(off.begin(), off.end() - 1);
    for (const auto& [a, b] : es) {
      adj[cursor[a]++] = b;
      adj[cursor[b]++] = a;
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      std::sort(adj.begin() + static_cast<std::ptrdiff_t>(off[i]),
                adj.begin() + static_cast<std::ptrdiff_t>(off[i + 1]));
    }
  }

  std::vector<IndividualId> nodes_;
  std::array<std::vector<Edge>, 3> edges_;
  std::array<std::vector<std::size_t>, 3> offsets_;
  std::array<std::vector<NodeIndex>, 3> adjacency_;
};

inline bool intervals_overlap(const AddressRecord& a, const AddressRecord& b) {
  return a.start <= b.end && b.start <= a.end;
}

/// Builds the multiplex graph from shared-address records. Each (address, kind)
/// group with at most cap(kind) distinct members links every pair of members whose
/// active intervals overlap. `universe` fixes the node set (sorted ids); when empty,
/// the nodes are the individuals appearing in `addresses`.
inline MultiplexGraph infer_networks(std::span<const AddressRecord> addresses,
                                     const GroupCaps& caps = {},
                                     std::vector<IndividualId> universe = {}) {
  if (universe.empty()) {
    universe.reserve(addresses.size());
    for (const auto& a : addresses) universe.push_back(a.individual_id);
  }
  std::sort(universe.begin(), universe.end());
  universe.erase(std::unique(universe.begin(), universe.end()), universe.end());

  std::vector<const AddressRecord*> recs;
  recs.reserve(addresses.size());
  for (const auto& a : addresses) recs.push_back(&a);
  std::sort(recs.begin(), recs.end(), [](const AddressRecord* a, const AddressRecord* b) {
    return std::tie(a->kind, a->address_id, a->individual_id, a->start, a->end) <
           std::tie(b->kind, b->address_id, b->individual_id, b->start, b->end);
  });

  auto node_of = [&](IndividualId id) -> std::optional<NodeIndex> {
    auto it = std::lower_bound(universe.begin(), universe.end(), id);
    if (it == universe.end() || *it != id) return std::nullopt;
    return static_cast<NodeIndex>(it - universe.begin());
  };

  std::array<std::vector<Edge>, 3> edges;
  std::size_t lo = 0;
  while (lo < recs.size()) {
    std::size_t hi = lo + 1;
    while (hi < recs.size() && recs[hi]->kind == recs[lo]->kind &&
           recs[hi]->address_id == recs[lo]->address_id) {
      ++hi;
    }
    std::size_t members = 0;
    for (std::size_t i = lo; i < hi; ++i) {
      if (i == lo || recs[i]->individual_id != recs[i - 1]->individual_id) ++members;
    }
    const AddressKind kind = recs[lo]->kind;
    if (members >= 2 && members <= caps.for_kind(kind)) {
      auto& out = edges[static_cast<std::size_t>(layer_for(kind))];
      for (std::size_t i = lo; i < hi; ++i) {
        const auto a = node_of(recs[i]->individual_id);
        if (!a) continue;
        for (std::size_t j = i + 1; j < hi; ++j) {
          if (recs[j]->individual_id == recs[i]->individual_id) continue;
          if (!intervals_overlap(*recs[i], *recs[j])) continue;
          const auto b = node_of(recs[j]->individual_id);
          if (!b) continue;
          out.emplace_back(*a, *b);
        }
      }
    }
    lo = hi;
  }
  return MultiplexGraph(std::move(universe), std::move(edges));
}

/// Share of i's neighbors in `layer` flagged aware; nullopt when i has no neighbors.
/// `aware(j)` is queried by node index.
template <typename AwarePredicate>
  requires std::predicate<AwarePredicate&, NodeIndex>
std::optional<double> neighbor_awareness_fraction(const MultiplexGraph& g, Layer layer,
                                                  NodeIndex i, AwarePredicate&& aware) {
  const auto nbrs = g.neighbors(layer, i);
  if (nbrs.empty()) return std::nullopt;
  std::size_t hits = 0;
  for (NodeIndex j : nbrs) {
    if (aware(j)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(nbrs.size());
}

/// Id-based variant over an explicit aware set.
inline std::optional<double> neighbor_awareness_fraction(const MultiplexGraph& g, Layer layer,
                                                         IndividualId id,
                                                         std::span<const IndividualId> aware_ids) {
  const auto i = g.index_of(id);
  if (!i) throw LookupError("individual " + std::to_string(id) + " not in graph");
  std::vector<IndividualId> aware(aware_ids.begin(), aware_ids.end());
  std::sort(aware.begin(), aware.end());
  return neighbor_awareness_fraction(g, layer, *i, [&](NodeIndex j) {
    return std::binary_search(aware.begin(), aware.end(), g.id_of(j));
  });
}

/// One edge per line, "layer src dst", layers in fixed order and edges sorted by id.
inline void write_layer_dump(std::ostream& os, const MultiplexGraph& g) {
  for (Layer l : kLayers) {
    std::vector<std::pair<IndividualId, IndividualId>> es;
    es.reserve(g.edge_count(l));
    for (const auto& [a, b] : g.edges(l)) es.emplace_back(g.id_of(a), g.id_of(b));
    std::sort(es.begin(), es.end());
    for (const auto& [a, b] : es) os << to_string(l) << ' ' << a << ' ' << b << '\n';
  }
}

inline void write_layer_dump(const std::filesystem::path& path, const MultiplexGraph& g) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ExitCode::kDataIntegrity, "cannot write " + path.string());
  write_layer_dump(os, g);
}

/// Reads a layer dump back over the node universe `nodes`.
inline MultiplexGraph read_layer_dump(const std::filesystem::path& path,
                                      std::vector<IndividualId> nodes) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  std::array<std::vector<Edge>, 3> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string name;
    IndividualId a = 0, b = 0;
    if (!(ls >> name >> a >> b)) throw ParseError(path.string(), lineno, "expected 'layer src dst'");
    auto layer = parse_enum<Layer>(name, kLayerNames);
    if (!layer) throw ParseError(path.string(), lineno, "unknown layer '" + name + "'");
    auto ia = std::lower_bound(nodes.begin(), nodes.end(), a);
    auto ib = std::lower_bound(nodes.begin(), nodes.end(), b);
    if (ia == nodes.end() || *ia != a || ib == nodes.end() || *ib != b) {
      throw ParseError(path.string(), lineno, "edge references unknown individual");
    }
    edges[static_cast<std::size_t>(*layer)].emplace_back(
        static_cast<NodeIndex>(ia - nodes.begin()), static_cast<NodeIndex>(ib - nodes.begin()));
  }
  return MultiplexGraph(std::move(nodes), std::move(edges));
}

}  // namespace cryptic
