#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace anchorkit {

enum class LayerKind { input, conv, pool, concat };

enum class Padding {
  valid,  // out = floor((in - k) / s) + 1
  same,   // out = ceil(in / s)
};

const char* to_string(LayerKind kind);

/// One node of an architecture DAG. `kernel`/`stride`/`padding` apply to
/// conv and pool nodes only; the kernel is square.
struct LayerNode {
  std::string name;
  LayerKind kind = LayerKind::input;
  int kernel = 0;
  int stride = 1;
  Padding padding = Padding::valid;
  std::vector<std::string> inputs;
  bool report = false;  // row is part of the summary table
};

/// Validated, immutable architecture DAG with a single input node.
/// Construction rejects duplicate names, unknown predecessors, cycles,
/// arity violations, and concat nodes whose branches disagree on
/// cumulative stride.
class NetGraph {
 public:
  static NetGraph from_layers(std::vector<LayerNode> layers);

  /// Parses a `.netcfg` document: JSON `{"layers": [...]}` where each
  /// entry is `{name, kind, kernel?, stride?, padding?, inputs?, report?}`.
  static NetGraph from_json_text(const std::string& text, const std::string& source_name = "netcfg");
  static NetGraph from_file(const std::string& path);

  const std::vector<LayerNode>& layers() const { return layers_; }
  const LayerNode& layer(const std::string& name) const;
  bool has_layer(const std::string& name) const;
  std::size_t index_of(const std::string& name) const;

  /// Indices in a topological order (inputs before consumers).
  const std::vector<std::size_t>& topological_order() const { return topo_; }

 private:
  std::vector<LayerNode> layers_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::size_t> topo_;
};

/// Per-node result of a receptive-field / stride pass.
struct NodeAnalysis {
  std::string name;
  LayerKind kind = LayerKind::input;
  std::int64_t cumulative_stride = 1;
  std::int64_t rf_min = 1;
  std::int64_t rf_max = 1;
  std::int64_t feature_h = 0;
  std::int64_t feature_w = 0;
  bool report = false;
};

struct NetAnalysis {
  std::int64_t input_h = 0;
  std::int64_t input_w = 0;
  std::vector<NodeAnalysis> nodes;  // declaration order

  bool has(const std::string& name) const;
  const NodeAnalysis& node(const std::string& name) const;
};

/// Walks the graph once, computing for every node its cumulative stride,
/// min/max theoretical receptive field, and feature-map size for the given
/// input. Receptive fields grow as rf += (k - 1) * input_stride; a concat
/// takes the min/max over its branches. Throws ParseError when a concat's
/// branch feature sizes disagree or a kernel exceeds its input extent.
NetAnalysis analyze(const NetGraph& graph, std::int64_t input_h, std::int64_t input_w);

}  // namespace anchorkit
