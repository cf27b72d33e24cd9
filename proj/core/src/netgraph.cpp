#include "anchorkit/netgraph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "anchorkit/error.hpp"

namespace anchorkit {

namespace {

using nlohmann::json;

LayerKind kind_from_string(const std::string& s, const std::string& where) {
  if (s == "input") return LayerKind::input;
  if (s == "conv") return LayerKind::conv;
  if (s == "pool") return LayerKind::pool;
  if (s == "concat") return LayerKind::concat;
  throw ParseError(where, "unknown layer kind '" + s + "'");
}

Padding padding_from_string(const std::string& s, const std::string& where) {
  if (s == "valid") return Padding::valid;
  if (s == "same") return Padding::same;
  throw ParseError(where, "unknown padding '" + s + "' (expected 'valid' or 'same')");
}

std::int64_t output_extent(std::int64_t in, int kernel, int stride, Padding padding,
                           const std::string& where) {
  if (padding == Padding::same) {
    return (in + stride - 1) / stride;
  }
  if (in < kernel) {
    throw ParseError(where, "kernel " + std::to_string(kernel) +
                                " exceeds input extent " + std::to_string(in));
  }
  return (in - kernel) / stride + 1;
}

}  // namespace

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::input: return "input";
    case LayerKind::conv: return "conv";
    case LayerKind::pool: return "pool";
    case LayerKind::concat: return "concat";
  }
  return "?";
}

NetGraph NetGraph::from_layers(std::vector<LayerNode> layers) {
  NetGraph g;
  g.layers_ = std::move(layers);

  if (g.layers_.empty()) {
    throw ParseError("netcfg", "no input node (layer list is empty)");
  }

  std::size_t input_count = 0;
  for (std::size_t i = 0; i < g.layers_.size(); ++i) {
    const LayerNode& node = g.layers_[i];
    const std::string where = "layer '" + node.name + "'";
    if (node.name.empty()) {
      throw ParseError("layer " + std::to_string(i), "missing name");
    }
    if (!g.index_.emplace(node.name, i).second) {
      throw ParseError(where, "duplicate layer name");
    }
    switch (node.kind) {
      case LayerKind::input:
        ++input_count;
        if (!node.inputs.empty()) throw ParseError(where, "input node must have no inputs");
        break;
      case LayerKind::conv:
      case LayerKind::pool:
        if (node.inputs.size() != 1) {
          throw ParseError(where, "conv/pool node must have exactly one input");
        }
        if (node.kernel < 1) throw ParseError(where, "kernel must be >= 1");
        if (node.stride < 1) throw ParseError(where, "stride must be >= 1");
        break;
      case LayerKind::concat:
        if (node.inputs.size() < 2) {
          throw ParseError(where, "concat node must have at least two inputs");
        }
        break;
    }
  }
  if (input_count == 0) throw ParseError("netcfg", "no input node");
  if (input_count > 1) throw ParseError("netcfg", "more than one input node");

  for (const LayerNode& node : g.layers_) {
    for (const std::string& in : node.inputs) {
      if (!g.index_.count(in)) {
        throw ParseError("layer '" + node.name + "'", "unknown predecessor '" + in + "'");
      }
    }
  }

  // Kahn topological sort (FIFO, so declaration order is kept where
  // possible); leftover nodes mean a cycle.
  std::vector<std::size_t> pending(g.layers_.size(), 0);
  std::vector<std::vector<std::size_t>> consumers(g.layers_.size());
  for (std::size_t i = 0; i < g.layers_.size(); ++i) {
    pending[i] = g.layers_[i].inputs.size();
    for (const std::string& in : g.layers_[i].inputs) {
      consumers[g.index_.at(in)].push_back(i);
    }
  }
  std::vector<std::size_t> queue;
  for (std::size_t i = 0; i < g.layers_.size(); ++i) {
    if (pending[i] == 0) queue.push_back(i);
  }
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const std::size_t i = queue[qi];
    g.topo_.push_back(i);
    for (std::size_t c : consumers[i]) {
      if (--pending[c] == 0) queue.push_back(c);
    }
  }
  if (g.topo_.size() != g.layers_.size()) {
    for (std::size_t i = 0; i < g.layers_.size(); ++i) {
      if (pending[i] > 0) {
        throw ParseError("layer '" + g.layers_[i].name + "'", "cycle detected");
      }
    }
  }

  // Cumulative strides are topology-static, so concat consistency is a
  // load-time check.
  std::vector<std::int64_t> stride(g.layers_.size(), 0);
  for (std::size_t i : g.topo_) {
    const LayerNode& node = g.layers_[i];
    switch (node.kind) {
      case LayerKind::input:
        stride[i] = 1;
        break;
      case LayerKind::conv:
      case LayerKind::pool:
        stride[i] = stride[g.index_.at(node.inputs[0])] * node.stride;
        break;
      case LayerKind::concat: {
        std::int64_t s = stride[g.index_.at(node.inputs[0])];
        for (const std::string& in : node.inputs) {
          if (stride[g.index_.at(in)] != s) {
            throw ParseError("layer '" + node.name + "'", "stride mismatch at concat");
          }
        }
        stride[i] = s;
        break;
      }
    }
  }

  return g;
}

NetGraph NetGraph::from_json_text(const std::string& text, const std::string& source_name) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source_name, e.what());
  }
  if (!doc.is_object() || !doc.contains("layers") || !doc["layers"].is_array()) {
    throw ParseError(source_name, "expected an object with a 'layers' array");
  }

  std::vector<LayerNode> layers;
  std::size_t idx = 0;
  for (const json& entry : doc["layers"]) {
    const std::string where = source_name + ", layer " + std::to_string(idx);
    if (!entry.is_object()) throw ParseError(where, "layer entry must be an object");
    LayerNode node;
    if (!entry.contains("name") || !entry["name"].is_string()) {
      throw ParseError(where, "missing string field 'name'");
    }
    node.name = entry["name"].get<std::string>();
    if (!entry.contains("kind") || !entry["kind"].is_string()) {
      throw ParseError(where + " ('" + node.name + "')", "missing string field 'kind'");
    }
    node.kind = kind_from_string(entry["kind"].get<std::string>(),
                                 where + " ('" + node.name + "')");

    const std::string nwhere = source_name + ", layer '" + node.name + "'";
    const bool needs_kernel = node.kind == LayerKind::conv || node.kind == LayerKind::pool;
    if (entry.contains("kernel")) {
      if (!needs_kernel) throw ParseError(nwhere, "'kernel' not allowed for this kind");
      if (!entry["kernel"].is_number_integer()) throw ParseError(nwhere, "'kernel' must be an integer");
      node.kernel = entry["kernel"].get<int>();
    } else if (needs_kernel) {
      throw ParseError(nwhere, "missing field 'kernel'");
    }
    if (entry.contains("stride")) {
      if (!needs_kernel) throw ParseError(nwhere, "'stride' not allowed for this kind");
      if (!entry["stride"].is_number_integer()) throw ParseError(nwhere, "'stride' must be an integer");
      node.stride = entry["stride"].get<int>();
    } else if (needs_kernel) {
      node.stride = 1;
    }
    if (entry.contains("padding")) {
      if (!needs_kernel) throw ParseError(nwhere, "'padding' not allowed for this kind");
      if (!entry["padding"].is_string()) throw ParseError(nwhere, "'padding' must be a string");
      node.padding = padding_from_string(entry["padding"].get<std::string>(), nwhere);
    }
    if (entry.contains("inputs")) {
      if (!entry["inputs"].is_array()) throw ParseError(nwhere, "'inputs' must be an array");
      for (const json& in : entry["inputs"]) {
        if (!in.is_string()) throw ParseError(nwhere, "'inputs' entries must be strings");
        node.inputs.push_back(in.get<std::string>());
      }
    }
    if (entry.contains("report")) {
      if (!entry["report"].is_boolean()) throw ParseError(nwhere, "'report' must be a boolean");
      node.report = entry["report"].get<bool>();
    }
    layers.push_back(std::move(node));
    ++idx;
  }
  return from_layers(std::move(layers));
}

NetGraph NetGraph::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str(), path);
}

const LayerNode& NetGraph::layer(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no layer named '" + name + "'");
  return layers_[it->second];
}

bool NetGraph::has_layer(const std::string& name) const { return index_.count(name) > 0; }

std::size_t NetGraph::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no layer named '" + name + "'");
  return it->second;
}

bool NetAnalysis::has(const std::string& name) const {
  return std::any_of(nodes.begin(), nodes.end(),
                     [&](const NodeAnalysis& n) { return n.name == name; });
}

const NodeAnalysis& NetAnalysis::node(const std::string& name) const {
  for (const NodeAnalysis& n : nodes) {
    if (n.name == name) return n;
  }
  throw std::out_of_range("no analysis for layer '" + name + "'");
}

NetAnalysis analyze(const NetGraph& graph, std::int64_t input_h, std::int64_t input_w) {
  if (input_h < 1 || input_w < 1) {
    throw std::invalid_argument("analyze: input size must be positive");
  }

  NetAnalysis out;
  out.input_h = input_h;
  out.input_w = input_w;
  out.nodes.resize(graph.layers().size());

  for (std::size_t i : graph.topological_order()) {
    const LayerNode& node = graph.layers()[i];
    NodeAnalysis& a = out.nodes[i];
    a.name = node.name;
    a.kind = node.kind;
    a.report = node.report;

    switch (node.kind) {
      case LayerKind::input:
        a.cumulative_stride = 1;
        a.rf_min = a.rf_max = 1;
        a.feature_h = input_h;
        a.feature_w = input_w;
        break;
      case LayerKind::conv:
      case LayerKind::pool: {
        const NodeAnalysis& in = out.nodes[graph.index_of(node.inputs[0])];
        const std::int64_t grow = std::int64_t(node.kernel - 1) * in.cumulative_stride;
        a.cumulative_stride = in.cumulative_stride * node.stride;
        a.rf_min = in.rf_min + grow;
        a.rf_max = in.rf_max + grow;
        a.feature_h = output_extent(in.feature_h, node.kernel, node.stride, node.padding,
                                    "layer '" + node.name + "' (height)");
        a.feature_w = output_extent(in.feature_w, node.kernel, node.stride, node.padding,
                                    "layer '" + node.name + "' (width)");
        break;
      }
      case LayerKind::concat: {
        const NodeAnalysis& first = out.nodes[graph.index_of(node.inputs[0])];
        a.cumulative_stride = first.cumulative_stride;
        a.rf_min = first.rf_min;
        a.rf_max = first.rf_max;
        a.feature_h = first.feature_h;
        a.feature_w = first.feature_w;
        for (const std::string& in_name : node.inputs) {
          const NodeAnalysis& in = out.nodes[graph.index_of(in_name)];
          if (in.cumulative_stride != a.cumulative_stride) {
            throw ParseError("layer '" + node.name + "'", "stride mismatch at concat");
          }
          if (in.feature_h != a.feature_h || in.feature_w != a.feature_w) {
            throw ParseError("layer '" + node.name + "'", "feature size mismatch at concat");
          }
          a.rf_min = std::min(a.rf_min, in.rf_min);
          a.rf_max = std::max(a.rf_max, in.rf_max);
        }
        break;
      }
    }
  }
  return out;
}

}  // namespace anchorkit
