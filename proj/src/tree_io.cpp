#include <fstream>

#include "json.hpp"
#include "ttvi/tree.hpp"

namespace ttvi {

namespace {
constexpr const char* kTreeFormat = "ttvi-tree-1";
}

void save_tree_snapshot(const ValueTree& tree, const TreeOps& ops, const TreeSnapshotMeta& meta,
                        const std::string& path) {
  nlohmann::ordered_json j;
  j["format"] = kTreeFormat;
  j["metadata"] = {{"config_hash", meta.config_hash},
                   {"iteration", meta.iteration},
                   {"v_th", meta.v_th},
                   {"subsystem_sizes", tree.sizes}};
  auto vertices = nlohmann::ordered_json::array();
  auto edges = nlohmann::ordered_json::array();
  for (const auto& v : tree.vertices) {
    if (!v.alive) continue;
    nlohmann::ordered_json vj;
    vj["id"] = v.id;
    vj["q"] = v.mode;
    vj["factors"] = v.value.factors;
    vertices.push_back(std::move(vj));
    if (v.parent != npos) {
      nlohmann::ordered_json ej;
      ej["parent"] = v.parent;
      ej["guard"] = ops.outgoing->at[v.mode][v.guard_index].guard.to_string(ops.dfa->ap_names);
      ej["child"] = v.id;
      edges.push_back(std::move(ej));
    }
  }
  j["vertices"] = std::move(vertices);
  j["edges"] = std::move(edges);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write tree snapshot '" + path + "'");
  out << j.dump(2) << "\n";
}

std::size_t LoadedTreeSnapshot::scalars_stored() const {
  std::size_t n = 0;
  for (const auto& v : vertices)
    for (const auto& f : v.factors) n += f.size();
  return n;
}

LoadedTreeSnapshot load_tree_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tree snapshot '" + path + "'");
  nlohmann::json j;
  in >> j;
  if (j.value("format", "") != kTreeFormat)
    throw std::runtime_error("unsupported tree snapshot format in '" + path + "'");
  LoadedTreeSnapshot snap;
  const auto& meta = j.at("metadata");
  snap.meta.config_hash = meta.at("config_hash").get<std::uint64_t>();
  snap.meta.iteration = meta.at("iteration").get<std::size_t>();
  snap.meta.v_th = meta.at("v_th").get<double>();
  snap.sizes = meta.at("subsystem_sizes").get<std::vector<std::size_t>>();

  std::unordered_map<std::size_t, std::size_t> slot;
  for (const auto& vj : j.at("vertices")) {
    LoadedTreeVertex v;
    v.id = vj.at("id").get<std::size_t>();
    v.q = vj.at("q").get<std::size_t>();
    v.factors = vj.at("factors").get<std::vector<Vec>>();
    slot[v.id] = snap.vertices.size();
    snap.vertices.push_back(std::move(v));
  }
  for (const auto& ej : j.at("edges")) {
    auto child = ej.at("child").get<std::size_t>();
    auto it = slot.find(child);
    if (it == slot.end()) throw std::runtime_error("tree snapshot edge references unknown child");
    snap.vertices[it->second].parent = ej.at("parent").get<std::size_t>();
    snap.vertices[it->second].guard = ej.at("guard").get<std::string>();
  }
  return snap;
}

}  // namespace ttvi
