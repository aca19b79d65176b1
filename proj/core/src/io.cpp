#include "haarlab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "haarlab/error.hpp"
#include "json.hpp"

namespace haarlab::io {

using nlohmann::json;

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return in;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(const std::string& text, const std::string& where) {
  T value{};
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) throw ValidationError(where + ": cannot parse '" + text + "'");
  return value;
}

// Rows of `index,value` after the given header; the index must run 0, 1, ...
std::vector<double> read_indexed_csv(std::istream& in, const std::string& header) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != header) {
    throw ValidationError("expected CSV header '" + header + "'");
  }
  std::vector<double> values;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    const std::string where = "row " + std::to_string(row);
    if (comma == std::string::npos) throw ValidationError(where + ": expected two fields");
    const auto index = parse_number<std::size_t>(trim(line.substr(0, comma)), where);
    if (index != values.size()) {
      throw ValidationError(where + ": index " + std::to_string(index) + " out of order");
    }
    const double value = parse_number<double>(trim(line.substr(comma + 1)), where);
    if (!std::isfinite(value)) throw ValidationError(where + ": value is not finite");
    values.push_back(value);
  }
  return values;
}

int log2_exact(std::size_t count, const std::string& what) {
  if (count == 0 || (count & (count - 1)) != 0) {
    throw ValidationError(what + " row count " + std::to_string(count) + " is not a power of two");
  }
  int k = 0;
  while ((std::size_t{1} << k) < count) ++k;
  return k;
}

json node_json(const DyadicNode& node) { return json::array({node.level(), node.position()}); }

DyadicNode node_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ValidationError(where + ": node must be [level, pos]");
  return DyadicNode(j[0].get<int>(), j[1].get<std::int64_t>());
}

std::string node_key(std::size_t h) {
  const DyadicNode node = DyadicNode::from_heap_index(h);
  return std::to_string(node.level()) + "/" + std::to_string(node.position());
}

std::size_t heap_from_key(const std::string& key, int n) {
  const auto slash = key.find('/');
  if (slash == std::string::npos) throw ValidationError("tree node key '" + key + "' is not k/pos");
  const int level = parse_number<int>(key.substr(0, slash), "tree node key");
  const auto pos = parse_number<std::int64_t>(key.substr(slash + 1), "tree node key");
  if (level < 0 || level > n || pos < 0 || pos >= (std::int64_t{1} << level)) {
    throw ValidationError("tree node key '" + key + "' is outside the tree");
  }
  return (std::size_t{1} << level) + static_cast<std::size_t>(pos);
}

json haar_json(const HaarVector& h) {
  const auto c = h.coefficients();
  return {{"node", node_json(h.node())}, {"coeffs", json::array({c[0], c[1]})}};
}

HaarVector haar_from_json(const json& j, const std::string& where) {
  if (!j.contains("node") || !j.contains("coeffs")) throw ValidationError(where + ": Haar vector needs node and coeffs");
  return HaarVector(node_from_json(j.at("node"), where), j.at("coeffs").get<std::vector<double>>());
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf, static_cast<std::size_t>(len));
}

StepFunction read_step_function(std::istream& in) {
  auto values = read_indexed_csv(in, "leaf,value");
  const int depth = log2_exact(values.size(), "step function");
  return StepFunction(DyadicGrid(depth), std::move(values));
}

StepFunction read_step_function(const std::string& path) {
  auto in = open_in(path);
  return read_step_function(in);
}

void write_step_function(std::ostream& out, const StepFunction& f) {
  out << "leaf,value\n";
  const auto v = f.values();
  for (std::size_t j = 0; j < v.size(); ++j) out << j << ',' << format_double(v[j]) << '\n';
}

Weight read_weight(std::istream& in) {
  auto values = read_indexed_csv(in, "leaf,value");
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (!(values[j] > 0.0)) {
      throw ValidationError("row " + std::to_string(j + 2) + ": weight value " + format_double(values[j]) +
                            " is not positive");
    }
  }
  const int depth = log2_exact(values.size(), "weight");
  return Weight(StepFunction(DyadicGrid(depth), std::move(values)));
}

Weight read_weight(const std::string& path) {
  auto in = open_in(path);
  return read_weight(in);
}

CubeFunction read_cube_function(std::istream& in, int dim) {
  if (dim < 1 || dim > kMaxCubeDimension) throw ValidationError("cube dimension out of range");
  auto values = read_indexed_csv(in, "cell,value");
  const int bits = log2_exact(values.size(), "cube function");
  if (bits % dim != 0 || bits == 0) {
    throw ValidationError("cube function with " + std::to_string(values.size()) + " cells is not 2^{d D}");
  }
  return CubeFunction{dim, bits / dim, std::move(values)};
}

CubeFunction read_cube_function(const std::string& path, int dim) {
  auto in = open_in(path);
  return read_cube_function(in, dim);
}

void write_cube_function(std::ostream& out, const CubeFunction& f) {
  out << "cell,value\n";
  for (std::size_t c = 0; c < f.values.size(); ++c) out << c << ',' << format_double(f.values[c]) << '\n';
}

ShiftFile read_shift(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("shift JSON: ") + e.what());
  }
  try {
    ShiftFile out;
    out.kind = doc.at("kind").get<std::string>();
    const DyadicGrid grid(doc.at("depth").get<int>());
    const int n = doc.at("n").get<int>();
    if (out.kind == "general") {
      if (n < 1) throw ValidationError("general shift complexity must be >= 1");
      std::vector<ops::HaarShiftSpec::Entry> entries;
      const std::size_t blocks = std::size_t{1} << n;
      for (const auto& e : doc.at("entries")) {
        const DyadicNode q = node_from_json(e.at("Q"), "shift entry");
        const std::string where = "shift entry Q = " + node_key(q.heap_index());
        if (q.level() + n > grid.depth()) throw ValidationError(where + ": chld_n(Q) is below the grid");
        auto kernel = e.at("kernel").get<std::vector<double>>();
        if (kernel.size() != blocks * blocks) {
          throw ValidationError(where + ": kernel needs " + std::to_string(blocks * blocks) + " entries");
        }
        const double bound = 1.0 / q.length();
        for (double k : kernel) {
          if (std::abs(k) > bound * (1.0 + 1e-12)) {
            throw ValidationError(where + ": kernel entry " + format_double(k) + " exceeds |Q|^{-1}");
          }
        }
        entries.push_back({q, std::move(kernel)});
      }
      out.general.emplace(grid, n, std::move(entries));
    } else if (out.kind == "elementary") {
      const int m = doc.at("m").get<int>();
      std::vector<ops::ElementaryShiftSpec::Entry> entries;
      for (const auto& e : doc.at("entries")) {
        const DyadicNode q = node_from_json(e.at("Q"), "shift entry");
        const std::string where = "shift entry Q = " + node_key(q.heap_index());
        ops::ElementaryShiftSpec::Entry entry{q, {}};
        for (const auto& p : e.at("pairs")) {
          entry.pairs.push_back({haar_from_json(p.at("source"), where), haar_from_json(p.at("target"), where)});
        }
        entries.push_back(std::move(entry));
      }
      out.elementary.emplace(grid, m, n, std::move(entries));
      out.general.emplace(ops::to_general(*out.elementary));
    } else {
      throw ValidationError("shift kind must be 'general' or 'elementary', got '" + out.kind + "'");
    }
    return out;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("shift JSON: ") + e.what());
  }
}

ShiftFile read_shift(const std::string& path) {
  auto in = open_in(path);
  return read_shift(in);
}

void write_shift(std::ostream& out, const ops::HaarShiftSpec& spec) {
  json doc{{"kind", "general"}, {"depth", spec.grid().depth()}, {"n", spec.complexity()}};
  json entries = json::array();
  for (const auto& e : spec.entries()) entries.push_back({{"Q", node_json(e.q)}, {"kernel", e.kernel}});
  doc["entries"] = std::move(entries);
  out << doc.dump(1) << '\n';
}

void write_shift(std::ostream& out, const ops::ElementaryShiftSpec& spec) {
  json doc{{"kind", "elementary"}, {"depth", spec.grid().depth()}, {"m", spec.m()}, {"n", spec.n()}};
  json entries = json::array();
  for (const auto& e : spec.entries()) {
    json pairs = json::array();
    for (const auto& p : e.pairs) pairs.push_back({{"source", haar_json(p.source)}, {"target", haar_json(p.target)}});
    entries.push_back({{"Q", node_json(e.q)}, {"pairs", std::move(pairs)}});
  }
  doc["entries"] = std::move(entries);
  out << doc.dump(1) << '\n';
}

TreeFile read_tree(std::istream& in) {
  try {
    const json doc = json::parse(in);
    const double A = doc.at("A").get<double>();
    const int n = doc.at("n").get<int>();
    if (n < 1 || n > 20) throw ValidationError("tree depth must be in [1, 20]");
    const std::size_t slots = std::size_t{2} << n;
    std::vector<BellmanPoint> nodes(slots);
    std::vector<bool> seen(slots, false);
    for (const auto& [key, value] : doc.at("nodes").items()) {
      const std::size_t h = heap_from_key(key, n);
      if (seen[h]) throw ValidationError("tree node " + key + " appears twice");
      const auto coords = value.get<std::vector<double>>();
      if (coords.size() != 6) throw ValidationError("tree node " + key + " needs [f, g, F, G, u, v]");
      nodes[h] = BellmanPoint::from_vector(coords);
      seen[h] = true;
    }
    for (std::size_t h = 1; h < slots; ++h) {
      if (!seen[h]) throw ValidationError("tree node " + node_key(h) + " is missing");
    }
    TreeFile out;
    out.tree.emplace(A, n, std::move(nodes));
    if (doc.contains("M")) {
      std::vector<double> M(slots, 0.0);
      std::vector<bool> mseen(slots, false);
      for (const auto& [key, value] : doc.at("M").items()) {
        const std::size_t h = heap_from_key(key, n);
        M[h] = value.get<double>();
        mseen[h] = true;
      }
      for (std::size_t h = 1; h < slots; ++h) {
        if (!mseen[h]) throw ValidationError("M value of node " + node_key(h) + " is missing");
      }
      out.para.emplace(*out.tree, std::move(M));
    }
    return out;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("tree JSON: ") + e.what());
  }
}

TreeFile read_tree(const std::string& path) {
  auto in = open_in(path);
  return read_tree(in);
}

void write_tree(std::ostream& out, const MartingaleTree& tree, const std::vector<double>* M) {
  json nodes = json::object();
  json masses = json::object();
  for (std::size_t h = 1; h < tree.nodes().size(); ++h) {
    nodes[node_key(h)] = tree.at(h).to_vector();
    if (M) masses[node_key(h)] = (*M)[h];
  }
  json doc{{"A", tree.A()}, {"n", tree.depth()}, {"nodes", std::move(nodes)}};
  if (M) doc["M"] = std::move(masses);
  out << doc.dump(1) << '\n';
}

void write_scan_csv(std::ostream& out, const ScanReport& report) {
  out << "n,a2,trial,norm,residual,method\n";
  for (const auto& row : report.rows) {
    out << row.n << ',' << format_double(row.a2) << ',' << row.trial << ',' << format_double(row.norm.value) << ','
        << format_double(row.norm.residual) << ',' << to_string(row.norm.method) << '\n';
  }
}

std::string scan_summary_json(const ScanReport& report) {
  json doc{{"fitted_slope", report.fitted_slope},
           {"fitted_C", report.fitted_C},
           {"complexities", report.complexities},
           {"per_n_C", report.per_n_C},
           {"per_n_slope", report.per_n_slope},
           {"rows", report.rows.size()},
           {"all_converged", report.all_converged()},
           {"seed", report.seed},
           {"weight_seeds", report.weight_seeds}};
  return doc.dump(1);
}

std::string remodel_map_json(const RemodelMap& map) {
  json intervals = json::array();
  const DyadicGrid& grid = map.grid();
  for (std::size_t h = 1; h < grid.node_slots(); ++h) {
    const DyadicNode node = DyadicNode::from_heap_index(h);
    const CubeNode& box = map.box(node);
    json corner = json::array();
    json sides = json::array();
    for (int i = 0; i < box.dim; ++i) {
      corner.push_back(box.corner[static_cast<std::size_t>(i)]);
      sides.push_back(box.side(i, map.cube_depth()));
    }
    json item{{"interval", node_json(node)},
              {"box", {{"level", box.level}, {"stage", box.stage}, {"corner", corner}, {"side", sides}}}};
    if (node.level() < grid.depth()) {
      item["children"] = json::array({node_json(node.child(0)), node_json(node.child(1))});
      item["flipped"] = map.flipped(node);
    }
    intervals.push_back(std::move(item));
  }
  json leaf_to_cell = json::array();
  for (std::size_t j = 0; j < grid.leaf_count(); ++j) leaf_to_cell.push_back(map.cell_of_leaf(j));
  json doc{{"dim", map.dim()}, {"cube_depth", map.cube_depth()}, {"intervals", std::move(intervals)},
           {"leaf_to_cell", std::move(leaf_to_cell)}};
  return doc.dump(1);
}

}  // namespace haarlab::io
