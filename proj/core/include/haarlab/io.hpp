#pragma once

// File formats: leaf CSVs, cube CSVs, shift and tree JSON, scan reports and
// remodel map dumps. Every loader throws ValidationError naming the row or
// node that failed.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "haarlab/dyadic.hpp"
#include "haarlab/operators.hpp"
#include "haarlab/remodel.hpp"
#include "haarlab/specnorm.hpp"
#include "haarlab/transference.hpp"
#include "haarlab/weights.hpp"

namespace haarlab::io {

/// 17 significant digits, shortest exponent form.
std::string format_double(double x);

/// `leaf,value` rows j = 0..2^N-1 in order; N is inferred from the row count.
StepFunction read_step_function(std::istream& in);
StepFunction read_step_function(const std::string& path);
void write_step_function(std::ostream& out, const StepFunction& f);

/// Same layout; rejects nonpositive values with their row number.
Weight read_weight(std::istream& in);
Weight read_weight(const std::string& path);

/// `cell,value` with row-major cell index; the row count must be 2^{d D}.
CubeFunction read_cube_function(std::istream& in, int dim);
CubeFunction read_cube_function(const std::string& path, int dim);
void write_cube_function(std::ostream& out, const CubeFunction& f);

/// {"kind": "general", "depth", "n", "entries": [{"Q": [level, pos], "kernel": [...]}]}
/// {"kind": "elementary", "depth", "m", "n",
///  "entries": [{"Q": [level, pos], "pairs": [{"source": {"node": [l, p], "coeffs": [a, b]},
///                                            "target": {...}}]}]}
struct ShiftFile {
  std::string kind;
  std::optional<ops::HaarShiftSpec> general;  ///< always set; elementary specs are assembled
  std::optional<ops::ElementaryShiftSpec> elementary;
};
ShiftFile read_shift(std::istream& in);
ShiftFile read_shift(const std::string& path);
void write_shift(std::ostream& out, const ops::HaarShiftSpec& spec);
void write_shift(std::ostream& out, const ops::ElementaryShiftSpec& spec);

/// {"A", "n", "nodes": {"k/pos": [f, g, F, G, u, v]}, optional "M": {"k/pos": M}}.
struct TreeFile {
  std::optional<MartingaleTree> tree;
  std::optional<ParaTree> para;  ///< set when "M" is present
};
TreeFile read_tree(std::istream& in);
TreeFile read_tree(const std::string& path);
void write_tree(std::ostream& out, const MartingaleTree& tree, const std::vector<double>* M = nullptr);

/// Header `n,a2,trial,norm,residual,method`.
void write_scan_csv(std::ostream& out, const ScanReport& report);
std::string scan_summary_json(const ScanReport& report);

/// {"dim", "cube_depth", "intervals": [{"interval": [l, p], "box": {...}, "children": [...]}],
///  "leaf_to_cell": [...]}.
std::string remodel_map_json(const RemodelMap& map);

}  // namespace haarlab::io
