#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "haarlab/bellman.hpp"
#include "haarlab/error.hpp"
#include "haarlab/io.hpp"
#include "haarlab/operators.hpp"
#include "haarlab/parallel.hpp"
#include "haarlab/random.hpp"
#include "haarlab/remodel.hpp"
#include "haarlab/specnorm.hpp"
#include "haarlab/transference.hpp"
#include "haarlab/weights.hpp"
#include "json.hpp"

namespace haarlab::cli {

namespace {

using nlohmann::json;

constexpr double kMarginTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Writes to `path`, or to `fallback` when the path is empty.
void emit(const std::string& path, std::ostream& fallback, const std::string& text) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ValidationError("cannot write " + path);
  file << text;
}

std::string tree_witness(const MartingaleTree& tree, const std::vector<double>* M = nullptr) {
  std::ostringstream os;
  io::write_tree(os, tree, M);
  return os.str();
}

const TreeKind kKinds[] = {TreeKind::generic, TreeKind::alternating, TreeKind::f_only, TreeKind::g_only};
const char* const kKindNames[] = {"generic", "alternating", "f_only", "g_only"};
const double kDefaultA[] = {2.0, 4.0, 16.0};

// --- norm-scan ------------------------------------------------------------------

struct ScanOptions {
  int depth = 8;
  std::vector<int> complexities{1, 2, 3};
  std::vector<double> targets{1.0, 4.0, 16.0};
  int trials = 5;
  std::uint64_t seed = 0;
  std::string out;
  std::string summary;
  double tol = 1e-8;
  int max_iter = 5000;
  bool force_power = false;
};

int cmd_norm_scan(const ScanOptions& o, std::ostream& out, std::ostream& err) {
  NormOptions opts;
  opts.tol = o.tol;
  opts.max_iterations = o.max_iter;
  opts.force_power = o.force_power;
  const ScanReport report =
      complexity_scan(DyadicGrid(o.depth), o.complexities, o.targets, o.trials, o.seed, opts);
  std::ostringstream csv;
  io::write_scan_csv(csv, report);
  emit(o.out, out, csv.str());
  std::string summary_path = o.summary;
  if (summary_path.empty() && !o.out.empty()) summary_path = o.out + ".summary.json";
  if (!summary_path.empty()) emit(summary_path, out, io::scan_summary_json(report) + "\n");
  if (!report.all_converged()) {
    err << "norm-scan: power iteration did not converge for at least one row\n";
    return kNoConvergence;
  }
  return kPass;
}

// --- norm -----------------------------------------------------------------------

struct NormCmdOptions {
  std::string shift;
  std::string weight;
  std::uint64_t seed = 0;
  std::string out;
  double tol = 1e-8;
  int max_iter = 5000;
  bool force_power = false;
};

int cmd_norm(const NormCmdOptions& o, std::ostream& out, std::ostream& err) {
  const io::ShiftFile shift = io::read_shift(o.shift);
  const DyadicGrid& grid = shift.general->grid();
  const Weight w = o.weight.empty() ? Weight::constant(grid) : io::read_weight(o.weight);
  if (w.values().grid().depth() != grid.depth()) throw ValidationError("weight and shift depths differ");
  NormOptions opts;
  opts.tol = o.tol;
  opts.max_iterations = o.max_iter;
  opts.force_power = o.force_power;
  opts.seed = o.seed;
  const NormEstimate est = operator_norm_weighted(ops::as_map(*shift.general), w, opts);
  json doc{{"kind", shift.kind},
           {"complexity", shift.general->complexity()},
           {"a2", a2_norm(w).a2_norm},
           {"norm", est.value},
           {"residual", est.residual},
           {"iterations", est.iterations},
           {"method", to_string(est.method)},
           {"converged", est.converged}};
  emit(o.out, out, doc.dump(1) + "\n");
  if (!est.converged) {
    err << "norm: power iteration did not converge\n";
    return kNoConvergence;
  }
  return kPass;
}

// --- verify-lemma ---------------------------------------------------------------

struct LemmaOptions {
  int trees = 1000;
  int n_max = 3;
  std::string candidate = "quadratic:scale=2";
  std::uint64_t seed = 0;
  double A = 0.0;  // 0: cycle through 2, 4, 16
  std::string out;
};

struct LemmaResult {
  bool degenerate = false;
  std::string contract_error;
  std::string candidate_error;
  EstimateReport est;
  IdentityReport ids;
  DomainReport dom;
  bool identities_ok = true;
};

bool identities_ok(const IdentityReport& ids) {
  return ids.min_theta >= 0.0 && ids.max_theta_sum_error <= 1e-12 && ids.max_midpoint_error <= 1e-12 &&
         ids.max_product_error <= 1e-10 && ids.max_root_error <= 1e-12;
}

MartingaleTree lemma_tree(const LemmaOptions& o, std::size_t t) {
  Rng rng(derive_seed(o.seed, 0x1e, t));
  const int n = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(o.n_max)));
  const double A = o.A > 0.0 ? o.A : kDefaultA[rng.index(3)];
  return random_martingale_tree(n, A, rng, kKinds[t % 4]);
}

int cmd_verify_lemma(const LemmaOptions& o, std::ostream& out, std::ostream& err) {
  const BellmanCandidate cand = parse_candidate(o.candidate);
  if (cand.is_para()) throw ValidationError("verify-lemma needs a non-paraproduct candidate");
  const bool declared_only = cand.name.rfind("dp:", 0) == 0;
  std::vector<LemmaResult> results(static_cast<std::size_t>(o.trees));
  parallel_for(results.size(), [&](std::size_t t) {
    LemmaResult& r = results[t];
    const MartingaleTree tree = lemma_tree(o, t);
    try {
      r.est = main_estimate_check(tree, cand, false);
      const ModifiedTree mod = build_modified(tree, r.est.plank.alpha);
      r.ids = check_identities(tree, mod);
      r.identities_ok = identities_ok(r.ids) && r.est.plank.sum == 0.0;
      r.dom = verify_domains(tree, mod);
    } catch (const ContractViolation& e) {
      r.contract_error = e.what();
    } catch (const ValidationError&) {
      r.degenerate = true;
    }
  });

  json worst{{"margin", kInf},        {"gain_margin", kInf},     {"first_step_margin", kInf},
             {"concavity_margin", kInf}, {"telescoping_margin", kInf}, {"final_diff_margin", kInf},
             {"move_margin", kInf},   {"min_plank_ratio", kInf}, {"max_segment_ratio", 0.0},
             {"max_uv_ratio", 0.0},   {"max_midpoint_error", 0.0}, {"max_product_error", 0.0}};
  if (cand.name.rfind("quadratic", 0) == 0) worst["strong_margin"] = kInf;
  std::size_t margin_failures = 0, contract_failures = 0, identity_failures = 0, degenerate = 0;
  std::size_t candidate_violations = 0;
  std::optional<std::size_t> witness;
  auto lower = [&](const char* key, double v) { worst[key] = std::min(worst[key].get<double>(), v); };
  auto raise = [&](const char* key, double v) { worst[key] = std::max(worst[key].get<double>(), v); };
  for (std::size_t t = 0; t < results.size(); ++t) {
    const LemmaResult& r = results[t];
    if (r.degenerate) {
      ++degenerate;
      continue;
    }
    if (!r.contract_error.empty()) {
      ++contract_failures;
      if (!witness) witness = t;
      err << "tree " << t << ": " << r.contract_error << "\n";
      continue;
    }
    const EstimateReport& e = r.est;
    lower("margin", e.margin);
    lower("gain_margin", e.gain_margin);
    lower("first_step_margin", e.first_step_margin);
    lower("concavity_margin", e.concavity_margin);
    lower("telescoping_margin", e.telescoping_margin);
    lower("final_diff_margin", e.final_diff_margin);
    lower("move_margin", e.move_margin);
    lower("min_plank_ratio", std::min(e.plank.ratio_f, e.plank.ratio_g));
    if (worst.contains("strong_margin")) lower("strong_margin", e.strong_margin);
    raise("max_segment_ratio", r.dom.worst_segment_ratio);
    raise("max_uv_ratio", r.dom.worst_uv_ratio);
    raise("max_midpoint_error", r.ids.max_midpoint_error);
    raise("max_product_error", r.ids.max_product_error);
    candidate_violations += e.candidate_violations;
    const bool bad_margin = e.margin < -kMarginTol;
    const bool bad_candidate = e.candidate_violations > 0 && !declared_only;
    if (bad_margin || bad_candidate) ++margin_failures;
    if (!r.identities_ok) ++identity_failures;
    if ((bad_margin || bad_candidate || !r.identities_ok) && !witness) witness = t;
  }
  const bool pass = margin_failures == 0 && contract_failures == 0 && identity_failures == 0;
  json doc{{"candidate", cand.name},
           {"gamma", cand.gamma},
           {"trees", o.trees},
           {"n_max", o.n_max},
           {"seed", o.seed},
           {"degenerate", degenerate},
           {"margin_failures", margin_failures},
           {"contract_failures", contract_failures},
           {"identity_failures", identity_failures},
           {"candidate_violations", candidate_violations},
           {"candidate_violations_fatal", !declared_only},
           {"worst", worst},
           {"passed", pass}};
  emit(o.out, out, doc.dump(1) + "\n");
  if (witness) {
    err << "witness tree " << *witness << " (" << kKindNames[*witness % 4] << "):\n"
        << tree_witness(lemma_tree(o, *witness));
  }
  return pass ? kPass : kFailure;
}

// --- para-check -----------------------------------------------------------------

struct ParaOptions {
  int trees = 1000;
  int n_max = 3;
  std::string candidate = "para-quadratic:scale=2";
  std::uint64_t seed = 0;
  double A = 0.0;
  std::string out;
};

ParaTree para_check_tree(const ParaOptions& o, std::size_t t) {
  Rng rng(derive_seed(o.seed, 0x9a, t));
  const int n = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(o.n_max)));
  const double A = o.A > 0.0 ? o.A : kDefaultA[rng.index(3)];
  return random_para_tree(n, A, rng);
}

int cmd_para_check(const ParaOptions& o, std::ostream& out, std::ostream& err) {
  const BellmanCandidate cand = parse_candidate(o.candidate);
  if (!cand.is_para()) throw ValidationError("para-check needs a paraproduct candidate, got " + cand.name);
  struct Result {
    std::string error;
    EstimateReport est;
    bool identities_ok = true;
  };
  std::vector<Result> results(static_cast<std::size_t>(o.trees));
  parallel_for(results.size(), [&](std::size_t t) {
    Result& r = results[t];
    const ParaTree tree = para_check_tree(o, t);
    try {
      r.est = para_estimate_check(tree, cand, false);
      const ModifiedTree mod = build_modified(tree, r.est.plank.alpha);
      const double n = static_cast<double>(tree.tree().leaf_count());
      r.identities_ok = identities_ok(check_identities(tree.tree(), mod)) &&
                        std::abs(r.est.plank.sum) <= 4.0 * std::numeric_limits<double>::epsilon() * n;
    } catch (const Error& e) {
      r.error = e.what();
    }
  });
  double margin = kInf, gain = kInf, concavity = kInf, first = kInf, move = kInf, min_d = kInf, max_d = 0.0;
  std::size_t failures = 0, violations = 0;
  std::optional<std::size_t> witness;
  for (std::size_t t = 0; t < results.size(); ++t) {
    const Result& r = results[t];
    bool bad = !r.error.empty() || !r.identities_ok;
    if (!r.error.empty()) err << "tree " << t << ": " << r.error << "\n";
    if (r.error.empty()) {
      margin = std::min(margin, r.est.margin);
      gain = std::min(gain, r.est.gain_margin);
      concavity = std::min(concavity, r.est.concavity_margin);
      first = std::min(first, r.est.first_step_margin);
      move = std::min(move, r.est.move_margin);
      violations += r.est.candidate_violations;
      bad = bad || r.est.margin < -kMarginTol || r.est.candidate_violations > 0;
      const double d = para_check_tree(o, t).d();
      min_d = std::min(min_d, d);
      max_d = std::max(max_d, d);
    }
    if (bad) {
      ++failures;
      if (!witness) witness = t;
    }
  }
  json doc{{"candidate", cand.name},
           {"gamma", cand.gamma},
           {"constant", 36.0},
           {"trees", o.trees},
           {"seed", o.seed},
           {"failures", failures},
           {"candidate_violations", violations},
           {"worst", {{"margin", margin},
                      {"gain_margin", gain},
                      {"concavity_margin", concavity},
                      {"first_step_margin", first},
                      {"move_margin", move}}},
           {"d_range", {min_d, max_d}},
           {"passed", failures == 0}};
  emit(o.out, out, doc.dump(1) + "\n");
  if (witness) {
    const ParaTree tree = para_check_tree(o, *witness);
    err << "witness para tree " << *witness << ":\n" << tree_witness(tree.tree(), &tree.M());
  }
  return failures == 0 ? kPass : kFailure;
}

// --- bellman-check --------------------------------------------------------------

struct BellmanCheckOptions {
  int samples = 100000;
  double A = 4.0;
  std::uint64_t seed = 0;
  std::string out;
};

BellmanPoint random_domain_point(Rng& rng, double A) {
  BellmanPoint x;
  x.u = std::exp(rng.uniform(-3.0, 3.0));
  x.v = rng.uniform(1.0, A) / x.u;
  x.F = std::exp(rng.uniform(-2.0, 2.0));
  x.G = std::exp(rng.uniform(-2.0, 2.0));
  x.f = std::sqrt(x.F * x.v) * rng.uniform(-1.0, 1.0);
  x.g = std::sqrt(x.G * x.u) * rng.uniform(-1.0, 1.0);
  return x;
}

int cmd_bellman_check(const BellmanCheckOptions& o, std::ostream& out, std::ostream&) {
  if (!(o.A >= 1.0)) throw ValidationError("--A must be >= 1");
  Rng rng(derive_seed(o.seed, 0xbe));
  double worst = 0.0, worst_sampled_gap = 0.0;
  std::size_t violations = 0, draws = 0;
  for (int s = 0; s < o.samples; ++s) {
    BellmanPoint xm, xp;
    do {
      xm = random_domain_point(rng, o.A);
      xp = random_domain_point(rng, o.A);
      ++draws;
    } while (midpoint(xm, xp).u * midpoint(xm, xp).v > o.A);
    const SegmentMax seg = segment_max_uv(xm, xp, o.A);
    worst = std::max(worst, seg.value / o.A);
    if (seg.value > 9.0 * o.A / 8.0 + kMarginTol) ++violations;
    if (s % 100 == 0) {
      const double sampled = segment_max_uv_sampled(xm, xp, 2000);
      worst_sampled_gap = std::max(worst_sampled_gap, (sampled - seg.value) / seg.value);
    }
  }
  const auto [em, ep] = extremal_segment(o.A);
  const SegmentMax ext = segment_max_uv(em, ep, o.A);
  const bool extremal_ok = std::abs(ext.value / o.A - 9.0 / 8.0) <= 1e-6;
  const bool pass = violations == 0 && extremal_ok && worst_sampled_gap <= 1e-12;
  json doc{{"A", o.A},
           {"samples", o.samples},
           {"draws", draws},
           {"seed", o.seed},
           {"max_uv_over_A", worst},
           {"bound_over_A", 9.0 / 8.0},
           {"violations", violations},
           {"sampled_exceeds_closed_form", worst_sampled_gap},
           {"extremal", {{"max_uv_over_A", ext.value / o.A}, {"t", ext.t}}},
           {"passed", pass}};
  emit(o.out, out, doc.dump(1) + "\n");
  return pass ? kPass : kFailure;
}

// --- remodel --------------------------------------------------------------------

struct RemodelOptions {
  int d = 2;
  int depth = 3;
  std::uint64_t seed = 0;
  int weights = 50;
  double delta = 0.5;
  int complexity = 1;
  std::string dump_map;
  std::string out;
};

std::vector<double> heap_averages(std::span<const double> leaves) {
  const std::size_t n = leaves.size();
  std::vector<double> heap(2 * n);
  std::copy(leaves.begin(), leaves.end(), heap.begin() + static_cast<std::ptrdiff_t>(n));
  for (std::size_t h = n - 1; h >= 1; --h) heap[h] = 0.5 * (heap[2 * h] + heap[2 * h + 1]);
  return heap;
}

int cmd_remodel(const RemodelOptions& o, std::ostream& out, std::ostream& err) {
  if (o.weights < 1) throw ValidationError("--weights must be positive");
  const double bound = std::ldexp(1.0, 2 * (o.d - 1));
  double worst_ratio = 0.0, worst_avg = 0.0, worst_conj = 0.0;
  std::size_t violations = 0;
  for (int k = 0; k < o.weights; ++k) {
    const RemodelMap map = build_phi(o.d, o.depth, derive_seed(o.seed, 0x3a, k));
    if (k == 0 && !o.dump_map.empty()) emit(o.dump_map, out, io::remodel_map_json(map) + "\n");
    const CubeFunction w = cube_cascade_weight(o.d, o.depth, o.delta, derive_seed(o.seed, 0x3b, k));
    const StepFunction tw = transfer_function(map, w);
    const auto heap = heap_averages(tw.values());
    for (std::size_t h = 1; h < heap.size(); ++h) {
      const double cube_avg = w.average(map.box(DyadicNode::from_heap_index(h)));
      worst_avg = std::max(worst_avg, std::abs(heap[h] - cube_avg) / cube_avg);
    }
    try {
      worst_ratio = std::max(worst_ratio, a2_inflation(map, w).ratio);
    } catch (const ContractViolation& e) {
      ++violations;
      err << "weight " << k << ": " << e.what() << "\n";
    }
  }

  Rng rng(derive_seed(o.seed, 0x3c));
  const RemodelMap map = build_phi(o.d, o.depth, derive_seed(o.seed, 0x3d));
  const CubeShiftSpec spec = CubeShiftSpec::random(o.d, o.depth, o.complexity, rng);
  const ops::HaarShiftSpec remodeled = remodel_shift(map, spec);
  std::vector<int> cube_levels;
  for (const auto& e : spec.entries) {
    if (cube_levels.empty() || cube_levels.back() != e.level * o.d) cube_levels.push_back(e.level * o.d);
  }
  const bool levels_ok = remodeled.active_levels() == cube_levels;
  const bool complexity_ok = remodeled.complexity() == o.complexity * o.d;
  CubeFunction f{o.d, o.depth, std::vector<double>(std::size_t{1} << (o.d * o.depth))};
  for (double& x : f.values) x = rng.normal();
  const StepFunction lhs = apply_haar_shift(remodeled, transfer_function(map, f));
  const StepFunction rhs = transfer_function(map, apply_cube_shift(spec, f));
  worst_conj = (lhs - rhs).max_abs() / std::max(rhs.max_abs(), 1.0);

  const bool pass = violations == 0 && worst_avg <= 1e-12 && levels_ok && complexity_ok && worst_conj <= 1e-10;
  json doc{{"d", o.d},
           {"depth", o.depth},
           {"weights", o.weights},
           {"delta", o.delta},
           {"seed", o.seed},
           {"inflation_bound", bound},
           {"max_inflation_ratio", worst_ratio},
           {"violations", violations},
           {"max_average_error", worst_avg},
           {"shift", {{"cube_complexity", o.complexity},
                      {"remodeled_complexity", remodeled.complexity()},
                      {"active_levels", remodeled.active_levels()},
                      {"levels_ok", levels_ok},
                      {"conjugacy_error", worst_conj}}},
           {"passed", pass}};
  emit(o.out, out, doc.dump(1) + "\n");
  return pass ? kPass : kFailure;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"haarlab: dyadic shift and Bellman-function workbench", "haarlab"};
  app.require_subcommand(1);

  ScanOptions scan;
  auto* s = app.add_subcommand("norm-scan", "Weighted norms of random shifts over complexities and A2 targets");
  s->add_option("--depth", scan.depth, "Grid depth")->check(CLI::Range(1, 16));
  s->add_option("--complexities", scan.complexities, "Comma-separated complexities")->delimiter(',');
  s->add_option("--a2-targets", scan.targets, "Comma-separated [w] targets")->delimiter(',');
  s->add_option("--trials", scan.trials, "Random shifts per (n, target)")->check(CLI::PositiveNumber);
  s->add_option("--seed", scan.seed, "Seed")->required();
  s->add_option("--out", scan.out, "CSV path (default stdout)");
  s->add_option("--summary", scan.summary, "Summary JSON path (default <out>.summary.json)");
  s->add_option("--tol", scan.tol, "Power iteration tolerance")->check(CLI::PositiveNumber);
  s->add_option("--max-iter", scan.max_iter, "Power iteration cap")->check(CLI::PositiveNumber);
  s->add_flag("--force-power", scan.force_power, "Never use the dense SVD");

  NormCmdOptions norm;
  auto* nm = app.add_subcommand("norm", "Weighted norm of a shift read from JSON");
  nm->add_option("--shift", norm.shift, "Shift JSON")->required()->check(CLI::ExistingFile);
  nm->add_option("--weight", norm.weight, "Weight CSV (default w = 1)")->check(CLI::ExistingFile);
  nm->add_option("--seed", norm.seed, "Seed of the power iteration start")->required();
  nm->add_option("--out", norm.out, "Report path");
  nm->add_option("--tol", norm.tol, "Power iteration tolerance")->check(CLI::PositiveNumber);
  nm->add_option("--max-iter", norm.max_iter, "Power iteration cap")->check(CLI::PositiveNumber);
  nm->add_flag("--force-power", norm.force_power, "Never use the dense SVD");

  LemmaOptions lemma;
  auto* l = app.add_subcommand("verify-lemma", "Main-estimate chain on random martingale trees");
  l->add_option("--trees", lemma.trees, "Number of trees")->check(CLI::PositiveNumber);
  l->add_option("--n-max", lemma.n_max, "Largest tree depth")->check(CLI::Range(1, 8));
  l->add_option("--candidate", lemma.candidate, "Candidate, e.g. quadratic:scale=2 or dp:k=1,res=0.25");
  l->add_option("--seed", lemma.seed, "Seed")->required();
  l->add_option("--A", lemma.A, "Fixed A (default: cycle 2, 4, 16)")->check(CLI::Range(1.0, 1e6));
  l->add_option("--out", lemma.out, "Report path");

  ParaOptions para;
  auto* p = app.add_subcommand("para-check", "Paraproduct main estimate on random para trees");
  p->add_option("--trees", para.trees, "Number of trees")->check(CLI::PositiveNumber);
  p->add_option("--n-max", para.n_max, "Largest tree depth")->check(CLI::Range(1, 8));
  p->add_option("--candidate", para.candidate, "Paraproduct candidate");
  p->add_option("--seed", para.seed, "Seed")->required();
  p->add_option("--A", para.A, "Fixed A (default: cycle 2, 4, 16)")->check(CLI::Range(1.0, 1e6));
  p->add_option("--out", para.out, "Report path");

  BellmanCheckOptions bell;
  auto* b = app.add_subcommand("bellman-check", "Segment bound on random valid triples");
  b->add_option("--samples", bell.samples, "Number of segments")->check(CLI::PositiveNumber);
  b->add_option("--A", bell.A, "A")->check(CLI::Range(1.0, 1e6));
  b->add_option("--seed", bell.seed, "Seed")->required();
  b->add_option("--out", bell.out, "Report path");

  RemodelOptions rem;
  auto* r = app.add_subcommand("remodel", "Remodel cascade weights and a random cube shift");
  r->add_option("--d", rem.d, "Dimension")->check(CLI::Range(1, kMaxCubeDimension));
  r->add_option("--depth", rem.depth, "Cube depth")->check(CLI::Range(1, 12));
  r->add_option("--seed", rem.seed, "Seed")->required();
  r->add_option("--weights", rem.weights, "Number of cascade weights")->check(CLI::PositiveNumber);
  r->add_option("--delta", rem.delta, "Cascade step of log w")->check(CLI::NonNegativeNumber);
  r->add_option("--complexity", rem.complexity, "Cube shift complexity")->check(CLI::PositiveNumber);
  r->add_option("--dump-map", rem.dump_map, "Write the first map as JSON adjacency");
  r->add_option("--out", rem.out, "Report path");

  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (*s) return cmd_norm_scan(scan, out, err);
    if (*nm) return cmd_norm(norm, out, err);
    if (*l) return cmd_verify_lemma(lemma, out, err);
    if (*p) return cmd_para_check(para, out, err);
    if (*b) return cmd_bellman_check(bell, out, err);
    if (*r) {
      if (rem.complexity > rem.depth) throw ValidationError("--complexity exceeds --depth");
      return cmd_remodel(rem, out, err);
    }
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kNoConvergence;
  } catch (const CandidateViolation& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace haarlab::cli
