#include "bottleneck/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bottleneck/acceptance.hpp"
#include "bottleneck/closed_forms.hpp"
#include "bottleneck/dual_sweep.hpp"
#include "bottleneck/envelope.hpp"
#include "bottleneck/io.hpp"
#include "bottleneck/oracle.hpp"

namespace bottleneck {

namespace {

class InfeasibleError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

constexpr double kNoBeta = std::numeric_limits<double>::quiet_NaN();

// ------------------------------------------------------------------ inputs

struct Source
{
  Distribution q;
  Channel t;
  std::optional<BscInstance> bsc;
  std::string digest;
};

std::vector<double> parse_number_list(const std::string& text, const char* what)
{
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !std::isfinite(v))
      throw std::invalid_argument(std::string(what) + ": '" + item + "' is not a finite number");
    out.push_back(v);
  }
  if (out.empty())
    throw std::invalid_argument(std::string(what) + ": empty list");
  return out;
}

BscInstance parse_bsc(const std::string& text)
{
  const auto v = parse_number_list(text, "--bsc");
  if (v.size() != 2)
    throw std::invalid_argument("--bsc expects q,delta");
  return BscInstance(v[0], v[1]);
}

Source load_source(const std::string& input, const std::string& bsc)
{
  if (input.empty() == bsc.empty())
    throw std::invalid_argument("give exactly one of --input FILE and --bsc q,delta");
  JointDistribution joint = [&] {
    if (!bsc.empty()) {
      const BscInstance inst = parse_bsc(bsc);
      return JointDistribution::binary_symmetric(inst.q, inst.delta);
    }
    return parse_joint_json(read_file(input));
  }();
  std::optional<BscInstance> inst;
  std::string digest;
  if (!bsc.empty()) {
    inst = parse_bsc(bsc);
    digest = fnv1a64_hex("bsc:" + format_double(inst->q) + "," + format_double(inst->delta));
  } else {
    digest = fnv1a64_hex(read_file(input));
  }
  Decomposition d = decompose_joint(joint);
  if (d.q.size() < 2)
    throw std::invalid_argument("X needs at least two symbols of positive probability");
  if (d.q.size() > 4)
    throw InfeasibleError("envelopes are limited to |X| <= 4 (got " + std::to_string(d.q.size())
                          + " symbols of positive probability)");
  return Source{std::move(d.q), std::move(d.channel), inst, std::move(digest)};
}

void check_threads_env()
{
  const char* env = std::getenv("BOTTLENECK_LAB_THREADS");
  if (!env)
    return;
  const std::string s(env);
  bool ok = !s.empty() && s.size() < 10;
  for (char c : s)
    ok = ok && c >= '0' && c <= '9';
  if (!ok || std::stol(s) <= 0)
    throw std::invalid_argument("BOTTLENECK_LAB_THREADS must be a positive integer");
}

SimplexFunctional make_functional(const std::string& kernel, double beta,
                                  const Distribution& reference)
{
  if (kernel == "entropy")
    return SimplexFunctional::entropy();
  if (kernel == "kl")
    return SimplexFunctional::divergence_from(DivergenceKernel::kl(), reference);
  if (kernel == "chi2")
    return SimplexFunctional::divergence_from(DivergenceKernel::chi_squared(), reference);
  if (kernel == "tv")
    return SimplexFunctional::divergence_from(DivergenceKernel::total_variation(), reference);
  if (kernel == "norm")
    return SimplexFunctional::norm(beta);
  throw std::invalid_argument("unknown kernel '" + kernel + "'");
}

bool logarithmic(const std::string& kernel) { return kernel == "entropy" || kernel == "kl"; }

// Returns the effective order: NaN when unused, 2 when wanted but not given.
double resolve_beta(double beta, bool wanted, const std::string& context)
{
  if (!wanted) {
    if (!std::isnan(beta))
      throw std::invalid_argument("--beta does not apply to " + context);
    return kNoBeta;
  }
  if (std::isnan(beta))
    return 2.0;
  if (!(beta >= 2.0) || !std::isfinite(beta))
    throw std::invalid_argument("--beta must be a finite number >= 2");
  return beta;
}

// ----------------------------------------------------------------- outputs

void emit(const std::string& output, const std::string& csv, const RunManifest& manifest,
          std::ostream& out)
{
  if (output.empty()) {
    out << csv;
    return;
  }
  write_file_atomic(output, csv);
  write_file_atomic(output + ".manifest.json", manifest.to_json());
}

std::string opt_string(double v) { return std::isnan(v) ? "" : format_double(v); }

// ------------------------------------------------------------------- curve

struct CurveArgs
{
  std::string input, bsc, problem = "ib", direction, frame, output;
  double beta = kNoBeta;
  std::size_t steps = 256;
  std::size_t resolution = 0;
};

enum class Family
{
  shannon,
  chi2,
  arimoto,
};

int cmd_curve(const CurveArgs& a, std::ostream& out)
{
  const Family family = a.problem == "ib" || a.problem == "pf" ? Family::shannon
                        : a.problem == "arimoto"               ? Family::arimoto
                                                               : Family::chi2;
  const double beta = resolve_beta(a.beta, family == Family::arimoto, "--problem " + a.problem);
  const std::string frame =
      !a.frame.empty() ? a.frame : family == Family::arimoto ? "K" : "finfo";
  if ((family == Family::shannon && frame == "K") || (family == Family::chi2 && frame != "finfo"))
    throw std::invalid_argument("--frame " + frame + " does not apply to --problem " + a.problem);

  // Output-frame direction of the named problem.
  std::string direction = a.direction;
  if (direction.empty()) {
    if (a.problem == "arimoto")
      direction = "both";
    else if (a.problem == "eb")
      direction = "upper";
    else if (a.problem == "epf")
      direction = "lower";
    else
      direction = (a.problem == "ib") == (frame == "finfo") ? "upper" : "lower";
  }

  Source src = load_source(a.input, a.bsc);
  if (family == Family::arimoto && src.q.size() != 2)
    throw InfeasibleError("--problem arimoto needs a binary X (the closed forms and frames are "
                          "binary)");

  SimplexFunctional f = SimplexFunctional::entropy();
  SimplexFunctional g = SimplexFunctional::entropy();
  if (family == Family::chi2) {
    f = make_functional("chi2", 0.0, src.q);
    g = make_functional("chi2", 0.0, src.t.apply(src.q));
  } else if (family == Family::arimoto) {
    f = SimplexFunctional::norm(beta);
    g = SimplexFunctional::norm(beta);
  }

  std::optional<BoundarySolver> solver;
  try {
    solver.emplace(f, g, src.t, src.q, a.resolution);
  } catch (const std::length_error& e) {
    throw InfeasibleError(e.what());
  }
  std::vector<double> landmarks;
  if (src.bsc && family == Family::shannon)
    landmarks.push_back((1.0 - 2.0 * src.bsc->delta) * (1.0 - 2.0 * src.bsc->delta));
  const auto grid = solver->default_lambda_grid(a.steps, landmarks);

  const bool flips = (family == Family::shannon && frame == "finfo")
                     || (family == Family::arimoto && frame == "entropy");
  const bool in_bits = family == Family::shannon || (family == Family::arimoto && frame != "K");

  std::vector<Direction> wanted;
  if (direction == "lower" || direction == "both")
    wanted.push_back(Direction::lower);
  if (direction == "upper" || direction == "both")
    wanted.push_back(Direction::upper);

  std::string csv = "problem,direction,lambda,x,y,trivial,witness_json\n";
  for (const Direction d : wanted) {
    const Direction raw =
        flips ? (d == Direction::lower ? Direction::upper : Direction::lower) : d;
    BoundaryCurve curve = solver->sweep(raw, grid);
    if (family == Family::shannon && frame == "finfo")
      curve = transform_entropy_frame(curve, src.q, src.t);
    if (family == Family::arimoto && frame != "K")
      curve = transform_arimoto_frame(
          curve, src.q, src.t, frame == "entropy" ? Frame::arimoto_entropy : Frame::arimoto_information);
    switch (family) {
    case Family::shannon:
      curve.problem = (d == Direction::upper) == (frame == "finfo") ? ProblemTag::ib : ProblemTag::pf;
      break;
    case Family::chi2:
      curve.problem = d == Direction::upper ? ProblemTag::eb : ProblemTag::epf;
      break;
    case Family::arimoto:
      curve.problem = ProblemTag::arimoto;
      break;
    }
    for (const auto& p : curve.points) {
      const double x = in_bits ? nats_to_bits(p.x) : p.x;
      const double y = in_bits ? nats_to_bits(p.y) : p.y;
      csv += to_string(curve.problem) + ',' + to_string(curve.direction) + ','
             + format_double(p.lambda) + ',' + format_double(x) + ',' + format_double(y) + ','
             + (p.trivial ? "1" : "0") + ',' + csv_field(p.witness.to_json()) + '\n';
    }
  }

  RunManifest manifest;
  manifest.command = "curve";
  manifest.input_digest = src.digest;
  manifest.parameters = {{"input", a.input},
                  {"bsc", a.bsc},
                  {"problem", a.problem},
                  {"beta", opt_string(beta)},
                  {"direction", direction},
                  {"frame", frame},
                  {"lambda_steps", std::to_string(a.steps)},
                  {"resolution", std::to_string(solver->lattice().resolution())},
                  {"units", in_bits ? "bits" : "raw"}};
  emit(a.output, csv, manifest, out);
  return kExitOk;
}

// ------------------------------------------------------------- closed-form

struct ClosedFormArgs
{
  std::string bsc, law = "mgl", output;
  double beta = kNoBeta;
  std::size_t points = 101;
};

int cmd_closed_form(const ClosedFormArgs& a, std::ostream& out)
{
  const bool arimoto = a.law.rfind("arimoto-", 0) == 0;
  const double beta = resolve_beta(a.beta, arimoto, "--law " + a.law);
  if (a.points < 2)
    throw std::invalid_argument("--points must be at least 2");
  const BscInstance inst = parse_bsc(a.bsc);
  const bool lower = a.law == "mgl" || a.law == "arimoto-mgl";

  std::string csv = "q,delta,beta,x,lower,upper\n";
  const std::string prefix =
      format_double(inst.q) + ',' + format_double(inst.delta) + ',' + opt_string(beta) + ',';
  // x in bits over [0, h(q)], or the K-frame range [K_beta(q), 1].
  const double x0 = arimoto ? arimoto_K(beta, inst.marginal()) : 0.0;
  const double x1 = arimoto ? 1.0 : binary_entropy(inst.q);
  for (std::size_t k = 0; k < a.points; ++k) {
    const double x =
        k + 1 == a.points ? x1 : x0 + (x1 - x0) * static_cast<double>(k) / (a.points - 1);
    double y = 0.0;
    if (a.law == "mgl")
      y = mgl(inst, x);
    else if (a.law == "mrgl")
      y = mr_gerber(inst, x);
    else if (a.law == "arimoto-mgl")
      y = arimoto_mgl_at(inst, beta, x);
    else
      y = arimoto_mr_gerber_at(inst, beta, x);
    csv += prefix + format_double(x) + ',' + (lower ? format_double(y) : "") + ','
           + (lower ? "" : format_double(y)) + '\n';
  }

  RunManifest manifest;
  manifest.command = "closed-form";
  manifest.input_digest = fnv1a64_hex("bsc:" + format_double(inst.q) + "," + format_double(inst.delta));
  manifest.parameters = {{"bsc", a.bsc},
                  {"law", a.law},
                  {"beta", opt_string(beta)},
                  {"points", std::to_string(a.points)},
                  {"units", arimoto ? "raw" : "bits"}};
  emit(a.output, csv, manifest, out);
  return kExitOk;
}

// ------------------------------------------------------------------ oracle

struct OracleArgs
{
  std::string input, bsc, kernel = "entropy", direction = "lower", x_list, output;
  double beta = kNoBeta;
  std::size_t points = 21;
  std::size_t budget = 0;
  std::size_t resolution = 0;
  std::size_t restarts = 512;
  std::uint64_t seed = 7;
};

int cmd_oracle(const OracleArgs& a, std::ostream& out)
{
  const double beta = resolve_beta(a.beta, a.kernel == "norm", "--kernel " + a.kernel);
  Source src = load_source(a.input, a.bsc);
  const std::size_t m = src.q.size();
  if (m > 3)
    throw InfeasibleError("the oracle supports |X| <= 3");
  const std::size_t budget = a.budget == 0 ? m + 1 : a.budget;
  if (budget > m + 1)
    throw std::invalid_argument("--budget must lie in [1, |X| + 1]");
  const std::size_t resolution = a.resolution != 0 ? a.resolution : m == 2 ? 512 : 64;
  const Direction direction = direction_from_string(a.direction);
  const SimplexFunctional f = make_functional(a.kernel, beta, src.q);
  const SimplexFunctional g = make_functional(a.kernel, beta, src.t.apply(src.q));
  const bool in_bits = logarithmic(a.kernel);
  const double unit = in_bits ? bits_to_nats(1.0) : 1.0;

  std::vector<double> xs;
  if (!a.x_list.empty()) {
    for (double x : parse_number_list(a.x_list, "--x"))
      xs.push_back(x * unit);
  } else {
    if (a.points < 2)
      throw std::invalid_argument("--points must be at least 2");
    // Span between the trivial witness and W = X.
    const double x_trivial = f(src.q);
    double x_det = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      x_det += src.q[i] * f(Distribution::vertex(m, i));
    const double lo = std::min(x_trivial, x_det);
    const double hi = std::max(x_trivial, x_det);
    for (std::size_t k = 0; k < a.points; ++k)
      xs.push_back(k + 1 == a.points ? hi : lo + (hi - lo) * static_cast<double>(k) / (a.points - 1));
  }

  std::vector<OracleResult> results;
  if (m == 2) {
    results = oracle_exhaustive(f, g, src.t, src.q, xs, direction, resolution, budget);
  } else {
    const OracleConfig cfg{.atom_budget = budget,
                           .grid_resolution = resolution,
                           .restarts = a.restarts,
                           .seed = a.seed,
                           .tolerance = 1e-9};
    for (double x : xs)
      results.push_back(oracle_boundary(f, g, src.t, src.q, x, direction, cfg));
  }

  std::string csv = "x_target,direction,best_y,feasible,witness_json,budget,resolution,seed\n";
  for (const auto& r : results)
    csv += format_double(r.x_target / unit) + ',' + to_string(r.direction) + ','
           + format_double(r.best_y / unit) + ',' + (r.feasible ? "1" : "0") + ','
           + csv_field(r.witness.to_json()) + ',' + std::to_string(r.budget) + ','
           + std::to_string(r.resolution) + ',' + std::to_string(r.seed) + '\n';

  RunManifest manifest;
  manifest.command = "oracle";
  manifest.input_digest = src.digest;
  manifest.seed = a.seed;
  manifest.parameters = {{"input", a.input},
                  {"bsc", a.bsc},
                  {"kernel", a.kernel},
                  {"beta", opt_string(beta)},
                  {"direction", a.direction},
                  {"x", a.x_list},
                  {"points", a.x_list.empty() ? std::to_string(a.points) : ""},
                  {"budget", std::to_string(budget)},
                  {"resolution", std::to_string(resolution)},
                  {"restarts", std::to_string(a.restarts)},
                  {"units", in_bits ? "bits" : "raw"}};
  emit(a.output, csv, manifest, out);
  return kExitOk;
}

// ---------------------------------------------------------------- envelope

struct EnvelopeArgs
{
  std::string input, bsc, f_kernel = "entropy", g_kernel = "entropy", direction = "lower", output;
  double beta = kNoBeta;
  double lambda = 0.0;
  std::size_t resolution = 0;
};

int cmd_envelope(const EnvelopeArgs& a, std::ostream& out)
{
  const double beta =
      resolve_beta(a.beta, a.f_kernel == "norm" || a.g_kernel == "norm", "these kernels");
  if (!std::isfinite(a.lambda))
    throw std::invalid_argument("--lambda must be finite");
  Source src = load_source(a.input, a.bsc);
  const SimplexFunctional f = make_functional(a.f_kernel, beta, src.q);
  const SimplexFunctional g = make_functional(a.g_kernel, beta, src.t.apply(src.q));
  const Direction direction = direction_from_string(a.direction);
  const std::size_t resolution =
      a.resolution != 0 ? a.resolution : default_resolution(src.q.size());
  std::shared_ptr<const SimplexLattice> lattice;
  try {
    lattice = std::make_shared<const SimplexLattice>(src.q.size(), resolution);
  } catch (const std::length_error& e) {
    throw InfeasibleError(e.what());
  }
  const PhiGraph graph = build_phi_graph(f, g, src.t, a.lambda, lattice);
  EnvelopeResult env;
  try {
    env = compute_envelope(graph, direction);
  } catch (const std::length_error& e) {
    throw InfeasibleError(e.what());
  }
  std::ostringstream csv;
  write_envelope_csv(csv, graph, env);

  RunManifest manifest;
  manifest.command = "envelope";
  manifest.input_digest = src.digest;
  manifest.parameters = {{"input", a.input},
                  {"bsc", a.bsc},
                  {"f_kernel", a.f_kernel},
                  {"g_kernel", a.g_kernel},
                  {"beta", opt_string(beta)},
                  {"lambda", format_double(a.lambda)},
                  {"direction", a.direction},
                  {"resolution", std::to_string(resolution)},
                  {"units", "nats"}};
  emit(a.output, csv.str(), manifest, out);
  return kExitOk;
}

// ------------------------------------------------------------------ verify

int cmd_verify(const std::string& suite, std::uint64_t seed, bool quiet, std::ostream& out)
{
  bool all_passed = true;
  for (const auto& r : run_acceptance_suite(suite, seed)) {
    out << format_result(r, !quiet || !r.passed) << std::flush;
    all_passed = all_passed && r.passed;
  }
  return all_passed ? kExitOk : kExitFailure;
}

void add_source_options(CLI::App* cmd, std::string& input, std::string& bsc)
{
  cmd->add_option("--input", input, "JSON joint: {\"p_xy\": [[...]]} or {\"q\": [...], \"T\": [[...]]}");
  cmd->add_option("--bsc", bsc, "X ~ Bernoulli(q) through BSC(delta), as q,delta");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Boundaries of the achievable region of (I_f(W;X), I_g(W;Y)) for W - X - Y",
               "bottleneck_lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  CurveArgs curve;
  auto* c = app.add_subcommand("curve", "Sweep boundary curves and write them as CSV");
  add_source_options(c, curve.input, curve.bsc);
  c->add_option("--problem", curve.problem, "ib, pf, eb, epf or arimoto")
      ->check(CLI::IsMember({"ib", "pf", "eb", "epf", "arimoto"}));
  c->add_option("--beta", curve.beta, "Order of the Arimoto functionals (>= 2)");
  c->add_option("--direction", curve.direction, "lower, upper or both (default: the problem's)")
      ->check(CLI::IsMember({"lower", "upper", "both"}));
  c->add_option("--lambda-steps", curve.steps, "Geometric slope steps")
      ->check(CLI::PositiveNumber);
  c->add_option("--resolution", curve.resolution, "Lattice resolution (0: default for |X|)");
  c->add_option("--frame", curve.frame, "finfo, entropy or K")
      ->check(CLI::IsMember({"finfo", "entropy", "K"}));
  c->add_option("--output", curve.output, "CSV path (stdout when omitted)");

  ClosedFormArgs closed;
  auto* cf = app.add_subcommand("closed-form", "Tabulate binary symmetric closed forms");
  cf->add_option("--bsc", closed.bsc, "q,delta with q, delta in [0, 1/2]")->required();
  cf->add_option("--law", closed.law, "mgl, mrgl, arimoto-mgl or arimoto-mrgl")
      ->check(CLI::IsMember({"mgl", "mrgl", "arimoto-mgl", "arimoto-mrgl"}));
  cf->add_option("--beta", closed.beta, "Arimoto order (>= 2)");
  cf->add_option("--points", closed.points, "Evenly spaced x values");
  cf->add_option("--output", closed.output, "CSV path (stdout when omitted)");

  OracleArgs oracle;
  auto* o = app.add_subcommand("oracle", "Brute-force boundary values over witness channels");
  add_source_options(o, oracle.input, oracle.bsc);
  o->add_option("--kernel", oracle.kernel, "entropy, kl, chi2, tv or norm (both coordinates)")
      ->check(CLI::IsMember({"entropy", "kl", "chi2", "tv", "norm"}));
  o->add_option("--beta", oracle.beta, "Order for --kernel norm (>= 2)");
  o->add_option("--direction", oracle.direction, "lower or upper")
      ->check(CLI::IsMember({"lower", "upper"}));
  o->add_option("--x", oracle.x_list, "Comma-separated x targets");
  o->add_option("--points", oracle.points, "Evenly spaced x targets when --x is absent");
  o->add_option("--budget", oracle.budget, "Atoms per witness (0: |X| + 1)");
  o->add_option("--resolution", oracle.resolution, "Atom grid resolution (0: 512 binary, 64 ternary)");
  o->add_option("--restarts", oracle.restarts, "Random restarts for |X| = 3");
  o->add_option("--seed", oracle.seed, "Seed for |X| = 3");
  o->add_option("--output", oracle.output, "CSV path (stdout when omitted)");

  EnvelopeArgs envelope;
  auto* e = app.add_subcommand("envelope", "Dump phi and its envelope on the lattice");
  add_source_options(e, envelope.input, envelope.bsc);
  e->add_option("--f-kernel", envelope.f_kernel, "Kernel for x")
      ->check(CLI::IsMember({"entropy", "kl", "chi2", "tv", "norm"}));
  e->add_option("--g-kernel", envelope.g_kernel, "Kernel for y")
      ->check(CLI::IsMember({"entropy", "kl", "chi2", "tv", "norm"}));
  e->add_option("--beta", envelope.beta, "Order for norm kernels (>= 2)");
  e->add_option("--lambda", envelope.lambda, "Slope in phi = g(Tp) - lambda f(p)");
  e->add_option("--direction", envelope.direction, "lower or upper")
      ->check(CLI::IsMember({"lower", "upper"}));
  e->add_option("--resolution", envelope.resolution, "Lattice resolution (0: default for |X|)");
  e->add_option("--output", envelope.output, "CSV path (stdout when omitted)");

  std::string suite = "all";
  std::uint64_t seed = 1;
  bool quiet = false;
  auto* v = app.add_subcommand("verify", "Run acceptance checks");
  v->add_option("--suite", suite, "mgl, mrgl, arimoto, oracle-cross, matched, chi2, properties, all")
      ->check(CLI::IsMember(acceptance_suites()));
  v->add_option("--seed", seed, "Seed for the seeded suites");
  v->add_flag("--quiet", quiet, "Summary lines only");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitInvalidInput;
  }

  try {
    check_threads_env();
    if (*c)
      return cmd_curve(curve, out);
    if (*cf)
      return cmd_closed_form(closed, out);
    if (*o)
      return cmd_oracle(oracle, out);
    if (*e)
      return cmd_envelope(envelope, out);
    return cmd_verify(suite, seed, quiet, out);
  } catch (const InfeasibleError& ex) {
    err << "infeasible: " << ex.what() << '\n';
    return kExitInfeasible;
  } catch (const std::invalid_argument& ex) {
    err << "invalid input: " << ex.what() << '\n';
    return kExitInvalidInput;
  } catch (const std::domain_error& ex) {
    err << "invalid input: " << ex.what() << '\n';
    return kExitInvalidInput;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace bottleneck
