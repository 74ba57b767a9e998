#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "treetomo/treetomo.hpp"

namespace treetomo::cli {

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::InsufficientData:
    case ErrorCode::ZeroDenominator:
      return kInsufficientData;
    case ErrorCode::OutOfRange:
    case ErrorCode::RowSumViolation:
      return kOutOfRange;
    case ErrorCode::NonTermination:
      return kInternal;
    default:
      return kFormat;
  }
}

namespace {

namespace fs = std::filesystem;

struct RunConfig {
  std::string tree = "star";
  bool random_tree = false;
  int l = 1;
  int k = 1;
  int arms = 2;
  std::uint64_t samples = 0;
  int rout = 3;
  std::size_t max_vertices = 40;
  std::uint64_t seed = 0;
  std::string mode = "float";
  int t_max = -1;
  double floor = 0.05;
  unsigned workers = 1;
  std::string unknown = "all";
  bool project = false;
  std::string out;
  std::string kernel;
  std::string p_in;
  std::string p_out;
  std::string batch;
  std::string reference;
  std::vector<std::uint64_t> n_grid{10'000, 100'000};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
};

UnknownScope unknown_scope(const RunConfig& c) {
  return c.unknown == "internal" ? UnknownScope::InternalLambda : UnknownScope::AllLambda;
}

std::string slurp(const std::string& path) {
  auto in = open_input(path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

bool has_record(const std::string& text, const std::string& kind) {
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line))
    if (line.starts_with(kind + " ")) return true;
  return false;
}

AugmentedTree load_tree(const RunConfig& c) {
  RootedTree base;
  if (c.random_tree || c.tree == "random") {
    base = random_tree(c.rout, c.max_vertices, c.seed);
  } else if (c.tree == "star") {
    base = star(c.l, c.arms);
  } else if (c.tree == "segment") {
    base = segment(c.k, c.l);
  } else {
    std::istringstream text(slurp(c.tree));
    if (has_record(text.str(), "origin")) return read_augmented(text);
    base = read_tree(text);
  }
  return spherical_augmentation(base, 2);
}

template <class Scalar>
TransitionKernel<Scalar> load_kernel(const std::string& path, const AugmentedTree& aug) {
  std::istringstream text(slurp(path));
  return read_kernel<Scalar>(text, aug.vertex_count());
}

// Truth kernel: the --kernel file when given, otherwise a random draw.
template <class Scalar>
TransitionKernel<Scalar> truth_kernel(const RunConfig& c, const AugmentedTree& aug) {
  if (!c.kernel.empty()) return load_kernel<Scalar>(c.kernel, aug);
  return random_kernel<Scalar>(aug, c.seed, c.floor, RandomScope::LambdaOnly, unknown_scope(c));
}

template <class Scalar>
HittingDistribution<Scalar> load_distribution(const std::string& path, const AugmentedTree& aug,
                                              Layer layer) {
  std::istringstream text(slurp(path));
  return read_distribution<Scalar>(text, aug, layer);
}

class Artifacts {
 public:
  Artifacts(const RunConfig& c, std::ostream& out) : dir_(c.out), out_(out) {
    if (dir_.empty()) return;
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) fail(ErrorCode::IoError, "cannot create " + dir_ + ": " + ec.message());
  }

  bool to_files() const { return !dir_.empty(); }

  // Without an output directory the artifact goes to stdout.
  void emit(const std::string& name, const std::function<void(std::ostream&)>& write) {
    if (dir_.empty()) {
      write(out_);
      return;
    }
    const std::string path = (fs::path(dir_) / name).string();
    auto file = open_output(path);
    write(file);
    file.flush();
    if (!file) fail(ErrorCode::IoError, "write failed for " + path);
  }

 private:
  std::string dir_;
  std::ostream& out_;
};

template <class Scalar>
std::string error_text(const RecoveryReport<Scalar>& report, const TransitionKernel<Scalar>& ref) {
  if constexpr (scalar_traits<Scalar>::exact) {
    if (exact_match(report.kernel, ref)) return "0";
  }
  return format_scalar(max_abs_error(report.kernel, ref));
}

template <class Scalar>
int cmd_gen(const RunConfig& c, std::ostream& out) {
  const auto aug = load_tree(c);
  const auto kernel =
      random_kernel<Scalar>(aug, c.seed, c.floor, RandomScope::LambdaOnly, unknown_scope(c));
  Artifacts files(c, out);
  files.emit("tree.txt", [&](std::ostream& os) { write_augmented(os, aug); });
  files.emit("kernel.txt", [&](std::ostream& os) { write_kernel(os, kernel); });
  out << "vertices " << aug.vertex_count() << '\n'
      << "hull_radius " << aug.hull_radius << '\n'
      << "required_time " << required_time(aug) << '\n';
  return kOk;
}

template <class Scalar>
int cmd_forward(const RunConfig& c, std::ostream& out) {
  const auto aug = load_tree(c);
  const auto kernel = load_kernel<Scalar>(c.kernel, aug);
  const int t_max = c.t_max >= 0 ? c.t_max : required_time(aug);
  const auto p_in = first_hitting_joint(aug, kernel, Layer::Inner, t_max);
  const auto p_out = first_hitting_joint(aug, kernel, Layer::Outer, t_max);
  Artifacts files(c, out);
  files.emit("p_in.tsv", [&](std::ostream& os) { write_distribution(os, p_in); });
  files.emit("p_out.tsv", [&](std::ostream& os) { write_distribution(os, p_out); });
  return kOk;
}

template <class Scalar>
void finish_report(const RunConfig& c, std::ostream& out, RecoveryReport<Scalar>& report,
                   const AugmentedTree& aug) {
  std::string error;
  if (!c.reference.empty()) {
    const auto ref = load_kernel<Scalar>(c.reference, aug);
    report.max_error = max_abs_error(report.kernel, ref);
    error = error_text(report, ref);
  }
  Artifacts files(c, out);
  files.emit("report.txt", [&](std::ostream& os) { write_report(os, report); });
  if (files.to_files()) {
    out << "max_time_read " << report.max_time_read() << '\n';
    if (!error.empty()) out << "max_error " << error << '\n';
    out << "flags " << report.flags.size() << '\n';
  }
}

template <class Scalar>
int cmd_invert(const RunConfig& c, std::ostream& out) {
  const auto aug = load_tree(c);
  const auto known = load_kernel<Scalar>(c.kernel, aug);
  const auto p_in = load_distribution<Scalar>(c.p_in, aug, Layer::Inner);
  const auto p_out = load_distribution<Scalar>(c.p_out, aug, Layer::Outer);
  RecoveryOptions options;
  options.project = c.project;
  auto report = recover_all(aug, known, p_in, p_out, options);
  finish_report(c, out, report, aug);
  return kOk;
}

int cmd_sample(const RunConfig& c, std::ostream& out) {
  const auto aug = load_tree(c);
  const auto kernel = load_kernel<double>(c.kernel, aug);
  const auto batch = collect_batch(aug, kernel, c.samples, c.seed, c.workers, c.t_max);
  Artifacts files(c, out);
  files.emit("batch.txt", [&](std::ostream& os) { write_batch(os, batch); });
  return kOk;
}

template <class Scalar>
int cmd_estimate(const RunConfig& c, std::ostream& out) {
  const auto aug = load_tree(c);
  const auto known = load_kernel<Scalar>(c.kernel, aug);
  std::istringstream text(slurp(c.batch));
  const auto batch = read_batch(text, aug.vertex_count());
  auto report = estimate_kernel<Scalar>(aug, known, batch);
  finish_report(c, out, report, aug);
  return kOk;
}

template <class Scalar>
int cmd_roundtrip(const RunConfig& c, std::ostream& out) {
  const auto aug = load_tree(c);
  const auto truth = truth_kernel<Scalar>(c, aug);
  const int t_max = c.t_max >= 0 ? c.t_max : required_time(aug);
  const auto p_in = first_hitting_joint(aug, truth, Layer::Inner, t_max);
  const auto p_out = first_hitting_joint(aug, truth, Layer::Outer, t_max);
  auto report = recover_all(aug, known_part(truth), p_in, p_out);
  report.max_error = max_abs_error(report.kernel, truth);
  if (!c.out.empty()) {
    Artifacts files(c, out);
    files.emit("tree.txt", [&](std::ostream& os) { write_augmented(os, aug); });
    files.emit("kernel.txt", [&](std::ostream& os) { write_kernel(os, truth); });
    files.emit("p_in.tsv", [&](std::ostream& os) { write_distribution(os, p_in); });
    files.emit("p_out.tsv", [&](std::ostream& os) { write_distribution(os, p_out); });
    files.emit("report.txt", [&](std::ostream& os) { write_report(os, report); });
  }
  out << "max_error " << error_text(report, truth) << '\n'
      << "max_time_read " << report.max_time_read() << '\n'
      << "required_time " << required_time(aug) << '\n';
  return kOk;
}

int cmd_consistency(const RunConfig& c, std::ostream& out) {
  const auto aug = load_tree(c);
  const auto truth = truth_kernel<double>(c, aug);
  const auto rows = consistency_curve(aug, truth, c.n_grid, c.seeds, c.workers);
  Artifacts files(c, out);
  files.emit("consistency.tsv", [&](std::ostream& os) {
    os << "n\tseed\tmax_error\n";
    for (const auto& r : rows) os << r.n << '\t' << r.seed << '\t' << format_scalar(r.max_error) << '\n';
  });
  return kOk;
}

// Calls f with a value of the scalar type selected by --mode.
template <class F>
int by_mode(const RunConfig& c, F&& f) {
  if (parse_mode(c.mode) == ArithmeticMode::ExactRational) return f(Rational(0));
  return f(0.0);
}

void add_tree_options(CLI::App* cmd, RunConfig& c, bool arity_on_n) {
  cmd->add_option("--tree", c.tree, "star, segment, random, or a tree file");
  cmd->add_flag("--random-tree", c.random_tree, "same as --tree random");
  cmd->add_option("--l", c.l, "arm length (star) or right length (segment)");
  cmd->add_option("--k", c.k, "left length of a segment");
  cmd->add_option("--arms", c.arms, "number of star arms");
  if (arity_on_n) cmd->add_option("--n", c.arms, "number of star arms");
  cmd->add_option("--rout", c.rout, "outer radius of a random tree");
  cmd->add_option("--max-vertices", c.max_vertices, "size cap of a random tree");
  cmd->add_option("--seed", c.seed, "random seed")->envname("TREETOMO_SEED");
}

void add_mode_option(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--mode", c.mode, "float or rational")
      ->check(CLI::IsMember({"float", "rational"}));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Random walk tomography on rooted trees", "treetomo"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "random tree and kernel");
  add_tree_options(gen, c, true);
  add_mode_option(gen, c);
  gen->add_option("--floor", c.floor, "lower bound on random transition probabilities");
  gen->add_option("--unknown", c.unknown, "rows to recover: all or internal")
      ->check(CLI::IsMember({"all", "internal"}));
  gen->add_option("--out", c.out, "output directory")->required();

  auto* forward = app.add_subcommand("forward", "exact hitting distributions of both layers");
  add_tree_options(forward, c, true);
  add_mode_option(forward, c);
  forward->add_option("--kernel", c.kernel, "kernel file")->required();
  forward->add_option("--t-max", c.t_max, "last time step (default 3R+4)");
  forward->add_option("--out", c.out, "output directory")->required();

  auto* invert = app.add_subcommand("invert", "recover unknown rows from distributions");
  add_tree_options(invert, c, true);
  add_mode_option(invert, c);
  invert->add_option("--kernel", c.kernel, "known kernel file")->required();
  invert->add_option("--p-in", c.p_in, "inner-layer distribution")->required();
  invert->add_option("--p-out", c.p_out, "outer-layer distribution")->required();
  invert->add_option("--reference", c.reference, "true kernel for max_error");
  invert->add_flag("--project", c.project, "clamp out-of-range rows instead of failing");
  invert->add_option("--out", c.out, "output directory");

  auto* sample = app.add_subcommand("sample", "simulate probe walks");
  add_tree_options(sample, c, false);
  sample->add_option("--kernel", c.kernel, "kernel file")->required();
  sample->add_option("--n", c.samples, "number of walks")->required();
  sample->add_option("--t-max", c.t_max, "last recorded time (default max(3R+4, 64))");
  sample->add_option("--workers", c.workers, "threads");
  sample->add_option("--out", c.out, "output directory");

  auto* estimate = app.add_subcommand("estimate", "plug-in estimate from a sample batch");
  add_tree_options(estimate, c, true);
  add_mode_option(estimate, c);
  estimate->add_option("--kernel", c.kernel, "known kernel file")->required();
  estimate->add_option("--batch", c.batch, "batch file")->required();
  estimate->add_option("--reference", c.reference, "true kernel for max_error");
  estimate->add_option("--out", c.out, "output directory");

  auto* roundtrip = app.add_subcommand("roundtrip", "generate, solve forward, invert, compare");
  add_tree_options(roundtrip, c, true);
  add_mode_option(roundtrip, c);
  roundtrip->add_option("--kernel", c.kernel, "kernel file (default: random)");
  roundtrip->add_option("--floor", c.floor, "lower bound on random transition probabilities");
  roundtrip->add_option("--unknown", c.unknown, "rows to recover: all or internal")
      ->check(CLI::IsMember({"all", "internal"}));
  roundtrip->add_option("--t-max", c.t_max, "last time step (default 3R+4)");
  roundtrip->add_option("--out", c.out, "output directory");

  auto* consistency = app.add_subcommand("consistency", "estimation error against sample size");
  add_tree_options(consistency, c, true);
  consistency->add_option("--kernel", c.kernel, "kernel file (default: random)");
  consistency->add_option("--floor", c.floor, "lower bound on random transition probabilities");
  consistency->add_option("--n-grid", c.n_grid, "sample sizes")->delimiter(',');
  consistency->add_option("--seeds", c.seeds, "seeds")->delimiter(',');
  consistency->add_option("--workers", c.workers, "threads");
  consistency->add_option("--out", c.out, "output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error Usage " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*gen) return by_mode(c, [&](auto s) { return cmd_gen<decltype(s)>(c, out); });
    if (*forward) return by_mode(c, [&](auto s) { return cmd_forward<decltype(s)>(c, out); });
    if (*invert) return by_mode(c, [&](auto s) { return cmd_invert<decltype(s)>(c, out); });
    if (*sample) return cmd_sample(c, out);
    if (*estimate) return by_mode(c, [&](auto s) { return cmd_estimate<decltype(s)>(c, out); });
    if (*roundtrip) return by_mode(c, [&](auto s) { return cmd_roundtrip<decltype(s)>(c, out); });
    if (*consistency) return cmd_consistency(c, out);
  } catch (const Error& e) {
    err << "error " << to_string(e.code()) << ' ' << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "error Internal " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}

}  // namespace treetomo::cli
