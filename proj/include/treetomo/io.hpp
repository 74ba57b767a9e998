#pragma once

// Line-oriented text formats for trees, kernels, hitting distributions,
// recovery reports and sample batches. Blank lines and lines starting with
// '#' are ignored by every reader.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "treetomo/error.hpp"
#include "treetomo/estimation.hpp"
#include "treetomo/hitting.hpp"
#include "treetomo/kernel.hpp"
#include "treetomo/scalar.hpp"
#include "treetomo/tomography.hpp"
#include "treetomo/tree.hpp"

namespace treetomo {

namespace detail {

struct Line {
  int number = 0;
  std::vector<std::string> tokens;

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorCode::FormatError, "line " + std::to_string(number) + ": " + what);
  }
  void expect_size(std::size_t at_least) const {
    if (tokens.size() < at_least) error("too few fields in '" + tokens.front() + "' record");
  }
};

inline std::vector<Line> tokenize(std::istream& in, char separator = ' ') {
  std::vector<Line> lines;
  std::string text;
  int number = 0;
  while (std::getline(in, text)) {
    ++number;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    Line line{number, {}};
    std::string token;
    for (char c : text) {
      const bool split = separator == '\t' ? (c == '\t') : (c == ' ' || c == '\t');
      if (split) {
        if (!token.empty() || separator == '\t') line.tokens.push_back(token);
        token.clear();
      } else {
        token.push_back(c);
      }
    }
    if (!token.empty()) line.tokens.push_back(token);
    if (line.tokens.empty() || line.tokens.front().starts_with('#')) continue;
    lines.push_back(std::move(line));
  }
  return lines;
}

inline std::uint64_t parse_uint(const Line& line, const std::string& text) {
  std::uint64_t value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size())
    line.error("expected a nonnegative integer, got '" + text + "'");
  return value;
}

inline VertexId parse_vertex(const Line& line, const std::string& text, std::size_t n) {
  auto v = static_cast<VertexId>(parse_uint(line, text));
  if (v >= n) line.error("vertex " + text + " out of range");
  return v;
}

}  // namespace detail

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path);
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  return out;
}

// ---- trees ---------------------------------------------------------------

inline void write_tree(std::ostream& out, const RootedTree& tree) {
  out << "tree " << tree.vertex_count() << ' ' << tree.root() << '\n';
  for (auto [p, c] : tree.edges()) out << "edge " << p << ' ' << c << '\n';
  if (!tree.labels().empty())
    for (VertexId v = 0; v < tree.vertex_count(); ++v)
      if (tree.label(v) != std::to_string(v)) out << "label " << v << ' ' << tree.label(v) << '\n';
}

inline void write_augmented(std::ostream& out, const AugmentedTree& aug) {
  write_tree(out, aug.full);
  for (VertexId v = 0; v < aug.vertex_count(); ++v)
    out << "origin " << v << (aug.is_original(v) ? " original" : " added") << '\n';
  for (const auto& [name, layer] : {std::pair{"inner", &aug.inner_layer},
                                    std::pair{"outer", &aug.outer_layer}}) {
    out << "layer " << name;
    for (VertexId v : *layer) out << ' ' << v;
    out << '\n';
  }
}

namespace detail {

struct ParsedTree {
  RootedTree tree;
  std::vector<std::optional<Origin>> origin;
  std::map<std::string, std::vector<VertexId>> layers;
};

inline ParsedTree parse_tree(std::istream& in) {
  auto lines = tokenize(in);
  if (lines.empty() || lines.front().tokens.front() != "tree")
    fail(ErrorCode::FormatError, "tree file must start with 'tree <n> <root>'");
  const Line& head = lines.front();
  head.expect_size(3);
  const auto n = static_cast<std::size_t>(parse_uint(head, head.tokens[1]));
  if (n == 0) head.error("tree needs at least one vertex");
  const VertexId root = parse_vertex(head, head.tokens[2], n);
  std::vector<Edge> edges;
  std::vector<std::string> labels;
  ParsedTree parsed;
  parsed.origin.assign(n, std::nullopt);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const Line& line = lines[i];
    const std::string& kind = line.tokens.front();
    if (kind == "edge") {
      line.expect_size(3);
      edges.emplace_back(parse_vertex(line, line.tokens[1], n),
                         parse_vertex(line, line.tokens[2], n));
    } else if (kind == "label") {
      line.expect_size(3);
      if (labels.empty()) {
        labels.resize(n);
        for (VertexId v = 0; v < n; ++v) labels[v] = std::to_string(v);
      }
      labels[parse_vertex(line, line.tokens[1], n)] = line.tokens[2];
    } else if (kind == "origin") {
      line.expect_size(3);
      const VertexId v = parse_vertex(line, line.tokens[1], n);
      if (line.tokens[2] == "original") {
        parsed.origin[v] = Origin::Original;
      } else if (line.tokens[2] == "added") {
        parsed.origin[v] = Origin::Added;
      } else {
        line.error("origin must be 'original' or 'added'");
      }
    } else if (kind == "layer") {
      line.expect_size(2);
      auto& layer = parsed.layers[line.tokens[1]];
      for (std::size_t j = 2; j < line.tokens.size(); ++j)
        layer.push_back(parse_vertex(line, line.tokens[j], n));
    } else {
      line.error("unknown record '" + kind + "'");
    }
  }
  try {
    parsed.tree = build_tree(n, edges, root);
  } catch (const Error& e) {
    fail(ErrorCode::FormatError, std::string("tree file does not describe a tree: ") + e.what());
  }
  parsed.tree.set_labels(std::move(labels));
  return parsed;
}

}  // namespace detail

inline RootedTree read_tree(std::istream& in) { return detail::parse_tree(in).tree; }

/// Reads an augmented tree and checks it against the augmentation rebuilt
/// from its original vertices.
inline AugmentedTree read_augmented(std::istream& in) {
  auto parsed = detail::parse_tree(in);
  const std::size_t n = parsed.tree.vertex_count();
  std::size_t originals = 0;
  for (VertexId v = 0; v < n; ++v) {
    if (!parsed.origin[v]) fail(ErrorCode::FormatError, "no origin for vertex " + std::to_string(v));
    if (*parsed.origin[v] == Origin::Original) {
      if (v != originals)
        fail(ErrorCode::FormatError, "original vertices must carry the lowest ids");
      ++originals;
    }
  }
  std::vector<VertexId> base_parents(parsed.tree.parents().begin(),
                                     parsed.tree.parents().begin() + static_cast<long>(originals));
  for (VertexId v = 0; v < originals; ++v)
    if (v != parsed.tree.root() && base_parents[v] >= originals)
      fail(ErrorCode::FormatError, "original vertex " + std::to_string(v) + " hangs from an added one");
  RootedTree base = RootedTree::from_parents(std::move(base_parents), parsed.tree.root());
  const int l = parsed.tree.max_norm() - base.max_norm();
  AugmentedTree aug;
  try {
    aug = spherical_augmentation(base, l);
  } catch (const Error& e) {
    fail(ErrorCode::FormatError, std::string("not a spherical augmentation: ") + e.what());
  }
  if (!(aug.full == parsed.tree))
    fail(ErrorCode::FormatError, "tree is not the spherical augmentation of its original part");
  if (parsed.layers["inner"] != aug.inner_layer || parsed.layers["outer"] != aug.outer_layer)
    fail(ErrorCode::FormatError, "layer records disagree with the tree");
  if (!parsed.tree.labels().empty()) {
    auto labels = parsed.tree.labels();
    aug.full.set_labels(labels);
    labels.resize(originals);
    aug.base.set_labels(std::move(labels));
  }
  return aug;
}

// ---- kernels -------------------------------------------------------------

template <class Scalar>
void write_kernel(std::ostream& out, const TransitionKernel<Scalar>& kernel) {
  out << "mode " << to_string(kernel.mode()) << '\n';
  for (VertexId u = 0; u < kernel.vertex_count(); ++u) {
    if (!kernel.has_row(u)) continue;
    out << "row " << u;
    for (const auto& [v, p] : kernel.row(u)) out << ' ' << v << ':' << format_scalar(p);
    out << '\n';
  }
  for (VertexId u = 0; u < kernel.vertex_count(); ++u)
    if (kernel.provenance(u) != Provenance::Known)
      out << "provenance " << u << ' ' << to_string(kernel.provenance(u)) << '\n';
}

namespace detail {

template <class Scalar>
typename TransitionKernel<Scalar>::Row parse_row(const Line& line, std::size_t n) {
  typename TransitionKernel<Scalar>::Row row;
  for (std::size_t j = 2; j < line.tokens.size(); ++j) {
    const std::string& entry = line.tokens[j];
    const auto colon = entry.find(':');
    if (colon == std::string::npos) line.error("row entry '" + entry + "' lacks ':'");
    const VertexId v = parse_vertex(line, entry.substr(0, colon), n);
    try {
      row.emplace_back(v, parse_scalar<Scalar>(entry.substr(colon + 1)));
    } catch (const Error& e) {
      line.error(e.what());
    }
  }
  return row;
}

inline Provenance parse_provenance(const Line& line, const std::string& text) {
  if (text == "known") return Provenance::Known;
  if (text == "unknown") return Provenance::Unknown;
  if (text == "recovered") return Provenance::Recovered;
  line.error("unknown provenance '" + text + "'");
}

// Kernel records from `lines`; records it does not own are handed to `other`.
template <class Scalar, class Other>
TransitionKernel<Scalar> parse_kernel(const std::vector<Line>& lines, std::size_t n,
                                      Other&& other) {
  TransitionKernel<Scalar> kernel(n);
  std::vector<std::optional<Provenance>> flags(n);
  for (const Line& line : lines) {
    const std::string& kind = line.tokens.front();
    if (kind == "mode") {
      line.expect_size(2);
      try {
        parse_mode(line.tokens[1]);
      } catch (const Error& e) {
        line.error(e.what());
      }
    } else if (kind == "row") {
      line.expect_size(2);
      const VertexId u = parse_vertex(line, line.tokens[1], n);
      if (kernel.has_row(u)) line.error("duplicate row for vertex " + line.tokens[1]);
      kernel.set_row(u, parse_row<Scalar>(line, n), Provenance::Known);
    } else if (kind == "provenance") {
      line.expect_size(3);
      flags[parse_vertex(line, line.tokens[1], n)] = parse_provenance(line, line.tokens[2]);
    } else {
      other(line);
    }
  }
  for (VertexId u = 0; u < n; ++u) {
    if (flags[u]) {
      kernel.set_provenance(u, *flags[u]);
    } else if (!kernel.has_row(u)) {
      kernel.set_provenance(u, Provenance::Unknown);
    }
  }
  return kernel;
}

}  // namespace detail

/// `vertex_count` is the size of the tree the kernel lives on.
template <class Scalar>
TransitionKernel<Scalar> read_kernel(std::istream& in, std::size_t vertex_count) {
  return detail::parse_kernel<Scalar>(detail::tokenize(in), vertex_count,
                                      [](const detail::Line& line) {
                                        line.error("unknown record '" + line.tokens.front() + "'");
                                      });
}

// ---- distributions -------------------------------------------------------

template <class Scalar>
void write_distribution(std::ostream& out, const HittingDistribution<Scalar>& dist) {
  out << "layer\tt\tvertex\tprob\n";
  for (int t = 0; t <= dist.t_max(); ++t)
    for (VertexId v : dist.vertices())
      out << to_string(dist.layer()) << '\t' << t << '\t' << v << '\t'
          << format_scalar(dist.mass(t, v)) << '\n';
}

/// The time range is the largest t present; absent cells are zero.
template <class Scalar>
HittingDistribution<Scalar> read_distribution(std::istream& in, const AugmentedTree& aug,
                                              Layer layer) {
  auto lines = detail::tokenize(in, '\t');
  struct Cell {
    int t;
    VertexId v;
    Scalar p;
  };
  std::vector<Cell> cells;
  int t_max = -1;
  for (const auto& line : lines) {
    if (line.tokens.front() == "layer") continue;  // header
    if (line.tokens.size() != 4) line.error("expected 4 tab-separated fields");
    if (line.tokens[0] != to_string(layer))
      line.error("record for layer '" + line.tokens[0] + "' in a " +
                 std::string(to_string(layer)) + " distribution");
    const auto t = static_cast<int>(detail::parse_uint(line, line.tokens[1]));
    const VertexId v = detail::parse_vertex(line, line.tokens[2], aug.vertex_count());
    if (aug.full.norm(v) != (layer == Layer::Inner ? aug.inner_norm() : aug.outer_norm()))
      line.error("vertex " + line.tokens[2] + " is not on the layer");
    Scalar p;
    try {
      p = parse_scalar<Scalar>(line.tokens[3]);
    } catch (const Error& e) {
      line.error(e.what());
    }
    if (p < 0) line.error("negative probability");
    cells.push_back({t, v, std::move(p)});
    t_max = std::max(t_max, t);
  }
  if (t_max < 0) fail(ErrorCode::FormatError, "empty distribution");
  HittingDistribution<Scalar> dist(layer, aug.root(), t_max, layer_vertices(aug, layer));
  for (auto& c : cells) dist.mass(c.t, c.v) = std::move(c.p);
  return dist;
}

// ---- recovery reports ----------------------------------------------------

template <class Scalar>
void write_report(std::ostream& out, const RecoveryReport<Scalar>& report) {
  write_kernel(out, report.kernel);
  for (VertexId u = 0; u < report.raw.vertex_count(); ++u) {
    if (!report.raw.has_row(u) || report.raw.row(u) == report.kernel.row(u)) continue;
    out << "raw " << u;
    for (const auto& [v, p] : report.raw.row(u)) out << ' ' << v << ':' << format_scalar(p);
    out << '\n';
  }
  for (const auto& [u, r] : report.residuals)
    out << "residual " << u << ' ' << format_scalar(r) << '\n';
  for (const auto& flag : report.flags) out << "flag " << flag.code << ' ' << flag.vertex << '\n';
  out << "max_time_read " << report.max_time_read() << '\n';
  for (const auto& [k, t] : report.shell_max_time) out << "shell_time_read " << k << ' ' << t << '\n';
  if (report.max_error) out << "max_error " << format_scalar(*report.max_error) << '\n';
}

template <class Scalar>
RecoveryReport<Scalar> read_report(std::istream& in, std::size_t vertex_count) {
  RecoveryReport<Scalar> report;
  std::map<VertexId, typename TransitionKernel<Scalar>::Row> raw_rows;
  int max_time = -1;
  report.kernel = detail::parse_kernel<Scalar>(
      detail::tokenize(in), vertex_count, [&](const detail::Line& line) {
        const std::string& kind = line.tokens.front();
        if (kind == "raw") {
          line.expect_size(2);
          raw_rows[detail::parse_vertex(line, line.tokens[1], vertex_count)] =
              detail::parse_row<Scalar>(line, vertex_count);
        } else if (kind == "residual") {
          line.expect_size(3);
          report.residuals[detail::parse_vertex(line, line.tokens[1], vertex_count)] =
              parse_scalar<double>(line.tokens[2]);
        } else if (kind == "flag") {
          line.expect_size(3);
          report.flags.push_back(
              {line.tokens[1], detail::parse_vertex(line, line.tokens[2], vertex_count), ""});
        } else if (kind == "max_time_read") {
          line.expect_size(2);
          max_time = static_cast<int>(parse_scalar<double>(line.tokens[1]));
        } else if (kind == "shell_time_read") {
          line.expect_size(3);
          report.shell_max_time[static_cast<int>(detail::parse_uint(line, line.tokens[1]))] =
              static_cast<int>(parse_scalar<double>(line.tokens[2]));
        } else if (kind == "max_error") {
          line.expect_size(2);
          report.max_error = parse_scalar<double>(line.tokens[1]);
        } else {
          line.error("unknown record '" + kind + "'");
        }
      });
  report.raw = report.kernel;
  for (auto& [u, row] : raw_rows) report.raw.set_row(u, std::move(row), Provenance::Recovered);
  report.times_accessed.inner = report.times_accessed.outer = max_time;
  return report;
}

// ---- sample batches ------------------------------------------------------

inline void write_batch(std::ostream& out, const SampleBatch& batch) {
  out << "batch " << batch.n << ' ' << batch.seed << ' ' << batch.t_cap << '\n';
  for (const auto& [key, count] : batch.counts_in)
    out << "in " << key.first << ' ' << key.second << ' ' << count << '\n';
  for (const auto& [key, count] : batch.counts_out)
    out << "out " << key.first << ' ' << key.second << ' ' << count << '\n';
  out << "overflow " << batch.overflow << '\n';
}

inline SampleBatch read_batch(std::istream& in, std::size_t vertex_count) {
  auto lines = detail::tokenize(in);
  if (lines.empty() || lines.front().tokens.front() != "batch")
    fail(ErrorCode::FormatError, "batch file must start with 'batch <n> <seed> <t_cap>'");
  SampleBatch batch;
  const auto& head = lines.front();
  head.expect_size(4);
  batch.n = detail::parse_uint(head, head.tokens[1]);
  batch.seed = detail::parse_uint(head, head.tokens[2]);
  batch.t_cap = static_cast<int>(detail::parse_uint(head, head.tokens[3]));
  std::uint64_t out_total = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& line = lines[i];
    const std::string& kind = line.tokens.front();
    if (kind == "in" || kind == "out") {
      line.expect_size(4);
      const auto t = static_cast<int>(detail::parse_uint(line, line.tokens[1]));
      if (t > batch.t_cap) line.error("time beyond t_cap");
      const VertexId v = detail::parse_vertex(line, line.tokens[2], vertex_count);
      const std::uint64_t count = detail::parse_uint(line, line.tokens[3]);
      (kind == "in" ? batch.counts_in : batch.counts_out)[{t, v}] += count;
      if (kind == "out") out_total += count;
    } else if (kind == "overflow") {
      line.expect_size(2);
      batch.overflow = detail::parse_uint(line, line.tokens[1]);
    } else {
      line.error("unknown record '" + kind + "'");
    }
  }
  if (out_total + batch.overflow != batch.n)
    fail(ErrorCode::FormatError, "outer counts plus overflow do not add up to n");
  return batch;
}

}  // namespace treetomo
