#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ser/detail/text.hpp"
#include "ser/error.hpp"
#include "ser/models/knn.hpp"
#include "ser/models/nn.hpp"
#include "ser/models/standardizer.hpp"
#include "ser/models/svm.hpp"
#include "ser/models/tree.hpp"

// Plain-text model files. The first line is `#model=<kind> #version=1`; the
// body is a sequence of `key v1 v2 ...` lines (space separated) except for
// tree nodes, which use `node,feature,threshold` and
// `leaf,p_angry,p_happy,p_neutral,p_sad` in pre-order.

namespace ser {

namespace detail {

class ModelWriter {
 public:
  explicit ModelWriter(std::string_view kind) { out_ = "#model=" + std::string(kind) + " #version=1\n"; }

  ModelWriter& line(std::string_view key, std::span<const double> values) {
    out_ += key;
    for (double v : values) {
      out_ += ' ';
      out_ += format_double(v);
    }
    out_ += '\n';
    return *this;
  }
  ModelWriter& scalar(std::string_view key, double v) { return line(key, std::span<const double>(&v, 1)); }
  ModelWriter& count(std::string_view key, std::size_t v) {
    out_ += std::string(key) + " " + std::to_string(v) + "\n";
    return *this;
  }
  ModelWriter& raw(std::string_view text) {
    out_ += text;
    out_ += '\n';
    return *this;
  }

  const std::string& str() const { return out_; }

 private:
  std::string out_;
};

class ModelReader {
 public:
  ModelReader(std::string_view text, std::string_view kind) : lines_(lines(text)) {
    const std::string expected = "#model=" + std::string(kind) + " #version=1";
    if (lines_.empty() || trim(lines_[0]) != expected)
      throw Error(ErrorCode::MalformedFile, "expected header '" + expected + "'");
    pos_ = 1;
  }

  std::string_view next_raw() {
    while (pos_ < lines_.size() && trim(lines_[pos_]).empty()) ++pos_;
    if (pos_ >= lines_.size()) throw Error(ErrorCode::MalformedFile, "unexpected end of model file");
    return trim(lines_[pos_++]);
  }

  std::vector<double> values(std::string_view key, std::size_t expected_count) {
    const auto line = next_raw();
    const auto tokens = split(line, ' ');
    if (tokens.empty() || tokens[0] != key)
      throw Error(ErrorCode::MalformedFile, "expected '" + std::string(key) + "' at line " + std::to_string(pos_));
    if (tokens.size() - 1 != expected_count)
      throw Error(ErrorCode::MalformedFile, "'" + std::string(key) + "' expects " + std::to_string(expected_count) +
                                                " values at line " + std::to_string(pos_));
    std::vector<double> out;
    out.reserve(expected_count);
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      const auto v = parse_double(tokens[i]);
      if (!v) throw Error(ErrorCode::MalformedFile, "bad number at line " + std::to_string(pos_));
      out.push_back(*v);
    }
    return out;
  }

  double scalar(std::string_view key) { return values(key, 1)[0]; }

  std::uint64_t count(std::string_view key) {
    const auto line = next_raw();
    const auto tokens = split(line, ' ');
    std::uint64_t v = 0;
    if (tokens.size() != 2 || tokens[0] != key)
      throw Error(ErrorCode::MalformedFile, "expected '" + std::string(key) + "' at line " + std::to_string(pos_));
    const auto res = std::from_chars(tokens[1].data(), tokens[1].data() + tokens[1].size(), v);
    if (res.ec != std::errc() || res.ptr != tokens[1].data() + tokens[1].size())
      throw Error(ErrorCode::MalformedFile, "'" + std::string(key) + "' must be a count");
    return v;
  }

  std::size_t line_number() const { return pos_; }

 private:
  std::vector<std::string_view> lines_;
  std::size_t pos_ = 0;
};

inline EmotionClass class_from_count(std::size_t v) {
  if (v >= kNumClasses) throw Error(ErrorCode::MalformedFile, "class index out of range");
  return class_from_index(v);
}

}  // namespace detail

inline std::string format_standardizer(const Standardizer& s) {
  detail::ModelWriter w("standardizer");
  w.count("dims", s.dims()).line("mean", s.means).line("stddev", s.stddevs);
  return w.str();
}

inline Standardizer parse_standardizer(std::string_view text) {
  detail::ModelReader r(text, "standardizer");
  Standardizer s;
  const auto dims = r.count("dims");
  s.means = r.values("mean", dims);
  s.stddevs = r.values("stddev", dims);
  return s;
}

inline std::string format_knn(const KnnModel& m) {
  detail::ModelWriter w("knn");
  w.count("k", m.k).scalar("epsilon", m.epsilon).count("dims", m.dims()).count("rows", m.train.size());
  for (std::size_t i = 0; i < m.train.size(); ++i) w.line("row " + std::to_string(class_index(m.train.y[i])), m.train.x[i]);
  return w.str();
}

inline KnnModel parse_knn(std::string_view text) {
  detail::ModelReader r(text, "knn");
  KnnModel m;
  m.k = r.count("k");
  m.epsilon = r.scalar("epsilon");
  const auto dims = r.count("dims");
  const auto rows = r.count("rows");
  for (std::size_t i = 0; i < rows; ++i) {
    auto v = r.values("row", dims + 1);
    m.train.y.push_back(detail::class_from_count(static_cast<std::size_t>(v[0])));
    m.train.x.emplace_back(v.begin() + 1, v.end());
  }
  if (m.k < 1 || m.k > rows) throw Error(ErrorCode::MalformedFile, "k outside 1..rows");
  return m;
}

inline std::string format_tree(const TreeModel& m) {
  detail::ModelWriter w("tree");
  w.count("pruned", m.pruned ? 1 : 0).count("dims", m.num_features).count("nodes", m.nodes.size());
  for (const auto& n : m.nodes) {
    std::string line;
    if (n.is_leaf()) {
      line = "leaf";
    } else {
      line = "node," + std::to_string(n.feature) + "," + detail::format_double(n.threshold);
    }
    for (double p : n.distribution) line += "," + detail::format_double(p);
    w.raw(line);
  }
  return w.str();
}

inline TreeModel parse_tree(std::string_view text) {
  detail::ModelReader r(text, "tree");
  TreeModel m;
  m.pruned = r.count("pruned") != 0;
  m.num_features = r.count("dims");
  const auto count = r.count("nodes");
  if (count == 0) throw Error(ErrorCode::MalformedFile, "tree without nodes");
  std::vector<TreeNode> flat;
  for (std::size_t i = 0; i < count; ++i) {
    const auto cells = detail::split(r.next_raw(), ',');
    TreeNode n;
    const std::size_t head = cells[0] == "node" ? 3 : 1;
    if (cells.size() != head + kNumClasses)
      throw Error(ErrorCode::MalformedFile, "bad tree line " + std::to_string(r.line_number()));
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      const auto p = detail::parse_double(cells[head + c]);
      if (!p) throw Error(ErrorCode::MalformedFile, "bad class distribution");
      n.distribution[c] = *p;
    }
    if (cells[0] == "node") {
      const auto f = detail::parse_int(cells[1]);
      const auto t = detail::parse_double(cells[2]);
      if (!f || *f < 0 || static_cast<std::size_t>(*f) >= m.num_features || !t)
        throw Error(ErrorCode::MalformedFile, "bad tree node");
      n.feature = static_cast<int>(*f);
      n.threshold = *t;
    } else if (cells[0] != "leaf") {
      throw Error(ErrorCode::MalformedFile, "bad tree line " + std::to_string(r.line_number()));
    }
    flat.push_back(n);
  }
  // Rebuild child links from the pre-order sequence.
  std::size_t pos = 0;
  auto link = [&](auto&& self) -> int {
    if (pos >= flat.size()) throw Error(ErrorCode::MalformedFile, "truncated tree");
    const int id = static_cast<int>(pos++);
    if (!flat[static_cast<std::size_t>(id)].is_leaf()) {
      const int l = self(self);
      flat[static_cast<std::size_t>(id)].left = l;
      const int rt = self(self);
      flat[static_cast<std::size_t>(id)].right = rt;
    }
    return id;
  };
  link(link);
  if (pos != flat.size()) throw Error(ErrorCode::MalformedFile, "unreachable tree nodes");
  m.nodes = std::move(flat);
  return m;
}

inline std::string format_nn(const NnModel& m) {
  detail::ModelWriter w("nn");
  w.count("inputs", m.inputs).count("hidden", m.hidden).count("outputs", m.outputs).count("seed", m.seed);
  w.line("w1", m.w1).line("b1", m.b1).line("w2", m.w2).line("b2", m.b2);
  return w.str();
}

inline NnModel parse_nn(std::string_view text) {
  detail::ModelReader r(text, "nn");
  NnModel m;
  m.inputs = r.count("inputs");
  m.hidden = r.count("hidden");
  m.outputs = r.count("outputs");
  if (m.outputs != kNumClasses) throw Error(ErrorCode::MalformedFile, "network must have four outputs");
  m.seed = r.count("seed");
  m.w1 = r.values("w1", m.hidden * m.inputs);
  m.b1 = r.values("b1", m.hidden);
  m.w2 = r.values("w2", m.outputs * m.hidden);
  m.b2 = r.values("b2", m.outputs);
  return m;
}

inline std::string format_svm(const SvmModel& m) {
  detail::ModelWriter w("svm");
  w.scalar("C", m.c).count("dims", m.num_features).count("pairs", m.pairs.size());
  for (const auto& p : m.pairs) {
    w.count("positive", class_index(p.positive)).count("negative", class_index(p.negative));
    w.count("converged", p.converged ? 1 : 0).count("updates", p.updates);
    w.scalar("bias", p.b).line("w", p.w).count("support", p.alphas.size());
    for (std::size_t i = 0; i < p.alphas.size(); ++i) {
      std::vector<double> v{p.alphas[i], static_cast<double>(p.labels[i])};
      v.insert(v.end(), p.support[i].begin(), p.support[i].end());
      w.line("sv", v);
    }
  }
  return w.str();
}

inline SvmModel parse_svm(std::string_view text) {
  detail::ModelReader r(text, "svm");
  SvmModel m;
  m.c = r.scalar("C");
  m.num_features = r.count("dims");
  const auto pairs = r.count("pairs");
  for (std::size_t k = 0; k < pairs; ++k) {
    BinarySvm p;
    p.positive = detail::class_from_count(r.count("positive"));
    p.negative = detail::class_from_count(r.count("negative"));
    p.converged = r.count("converged") != 0;
    p.updates = r.count("updates");
    p.b = r.scalar("bias");
    p.w = r.values("w", m.num_features);
    const auto sv = r.count("support");
    for (std::size_t i = 0; i < sv; ++i) {
      const auto v = r.values("sv", m.num_features + 2);
      p.alphas.push_back(v[0]);
      p.labels.push_back(v[1] > 0 ? 1 : -1);
      p.support.emplace_back(v.begin() + 2, v.end());
    }
    m.pairs.push_back(std::move(p));
  }
  return m;
}

}  // namespace ser
