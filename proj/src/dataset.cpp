#include "polyfilter/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string_view>

#include "json.hpp"

#include "polyfilter/errors.hpp"

namespace polyfilter {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::vector<SplitMasks> DatasetBundle::all_splits() const {
  if (const auto* s = std::get_if<SingleSplit>(&split)) return {s->masks};
  return std::get<Folds>(split).folds;
}

namespace {

[[noreturn]] void fail(const fs::path& file, std::size_t line, const std::string& what) {
  std::ostringstream os;
  os << file.string();
  if (line) os << ":" << line;
  os << ": " << what;
  throw DataError(os.str());
}

std::ifstream open_or_fail(const fs::path& file) {
  std::ifstream in(file);
  if (!in) fail(file, 0, "missing or unreadable file");
  return in;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view tok, const fs::path& file, std::size_t line) {
  tok = trim(tok);
  T v{};
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    fail(file, line, "cannot parse '" + std::string(tok) + "' as a number");
  }
  return v;
}

// Calls fn(line_number, fields) for every non-blank line.
template <typename Fn>
void for_each_csv_line(const fs::path& file, Fn&& fn) {
  std::ifstream in = open_or_fail(file);
  std::string line;
  std::vector<std::string_view> fields;
  for (std::size_t ln = 1; std::getline(in, line); ++ln) {
    const std::string_view sv = trim(line);
    if (sv.empty()) continue;
    fields.clear();
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = sv.find(',', start);
      fields.push_back(sv.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    fn(ln, fields);
  }
}

SplitMasks read_masks(const fs::path& file, std::size_t n) {
  SplitMasks m{std::vector<std::uint8_t>(n, 0), std::vector<std::uint8_t>(n, 0), std::vector<std::uint8_t>(n, 0)};
  std::size_t node = 0;
  for_each_csv_line(file, [&](std::size_t ln, const std::vector<std::string_view>& fields) {
    if (node >= n) fail(file, ln, "more than " + std::to_string(n) + " mask rows");
    // A node normally carries exactly one role; several comma-separated roles
    // parse so that validation can report the overlap.
    for (std::string_view f : fields) {
      f = trim(f);
      if (f == "train") m.train[node] = 1;
      else if (f == "val") m.val[node] = 1;
      else if (f == "test") m.test[node] = 1;
      else if (f != "none") fail(file, ln, "unknown mask value '" + std::string(f) + "'");
    }
    ++node;
  });
  if (node != n) fail(file, 0, "expected " + std::to_string(n) + " mask rows, found " + std::to_string(node));
  return m;
}

std::size_t meta_count(const json& meta, const char* key, const fs::path& file) {
  if (!meta.contains(key) || !meta[key].is_number_integer() || meta[key].get<long long>() < 0) {
    fail(file, 0, std::string("field '") + key + "' must be a non-negative integer");
  }
  return meta[key].get<std::size_t>();
}

void check_mask_overlap(const SplitMasks& m, const std::string& where, std::vector<std::string>& out) {
  const std::pair<const char*, std::pair<const std::vector<std::uint8_t>*, const std::vector<std::uint8_t>*>> pairs[] = {
      {"train/val", {&m.train, &m.val}}, {"train/test", {&m.train, &m.test}}, {"val/test", {&m.val, &m.test}}};
  for (const auto& [label, ab] : pairs) {
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < ab.first->size() && i < ab.second->size(); ++i)
      if ((*ab.first)[i] && (*ab.second)[i]) hits.push_back(i);
    if (hits.empty()) continue;
    std::ostringstream os;
    os << where << ": " << label << " masks overlap at node(s) ";
    for (std::size_t j = 0; j < hits.size() && j < 10; ++j) os << (j ? "," : "") << hits[j];
    if (hits.size() > 10) os << ",... (" << hits.size() << " total)";
    out.push_back(os.str());
  }
}

}  // namespace

void normalize_feature_rows(Matrix& features) {
  for (std::size_t r = 0; r < features.rows; ++r) {
    auto row = features.row(r);
    double s = 0.0;
    for (double v : row) s += std::abs(v);
    if (s == 0.0) continue;
    for (double& v : row) v /= s;
  }
}

std::vector<std::string> validate_bundle(const DatasetBundle& b) {
  std::vector<std::string> out;
  const std::size_t n = b.features.rows;
  if (b.features.data.size() != b.features.rows * b.features.cols) out.push_back("feature storage size mismatch");
  if (b.labels.size() != n) {
    out.push_back("labels: " + std::to_string(b.labels.size()) + " entries for " + std::to_string(n) + " nodes");
  }
  if (b.edges.n_nodes != n) {
    out.push_back("edges: graph declares " + std::to_string(b.edges.n_nodes) + " nodes, features have " +
                  std::to_string(n));
  }
  if (b.n_classes == 0) out.push_back("n_classes must be positive");
  for (std::size_t i = 0; i < b.labels.size(); ++i) {
    if (b.labels[i] < 0 || static_cast<std::size_t>(b.labels[i]) >= b.n_classes) {
      out.push_back("label " + std::to_string(b.labels[i]) + " at node " + std::to_string(i) + " outside [0, " +
                    std::to_string(b.n_classes) + ")");
    }
  }
  for (std::size_t r = 0; r < b.features.rows; ++r) {
    for (std::size_t c = 0; c < b.features.cols; ++c) {
      if (!std::isfinite(b.features(r, c))) {
        out.push_back("non-finite feature at node " + std::to_string(r) + ", column " + std::to_string(c));
        break;
      }
    }
  }
  for (std::size_t i = 0; i < b.edges.edges.size(); ++i) {
    const auto [s, d] = b.edges.edges[i];
    if (s >= b.edges.n_nodes || d >= b.edges.n_nodes) {
      out.push_back("edge " + std::to_string(i) + " (" + std::to_string(s) + "," + std::to_string(d) +
                    ") out of range");
    }
  }
  if (const auto* f = std::get_if<Folds>(&b.split); f && f->folds.size() != kNumFolds) {
    out.push_back("expected " + std::to_string(kNumFolds) + " folds, found " + std::to_string(f->folds.size()));
  }
  const auto splits = b.all_splits();
  for (std::size_t s = 0; s < splits.size(); ++s) {
    const std::string where = b.has_folds() ? "fold " + std::to_string(s) : std::string("split");
    const SplitMasks& m = splits[s];
    if (m.train.size() != n || m.val.size() != n || m.test.size() != n) {
      out.push_back(where + ": mask length does not match node count " + std::to_string(n));
      continue;
    }
    check_mask_overlap(m, where, out);
  }
  return out;
}

DatasetBundle load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(dir, 0, "dataset directory not found");
  const fs::path meta_path = dir / "meta.json";
  json meta;
  {
    std::ifstream in = open_or_fail(meta_path);
    try {
      in >> meta;
    } catch (const json::exception& e) {
      fail(meta_path, 0, std::string("invalid JSON: ") + e.what());
    }
  }
  DatasetBundle b;
  b.name = meta.value("name", dir.filename().string());
  const std::size_t n = meta_count(meta, "n_nodes", meta_path);
  const std::size_t f = meta_count(meta, "n_features", meta_path);
  b.n_classes = meta_count(meta, "n_classes", meta_path);
  const std::string split_kind = meta.value("split_kind", "");
  if (split_kind != "single" && split_kind != "folds10") {
    fail(meta_path, 0, "split_kind must be \"single\" or \"folds10\", got \"" + split_kind + "\"");
  }

  const fs::path feat_path = dir / "features.csv";
  b.features = Matrix(n, f);
  std::size_t row = 0;
  for_each_csv_line(feat_path, [&](std::size_t ln, const std::vector<std::string_view>& fields) {
    if (row >= n) fail(feat_path, ln, "more than " + std::to_string(n) + " feature rows");
    if (fields.size() != f) {
      fail(feat_path, ln, "expected " + std::to_string(f) + " values, found " + std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < f; ++c) {
      const double v = parse_number<double>(fields[c], feat_path, ln);
      if (!std::isfinite(v)) fail(feat_path, ln, "non-finite feature value in column " + std::to_string(c));
      b.features(row, c) = v;
    }
    ++row;
  });
  if (row != n) fail(feat_path, 0, "expected " + std::to_string(n) + " feature rows, found " + std::to_string(row));

  const fs::path label_path = dir / "labels.csv";
  b.labels.reserve(n);
  for_each_csv_line(label_path, [&](std::size_t ln, const std::vector<std::string_view>& fields) {
    if (fields.size() != 1) fail(label_path, ln, "expected a single class index");
    const long long v = parse_number<long long>(fields[0], label_path, ln);
    if (v < 0 || static_cast<std::size_t>(v) >= b.n_classes) {
      fail(label_path, ln, "label " + std::to_string(v) + " outside [0, " + std::to_string(b.n_classes) + ")");
    }
    if (b.labels.size() >= n) fail(label_path, ln, "more than " + std::to_string(n) + " labels");
    b.labels.push_back(static_cast<int>(v));
  });
  if (b.labels.size() != n) {
    fail(label_path, 0, "expected " + std::to_string(n) + " labels, found " + std::to_string(b.labels.size()));
  }

  const fs::path edge_path = dir / "edges.csv";
  b.edges.n_nodes = n;
  for_each_csv_line(edge_path, [&](std::size_t ln, const std::vector<std::string_view>& fields) {
    if (fields.size() != 2) fail(edge_path, ln, "expected 'src,dst'");
    const auto s = parse_number<long long>(fields[0], edge_path, ln);
    const auto d = parse_number<long long>(fields[1], edge_path, ln);
    if (s < 0 || d < 0 || static_cast<std::size_t>(s) >= n || static_cast<std::size_t>(d) >= n) {
      fail(edge_path, ln, "edge (" + std::to_string(s) + "," + std::to_string(d) + ") outside [0, " +
                              std::to_string(n) + ")");
    }
    b.edges.edges.emplace_back(static_cast<std::size_t>(s), static_cast<std::size_t>(d));
  });

  if (split_kind == "single") {
    b.split = SingleSplit{read_masks(dir / "masks.csv", n)};
  } else {
    Folds folds;
    for (std::size_t i = 0; i < kNumFolds; ++i) {
      const fs::path p = dir / "folds" / ("fold_" + std::to_string(i) + ".csv");
      if (!fs::exists(p)) fail(p, 0, "missing fold file (dataset declares 10 folds)");
      folds.folds.push_back(read_masks(p, n));
    }
    b.split = std::move(folds);
  }

  if (const auto violations = validate_bundle(b); !violations.empty()) {
    std::string msg = dir.string() + ": invalid dataset";
    for (const auto& v : violations) msg += "\n  " + v;
    throw DataError(msg);
  }
  normalize_feature_rows(b.features);
  return b;
}

namespace {

void write_masks(const SplitMasks& m, const fs::path& file) {
  std::ofstream out(file);
  for (std::size_t i = 0; i < m.train.size(); ++i) {
    std::string roles;
    auto add = [&](const char* r) { roles += roles.empty() ? r : std::string(",") + r; };
    if (m.train[i]) add("train");
    if (m.val[i]) add("val");
    if (m.test[i]) add("test");
    out << (roles.empty() ? "none" : roles) << '\n';
  }
}

}  // namespace

void write_dataset(const DatasetBundle& b, const fs::path& dir) {
  fs::create_directories(dir);
  const json meta = {{"name", b.name},
                     {"n_nodes", b.n_nodes()},
                     {"n_features", b.features.cols},
                     {"n_classes", b.n_classes},
                     {"split_kind", b.has_folds() ? "folds10" : "single"}};
  std::ofstream(dir / "meta.json") << meta.dump(2) << '\n';
  {
    std::ofstream out(dir / "features.csv");
    out << std::setprecision(17);
    for (std::size_t r = 0; r < b.features.rows; ++r) {
      for (std::size_t c = 0; c < b.features.cols; ++c) out << (c ? "," : "") << b.features(r, c);
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "labels.csv");
    for (int l : b.labels) out << l << '\n';
  }
  {
    std::ofstream out(dir / "edges.csv");
    for (const auto& [s, d] : b.edges.edges) out << s << ',' << d << '\n';
  }
  if (const auto* s = std::get_if<SingleSplit>(&b.split)) {
    write_masks(s->masks, dir / "masks.csv");
  } else {
    fs::create_directories(dir / "folds");
    const auto& folds = std::get<Folds>(b.split).folds;
    for (std::size_t i = 0; i < folds.size(); ++i)
      write_masks(folds[i], dir / "folds" / ("fold_" + std::to_string(i) + ".csv"));
  }
}

}  // namespace polyfilter
