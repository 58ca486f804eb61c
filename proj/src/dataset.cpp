#include "mlltr/dataset.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "mlltr/util.hpp"

namespace mlltr {

std::size_t MultiLabelDataset::num_items() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.size();
  return n;
}

MultiLabelDataset MultiLabelDataset::select_labels(
    const std::vector<std::size_t>& label_indices) const {
  for (std::size_t k : label_indices) {
    if (k >= label_count) throw std::invalid_argument("select_labels: index out of range");
  }
  MultiLabelDataset out;
  out.feature_dim = feature_dim;
  out.label_count = label_indices.size();
  for (std::size_t k : label_indices) out.label_names.push_back(label_names[k]);
  out.groups.reserve(groups.size());
  for (const auto& g : groups) {
    QueryGroup ng;
    ng.query_id = g.query_id;
    ng.items.reserve(g.items.size());
    for (const auto& it : g.items) {
      Item ni;
      ni.features = it.features;
      ni.labels.reserve(label_indices.size());
      for (std::size_t k : label_indices) ni.labels.push_back(it.labels[k]);
      ng.items.push_back(std::move(ni));
    }
    out.groups.push_back(std::move(ng));
  }
  return out;
}

void MultiLabelDataset::validate() const {
  if (groups.empty()) throw std::invalid_argument("dataset has no query groups");
  if (label_names.size() != label_count)
    throw std::invalid_argument("label_names size does not match label_count");
  for (const auto& g : groups) {
    if (g.items.empty()) throw std::invalid_argument("query group is empty");
    for (const auto& it : g.items) {
      if (it.features.size() != feature_dim)
        throw std::invalid_argument("feature dimension mismatch in group " + g.query_id);
      if (it.labels.size() != label_count)
        throw std::invalid_argument("label count mismatch in group " + g.query_id);
    }
  }
}

namespace {

struct ParsedLine {
  double label = 0.0;
  std::string qid;
  std::vector<std::pair<std::size_t, double>> features;  // 1-based index, value
};

bool parse_line(const std::string& line, ParsedLine* out, std::string* error) {
  std::string body = line;
  if (auto hash = body.find('#'); hash != std::string::npos) body.resize(hash);
  std::istringstream ss(body);
  std::string tok;
  if (!(ss >> tok)) return false;  // blank line, skipped by caller
  try {
    std::size_t pos = 0;
    out->label = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
  } catch (const std::exception&) {
    *error = "bad label '" + tok + "'";
    return false;
  }
  if (!(ss >> tok) || tok.rfind("qid:", 0) != 0 || tok.size() <= 4) {
    *error = "expected qid:<id>";
    return false;
  }
  out->qid = tok.substr(4);
  std::size_t prev_index = 0;
  while (ss >> tok) {
    auto colon = tok.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= tok.size()) {
      *error = "bad feature token '" + tok + "'";
      return false;
    }
    std::size_t index = 0;
    double value = 0.0;
    try {
      std::size_t pos = 0;
      index = std::stoull(tok.substr(0, colon), &pos);
      if (pos != colon) throw std::invalid_argument(tok);
      value = std::stod(tok.substr(colon + 1), &pos);
      if (pos != tok.size() - colon - 1) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      *error = "bad feature token '" + tok + "'";
      return false;
    }
    if (index == 0) {
      *error = "feature indices are 1-based, got 0";
      return false;
    }
    if (index <= prev_index) {
      *error = "feature indices must be strictly increasing";
      return false;
    }
    prev_index = index;
    out->features.emplace_back(index, value);
  }
  return true;
}

}  // namespace

MultiLabelDataset parse_letor(std::istream& input) {
  std::vector<ParsedLine> lines;
  std::string line;
  std::size_t line_no = 0;
  std::size_t max_index = 0;
  while (std::getline(input, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!line.empty() && line[line.find_first_not_of(" \t")] == '#') continue;
    ParsedLine parsed;
    std::string error;
    if (!parse_line(line, &parsed, &error)) {
      throw std::runtime_error("parse error at line " + std::to_string(line_no) + ": " + error);
    }
    if (!parsed.features.empty()) max_index = std::max(max_index, parsed.features.back().first);
    lines.push_back(std::move(parsed));
  }
  if (lines.empty()) throw std::runtime_error("empty input: no data lines found");

  MultiLabelDataset ds;
  ds.feature_dim = max_index;
  ds.label_count = 1;
  ds.label_names = {"label"};
  // Items are grouped by qid preserving file order within each group; a qid
  // seen again after other qids starts a new group only if LETOR files are
  // unsorted, so we key groups by first occurrence.
  std::vector<std::string> order;
  std::unordered_map<std::string, std::size_t> group_of;
  for (auto& pl : lines) {
    auto it = group_of.find(pl.qid);
    std::size_t gi;
    if (it == group_of.end()) {
      gi = ds.groups.size();
      group_of.emplace(pl.qid, gi);
      QueryGroup g;
      g.query_id = pl.qid;
      ds.groups.push_back(std::move(g));
    } else {
      gi = it->second;
    }
    Item item;
    item.features.assign(max_index, 0.0);
    for (const auto& [idx, val] : pl.features) item.features[idx - 1] = val;
    item.labels = {pl.label};
    ds.groups[gi].items.push_back(std::move(item));
  }
  return ds;
}

MultiLabelDataset parse_letor_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_letor(in);
}

void write_letor(const MultiLabelDataset& dataset, std::ostream& out) {
  if (dataset.label_count != 1)
    throw std::invalid_argument("write_letor expects a single-label dataset");
  for (const auto& g : dataset.groups) {
    for (const auto& it : g.items) {
      out << format_double(it.labels[0]) << " qid:" << g.query_id;
      for (std::size_t f = 0; f < it.features.size(); ++f) {
        out << ' ' << (f + 1) << ':' << format_double(it.features[f]);
      }
      out << '\n';
    }
  }
}

MultiLabelDataset promote_labels(const MultiLabelDataset& raw, const LabelPromotionSpec& spec) {
  std::unordered_set<std::size_t> promoted(spec.promoted_feature_indices.begin(),
                                           spec.promoted_feature_indices.end());
  if (promoted.size() != spec.promoted_feature_indices.size())
    throw std::invalid_argument("promote_labels: duplicate feature index");
  for (std::size_t idx : spec.promoted_feature_indices) {
    if (idx >= raw.feature_dim)
      throw std::invalid_argument("promote_labels: feature index " + std::to_string(idx) +
                                  " out of range (p=" + std::to_string(raw.feature_dim) + ")");
  }

  MultiLabelDataset out;
  out.feature_dim = raw.feature_dim - promoted.size();
  out.label_count = (spec.keep_original_label ? raw.label_count : 0) +
                    spec.promoted_feature_indices.size();
  if (out.label_count == 0) throw std::invalid_argument("promote_labels: no labels left");
  if (spec.keep_original_label) out.label_names = raw.label_names;
  for (std::size_t idx : spec.promoted_feature_indices)
    out.label_names.push_back("feature_" + std::to_string(idx));

  out.groups.reserve(raw.groups.size());
  for (const auto& g : raw.groups) {
    QueryGroup ng;
    ng.query_id = g.query_id;
    ng.items.reserve(g.items.size());
    for (const auto& it : g.items) {
      Item ni;
      ni.features.reserve(out.feature_dim);
      for (std::size_t f = 0; f < it.features.size(); ++f) {
        if (!promoted.count(f)) ni.features.push_back(it.features[f]);
      }
      if (spec.keep_original_label) ni.labels = it.labels;
      for (std::size_t idx : spec.promoted_feature_indices) ni.labels.push_back(it.features[idx]);
      ng.items.push_back(std::move(ni));
    }
    out.groups.push_back(std::move(ng));
  }

  if (spec.quantize_levels >= 2 && !spec.promoted_feature_indices.empty()) {
    const std::size_t first_promoted =
        spec.keep_original_label ? raw.label_count : 0;
    std::vector<double> column;
    column.reserve(out.num_items());
    for (std::size_t k = first_promoted; k < out.label_count; ++k) {
      column.clear();
      for (const auto& g : out.groups)
        for (const auto& it : g.items) column.push_back(it.labels[k]);
      std::vector<int> levels = quantize_label(column, spec.quantize_levels);
      std::size_t i = 0;
      for (auto& g : out.groups)
        for (auto& it : g.items) it.labels[k] = static_cast<double>(levels[i++]);
    }
  }
  return out;
}

std::vector<int> quantize_label(const std::vector<double>& values, int n_levels) {
  if (n_levels < 2) throw std::invalid_argument("quantize_label: n_levels must be >= 2");
  const std::size_t n = values.size();
  std::vector<int> levels(n, 0);
  if (n == 0) return levels;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  if (values[order.front()] == values[order.back()]) {
    Log::Warning("quantize_label: constant column, all levels set to 0");
    return levels;
  }

  // Equal-frequency bins; ties share the rank of their first occurrence so
  // equal values always get equal levels.
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const int level = static_cast<int>(i * static_cast<std::size_t>(n_levels) / n);
    for (std::size_t t = i; t < j; ++t) levels[order[t]] = level;
    i = j;
  }
  return levels;
}

namespace {

constexpr char kCacheMagic[8] = {'M', 'L', 'L', 'T', 'R', 'D', 'S', '1'};
constexpr std::uint32_t kCacheVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u64(out, bits);
}

void put_str(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("cache truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t get_u64(std::istream& in) {
  std::uint64_t lo = get_u32(in);
  std::uint64_t hi = get_u32(in);
  return lo | (hi << 32);
}

double get_f64(std::istream& in) {
  std::uint64_t bits = get_u64(in);
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

std::string get_str(std::istream& in) {
  std::uint32_t len = get_u32(in);
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw std::runtime_error("cache truncated");
  return s;
}

}  // namespace

void save_cache(const MultiLabelDataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(kCacheMagic, sizeof(kCacheMagic));
  put_u32(out, kCacheVersion);
  put_u64(out, dataset.groups.size());
  put_u32(out, static_cast<std::uint32_t>(dataset.feature_dim));
  put_u32(out, static_cast<std::uint32_t>(dataset.label_count));
  for (const auto& name : dataset.label_names) put_str(out, name);
  for (const auto& g : dataset.groups) {
    put_str(out, g.query_id);
    put_u64(out, g.items.size());
    for (const auto& it : g.items) {
      for (double v : it.features) put_f64(out, v);
      for (double v : it.labels) put_f64(out, v);
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

MultiLabelDataset load_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0)
    throw std::runtime_error("not a dataset cache: " + path);
  const std::uint32_t version = get_u32(in);
  if (version != kCacheVersion)
    throw std::runtime_error("unsupported cache version " + std::to_string(version));
  MultiLabelDataset ds;
  const std::uint64_t m = get_u64(in);
  ds.feature_dim = get_u32(in);
  ds.label_count = get_u32(in);
  ds.label_names.reserve(ds.label_count);
  for (std::size_t k = 0; k < ds.label_count; ++k) ds.label_names.push_back(get_str(in));
  ds.groups.reserve(m);
  for (std::uint64_t q = 0; q < m; ++q) {
    QueryGroup g;
    g.query_id = get_str(in);
    const std::uint64_t n_q = get_u64(in);
    g.items.reserve(n_q);
    for (std::uint64_t i = 0; i < n_q; ++i) {
      Item item;
      item.features.resize(ds.feature_dim);
      for (auto& v : item.features) v = get_f64(in);
      item.labels.resize(ds.label_count);
      for (auto& v : item.labels) v = get_f64(in);
      g.items.push_back(std::move(item));
    }
    ds.groups.push_back(std::move(g));
  }
  return ds;
}

}  // namespace mlltr
