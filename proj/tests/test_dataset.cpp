#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "mlltr/dataset.hpp"
#include "mlltr/util.hpp"

using namespace mlltr;

namespace {

MultiLabelDataset parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_letor(in);
}

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  auto ranks = [n](const std::vector<double>& v) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j < n && v[order[j]] == v[order[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j - 1)) / 2.0 + 1.0;
      for (std::size_t t = i; t < j; ++t) r[order[t]] = avg;
      i = j;
    }
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double num = 0, da = 0, db = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  return num / std::sqrt(da * db);
}

}  // namespace

TEST_CASE("parse_letor basic line") {
  const auto ds = parse_text("2 qid:1 1:0.5 3:1.0\n");
  REQUIRE(ds.groups.size() == 1);
  REQUIRE(ds.groups[0].items.size() == 1);
  CHECK(ds.groups[0].items[0].labels[0] == 2.0);
  REQUIRE(ds.feature_dim == 3);  // p inferred from the max index
  CHECK(ds.groups[0].items[0].features == std::vector<double>{0.5, 0.0, 1.0});
}

TEST_CASE("parse_letor groups by qid") {
  const auto ds = parse_text("1 qid:1 1:1.0\n0 qid:2 1:2.0\n");
  REQUIRE(ds.groups.size() == 2);
  CHECK(ds.groups[0].size() == 1);
  CHECK(ds.groups[1].size() == 1);
  CHECK(ds.groups[0].query_id == "1");
}

TEST_CASE("parse_letor preserves file order within a group") {
  const auto ds = parse_text("1 qid:7 1:1\n2 qid:7 1:2\n0 qid:7 1:3\n");
  REQUIRE(ds.groups.size() == 1);
  REQUIRE(ds.groups[0].size() == 3);
  CHECK(ds.groups[0].items[0].labels[0] == 1.0);
  CHECK(ds.groups[0].items[1].labels[0] == 2.0);
  CHECK(ds.groups[0].items[2].labels[0] == 0.0);
}

TEST_CASE("parse_letor errors name the line") {
  CHECK_THROWS_WITH_AS(parse_text("x qid:1 1:a\n"), doctest::Contains("line 1"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_text("1 qid:1 1:0.5\n2 qid:2 oops\n"), doctest::Contains("line 2"),
                       std::runtime_error);
  CHECK_THROWS_AS(parse_text(""), std::runtime_error);
  CHECK_THROWS_AS(parse_text("1 qid:1 3:1 2:1\n"), std::runtime_error);  // not increasing
}

TEST_CASE("parse_letor ignores comments") {
  const auto ds = parse_text("# header\n1 qid:1 1:0.5 # docid=17\n");
  REQUIRE(ds.groups.size() == 1);
  CHECK(ds.groups[0].items[0].features[0] == 0.5);
}

TEST_CASE("letor round-trip re-parses identically") {
  std::mt19937_64 rng(7);
  std::ostringstream src;
  for (int q = 1; q <= 5; ++q) {
    for (int i = 0; i < 4; ++i) {
      src << (rng() % 5) << " qid:" << q;
      for (int f = 1; f <= 6; ++f) src << ' ' << f << ':' << ((rng() % 1000) / 250.0);
      src << '\n';
    }
  }
  const auto ds = parse_text(src.str());
  std::ostringstream round;
  write_letor(ds, round);
  const auto ds2 = parse_text(round.str());
  REQUIRE(ds2.groups.size() == ds.groups.size());
  REQUIRE(ds2.feature_dim == ds.feature_dim);
  for (std::size_t q = 0; q < ds.groups.size(); ++q) {
    REQUIRE(ds2.groups[q].query_id == ds.groups[q].query_id);
    REQUIRE(ds2.groups[q].size() == ds.groups[q].size());
    for (std::size_t i = 0; i < ds.groups[q].size(); ++i) {
      CHECK(ds2.groups[q].items[i].features == ds.groups[q].items[i].features);
      CHECK(ds2.groups[q].items[i].labels == ds.groups[q].items[i].labels);
    }
  }
}

TEST_CASE("promote_labels moves a column to the labels") {
  // p=5, promote {2}, keep original: K=2, feature_dim=4, new label = old column 2.
  std::ostringstream src;
  src << "1 qid:1 1:10 2:20 3:30 4:40 5:50\n";
  src << "0 qid:1 1:11 2:21 3:31 4:41 5:51\n";
  auto raw = parse_text(src.str());
  LabelPromotionSpec spec;
  spec.promoted_feature_indices = {2};
  spec.quantize_levels = 0;  // keep raw values
  const auto ds = promote_labels(raw, spec);
  CHECK(ds.label_count == 2);
  CHECK(ds.feature_dim == 4);
  CHECK(ds.groups[0].items[0].labels == std::vector<double>{1.0, 30.0});
  CHECK(ds.groups[0].items[0].features == std::vector<double>{10.0, 20.0, 40.0, 50.0});
}

TEST_CASE("promote_labels with empty spec is the identity") {
  auto raw = parse_text("1 qid:1 1:1 2:2\n");
  LabelPromotionSpec spec;
  const auto ds = promote_labels(raw, spec);
  CHECK(ds.label_count == 1);
  CHECK(ds.feature_dim == 2);
  CHECK(ds.groups[0].items[0].labels == raw.groups[0].items[0].labels);
}

TEST_CASE("promote_labels removes every promoted value from the features") {
  // Exhaustive scan: mark promoted cells with a sentinel no other cell uses.
  std::mt19937_64 rng(11);
  std::ostringstream src;
  for (int q = 1; q <= 4; ++q) {
    for (int i = 0; i < 6; ++i) {
      src << (rng() % 3) << " qid:" << q;
      for (int f = 1; f <= 5; ++f) {
        const double v = (f == 1 || f == 5) ? 1e6 + (rng() % 100) : (rng() % 50) / 7.0;
        src << ' ' << f << ':' << v;
      }
      src << '\n';
    }
  }
  auto raw = parse_text(src.str());
  LabelPromotionSpec spec;
  spec.promoted_feature_indices = {0, 4};
  spec.quantize_levels = 0;
  const auto ds = promote_labels(raw, spec);
  CHECK(ds.feature_dim == 3);
  CHECK(ds.label_count == 3);
  for (const auto& g : ds.groups)
    for (const auto& it : g.items)
      for (double v : it.features) CHECK(v < 1e6);  // no sentinel survived
  // Group count and sizes preserved.
  REQUIRE(ds.groups.size() == raw.groups.size());
  for (std::size_t q = 0; q < ds.groups.size(); ++q)
    CHECK(ds.groups[q].size() == raw.groups[q].size());
}

TEST_CASE("promotion is invertible up to column order") {
  auto raw = parse_text("1 qid:1 1:1 2:2 3:3\n0 qid:1 1:4 2:5 3:6\n");
  LabelPromotionSpec spec;
  spec.promoted_feature_indices = {1};
  spec.quantize_levels = 0;
  const auto ds = promote_labels(raw, spec);
  // Re-append the promoted column: the multiset of each row's features must
  // match the raw row.
  for (std::size_t q = 0; q < raw.groups.size(); ++q) {
    for (std::size_t i = 0; i < raw.groups[q].size(); ++i) {
      std::vector<double> rebuilt = ds.groups[q].items[i].features;
      rebuilt.push_back(ds.groups[q].items[i].labels[1]);
      std::vector<double> original = raw.groups[q].items[i].features;
      std::sort(rebuilt.begin(), rebuilt.end());
      std::sort(original.begin(), original.end());
      CHECK(rebuilt == original);
    }
  }
}

TEST_CASE("promote_labels rejects bad indices") {
  auto raw = parse_text("1 qid:1 1:1 2:2\n");
  LabelPromotionSpec spec;
  spec.promoted_feature_indices = {5};
  CHECK_THROWS_AS(promote_labels(raw, spec), std::invalid_argument);
  spec.promoted_feature_indices = {1, 1};
  CHECK_THROWS_AS(promote_labels(raw, spec), std::invalid_argument);
}

TEST_CASE("quantize_label equal-frequency basics") {
  CHECK(quantize_label({1, 2, 3, 4}, 2) == std::vector<int>{0, 0, 1, 1});
  // Already-integral 5-level labels with equal frequencies relabel in order.
  std::vector<double> levels;
  for (int l = 0; l < 5; ++l)
    for (int rep = 0; rep < 3; ++rep) levels.push_back(l);
  const auto q = quantize_label(levels, 5);
  for (std::size_t i = 0; i < levels.size(); ++i) CHECK(q[i] == static_cast<int>(levels[i]));
}

TEST_CASE("quantize_label is monotone and tie-consistent") {
  std::mt19937_64 rng(3);
  std::vector<double> values(500);
  for (auto& v : values) v = static_cast<double>(rng() % 40);  // plenty of ties
  const auto q = quantize_label(values, 5);
  for (std::size_t i = 0; i < values.size(); ++i) {
    CHECK(q[i] >= 0);
    CHECK(q[i] <= 4);
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (values[i] < values[j]) CHECK(q[i] <= q[j]);
      if (values[i] == values[j]) CHECK(q[i] == q[j]);
    }
  }
}

TEST_CASE("quantize_label constant column warns and maps to zero") {
  const auto q = quantize_label({3, 3, 3}, 4);
  CHECK(q == std::vector<int>{0, 0, 0});
}

TEST_CASE("quantize_label with n_levels = n is a rank transform") {
  std::mt19937_64 rng(5);
  std::vector<double> values(1000);
  for (auto& v : values) v = static_cast<double>(rng()) / 1e12;
  const auto q = quantize_label(values, 1000);
  std::vector<double> qd(q.begin(), q.end());
  CHECK(spearman(values, qd) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("binary cache round-trip") {
  auto raw = parse_text("2 qid:a 1:0.25 2:-1\n1 qid:a 1:0.5\n0 qid:b 2:3.5\n");
  const std::string path = "test_cache.bin";
  save_cache(raw, path);
  const auto loaded = load_cache(path);
  std::remove(path.c_str());
  REQUIRE(loaded.groups.size() == raw.groups.size());
  CHECK(loaded.feature_dim == raw.feature_dim);
  CHECK(loaded.label_count == raw.label_count);
  CHECK(loaded.label_names == raw.label_names);
  for (std::size_t q = 0; q < raw.groups.size(); ++q) {
    CHECK(loaded.groups[q].query_id == raw.groups[q].query_id);
    for (std::size_t i = 0; i < raw.groups[q].size(); ++i) {
      CHECK(loaded.groups[q].items[i].features == raw.groups[q].items[i].features);
      CHECK(loaded.groups[q].items[i].labels == raw.groups[q].items[i].labels);
    }
  }
}

TEST_CASE("select_labels keeps requested columns in order") {
  auto raw = parse_text("1 qid:1 1:1 2:2 3:3\n");
  LabelPromotionSpec spec;
  spec.promoted_feature_indices = {0, 1};
  spec.quantize_levels = 0;
  const auto ds = promote_labels(raw, spec);
  REQUIRE(ds.label_count == 3);
  const auto sub = ds.select_labels({2, 0});
  REQUIRE(sub.label_count == 2);
  CHECK(sub.groups[0].items[0].labels == std::vector<double>{2.0, 1.0});
  CHECK_THROWS_AS(ds.select_labels({9}), std::invalid_argument);
}
