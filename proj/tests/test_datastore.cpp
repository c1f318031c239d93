#include <fstream>
#include <set>

#include "common/errors.hpp"
#include "datastore/datastore.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"

using namespace mgh;
using namespace mgh::data;
using testing::mock_triplets;
using testing::scratch_dir;

namespace {

std::vector<std::string> lines_of(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

void write_lines(const std::filesystem::path& p, const std::vector<std::string>& lines) {
  std::ofstream out(p);
  for (const auto& l : lines) out << l << "\n";
}

std::vector<synth::TrainingTriplet> tagged(std::size_t n, const std::string& tag) {
  auto out = mock_triplets(n, 17);
  for (std::size_t i = 0; i < n; ++i) out[i].query = tag + std::to_string(i);
  return out;
}

}  // namespace

TEST_CASE("write then read 100 triplets") {
  const auto dir = scratch_dir("ds_roundtrip");
  const auto data = mock_triplets(100, 2);
  CHECK(write_dataset(data, dir / "d.jsonl") == 100);
  const auto back = read_dataset(dir / "d.jsonl", true);
  CHECK(back.triplets == data);
  CHECK(back.report.clean());
  CHECK(back.report.lines == 100);
  CHECK(back.report.accepted == 100);
}

TEST_CASE("records keep the canonical field order") {
  const auto rec = to_record(mock_triplets(1, 3)[0]);
  std::vector<std::string> keys;
  for (auto it = rec.begin(); it != rec.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"user_query", "positive_document", "hard_negative_document",
                                         "source", "task_category", "task_description"});
  CHECK(rec["hard_negative_document"][0]["similarity_level"] == "high");
  CHECK(rec["hard_negative_document"][3]["similarity_level"] == "low");
}

TEST_CASE("empty dataset and missing directory") {
  const auto dir = scratch_dir("ds_empty");
  CHECK(write_dataset({}, dir / "e.jsonl") == 0);
  CHECK(std::filesystem::file_size(dir / "e.jsonl") == 0);
  CHECK(read_dataset(dir / "e.jsonl", true).triplets.empty());
  CHECK_THROWS_AS(write_dataset(mock_triplets(2, 1), dir / "nope" / "x.jsonl"), FileError);
  CHECK_THROWS_AS(read_dataset(dir / "absent.jsonl", true), FileError);
}

TEST_CASE("one corrupt line among ten") {
  const auto dir = scratch_dir("ds_corrupt");
  write_dataset(mock_triplets(10, 4), dir / "d.jsonl");
  auto lines = lines_of(dir / "d.jsonl");
  auto rec = nlohmann::json::parse(lines[6]);
  std::swap(rec["hard_negative_document"][1], rec["hard_negative_document"][3]);
  lines[6] = rec.dump();
  write_lines(dir / "d.jsonl", lines);

  const auto lax = read_dataset(dir / "d.jsonl", false);
  CHECK(lax.triplets.size() == 9);
  CHECK(lax.report.violations.at("level_order") == 1);
  CHECK(lax.report.bad_lines == std::vector<std::size_t>{7});
  CHECK_FALSE(lax.report.clean());
  try {
    read_dataset(dir / "d.jsonl", true);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("line 7") != std::string::npos);
  }
}

TEST_CASE("record validation codes") {
  auto rec = nlohmann::json(to_record(mock_triplets(1, 5)[0]));
  auto code = [](const nlohmann::json& j) {
    try {
      from_record(j, 4);
    } catch (const ValidationError& e) {
      return e.violation();
    }
    return std::string();
  };
  CHECK(code(rec).empty());
  auto a = rec;
  a.erase("positive_document");
  CHECK(code(a) == "missing_field");
  auto b = rec;
  b["hard_negative_document"].erase(0);
  CHECK(code(b) == "negative_count");
  auto c = rec;
  c["source"] = "scraped";
  CHECK(code(c) == "source");
  auto d = rec;
  d["user_query"] = "";
  CHECK(code(d) == "empty_text");
}

TEST_CASE("pair files") {
  const auto dir = scratch_dir("ds_pairs");
  write_lines(dir / "p.jsonl", {R"({"query":"a","positive":"b"})", "oops", R"({"query":"","positive":"b"})"});
  const auto r = read_pairs(dir / "p.jsonl", false);
  CHECK(r.pairs.size() == 1);
  CHECK(r.report.violations.at("not_json") == 1);
  CHECK(r.report.violations.at("empty_text") == 1);
  CHECK_THROWS_AS(read_pairs(dir / "p.jsonl", true), ValidationError);
}

TEST_CASE("two sources of fifty split 80/20") {
  const auto a = tagged(50, "a"), b = tagged(50, "b");
  const auto split = mix_and_split({{a, 1.0}, {b, 1.0}}, 7, 0.2);
  CHECK(split.train.size() == 80);
  CHECK(split.eval.size() == 20);
  auto from = [](const std::vector<synth::TrainingTriplet>& v, char tag) {
    std::size_t n = 0;
    for (const auto& t : v) n += t.query[0] == tag;
    return n;
  };
  CHECK(from(split.train, 'a') == 40);
  CHECK(from(split.train, 'b') == 40);
  CHECK(from(split.eval, 'a') == 10);
  CHECK(from(split.eval, 'b') == 10);
  std::set<std::string> all;
  for (const auto& t : split.train) all.insert(t.query);
  for (const auto& t : split.eval) CHECK(all.insert(t.query).second);
  CHECK(all.size() == 100);
  // Equal weights alternate sources.
  CHECK(split.train[0].query[0] != split.train[1].query[0]);
}

TEST_CASE("split is seeded") {
  const auto a = tagged(30, "a"), b = tagged(20, "b");
  const auto x = mix_and_split({{a, 2.0}, {b, 1.0}}, 3, 0.2);
  const auto y = mix_and_split({{a, 2.0}, {b, 1.0}}, 3, 0.2);
  CHECK(x.train == y.train);
  CHECK(x.eval == y.eval);
  CHECK(mix_and_split({{a, 2.0}, {b, 1.0}}, 4, 0.2).train != x.train);
}

TEST_CASE("mix spec errors") {
  const auto dir = scratch_dir("ds_mix");
  write_dataset(tagged(10, "a"), dir / "a.jsonl");
  write_dataset(tagged(10, "b"), dir / "b.jsonl");
  MixSpec spec;
  spec.inputs = {{dir / "a.jsonl", 1.0}, {dir / "b.jsonl", 0.0}};
  CHECK_THROWS_AS(mix_and_split(spec), ConfigError);
  spec.inputs = {};
  CHECK_THROWS_AS(mix_and_split(spec), ConfigError);
  spec.inputs = {{dir / "a.jsonl", 1.0}, {dir / "b.jsonl", 1.0}};
  spec.train_fraction = 0.7;
  CHECK_THROWS_AS(mix_and_split(spec), ConfigError);
  spec.train_fraction = 0.8;
  const auto s = mix_and_split(spec);
  CHECK(s.train.size() == 16);
  CHECK(s.eval.size() == 4);
}

TEST_CASE("digest tracks content") {
  auto data = mock_triplets(5, 6);
  const auto d = dataset_digest(data);
  CHECK(d.size() == 64);
  CHECK(d == dataset_digest(data));
  data[2].positive += " x";
  CHECK(d != dataset_digest(data));
}
