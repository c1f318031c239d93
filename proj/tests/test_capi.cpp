#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "mgh/mgh.h"

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  mgh_string_free(s);
  return out;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "mgh_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("version and error slot") {
  CHECK(std::string(mgh_version()).size() > 0);
  mgh_model* m = nullptr;
  CHECK(mgh_model_load("/nonexistent/model.ckpt", &m) == MGH_ERR_FILE);
  CHECK(m == nullptr);
  CHECK(std::string(mgh_last_error()).find("/nonexistent/model.ckpt") != std::string::npos);
}

TEST_CASE("ata weights hand example") {
  const double att[] = {0.9, 0.1, 0.5, 0.5};
  double raw[2], norm[2];
  REQUIRE(mgh_ata_weights(att, 1, 2, "incoming", raw, norm) == MGH_OK);
  CHECK(std::abs(norm[0] - 0.6631) < 1e-4);
  CHECK(std::abs(norm[1] - 0.3369) < 1e-4);
  REQUIRE(mgh_ata_weights(att, 1, 2, "literal", raw, norm) == MGH_OK);
  CHECK(std::abs(norm[0] - 0.4665) < 1e-4);
  const double bad[] = {0.9, 0.2, 0.5, 0.5};
  CHECK(mgh_ata_weights(bad, 1, 2, "incoming", raw, norm) == MGH_ERR_CONTRACT);
  CHECK(mgh_ata_weights(att, 1, 2, "sideways", raw, norm) == MGH_ERR_CONFIG);
}

TEST_CASE("schedule levels") {
  std::vector<int> levels(8);
  REQUIRE(mgh_schedule_levels("curriculum", 8, 4, 0, 1, levels.data()) == MGH_OK);
  CHECK(levels == std::vector<int>{4, 4, 3, 3, 2, 2, 1, 1});
  CHECK(mgh_schedule_levels("curriculum", 3, 4, 0, 1, levels.data()) == MGH_ERR_CONFIG);
}

TEST_CASE("model init, embed, save, load") {
  const auto dir = scratch("capi_model");
  mgh_model* m = nullptr;
  REQUIRE(mgh_model_init(R"({"num_layers":1,"num_heads":2,"model_dim":8,"ff_dim":16})", &m) == MGH_OK);
  REQUIRE(mgh_model_dim(m) == 8);
  std::vector<double> a(8), b(8);
  CHECK(mgh_model_embed(m, "hello", "ata", a.data(), a.size()) == MGH_OK);
  CHECK(mgh_model_embed(m, "hello", "max", a.data(), a.size()) == MGH_ERR_CONFIG);
  CHECK(mgh_model_embed(m, "hello", "mean", a.data(), 3) == MGH_ERR_CONTRACT);
  const auto path = (dir / "m.ckpt").string();
  REQUIRE(mgh_model_save(m, path.c_str()) == MGH_OK);
  mgh_model* back = nullptr;
  REQUIRE(mgh_model_load(path.c_str(), &back) == MGH_OK);
  REQUIRE(mgh_model_embed(m, "hello", "mean", a.data(), a.size()) == MGH_OK);
  REQUIRE(mgh_model_embed(back, "hello", "mean", b.data(), b.size()) == MGH_OK);
  CHECK(a == b);
  char* tsv = nullptr;
  REQUIRE(mgh_inspect(back, "hi", "incoming", 1, &tsv) == MGH_OK);
  CHECK(take(tsv).rfind("position\ttoken\traw\tnormalized\n", 0) == 0);
  mgh_model_free(m);
  mgh_model_free(back);
  CHECK(mgh_model_init(R"({"model_dim":10,"num_heads":4})", &m) == MGH_ERR_CONFIG);
}

TEST_CASE("run from json and commands") {
  const auto dir = scratch("capi_run");
  const std::string cfg = R"({"schema_version":1,"seed":3,"output_dir":")" + dir.string() +
                          R"(","synth":{"count":0}})";
  mgh_run* run = nullptr;
  REQUIRE(mgh_run_from_json(cfg.c_str(), &run) == MGH_OK);
  CHECK(mgh_cmd_synth(run, nullptr) == MGH_ERR_CONFIG);
  REQUIRE(mgh_run_set(run, "synth.count=12") == MGH_OK);
  char* summary = nullptr;
  REQUIRE(mgh_cmd_synth(run, &summary) == MGH_OK);
  CHECK(take(summary).find("\"records\": 12") != std::string::npos);
  CHECK(mgh_run_set(run, "bogus.key=1") == MGH_ERR_CONFIG);
  char* resolved = nullptr;
  REQUIRE(mgh_run_resolved_json(run, &resolved) == MGH_OK);
  CHECK(take(resolved).find("\"count\": 12") != std::string::npos);
  CHECK(mgh_cmd_train(run, nullptr) == MGH_ERR_CONFIG);
  mgh_run_free(run);
  CHECK(mgh_run_from_json("{not json", &run) == MGH_ERR_CONFIG);
  CHECK(mgh_run_open("/nonexistent/run.json", &run) == MGH_ERR_FILE);
}
