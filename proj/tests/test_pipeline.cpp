#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "semann/bundled.hpp"
#include "semann/ingest.hpp"
#include "semann/pipeline.hpp"
#include "semann/synth.hpp"

using namespace semann;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "semann_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_synthetic_csv(const fs::path& dir, int n, std::uint64_t seed) {
  const Dataset data = generate(bundled_truth(n, seed, true));
  const fs::path path = dir / "data.csv";
  std::ofstream(path, std::ios::binary) << to_csv_text(data);
  return path;
}

PipelineConfig small_config(const fs::path& data, const fs::path& out) {
  PipelineConfig config;
  config.data_path = data.string();
  config.output_dir = out.string();
  config.seed = 7;
  config.bootstrap_replicates = 200;
  config.folds = 10;
  config.workers = 1;
  return config;
}

std::map<std::string, std::string> hash_outputs(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::directory_iterator(dir))
    out[entry.path().filename().string()] = fnv1a_hex(slurp(entry.path()));
  return out;
}

}  // namespace

TEST_CASE("full pipeline writes the report bundle with a sound manifest") {
  const fs::path work = fresh_dir("bundle");
  const fs::path data = write_synthetic_csv(work, 320, 3);
  const PipelineConfig config = small_config(data, work / "out");
  const PipelineResult result = run_pipeline(config);
  CHECK(result.completed);

  for (const char* name :
       {"descriptives.txt", "descriptives.json", "anova.txt", "anova.json",
        "measurement_fit.json", "reliability.json", "discriminant.json",
        "structural_fit.json", "hypotheses.json", "control_effects.json",
        "mediation.json", "manifest.json"})
    CHECK(fs::exists(work / "out" / name));

  // at least one stage-2 table must have been produced
  bool has_ann = false;
  for (const auto& f : result.files)
    if (f.rfind("ann_rmse_", 0) == 0) has_ann = true;
  CHECK(has_ann);
  CHECK(fs::exists(work / "out" / "sem_ann_comparison.json"));

  // manifest hashes match the bytes on disk and every stage reports ok
  const std::string manifest = slurp(work / "out" / "manifest.json");
  CHECK(manifest.find("\"completed\": true") != std::string::npos);
  std::istringstream lines(manifest);
  std::string line;
  int checked = 0;
  std::string pending_path;
  while (std::getline(lines, line)) {
    const auto path_pos = line.find("\"path\": \"");
    if (path_pos != std::string::npos) {
      pending_path = line.substr(path_pos + 9);
      pending_path = pending_path.substr(0, pending_path.find('"'));
      continue;
    }
    const auto hash_pos = line.find("\"hash\": \"fnv1a64:");
    if (hash_pos != std::string::npos && !pending_path.empty()) {
      std::string hash = line.substr(hash_pos + 17);
      hash = hash.substr(0, hash.find('"'));
      CHECK(fnv1a_hex(slurp(work / "out" / pending_path)) == hash);
      pending_path.clear();
      ++checked;
    }
  }
  CHECK(checked >= 12);
  CHECK(manifest.find("\"status\": \"failed\"") == std::string::npos);
}

TEST_CASE("reruns and worker counts produce byte-identical reports") {
  const fs::path work = fresh_dir("determinism");
  const fs::path data = write_synthetic_csv(work, 320, 3);

  PipelineConfig a = small_config(data, work / "a");
  run_pipeline(a);
  PipelineConfig b = small_config(data, work / "b");
  run_pipeline(b);
  PipelineConfig c = small_config(data, work / "c");
  c.workers = 4;
  run_pipeline(c);

  const auto ha = hash_outputs(work / "a");
  const auto hb = hash_outputs(work / "b");
  const auto hc = hash_outputs(work / "c");
  CHECK(ha == hb);
  CHECK(ha == hc);
  CHECK(ha.size() >= 12);
}

TEST_CASE("different seeds change the bootstrap outputs") {
  const fs::path work = fresh_dir("seeds");
  const fs::path data = write_synthetic_csv(work, 320, 3);
  PipelineConfig a = small_config(data, work / "a");
  run_pipeline(a);
  PipelineConfig b = small_config(data, work / "b");
  b.seed = 8;
  run_pipeline(b);
  CHECK(slurp(work / "a" / "mediation.json") !=
        slurp(work / "b" / "mediation.json"));
}

TEST_CASE("empty data fails fast in the ingest stage, manifest retained") {
  const fs::path work = fresh_dir("failfast");
  const fs::path data = work / "empty.csv";
  std::ofstream(data) << "respondent_id\n";
  const PipelineConfig config = small_config(data, work / "out");
  try {
    run_pipeline(config);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == Stage::Ingest);
    CHECK(stage_exit_code(e.stage()) == 10);
  }
  CHECK(fs::exists(work / "out" / "manifest.json"));
  const std::string manifest = slurp(work / "out" / "manifest.json");
  CHECK(manifest.find("\"completed\": false") != std::string::npos);
  CHECK(manifest.find("\"status\": \"failed\"") != std::string::npos);
  // no downstream analysis files
  CHECK_FALSE(fs::exists(work / "out" / "descriptives.json"));
  CHECK_FALSE(fs::exists(work / "out" / "structural_fit.json"));
}

TEST_CASE("screening stage is skipped without metadata but runs with it") {
  const fs::path work = fresh_dir("screening");
  const fs::path plain = write_synthetic_csv(work, 260, 5);
  PipelineConfig config = small_config(plain, work / "plain");
  const PipelineResult no_meta = run_pipeline(config);
  bool skipped_note = false;
  for (const auto& w : no_meta.warnings)
    if (w.find("screening skipped") != std::string::npos) skipped_note = true;
  CHECK(skipped_note);
  CHECK_FALSE(fs::exists(work / "plain" / "exclusion_log.csv"));

  // add metadata columns: one row below the time threshold
  const Dataset base = generate(bundled_truth(260, 5, true));
  std::string csv = to_csv_text(base);
  csv.erase(csv.find_last_of('\n'));  // strip trailing newline for rebuild
  std::istringstream lines(csv);
  std::string line;
  std::ostringstream with_meta;
  bool header = true;
  int row = 0;
  while (std::getline(lines, line)) {
    if (header) {
      with_meta << line << ",completion_seconds,source_address\n";
      header = false;
      continue;
    }
    with_meta << line << "," << (row == 3 ? 42 : 120 + row) << ",host"
              << row << "\n";
    ++row;
  }
  const fs::path meta_path = work / "meta.csv";
  std::ofstream(meta_path, std::ios::binary) << with_meta.str();
  PipelineConfig meta_config = small_config(meta_path, work / "meta");
  run_pipeline(meta_config);
  const std::string log = slurp(work / "meta" / "exclusion_log.csv");
  CHECK(log.find("time control") != std::string::npos);
}
