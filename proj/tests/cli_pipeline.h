#pragma once

// Drives every CLI command on a small synthetic corpus. Shared by the unit
// tests and the acceptance binary.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "adspeech/io.h"
#include "cli.h"

namespace adspeech::testing {

struct PipelineRun {
  std::vector<std::pair<std::string, int>> exit_codes;  // command line -> exit code
  std::map<std::string, std::string> artifacts;         // relative path -> bytes
};

inline const char* kSmallSynthConfig = R"({
  "seed": 5,
  "synth": {
    "audio": true,
    "rate_hz": 8000,
    "corpora": [
      {"name": "DB", "counts": [24, 0, 0, 0], "ad_fraction": 0.5, "delta": 2.0,
       "subjects_per_class": 6, "min_age": 50, "max_age": 80},
      {"name": "HX", "counts": [0, 4, 4, 4], "ad_fraction": 0.0, "delta": 2.0,
       "subjects_per_class": 6}
    ]
  }
}
)";

// Runs synth, extract, evaluate, fairness, explain, embed and sweep under root.
inline PipelineRun run_pipeline(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  PipelineRun out;
  write_file(root / "synth.json", kSmallSynthConfig);
  const std::string corpus = (root / "corpus").string();
  const std::string config = (root / "corpus" / "run.json").string();
  std::vector<std::string> synth = {"adspeech", "--config", (root / "synth.json").string(), "--out",
                                    corpus, "synth"};
  out.exit_codes.emplace_back("synth", cli::run(synth));
  // The generated config plus a smaller anchor search.
  if (fs::exists(root / "corpus" / "config.json")) {
    auto j = nlohmann::ordered_json::parse(read_file(root / "corpus" / "config.json"));
    j["anchors"] = {{"budget", 200}, {"max_predicates", 3}};
    write_file(root / "corpus" / "run.json", j.dump(2) + "\n");
  }
  const std::vector<std::vector<std::string>> commands = {
      {"--config", config, "extract"},
      {"--config", config, "evaluate", "DB", "DB + 0.5*HX", "--models", "NB,RF", "--k", "3"},
      {"--config", config, "fairness", "DB", "--model", "NB", "--threshold", "65"},
      {"--config", config, "explain", "DB", "--limit", "3", "--model", "RF"},
      {"--config", config, "embed", "DB", "--oot", "HX", "--model", "SVM"},
      {"--config", config, "sweep", "DB", "--augment", "HX", "--fractions", "0,0.5,1", "--model",
       "NB"},
  };
  for (const auto& c : commands) {
    std::vector<std::string> argv = {"adspeech"};
    argv.insert(argv.end(), c.begin(), c.end());
    std::string line;
    for (const auto& a : c) line += (line.empty() ? "" : " ") + a;
    out.exit_codes.emplace_back(line, cli::run(argv));
  }
  for (const auto& e : fs::recursive_directory_iterator(root / "corpus")) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension().string();
    if (ext == ".csv" || ext == ".json" || ext == ".jsonl" || ext == ".svg" || ext == ".pgm" ||
        ext == ".txt" || ext == ".log") {
      out.artifacts[e.path().lexically_relative(root).generic_string()] = read_file(e.path());
    }
  }
  return out;
}

}  // namespace adspeech::testing
