#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "adspeech/corpus.h"
#include "adspeech/matrix.h"

namespace adspeech::testing {

inline SpeechSample make_sample(std::string id, std::string subject, Label label,
                                std::string transcript = "PAR: the/DET cat/NOUN sat/VERB:PAST",
                                Task task = Task::PictureDescription, int age = 70) {
  SpeechSample s;
  s.sample_id = std::move(id);
  s.subject_id = std::move(subject);
  s.label = label;
  s.task = task;
  s.age = age;
  s.utterances = parse_transcript(transcript);
  return s;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("adspeech-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& gen,
                            double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = u(gen);
  return m;
}

}  // namespace adspeech::testing
