#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace adspeech {

// Bad user input: malformed files, invalid parameters, violated preconditions.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public InputError {
 public:
  // line <= 0 means "no line context" (e.g. a standalone parse-tree string).
  ParseError(const std::string& detail, int line = 0)
      : InputError(line > 0 ? "line " + std::to_string(line) + ": " + detail
                            : detail),
        detail_(detail),
        line_(line) {}
  int line() const { return line_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string detail_;
  int line_;
};

// Failure during computation (non-convergence, degenerate geometry, ...).
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Label : std::uint8_t { HC = 0, AD = 1 };

enum class Task : std::uint8_t {
  PictureDescription = 0,
  Fluency = 1,
  ParagraphReading = 2,
  Conversation = 3,
};

inline constexpr int kNumTasks = 4;

std::string_view to_string(Label label);
std::string_view to_string(Task task);
// Manifest spellings: picture, fluency, paragraph, conversation.
std::string_view manifest_name(Task task);

Label parse_label(std::string_view s);
Task parse_task(std::string_view s);

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

// Shortest round-trip decimal rendering of a double.
std::string format_double(double v);
double parse_double(std::string_view s);

}  // namespace adspeech
