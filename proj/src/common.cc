#include "adspeech/common.h"

#include <fmt/format.h>

#include <charconv>
#include <string>

namespace adspeech {

std::string_view to_string(Label label) {
  return label == Label::AD ? "AD" : "HC";
}

std::string_view to_string(Task task) {
  switch (task) {
    case Task::PictureDescription: return "PictureDescription";
    case Task::Fluency: return "Fluency";
    case Task::ParagraphReading: return "ParagraphReading";
    case Task::Conversation: return "Conversation";
  }
  return "?";
}

std::string_view manifest_name(Task task) {
  switch (task) {
    case Task::PictureDescription: return "picture";
    case Task::Fluency: return "fluency";
    case Task::ParagraphReading: return "paragraph";
    case Task::Conversation: return "conversation";
  }
  return "?";
}

Label parse_label(std::string_view s) {
  if (s == "AD") return Label::AD;
  if (s == "HC") return Label::HC;
  throw InputError("unknown label '" + std::string(s) + "' (expected AD or HC)");
}

Task parse_task(std::string_view s) {
  for (int t = 0; t < kNumTasks; ++t) {
    auto task = static_cast<Task>(t);
    if (s == manifest_name(task) || s == to_string(task)) return task;
  }
  throw InputError("unknown task '" + std::string(s) + "'");
}

std::string format_double(double v) {
  if (is_missing(v)) return "NA";
  return fmt::format("{}", v);
}

double parse_double(std::string_view s) {
  if (s == "NA" || s.empty()) return kMissing;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError("not a number: '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace adspeech
