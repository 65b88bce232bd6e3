#include "adspeech/report.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "adspeech/io.h"

namespace adspeech {

FairnessReport fairness_by_age(const std::vector<Label>& pred, const std::vector<Label>& truth,
                               const std::vector<int>& ages, int threshold) {
  if (pred.empty()) throw InputError("fairness report of empty input");
  if (pred.size() != truth.size() || pred.size() != ages.size()) {
    throw InputError("fairness report: inputs differ in length");
  }
  Confusion groups[2];
  for (std::size_t i = 0; i < pred.size(); ++i) groups[ages[i] >= threshold].add(truth[i], pred[i]);
  FairnessReport r;
  r.threshold = threshold;
  GroupMetric* out[2] = {&r.young, &r.old};
  for (int g = 0; g < 2; ++g) {
    out[g]->n = groups[g].total();
    if (out[g]->n > 0) out[g]->f1_micro = f1_scores(groups[g]).micro;
  }
  if (r.young.f1_micro && r.old.f1_micro) r.gap = std::abs(*r.young.f1_micro - *r.old.f1_micro);
  return r;
}

std::string fairness_to_json(const FairnessReport& r) {
  using nlohmann::json;
  const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j;
  j["threshold_age"] = r.threshold;
  j["young"] = {{"n", r.young.n}, {"f1_micro", opt(r.young.f1_micro)}};
  j["old"] = {{"n", r.old.n}, {"f1_micro", opt(r.old.f1_micro)}};
  j["gap"] = opt(r.gap);
  return j.dump(2) + "\n";
}

ResultsTable results_table(const std::vector<EvalReport>& reports) {
  ResultsTable t;
  for (const auto& r : reports) {
    if (std::find(t.models.begin(), t.models.end(), r.spec.kind) == t.models.end()) {
      t.models.push_back(r.spec.kind);
    }
  }
  for (const auto& r : reports) {
    auto it = std::find_if(t.rows.begin(), t.rows.end(),
                           [&](const TableRow& row) { return row.dataset == r.dataset; });
    if (it == t.rows.end()) {
      TableRow row;
      row.dataset = r.dataset;
      row.n_ad = r.n_ad;
      row.n_hc = r.n_hc;
      row.scores.assign(t.models.size(), std::nullopt);
      t.rows.push_back(std::move(row));
      it = t.rows.end() - 1;
    }
    const auto m = std::find(t.models.begin(), t.models.end(), r.spec.kind) - t.models.begin();
    it->scores[static_cast<std::size_t>(m)] = r.mean;
  }
  return t;
}

std::vector<std::vector<bool>> column_maxima(const ResultsTable& t) {
  const std::size_t cols = 2 * t.models.size();
  std::vector<std::vector<bool>> mark(t.rows.size(), std::vector<bool>(cols, false));
  const auto value = [&](std::size_t r, std::size_t c) -> std::optional<double> {
    const auto& s = t.rows[r].scores[c / 2];
    if (!s) return std::nullopt;
    return c % 2 == 0 ? s->micro : s->macro;
  };
  for (std::size_t c = 0; c < cols; ++c) {
    std::optional<double> best;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto v = value(r, c);
      if (v && (!best || *v > *best)) best = v;
    }
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto v = value(r, c);
      mark[r][c] = v && best && *v == *best;
    }
  }
  return mark;
}

std::string table_csv(const ResultsTable& t) {
  std::string out = "dataset,n_ad,n_hc";
  for (ModelKind m : t.models) out += fmt::format(",{0}_f1_micro,{0}_f1_macro", to_string(m));
  out += "\n";
  for (const auto& row : t.rows) {
    out += fmt::format("{},{},{}", csv_escape(row.dataset), row.n_ad, row.n_hc);
    for (const auto& s : row.scores) {
      out += s ? fmt::format(",{},{}", format_double(s->micro), format_double(s->macro)) : ",NA,NA";
    }
    out += "\n";
  }
  return out;
}

ResultsTable parse_table_csv(std::string_view csv) {
  ResultsTable t;
  std::vector<std::vector<std::string>> lines;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    std::size_t end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    const auto line = csv.substr(pos, end - pos);
    if (!line.empty()) lines.push_back(split_csv_line(line));
    pos = end + 1;
  }
  if (lines.empty() || lines[0].size() < 3 || (lines[0].size() - 3) % 2 != 0) {
    throw ParseError("results table: bad header");
  }
  for (std::size_t c = 3; c < lines[0].size(); c += 2) {
    const auto& name = lines[0][c];
    t.models.push_back(parse_model_kind(name.substr(0, name.find('_'))));
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& f = lines[i];
    if (f.size() != lines[0].size()) {
      throw ParseError("results table: wrong field count", static_cast<int>(i + 1));
    }
    TableRow row;
    row.dataset = f[0];
    row.n_ad = std::stoul(f[1]);
    row.n_hc = std::stoul(f[2]);
    for (std::size_t c = 3; c < f.size(); c += 2) {
      const double mi = parse_double(f[c]);
      const double ma = parse_double(f[c + 1]);
      if (is_missing(mi)) {
        row.scores.emplace_back(std::nullopt);
      } else {
        row.scores.emplace_back(F1{mi, ma});
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string table_text(const ResultsTable& t) {
  const auto mark = column_maxima(t);
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header = {"Data", "Size"};
  for (ModelKind m : t.models) {
    header.push_back(fmt::format("{} F1(mi.)", to_string(m)));
    header.push_back(fmt::format("{} F1(ma.)", to_string(m)));
  }
  cells.push_back(header);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    std::vector<std::string> line = {row.dataset,
                                     fmt::format("{} AD / {} HC", row.n_ad, row.n_hc)};
    for (std::size_t m = 0; m < t.models.size(); ++m) {
      const auto& s = row.scores[m];
      for (int k = 0; k < 2; ++k) {
        if (!s) {
          line.emplace_back("-");
          continue;
        }
        const double v = 100.0 * (k == 0 ? s->micro : s->macro);
        line.push_back(fmt::format("{:.2f}{}", v, mark[r][2 * m + k] ? "*" : ""));
      }
    }
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  std::string out;
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c > 0) out += "  ";
      out += c < 2 ? fmt::format("{:<{}}", line[c], width[c]) : fmt::format("{:>{}}", line[c], width[c]);
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += "\n";
  }
  out += "* column maximum\n";
  return out;
}

std::vector<SweepPoint> sweep_curve(const Dataset& base, const Dataset& augment,
                                    const std::vector<double>& fractions,
                                    const FeatureTable& features, const ModelSpec& spec, int k,
                                    std::uint64_t seed) {
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (!(fractions[i] >= 0 && fractions[i] <= 1)) throw InputError("sweep fractions must lie in [0, 1]");
    if (i > 0 && fractions[i] < fractions[i - 1]) throw InputError("sweep fractions must ascend");
  }
  std::vector<SweepPoint> curve;
  for (double f : fractions) {
    const Dataset combined = combine(base, {{&augment, f}}, seed);
    const auto report = cross_validate(build_design(combined, features), spec, k, seed);
    curve.push_back({f, combined.size() - base.size(), report.mean});
  }
  return curve;
}

std::string sweep_csv(const std::vector<SweepPoint>& curve) {
  std::string out = "fraction,added,f1_micro,f1_macro\n";
  for (const auto& p : curve) {
    out += fmt::format("{},{},{},{}\n", format_double(p.fraction), p.added,
                       format_double(p.f1.micro), format_double(p.f1.macro));
  }
  return out;
}

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string sweep_svg(const std::vector<SweepPoint>& curve, const std::string& title) {
  constexpr double kW = 640, kH = 400, kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;
  double xmax = 1;
  for (const auto& p : curve) xmax = std::max(xmax, static_cast<double>(p.added));
  double ylo = 1, yhi = 0;
  for (const auto& p : curve) {
    ylo = std::min({ylo, p.f1.micro, p.f1.macro});
    yhi = std::max({yhi, p.f1.micro, p.f1.macro});
  }
  if (curve.empty()) ylo = 0, yhi = 1;
  ylo = std::max(0.0, std::floor(ylo * 10.0) / 10.0);
  yhi = std::min(1.0, std::ceil(yhi * 10.0) / 10.0);
  if (yhi <= ylo) yhi = std::min(1.0, ylo + 0.1), ylo = yhi - 0.1;
  const auto px = [&](double x) { return kLeft + x / xmax * (kW - kLeft - kRight); };
  const auto py = [&](double y) { return kH - kBottom - (y - ylo) / (yhi - ylo) * (kH - kTop - kBottom); };

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n"
      "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\" "
      "text-anchor=\"middle\">{}</text>\n",
      kW, kH, kW / 2, xml_escape(title));
  out += fmt::format(
      "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#000\"/>\n"
      "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{3}\" stroke=\"#000\"/>\n",
      kLeft, kH - kBottom, kW - kRight, kTop);
  for (int i = 0; i <= 4; ++i) {
    const double y = ylo + (yhi - ylo) * i / 4.0;
    out += fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\" "
        "text-anchor=\"end\">{:.2f}</text>\n",
        kLeft - 6, py(y) + 4, y);
  }
  for (const auto& p : curve) {
    out += fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\" "
        "text-anchor=\"middle\">{}</text>\n",
        px(static_cast<double>(p.added)), kH - kBottom + 16, p.added);
  }
  out += fmt::format(
      "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" "
      "text-anchor=\"middle\">added samples</text>\n",
      (kLeft + kW - kRight) / 2, kH - 12);
  const char* colors[2] = {"#1f5fa8", "#b22222"};
  const char* names[2] = {"F1 micro", "F1 macro"};
  for (int s = 0; s < 2; ++s) {
    std::string pts;
    for (const auto& p : curve) {
      if (!pts.empty()) pts += ' ';
      pts += fmt::format("{:.2f},{:.2f}", px(static_cast<double>(p.added)),
                         py(s == 0 ? p.f1.micro : p.f1.macro));
    }
    out += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                       pts, colors[s]);
    out += fmt::format(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{}\">{}</text>\n",
        kW - kRight - 80, kTop + 16 * (s + 1), colors[s], names[s]);
  }
  out += "</svg>\n";
  return out;
}

}  // namespace adspeech
