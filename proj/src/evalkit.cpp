#include "salprop/evalkit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "salprop/errors.hpp"

namespace salprop {

namespace {

std::string slurp(const std::string& path) {
  if (!std::filesystem::exists(path)) fail(Err::FileNotFound, path);
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Err::FileNotFound, path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

// Inner text of the first <tag>...</tag> at or after `from`; npos if absent.
std::optional<std::string> find_tag(const std::string& xml, const std::string& tag,
                                    std::size_t from, std::size_t* end_out = nullptr) {
  const std::string open = "<" + tag + ">";
  const std::string close = "</" + tag + ">";
  const std::size_t a = xml.find(open, from);
  if (a == std::string::npos) return std::nullopt;
  const std::size_t b = xml.find(close, a + open.size());
  if (b == std::string::npos) return std::nullopt;
  if (end_out) *end_out = b + close.size();
  return xml.substr(a + open.size(), b - a - open.size());
}

std::string trimmed(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

int parse_int(const std::string& s, const std::string& what) {
  const std::string t = trimmed(s);
  try {
    std::size_t used = 0;
    const int v = std::stoi(t, &used);
    if (used != t.size()) fail(Err::ParseError, what + ": trailing junk in '" + t + "'");
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(Err::ParseError, what + ": not an integer: '" + t + "'");
  }
}

double parse_real(const std::string& s, const std::string& what) {
  const std::string t = trimmed(s);
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) fail(Err::ParseError, what + ": trailing junk in '" + t + "'");
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(Err::ParseError, what + ": not a number: '" + t + "'");
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::vector<GroundTruthBox> parse_voc_xml(const std::string& path) {
  const std::string xml = slurp(path);
  if (trimmed(xml).empty()) fail(Err::ParseError, path + ": empty annotation");
  if (xml.find("<annotation") == std::string::npos)
    fail(Err::ParseError, path + ": no <annotation> element");

  const std::string image_id = std::filesystem::path(path).stem().string();
  std::vector<GroundTruthBox> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t a = xml.find("<object>", pos);
    if (a == std::string::npos) break;
    const std::size_t b = xml.find("</object>", a);
    if (b == std::string::npos) fail(Err::ParseError, path + ": unterminated <object>");
    const std::string body = xml.substr(a, b - a);
    pos = b + 9;

    const auto difficult = find_tag(body, "difficult", 0);
    if (difficult && parse_int(*difficult, path + " <difficult>") != 0) continue;

    const auto bnd = find_tag(body, "bndbox", 0);
    if (!bnd) fail(Err::MissingField, path + ": object without <bndbox>");
    int v[4];
    static const char* kFields[4] = {"xmin", "ymin", "xmax", "ymax"};
    for (int f = 0; f < 4; ++f) {
      const auto txt = find_tag(*bnd, kFields[f], 0);
      if (!txt) fail(Err::MissingField, path + ": bndbox without <" +
                                            std::string(kFields[f]) + ">");
      v[f] = parse_int(*txt, path + " <" + kFields[f] + ">");
    }

    GroundTruthBox gt;
    gt.image_id = image_id;
    gt.box = Window{v[0], v[1], v[2] - v[0] + 1, v[3] - v[1] + 1};
    if (gt.box.w < 1 || gt.box.h < 1)
      fail(Err::ParseError, path + ": degenerate bndbox");
    if (const auto name = find_tag(body, "name", 0)) gt.class_name = trimmed(*name);
    out.push_back(std::move(gt));
  }
  return out;
}

std::vector<GroundTruthBox> parse_gt_csv(const std::string& path) {
  if (!std::filesystem::exists(path)) fail(Err::FileNotFound, path);
  std::ifstream in(path);
  if (!in) fail(Err::FileNotFound, path);

  std::vector<GroundTruthBox> out;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trimmed(line);
    if (t.empty() || t[0] == '#' || t == "image_id,x,y,w,h") continue;
    const auto cols = split_csv(t);
    if (cols.size() != 5) fail(Err::ParseError, path + ": bad row '" + t + "'");
    GroundTruthBox gt;
    gt.image_id = trimmed(cols[0]);
    gt.box = Window{parse_int(cols[1], path), parse_int(cols[2], path),
                    parse_int(cols[3], path), parse_int(cols[4], path)};
    if (gt.box.w < 1 || gt.box.h < 1) fail(Err::ParseError, path + ": degenerate box");
    out.push_back(std::move(gt));
  }
  return out;
}

double recall_at_n(const std::vector<Proposal>& proposals,
                   const std::vector<GroundTruthBox>& gts, int N, double iou_thr) {
  if (gts.empty()) fail(Err::NoGroundTruth, "no ground truth to match");
  const int top = std::min<int>(N, static_cast<int>(proposals.size()));
  int covered = 0;
  for (const auto& gt : gts)
    for (int i = 0; i < top; ++i)
      if (iou(proposals[i].window, gt.box) >= iou_thr) {
        ++covered;
        break;
      }
  return static_cast<double>(covered) / static_cast<double>(gts.size());
}

double auc(const std::vector<double>& curve) {
  if (curve.empty()) fail(Err::EmptyInput, "empty recall curve");
  // treat recall as 0 -> curve[0] over N in [0,1], trapezoids afterwards
  double area = curve[0];
  for (std::size_t i = 0; i + 1 < curve.size(); ++i)
    area += (curve[i] + curve[i + 1]) / 2.0;
  return 100.0 * area / static_cast<double>(curve.size());
}

std::optional<int> n_at_recall(const std::vector<double>& curve, double target) {
  for (std::size_t i = 0; i < curve.size(); ++i)
    if (curve[i] >= target) return static_cast<int>(i + 1);
  return std::nullopt;
}

std::string format_n_at(const std::optional<int>& n) {
  return n ? std::to_string(*n) : "-";
}

EvalReport evaluate(const std::map<std::string, std::vector<Proposal>>& proposals,
                    const std::map<std::string, std::vector<GroundTruthBox>>& annotations,
                    const std::vector<double>& iou_thresholds, int max_n) {
  for (const auto& [id, _] : annotations)
    if (!proposals.count(id))
      fail(Err::IdMismatch, "no proposals for image '" + id + "'");
  for (const auto& [id, _] : proposals)
    if (!annotations.count(id))
      fail(Err::IdMismatch, "no annotations for image '" + id + "'");

  std::size_t total_gts = 0;
  for (const auto& [_, gts] : annotations) total_gts += gts.size();
  if (total_gts == 0) fail(Err::NoGroundTruth, "annotation set holds no boxes");

  EvalReport report;
  report.max_n = max_n;
  for (double thr : iou_thresholds) {
    // count, per GT, the best (smallest) matching rank, then prefix-sum
    std::vector<std::size_t> first_match(static_cast<std::size_t>(max_n), 0);
    for (const auto& [id, gts] : annotations) {
      auto ranked = proposals.at(id);
      std::sort(ranked.begin(), ranked.end(),
                [](const Proposal& a, const Proposal& b) { return a.rank < b.rank; });
      const int top = std::min<int>(max_n, static_cast<int>(ranked.size()));
      for (const auto& gt : gts)
        for (int i = 0; i < top; ++i)
          if (iou(ranked[i].window, gt.box) >= thr) {
            ++first_match[i];
            break;
          }
    }
    EvalCurve curve;
    curve.iou_thr = thr;
    curve.recall.resize(static_cast<std::size_t>(max_n));
    std::size_t cum = 0;
    for (int nidx = 0; nidx < max_n; ++nidx) {
      cum += first_match[nidx];
      curve.recall[nidx] = static_cast<double>(cum) / static_cast<double>(total_gts);
    }
    curve.auc_percent = auc(curve.recall);
    curve.n_at_75 = n_at_recall(curve.recall, 0.75);
    curve.final_recall = curve.recall.back();
    report.curves.push_back(std::move(curve));
  }
  return report;
}

void write_report_csv(const std::string& path, const EvalReport& report,
                      const std::vector<std::string>& comment_lines) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(Err::FileNotFound, "cannot open " + path + " for writing");
  for (const auto& line : comment_lines) out << "# " << line << '\n';
  char buf[128];
  out << "iou,n,recall\n";
  for (const auto& c : report.curves)
    for (std::size_t i = 0; i < c.recall.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%g,%zu,%.17g\n", c.iou_thr, i + 1, c.recall[i]);
      out << buf;
    }
  out << "iou,auc,n_at_75,recall_at_max\n";
  for (const auto& c : report.curves) {
    std::snprintf(buf, sizeof buf, "%g,%.17g,%s,%.17g\n", c.iou_thr, c.auc_percent,
                  format_n_at(c.n_at_75).c_str(), c.final_recall);
    out << buf;
  }
}

EvalReport read_report_csv(const std::string& path) {
  if (!std::filesystem::exists(path)) fail(Err::FileNotFound, path);
  std::ifstream in(path);
  if (!in) fail(Err::FileNotFound, path);

  EvalReport report;
  report.max_n = 0;
  std::string line;
  bool header_seen = false, summary = false;
  while (std::getline(in, line)) {
    const std::string t = trimmed(line);
    if (t.empty() || t[0] == '#') continue;
    if (!header_seen) {
      if (t != "iou,n,recall") fail(Err::ParseError, path + ": unexpected header");
      header_seen = true;
      continue;
    }
    if (t == "iou,auc,n_at_75,recall_at_max") {
      summary = true;
      continue;
    }
    const auto cols = split_csv(t);
    if (!summary) {
      if (cols.size() != 3) fail(Err::ParseError, path + ": bad curve row '" + t + "'");
      const double thr = parse_real(cols[0], path);
      const int n = parse_int(cols[1], path);
      const double rec = parse_real(cols[2], path);
      auto it = std::find_if(report.curves.begin(), report.curves.end(),
                             [thr](const EvalCurve& c) { return c.iou_thr == thr; });
      if (it == report.curves.end()) {
        report.curves.push_back(EvalCurve{});
        it = std::prev(report.curves.end());
        it->iou_thr = thr;
      }
      if (n != static_cast<int>(it->recall.size()) + 1)
        fail(Err::ParseError, path + ": non-contiguous N sequence");
      it->recall.push_back(rec);
      report.max_n = std::max(report.max_n, n);
    } else {
      if (cols.size() != 4) fail(Err::ParseError, path + ": bad summary row '" + t + "'");
      const double thr = parse_real(cols[0], path);
      auto it = std::find_if(report.curves.begin(), report.curves.end(),
                             [thr](const EvalCurve& c) { return c.iou_thr == thr; });
      if (it == report.curves.end())
        fail(Err::ParseError, path + ": summary for unknown threshold");
      it->auc_percent = parse_real(cols[1], path);
      it->n_at_75 = trimmed(cols[2]) == "-"
                        ? std::nullopt
                        : std::optional<int>(parse_int(cols[2], path));
      it->final_recall = parse_real(cols[3], path);
    }
  }
  if (!header_seen) fail(Err::ParseError, path + ": missing header");
  return report;
}

void write_curves_csv(const std::string& path, const EvalReport& report,
                      const std::vector<std::string>& comment_lines) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(Err::FileNotFound, "cannot open " + path + " for writing");
  for (const auto& line : comment_lines) out << "# " << line << '\n';
  out << "series,iou,n,recall\n";
  char buf[128];
  for (const auto& c : report.curves)
    for (std::size_t i = 0; i < c.recall.size(); ++i) {
      std::snprintf(buf, sizeof buf, "iou=%g,%g,%zu,%.17g\n", c.iou_thr, c.iou_thr,
                    i + 1, c.recall[i]);
      out << buf;
    }
}

}  // namespace salprop
