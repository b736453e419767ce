#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "salprop/geometry.hpp"
#include "salprop/proposals.hpp"

namespace salprop {

struct GroundTruthBox {
  std::string image_id;
  Window box;
  std::string class_name;
};

// VOC-style annotation subset: object/name, object/difficult, object/bndbox
// with 1-based closed-interval xmin..xmax. Difficult objects are dropped.
std::vector<GroundTruthBox> parse_voc_xml(const std::string& path);

// Plain "image_id,x,y,w,h" rows; '#' lines and a header row are skipped.
std::vector<GroundTruthBox> parse_gt_csv(const std::string& path);

// Fraction of ground-truth boxes matched by at least one of the top-N
// proposals at IoU >= iou_thr. Throws NoGroundTruth on an empty gts list.
double recall_at_n(const std::vector<Proposal>& proposals,
                   const std::vector<GroundTruthBox>& gts, int N, double iou_thr);

// Trapezoidal area under recall-vs-N (curve[i] = recall at N = i+1),
// normalized so a constant 1.0 curve scores 100.
double auc(const std::vector<double>& curve);

// Smallest N reaching the target recall; nullopt when never reached.
std::optional<int> n_at_recall(const std::vector<double>& curve, double target = 0.75);

// Table rendering for N@recall: the count, or "-" when not reached.
std::string format_n_at(const std::optional<int>& n);

struct EvalCurve {
  double iou_thr = 0.5;
  std::vector<double> recall;  // recall at N = 1..max_n
  double auc_percent = 0.0;
  std::optional<int> n_at_75;
  double final_recall = 0.0;  // recall at max_n
};

struct EvalReport {
  int max_n = 1000;
  std::vector<EvalCurve> curves;  // one per IoU threshold
};

// Pooled GT-level recall across images; ids of the two maps must coincide.
// Throws IdMismatch / NoGroundTruth.
EvalReport evaluate(const std::map<std::string, std::vector<Proposal>>& proposals,
                    const std::map<std::string, std::vector<GroundTruthBox>>& annotations,
                    const std::vector<double>& iou_thresholds, int max_n = 1000);

// Report CSV: "iou,n,recall" rows, then a summary block
// "iou,auc,n_at_75,recall_at_max". comment_lines are emitted first.
void write_report_csv(const std::string& path, const EvalReport& report,
                      const std::vector<std::string>& comment_lines = {});
EvalReport read_report_csv(const std::string& path);

// Long-format plot data: "series,iou,n,recall", one series per IoU.
void write_curves_csv(const std::string& path, const EvalReport& report,
                      const std::vector<std::string>& comment_lines = {});

}  // namespace salprop
