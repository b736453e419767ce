#include <omp.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "salprop/bayes.hpp"
#include "salprop/crf.hpp"
#include "salprop/edges.hpp"
#include "salprop/errors.hpp"
#include "salprop/evalkit.hpp"
#include "salprop/pipeline.hpp"
#include "salprop/proposals.hpp"

namespace fs = std::filesystem;
using namespace salprop;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitData = 3;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Err::FileNotFound:
    case Err::DecodeError:
      return kExitIo;
    default:
      return kExitData;
  }
}

// Every output file goes through a temp + rename so readers never observe a
// half-written CSV.
template <typename WriteFn>
void write_atomic(const std::string& path, WriteFn&& write_fn) {
  const std::string tmp = path + ".tmp";
  write_fn(tmp);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(Err::FileNotFound, "cannot move " + tmp + " to " + path);
}

void attach_config_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--alpha", cfg.alpha, "Adjacent-window IoU target")
      ->capture_default_str();
  cmd->add_option("--nms-theta", cfg.nms_theta, "Proposal NMS IoU cut-off")
      ->capture_default_str();
  cmd->add_option("--max-n", cfg.max_n, "Proposals kept after NMS")
      ->capture_default_str();
  cmd->add_option("--pre-nms-top-k", cfg.pre_nms_top_k, "Windows refined before NMS")
      ->capture_default_str();
  cmd->add_option("--ltp-threshold", cfg.ltp_threshold, "LTP intensity threshold T")
      ->capture_default_str();
  cmd->add_option("--k", cfg.k, "Texture filter-bank base scale")
      ->capture_default_str();
  cmd->add_option("--patch-radius", cfg.patch_radius, "Texture patch radius")
      ->capture_default_str();
  cmd->add_option("--sigma", cfg.sigma, "Detector / gradient Gaussian scale")
      ->capture_default_str();
  cmd->add_option("--beta", cfg.beta, "Salient-set strength fraction")
      ->capture_default_str();
  cmd->add_option("--min-len", cfg.min_len, "Minimum edgelet pixel count (exclusive)")
      ->capture_default_str();
  cmd->add_option("--min-mag", cfg.min_mag, "Minimum edge magnitude (exclusive)")
      ->capture_default_str();
  cmd->add_option("--link-radius", cfg.link_radius, "Graph link endpoint distance")
      ->capture_default_str();
  cmd->add_option("--max-degree", cfg.max_degree, "Graph degree cap")
      ->capture_default_str();
  cmd->add_option("--bp-max-iters", cfg.bp_max_iters, "Belief propagation iteration cap")
      ->capture_default_str();
  cmd->add_option("--bp-damping", cfg.bp_damping, "Belief propagation damping")
      ->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "Texture sampling / training shuffle seed")
      ->capture_default_str();
  cmd->add_option("--jobs", cfg.jobs, "Worker threads (0 = library default)")
      ->capture_default_str();
}

void apply_runtime_config(RunConfig& cfg) {
  if (const char* env = std::getenv("SALPROP_SEED")) {
    try {
      cfg.seed = static_cast<std::uint32_t>(std::stoul(env));
    } catch (const std::exception&) {
      fail(Err::BadValue, std::string("SALPROP_SEED is not a number: ") + env);
    }
  }
  if (cfg.jobs > 0) omp_set_num_threads(cfg.jobs);
  cfg.validate();
}

std::string config_comment(const RunConfig& c) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "config: alpha=%g nms-theta=%g max-n=%d pre-nms-top-k=%d "
                "ltp-threshold=%g k=%g patch-radius=%d sigma=%g beta=%g min-len=%d "
                "min-mag=%g link-radius=%g max-degree=%d bp-max-iters=%d "
                "bp-damping=%g C=%g max-passes=%d gap-tol=%g seed=%u jobs=%d",
                c.alpha, c.nms_theta, c.max_n, c.pre_nms_top_k, c.ltp_threshold, c.k,
                c.patch_radius, c.sigma, c.beta, c.min_len, c.min_mag, c.link_radius,
                c.max_degree, c.bp_max_iters, c.bp_damping, c.C, c.max_passes,
                c.gap_tol, c.seed, c.jobs);
  return buf;
}

bool has_extension(const fs::path& p, std::initializer_list<const char*> exts) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const char* want : exts)
    if (e == want) return true;
  return false;
}

std::vector<fs::path> sorted_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) fail(Err::FileNotFound, dir + " is not a directory");
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file()) out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  return out;
}

int run_detect(const std::string& image_path, const std::string& edges_path,
               const std::string& model_path, const std::string& out_path,
               RunConfig cfg) {
  apply_runtime_config(cfg);
  const CrfModel model = load_model(model_path);
  const RgbImage image = load_image(image_path);
  std::optional<EdgeMap> edges;
  if (!edges_path.empty()) edges = read_edge_map(edges_path);

  const ProposalSet set = generate_proposals(image, edges, model, cfg);
  std::vector<std::string> comments = {
      "salprop detect --image " + image_path +
          (edges_path.empty() ? "" : " --edges " + edges_path) + " --model " +
          model_path,
      config_comment(cfg)};
  if (set.no_edgelets) comments.push_back("note: image yielded no edgelets");
  write_atomic(out_path,
               [&](const std::string& p) { write_proposals_csv(p, set, comments); });
  std::cout << set.proposals.size() << " proposals -> " << out_path << "\n";
  return 0;
}

int run_train(const std::string& images_dir, const std::string& masks_dir,
              const std::string& model_out, RunConfig cfg) {
  apply_runtime_config(cfg);

  std::map<std::string, fs::path> masks;
  for (const auto& p : sorted_dir(masks_dir))
    if (has_extension(p, {".png", ".jpg", ".jpeg", ".bmp"}))
      masks[p.stem().string()] = p;

  std::vector<TrainingSample> samples;
  int paired = 0;
  for (const auto& p : sorted_dir(images_dir)) {
    if (!has_extension(p, {".png", ".jpg", ".jpeg", ".bmp"})) continue;
    const auto it = masks.find(p.stem().string());
    if (it == masks.end()) {
      std::cerr << "warning: no mask for " << p.filename().string() << ", skipped\n";
      continue;
    }
    ++paired;
    const RgbImage image = load_image(p.string());
    const BinaryMask mask = load_mask(it->second.string());
    if (auto sample = make_training_sample(image, mask, cfg))
      samples.push_back(std::move(*sample));
    else
      std::cerr << "warning: " << p.filename().string() << " yielded no edgelets\n";
  }
  if (paired == 0) fail(Err::EmptyTrainingSet, "no image/mask pairs in " + images_dir);
  if (samples.empty())
    fail(Err::EmptyTrainingSet, "no pair produced a usable training graph");

  TrainOptions opts;
  opts.C = cfg.C;
  opts.max_passes = cfg.max_passes;
  opts.gap_tol = cfg.gap_tol;
  opts.seed = cfg.seed;
  opts.bp_max_iters = cfg.bp_max_iters;
  opts.bp_damping = cfg.bp_damping;
  const TrainResult result = train_bcfw(samples, opts);

  write_atomic(model_out,
               [&](const std::string& p) { save_model(result.model, p); });
  std::printf("trained on %zu graphs in %d passes\n", samples.size(), result.passes);
  std::printf("final duality gap: %.6g\n", result.final_gap);
  std::printf("training hamming accuracy: %.4f\n", result.hamming_accuracy);
  std::printf("model -> %s\n", model_out.c_str());
  return 0;
}

int run_eval(const std::string& proposals_dir, const std::string& annotations_dir,
             const std::string& iou_spec, int max_n, const std::string& out_path,
             unsigned int seed_unused) {
  (void)seed_unused;
  std::vector<double> thresholds;
  std::stringstream ss(iou_spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      thresholds.push_back(std::stod(tok));
    } catch (const std::exception&) {
      fail(Err::BadValue, "bad IoU threshold '" + tok + "'");
    }
  }
  if (thresholds.empty()) fail(Err::BadValue, "no IoU thresholds given");
  if (max_n < 1) fail(Err::BadValue, "max-n must be at least 1");

  std::map<std::string, std::vector<Proposal>> proposals;
  for (const auto& p : sorted_dir(proposals_dir))
    if (has_extension(p, {".csv"}))
      proposals[p.stem().string()] = read_proposals_csv(p.string());

  std::map<std::string, std::vector<GroundTruthBox>> annotations;
  for (const auto& p : sorted_dir(annotations_dir)) {
    std::vector<GroundTruthBox> boxes;
    if (has_extension(p, {".xml"}))
      boxes = parse_voc_xml(p.string());
    else if (has_extension(p, {".csv"}))
      boxes = parse_gt_csv(p.string());
    else
      continue;
    for (auto& gt : boxes) annotations[gt.image_id].push_back(std::move(gt));
  }
  if (annotations.empty())
    fail(Err::NoGroundTruth, "no annotations in " + annotations_dir);

  const EvalReport report = evaluate(proposals, annotations, thresholds, max_n);
  const std::vector<std::string> comments = {
      "salprop eval --proposals " + proposals_dir + " --annotations " +
          annotations_dir + " --iou " + iou_spec + " --max-n " + std::to_string(max_n)};
  write_atomic(out_path,
               [&](const std::string& p) { write_report_csv(p, report, comments); });
  for (const auto& c : report.curves)
    std::printf("iou %.2f: auc %.2f%%, N@75%% = %s, recall@%d = %.4f\n", c.iou_thr,
                c.auc_percent, format_n_at(c.n_at_75).c_str(), report.max_n,
                c.final_recall);
  std::cout << "report -> " << out_path << "\n";
  return 0;
}

int run_curves(const std::string& report_path, const std::string& out_path) {
  const EvalReport report = read_report_csv(report_path);
  const std::vector<std::string> comments = {"salprop curves --report " + report_path};
  write_atomic(out_path,
               [&](const std::string& p) { write_curves_csv(p, report, comments); });
  std::cout << report.curves.size() << " series -> " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Salient object proposals: edge saliency + CRF + window ranking"};
  app.require_subcommand(1);

  RunConfig cfg;

  std::string image_path, edges_path, model_path, out_path;
  auto* detect = app.add_subcommand("detect", "Rank object proposals for one image");
  detect->add_option("--image", image_path, "Input image (PNG/JPEG)")->required();
  detect->add_option("--edges", edges_path, "Optional EMAP edge map to ingest");
  detect->add_option("--model", model_path, "Trained model file")->required();
  detect->add_option("--out", out_path, "Output proposals CSV")->required();
  attach_config_flags(detect, cfg);

  std::string images_dir, masks_dir, model_out;
  auto* train = app.add_subcommand("train", "Fit CRF weights from image/mask pairs");
  train->add_option("--images", images_dir, "Directory of training images")->required();
  train->add_option("--masks", masks_dir, "Directory of binary masks (same stems)")
      ->required();
  train->add_option("--model-out", model_out, "Where to write the model")->required();
  train->add_option("--C", cfg.C, "SSVM regularization trade-off")
      ->capture_default_str();
  train->add_option("--max-passes", cfg.max_passes, "Training pass cap")
      ->capture_default_str();
  train->add_option("--gap-tol", cfg.gap_tol, "Duality-gap stopping tolerance")
      ->capture_default_str();
  attach_config_flags(train, cfg);

  std::string proposals_dir, annotations_dir, report_out, iou_spec = "0.5";
  int eval_max_n = 1000;
  auto* eval = app.add_subcommand("eval", "Score proposal sets against ground truth");
  eval->add_option("--proposals", proposals_dir, "Directory of per-image proposal CSVs")
      ->required();
  eval->add_option("--annotations", annotations_dir,
                   "Directory of XML/CSV annotations")
      ->required();
  eval->add_option("--iou", iou_spec, "Comma-separated IoU thresholds")
      ->capture_default_str();
  eval->add_option("--max-n", eval_max_n, "Curve length (top-N cap)")
      ->capture_default_str();
  eval->add_option("--out", report_out, "Output report CSV")->required();

  std::string report_path, curves_out;
  auto* curves = app.add_subcommand("curves", "Export plot-ready recall curves");
  curves->add_option("--report", report_path, "Report CSV from eval")->required();
  curves->add_option("--out", curves_out, "Output long-format CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*detect) return run_detect(image_path, edges_path, model_path, out_path, cfg);
    if (*train) return run_train(images_dir, masks_dir, model_out, cfg);
    if (*eval)
      return run_eval(proposals_dir, annotations_dir, iou_spec, eval_max_n, report_out,
                      cfg.seed);
    if (*curves) return run_curves(report_path, curves_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
