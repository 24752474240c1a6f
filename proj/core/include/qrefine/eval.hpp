#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "qrefine/degrade.hpp"
#include "qrefine/enhancer.hpp"
#include "qrefine/report.hpp"
#include "qrefine/stages.hpp"

namespace qrefine {

/// Before/after measurements for one corpus image.
struct EvalRecord {
  std::string image_id;
  std::string config_hash;
  double q_before = 0.0;
  double q_after = 0.0;
  double sharpness_before = 0.0;  // mean cell sharpness term
  double sharpness_after = 0.0;
  double noise_before = 0.0;  // mean cell Immerkær σ
  double noise_after = 0.0;
  std::array<double, 3> stage_delta{};  // q_after − q_before per stage, 0 if not run
  bool has_truth = false;
  double region_before = 0.0;  // mean cell score inside the ground-truth mask
  double region_after = 0.0;
  StageReport report;
};

struct EvalSummary {
  std::size_t images = 0;
  double q_before = 0.0;
  double q_after = 0.0;
  double sharpness_before = 0.0;
  double sharpness_after = 0.0;
  double noise_before = 0.0;
  double noise_after = 0.0;
  std::array<double, 3> stage_delta{};
  std::size_t truth_images = 0;
  double region_before = 0.0;
  double region_after = 0.0;
  double mean_mask_fraction = 0.0;  // stage-2 mask coverage over images that ran stage 2
  double worst_q_change = 0.0;      // min over images of q_after − q_before
};

struct EvalOptions {
  std::string prompt;
  int jobs = 1;  // worker threads; <= 0 selects the hardware concurrency
};

/// Mean score of the cells lying entirely inside `truth` (falls back to
/// cells at least half covered when none is fully covered).
double region_cell_score(const ImageBuffer& img, const InpaintMask& truth, const ScorerConfig& cfg);

/// Runs the pipeline over every image with a bounded worker pool. Records
/// come back in corpus order; image k uses noise stream index k.
std::vector<EvalRecord> evaluate_corpus(const std::vector<CorpusImage>& corpus, const RefineConfig& cfg,
                                        const Enhancer& backend, const EvalOptions& options = {});

EvalSummary summarize(const std::vector<EvalRecord>& records);

/// Stage-report CSV (kStageCsvHeader) for every image plus one summary
/// row with image_id "summary" and stage "all".
std::string eval_stage_csv(const std::vector<EvalRecord>& records, const std::string& backend_label,
                           ReportFormat format = {});

/// One EvalRecord per line plus a "mean" row.
std::string eval_records_csv(const std::vector<EvalRecord>& records);

struct AblationRow {
  StageSet stages;
  bool valid = false;
  std::string note;
  EvalSummary summary;
};

/// The six stage combinations {1,2,3},{1,2},{2,3},{1,3},{2},{3}; {1,3}
/// is reported invalid and not run.
std::vector<StageSet> ablation_combinations();

std::vector<AblationRow> run_ablation(const std::vector<CorpusImage>& corpus, const RefineConfig& cfg,
                                      const Enhancer& backend, const EvalOptions& options = {});

std::string ablation_csv(const std::vector<AblationRow>& rows);

}  // namespace qrefine
