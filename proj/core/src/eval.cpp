#include "qrefine/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <limits>
#include <thread>

#include "qrefine/config_file.hpp"
#include "qrefine/error.hpp"

namespace qrefine {

double region_cell_score(const ImageBuffer& img, const InpaintMask& truth, const ScorerConfig& cfg) {
  if (!truth.same_shape(img)) throw Error(ErrorKind::kShape, "truth mask differs from image shape");
  const CellGrid cells = score_cells(img, cfg);
  const auto rects = split_patches(img.height(), img.width(), cfg.cells_per_side());
  double full_sum = 0.0, half_sum = 0.0;
  int full = 0, half = 0;
  for (std::size_t k = 0; k < rects.size(); ++k) {
    const PatchRect& r = rects[k];
    int covered = 0;
    for (int y = r.row0; y < r.row1; ++y) {
      for (int x = r.col0; x < r.col1; ++x) covered += truth.at(y, x) != 0.0f ? 1 : 0;
    }
    const int area = r.height() * r.width();
    const double score = cells.values()[k];
    if (covered == area) {
      full_sum += score;
      ++full;
    }
    if (2 * covered >= area) {
      half_sum += score;
      ++half;
    }
  }
  if (full > 0) return full_sum / full;
  if (half > 0) return half_sum / half;
  return 0.0;
}

namespace {

EvalRecord evaluate_one(const CorpusImage& item, std::uint64_t index, const RefineConfig& cfg,
                        const Enhancer& backend, const std::string& prompt, const std::string& hash) {
  EvalRecord rec;
  rec.image_id = item.id;
  rec.config_hash = hash;
  const CellAnalysis before = analyze_cells(item.image, cfg.scorer);
  RefineResult result = run_pipeline(item.image, prompt, cfg, backend, PipelineOptions{.image_index = index});
  const CellAnalysis after = analyze_cells(result.image, cfg.scorer);
  rec.q_before = result.report.q_initial;
  rec.q_after = result.report.q_final;
  rec.sharpness_before = before.sharpness.mean();
  rec.sharpness_after = after.sharpness.mean();
  rec.noise_before = before.noise_sigma.mean();
  rec.noise_after = after.noise_sigma.mean();
  for (const auto& s : result.report.stages) {
    rec.stage_delta[static_cast<std::size_t>(s.stage - 1)] = s.q_after - s.q_before;
  }
  if (item.truth) {
    rec.has_truth = true;
    rec.region_before = region_cell_score(item.image, *item.truth, cfg.scorer);
    rec.region_after = region_cell_score(result.image, *item.truth, cfg.scorer);
  }
  rec.report = std::move(result.report);
  return rec;
}

}  // namespace

std::vector<EvalRecord> evaluate_corpus(const std::vector<CorpusImage>& corpus, const RefineConfig& cfg,
                                        const Enhancer& backend, const EvalOptions& options) {
  cfg.validate();
  const std::string hash = config_hash(cfg);
  std::vector<EvalRecord> records(corpus.size());
  std::vector<std::exception_ptr> errors(corpus.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t k = next++; k < corpus.size(); k = next++) {
      try {
        records[k] = evaluate_one(corpus[k], k, cfg, backend, options.prompt, hash);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };

  int jobs = options.jobs > 0 ? options.jobs : static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::clamp(jobs, 1, std::max(1, static_cast<int>(corpus.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return records;
}

EvalSummary summarize(const std::vector<EvalRecord>& records) {
  EvalSummary s;
  s.images = records.size();
  if (records.empty()) return s;
  s.worst_q_change = std::numeric_limits<double>::infinity();
  std::size_t stage2_runs = 0;
  for (const auto& r : records) {
    s.q_before += r.q_before;
    s.q_after += r.q_after;
    s.sharpness_before += r.sharpness_before;
    s.sharpness_after += r.sharpness_after;
    s.noise_before += r.noise_before;
    s.noise_after += r.noise_after;
    for (std::size_t k = 0; k < 3; ++k) s.stage_delta[k] += r.stage_delta[k];
    if (r.has_truth) {
      ++s.truth_images;
      s.region_before += r.region_before;
      s.region_after += r.region_after;
    }
    if (const StageRecord* st = r.report.find(2)) {
      ++stage2_runs;
      s.mean_mask_fraction += st->mask_fraction;
    }
    s.worst_q_change = std::min(s.worst_q_change, r.q_after - r.q_before);
  }
  const double n = static_cast<double>(records.size());
  s.q_before /= n;
  s.q_after /= n;
  s.sharpness_before /= n;
  s.sharpness_after /= n;
  s.noise_before /= n;
  s.noise_after /= n;
  for (double& d : s.stage_delta) d /= n;
  if (s.truth_images > 0) {
    s.region_before /= static_cast<double>(s.truth_images);
    s.region_after /= static_cast<double>(s.truth_images);
  }
  if (stage2_runs > 0) s.mean_mask_fraction /= static_cast<double>(stage2_runs);
  return s;
}

std::string eval_stage_csv(const std::vector<EvalRecord>& records, const std::string& backend_label,
                           ReportFormat format) {
  std::string out(kStageCsvHeader);
  out += '\n';
  double millis = 0.0;
  for (const auto& r : records) {
    out += stage_csv_rows(r.image_id, r.report, format);
    for (const auto& st : r.report.stages) millis += st.millis;
  }
  const EvalSummary s = summarize(records);
  out += "summary,all," + std::to_string(s.images) + ",," + fixed6(s.mean_mask_fraction) + "," +
         fixed6(s.q_before) + "," + fixed6(s.q_after) + "," + csv_field(backend_label) + ",";
  if (format.include_timing) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", millis);
    out += buf;
  } else {
    out += "0";
  }
  out += '\n';
  return out;
}

std::string eval_records_csv(const std::vector<EvalRecord>& records) {
  std::string out =
      "image_id,config_hash,q_before,q_after,sharpness_before,sharpness_after,noise_before,noise_after,"
      "delta_stage1,delta_stage2,delta_stage3,region_score_before,region_score_after\n";
  auto row = [&out](const std::string& id, const std::string& hash, double qb, double qa, double sb, double sa,
                    double nb, double na, const std::array<double, 3>& d, bool truth, double rb, double ra) {
    out += csv_field(id) + "," + hash + "," + fixed6(qb) + "," + fixed6(qa) + "," + fixed6(sb) + "," +
           fixed6(sa) + "," + fixed6(nb) + "," + fixed6(na) + "," + fixed6(d[0]) + "," + fixed6(d[1]) + "," +
           fixed6(d[2]) + "," + (truth ? fixed6(rb) : "") + "," + (truth ? fixed6(ra) : "") + "\n";
  };
  for (const auto& r : records) {
    row(r.image_id, r.config_hash, r.q_before, r.q_after, r.sharpness_before, r.sharpness_after, r.noise_before,
        r.noise_after, r.stage_delta, r.has_truth, r.region_before, r.region_after);
  }
  const EvalSummary s = summarize(records);
  row("mean", records.empty() ? std::string() : records.front().config_hash, s.q_before, s.q_after,
      s.sharpness_before, s.sharpness_after, s.noise_before, s.noise_after, s.stage_delta, s.truth_images > 0,
      s.region_before, s.region_after);
  return out;
}

std::vector<StageSet> ablation_combinations() {
  return {StageSet{true, true, true},   StageSet{true, true, false}, StageSet{false, true, true},
          StageSet{true, false, true},  StageSet{false, true, false}, StageSet{false, false, true}};
}

std::vector<AblationRow> run_ablation(const std::vector<CorpusImage>& corpus, const RefineConfig& cfg,
                                      const Enhancer& backend, const EvalOptions& options) {
  std::vector<AblationRow> rows;
  for (const StageSet& stages : ablation_combinations()) {
    AblationRow row;
    row.stages = stages;
    RefineConfig variant = cfg;
    variant.stages_enabled = stages;
    try {
      variant.validate();
      row.valid = true;
    } catch (const Error& e) {
      row.note = e.what();
    }
    if (row.valid) row.summary = summarize(evaluate_corpus(corpus, variant, backend, options));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::string out =
      "stages,valid,images,mean_q_before,mean_q_after,mean_region_before,mean_region_after,note\n";
  for (const auto& r : rows) {
    out += csv_field(r.stages.to_string()) + "," + (r.valid ? "1" : "0") + ",";
    if (r.valid) {
      out += std::to_string(r.summary.images) + "," + fixed6(r.summary.q_before) + "," +
             fixed6(r.summary.q_after) + "," + fixed6(r.summary.region_before) + "," +
             fixed6(r.summary.region_after) + ",";
    } else {
      out += ",,,,,";
    }
    out += csv_field(r.note) + "\n";
  }
  return out;
}

}  // namespace qrefine
