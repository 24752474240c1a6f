#include "qrefine_cli/commands.hpp"

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>

#include "qrefine/backend_client.hpp"
#include "qrefine/codec.hpp"
#include "qrefine/config_file.hpp"
#include "qrefine/degrade.hpp"
#include "qrefine/enhancers.hpp"
#include "qrefine/error.hpp"
#include "qrefine/eval.hpp"
#include "qrefine/iqa.hpp"
#include "qrefine/quality_field.hpp"
#include "qrefine/report.hpp"
#include "qrefine/stages.hpp"
#include "qrefine/synthetic.hpp"

namespace qrefine::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kBackendEnv = "QREFINE_BACKEND_URL";

// Raised while turning flags into a configuration; reported with usage text.
struct UsageError {
  std::string message;
};

struct RefineArgs {
  std::string input;
  std::string output;
  std::string prompt;
  std::string config;
  std::string stages;
  std::string backend;
  std::uint64_t seed = 0;
  std::string report;
  std::string map;
  bool timings = false;
};

struct MapArgs {
  std::string input;
  std::string output;
  std::string config;
  bool flattened = false;
  int n = 0;
};

struct DegradeArgs {
  std::string input;
  int synthetic = 0;
  std::string output;
  std::uint64_t seed = 0;
  std::string spec;
  int size = 256;
};

struct EvalArgs {
  std::string corpus;
  std::string output;
  std::string config;
  std::string stages;
  std::string backend;
  std::uint64_t seed = 0;
  int jobs = 0;
  bool ablation = false;
  std::string records;
  std::string prompt;
  bool timings = false;
};

bool has_suffix(std::string_view path, std::string_view suffix) {
  if (path.size() < suffix.size()) return false;
  auto tail = path.substr(path.size() - suffix.size());
  for (std::size_t i = 0; i < suffix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(tail[i])) != suffix[i]) return false;
  }
  return true;
}

void write_text(const fs::path& path, std::string_view text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text(const fs::path& path) {
  Bytes bytes = read_file(path);
  return {bytes.begin(), bytes.end()};
}

std::string resolve_backend(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kBackendEnv); env != nullptr && *env != '\0') return env;
  return "builtin";
}

std::unique_ptr<Enhancer> make_backend(const std::string& spec) {
  if (spec == "builtin") return std::make_unique<BuiltinBackend>();
  BackendEndpoint endpoint;
  endpoint.base_url = spec;
  return std::make_unique<RemoteBackend>(std::move(endpoint));
}

// Config file first, then the flags that override it.
RefineConfig build_config(const std::string& config_path, const std::string& stages, const CLI::Option* seed_opt,
                          std::uint64_t seed) {
  RefineConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config_file(config_path);
    if (!stages.empty()) cfg.stages_enabled = StageSet::parse(stages);
    if (seed_opt->count() > 0) cfg.seed = seed;
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError{e.what()};
  }
  return cfg;
}

std::unique_ptr<Enhancer> build_backend(const std::string& flag) {
  try {
    return make_backend(resolve_backend(flag));
  } catch (const Error& e) {
    throw UsageError{e.what()};
  }
}

int cmd_refine(const RefineArgs& a, const CLI::Option* seed_opt, std::ostream& out) {
  const RefineConfig cfg = build_config(a.config, a.stages, seed_opt, a.seed);
  const auto backend = build_backend(a.backend);
  const ReportFormat format{.include_timing = a.timings};
  const std::string image_id = fs::path(a.input).stem().string();

  const ImageBuffer input = decode_image(read_file(a.input));
  RefineResult result;
  try {
    result = run_pipeline(input, a.prompt, cfg, *backend);
  } catch (const PipelineError& e) {
    if (!a.report.empty()) {
      const auto& partial = e.partial_report();
      write_text(a.report, has_suffix(a.report, ".csv") ? stage_csv(image_id, partial, format)
                                                        : format_report_text(image_id, partial, format));
    }
    throw;
  }

  write_file(a.output, encode_png(result.image));
  if (!a.report.empty()) {
    write_text(a.report, has_suffix(a.report, ".csv") ? stage_csv(image_id, result.report, format)
                                                      : format_report_text(image_id, result.report, format));
  }
  if (!a.map.empty()) {
    if (has_suffix(a.map, ".png")) {
      write_file(a.map, encode_gray_png(result.flattened));
    } else {
      write_text(a.map, format_grid(result.quality_map));
    }
  }
  out << image_id << ": q " << fixed6(result.report.q_initial) << " -> " << fixed6(result.report.q_final)
      << " (backend " << backend->label() << ")\n";
  return kExitOk;
}

int cmd_map(const MapArgs& a, std::ostream& out) {
  ScorerConfig scorer_cfg;
  try {
    if (!a.config.empty()) scorer_cfg = load_config_file(a.config).scorer;
    if (a.n > 0) scorer_cfg.n = a.n;
    scorer_cfg.validate();
  } catch (const Error& e) {
    throw UsageError{e.what()};
  }

  const ImageBuffer img = decode_image(read_file(a.input));
  const QualityMap map = ClassicalScorer(scorer_cfg).quality_map(img);
  if (a.flattened) {
    write_file(a.output, encode_gray_png(flatten_bicubic(map, img.height(), img.width())));
  } else {
    write_text(a.output, format_grid(map));
  }
  out << "q " << fixed6(global_quality(map)) << " (" << map.n() << "x" << map.n() << ")\n";
  return kExitOk;
}

int cmd_degrade(const DegradeArgs& a, std::ostream& out) {
  std::optional<DegradeSpec> fixed_spec;
  try {
    if (!a.spec.empty()) {
      fixed_spec = parse_degrade_spec(read_text(a.spec));
      fixed_spec->validate();
    }
  } catch (const Error& e) {
    throw UsageError{e.what()};
  }
  if (!a.input.empty()) {
    std::error_code ec;
    if (fs::equivalent(a.input, a.output, ec)) throw UsageError{"--output must differ from --input"};
  }

  std::vector<SyntheticSample> samples;
  if (a.synthetic > 0 && !fixed_spec) {
    samples = build_synthetic_corpus(a.seed, a.synthetic, a.size);
  } else {
    std::vector<CorpusImage> clean;
    if (a.synthetic > 0) {
      for (int k = 0; k < a.synthetic; ++k) {
        char id[32];
        std::snprintf(id, sizeof id, "img_%03d", k);
        clean.push_back({id, synthesize_clean(mix_seed(a.seed, 2 * static_cast<std::uint64_t>(k)), a.size), {}});
      }
    } else {
      clean = load_corpus(a.input);
    }
    for (std::size_t k = 0; k < clean.size(); ++k) {
      DegradeSpec spec = fixed_spec ? *fixed_spec : random_degrade_spec(mix_seed(a.seed, 2 * k + 1));
      DegradedImage degraded = apply_degradation(clean[k].image, spec);
      samples.push_back({clean[k].id, std::move(clean[k].image), std::move(spec), std::move(degraded)});
    }
  }

  write_corpus(a.output, samples);
  for (const auto& s : samples) write_text(fs::path(a.output) / (s.id + ".spec"), format_degrade_spec(s.spec));
  out << "wrote " << samples.size() << " degraded images to " << a.output << "\n";
  return kExitOk;
}

int cmd_eval(const EvalArgs& a, const CLI::Option* seed_opt, std::ostream& out) {
  const RefineConfig cfg = build_config(a.config, a.stages, seed_opt, a.seed);
  const auto backend = build_backend(a.backend);
  const EvalOptions options{.prompt = a.prompt, .jobs = a.jobs};

  const std::vector<CorpusImage> corpus = load_corpus(a.corpus);
  if (corpus.empty()) throw Error(ErrorKind::kIo, "corpus " + a.corpus + " contains no images");

  if (a.ablation) {
    const auto rows = run_ablation(corpus, cfg, *backend, options);
    write_text(a.output, ablation_csv(rows));
    for (const auto& r : rows) {
      out << "{" << r.stages.to_string() << "} ";
      if (r.valid) {
        out << "q " << fixed6(r.summary.q_before) << " -> " << fixed6(r.summary.q_after) << "\n";
      } else {
        out << "invalid: " << r.note << "\n";
      }
    }
    return kExitOk;
  }

  const auto records = evaluate_corpus(corpus, cfg, *backend, options);
  write_text(a.output, eval_stage_csv(records, backend->label(), ReportFormat{.include_timing = a.timings}));
  if (!a.records.empty()) write_text(a.records, eval_records_csv(records));
  const EvalSummary s = summarize(records);
  out << s.images << " images, mean q " << fixed6(s.q_before) << " -> " << fixed6(s.q_after) << ", worst change "
      << fixed6(s.worst_q_change) << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quality-aware refinement of generated images", "qrefine"};
  app.require_subcommand(1);

  RefineArgs refine;
  auto* refine_cmd = app.add_subcommand("refine", "Refine one image through the staged pipeline");
  refine_cmd->add_option("--input", refine.input, "Input PNG or JPEG")->required()->check(CLI::ExistingFile);
  refine_cmd->add_option("--output", refine.output, "Refined PNG")->required();
  refine_cmd->add_option("--prompt", refine.prompt, "Generation prompt")->required();
  refine_cmd->add_option("--config", refine.config, "key=value config file")->check(CLI::ExistingFile);
  refine_cmd->add_option("--stages", refine.stages, "Enabled stages, e.g. 1,2,3");
  refine_cmd->add_option("--backend", refine.backend, "Backend URL or 'builtin' (default $QREFINE_BACKEND_URL)");
  auto* refine_seed = refine_cmd->add_option("--seed", refine.seed, "Noise and backend seed");
  refine_cmd->add_option("--emit-report", refine.report, "Stage report (.csv for CSV, text otherwise)");
  refine_cmd->add_option("--emit-map", refine.map, "Quality map (.png for flattened heatmap, text grid otherwise)");
  refine_cmd->add_flag("--timings", refine.timings, "Record wall time in reports");

  MapArgs map;
  auto* map_cmd = app.add_subcommand("map", "Compute the patch quality map of an image");
  map_cmd->add_option("--input", map.input, "Input PNG or JPEG")->required()->check(CLI::ExistingFile);
  map_cmd->add_option("--output", map.output, "Text grid, or heatmap PNG with --flattened")->required();
  map_cmd->add_option("--config", map.config, "key=value config file")->check(CLI::ExistingFile);
  map_cmd->add_flag("--flattened", map.flattened, "Write the bicubic-flattened heatmap PNG");
  map_cmd->add_option("--n", map.n, "Patches per side")->check(CLI::Range(2, 4096));

  DegradeArgs degrade;
  auto* degrade_cmd = app.add_subcommand("degrade", "Write a degraded corpus with ground-truth masks");
  auto* degrade_in =
      degrade_cmd->add_option("--input", degrade.input, "Directory of clean images")->check(CLI::ExistingDirectory);
  auto* degrade_syn =
      degrade_cmd->add_option("--synthetic", degrade.synthetic, "Generate N synthetic clean images")
          ->check(CLI::Range(1, 100000));
  degrade_in->excludes(degrade_syn);
  degrade_cmd->add_option("--output", degrade.output, "Output directory")->required();
  degrade_cmd->add_option("--seed", degrade.seed, "Corpus seed");
  degrade_cmd->add_option("--spec", degrade.spec, "Degradation spec applied to every image")
      ->check(CLI::ExistingFile);
  degrade_cmd->add_option("--size", degrade.size, "Side of synthetic images")->check(CLI::Range(8, 8192));

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Refine a corpus and report before/after quality");
  eval_cmd->add_option("--corpus", eval.corpus, "Corpus directory")->required();
  eval_cmd->add_option("--output", eval.output, "Stage CSV, or ablation CSV with --ablation")->required();
  eval_cmd->add_option("--config", eval.config, "key=value config file")->check(CLI::ExistingFile);
  eval_cmd->add_option("--stages", eval.stages, "Enabled stages, e.g. 1,2,3");
  eval_cmd->add_option("--backend", eval.backend, "Backend URL or 'builtin' (default $QREFINE_BACKEND_URL)");
  auto* eval_seed = eval_cmd->add_option("--seed", eval.seed, "Noise and backend seed");
  eval_cmd->add_option("--jobs", eval.jobs, "Worker threads (0 = logical cores)")->check(CLI::NonNegativeNumber);
  eval_cmd->add_flag("--ablation", eval.ablation, "Run the stage-combination sweep");
  eval_cmd->add_option("--records", eval.records, "Per-image metrics CSV");
  eval_cmd->add_option("--prompt", eval.prompt, "Prompt used for every image");
  eval_cmd->add_flag("--timings", eval.timings, "Record wall time in the stage CSV");

  const CLI::App* active = &app;
  try {
    app.parse(argc, argv);
    for (const auto* sub : app.get_subcommands()) active = sub;
    if (active == degrade_cmd && degrade_in->count() == 0 && degrade_syn->count() == 0) {
      throw UsageError{"one of --input or --synthetic is required"};
    }

    if (active == refine_cmd) return cmd_refine(refine, refine_seed, out);
    if (active == map_cmd) return cmd_map(map, out);
    if (active == degrade_cmd) return cmd_degrade(degrade, out);
    return cmd_eval(eval, eval_seed, out);
  } catch (const CLI::CallForHelp&) {
    for (const auto* sub : app.get_subcommands()) active = sub;
    out << active->help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    for (const auto* sub : app.get_subcommands()) active = sub;
    err << "error: " << e.what() << "\n\n" << active->help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.message << "\n\n" << active->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace qrefine::cli
