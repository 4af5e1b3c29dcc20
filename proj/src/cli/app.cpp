// Copyright 2026 The DefectForge Authors
// SPDX-License-Identifier: Apache-2.0

#include "defectforge/cli/app.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "defectforge/augment/augment.hpp"
#include "defectforge/cli/experiment.hpp"
#include "defectforge/cli/json_config.hpp"
#include "defectforge/common/error.hpp"
#include "defectforge/common/seed.hpp"
#include "defectforge/datakit/formats.hpp"
#include "defectforge/datakit/micro.hpp"
#include "defectforge/detectkit/detector.hpp"
#include "defectforge/evalkit/metrics.hpp"
#include "defectforge/evalkit/sensitivity.hpp"
#include "defectforge/gpwgan/samplers.hpp"
#include "defectforge/gpwgan/synthesize.hpp"
#include "json.hpp"

#ifndef DEFECTFORGE_VERSION
#define DEFECTFORGE_VERSION "0.0.0"
#endif

namespace defectforge::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// Usage problems detected after parsing; reported with exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Global {
  std::uint64_t seed = 0;
  std::string out;
  bool force = false;
  int jobs = 0;
};

std::shared_ptr<spdlog::logger> logger() {
  static const auto log = [] {
    auto l = spdlog::stderr_color_mt("defectforge");
    l->set_pattern("[%l] %v");
    const char* env = std::getenv("DEFECTFORGE_LOG");
    l->set_level(env != nullptr ? spdlog::level::from_str(env) : spdlog::level::warn);
    return l;
  }();
  return log;
}

// Creates the output directory. An existing non-empty directory needs --force.
fs::path prepare_out(const Global& g) {
  if (g.out.empty()) throw UsageError("--out is required");
  const fs::path out(g.out);
  if (fs::exists(out)) {
    if (!fs::is_directory(out)) throw UsageError("--out " + g.out + " exists and is not a directory");
    if (!fs::is_empty(out) && !g.force)
      throw UsageError("output directory " + g.out + " is not empty (use --force to overwrite)");
  }
  fs::create_directories(out);
  return out;
}

// run.json: the resolved options of this invocation, their hash, seed and
// tool version. Contains nothing time-dependent, so reruns are identical.
void write_run_record(const fs::path& out, const CLI::App& app, const std::string& command,
                      const Global& g) {
  json config = json::parse(JsonConfig().to_config(&app, true, false, ""));
  config.erase("out");
  config.erase("force");
  config.erase("jobs");
  const std::string canonical = config.dump();
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical)));
  const json record = {{"tool", "defectforge"},
                       {"version", DEFECTFORGE_VERSION},
                       {"command", command},
                       {"seed", g.seed},
                       {"config_hash", hash},
                       {"config", config}};
  datakit::write_text(out / "run.json", record.dump(2) + "\n");
}

fs::path manifest_dir(const fs::path& path) {
  return fs::is_directory(path) ? path : path.parent_path();
}

datakit::Dataset load_manifest(const std::string& path, bool pixels) {
  datakit::Dataset ds = datakit::load_any(path);
  if (pixels) datakit::load_pixels(ds, manifest_dir(path));
  return ds;
}

// Rewrites image paths so they resolve from `to` instead of `from`.
datakit::Dataset relocate(datakit::Dataset ds, const fs::path& from, const fs::path& to) {
  const fs::path a = fs::weakly_canonical(fs::absolute(from));
  const fs::path b = fs::weakly_canonical(fs::absolute(to));
  if (a == b) return ds;
  for (auto& img : ds.images)
    img.file = fs::relative(a / img.file, b).generic_string();
  return ds;
}

void write_manifest(const fs::path& out, const std::string& name, const datakit::Dataset& ds,
                    const fs::path& source_dir) {
  datakit::save_canonical(out / name, relocate(ds, source_dir, out));
}

std::vector<augment::ImageBed> load_beds(const std::string& dir, std::size_t micro_count,
                                         int micro_size, std::uint64_t seed) {
  std::vector<augment::ImageBed> beds;
  if (!dir.empty()) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().extension() == ".png") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) beds.push_back({imaging::read_png(f), f.filename().string()});
  } else if (micro_count > 0) {
    datakit::MicroConfig mc;
    mc.image_size = micro_size;
    const auto images = datakit::make_micro_beds(mc, micro_count, derive_seed(seed, "cli.beds"));
    for (std::size_t i = 0; i < images.size(); ++i)
      beds.push_back({images[i], "micro_bed" + std::to_string(i)});
  }
  if (beds.empty()) throw UsageError("no beds: pass --beds DIR or --micro-beds N");
  return beds;
}

std::map<std::string, double> parse_mix(const std::vector<std::string>& items) {
  std::map<std::string, double> mix;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("class mix entry '" + item + "' is not CLASS=WEIGHT");
    try {
      mix[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw UsageError("class mix weight in '" + item + "' is not a number");
    }
  }
  return mix;
}

augment::OverlapMode parse_overlap(const std::string& s) {
  if (s == "disjoint") return augment::OverlapMode::kDisjoint;
  if (s == "max-iou") return augment::OverlapMode::kMaxIou;
  throw UsageError("--overlap must be disjoint or max-iou");
}

// Per-class generator directories written by train-gan.
struct GeneratorDir {
  gpwgan::GeneratorNet net;
  double portrait_fraction = 0.0;
};

GeneratorDir load_generator_dir(const fs::path& dir) {
  GeneratorDir g;
  g.net = gpwgan::load_generator(dir / "generator.dfgm");
  if (fs::exists(dir / "generator.json")) {
    const std::string text = datakit::read_text(dir / "generator.json");
    try {
      g.portrait_fraction = json::parse(text).value("portrait_fraction", 0.0);
    } catch (const json::exception& e) {
      fail(ErrorKind::kParseError, (dir / "generator.json").string() + ": " + e.what());
    }
  }
  return g;
}

struct DetectorOptions {
  int epochs = detectkit::ToyDetectorConfig{}.epochs;
  int template_size = detectkit::ToyDetectorConfig{}.template_size;
  double score_threshold = detectkit::ToyDetectorConfig{}.score_threshold;
  double nms_iou = detectkit::ToyDetectorConfig{}.nms_iou;

  void add(CLI::App* app) {
    app->add_option("--epochs", epochs, "Gradient-descent epochs per class template")
        ->capture_default_str();
    app->add_option("--template-size", template_size, "Template grid side")->capture_default_str();
    app->add_option("--score-threshold", score_threshold, "Minimum detection score")
        ->capture_default_str();
    app->add_option("--nms-iou", nms_iou, "NMS IoU threshold")->capture_default_str();
  }
  detectkit::ToyDetectorConfig config(std::uint64_t seed) const {
    detectkit::ToyDetectorConfig c;
    c.epochs = epochs;
    c.template_size = template_size;
    c.score_threshold = score_threshold;
    c.nms_iou = nms_iou;
    c.seed = seed;
    return c;
  }
};

struct PolicyOptions {
  int min_defects = 1;
  int max_defects = 3;
  std::string overlap = "disjoint";
  double max_iou = 0.0;
  int max_attempts = 100;
  int margin = 0;

  void add(CLI::App* app) {
    app->add_option("--min-defects", min_defects, "Fewest defects per synthetic image")
        ->capture_default_str();
    app->add_option("--max-defects", max_defects, "Most defects per synthetic image")
        ->capture_default_str();
    app->add_option("--overlap", overlap, "disjoint or max-iou")->capture_default_str();
    app->add_option("--max-iou", max_iou, "IoU bound under max-iou")->capture_default_str();
    app->add_option("--max-attempts", max_attempts, "Rejection-sampling attempts per patch")
        ->capture_default_str();
    app->add_option("--margin", margin, "Minimum distance to the bed border")
        ->capture_default_str();
  }
  augment::AllocationPolicy policy() const {
    augment::AllocationPolicy p;
    p.min_defects = min_defects;
    p.max_defects = max_defects;
    p.overlap = parse_overlap(overlap);
    p.max_iou = max_iou;
    p.max_attempts = max_attempts;
    p.margin = margin;
    return p;
  }
};

// Every subcommand registers itself and a handler run after parsing.
struct Command {
  CLI::App* app = nullptr;
  std::string name;
  std::function<void()> handler;
};

class Cli {
 public:
  Cli() : app_("Rare-defect augmentation and detection evaluation toolkit", "defectforge") {
    app_.config_formatter(std::make_shared<JsonConfig>());
    app_.set_config("--config", "", "JSON file with option values (nested objects per subcommand)");
    app_.allow_config_extras(false);
    app_.fallthrough();
    app_.require_subcommand(1);
    app_.set_version_flag("--version", DEFECTFORGE_VERSION);
    app_.add_option("--seed", g_.seed, "Root seed for every random stream")->capture_default_str();
    app_.add_option("--out", g_.out, "Output directory");
    app_.add_flag("--force", g_.force, "Overwrite a non-empty output directory");
    app_.add_option("--jobs", g_.jobs, "Worker threads (0 = all cores)")->capture_default_str();
    app_.parse_complete_callback([this] {
      if (g_.jobs < 0) throw UsageError("--jobs must be >= 0");
    });
    add_dataset();
    add_train_gan();
    add_synthesize();
    add_augment();
    add_detect();
    add_evaluate();
    add_sensitivity();
  }

  int run(std::vector<std::string> args) {
    std::reverse(args.begin(), args.end());
    try {
      app_.parse(args);
    } catch (const CLI::CallForHelp& e) {
      return app_.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app_.exit(e);
    } catch (const CLI::CallForVersion& e) {
      return app_.exit(e);
    } catch (const CLI::ParseError& e) {
      return report("UsageError", e.what(), kExitConfig);
    } catch (const UsageError& e) {
      return report("UsageError", e.what(), kExitConfig);
    }
    for (const auto& c : commands_) {
      if (!c.app->parsed()) continue;
      try {
        logger()->info("running {}", c.name);
        c.handler();
        return kExitOk;
      } catch (const UsageError& e) {
        return report("UsageError", e.what(), kExitConfig);
      } catch (const Error& e) {
        const int code = e.kind() == ErrorKind::kConfigInvalid ? kExitConfig : kExitFailure;
        return report(std::string(to_string(e.kind())), e.what(), code);
      } catch (const std::exception& e) {
        return report("RuntimeError", e.what(), kExitFailure);
      }
    }
    return report("UsageError", "no subcommand given", kExitConfig);
  }

 private:
  static int report(const std::string& kind, const std::string& message, int code) {
    const json record = {{"error", kind}, {"message", message}, {"exit_code", code}};
    std::cerr << record.dump() << '\n';
    return code;
  }

  CLI::App* command(CLI::App* parent, const std::string& name, const std::string& help,
                    std::function<void()> handler) {
    CLI::App* sub = parent->add_subcommand(name, help);
    std::string full = name;
    if (parent != &app_) full = parent->get_name() + " " + name;
    commands_.push_back({sub, full, std::move(handler)});
    return sub;
  }

  void finish(const fs::path& out, const std::string& name) {
    write_run_record(out, app_, name, g_);
  }

  // ---------------------------------------------------------------- dataset
  void add_dataset() {
    CLI::App* ds = app_.add_subcommand("dataset", "Prepare datasets");
    ds->require_subcommand(1);

    auto* convert = command(ds, "convert", "Convert canonical, COCO or VOC to canonical or COCO",
                            [this] { run_convert(); });
    convert->add_option("--in", in_, "Manifest file or VOC directory")->required();
    convert->add_option("--format", format_, "canonical or coco")->capture_default_str();

    auto* seg = command(ds, "seg2bbox", "Turn per-class segmentation masks into boxes",
                        [this] { run_seg2bbox(); });
    seg->add_option("--masks", masks_, "Directory with one subdirectory of PNG masks per class")
        ->required();
    seg->add_option("--images", images_, "Directory holding <stem>.png for every mask");

    auto* imb = command(ds, "make-imbalanced", "Randomly drop images of one class",
                        [this] { run_imbalanced(); });
    imb->add_option("--in", in_, "Manifest")->required();
    imb->add_option("--class", class_, "Class to thin out")->required();
    imb->add_option("--drop", drop_, "Number of images to drop")->required();

    auto* split = command(ds, "split", "Stratified k-fold split", [this] { run_split(); });
    split->add_option("--in", in_, "Manifest")->required();
    split->add_option("--k", k_, "Number of folds")->capture_default_str();

    auto* micro = command(ds, "micro", "Generate the synthetic micro dataset",
                          [this] { run_micro(); });
    micro->add_option("--images-per-class", micro_.images_per_class)->capture_default_str();
    micro->add_option("--image-size", micro_.image_size)->capture_default_str();
    micro->add_option("--noise", micro_.noise_sigma)->capture_default_str();
    micro->add_option("--beds", bed_count_, "Defect-free beds written to beds/")
        ->capture_default_str();
  }

  void run_convert() {
    if (format_ != "canonical" && format_ != "coco")
      throw UsageError("--format must be canonical or coco");
    const fs::path out = prepare_out(g_);
    const datakit::Dataset ds = datakit::load_any(in_);
    const datakit::Dataset moved = relocate(ds, manifest_dir(in_), out);
    if (format_ == "canonical") {
      datakit::save_canonical(out / "manifest.json", moved);
    } else {
      datakit::write_text(out / "coco.json", datakit::to_coco_json(moved));
    }
    std::cout << "converted " << ds.images.size() << " images\n";
    finish(out, "dataset convert");
  }

  void run_seg2bbox() {
    const fs::path out = prepare_out(g_);
    const fs::path images = images_.empty() ? fs::path(masks_) : fs::path(images_);
    std::vector<fs::path> class_dirs;
    for (const auto& e : fs::directory_iterator(masks_))
      if (e.is_directory()) class_dirs.push_back(e.path());
    std::sort(class_dirs.begin(), class_dirs.end());
    datakit::Dataset ds;
    std::map<std::string, std::vector<std::pair<std::string, fs::path>>> by_stem;
    for (const auto& dir : class_dirs) {
      ds.classes.push_back(dir.filename().string());
      for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".png")
          by_stem[e.path().stem().string()].push_back({dir.filename().string(), e.path()});
    }
    std::int64_t id = 0;
    for (auto& [stem, masks] : by_stem) {
      std::sort(masks.begin(), masks.end());
      datakit::AnnotatedImage img;
      img.id = id++;
      img.file = stem + ".png";
      for (const auto& [label, path] : masks) {
        const imaging::GrayImage mask = imaging::read_png(path);
        img.width = mask.width;
        img.height = mask.height;
        try {
          img.annotations.push_back({label, datakit::seg_to_bbox(mask)});
        } catch (const Error& e) {
          fail(e.kind(), path.string() + ": " + e.what());
        }
      }
      ds.images.push_back(std::move(img));
    }
    write_manifest(out, "manifest.json", ds, images);
    std::cout << "converted " << ds.images.size() << " masked images\n";
    finish(out, "dataset seg2bbox");
  }

  void run_imbalanced() {
    const fs::path out = prepare_out(g_);
    const datakit::Dataset ds = datakit::load_any(in_);
    const auto kept = datakit::make_imbalanced(ds, class_, drop_, g_.seed);
    write_manifest(out, "manifest.json", kept, manifest_dir(in_));
    std::cout << class_ << ": " << kept.image_counts().at(class_) << " images remain\n";
    finish(out, "dataset make-imbalanced");
  }

  void run_split() {
    const fs::path out = prepare_out(g_);
    const datakit::Dataset ds = datakit::load_any(in_);
    const auto folds = datakit::kfold_split(ds, k_, g_.seed);
    json summary = json::array();
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const std::string stem = "fold" + std::to_string(f);
      write_manifest(out, stem + "_train.json", folds[f].train, manifest_dir(in_));
      write_manifest(out, stem + "_test.json", folds[f].test, manifest_dir(in_));
      summary.push_back({{"fold", f},
                         {"train", folds[f].train.images.size()},
                         {"test", folds[f].test.images.size()},
                         {"test_per_class", folds[f].test.image_counts()}});
      std::cout << stem << ": train " << folds[f].train.images.size() << ", test "
                << folds[f].test.images.size() << "\n";
    }
    datakit::write_text(out / "folds.json", summary.dump(2) + "\n");
    finish(out, "dataset split");
  }

  void run_micro() {
    const fs::path out = prepare_out(g_);
    const auto ds = datakit::make_micro_dataset(micro_, g_.seed);
    datakit::save_dataset(out / "manifest.json", ds);
    const auto beds = datakit::make_micro_beds(micro_, bed_count_, derive_seed(g_.seed, "cli.beds"));
    if (!beds.empty()) fs::create_directories(out / "beds");
    for (std::size_t i = 0; i < beds.size(); ++i)
      imaging::write_png(out / "beds" / ("bed_" + std::to_string(i) + ".png"), beds[i]);
    std::cout << "wrote " << ds.images.size() << " images and " << beds.size() << " beds\n";
    finish(out, "dataset micro");
  }

  // -------------------------------------------------------------- train-gan
  void add_train_gan() {
    auto* c = command(&app_, "train-gan", "Train a gradient-penalty WGAN on one class's patches",
                      [this] { run_train_gan(); });
    c->add_option("--in", in_, "Manifest with pixels");
    c->add_option("--class", class_, "Class whose boxes are the training patches");
    c->add_option("--gan-config", gan_config_, "JSON file with GAN hyperparameters");
    c->add_option("--iterations", iterations_, "Generator steps (overrides the GAN config)");
    c->add_option("--pad", pad_, "Context kept around each box")->capture_default_str();
    c->add_flag("--eight-gaussians", eight_gaussians_,
                "Train on the eight-Gaussian ring instead of a dataset");
  }

  void run_train_gan() {
    const fs::path out = prepare_out(g_);
    gpwgan::GanConfig gan = ExperimentConfig::default_gan();
    std::vector<std::vector<double>> samples;
    double portrait = 0.0;
    if (eight_gaussians_) {
      gan.patch_h = 1;
      gan.patch_w = 2;
      gan.z_dim = 2;
      gan.batch_size = 128;
      gan.adam_alpha = 1e-3;
      gan.generator_hidden = {32, 32};
      gan.critic_hidden = {32, 32};
      gan.generator_output = gpwgan::OutputMap::kLinear;
      gan.iterations = 10000;
      gan.class_label = "ring";
    }
    if (!gan_config_.empty()) {
      const auto patch_w = gan.patch_w, patch_h = gan.patch_h;
      gan = gpwgan::load_gan_config(gan_config_);
      if (eight_gaussians_ && (gan.patch_w * gan.patch_h != 2))
        throw UsageError("eight-Gaussian training needs patch_w * patch_h == 2");
      (void)patch_w;
      (void)patch_h;
    }
    if (iterations_) gan.iterations = *iterations_;
    gan.seed = derive_seed(g_.seed, "cli.gan");

    if (eight_gaussians_) {
      samples = gpwgan::ring_of_gaussians(20000, derive_seed(g_.seed, "cli.ring"));
    } else {
      if (in_.empty() || class_.empty())
        throw UsageError("train-gan needs --in and --class (or --eight-gaussians)");
      const auto ds = load_manifest(in_, true);
      gan.class_label = class_;
      std::size_t boxes = 0, upright = 0;
      double sum_w = 0, sum_h = 0;
      for (const auto& img : ds.images)
        for (const auto& a : img.annotations)
          if (a.class_label == class_) {
            ++boxes;
            upright += a.box.h > a.box.w;
            sum_w += std::max(a.box.w, a.box.h) + 2 * pad_;
            sum_h += std::min(a.box.w, a.box.h) + 2 * pad_;
          }
      if (boxes == 0) fail(ErrorKind::kEmptyDataset, "no '" + class_ + "' boxes in " + in_);
      if (gan.patch_w <= 0) gan.patch_w = static_cast<int>(std::lround(sum_w / boxes));
      if (gan.patch_h <= 0) gan.patch_h = static_cast<int>(std::lround(sum_h / boxes));
      portrait = static_cast<double>(upright) / static_cast<double>(boxes);
      for (const auto& p : augment::gan_training_patches(ds, class_, pad_, gan.patch_w, gan.patch_h))
        samples.push_back(p.pixels.pixels);
    }
    gan.validate();
    logger()->info("training {} steps on {} samples", gan.iterations, samples.size());
    const auto result = gpwgan::train_gpwgan(gan, samples);
    gpwgan::save_generator(out / "generator.dfgm", result.generator);
    {
      std::ofstream csv(out / "loss.csv");
      gpwgan::write_loss_csv(csv, result.report);
    }
    json meta = {{"class", gan.class_label},
                 {"portrait_fraction", portrait},
                 {"pad", pad_},
                 {"gan", json::parse(gpwgan::to_json(gan))}};
    if (eight_gaussians_) {
      gpwgan::NoiseSampler noise(static_cast<std::size_t>(gan.z_dim),
                                 derive_seed(g_.seed, "cli.ring.eval"));
      const auto points = result.generator.net.forward(noise.draw(2000));
      std::vector<std::vector<double>> pts(2000);
      for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {points[2 * i], points[2 * i + 1]};
      const auto counts = gpwgan::ring_mode_counts(pts);
      const auto covered = std::count_if(counts.begin(), counts.end(),
                                         [](std::size_t c) { return c >= 20; });
      meta["mode_counts"] = counts;
      meta["modes_covered"] = covered;
      std::cout << "modes covered: " << covered << " of 8\n";
    }
    datakit::write_text(out / "generator.json", meta.dump(2) + "\n");
    std::cout << "trained " << gan.iterations << " generator steps\n";
    finish(out, "train-gan");
  }

  // ------------------------------------------------------------- synthesize
  void add_synthesize() {
    auto* c = command(&app_, "synthesize", "Draw patches from a trained generator",
                      [this] { run_synthesize(); });
    c->add_option("--model", model_, "train-gan output directory or generator.dfgm")->required();
    c->add_option("--count", count_, "Number of patches")->capture_default_str();
    c->add_option("--rescale", rescale_, "Stretch each patch onto LO,HI")->delimiter(',')
        ->expected(2);
  }

  void run_synthesize() {
    const fs::path out = prepare_out(g_);
    const fs::path model(model_);
    const auto gen = fs::is_directory(model) ? load_generator_dir(model).net
                                             : gpwgan::load_generator(model);
    gpwgan::Postprocess post;
    if (rescale_.size() == 2) post.rescale = std::make_pair(rescale_[0], rescale_[1]);
    const auto patches = gpwgan::synthesize_patches(gen, count_, derive_seed(g_.seed, "cli.synthesize"), post);
    fs::create_directories(out / "patches");
    json list = json::array();
    for (std::size_t i = 0; i < patches.size(); ++i) {
      const std::string stem = "patches/" + std::to_string(i);
      imaging::write_png(out / (stem + ".png"), patches[i].pixels);
      imaging::write_png(out / (stem + "_mask.png"), patches[i].mask);
      list.push_back({{"file", stem + ".png"},
                      {"mask", stem + "_mask.png"},
                      {"class", patches[i].class_label},
                      {"source", patches[i].source},
                      {"width", patches[i].pixels.width},
                      {"height", patches[i].pixels.height}});
    }
    datakit::write_text(out / "patches.json", list.dump(2) + "\n");
    std::cout << "wrote " << patches.size() << " patches\n";
    finish(out, "synthesize");
  }

  // ---------------------------------------------------------------- augment
  void add_augment() {
    auto* c = command(&app_, "augment", "Append synthetic images to a dataset",
                      [this] { run_augment(); });
    c->add_option("--in", in_, "Manifest with pixels")->required();
    c->add_option("--generator", generators_, "train-gan output directory (repeatable)");
    c->add_option("--beds", beds_dir_, "Directory of defect-free PNG beds");
    c->add_option("--micro-beds", micro_beds_, "Generate this many micro beds instead")
        ->capture_default_str();
    c->add_option("--bed-size", bed_size_, "Side of generated micro beds")->capture_default_str();
    c->add_option("--m-g", m_g_, "Synthetic images to append")->capture_default_str();
    c->add_option("--real-fraction", real_fraction_,
                  "Chance a defect is a real patch when a generator exists")
        ->capture_default_str();
    c->add_option("--class-mix", class_mix_, "CLASS=WEIGHT entries")->delimiter(',');
    c->add_option("--pad", real_pad_, "Pad around real patches")->capture_default_str();
    policy_.add(c);
  }

  void run_augment() {
    const fs::path out = prepare_out(g_);
    const auto ds = load_manifest(in_, true);
    std::map<std::string, augment::ClassGenerator> gens;
    for (const auto& dir : generators_) {
      auto g = load_generator_dir(dir);
      const std::string label = g.net.class_label;
      gens[label] = {std::move(g.net), g.portrait_fraction};
    }
    augment::AugmentSpec spec;
    spec.m_g = m_g_;
    spec.real_fraction = real_fraction_;
    spec.class_mix = parse_mix(class_mix_);
    spec.policy = policy_.policy();
    spec.real_pad = real_pad_;
    spec.seed = derive_seed(g_.seed, "cli.augment");
    datakit::Dataset result = ds;
    if (m_g_ > 0) {
      const auto beds = load_beds(beds_dir_, micro_beds_, bed_size_, g_.seed);
      result = augment::build_augmented_dataset(ds, beds, gens, spec);
    }
    datakit::save_dataset(out / "manifest.json", result);
    std::cout << "dataset has " << result.images.size() << " images (" << m_g_
              << " synthetic)\n";
    finish(out, "augment");
  }

  // ----------------------------------------------------------------- detect
  void add_detect() {
    auto* c = command(&app_, "detect", "Train the toy detector and/or run it on a dataset",
                      [this] { run_detect(); });
    c->add_option("--train", train_, "Training manifest (trains a new model)");
    c->add_option("--model", model_, "Existing model file (.dftd)");
    c->add_option("--test", test_, "Manifest to run detection on");
    detector_.add(c);
  }

  void run_detect() {
    if (train_.empty() == model_.empty())
      throw UsageError("detect needs exactly one of --train and --model");
    const fs::path out = prepare_out(g_);
    std::optional<detectkit::ToyDetector> model;
    if (!train_.empty()) {
      const auto ds = load_manifest(train_, true);
      model = detectkit::train_toy_detector(ds, detector_.config(derive_seed(g_.seed, "cli.detector")));
      detectkit::save_toy_detector(out / "model.dftd", *model);
    } else {
      model = detectkit::load_toy_detector(model_);
    }
    if (!test_.empty()) {
      const auto ds = load_manifest(test_, true);
      const auto dets = detectkit::detect_all(*model, ds);
      datakit::write_text(out / "predictions.json", evalkit::predictions_json(dets));
      std::cout << dets.size() << " detections on " << ds.images.size() << " images\n";
    }
    finish(out, "detect");
  }

  // --------------------------------------------------------------- evaluate
  void add_evaluate() {
    auto* c = command(&app_, "evaluate", "Score predictions against ground truth",
                      [this] { run_evaluate(); });
    c->add_option("--gt", gt_, "Ground-truth manifest")->required();
    c->add_option("--pred", pred_, "Predictions file")->required();
    c->add_option("--iou", iou_, "IoU threshold for a true positive")->capture_default_str();
    c->add_option("--ap-mode", ap_mode_, "raw, 11point or envelope")->capture_default_str();
  }

  void run_evaluate() {
    evalkit::EvalConfig cfg;
    cfg.iou_threshold = iou_;
    try {
      cfg.mode = evalkit::parse_ap_mode(ap_mode_);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    const fs::path out = prepare_out(g_);
    const auto truth = datakit::load_any(gt_);
    const auto dets = detectkit::import_predictions(pred_, &truth);
    const auto report = evalkit::evaluate(truth, dets, cfg);
    datakit::write_text(out / "report.json", evalkit::report_json(report));
    {
      std::ofstream csv(out / "report.csv");
      evalkit::write_report_csv(csv, report);
    }
    std::cout << "mAP " << report.map << " over " << report.class_count << " classes\n";
    finish(out, "evaluate");
  }

  // ------------------------------------------------------------ sensitivity
  void add_sensitivity() {
    auto* c = command(&app_, "sensitivity", "Minority AP over an (m_r, m_g) grid",
                      [this] { run_sensitivity(); });
    c->add_option("--in", in_, "Manifest with pixels");
    c->add_flag("--micro", use_micro_, "Use the generated micro dataset");
    c->add_option("--minority", minority_, "Minority class")->capture_default_str();
    c->add_option("--m-r", m_r_list_, "Retained minority training images")->delimiter(',')
        ->required();
    c->add_option("--m-g", m_g_list_, "Synthetic images")->delimiter(',')->required();
    c->add_option("--folds", folds_, "Cross-validation folds per cell")->capture_default_str();
    c->add_option("--beds", beds_dir_, "Directory of defect-free PNG beds");
    c->add_option("--micro-beds", micro_beds_, "Generate this many micro beds instead")
        ->capture_default_str();
    c->add_option("--bed-size", bed_size_, "Side of generated micro beds")->capture_default_str();
    c->add_option("--gan-iterations", gan_iterations_, "GAN generator steps per fold")
        ->capture_default_str();
    c->add_option("--real-fraction", real_fraction_, "Real-patch share of synthetic defects")
        ->capture_default_str();
    detector_.add(c);
  }

  void run_sensitivity() {
    const fs::path out = prepare_out(g_);
    ExperimentData data;
    if (use_micro_ == !in_.empty())
      throw UsageError("sensitivity needs exactly one of --in and --micro");
    if (use_micro_) {
      data.dataset = datakit::make_micro_dataset(micro_, g_.seed);
    } else {
      data.dataset = load_manifest(in_, true);
    }
    data.beds = load_beds(beds_dir_, micro_beds_, bed_size_, g_.seed);
    ExperimentConfig cfg;
    cfg.minority = minority_;
    cfg.folds = folds_;
    cfg.gan.iterations = gan_iterations_;
    cfg.augment.real_fraction = real_fraction_;
    cfg.detector = detector_.config(0);
    evalkit::GridSpec spec{m_r_list_, m_g_list_, folds_, g_.seed};
    const auto grid = evalkit::run_sensitivity(
        spec,
        [&](std::size_t m_r, std::size_t m_g, std::size_t fold, std::uint64_t seed) {
          return run_minority_fold(data, cfg, m_r, m_g, fold, seed).ap;
        },
        g_.jobs);
    {
      std::ofstream csv(out / "grid.csv");
      evalkit::write_grid_csv(csv, grid);
      std::ofstream svg(out / "grid.svg");
      evalkit::write_grid_svg(svg, grid);
    }
    json cells = json::array();
    std::size_t failed = 0;
    for (const auto& c : grid.cells) {
      json cell = {{"m_r", c.m_r}, {"m_g", c.m_g}};
      cell["ap"] = c.ap ? json(*c.ap) : json(nullptr);
      if (!c.ap) {
        cell["error"] = c.error;
        ++failed;
      }
      cells.push_back(cell);
    }
    datakit::write_text(out / "grid.json", cells.dump(2) + "\n");
    std::cout << grid.cells.size() << " cells, " << failed << " failed\n";
    finish(out, "sensitivity");
  }

  CLI::App app_;
  Global g_;
  std::vector<Command> commands_;

  std::string in_, format_ = "canonical", masks_, images_, class_, gan_config_, model_;
  std::string train_, test_, gt_, pred_, ap_mode_ = "raw", beds_dir_, minority_ = "scratch";
  std::size_t drop_ = 0, k_ = 3, bed_count_ = 0, count_ = 16, micro_beds_ = 0, m_g_ = 0;
  std::size_t folds_ = 3;
  std::optional<std::int64_t> iterations_;
  std::int64_t gan_iterations_ = ExperimentConfig::default_gan().iterations;
  int pad_ = 2, real_pad_ = 0, bed_size_ = 48;
  bool eight_gaussians_ = false, use_micro_ = false;
  double real_fraction_ = 0.5, iou_ = 0.5;
  std::vector<double> rescale_;
  std::vector<std::string> generators_, class_mix_;
  std::vector<std::size_t> m_r_list_, m_g_list_;
  datakit::MicroConfig micro_;
  DetectorOptions detector_;
  PolicyOptions policy_;
};

}  // namespace

int run(const std::vector<std::string>& args) {
  Cli cli;
  return cli.run(args);
}

int run(int argc, const char* const* argv) {
  return run(std::vector<std::string>(argv + 1, argv + argc));
}

}  // namespace defectforge::cli
