// svbrdf: single binary exposing the whole pipeline as subcommands.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical
// failure. Verbosity via the SVBRDF_LOG env var (quiet|info|debug).

#include <glob.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "svbrdf/checkpoint.hpp"
#include "svbrdf/common.hpp"
#include "svbrdf/eval.hpp"
#include "svbrdf/image.hpp"
#include "svbrdf/maps.hpp"
#include "svbrdf/models.hpp"
#include "svbrdf/parallel.hpp"
#include "svbrdf/render.hpp"
#include "svbrdf/trainer.hpp"
#include "svbrdf/warp.hpp"

namespace {

using namespace svbrdf;

std::vector<std::string> expand_inputs(const std::vector<std::string>& patterns) {
  std::vector<std::string> paths;
  for (const std::string& pattern : patterns) {
    glob_t g{};
    const int rc = glob(pattern.c_str(), GLOB_TILDE, nullptr, &g);
    if (rc == 0) {
      for (std::size_t i = 0; i < g.gl_pathc; ++i) paths.emplace_back(g.gl_pathv[i]);
    } else if (rc == GLOB_NOMATCH && std::filesystem::exists(pattern)) {
      paths.push_back(pattern);
    }
    globfree(&g);
  }
  SVBRDF_REQUIRE(!paths.empty(), "no input files matched");
  return paths;
}

std::vector<LinearImage> load_all(const std::vector<std::string>& paths) {
  std::vector<LinearImage> photos;
  photos.reserve(paths.size());
  for (const std::string& p : paths) {
    log_info("loading " + p);
    photos.push_back(load_image(p));
  }
  return photos;
}

std::string strip_png(const std::string& path) {
  if (path.size() > 4 && path.substr(path.size() - 4) == ".png") return path.substr(0, path.size() - 4);
  return path;
}

void ensure_parent_dir(const std::string& path) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

// Reproducibility record: every run leaves its resolved settings next to its
// outputs. Plain key=value, stable order, no timestamps.
void write_resolved_config(const std::string& out_stem,
                           const std::vector<std::pair<std::string, std::string>>& kv) {
  const std::string path = out_stem + "_config.txt";
  std::ofstream os(path, std::ios::trunc);
  SVBRDF_REQUIRE(os.good(), "cannot write resolved config: " + path);
  for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

struct CommonTrainFlags {
  TrainConfig cfg;
  std::string optimizer_name = "adam";

  void attach(CLI::App* cmd, bool with_patch = true) {
    if (with_patch)
      cmd->add_option("--patch", cfg.patch_size, "training patch size (multiple of 32)")
          ->capture_default_str();
    cmd->add_option("--lr", cfg.lr, "learning rate")->capture_default_str();
    cmd->add_option("--d-lr", cfg.d_lr, "discriminator learning rate (default: same as --lr)");
    cmd->add_option("--nr-steps", cfg.nr_steps, "encoder+NR head steps per iteration")
        ->capture_default_str();
    cmd->add_option("--pdp-steps", cfg.pdp_steps, "PDP head steps per iteration")
        ->capture_default_str();
    cmd->add_option("--lambda", cfg.lambda_diffuse, "diffuse L1 loss weight")
        ->capture_default_str();
    cmd->add_option("--intensity", cfg.intensity, "light intensity")->capture_default_str();
    cmd->add_option("--camera-height", cfg.camera_height, "camera height in plane units")
        ->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "rng seed")->capture_default_str();
    cmd->add_option("--log-every", cfg.log_every, "loss logging stride")->capture_default_str();
    cmd->add_option("--checkpoint-every", cfg.checkpoint_every,
                    "periodic checkpoint stride (0 = off)")
        ->capture_default_str();
    cmd->add_option("--log", cfg.log_path, "training loss CSV path");
    cmd->add_option("--optimizer", optimizer_name, "adam or sgd")->capture_default_str();
    cmd->add_flag("--check-frozen", cfg.check_frozen,
                  "verify frozen parameter groups bit-exactly every phase");
  }

  void finalize() {
    if (optimizer_name == "adam") cfg.optimizer = nn::OptKind::adam;
    else if (optimizer_name == "sgd") cfg.optimizer = nn::OptKind::sgd;
    else throw CLI::ValidationError("--optimizer", "expected adam or sgd");
  }

  std::vector<std::pair<std::string, std::string>> resolved(bool with_patch = true) const {
    std::vector<std::pair<std::string, std::string>> kv;
    if (with_patch) kv.emplace_back("patch", std::to_string(cfg.patch_size));
    kv.emplace_back("lr", fmt_double(cfg.lr));
    kv.emplace_back("d_lr", fmt_double(cfg.d_lr < 0 ? cfg.lr : cfg.d_lr));
    kv.emplace_back("nr_steps", std::to_string(cfg.nr_steps));
    kv.emplace_back("pdp_steps", std::to_string(cfg.pdp_steps));
    kv.emplace_back("lambda", fmt_double(cfg.lambda_diffuse));
    kv.emplace_back("intensity", fmt_double(cfg.intensity));
    kv.emplace_back("camera_height", fmt_double(cfg.camera_height));
    kv.emplace_back("seed", std::to_string(cfg.seed));
    kv.emplace_back("optimizer", optimizer_name);
    return kv;
  }
};

// ---------------------------------------------------------------------------

int cmd_extract_diffuse(const std::vector<std::string>& patterns, const std::string& out,
                        ExtractParams params, bool dump_aligned) {
  const auto paths = expand_inputs(patterns);
  const auto photos = load_all(paths);
  const ExtractResult result = extract_guessed_diffuse(photos, params);

  const std::string stem = strip_png(out);
  ensure_parent_dir(out);
  save_image(result.guessed_diffuse, stem + ".png");
  log_info("wrote " + stem + ".png");

  for (std::size_t i = 0; i < result.homographies.size(); ++i) {
    const bool excluded =
        std::find(result.excluded.begin(), result.excluded.end(), static_cast<int>(i)) !=
        result.excluded.end();
    if (excluded) continue;
    std::ofstream hs(stem + "_h" + std::to_string(i) + ".txt", std::ios::trunc);
    hs << result.homographies[i].to_text();
  }
  if (dump_aligned && !params.prealigned) {
    for (std::size_t i = 1; i < photos.size(); ++i) {
      const bool excluded =
          std::find(result.excluded.begin(), result.excluded.end(), static_cast<int>(i)) !=
          result.excluded.end();
      if (excluded) continue;
      MaskedImage warped = warp_to_reference(photos[i], result.homographies[i], photos[0].width,
                                             photos[0].height);
      save_image(warped.image, stem + "_aligned" + std::to_string(i) + ".png");
    }
  }

  std::vector<std::pair<std::string, std::string>> kv;
  for (std::size_t i = 0; i < paths.size(); ++i)
    kv.emplace_back("input" + std::to_string(i), paths[i]);
  kv.emplace_back("prealigned", params.prealigned ? "true" : "false");
  kv.emplace_back("exposure_normalize", params.exposure_normalize ? "true" : "false");
  kv.emplace_back("ransac_px", fmt_double(params.ransac_px));
  kv.emplace_back("ransac_iters", std::to_string(params.ransac_iters));
  kv.emplace_back("match_ratio", fmt_double(params.match_ratio));
  kv.emplace_back("min_inliers", std::to_string(params.min_inliers));
  kv.emplace_back("seed", std::to_string(params.seed));
  for (int idx : result.excluded) kv.emplace_back("excluded", std::to_string(idx));
  write_resolved_config(stem, kv);
  return 0;
}

int cmd_pretrain(CommonTrainFlags& flags, const std::string& proxy_path,
                 const std::string& checkpoint, int iterations) {
  flags.finalize();
  flags.cfg.iterations_stage1 = iterations;
  flags.cfg.checkpoint_path = checkpoint;
  ensure_parent_dir(checkpoint);
  const LinearImage proxy = load_image(proxy_path);
  pretrain_stage(flags.cfg, proxy);
  log_info("wrote " + checkpoint);

  auto kv = flags.resolved();
  kv.emplace_back("proxy", proxy_path);
  kv.emplace_back("iterations", std::to_string(iterations));
  write_resolved_config(strip_png(checkpoint), kv);
  return 0;
}

int cmd_train(CommonTrainFlags& flags, const std::vector<std::string>& patterns,
              const std::string& guessed_path, const std::string& checkpoint,
              const std::string& init, bool resume, int iterations_override) {
  flags.finalize();
  flags.cfg.checkpoint_path = checkpoint;
  ensure_parent_dir(checkpoint);
  const auto paths = expand_inputs(patterns);
  auto photos = load_all(paths);
  LinearImage guessed = load_image(guessed_path);

  if (iterations_override >= 0) {
    flags.cfg.iterations_stage2 = iterations_override;
    flags.cfg.iterations_single_stage = iterations_override;
  }
  std::optional<std::string> init_opt;
  if (!init.empty()) init_opt = init;
  const int target = init.empty() ? flags.cfg.iterations_single_stage : flags.cfg.iterations_stage2;
  if (target == 0 && !init.empty()) {
    // Nothing to train; the initial checkpoint passes through unchanged.
    std::filesystem::copy_file(init, checkpoint,
                               std::filesystem::copy_options::overwrite_existing);
  } else {
    train(flags.cfg, std::move(photos), std::move(guessed), init_opt, resume);
  }
  log_info("wrote " + checkpoint);

  auto kv = flags.resolved();
  for (std::size_t i = 0; i < paths.size(); ++i)
    kv.emplace_back("input" + std::to_string(i), paths[i]);
  kv.emplace_back("guessed", guessed_path);
  kv.emplace_back("init", init.empty() ? "-" : init);
  kv.emplace_back("resume", resume ? "true" : "false");
  kv.emplace_back("iterations", std::to_string(init.empty() ? flags.cfg.iterations_single_stage
                                                            : flags.cfg.iterations_stage2));
  write_resolved_config(strip_png(checkpoint), kv);
  return 0;
}

int cmd_estimate(const std::string& checkpoint, const std::string& photo_path,
                 const std::string& out_stem, const std::string& substitute_diffuse,
                 double camera_height_flag, double intensity_flag) {
  Rng grng = Rng::substream(0, 0);
  Rng drng = Rng::substream(0, 1);
  nn::Generator g(grng);
  nn::Discriminator d(drng);
  nn::CheckpointMeta meta = nn::load_checkpoint(checkpoint, g, d, nullptr);

  const LinearImage photo = load_image(photo_path);
  const SvbrdfMaps maps = estimate_maps(g, photo);
  ensure_parent_dir(out_stem);
  save_maps(maps, out_stem);

  double camera_height = camera_height_flag;
  if (camera_height <= 0.0)
    camera_height = meta.count("camera_height") ? std::stod(meta.at("camera_height")) : 1.0;
  double intensity = intensity_flag;
  if (intensity <= 0.0)
    intensity = meta.count("intensity") ? std::stod(meta.at("intensity")) : kDefaultIntensity;

  FieldParams fp;
  fp.camera_height = camera_height;
  const DirectionField field = direction_field(maps.width(), maps.height(), fp);
  SvbrdfMaps render_maps = maps;
  if (!substitute_diffuse.empty()) {
    LinearImage guessed = load_image(substitute_diffuse);
    SVBRDF_REQUIRE(guessed.same_shape(render_maps.diffuse),
                   "substitute diffuse must match the photo resolution");
    render_maps.diffuse = std::move(guessed);
  }
  save_image(render(render_maps, field, static_cast<float>(intensity)), out_stem + "_rerender.png");
  log_info("wrote " + out_stem + "_{normal,diffuse,roughness,specular,rerender}.png");

  write_resolved_config(
      out_stem, {{"checkpoint", checkpoint},
                 {"photo", photo_path},
                 {"substitute_diffuse", substitute_diffuse.empty() ? "-" : substitute_diffuse},
                 {"camera_height", fmt_double(camera_height)},
                 {"intensity", fmt_double(intensity)}});
  return 0;
}

int cmd_render(const std::string& maps_stem, const std::string& out, double camera_height,
               double intensity, double offset_x, double offset_y, bool distant) {
  const SvbrdfMaps maps = load_maps(maps_stem);
  FieldParams fp;
  fp.camera_height = camera_height;
  fp.camera_x = offset_x;
  fp.camera_y = offset_y;
  fp.distant = distant;
  const DirectionField field = direction_field(maps.width(), maps.height(), fp);
  ensure_parent_dir(out);
  save_image(render(maps, field, static_cast<float>(intensity)), out);
  log_info("wrote " + out);
  write_resolved_config(strip_png(out), {{"maps", maps_stem},
                                         {"camera_height", fmt_double(camera_height)},
                                         {"intensity", fmt_double(intensity)},
                                         {"offset_x", fmt_double(offset_x)},
                                         {"offset_y", fmt_double(offset_y)},
                                         {"distant", distant ? "true" : "false"}});
  return 0;
}

int cmd_synth(const std::string& preset, const std::string& maps_stem, int size,
              const std::string& out_stem, int grid, double spread, SynthParams sp) {
  SvbrdfMaps gt;
  if (!maps_stem.empty()) gt = load_maps(maps_stem);
  else gt = make_synthetic_maps(preset, size);

  ensure_parent_dir(out_stem);
  if (maps_stem.empty()) save_maps(gt, out_stem + "_gt");

  const auto offsets = offset_grid(grid, spread);
  const auto views = synth_views(gt, offsets, sp);
  for (std::size_t i = 0; i < views.size(); ++i)
    save_image(views[i], out_stem + "_view" + std::to_string(i) + ".png");
  log_info("wrote " + std::to_string(views.size()) + " views at " + out_stem + "_view*.png");

  std::vector<std::pair<std::string, std::string>> kv{
      {"preset", maps_stem.empty() ? preset : "-"},
      {"maps", maps_stem.empty() ? "-" : maps_stem},
      {"size", std::to_string(gt.width())},
      {"grid", std::to_string(grid)},
      {"spread", fmt_double(spread)},
      {"camera_height", fmt_double(sp.camera_height)},
      {"intensity", fmt_double(sp.intensity)},
      {"noise", fmt_double(sp.noise_sigma)},
      {"seed", std::to_string(sp.seed)},
      {"distant", sp.distant ? "true" : "false"}};
  write_resolved_config(out_stem, kv);
  return 0;
}

int cmd_evaluate(const std::string& gt_stem, const std::string& estimated_stem, bool fit,
                 const std::vector<std::string>& patterns, const std::string& guessed_path,
                 const std::string& method, const std::string& out_stem, int grid, double spread,
                 double camera_height, double intensity, FitParams fit_params) {
  const SvbrdfMaps gt = load_maps(gt_stem);

  SvbrdfMaps estimated;
  std::string used_method = method;
  if (fit) {
    const auto paths = expand_inputs(patterns);
    const auto photos = load_all(paths);
    std::vector<DirectionField> fields;
    const auto offsets = offset_grid(grid, spread);
    SVBRDF_REQUIRE(offsets.size() == photos.size(),
                   "evaluate --fit: " + std::to_string(photos.size()) + " photos but the " +
                       std::to_string(grid) + "x" + std::to_string(grid) +
                       " offset grid implies " + std::to_string(offsets.size()));
    for (const auto& off : offsets) {
      FieldParams fp;
      fp.camera_height = camera_height;
      fp.camera_x = off[0];
      fp.camera_y = off[1];
      fields.push_back(direction_field(photos[0].width, photos[0].height, fp));
    }
    fit_params.intensity = static_cast<float>(intensity);
    const FitResult fr = direct_fit(photos, fields, fit_params);
    log_info("direct fit: loss " + fmt_double(fr.initial_loss) + " -> " +
             fmt_double(fr.final_loss));
    estimated = fr.maps;
    if (used_method == "estimate") used_method = "direct_fit";
    ensure_parent_dir(out_stem);
    save_maps(estimated, out_stem + "_fit");
  } else {
    SVBRDF_REQUIRE(!estimated_stem.empty(), "evaluate: need --estimated or --fit");
    estimated = load_maps(estimated_stem);
  }

  std::optional<LinearImage> guessed;
  if (!guessed_path.empty()) guessed = load_image(guessed_path);

  const EvalReport rep = report(estimated, gt, guessed ? &*guessed : nullptr, used_method);
  std::cout << rep.to_text();
  ensure_parent_dir(out_stem);
  {
    std::ofstream txt(out_stem + ".txt", std::ios::trunc);
    txt << rep.to_text();
    std::ofstream csv(out_stem + ".csv", std::ios::trunc);
    csv << EvalReport::csv_header() << "\n" << rep.to_csv_row() << "\n";
  }

  std::vector<std::pair<std::string, std::string>> kv{
      {"gt", gt_stem},
      {"estimated", fit ? "(direct fit)" : estimated_stem},
      {"guessed", guessed_path.empty() ? "-" : guessed_path},
      {"method", used_method}};
  if (fit) {
    kv.emplace_back("grid", std::to_string(grid));
    kv.emplace_back("spread", fmt_double(spread));
    kv.emplace_back("camera_height", fmt_double(camera_height));
    kv.emplace_back("intensity", fmt_double(intensity));
    kv.emplace_back("fit_iters", std::to_string(fit_params.iters));
    kv.emplace_back("fit_lr", fmt_double(fit_params.lr));
    kv.emplace_back("smoothness", fmt_double(fit_params.smoothness_weight));
  }
  write_resolved_config(out_stem, kv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SVBRDF capture toolkit: guessed-diffuse extraction, adversarial map estimation,\n"
               "differentiable rendering and evaluation"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = hardware default)");

  // extract-diffuse ---------------------------------------------------------
  auto* ex = app.add_subcommand("extract-diffuse",
                                "align photos and min-composite the guessed diffuse map");
  std::vector<std::string> ex_inputs;
  std::string ex_out;
  ExtractParams ex_params;
  bool ex_no_exposure = false, ex_dump_aligned = false;
  ex->add_option("--inputs", ex_inputs, "input photos (globs ok); first is the reference")
      ->required()
      ->expected(-1);
  ex->add_option("--out", ex_out, "output PNG path")->required();
  ex->add_flag("--prealigned", ex_params.prealigned, "skip feature alignment");
  ex->add_flag("--no-exposure-norm", ex_no_exposure, "disable median exposure normalization");
  ex->add_option("--ransac-px", ex_params.ransac_px, "RANSAC inlier radius in px")
      ->capture_default_str();
  ex->add_option("--ransac-iters", ex_params.ransac_iters, "RANSAC iterations")
      ->capture_default_str();
  ex->add_option("--match-ratio", ex_params.match_ratio, "descriptor ratio-test threshold")
      ->capture_default_str();
  ex->add_option("--min-inliers", ex_params.min_inliers, "minimum inliers to accept an alignment")
      ->capture_default_str();
  ex->add_option("--seed", ex_params.seed, "rng seed")->capture_default_str();
  ex->add_flag("--dump-aligned", ex_dump_aligned, "also write the warped photos");
  ex->set_config("--config");

  // pretrain ----------------------------------------------------------------
  auto* pre = app.add_subcommand("pretrain", "stage 1: train on a proxy image, keep the weights");
  std::string pre_proxy, pre_ckpt;
  CommonTrainFlags pre_flags;
  int pre_iters = pre_flags.cfg.iterations_stage1;
  pre->add_option("--proxy", pre_proxy, "proxy photo")->required();
  pre->add_option("--checkpoint", pre_ckpt, "output checkpoint path")->required();
  pre->add_option("--iterations", pre_iters, "pretraining iterations")->capture_default_str();
  pre_flags.attach(pre);
  pre->set_config("--config");

  // train -------------------------------------------------------------------
  auto* tr = app.add_subcommand("train", "adversarial training on aligned photos");
  std::vector<std::string> tr_inputs;
  std::string tr_guessed, tr_ckpt, tr_init;
  bool tr_resume = false;
  int tr_iters = -1;
  CommonTrainFlags tr_flags;
  tr->add_option("--inputs", tr_inputs, "aligned photos (globs ok)")->required()->expected(-1);
  tr->add_option("--guessed", tr_guessed, "co-registered guessed diffuse PNG")->required();
  tr->add_option("--checkpoint", tr_ckpt, "output checkpoint path")->required();
  tr->add_option("--init", tr_init, "initial weights checkpoint (enables the stage-2 schedule)");
  tr->add_flag("--resume", tr_resume,
               "restore optimizer state and iteration counter from --init as well");
  tr->add_option("--iterations", tr_iters,
                 "override the iteration target (default 15000 with --init, 20000 without)");
  tr_flags.attach(tr);
  tr->set_config("--config");

  // estimate ----------------------------------------------------------------
  auto* es = app.add_subcommand("estimate", "run the generator on a full photo and save the maps");
  std::string es_ckpt, es_photo, es_out, es_subst;
  double es_height = -1.0, es_intensity = -1.0;
  es->add_option("--checkpoint", es_ckpt, "trained checkpoint")->required();
  es->add_option("--photo", es_photo, "input photo (dimensions multiple of 8)")->required();
  es->add_option("--out", es_out, "output stem for <stem>_normal.png etc.")->required();
  es->add_option("--substitute-diffuse", es_subst,
                 "re-render with this guessed diffuse PNG instead of the generated one");
  es->add_option("--camera-height", es_height, "re-render camera height (default: checkpoint)");
  es->add_option("--intensity", es_intensity, "re-render intensity (default: checkpoint)");
  es->set_config("--config");

  // render ------------------------------------------------------------------
  auto* re = app.add_subcommand("render", "render saved maps under a collocated flash");
  std::string re_maps, re_out;
  double re_height = 1.0, re_intensity = kDefaultIntensity, re_ox = 0.0, re_oy = 0.0;
  bool re_distant = false;
  re->add_option("--maps", re_maps, "input maps stem")->required();
  re->add_option("--out", re_out, "output PNG")->required();
  re->add_option("--camera-height", re_height, "camera height in plane units")
      ->capture_default_str();
  re->add_option("--intensity", re_intensity, "light intensity")->capture_default_str();
  re->add_option("--offset-x", re_ox, "lateral camera offset x")->capture_default_str();
  re->add_option("--offset-y", re_oy, "lateral camera offset y")->capture_default_str();
  re->add_flag("--distant", re_distant, "constant (0,0,1) direction field");
  re->set_config("--config");

  // synth -------------------------------------------------------------------
  auto* sy = app.add_subcommand("synth", "synthetic ground truth and multi-view captures");
  std::string sy_preset = "glossy", sy_maps, sy_out;
  int sy_size = 128, sy_grid = 3;
  double sy_spread = 0.25;
  SynthParams sy_params;
  sy->add_option("--preset", sy_preset, "constant|glossy|matte|bumpy")->capture_default_str();
  sy->add_option("--maps", sy_maps, "use existing maps instead of a preset");
  sy->add_option("--size", sy_size, "map resolution for presets")->capture_default_str();
  sy->add_option("--out", sy_out, "output stem")->required();
  sy->add_option("--grid", sy_grid, "offset grid side length (grid^2 views)")
      ->capture_default_str();
  sy->add_option("--spread", sy_spread, "max lateral offset in plane units")
      ->capture_default_str();
  sy->add_option("--camera-height", sy_params.camera_height, "camera height")
      ->capture_default_str();
  sy->add_option("--intensity", sy_params.intensity, "light intensity")->capture_default_str();
  sy->add_option("--noise", sy_params.noise_sigma, "Gaussian sensor noise sigma")
      ->capture_default_str();
  sy->add_option("--seed", sy_params.seed, "noise seed")->capture_default_str();
  sy->add_flag("--distant", sy_params.distant, "distant (constant) direction field");
  sy->set_config("--config");

  // evaluate ----------------------------------------------------------------
  auto* ev = app.add_subcommand("evaluate", "per-map RMSE report against ground truth");
  std::string ev_gt, ev_est, ev_guessed, ev_method = "estimate", ev_out;
  bool ev_fit = false;
  std::vector<std::string> ev_inputs;
  int ev_grid = 3;
  double ev_spread = 0.25, ev_height = 1.0, ev_intensity = kDefaultIntensity;
  FitParams ev_fitp;
  ev->add_option("--gt", ev_gt, "ground-truth maps stem")->required();
  ev->add_option("--estimated", ev_est, "estimated maps stem");
  ev->add_flag("--fit", ev_fit, "run the per-pixel inverse-rendering baseline instead");
  ev->add_option("--inputs", ev_inputs, "photos for --fit (globs ok)")->expected(-1);
  ev->add_option("--guessed", ev_guessed, "guessed diffuse PNG to score as well");
  ev->add_option("--method", ev_method, "method label in the report")->capture_default_str();
  ev->add_option("--out", ev_out, "report stem (<stem>.txt and <stem>.csv)")->required();
  ev->add_option("--grid", ev_grid, "offset grid used for --fit")->capture_default_str();
  ev->add_option("--spread", ev_spread, "offset spread used for --fit")->capture_default_str();
  ev->add_option("--camera-height", ev_height, "camera height used for --fit")
      ->capture_default_str();
  ev->add_option("--intensity", ev_intensity, "intensity used for --fit")->capture_default_str();
  ev->add_option("--fit-iters", ev_fitp.iters, "fit iterations")->capture_default_str();
  ev->add_option("--fit-lr", ev_fitp.lr, "fit learning rate")->capture_default_str();
  ev->add_option("--smoothness", ev_fitp.smoothness_weight, "fit total-variation weight")
      ->capture_default_str();
  ev->set_config("--config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;  // normalize all usage problems onto exit code 1
  }

  try {
    if (threads > 0) set_max_threads(threads);
    if (ex->parsed()) {
      ex_params.exposure_normalize = !ex_no_exposure;
      return cmd_extract_diffuse(ex_inputs, ex_out, ex_params, ex_dump_aligned);
    }
    if (pre->parsed()) return cmd_pretrain(pre_flags, pre_proxy, pre_ckpt, pre_iters);
    if (tr->parsed())
      return cmd_train(tr_flags, tr_inputs, tr_guessed, tr_ckpt, tr_init, tr_resume, tr_iters);
    if (es->parsed())
      return cmd_estimate(es_ckpt, es_photo, es_out, es_subst, es_height, es_intensity);
    if (re->parsed())
      return cmd_render(re_maps, re_out, re_height, re_intensity, re_ox, re_oy, re_distant);
    if (sy->parsed()) return cmd_synth(sy_preset, sy_maps, sy_size, sy_out, sy_grid, sy_spread,
                                       sy_params);
    if (ev->parsed())
      return cmd_evaluate(ev_gt, ev_est, ev_fit, ev_inputs, ev_guessed, ev_method, ev_out, ev_grid,
                          ev_spread, ev_height, ev_intensity, ev_fitp);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
