#include "svbrdf/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "svbrdf/common.hpp"
#include "svbrdf/ops.hpp"
#include "svbrdf/sampler.hpp"

namespace svbrdf {

using nn::NoGradGuard;
using nn::Tensor;

void TrainConfig::validate() const {
  SVBRDF_REQUIRE(patch_size >= 32 && patch_size % 32 == 0,
                 "train config: patch_size must be a positive multiple of 32");
  SVBRDF_REQUIRE(nr_steps >= 1 && pdp_steps >= 1, "train config: step counts must be >= 1");
  SVBRDF_REQUIRE(iterations_stage1 >= 0 && iterations_stage2 >= 0 && iterations_single_stage >= 0,
                 "train config: iteration counts must be >= 0");
  SVBRDF_REQUIRE(lr > 0.0f, "train config: lr must be positive");
  SVBRDF_REQUIRE(lambda_diffuse >= 0.0f, "train config: lambda_diffuse must be >= 0");
  SVBRDF_REQUIRE(intensity > 0.0f && camera_height > 0.0f,
                 "train config: intensity and camera_height must be positive");
}

const char* TrainLog::csv_header() { return "iteration,d_loss,g_adv,g_diffuse,seconds"; }

std::string TrainLog::to_csv() const {
  std::ostringstream os;
  os << csv_header() << "\n";
  for (const LossRecord& r : records) {
    os << r.iteration << "," << r.d_loss << "," << r.g_adv << "," << r.g_diffuse << ","
       << r.seconds << "\n";
  }
  return os.str();
}

namespace {

// rng id-space offsets keep weight init and per-iteration sampling streams
// disjoint.
constexpr std::uint64_t kGenInitStream = 0x67656e;   // "gen"
constexpr std::uint64_t kDiscInitStream = 0x646973;  // "dis"
constexpr std::uint64_t kIterStreamBase = 1u << 20;

std::vector<std::vector<float>> snapshot(const std::vector<Tensor>& params) {
  std::vector<std::vector<float>> out;
  out.reserve(params.size());
  for (const Tensor& p : params)
    out.emplace_back(p.data(), p.data() + p.numel());
  return out;
}

void require_unchanged(const std::vector<Tensor>& params,
                       const std::vector<std::vector<float>>& before, const char* phase) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    SVBRDF_REQUIRE(std::memcmp(params[i].data(), before[i].data(),
                               before[i].size() * sizeof(float)) == 0,
                   std::string("frozen parameters changed during ") + phase);
  }
}

std::vector<Tensor> concat_params(std::vector<Tensor> a, const std::vector<Tensor>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// foo.ckpt -> foo_iter200.ckpt
std::string periodic_checkpoint_name(const std::string& path, int iter) {
  const std::size_t dot = path.rfind('.');
  const std::string suffix = "_iter" + std::to_string(iter);
  if (dot == std::string::npos || path.find('/', dot) != std::string::npos)
    return path + suffix;
  return path.substr(0, dot) + suffix + path.substr(dot);
}

}  // namespace

Trainer::Trainer(TrainConfig cfg, std::vector<LinearImage> photos, LinearImage guessed_diffuse)
    : cfg_(std::move(cfg)),
      photos_(std::move(photos)),
      guessed_diffuse_(std::move(guessed_diffuse)),
      g_([&] {
        Rng rng = Rng::substream(cfg_.seed, kGenInitStream);
        return nn::Generator(rng);
      }()),
      d_([&] {
        Rng rng = Rng::substream(cfg_.seed, kDiscInitStream);
        return nn::Discriminator(rng);
      }()),
      nr_opt_(concat_params(g_.encoder_params(), g_.nr_params()), cfg_.lr, cfg_.optimizer),
      pdp_opt_(g_.pdp_params(), cfg_.lr, cfg_.optimizer),
      d_opt_(d_.params(), cfg_.d_lr < 0.0f ? cfg_.lr : cfg_.d_lr, cfg_.optimizer) {
  cfg_.validate();
  SVBRDF_REQUIRE(!photos_.empty(), "trainer: no photos");
  for (const LinearImage& p : photos_) {
    SVBRDF_REQUIRE(p.same_shape(photos_[0]), "trainer: photos must share one shape");
    SVBRDF_REQUIRE(p.channels == 3, "trainer: photos must be RGB");
  }
  SVBRDF_REQUIRE(guessed_diffuse_.same_shape(photos_[0]),
                 "trainer: guessed diffuse must match the photo shape");
  SVBRDF_REQUIRE(photos_[0].width >= cfg_.patch_size && photos_[0].height >= cfg_.patch_size,
                 "trainer: photos smaller than patch_size");
  enc_nr_params_ = concat_params(g_.encoder_params(), g_.nr_params());
  pdp_params_ = g_.pdp_params();
  d_params_ = d_.params();
}

void Trainer::load_weights(const std::string& checkpoint_path) {
  nn::load_checkpoint(checkpoint_path, g_, d_, nullptr);
}

void Trainer::resume(const std::string& checkpoint_path) {
  std::vector<nn::OptimizerSnapshot> snaps;
  nn::CheckpointMeta meta = nn::load_checkpoint(checkpoint_path, g_, d_, &snaps);
  SVBRDF_REQUIRE(meta.count("iteration"), "resume: checkpoint lacks an iteration record");
  iteration_ = std::stoi(meta.at("iteration"));
  for (auto& snap : snaps) {
    if (snap.name == "nr") nr_opt_.restore(std::move(snap.states), snap.step);
    else if (snap.name == "pdp") pdp_opt_.restore(std::move(snap.states), snap.step);
    else if (snap.name == "d") d_opt_.restore(std::move(snap.states), snap.step);
    else throw DataError("resume: unknown optimizer group '" + snap.name + "'");
  }
}

void Trainer::save(const std::string& path) const {
  nn::CheckpointMeta meta;
  meta["iteration"] = std::to_string(iteration_);
  meta["seed"] = std::to_string(cfg_.seed);
  meta["patch_size"] = std::to_string(cfg_.patch_size);
  meta["camera_height"] = std::to_string(cfg_.camera_height);
  meta["intensity"] = std::to_string(cfg_.intensity);
  std::vector<nn::OptimizerSnapshot> snaps;
  snaps.push_back({"nr", nr_opt_.step_count(), nr_opt_.states()});
  snaps.push_back({"pdp", pdp_opt_.step_count(), pdp_opt_.states()});
  snaps.push_back({"d", d_opt_.step_count(), d_opt_.states()});
  nn::save_checkpoint(path, g_, d_, meta, snaps);
}

LossRecord Trainer::train_iteration() {
  const auto t0 = std::chrono::steady_clock::now();
  const int iter = iteration_;
  Rng rng = Rng::substream(cfg_.seed, kIterStreamBase + static_cast<std::uint64_t>(iter));
  PatchSample sample = sample_training_patch(photos_, guessed_diffuse_, cfg_.patch_size, rng);

  FieldParams fp;
  fp.camera_height = cfg_.camera_height;
  fp.crop_x = sample.origin_x;
  fp.crop_y = sample.origin_y;
  fp.full_width = photos_[0].width;
  fp.full_height = photos_[0].height;
  const DirectionField field = direction_field(cfg_.patch_size, cfg_.patch_size, fp);

  const Tensor real = nn::image_to_tensor(sample.photo_patch);
  const Tensor prior = nn::image_to_tensor(sample.diffuse_patch);

  LossRecord rec;
  rec.iteration = iter + 1;

  // ---- discriminator update (generator weights untouched) ----
  Tensor fake_detached;
  {
    NoGradGuard ng;
    fake_detached = nn::render_from_raw(g_.forward(real), field, cfg_.intensity);
  }
  auto g_before = cfg_.check_frozen ? snapshot(g_.params()) : std::vector<std::vector<float>>{};
  {
    Tensor d_loss = nn::add(nn::bce(d_.forward(real), 1.0f), nn::bce(d_.forward(fake_detached), 0.0f));
    rec.d_loss = d_loss.value();
    SVBRDF_NUMERIC_REQUIRE(std::isfinite(rec.d_loss),
                           "iteration " + std::to_string(iter + 1) +
                               ": non-finite discriminator loss " + std::to_string(rec.d_loss));
    d_opt_.zero_grad();
    d_loss.backward();
    d_opt_.step();
    d_opt_.zero_grad();
  }
  if (cfg_.check_frozen) require_unchanged(g_.params(), g_before, "the discriminator update");

  // ---- generator updates: nr_steps on {encoder, D_nr}, then pdp_steps on
  // {D_pdp}; every step re-runs forward/backward ----
  auto generator_phase = [&](nn::Optimizer& opt, const std::vector<Tensor>& frozen,
                             const char* phase, int steps) {
    for (int s = 0; s < steps; ++s) {
      nn::set_group_requires_grad(frozen, false);
      nn::set_group_requires_grad(d_params_, false);
      auto frozen_before = cfg_.check_frozen ? snapshot(frozen) : std::vector<std::vector<float>>{};
      auto d_before = cfg_.check_frozen ? snapshot(d_params_) : std::vector<std::vector<float>>{};

      Tensor raw = g_.forward(real);
      Tensor fake = nn::render_from_raw(raw, field, cfg_.intensity);
      Tensor adv = nn::bce(d_.forward(fake), 1.0f);
      Tensor gen_diffuse = nn::affine(nn::slice_channels(raw, 4, 7), 0.5f, 0.5f);
      Tensor diffuse_l1 = nn::l1(gen_diffuse, prior);
      Tensor total = nn::add(adv, nn::scale(diffuse_l1, cfg_.lambda_diffuse));

      rec.g_adv = adv.value();
      rec.g_diffuse = diffuse_l1.value();
      SVBRDF_NUMERIC_REQUIRE(
          std::isfinite(rec.g_adv) && std::isfinite(rec.g_diffuse),
          "iteration " + std::to_string(iter + 1) + ": non-finite generator loss (adv " +
              std::to_string(rec.g_adv) + ", diffuse " + std::to_string(rec.g_diffuse) + ")");

      opt.zero_grad();
      total.backward();
      opt.step();
      opt.zero_grad();

      nn::set_group_requires_grad(frozen, true);
      nn::set_group_requires_grad(d_params_, true);
      if (cfg_.check_frozen) {
        require_unchanged(frozen, frozen_before, phase);
        require_unchanged(d_params_, d_before, phase);
      }
    }
  };
  generator_phase(nr_opt_, pdp_params_, "the encoder/NR phase", cfg_.nr_steps);
  generator_phase(pdp_opt_, enc_nr_params_, "the PDP phase", cfg_.pdp_steps);

  ++iteration_;
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

TrainLog Trainer::run(int target_iterations) {
  TrainLog log;
  std::ofstream csv;
  if (!cfg_.log_path.empty()) {
    csv.open(cfg_.log_path, iteration_ == 0 ? std::ios::trunc : std::ios::app);
    SVBRDF_REQUIRE(csv.good(), "cannot open training log: " + cfg_.log_path);
    if (iteration_ == 0) csv << TrainLog::csv_header() << "\n";
  }
  while (iteration_ < target_iterations) {
    LossRecord rec = train_iteration();
    const bool logged = cfg_.log_every > 0 &&
                        (rec.iteration % cfg_.log_every == 0 || rec.iteration == 1 ||
                         rec.iteration == target_iterations);
    if (logged) {
      log.records.push_back(rec);
      if (csv.is_open()) {
        csv << rec.iteration << "," << rec.d_loss << "," << rec.g_adv << "," << rec.g_diffuse
            << "," << rec.seconds << "\n";
        csv.flush();
      }
      log_info("iter " + std::to_string(rec.iteration) + "/" + std::to_string(target_iterations) +
               "  d " + std::to_string(rec.d_loss) + "  adv " + std::to_string(rec.g_adv) +
               "  l1 " + std::to_string(rec.g_diffuse));
    }
    if (cfg_.checkpoint_every > 0 && !cfg_.checkpoint_path.empty() &&
        rec.iteration % cfg_.checkpoint_every == 0 && rec.iteration != target_iterations) {
      save(periodic_checkpoint_name(cfg_.checkpoint_path, rec.iteration));
    }
  }
  if (!cfg_.checkpoint_path.empty()) save(cfg_.checkpoint_path);
  return log;
}

void pretrain_stage(const TrainConfig& cfg, const LinearImage& proxy_photo) {
  // The proxy is its own single-image min-composite, so it doubles as the
  // diffuse prior.
  Trainer trainer(cfg, {proxy_photo}, proxy_photo);
  trainer.run(cfg.iterations_stage1);
  if (cfg.checkpoint_path.empty())
    log_warn("pretrain: no checkpoint path configured, weights discarded");
}

TrainLog train(const TrainConfig& cfg, std::vector<LinearImage> photos,
               LinearImage guessed_diffuse, const std::optional<std::string>& init_checkpoint,
               bool resume_full_state) {
  Trainer trainer(cfg, std::move(photos), std::move(guessed_diffuse));
  int target = cfg.iterations_single_stage;
  if (init_checkpoint) {
    if (resume_full_state) trainer.resume(*init_checkpoint);
    else trainer.load_weights(*init_checkpoint);
    target = cfg.iterations_stage2;
  }
  return trainer.run(target);
}

SvbrdfMaps estimate_maps(const nn::Generator& g, const LinearImage& photo) {
  SVBRDF_REQUIRE(photo.channels == 3, "estimate: photo must be RGB");
  SVBRDF_REQUIRE(photo.width % 8 == 0 && photo.height % 8 == 0,
                 "estimate: each photo dimension must be a multiple of 8, got " +
                     std::to_string(photo.width) + "x" + std::to_string(photo.height));
  NoGradGuard ng;
  Tensor raw = g.forward(nn::image_to_tensor(photo));
  return nn::decode_raw_tensor(raw);
}

}  // namespace svbrdf
