#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "svbrdf/checkpoint.hpp"
#include "svbrdf/image.hpp"
#include "svbrdf/maps.hpp"
#include "svbrdf/models.hpp"
#include "svbrdf/optim.hpp"
#include "svbrdf/render.hpp"

namespace svbrdf {

struct TrainConfig {
  int patch_size = 256;
  float lr = 2e-5f;
  float d_lr = -1.0f;  // < 0 means "same as lr"
  int iterations_stage1 = 10000;
  int iterations_stage2 = 15000;
  int iterations_single_stage = 20000;
  int nr_steps = 5;  // encoder + normal/roughness head steps per iteration
  int pdp_steps = 1;  // diffuse/specular head steps per iteration
  float lambda_diffuse = 1.0f;
  float intensity = kDefaultIntensity;
  float camera_height = 1.0f;
  std::uint64_t seed = 0;
  int log_every = 50;
  int checkpoint_every = 1000;  // 0 disables periodic checkpoints
  std::string checkpoint_path;  // final checkpoint; periodic ones get _iterN
  std::string log_path;         // CSV; empty = no file
  nn::OptKind optimizer = nn::OptKind::adam;
  bool check_frozen = false;  // bit-verify frozen groups after every phase

  void validate() const;
};

struct LossRecord {
  int iteration = 0;  // 1-based
  float d_loss = 0.0f;
  float g_adv = 0.0f;
  float g_diffuse = 0.0f;  // L1 of the last generator step, logged even at lambda 0
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<LossRecord> records;
  static const char* csv_header();  // iteration,d_loss,g_adv,g_diffuse,seconds
  std::string to_csv() const;
};

// Owns the networks, the three optimizer groups (encoder+NR head, PDP head,
// discriminator) and the iteration counter. One instance per training run.
class Trainer {
 public:
  Trainer(TrainConfig cfg, std::vector<LinearImage> photos, LinearImage guessed_diffuse);

  // Weights only (stage-2 fine-tuning from a pretrained checkpoint).
  void load_weights(const std::string& checkpoint_path);
  // Full state: weights, optimizer moments and iteration counter.
  void resume(const std::string& checkpoint_path);

  // Runs until the global iteration counter reaches target_iterations.
  TrainLog run(int target_iterations);

  LossRecord train_iteration();

  void save(const std::string& path) const;

  const nn::Generator& generator() const { return g_; }
  const nn::Discriminator& discriminator() const { return d_; }
  int iteration() const { return iteration_; }
  const TrainConfig& config() const { return cfg_; }

 private:
  TrainConfig cfg_;
  std::vector<LinearImage> photos_;
  LinearImage guessed_diffuse_;
  nn::Generator g_;
  nn::Discriminator d_;
  nn::Optimizer nr_opt_, pdp_opt_, d_opt_;
  std::vector<nn::Tensor> enc_nr_params_, pdp_params_, d_params_;
  int iteration_ = 0;
};

// Stage 1: trains on a single proxy image (its own diffuse prior) for
// iterations_stage1 and writes cfg.checkpoint_path. The maps themselves are
// throwaway; only the weights matter.
void pretrain_stage(const TrainConfig& cfg, const LinearImage& proxy_photo);

// Stage 2 / single stage: iterations_stage2 when an init checkpoint is
// given, iterations_single_stage otherwise.
TrainLog train(const TrainConfig& cfg, std::vector<LinearImage> photos,
               LinearImage guessed_diffuse, const std::optional<std::string>& init_checkpoint,
               bool resume_full_state = false);

// Full-resolution forward + decode; photo dimensions must be multiples of 8.
SvbrdfMaps estimate_maps(const nn::Generator& g, const LinearImage& photo);

}  // namespace svbrdf
