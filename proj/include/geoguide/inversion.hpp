#pragma once

#include "geoguide/config_kv.hpp"
#include "geoguide/encoder.hpp"
#include "geoguide/geodesic.hpp"
#include "geoguide/image.hpp"
#include "geoguide/losses.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace geoguide {

enum class LossMode { directional, spherical, geodesic_total };
enum class Schedule { constant, cosine };
enum class OptimizerKind { gd, adam };

std::string_view to_string(LossMode m);
std::string_view to_string(Schedule s);
std::string_view to_string(OptimizerKind o);
LossMode parse_loss_mode(std::string_view s);
Schedule parse_schedule(std::string_view s);
OptimizerKind parse_optimizer(std::string_view s);

struct InversionConfig {
  std::size_t epochs = 800;
  double learning_rate = 2e-4;
  std::size_t ensembles = kDefaultEnsembles;
  std::size_t subspace_dim = 256;
  LossMode loss_mode = LossMode::geodesic_total;
  double lambda1 = kDefaultLambda1;
  double lambda2 = kDefaultLambda2;
  std::uint64_t seed = 0;
  Schedule schedule = Schedule::cosine;
  OptimizerKind optimizer = OptimizerKind::gd;
  std::size_t sample_every = 50;
  /// Sum member features and scale the source by N before normalizing,
  /// instead of averaging per-member directions.
  bool literal = false;
  /// Use (1 - SSIM(x, source)) / 2 as the perceptual term.
  bool perceptual = true;
  std::size_t embed_dim = 32;
  std::size_t text_input_dim = 64;
  std::uint64_t encoder_seed = 0;
  /// Workers for ensemble members; results do not depend on this.
  std::size_t threads = 1;

  /// Throws InvalidConfig.
  void validate() const;
  KeyValues to_kv() const;
  /// Overrides fields named in kv; unknown keys throw InvalidConfig.
  void apply_kv(const KeyValues& kv);
  /// FNV-1a of format_kv(to_kv()), as 16 hex digits.
  std::string hash() const;
};

/// base_lr * (1 + cos(pi * step / total_steps)) / 2 for 0 <= step <= total.
double cosine_lr(double base_lr, std::size_t step, std::size_t total_steps);

/// normalized(E_T(trg) - E_T(src)); throws DegenerateDirection.
Vector text_direction(const ToyEncoder& text_encoder, std::string_view prompt_src, std::string_view prompt_trg);

/// Frozen encoders and per-run constants.
struct InversionSetup {
  ToyEncoder image_encoder;
  ToyEncoder text_encoder;
  ImageTensor source;
  Vector source_feature;  // E_I(x_s)
  Vector text_direction;
};

/// Encoders are drawn from cfg.encoder_seed (image) and a derived seed (text).
InversionSetup make_setup(const InversionConfig& cfg, const ImageTensor& source, std::string_view prompt_src,
                          std::string_view prompt_trg);

struct MorphState {
  ImageTensor image;
  std::size_t iterate = 0;
  std::vector<LossReport> loss_history;
  std::vector<double> lr_history;
  std::vector<Vector> feature_trail;

  // Carried between steps.
  Matrix prev_member_features;  // N x D from the previous step; empty at start
  Vector adam_m;
  Vector adam_v;
  std::size_t inter_effective_dim = 0;
  std::size_t intra_effective_dim = 0;
};

MorphState initial_state(const InversionSetup& setup);

/// One iteration's loss with everything except the pixels frozen: the
/// sampled ensemble and both Q metrics. evaluate() is what the optimizer
/// differentiates.
class StepObjective {
public:
  StepObjective(const MorphState& state, const InversionConfig& cfg, const InversionSetup& setup);

  TotalLoss evaluate(const Vector& pixels) const;

  const std::vector<Augmentation>& members() const noexcept { return members_; }
  /// Member features E_I(aug_j(x)) at the pixels the objective was built for.
  const Matrix& member_features() const noexcept { return member_features_; }
  const BatchMetric& inter_metric() const noexcept { return inter_; }
  const BatchMetric& intra_metric() const noexcept { return intra_; }

private:
  const InversionConfig& cfg_;
  const InversionSetup& setup_;
  int height_, width_, channels_;
  std::vector<Augmentation> members_;
  Matrix member_features_;
  BatchMetric inter_;
  BatchMetric intra_;
  Vector prev_mean_;
};

/// Learning rate used at `iterate`.
double scheduled_lr(const InversionConfig& cfg, std::size_t iterate);

/// Samples the ensemble, evaluates the loss, takes one optimizer step and
/// clamps the pixels. Errors are rethrown with the iterate attached.
MorphState inversion_step(const MorphState& state, const InversionConfig& cfg, const InversionSetup& setup);

struct MorphTrajectory {
  std::vector<MorphState> states;  // strictly increasing iterates
  MorphState final_state;
  InversionConfig config;
  std::uint64_t seed = 0;
  std::string config_hash;
};

/// Runs cfg.epochs steps, recording the state every cfg.sample_every
/// iterates and at the end. Each recorded state appends E_I(x) to the
/// feature trail.
MorphTrajectory run_inversion(const InversionConfig& cfg, const ImageTensor& source, std::string_view prompt_src,
                              std::string_view prompt_trg);

/// Writes config.kv, trajectory.csv, frame_%06d.ppm (.pgm for one channel)
/// and features.emb1 into dir.
void write_trajectory(const std::filesystem::path& dir, const MorphTrajectory& traj,
                      const KeyValues& extra_config = {});

/// cos(normalized(E_I(x) - E_I(x_s)), text direction).
double text_alignment(const InversionSetup& setup, const ImageTensor& image);

/// Smooth synthetic test image: gradients plus a few random boxes and discs,
/// values inside [0.05, 0.95].
ImageTensor synthetic_image(std::uint64_t seed, int height, int width, int channels);

}  // namespace geoguide
