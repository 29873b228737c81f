#pragma once

#include "geoguide/inversion.hpp"

#include <cstddef>
#include <string_view>
#include <vector>

namespace geoguide {

/// Statistics of one finished run.
struct RunSummary {
  double initial_total = 0.0;
  double final_total = 0.0;
  /// text_alignment of the final image.
  double final_alignment = 0.0;
  /// morphing_score between E_I(source) and E_I(final image).
  double morph_score = 0.0;
  /// d_metric between evaluation-encoder batches of consecutive recorded frames.
  std::vector<double> intra_dm;
  /// d_metric between the final member directions and the text direction.
  double inter_dm = 0.0;
  std::size_t requested_dim = 0;
  /// Smallest rank actually used by the intra-modality metrics.
  std::size_t effective_dim = 0;
};

/// Second image encoder with a seed disjoint from the training one.
ToyEncoder evaluation_encoder(const InversionConfig& cfg, std::size_t input_dim);

RunSummary summarize_run(const MorphTrajectory& traj, const InversionSetup& setup);

/// Side of the synthetic source images used when no source is given.
inline constexpr int kStudySide = 16;

struct SeedRun {
  InversionSetup setup;
  MorphTrajectory trajectory;
  RunSummary summary;
};

/// One run of a seed batch: cfg.seed = seed, and the source is
/// synthetic_image(seed, 16, 16, 3) unless `source` is given. The encoders
/// depend only on base.encoder_seed, so every seed sees the same encoders.
SeedRun run_seed(const InversionConfig& base, std::uint64_t seed, const ImageTensor* source,
                 std::string_view prompt_src, std::string_view prompt_trg);

double median(std::vector<double> v);
double mean(const std::vector<double>& v);

}  // namespace geoguide
