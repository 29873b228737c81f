#include "geoguide/evaluation.hpp"

#include "geoguide/error.hpp"
#include "geoguide/metrics.hpp"
#include "geoguide/random.hpp"

#include <algorithm>
#include <numeric>

namespace geoguide {

namespace {

constexpr std::uint64_t kEvalStream = 0x65766131;  // "eva1"

Matrix member_batch(const ToyEncoder& enc, const std::vector<Augmentation>& members, const ImageTensor& img) {
  Matrix out(static_cast<Eigen::Index>(members.size()), static_cast<Eigen::Index>(enc.output_dim()));
  for (std::size_t j = 0; j < members.size(); ++j) {
    out.row(static_cast<Eigen::Index>(j)) = encode(enc, apply_augmentation(members[j], img).pixels).transpose();
  }
  return out;
}

}  // namespace

ToyEncoder evaluation_encoder(const InversionConfig& cfg, std::size_t input_dim) {
  return make_encoder(EncoderKind::image, input_dim, cfg.embed_dim, mix_seed(cfg.encoder_seed, kEvalStream));
}

RunSummary summarize_run(const MorphTrajectory& traj, const InversionSetup& setup) {
  const InversionConfig& cfg = traj.config;
  const MorphState& fin = traj.final_state;
  if (fin.loss_history.empty() || traj.states.empty()) {
    throw Error(ErrorCode::InvalidConfig, "trajectory has no steps");
  }
  RunSummary s;
  s.initial_total = fin.loss_history.front().total;
  s.final_total = fin.loss_history.back().total;
  s.final_alignment = text_alignment(setup, fin.image);
  s.morph_score = morphing_score(setup.source_feature, encode(setup.image_encoder, fin.image.pixels));
  s.requested_dim = cfg.subspace_dim;

  const ImageTensor& img0 = traj.states.front().image;
  const auto members = sample_augmentations(mix_seed(cfg.seed, kEvalStream), cfg.ensembles, img0.height, img0.width);
  const ToyEncoder eval = evaluation_encoder(cfg, img0.size());

  std::size_t eff = cfg.subspace_dim;
  Matrix prev = member_batch(eval, members, traj.states.front().image);
  for (std::size_t k = 1; k < traj.states.size(); ++k) {
    Matrix curr = member_batch(eval, members, traj.states[k].image);
    const BatchMetric bm = metric_between_batches(prev, curr, cfg.subspace_dim);
    eff = std::min(eff, bm.effective_dim);
    const Vector a = prev.colwise().mean().transpose();
    const Vector b = curr.colwise().mean().transpose();
    s.intra_dm.push_back(d_metric(bm.metric, a, b));
    prev = std::move(curr);
  }

  const Matrix feats = member_batch(setup.image_encoder, members, fin.image);
  Matrix dirs(feats.rows(), feats.cols());
  Matrix text(feats.rows(), feats.cols());
  for (Eigen::Index j = 0; j < feats.rows(); ++j) {
    const Vector d = feats.row(j).transpose() - setup.source_feature;
    dirs.row(j) = d.norm() < kZeroNorm ? setup.text_direction.transpose() : d.normalized().transpose();
    text.row(j) = setup.text_direction.transpose();
  }
  const BatchMetric inter = metric_between_batches(dirs, text, cfg.subspace_dim);
  eff = std::min(eff, fin.intra_effective_dim);
  s.inter_dm = d_metric(inter.metric, dirs.colwise().mean().transpose(), setup.text_direction);
  s.effective_dim = eff;
  return s;
}

SeedRun run_seed(const InversionConfig& base, std::uint64_t seed, const ImageTensor* source,
                 std::string_view prompt_src, std::string_view prompt_trg) {
  InversionConfig cfg = base;
  cfg.seed = seed;
  const ImageTensor img = source != nullptr ? *source : synthetic_image(seed, kStudySide, kStudySide, 3);
  SeedRun r;
  r.setup = make_setup(cfg, img, prompt_src, prompt_trg);
  r.trajectory = run_inversion(cfg, img, prompt_src, prompt_trg);
  r.summary = summarize_run(r.trajectory, r.setup);
  return r;
}

double median(std::vector<double> v) {
  if (v.empty()) throw Error(ErrorCode::EmptyBatch, "median of an empty list");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) throw Error(ErrorCode::EmptyBatch, "mean of an empty list");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace geoguide
