#include "geoguide/inversion.hpp"

#include "geoguide/error.hpp"
#include "geoguide/feature_io.hpp"
#include "geoguide/metrics.hpp"
#include "geoguide/random.hpp"
#include "parallel.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

namespace geoguide {

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidConfig, key + ": not a number: '" + s + "'");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::InvalidConfig, key + ": not a non-negative integer: '" + s + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw Error(ErrorCode::InvalidConfig, key + ": expected true or false, got '" + s + "'");
}

}  // namespace

std::string_view to_string(LossMode m) {
  switch (m) {
    case LossMode::directional: return "directional";
    case LossMode::spherical: return "spherical";
    case LossMode::geodesic_total: return "geodesic_total";
  }
  return "?";
}

std::string_view to_string(Schedule s) { return s == Schedule::constant ? "constant" : "cosine"; }

std::string_view to_string(OptimizerKind o) { return o == OptimizerKind::gd ? "gd" : "adam"; }

LossMode parse_loss_mode(std::string_view s) {
  if (s == "directional") return LossMode::directional;
  if (s == "spherical") return LossMode::spherical;
  if (s == "geodesic_total" || s == "geodesic-total" || s == "geodesic") return LossMode::geodesic_total;
  throw Error(ErrorCode::InvalidConfig, "unknown loss mode '" + std::string(s) + "'");
}

Schedule parse_schedule(std::string_view s) {
  if (s == "constant") return Schedule::constant;
  if (s == "cosine") return Schedule::cosine;
  throw Error(ErrorCode::InvalidConfig, "unknown schedule '" + std::string(s) + "'");
}

OptimizerKind parse_optimizer(std::string_view s) {
  if (s == "gd") return OptimizerKind::gd;
  if (s == "adam") return OptimizerKind::adam;
  throw Error(ErrorCode::InvalidConfig, "unknown optimizer '" + std::string(s) + "'");
}

void InversionConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
  if (epochs == 0) fail("epochs must be at least 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be finite and >= 0");
  if (ensembles == 0) fail("ensembles must be at least 1");
  if (subspace_dim == 0) fail("subspace_dim must be at least 1");
  if (!std::isfinite(lambda1) || lambda1 < 0.0) fail("lambda1 must be finite and >= 0");
  if (!std::isfinite(lambda2) || lambda2 < 0.0) fail("lambda2 must be finite and >= 0");
  if (sample_every == 0) fail("sample_every must be at least 1");
  if (embed_dim < 2) fail("embed_dim must be at least 2");
  if (text_input_dim == 0) fail("text_input_dim must be at least 1");
}

KeyValues InversionConfig::to_kv() const {
  return {
      {"epochs", std::to_string(epochs)},
      {"learning_rate", format_double(learning_rate)},
      {"ensembles", std::to_string(ensembles)},
      {"subspace_dim", std::to_string(subspace_dim)},
      {"loss_mode", std::string(to_string(loss_mode))},
      {"lambda1", format_double(lambda1)},
      {"lambda2", format_double(lambda2)},
      {"seed", std::to_string(seed)},
      {"schedule", std::string(to_string(schedule))},
      {"optimizer", std::string(to_string(optimizer))},
      {"sample_every", std::to_string(sample_every)},
      {"literal", literal ? "true" : "false"},
      {"perceptual", perceptual ? "true" : "false"},
      {"embed_dim", std::to_string(embed_dim)},
      {"text_input_dim", std::to_string(text_input_dim)},
      {"encoder_seed", std::to_string(encoder_seed)},
      {"threads", std::to_string(threads)},
  };
}

void InversionConfig::apply_kv(const KeyValues& kv) {
  for (const auto& [k, v] : kv) {
    if (k == "epochs") epochs = parse_uint(k, v);
    else if (k == "learning_rate") learning_rate = parse_double(k, v);
    else if (k == "ensembles") ensembles = parse_uint(k, v);
    else if (k == "subspace_dim") subspace_dim = parse_uint(k, v);
    else if (k == "loss_mode") loss_mode = parse_loss_mode(v);
    else if (k == "lambda1") lambda1 = parse_double(k, v);
    else if (k == "lambda2") lambda2 = parse_double(k, v);
    else if (k == "seed") seed = parse_uint(k, v);
    else if (k == "schedule") schedule = parse_schedule(v);
    else if (k == "optimizer") optimizer = parse_optimizer(v);
    else if (k == "sample_every") sample_every = parse_uint(k, v);
    else if (k == "literal") literal = parse_bool(k, v);
    else if (k == "perceptual") perceptual = parse_bool(k, v);
    else if (k == "embed_dim") embed_dim = parse_uint(k, v);
    else if (k == "text_input_dim") text_input_dim = parse_uint(k, v);
    else if (k == "encoder_seed") encoder_seed = parse_uint(k, v);
    else if (k == "threads") threads = parse_uint(k, v);
    else throw Error(ErrorCode::InvalidConfig, "unknown config key '" + k + "'");
  }
}

std::string InversionConfig::hash() const {
  // threads is left out: it does not change results.
  KeyValues kv = to_kv();
  std::erase_if(kv, [](const auto& p) { return p.first == "threads"; });
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(format_kv(kv))));
  return buf;
}

double cosine_lr(double base_lr, std::size_t step, std::size_t total_steps) {
  if (total_steps == 0) return base_lr;
  const double t = static_cast<double>(std::min(step, total_steps)) / static_cast<double>(total_steps);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

Vector text_direction(const ToyEncoder& text_encoder, std::string_view prompt_src, std::string_view prompt_trg) {
  const Vector d = encode_prompt(text_encoder, prompt_trg) - encode_prompt(text_encoder, prompt_src);
  if (d.norm() < kZeroNorm) {
    throw Error(ErrorCode::DegenerateDirection, "source and target prompts encode to the same feature");
  }
  return d.normalized();
}

InversionSetup make_setup(const InversionConfig& cfg, const ImageTensor& source, std::string_view prompt_src,
                          std::string_view prompt_trg) {
  cfg.validate();
  if (source.size() == 0) throw Error(ErrorCode::InvalidConfig, "source image is empty");
  InversionSetup s;
  s.image_encoder = make_encoder(EncoderKind::image, source.size(), cfg.embed_dim, cfg.encoder_seed);
  s.text_encoder = make_encoder(EncoderKind::text, cfg.text_input_dim, cfg.embed_dim, mix_seed(cfg.encoder_seed, 1));
  s.source = source;
  s.source_feature = encode(s.image_encoder, source.pixels);
  s.text_direction = text_direction(s.text_encoder, prompt_src, prompt_trg);
  return s;
}

MorphState initial_state(const InversionSetup& setup) {
  MorphState st;
  st.image = setup.source;
  return st;
}

StepObjective::StepObjective(const MorphState& state, const InversionConfig& cfg, const InversionSetup& setup)
    : cfg_(cfg),
      setup_(setup),
      height_(state.image.height),
      width_(state.image.width),
      channels_(state.image.channels) {
  const std::size_t n = cfg.ensembles;
  const auto d = static_cast<Eigen::Index>(setup.source_feature.size());
  members_ = sample_augmentations(mix_seed(cfg.seed, state.iterate), n, height_, width_);

  member_features_.resize(static_cast<Eigen::Index>(n), d);
  detail::parallel_for(n, cfg.threads, [&](std::size_t j) {
    const ImageTensor xa = apply_augmentation(members_[j], state.image);
    member_features_.row(static_cast<Eigen::Index>(j)) = encode(setup.image_encoder, xa.pixels).transpose();
  });

  if (cfg.loss_mode != LossMode::geodesic_total) return;

  Matrix dirs(static_cast<Eigen::Index>(n), d);
  Matrix text(static_cast<Eigen::Index>(n), d);
  for (Eigen::Index j = 0; j < dirs.rows(); ++j) {
    const Vector delta = member_features_.row(j).transpose() - setup.source_feature;
    dirs.row(j) = delta.norm() < kZeroNorm ? setup.text_direction.transpose() : delta.normalized().transpose();
    text.row(j) = setup.text_direction.transpose();
  }
  inter_ = metric_between_batches(dirs, text, cfg.subspace_dim);

  const Matrix& prev = state.prev_member_features.size() > 0 ? state.prev_member_features : member_features_;
  intra_ = metric_between_batches(prev, member_features_, cfg.subspace_dim);
  prev_mean_ = prev.colwise().mean().transpose();
}

TotalLoss StepObjective::evaluate(const Vector& pixels) const {
  const ImageTensor x(height_, width_, channels_, pixels);
  const std::size_t n = members_.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const ToyEncoder& enc = setup_.image_encoder;
  const Vector& z_src = setup_.source_feature;
  const Vector& tdir = setup_.text_direction;

  std::vector<ImageTensor> views(n);
  std::vector<Vector> feats(n);
  detail::parallel_for(n, cfg_.threads, [&](std::size_t j) {
    views[j] = apply_augmentation(members_[j], x);
    feats[j] = encode(enc, views[j].pixels);
  });

  auto inter_one = [&](const Vector& z, const Vector& base) -> LossValue {
    switch (cfg_.loss_mode) {
      case LossMode::directional: return directional_loss(z - base, tdir);
      case LossMode::spherical: return spherical_sq_loss(z - base, tdir);
      case LossMode::geodesic_total: return imc_loss(inter_.metric, z, base, tdir);
    }
    return {};
  };

  LossValue inter;
  std::vector<Vector> g_inter(n);
  if (cfg_.literal) {
    Vector sum = Vector::Zero(z_src.size());
    for (const auto& z : feats) sum += z;
    inter = inter_one(sum, static_cast<double>(n) * z_src);
    for (auto& g : g_inter) g = inter.grad;
  } else {
    for (std::size_t j = 0; j < n; ++j) {
      const LossValue l = inter_one(feats[j], z_src);
      inter.value += inv_n * l.value;
      g_inter[j] = inv_n * l.grad;
    }
  }

  LossValue intra;
  std::vector<Vector> g_intra;
  if (cfg_.loss_mode == LossMode::geodesic_total) {
    Vector mean = Vector::Zero(z_src.size());
    for (const auto& z : feats) mean += z;
    mean *= inv_n;
    const LossValue l = imr_loss(intra_.metric, prev_mean_, mean);
    intra.value = l.value;
    g_intra.assign(n, inv_n * l.grad);
  }

  std::vector<Vector> px_inter(n);
  std::vector<Vector> px_intra(n);
  detail::parallel_for(n, cfg_.threads, [&](std::size_t j) {
    auto pull = [&](const Vector& gz) {
      ImageTensor gy(height_, width_, channels_, encode_backward(enc, views[j].pixels, gz));
      return apply_adjoint(members_[j], gy).pixels;
    };
    px_inter[j] = pull(g_inter[j]);
    if (!g_intra.empty()) px_intra[j] = pull(g_intra[j]);
  });

  inter.grad = Vector::Zero(pixels.size());
  for (const auto& g : px_inter) inter.grad += g;
  if (!g_intra.empty()) {
    intra.grad = Vector::Zero(pixels.size());
    for (const auto& g : px_intra) intra.grad += g;
  }

  LossValue perceptual;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  if (cfg_.loss_mode == LossMode::geodesic_total) {
    lambda1 = cfg_.lambda1;
    if (cfg_.perceptual && cfg_.lambda2 != 0.0) {
      lambda2 = cfg_.lambda2;
      perceptual.value = 0.5 * (1.0 - ssim(x, setup_.source));
      perceptual.grad = -0.5 * ssim_gradient(x, setup_.source);
    }
  }
  return total_loss(inter, intra, perceptual, lambda1, lambda2);
}

double scheduled_lr(const InversionConfig& cfg, std::size_t iterate) {
  if (cfg.schedule == Schedule::constant) return cfg.learning_rate;
  return cosine_lr(cfg.learning_rate, iterate, cfg.epochs);
}

namespace {

void advance(MorphState& state, const InversionConfig& cfg, const InversionSetup& setup) {
  try {
    const StepObjective obj(state, cfg, setup);
    const TotalLoss tl = obj.evaluate(state.image.pixels);
    const double lr = scheduled_lr(cfg, state.iterate);
    if (cfg.optimizer == OptimizerKind::gd) {
      state.image.pixels -= lr * tl.grad;
    } else {
      constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
      if (state.adam_m.size() != tl.grad.size()) {
        state.adam_m = Vector::Zero(tl.grad.size());
        state.adam_v = Vector::Zero(tl.grad.size());
      }
      state.adam_m = b1 * state.adam_m + (1.0 - b1) * tl.grad;
      state.adam_v = b2 * state.adam_v + (1.0 - b2) * tl.grad.cwiseAbs2();
      const double t = static_cast<double>(state.iterate + 1);
      const double c1 = 1.0 - std::pow(b1, t);
      const double c2 = 1.0 - std::pow(b2, t);
      state.image.pixels.array() -=
          lr * (state.adam_m.array() / c1) / ((state.adam_v.array() / c2).sqrt() + eps);
    }
    state.image.clamp();
    state.prev_member_features = obj.member_features();
    state.inter_effective_dim = obj.inter_metric().effective_dim;
    state.intra_effective_dim = obj.intra_metric().effective_dim;
    state.loss_history.push_back(tl.report);
    state.lr_history.push_back(lr);
    ++state.iterate;
  } catch (const Error& e) {
    throw e.with_context("(at iterate " + std::to_string(state.iterate) + ")");
  }
}

}  // namespace

MorphState inversion_step(const MorphState& state, const InversionConfig& cfg, const InversionSetup& setup) {
  MorphState next = state;
  advance(next, cfg, setup);
  return next;
}

MorphTrajectory run_inversion(const InversionConfig& cfg, const ImageTensor& source, std::string_view prompt_src,
                              std::string_view prompt_trg) {
  const InversionSetup setup = make_setup(cfg, source, prompt_src, prompt_trg);
  MorphTrajectory traj;
  traj.config = cfg;
  traj.seed = cfg.seed;
  traj.config_hash = cfg.hash();

  MorphState state = initial_state(setup);
  auto record = [&] {
    state.feature_trail.push_back(encode(setup.image_encoder, state.image.pixels));
    traj.states.push_back(state);
  };
  record();
  for (std::size_t t = 0; t < cfg.epochs; ++t) {
    advance(state, cfg, setup);
    if (state.iterate % cfg.sample_every == 0 || state.iterate == cfg.epochs) record();
  }
  traj.final_state = std::move(state);
  return traj;
}

void write_trajectory(const std::filesystem::path& dir, const MorphTrajectory& traj, const KeyValues& extra_config) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());

  KeyValues kv = traj.config.to_kv();
  kv.insert(kv.end(), extra_config.begin(), extra_config.end());
  kv.emplace_back("config_hash", traj.config_hash);
  write_kv_file(dir / "config.kv", kv);

  {
    std::ofstream out(dir / "trajectory.csv");
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + (dir / "trajectory.csv").string());
    out << "iterate,total,inter,intra,perceptual,lr\n";
    const auto& hist = traj.final_state.loss_history;
    for (std::size_t i = 0; i < hist.size(); ++i) {
      const LossReport& r = hist[i];
      out << i << ',' << format_double(r.total) << ',' << format_double(r.inter_term) << ','
          << format_double(r.intra_term) << ',' << format_double(r.perceptual_term) << ','
          << format_double(traj.final_state.lr_history[i]) << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "failed writing trajectory.csv");
  }

  for (const MorphState& s : traj.states) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06zu.%s", s.iterate, s.image.channels == 1 ? "pgm" : "ppm");
    write_image(dir / name, s.image);
  }

  const auto& trail = traj.final_state.feature_trail;
  Matrix feats(static_cast<Eigen::Index>(trail.size()), trail.empty() ? 0 : trail.front().size());
  for (std::size_t i = 0; i < trail.size(); ++i) feats.row(static_cast<Eigen::Index>(i)) = trail[i].transpose();
  write_emb1(dir / "features.emb1", feats);
}

double text_alignment(const InversionSetup& setup, const ImageTensor& image) {
  const Vector delta = encode(setup.image_encoder, image.pixels) - setup.source_feature;
  if (delta.norm() < kZeroNorm) return 0.0;
  return delta.normalized().dot(setup.text_direction);
}

ImageTensor synthetic_image(std::uint64_t seed, int height, int width, int channels) {
  Rng rng(seed);
  ImageTensor img(height, width, channels);
  for (int c = 0; c < channels; ++c) {
    const double base = 0.3 + 0.4 * rng.uniform();
    const double gy = 0.4 * (rng.uniform() - 0.5);
    const double gx = 0.4 * (rng.uniform() - 0.5);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        img.at(y, x, c) = base + gy * (y + 0.5) / height + gx * (x + 0.5) / width;
      }
    }
  }
  for (int b = 0; b < 3; ++b) {
    const int h = 1 + static_cast<int>(rng.uniform_int(0, std::max(0, height / 2 - 1)));
    const int w = 1 + static_cast<int>(rng.uniform_int(0, std::max(0, width / 2 - 1)));
    const int top = static_cast<int>(rng.uniform_int(0, height - h));
    const int left = static_cast<int>(rng.uniform_int(0, width - w));
    for (int c = 0; c < channels; ++c) {
      const double v = rng.uniform();
      for (int y = top; y < top + h; ++y)
        for (int x = left; x < left + w; ++x) img.at(y, x, c) = 0.5 * img.at(y, x, c) + 0.5 * v;
    }
  }
  for (int d = 0; d < 2; ++d) {
    const double cy = rng.uniform() * height;
    const double cx = rng.uniform() * width;
    const double r = (0.1 + 0.2 * rng.uniform()) * std::min(height, width);
    for (int c = 0; c < channels; ++c) {
      const double v = rng.uniform();
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
          const double dy = y + 0.5 - cy, dx = x + 0.5 - cx;
          if (dy * dy + dx * dx <= r * r) img.at(y, x, c) = 0.6 * img.at(y, x, c) + 0.4 * v;
        }
    }
  }
  img.pixels = img.pixels.cwiseMax(0.05).cwiseMin(0.95);
  return img;
}

}  // namespace geoguide
