#include "cli.hpp"

#include "geoguide/error.hpp"
#include "geoguide/evaluation.hpp"
#include "geoguide/feature_io.hpp"
#include "geoguide/metrics.hpp"
#include "geoguide/random.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace geoguide::cli {

namespace {

constexpr const char* kDefaultSrcPrompt = "a photo of a cat";
constexpr const char* kDefaultTrgPrompt = "a photo of a dog";

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Flags that map one-to-one onto InversionConfig keys.
struct ConfigFlag {
  const char* flag;
  const char* key;
  const char* help;
};

constexpr ConfigFlag kConfigFlags[] = {
    {"--epochs", "epochs", "Optimizer steps"},
    {"--lr", "learning_rate", "Base learning rate"},
    {"--ensembles", "ensembles", "Augmented copies per step"},
    {"--subspace-dim", "subspace_dim", "Requested subspace dimension"},
    {"--loss", "loss_mode", "directional | spherical | geodesic-total"},
    {"--lambda1", "lambda1", "Weight of the intra-modality term"},
    {"--lambda2", "lambda2", "Weight of the perceptual term"},
    {"--seed", "seed", "Master seed"},
    {"--schedule", "schedule", "constant | cosine"},
    {"--optimizer", "optimizer", "gd | adam"},
    {"--sample-every", "sample_every", "Record a frame every this many steps"},
    {"--embed-dim", "embed_dim", "Feature dimension D of the toy encoders"},
    {"--text-input-dim", "text_input_dim", "Length of prompt vectors"},
    {"--encoder-seed", "encoder_seed", "Seed of the frozen encoders"},
    {"--threads", "threads", "Workers for ensemble members (0 = auto)"},
};

// Keys a config file may carry besides the InversionConfig ones.
constexpr const char* kRunKeys[] = {"source", "src_prompt", "trg_prompt", "config_hash"};

struct ConfigOptions {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  bool literal = false;
  bool no_perceptual = false;
  CLI::Option* literal_opt = nullptr;
  CLI::Option* no_perceptual_opt = nullptr;
  std::string config_path;
};

void add_config_flags(CLI::App* app, ConfigOptions& o) {
  for (const auto& f : kConfigFlags) {
    o.options[f.key] = app->add_option(f.flag, o.values[f.key], f.help);
  }
  o.literal_opt = app->add_flag("--literal", o.literal, "Sum member features instead of averaging directions");
  o.no_perceptual_opt = app->add_flag("--no-perceptual", o.no_perceptual, "Drop the SSIM perceptual term");
  app->add_option("--config", o.config_path, "key=value file; flags override it");
}

struct Resolved {
  InversionConfig cfg;
  KeyValues run_keys;  // source/prompt entries read from the config file
};

// default < GEOGUIDE_THREADS < config file < flags
Resolved resolve_config(const ConfigOptions& o) {
  Resolved r;
  if (const char* env = std::getenv("GEOGUIDE_THREADS"); env != nullptr && *env != '\0') {
    r.cfg.apply_kv({{"threads", env}});
  }
  if (!o.config_path.empty()) {
    KeyValues file = read_kv_file(o.config_path);
    KeyValues cfg_part;
    for (auto& kv : file) {
      const bool run_key = std::find(std::begin(kRunKeys), std::end(kRunKeys), kv.first) != std::end(kRunKeys);
      (run_key ? r.run_keys : cfg_part).push_back(kv);
    }
    r.cfg.apply_kv(cfg_part);
  }
  KeyValues flags;
  for (const auto& f : kConfigFlags) {
    if (o.options.at(f.key)->count() > 0) flags.emplace_back(f.key, o.values.at(f.key));
  }
  if (o.literal_opt->count() > 0) flags.emplace_back("literal", o.literal ? "true" : "false");
  if (o.no_perceptual_opt->count() > 0) flags.emplace_back("perceptual", o.no_perceptual ? "false" : "true");
  r.cfg.apply_kv(flags);
  r.cfg.validate();
  return r;
}

std::string pick(const std::string& flag_value, const KeyValues& file, const char* key, const std::string& fallback) {
  if (!flag_value.empty()) return flag_value;
  if (auto v = kv_lookup(file, key)) return *v;
  return fallback;
}

std::string loss_line(const LossReport& r, std::size_t iterate) {
  std::ostringstream ss;
  ss << "final iterate=" << iterate << " total=" << num(r.total) << " inter=" << num(r.inter_term)
     << " intra=" << num(r.intra_term) << " perceptual=" << num(r.perceptual_term) << " lambda1=" << num(r.lambda1)
     << " lambda2=" << num(r.lambda2);
  return ss.str();
}

// ---------------------------------------------------------------- flow

struct FlowArgs {
  std::string src, dst, out;
  std::size_t subspace_dim = 8;
  std::vector<double> nu{0.0, 0.5, 1.0};
  std::size_t nodes = 4001;
};

int cmd_flow(const FlowArgs& a, std::ostream& out) {
  const Matrix A = read_emb1(a.src);
  const Matrix B = read_emb1(a.dst);
  if (A.cols() != B.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "feature widths differ: " + std::to_string(A.cols()) + " vs " +
                                                  std::to_string(B.cols()));
  }
  const auto d = static_cast<std::size_t>(A.cols());
  const std::size_t dim = std::clamp<std::size_t>(a.subspace_dim, 1, std::max<std::size_t>(d, 1));
  const SubspaceBasis ps = extract_subspace(A, dim);
  const SubspaceBasis pt = extract_subspace(B, dim);
  const std::size_t r = std::min(ps.sub_dim(), pt.sub_dim());
  const GeodesicFlow flow = geodesic_flow(ps.truncated(r), pt.truncated(r));
  const GuidanceMetric q = q_matrix(flow);
  const Matrix q_ref = q_matrix_trapezoid(flow, a.nodes);
  const FlowResiduals res = flow_residuals(flow);

  std::filesystem::create_directories(a.out);
  Matrix angles(static_cast<Eigen::Index>(flow.angles.size()), 1);
  for (std::size_t i = 0; i < flow.angles.size(); ++i) angles(static_cast<Eigen::Index>(i), 0) = flow.angles[i];
  write_csv(std::filesystem::path(a.out) / "angles.csv", angles, {{"column", "theta"}});

  std::string nu_list;
  for (std::size_t i = 0; i < a.nu.size(); ++i) {
    write_emb1(std::filesystem::path(a.out) / ("pi_" + std::to_string(i) + ".emb1"), evaluate_flow(flow, a.nu[i]).basis());
    nu_list += (i ? "," : "") + num(a.nu[i]);
  }
  write_emb1(std::filesystem::path(a.out) / "q.emb1", q.q());

  const double quad = (q.q() - q_ref).norm();
  write_kv_file(std::filesystem::path(a.out) / "diagnostics.kv",
                {{"src", a.src},
                 {"dst", a.dst},
                 {"ambient_dim", std::to_string(d)},
                 {"requested_dim", std::to_string(a.subspace_dim)},
                 {"effective_dim", std::to_string(r)},
                 {"nu", nu_list},
                 {"min_eigenvalue", num(q.eigen_floor())},
                 {"quadrature_nodes", std::to_string(a.nodes)},
                 {"quadrature_residual", num(quad)},
                 {"cosine_residual", num(res.cosine_part)},
                 {"sine_residual", num(res.sine_part)}});
  out << "flow dim=" << r << " (requested " << a.subspace_dim << ") max_angle="
      << num(flow.angles.empty() ? 0.0 : flow.angles.back()) << " min_eigenvalue=" << num(q.eigen_floor())
      << " quadrature_residual=" << num(quad) << "\n";
  return 0;
}

// ---------------------------------------------------------------- invert

struct InvertArgs {
  std::string source, src_prompt, trg_prompt, out;
  ConfigOptions config;
};

int cmd_invert(const InvertArgs& a, std::ostream& out) {
  const Resolved r = resolve_config(a.config);
  const std::string source = pick(a.source, r.run_keys, "source", "");
  const std::string sp = pick(a.src_prompt, r.run_keys, "src_prompt", "");
  const std::string tp = pick(a.trg_prompt, r.run_keys, "trg_prompt", "");
  if (source.empty()) throw Error(ErrorCode::InvalidConfig, "--source is required");
  if (sp.empty() || tp.empty()) throw Error(ErrorCode::InvalidConfig, "--src-prompt and --trg-prompt are required");

  const ImageTensor img = read_image(source);
  const MorphTrajectory traj = run_inversion(r.cfg, img, sp, tp);
  write_trajectory(a.out, traj, {{"source", source}, {"src_prompt", sp}, {"trg_prompt", tp}});
  out << loss_line(traj.final_state.loss_history.back(), traj.final_state.iterate) << "\n";
  return 0;
}

// ---------------------------------------------------------------- score

struct ScoreArgs {
  std::string mode;
  std::vector<std::string> inputs;
  std::string out;
  std::size_t subspace_dim = 256;
  std::vector<double> coeffs{0.0};
};

Matrix unit_rows(const Matrix& m) {
  Matrix u = m;
  for (Eigen::Index i = 0; i < u.rows(); ++i) u.row(i) = normalized(m.row(i).transpose(), "feature row").transpose();
  return u;
}

void require_inputs(const ScoreArgs& a, std::size_t n) {
  if (a.inputs.size() != n) {
    throw Error(ErrorCode::InvalidConfig,
                "mode " + a.mode + " takes " + std::to_string(n) + " inputs, got " + std::to_string(a.inputs.size()));
  }
}

void require_same_shape(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::ShapeMismatch, std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                                              std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

int cmd_score(const ScoreArgs& a, std::ostream& out) {
  ScoreTable table;
  table.kind = a.mode;
  if (a.mode == "psnr" || a.mode == "ssim") {
    require_inputs(a, 2);
    const ImageTensor x = read_image(a.inputs[0]);
    const ImageTensor y = read_image(a.inputs[1]);
    table.add(a.mode, {a.mode == "psnr" ? psnr(x, y) : ssim(x, y)});
  } else if (a.mode == "morph") {
    require_inputs(a, 2);
    const Matrix x = read_emb1(a.inputs[0]);
    const Matrix y = read_emb1(a.inputs[1]);
    require_same_shape(x, y);
    const Matrix ux = unit_rows(x), uy = unit_rows(y);
    std::vector<double> s;
    for (Eigen::Index i = 0; i < ux.rows(); ++i) s.push_back(morphing_score(ux.row(i).transpose(), uy.row(i).transpose()));
    table.add("morph", s);
  } else if (a.mode == "dm") {
    require_inputs(a, 2);
    const Matrix x = read_emb1(a.inputs[0]);
    const Matrix y = read_emb1(a.inputs[1]);
    require_same_shape(x, y);
    const BatchMetric bm = metric_between_batches(x, y, a.subspace_dim);
    const Matrix ux = unit_rows(x), uy = unit_rows(y);
    std::vector<double> s;
    for (Eigen::Index i = 0; i < ux.rows(); ++i) s.push_back(d_metric(bm.metric, ux.row(i).transpose(), uy.row(i).transpose()));
    table.add("dm", s);
  } else if (a.mode == "gap") {
    require_inputs(a, 2);
    const Matrix img = read_emb1(a.inputs[0]);
    const Matrix txt = read_emb1(a.inputs[1]);
    require_same_shape(img, txt);
    table.add("gap_norm", {modality_gap(img, txt).gap_norm});
    for (double c : a.coeffs) {
      const GapReport g = modality_gap(img, txt, c);
      std::vector<double> s;
      for (Eigen::Index i = 0; i < img.rows(); ++i) s.push_back(modulated_alignment(g, img.row(i).transpose(), txt.row(i).transpose()));
      table.add("alignment_c=" + num(c), s);
    }
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown score mode '" + a.mode + "'");
  }
  if (!a.out.empty()) write_score_table(a.out, table);
  out << "label,mean,std,n\n";
  for (const auto& row : table.rows) out << row.label << ',' << num(row.mean) << ',' << num(row.std) << ',' << row.n << "\n";
  return 0;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::vector<std::size_t> dims{16, 32, 64, 128};
  std::vector<std::size_t> batches{8, 16, 32};
  std::size_t trials = 5;
  std::uint64_t seed = 0;
  std::string out;
};

struct BenchCell {
  std::size_t n, d;
  std::string op;
  double median_ms;
};

double fit_slope(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 2) return std::nan("");
  double mx = 0, my = 0;
  for (auto [x, y] : pts) mx += std::log(x), my += std::log(y);
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxy = 0, sxx = 0;
  for (auto [x, y] : pts) {
    sxy += (std::log(x) - mx) * (std::log(y) - my);
    sxx += (std::log(x) - mx) * (std::log(x) - mx);
  }
  return sxx > 0 ? sxy / sxx : std::nan("");
}

std::string slope_text(double s) {
  if (std::isnan(s)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", s);
  return buf;
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  if (a.dims.empty() || a.batches.empty() || a.trials == 0) {
    throw Error(ErrorCode::InvalidConfig, "bench needs at least one dim, one batch size and one trial");
  }
  for (auto v : a.dims) if (v < 2) throw Error(ErrorCode::InvalidConfig, "dims must be at least 2");
  for (auto v : a.batches) if (v < 1) throw Error(ErrorCode::InvalidConfig, "batch sizes must be positive");

  using clock = std::chrono::steady_clock;
  auto ms = [](clock::duration dt) { return std::chrono::duration<double, std::milli>(dt).count(); };
  const char* ops[] = {"extract_subspace", "geodesic_flow", "q_matrix", "total"};

  std::vector<BenchCell> cells;
  for (std::size_t n : a.batches) {
    for (std::size_t d : a.dims) {
      Rng rng(mix_seed(a.seed, mix_seed(n, d)));
      const auto rows = static_cast<Eigen::Index>(n), cols = static_cast<Eigen::Index>(d);
      Matrix A(rows, cols), B(rows, cols);
      for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) A(i, j) = rng.normal(), B(i, j) = rng.normal();
      const std::size_t k = std::max<std::size_t>(1, std::min(n, d / 2));

      std::vector<std::vector<double>> t(4);
      for (std::size_t trial = 0; trial < a.trials; ++trial) {
        const auto t0 = clock::now();
        const SubspaceBasis ps = extract_subspace(A, k);
        const SubspaceBasis pt = extract_subspace(B, k);
        const std::size_t r = std::min(ps.sub_dim(), pt.sub_dim());
        const auto t1 = clock::now();
        const GeodesicFlow f = geodesic_flow(ps.truncated(r), pt.truncated(r));
        const auto t2 = clock::now();
        const GuidanceMetric q = q_matrix(f);
        const auto t3 = clock::now();
        if (!std::isfinite(q.eigen_floor())) throw Error(ErrorCode::NonFinite, "bench produced a non-finite Q");
        t[0].push_back(ms(t1 - t0));
        t[1].push_back(ms(t2 - t1));
        t[2].push_back(ms(t3 - t2));
        t[3].push_back(ms(t3 - t0));
      }
      for (int o = 0; o < 4; ++o) cells.push_back({n, d, ops[o], median(t[static_cast<std::size_t>(o)])});
    }
  }

  std::ostringstream csv;
  csv << "n,d,op,median_ms,slope_hint\n";
  for (const auto& c : cells) {
    std::vector<std::pair<double, double>> along_d, along_n;
    for (const auto& o : cells) {
      if (o.op != c.op) continue;
      if (o.n == c.n) along_d.emplace_back(static_cast<double>(o.d), std::max(o.median_ms, 1e-9));
      if (o.d == c.d) along_n.emplace_back(static_cast<double>(o.n), std::max(o.median_ms, 1e-9));
    }
    csv << c.n << ',' << c.d << ',' << c.op << ',' << num(c.median_ms) << ",d:" << slope_text(fit_slope(along_d))
        << " n:" << slope_text(fit_slope(along_n)) << "\n";
  }
  if (!a.out.empty()) {
    std::ofstream f(a.out);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + a.out);
    f << csv.str();
  }
  out << csv.str();
  return 0;
}

// ---------------------------------------------------------------- dimstudy

struct DimStudyArgs {
  std::vector<std::size_t> dims{64, 128, 256, 512};
  std::size_t seeds = 20;
  std::string source, src_prompt, trg_prompt, out;
  ConfigOptions config;
};

int cmd_dimstudy(const DimStudyArgs& a, std::ostream& out, std::ostream& err) {
  const Resolved r = resolve_config(a.config);
  if (a.dims.empty()) throw Error(ErrorCode::InvalidConfig, "--dims is empty");
  if (a.seeds == 0) throw Error(ErrorCode::InvalidConfig, "--seeds must be at least 1");
  const std::string source = pick(a.source, r.run_keys, "source", "");
  const std::string sp = pick(a.src_prompt, r.run_keys, "src_prompt", kDefaultSrcPrompt);
  const std::string tp = pick(a.trg_prompt, r.run_keys, "trg_prompt", kDefaultTrgPrompt);
  ImageTensor img;
  if (!source.empty()) img = read_image(source);

  std::ostringstream csv;
  csv << "requested_dim,applied_dim,effective_dim,warning,seeds,final_total_median,final_total_mean,"
         "loss_ratio_median,morph_score_median,intra_dm_median,inter_dm_median,config_hash\n";
  for (std::size_t dim : a.dims) {
    InversionConfig cfg = r.cfg;
    const std::size_t applied = std::clamp<std::size_t>(dim, 1, cfg.embed_dim);
    cfg.subspace_dim = applied;
    std::vector<double> finals, ratios, morph, intra, inter;
    std::size_t effective = applied;
    for (std::size_t s = 0; s < a.seeds; ++s) {
      const SeedRun run = run_seed(cfg, r.cfg.seed + s, source.empty() ? nullptr : &img, sp, tp);
      finals.push_back(run.summary.final_total);
      ratios.push_back(run.summary.final_total / run.summary.initial_total);
      morph.push_back(run.summary.morph_score);
      intra.push_back(median(run.summary.intra_dm.empty() ? std::vector<double>{1.0} : run.summary.intra_dm));
      inter.push_back(run.summary.inter_dm);
      effective = std::min(effective, run.summary.effective_dim);
    }
    std::string warning;
    if (applied < dim) warning = "clamped_to_ambient_" + std::to_string(applied);
    if (effective < applied) warning += std::string(warning.empty() ? "" : ";") + "rank_capped_" + std::to_string(effective);
    if (!warning.empty()) err << "warning: subspace dim " << dim << ": " << warning << "\n";
    csv << dim << ',' << applied << ',' << effective << ',' << (warning.empty() ? "none" : warning) << ',' << a.seeds
        << ',' << num(median(finals)) << ',' << num(mean(finals)) << ',' << num(median(ratios)) << ','
        << num(median(morph)) << ',' << num(median(intra)) << ',' << num(median(inter)) << ',' << cfg.hash() << "\n";
  }
  if (!a.out.empty()) {
    const std::filesystem::path p(a.out);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + a.out);
    f << csv.str();
    KeyValues kv = r.cfg.to_kv();
    kv.emplace_back("src_prompt", sp);
    kv.emplace_back("trg_prompt", tp);
    if (!source.empty()) kv.emplace_back("source", source);
    kv.emplace_back("config_hash", r.cfg.hash());
    write_kv_file(p.string() + ".config.kv", kv);
  }
  out << csv.str();
  return 0;
}

// ---------------------------------------------------------------- make-image

struct MakeImageArgs {
  std::uint64_t seed = 0;
  int height = kStudySide;
  int width = kStudySide;
  int channels = 3;
  std::string out;
};

int cmd_make_image(const MakeImageArgs& a, std::ostream& out) {
  if (a.height < 1 || a.width < 1 || (a.channels != 1 && a.channels != 3)) {
    throw Error(ErrorCode::InvalidConfig, "image needs positive sides and 1 or 3 channels");
  }
  write_image(a.out, synthetic_image(a.seed, a.height, a.width, a.channels));
  out << "wrote " << a.out << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Geodesic guidance on toy contrastive encoders"};
  app.require_subcommand(1);

  FlowArgs flow;
  auto* flow_cmd = app.add_subcommand("flow", "Geodesic flow and Q between two feature batches");
  flow_cmd->add_option("--src", flow.src, "EMB1 source batch")->required();
  flow_cmd->add_option("--dst", flow.dst, "EMB1 target batch")->required();
  flow_cmd->add_option("--subspace-dim", flow.subspace_dim, "Requested subspace dimension");
  flow_cmd->add_option("--nu", flow.nu, "Flow positions in [0, 1]")->delimiter(',');
  flow_cmd->add_option("--nodes", flow.nodes, "Trapezoid nodes for the quadrature check");
  flow_cmd->add_option("--out", flow.out, "Output directory")->required();

  InvertArgs inv;
  auto* inv_cmd = app.add_subcommand("invert", "Morph an image toward a target prompt");
  inv_cmd->add_option("--source", inv.source, "PPM/PGM source image");
  inv_cmd->add_option("--src-prompt", inv.src_prompt, "Source prompt");
  inv_cmd->add_option("--trg-prompt", inv.trg_prompt, "Target prompt");
  inv_cmd->add_option("--out", inv.out, "Run directory")->required();
  add_config_flags(inv_cmd, inv.config);

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Score images or feature batches");
  score_cmd->add_option("--mode", score.mode, "morph | psnr | ssim | dm | gap")->required();
  score_cmd->add_option("inputs", score.inputs, "Input files");
  score_cmd->add_option("--out", score.out, "Score table CSV");
  score_cmd->add_option("--subspace-dim", score.subspace_dim, "Subspace dimension for dm");
  score_cmd->add_option("--coeff", score.coeffs, "Gap modulation coefficients for gap")->delimiter(',');

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time subspace extraction, flow and Q");
  bench_cmd->add_option("--dims", bench.dims, "Feature dimensions")->delimiter(',');
  bench_cmd->add_option("--batches", bench.batches, "Batch sizes")->delimiter(',');
  bench_cmd->add_option("--trials", bench.trials, "Trials per cell");
  bench_cmd->add_option("--seed", bench.seed, "Seed for the random batches");
  bench_cmd->add_option("--out", bench.out, "CSV output");

  DimStudyArgs study;
  auto* study_cmd = app.add_subcommand("dimstudy", "Seed batches of inversions across subspace dims");
  study_cmd->add_option("--dims", study.dims, "Requested subspace dims")->delimiter(',');
  study_cmd->add_option("--seeds", study.seeds, "Seeds per dim, counted up from --seed");
  study_cmd->add_option("--source", study.source, "Source image (synthetic per seed when omitted)");
  study_cmd->add_option("--src-prompt", study.src_prompt, "Source prompt");
  study_cmd->add_option("--trg-prompt", study.trg_prompt, "Target prompt");
  study_cmd->add_option("--out", study.out, "CSV output");
  add_config_flags(study_cmd, study.config);
  study_cmd->get_option("--subspace-dim")->description("Ignored; use --dims");

  MakeImageArgs mk;
  auto* mk_cmd = app.add_subcommand("make-image", "Write a synthetic test image");
  mk_cmd->add_option("--seed", mk.seed, "Seed");
  mk_cmd->add_option("--height", mk.height, "Height");
  mk_cmd->add_option("--width", mk.width, "Width");
  mk_cmd->add_option("--channels", mk.channels, "1 or 3");
  mk_cmd->add_option("--out", mk.out, "Output PPM/PGM")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (flow_cmd->parsed()) return cmd_flow(flow, out);
    if (inv_cmd->parsed()) return cmd_invert(inv, out);
    if (score_cmd->parsed()) return cmd_score(score, out);
    if (bench_cmd->parsed()) return cmd_bench(bench, out);
    if (study_cmd->parsed()) return cmd_dimstudy(study, out, err);
    if (mk_cmd->parsed()) return cmd_make_image(mk, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_usage_error(e.code()) ? 2 : 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace geoguide::cli
