#include "geowarp/loss.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "geowarp/error.hpp"

namespace geowarp {

void LossWeights::validate() const {
  const bool ok = beta >= 0.0 && lambda_d >= 0.0 && lambda_p >= 0.0 && lambda_s >= 0.0 && h > 0.0 && c1 > 0.0 &&
                  c2 > 0.0;
  if (!ok) {
    throw Error(ErrorCode::InvalidInput, "loss weights must be >= 0 with h, c1, c2 > 0");
  }
}

double frame_pose_loss(const Pose& pred, const Pose& gt, double beta) {
  return (pred.position() - gt.position()).norm() +
         beta * (pred.orientation().coeffs() - gt.orientation().coeffs()).norm();
}

double euclidean_pose_loss(const Pose& pred_prev, const Pose& gt_prev, const Pose& pred_curr, const Pose& gt_curr,
                           double beta) {
  return frame_pose_loss(pred_prev, gt_prev, beta) + frame_pose_loss(pred_curr, gt_curr, beta);
}

namespace {

double ssim_from_stats(const SSIMStats& s, double c1, double c2) {
  return ((2.0 * s.mean_x * s.mean_y + c1) * (2.0 * s.cov_xy + c2)) /
         ((s.mean_x * s.mean_x + s.mean_y * s.mean_y + c1) * (s.var_x + s.var_y + c2));
}

void require_same_grid(const ImageBuffer& comparison, const WarpResult& warp) {
  if (comparison.width() != warp.warped.width() || comparison.height() != warp.warped.height() ||
      comparison.channels() != warp.warped.channels()) {
    throw Error(ErrorCode::InvalidInput, "comparison image and warp result differ in shape");
  }
}

// Residuals at round-off level count as zero so the L1 subgradient is 0 there
// rather than the sign of floating-point noise.
constexpr double kZeroResidual = 1e-12;

double residual_sign(double v) { return v > kZeroResidual ? 1.0 : (v < -kZeroResidual ? -1.0 : 0.0); }

}  // namespace

PhotometricResult photometric_loss(const ImageBuffer& comparison, const WarpResult& warp, const LossWeights& weights,
                                   const LossOptions& options) {
  require_same_grid(comparison, warp);
  const std::size_t n = comparison.pixel_count();
  const int nc = comparison.channels();
  const auto a = comparison.data();
  const auto b = warp.warped.data();

  PhotometricResult r;
  r.residuals.assign(n, 0.0);
  r.mask = PixelMask(comparison.width(), comparison.height(), false);
  for (std::size_t i = 0; i < n; ++i) {
    if (!warp.validity.keep(i)) continue;
    if (warp.flow_l1[i] > weights.h) {
      ++r.gated;
      continue;
    }
    double diff = 0.0;
    for (int c = 0; c < nc; ++c) diff += std::abs(b[i * nc + c] - a[i * nc + c]);
    r.residuals[i] = diff / nc;
    r.mask.set(i, true);
    ++r.count;
  }

  if (options.reject_fraction > 0.0 && r.count > 0) {
    std::vector<std::size_t> kept;
    kept.reserve(r.count);
    for (std::size_t i = 0; i < n; ++i) {
      if (r.mask.keep(i)) kept.push_back(i);
    }
    const auto drop = static_cast<std::size_t>(
        std::llround(std::clamp(options.reject_fraction, 0.0, 1.0) * static_cast<double>(kept.size())));
    std::stable_sort(kept.begin(), kept.end(),
                     [&](std::size_t x, std::size_t y) { return r.residuals[x] > r.residuals[y]; });
    for (std::size_t j = 0; j < drop; ++j) {
      r.mask.set(kept[j], false);
      r.residuals[kept[j]] = 0.0;
    }
    r.rejected = drop;
    r.count -= drop;
  }

  r.degenerate = r.count == 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += r.residuals[i];
  r.value = (options.norm == PhotometricNorm::Mean && r.count > 0) ? sum / static_cast<double>(r.count) : sum;
  return r;
}

double ssim(const ImageBuffer& a, const ImageBuffer& b, const PixelMask& mask, double c1, double c2) {
  double total = 0.0;
  for (int c = 0; c < a.channels(); ++c) total += ssim_from_stats(image_stats(a, b, mask, c), c1, c2);
  return total / a.channels();
}

double ssim_loss(const ImageBuffer& comparison, const WarpResult& warp, const LossWeights& weights,
                 const LossOptions& options) {
  const PhotometricResult p = photometric_loss(comparison, warp, weights, options);
  return 0.5 * (1.0 - ssim(comparison, warp.warped, p.mask, weights.c1, weights.c2));
}

namespace {

// d SSIM / d b_i = base + k_a (a_i - mu_a) - k_b (b_i - mu_b) for one channel.
struct SsimSlope {
  double base = 0.0;
  double k_a = 0.0;
  double k_b = 0.0;
  double mu_a = 0.0;
  double mu_b = 0.0;
};

SsimSlope ssim_slope(const SSIMStats& s, double c1, double c2) {
  const double n = static_cast<double>(s.count);
  const double num_mean = 2.0 * s.mean_x * s.mean_y + c1;
  const double num_cov = 2.0 * s.cov_xy + c2;
  const double den_mean = s.mean_x * s.mean_x + s.mean_y * s.mean_y + c1;
  const double den_var = s.var_x + s.var_y + c2;
  const double value = num_mean * num_cov / (den_mean * den_var);
  SsimSlope k;
  k.base = value * (2.0 * s.mean_x / (n * num_mean) - 2.0 * s.mean_y / (n * den_mean));
  k.k_a = value * 2.0 / (n * num_cov);
  k.k_b = value * 2.0 / (n * den_var);
  k.mu_a = s.mean_x;
  k.mu_b = s.mean_y;
  return k;
}

// Everything the per-pixel gradient kernel needs, fixed for one evaluation.
struct PixelGradientContext {
  const ImageBuffer* comparison = nullptr;
  const WarpResult* warp = nullptr;
  const PhotometricResult* photometric = nullptr;
  const DepthMap* depth = nullptr;
  const Intrinsics* k = nullptr;
  std::array<SsimSlope, kMaxChannels> slopes{};
  bool use_ssim = false;
  double photometric_scale = 0.0;  // lambda_p * normalization / channels
  double ssim_scale = 0.0;         // -lambda_s / 2 / channels
  Mat3 rel_rotation = Mat3::Identity();
  Vec3 t_prev = Vec3::Zero();
  Vec3 t_curr = Vec3::Zero();
  bool curr_through_warp = true;
};

void accumulate_pixel(const PixelGradientContext& ctx, int x, int y, Vec12& g) {
  const std::size_t i = static_cast<std::size_t>(y) * ctx.k->width + x;
  if (!ctx.photometric->mask.keep(i)) return;
  const int nc = ctx.comparison->channels();
  const auto a = ctx.comparison->data();
  const auto b = ctx.warp->warped.data();

  double gu = 0.0;
  double gv = 0.0;
  for (int c = 0; c < nc; ++c) {
    const std::size_t j = i * nc + c;
    double coef = ctx.photometric_scale * residual_sign(b[j] - a[j]);
    if (ctx.use_ssim) {
      const SsimSlope& s = ctx.slopes[c];
      coef += ctx.ssim_scale * (s.base + s.k_a * (a[j] - s.mu_a) - s.k_b * (b[j] - s.mu_b));
    }
    gu += coef * ctx.warp->grad_u[j];
    gv += coef * ctx.warp->grad_v[j];
  }
  if (gu == 0.0 && gv == 0.0) return;

  const Vec3& p = ctx.warp->points_cam_t[i];
  const double iz = 1.0 / p.z();
  const Vec3 d_point(gu * ctx.k->fx * iz, gv * ctx.k->fy * iz,
                     -(gu * ctx.k->fx * p.x() + gv * ctx.k->fy * p.y()) * iz * iz);

  const Vec3 p_prev = backproject(Vec2(x, y), ctx.depth->depth(i), *ctx.k);
  const Vec3 back = ctx.rel_rotation.transpose() * d_point;
  g.segment<3>(kPrevOffset) -= back;
  g.segment<3>(kPrevOffset + 3) += back.cross(p_prev - ctx.t_prev);
  if (ctx.curr_through_warp) {
    g.segment<3>(kCurrOffset) += d_point;
    g.segment<3>(kCurrOffset + 3) += (p - ctx.t_curr).cross(d_point);
  }
}

void add_pose_gradient(const Pose& pred, const Pose& gt, const LossWeights& w, Vec12& g, int offset) {
  const Vec3 dt = pred.position() - gt.position();
  const double nt = dt.norm();
  if (nt > 0.0) g.segment<3>(offset) += w.lambda_d * dt / nt;

  const Quat& q = pred.orientation();
  const Eigen::Vector4d dq = q.coeffs() - gt.orientation().coeffs();  // (x, y, z, w)
  const double nq = dq.norm();
  if (nq > 0.0) {
    const Eigen::Vector4d gq = w.lambda_d * w.beta * dq / nq;
    const Vec3 gq_vec = gq.head<3>();
    const Vec3 q_vec = q.vec();
    // q <- exp(w) q has dq/dw = 0.5 * [ -v^T ; w I - [v]x ] at w = 0.
    g.segment<3>(offset + 3) += 0.5 * (-gq.w() * q_vec + q.w() * gq_vec + q_vec.cross(gq_vec));
  }
}

struct PreparedImages {
  const ImageBuffer* prev = nullptr;
  const ImageBuffer* curr = nullptr;
  ImageBuffer gray_prev;
  ImageBuffer gray_curr;
};

PreparedImages prepare_images(const FramePair& pair, const LossOptions& options) {
  PreparedImages p;
  p.prev = &pair.image_prev;
  p.curr = &pair.image_curr;
  if (options.channels == ChannelMode::Grayscale && pair.image_prev.channels() == 3) {
    p.gray_prev = to_grayscale(pair.image_prev);
    p.gray_curr = to_grayscale(pair.image_curr);
    p.prev = &p.gray_prev;
    p.curr = &p.gray_curr;
  }
  return p;
}

LossGradient evaluate(const FramePair& pair, const Pose& pred_prev, const Pose& pred_curr, const LossConfig& config,
                      WarpMode mode, Exec exec, bool want_gradient) {
  pair.validate();
  const LossWeights& w = config.weights;
  w.validate();

  const PreparedImages images = prepare_images(pair, config.options);
  const Pose& warp_curr = mode == WarpMode::Anchored ? pair.gt_curr : pred_curr;
  const RigidTransform t_prev = pose_to_transform(pred_prev);
  const RigidTransform t_curr = pose_to_transform(warp_curr);
  const RigidTransform rel = relative_transform(t_prev, t_curr);

  const WarpResult warp =
      warp_image(*images.curr, pair.depth_prev, rel, pair.intrinsics, pair.mask, {exec, want_gradient});
  const PhotometricResult photo = photometric_loss(*images.prev, warp, w, config.options);
  const int nc = images.prev->channels();

  LossGradient out;
  LossBreakdown& b = out.loss;
  b.valid_pixel_count = photo.count;
  b.gated_pixel_count = photo.gated;
  b.rejected_pixel_count = photo.rejected;
  b.degenerate = photo.degenerate;
  b.ssim_degenerate = photo.count < 2;
  b.l_d = euclidean_pose_loss(pred_prev, pair.gt_prev, pred_curr, pair.gt_curr, w.beta);
  if (!b.degenerate) b.l_p = photo.value;

  std::array<SSIMStats, kMaxChannels> stats{};
  if (!b.ssim_degenerate) {
    double sum = 0.0;
    for (int c = 0; c < nc; ++c) {
      stats[c] = image_stats(*images.prev, warp.warped, photo.mask, c);
      sum += ssim_from_stats(stats[c], w.c1, w.c2);
    }
    b.l_s = 0.5 * (1.0 - sum / nc);
  }
  b.total = w.lambda_d * b.l_d + w.lambda_p * b.l_p + w.lambda_s * b.l_s;
  if (!want_gradient) return out;

  add_pose_gradient(pred_prev, pair.gt_prev, w, out.gradient, kPrevOffset);
  add_pose_gradient(pred_curr, pair.gt_curr, w, out.gradient, kCurrOffset);
  if (b.degenerate) return out;

  PixelGradientContext ctx;
  ctx.comparison = images.prev;
  ctx.warp = &warp;
  ctx.photometric = &photo;
  ctx.depth = &pair.depth_prev;
  ctx.k = &pair.intrinsics;
  ctx.use_ssim = !b.ssim_degenerate;
  for (int c = 0; ctx.use_ssim && c < nc; ++c) ctx.slopes[c] = ssim_slope(stats[c], w.c1, w.c2);
  const double norm =
      config.options.norm == PhotometricNorm::Mean ? 1.0 / static_cast<double>(photo.count) : 1.0;
  ctx.photometric_scale = w.lambda_p * norm / nc;
  ctx.ssim_scale = -0.5 * w.lambda_s / nc;
  ctx.rel_rotation = rel.rotation;
  ctx.t_prev = t_prev.translation;
  ctx.t_curr = t_curr.translation;
  ctx.curr_through_warp = mode == WarpMode::SelfSupervised;

  const int width = pair.intrinsics.width;
  const int height = pair.intrinsics.height;
  // Both paths sum per-row partials in row order, so the result does not
  // depend on the executor or the thread count.
  std::vector<Vec12> rows(height, Vec12::Zero());
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) accumulate_pixel(ctx, x, y, rows[y]);
    }
  } else {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) accumulate_pixel(ctx, x, y, rows[y]);
    }
  }
  for (const Vec12& r : rows) out.gradient += r;
  return out;
}

}  // namespace

LossBreakdown total_loss(const FramePair& pair, const Pose& pred_prev, const Pose& pred_curr, const LossConfig& config,
                         WarpMode mode, Exec exec) {
  return evaluate(pair, pred_prev, pred_curr, config, mode, exec, false).loss;
}

LossGradient total_loss_gradient(const FramePair& pair, const Pose& pred_prev, const Pose& pred_curr,
                                 const LossConfig& config, WarpMode mode, Exec exec) {
  return evaluate(pair, pred_prev, pred_curr, config, mode, exec, true);
}

}  // namespace geowarp
