#include "impflow/world/render.hpp"

#include <algorithm>
#include <cmath>

namespace impflow {
namespace {

// Canvas geometry, in units of the 32-wide pixel grid. Amplitudes are chosen
// so every parameter moves at least a couple of pixels (or a clearly visible
// intensity step) across its range; the encoder has to read them back out.
constexpr double kCx = 16.0;
constexpr double kCy = 16.0;
constexpr double kFaceRx = 9.6;
constexpr double kFaceRy = 11.6;
constexpr double kHairline = 8.0;
constexpr double kEyeY = 13.4;
constexpr double kBrowY = 11.2;
constexpr double kMouthY = 21.0;
constexpr double kTiltRadians = 0.12;

double soft_edge(double d, double softness) {
  // 1 inside (d <= 0), 0 outside, linear ramp of the given width.
  return std::clamp(1.0 - d / softness, 0.0, 1.0);
}

double stroke(double dist, double halfwidth) {
  // Smooth bump with a long tail; keeps pixel intensities differentiable in
  // the geometry so nearby strokes still leave a gradient.
  double r = std::max(0.0, dist) / halfwidth;
  return std::exp(-r * r);
}

double segment_distance(double px, double py, double ax, double ay, double bx,
                        double by) {
  double vx = bx - ax, vy = by - ay;
  double wx = px - ax, wy = py - ay;
  double vv = vx * vx + vy * vy;
  double t = vv > 0.0 ? std::clamp((wx * vx + wy * vy) / vv, 0.0, 1.0) : 0.0;
  double dx = wx - t * vx, dy = wy - t * vy;
  return std::sqrt(dx * dx + dy * dy);
}

struct Sprite {
  double face_rx, chin_ry;
  double skin_fill;
  double hair_fill;
  double eye_dx, eye_ry;
  double brow_drop;  // inner-end vertical offset
  double nose_end;
  double mouth_shift, mouth_curve;
  double wrinkle_ink;
  double stubble_ink;
  double cos_t, sin_t;
};

Sprite make_sprite(const Vec& q) {
  Sprite s;
  s.face_rx = kFaceRx + 1.8 * q[param::kFaceWidth];
  s.chin_ry = kFaceRy + 1.8 * q[param::kChinShape];
  s.skin_fill = 0.30 + 0.11 * q[param::kSkinTone];
  s.hair_fill = 0.22 + 0.18 * q[param::kHairMarker];
  s.eye_dx = 4.3 + 1.3 * q[param::kEyeSpacing];
  s.eye_ry = 0.80 + 0.50 * q[param::kEyeOpenness];
  s.brow_drop = 1.0 * q[param::kBrowAngle];
  s.nose_end = 16.6 + 1.5 * q[param::kNoseLength];
  s.mouth_shift = 0.55 * q[param::kSmile];
  s.mouth_curve = 0.90 * q[param::kSmile];
  s.wrinkle_ink = 0.26 * (q[param::kWrinkleDensity] + 1.0) * 0.5;
  s.stubble_ink = 0.26 * (q[param::kFacialHair] + 1.0) * 0.5;
  double theta = kTiltRadians * q[param::kHeadTilt];
  s.cos_t = std::cos(theta);
  s.sin_t = std::sin(theta);
  return s;
}

double sample_intensity(const Sprite& s, double x, double y) {
  // Rotate the sample point into the upright face frame.
  double dx0 = x - kCx, dy0 = y - kCy;
  double xr = kCx + s.cos_t * dx0 + s.sin_t * dy0;
  double yr = kCy - s.sin_t * dx0 + s.cos_t * dy0;
  double dx = xr - kCx, dy = yr - kCy;

  double ry = dy < 0.0 ? kFaceRy : s.chin_ry;
  double e = std::sqrt((dx / s.face_rx) * (dx / s.face_rx) + (dy / ry) * (dy / ry));
  double face = soft_edge(e - 1.0, 0.06);
  if (face <= 0.0) {
    return 0.0;
  }

  double v = face * s.skin_fill;

  // Hair cap above the hairline.
  v += face * s.hair_fill * soft_edge(yr - kHairline, 0.8);

  // Eyes.
  for (double side : {-1.0, 1.0}) {
    double ex = kCx + side * s.eye_dx;
    double u = (xr - ex) / 1.6;
    double w = (yr - kEyeY) / s.eye_ry;
    double d = std::sqrt(u * u + w * w) - 1.0;
    v += 0.45 * soft_edge(d, 0.25);
  }

  // Brows: inner ends drop (toward the nose) as the angle parameter grows.
  for (double side : {-1.0, 1.0}) {
    double ex = kCx + side * s.eye_dx;
    double ix = ex - side * 1.8, ox = ex + side * 1.8;  // inner / outer x
    double d = segment_distance(xr, yr, ix, kBrowY + s.brow_drop, ox,
                                kBrowY - s.brow_drop);
    v += 0.38 * stroke(d - 0.42, 0.30);
  }

  // Nose stroke.
  {
    double d = segment_distance(xr, yr, kCx, 15.2, kCx, s.nose_end);
    v += 0.28 * stroke(d - 0.45, 0.30);
  }

  // Mouth: every point of the curve rises with the smile parameter, corners
  // faster than the center.
  if (std::abs(yr - kMouthY) < 5.0 && std::abs(dx) < 6.0) {
    double best = 1e9;
    double px = -4.2, py = 0.0;
    for (int i = 0; i <= 14; ++i) {
      double mx = -4.2 + 8.4 * i / 14.0;
      double rel = mx / 4.2;
      double my = kMouthY - s.mouth_shift - s.mouth_curve * rel * rel;
      if (i > 0) {
        best = std::min(best, segment_distance(xr, yr, px, py, kCx + mx, my));
      }
      px = kCx + mx;
      py = my;
    }
    v += 0.50 * stroke(best - 0.25, 0.55);
  }

  // Forehead creases.
  if (s.wrinkle_ink > 0.0) {
    for (double wy : {8.8, 9.7, 10.6}) {
      double d = segment_distance(xr, yr, kCx - 4.0, wy, kCx + 4.0, wy);
      v += s.wrinkle_ink * stroke(d - 0.18, 0.30);
    }
  }

  // Stubble fill on the chin.
  v += s.stubble_ink * face * std::clamp((yr - 23.2) / 0.7, 0.0, 1.0);

  return std::min(v, 1.0);
}

}  // namespace

RenderOutput render_face_detailed(const FaceParams& p, const RenderConfig& cfg) {
  if (p.values.size() != param::kCount) {
    throw DimensionError("render_face: expected 12 parameters");
  }
  if (!p.values.allFinite()) {
    throw NumericError("render_face: non-finite parameter");
  }
  if (cfg.image_size < 8 || cfg.supersample < 1) {
    throw ConfigError("render_face: bad render config");
  }

  RenderOutput out;
  Vec q = p.values;
  for (int i = 0; i < q.size(); ++i) {
    double c = std::clamp(q[i], -1.0, 1.0);
    if (c != q[i]) {
      out.clamped = true;
      q[i] = c;
    }
  }

  // Geometry is laid out for a 32-wide canvas; scale for other sizes.
  double scale = 32.0 / cfg.image_size;
  Sprite sprite = make_sprite(q);

  out.image = ImageGrid(cfg.image_size, cfg.image_size);
  int ss = cfg.supersample;
  double inv = 1.0 / (ss * ss);
  for (int r = 0; r < cfg.image_size; ++r) {
    for (int c = 0; c < cfg.image_size; ++c) {
      double acc = 0.0;
      for (int sr = 0; sr < ss; ++sr) {
        for (int sc = 0; sc < ss; ++sc) {
          double y = (r + (sr + 0.5) / ss) * scale;
          double x = (c + (sc + 0.5) / ss) * scale;
          acc += sample_intensity(sprite, x, y);
        }
      }
      out.image.at(r, c) = acc * inv;
    }
  }
  return out;
}

ImageGrid render_face(const FaceParams& p, const RenderConfig& cfg) {
  return render_face_detailed(p, cfg).image;
}

double foreground_energy(const ImageGrid& image) {
  if (image.pixels.empty()) {
    throw DimensionError("foreground_energy: empty image");
  }
  int lit = 0;
  for (double v : image.pixels) {
    if (v > 0.08) {
      ++lit;
    }
  }
  return static_cast<double>(lit) / image.pixels.size();
}

}  // namespace impflow
