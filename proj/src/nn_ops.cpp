#include "voxreg/nn_ops.hpp"

#include <algorithm>
#include <cmath>

#include "voxreg/resampler.hpp"

namespace voxreg {

namespace {

void require_spatial(const TensorPtr& t, const char* what) {
  if (t->shape.size() != 4) throw std::invalid_argument(std::string(what) + ": tensor must be {C, D, H, W}");
}

Dims spatial_dims(const TensorPtr& t) { return Dims{t->shape[1], t->shape[2], t->shape[3]}; }

// Per-axis taps of the factor-2 trilinear upsampling: output index o samples
// the input at clamp(o/2 - 0.25).
struct UpTap {
  int i0, i1;
  double f;
};

std::vector<UpTap> upsample_taps(int in_dim) {
  std::vector<UpTap> taps(2 * in_dim);
  for (int o = 0; o < 2 * in_dim; ++o) {
    double c = 0.5 * o - 0.25;
    c = std::clamp(c, 0.0, static_cast<double>(in_dim - 1));
    const int i0 = static_cast<int>(std::floor(c));
    taps[o] = {i0, std::min(i0 + 1, in_dim - 1), c - i0};
  }
  return taps;
}

}  // namespace

TensorPtr leaky_relu(Tape& tape, const TensorPtr& x, double slope) {
  TensorPtr y = make_tensor(x->shape, x->requires_grad);
  const std::int64_t n = x->size();
  for (std::int64_t i = 0; i < n; ++i) {
    const double v = x->value[i];
    y->value[i] = v > 0.0 ? v : slope * v;
  }
  if (x->requires_grad) {
    tape.record([x, y, slope, n]() {
      for (std::int64_t i = 0; i < n; ++i) {
        x->grad[i] += y->grad[i] * (x->value[i] > 0.0 ? 1.0 : slope);
      }
    });
  }
  return y;
}

TensorPtr upsample2x(Tape& tape, const TensorPtr& x) {
  require_spatial(x, "upsample2x");
  const int C = x->shape[0], D = x->shape[1], H = x->shape[2], W = x->shape[3];
  TensorPtr y = make_tensor({C, 2 * D, 2 * H, 2 * W}, x->requires_grad);

  const auto tz = upsample_taps(D);
  const auto ty = upsample_taps(H);
  const auto tx = upsample_taps(W);
  const std::int64_t in_plane = static_cast<std::int64_t>(D) * H * W;

  for (int c = 0; c < C; ++c) {
    const double* xc = x->value.data() + c * in_plane;
    double* yc = y->value.data() + static_cast<std::int64_t>(c) * 8 * in_plane;
    std::int64_t o = 0;
    for (int oz = 0; oz < 2 * D; ++oz) {
      const auto& az = tz[oz];
      for (int oy = 0; oy < 2 * H; ++oy) {
        const auto& ay = ty[oy];
        for (int ox = 0; ox < 2 * W; ++ox, ++o) {
          const auto& ax = tx[ox];
          const double v00 = xc[(static_cast<std::int64_t>(az.i0) * H + ay.i0) * W + ax.i0] * (1 - ax.f) +
                             xc[(static_cast<std::int64_t>(az.i0) * H + ay.i0) * W + ax.i1] * ax.f;
          const double v01 = xc[(static_cast<std::int64_t>(az.i0) * H + ay.i1) * W + ax.i0] * (1 - ax.f) +
                             xc[(static_cast<std::int64_t>(az.i0) * H + ay.i1) * W + ax.i1] * ax.f;
          const double v10 = xc[(static_cast<std::int64_t>(az.i1) * H + ay.i0) * W + ax.i0] * (1 - ax.f) +
                             xc[(static_cast<std::int64_t>(az.i1) * H + ay.i0) * W + ax.i1] * ax.f;
          const double v11 = xc[(static_cast<std::int64_t>(az.i1) * H + ay.i1) * W + ax.i0] * (1 - ax.f) +
                             xc[(static_cast<std::int64_t>(az.i1) * H + ay.i1) * W + ax.i1] * ax.f;
          yc[o] = (v00 * (1 - ay.f) + v01 * ay.f) * (1 - az.f) + (v10 * (1 - ay.f) + v11 * ay.f) * az.f;
        }
      }
    }
  }

  if (x->requires_grad) {
    tape.record([x, y, tz, ty, tx, C, D, H, W, in_plane]() {
      for (int c = 0; c < C; ++c) {
        double* dxc = x->grad.data() + c * in_plane;
        const double* gyc = y->grad.data() + static_cast<std::int64_t>(c) * 8 * in_plane;
        std::int64_t o = 0;
        for (int oz = 0; oz < 2 * D; ++oz) {
          const auto& az = tz[oz];
          for (int oy = 0; oy < 2 * H; ++oy) {
            const auto& ay = ty[oy];
            for (int ox = 0; ox < 2 * W; ++ox, ++o) {
              const auto& ax = tx[ox];
              const double g = gyc[o];
              const double wz[2] = {1 - az.f, az.f};
              const double wy[2] = {1 - ay.f, ay.f};
              const double wx[2] = {1 - ax.f, ax.f};
              const int iz[2] = {az.i0, az.i1};
              const int iy[2] = {ay.i0, ay.i1};
              const int ix[2] = {ax.i0, ax.i1};
              for (int a = 0; a < 2; ++a) {
                for (int b = 0; b < 2; ++b) {
                  for (int d = 0; d < 2; ++d) {
                    dxc[(static_cast<std::int64_t>(iz[a]) * H + iy[b]) * W + ix[d]] += g * wz[a] * wy[b] * wx[d];
                  }
                }
              }
            }
          }
        }
      }
    });
  }
  return y;
}

TensorPtr concat_channels(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
  require_spatial(a, "concat_channels");
  require_spatial(b, "concat_channels");
  if (a->shape[1] != b->shape[1] || a->shape[2] != b->shape[2] || a->shape[3] != b->shape[3]) {
    throw std::invalid_argument("concat_channels: spatial dims mismatch");
  }
  const std::int64_t na = a->size(), nb = b->size();
  TensorPtr y = make_tensor({a->shape[0] + b->shape[0], a->shape[1], a->shape[2], a->shape[3]},
                            a->requires_grad || b->requires_grad);
  std::copy(a->value.begin(), a->value.end(), y->value.begin());
  std::copy(b->value.begin(), b->value.end(), y->value.begin() + na);

  if (y->requires_grad) {
    tape.record([a, b, y, na, nb]() {
      if (a->requires_grad) {
        for (std::int64_t i = 0; i < na; ++i) a->grad[i] += y->grad[i];
      }
      if (b->requires_grad) {
        for (std::int64_t i = 0; i < nb; ++i) b->grad[i] += y->grad[na + i];
      }
    });
  }
  return y;
}

TensorPtr softmax_channels(Tape& tape, const TensorPtr& x) {
  require_spatial(x, "softmax_channels");
  const int C = x->shape[0];
  const std::int64_t n = x->size() / C;
  TensorPtr y = make_tensor(x->shape, x->requires_grad);
  for (std::int64_t v = 0; v < n; ++v) {
    double m = x->value[v];
    for (int c = 1; c < C; ++c) m = std::max(m, x->value[c * n + v]);
    double s = 0.0;
    for (int c = 0; c < C; ++c) {
      const double e = std::exp(x->value[c * n + v] - m);
      y->value[c * n + v] = e;
      s += e;
    }
    for (int c = 0; c < C; ++c) y->value[c * n + v] /= s;
  }
  if (x->requires_grad) {
    tape.record([x, y, C, n]() {
      for (std::int64_t v = 0; v < n; ++v) {
        double dot = 0.0;
        for (int c = 0; c < C; ++c) dot += y->grad[c * n + v] * y->value[c * n + v];
        for (int c = 0; c < C; ++c) {
          x->grad[c * n + v] += y->value[c * n + v] * (y->grad[c * n + v] - dot);
        }
      }
    });
  }
  return y;
}

TensorPtr warp_channels(Tape& tape, const TensorPtr& image, const TensorPtr& field) {
  require_spatial(image, "warp_channels");
  if (field->shape.size() != 4 || field->shape[0] != 3) {
    throw std::invalid_argument("warp_channels: field must be {3, D, H, W}");
  }
  const Dims dims = spatial_dims(image);
  if (dims != spatial_dims(field)) throw std::invalid_argument("warp_channels: dims mismatch");

  const int C = image->shape[0];
  const std::int64_t n = voxel_count(dims);
  const bool track = image->requires_grad || field->requires_grad;
  TensorPtr y = make_tensor(image->shape, track);

  // forward
  std::int64_t idx = 0;
  for (int i = 0; i < dims[0]; ++i) {
    for (int j = 0; j < dims[1]; ++j) {
      for (int k = 0; k < dims[2]; ++k, ++idx) {
        const double x0 = i + field->value[idx];
        const double x1 = j + field->value[n + idx];
        const double x2 = k + field->value[2 * n + idx];
        for (int c = 0; c < C; ++c) {
          y->value[c * n + idx] = trilinear_sample(image->value.data() + c * n, dims, x0, x1, x2);
        }
      }
    }
  }

  if (track) {
    tape.record([image, field, y, dims, C, n]() {
      std::int64_t idx = 0;
      for (int i = 0; i < dims[0]; ++i) {
        for (int j = 0; j < dims[1]; ++j) {
          for (int k = 0; k < dims[2]; ++k, ++idx) {
            const double x0 = i + field->value[idx];
            const double x1 = j + field->value[n + idx];
            const double x2 = k + field->value[2 * n + idx];

            const bool in0 = x0 > 0.0 && x0 < dims[0] - 1;
            const bool in1 = x1 > 0.0 && x1 < dims[1] - 1;
            const bool in2 = x2 > 0.0 && x2 < dims[2] - 1;

            const double c0 = std::clamp(x0, 0.0, static_cast<double>(dims[0] - 1));
            const double c1 = std::clamp(x1, 0.0, static_cast<double>(dims[1] - 1));
            const double c2 = std::clamp(x2, 0.0, static_cast<double>(dims[2] - 1));
            const int i0 = static_cast<int>(std::floor(c0));
            const int j0 = static_cast<int>(std::floor(c1));
            const int k0 = static_cast<int>(std::floor(c2));
            const int i1 = std::min(i0 + 1, dims[0] - 1);
            const int j1 = std::min(j0 + 1, dims[1] - 1);
            const int k1 = std::min(k0 + 1, dims[2] - 1);
            const double f0 = c0 - i0, f1 = c1 - j0, f2 = c2 - k0;

            const std::int64_t corners[8] = {
                linear_index(dims, i0, j0, k0), linear_index(dims, i0, j0, k1),
                linear_index(dims, i0, j1, k0), linear_index(dims, i0, j1, k1),
                linear_index(dims, i1, j0, k0), linear_index(dims, i1, j0, k1),
                linear_index(dims, i1, j1, k0), linear_index(dims, i1, j1, k1)};
            const double weights[8] = {
                (1 - f0) * (1 - f1) * (1 - f2), (1 - f0) * (1 - f1) * f2,
                (1 - f0) * f1 * (1 - f2),       (1 - f0) * f1 * f2,
                f0 * (1 - f1) * (1 - f2),       f0 * (1 - f1) * f2,
                f0 * f1 * (1 - f2),             f0 * f1 * f2};

            for (int c = 0; c < C; ++c) {
              const double g = y->grad[c * n + idx];
              if (g == 0.0) continue;
              const double* plane = image->value.data() + c * n;

              if (field->requires_grad) {
                const double v000 = plane[corners[0]], v001 = plane[corners[1]];
                const double v010 = plane[corners[2]], v011 = plane[corners[3]];
                const double v100 = plane[corners[4]], v101 = plane[corners[5]];
                const double v110 = plane[corners[6]], v111 = plane[corners[7]];
                if (in0) {
                  const double lo = (v000 * (1 - f2) + v001 * f2) * (1 - f1) + (v010 * (1 - f2) + v011 * f2) * f1;
                  const double hi = (v100 * (1 - f2) + v101 * f2) * (1 - f1) + (v110 * (1 - f2) + v111 * f2) * f1;
                  field->grad[idx] += g * (hi - lo);
                }
                if (in1) {
                  const double lo = (v000 * (1 - f2) + v001 * f2) * (1 - f0) + (v100 * (1 - f2) + v101 * f2) * f0;
                  const double hi = (v010 * (1 - f2) + v011 * f2) * (1 - f0) + (v110 * (1 - f2) + v111 * f2) * f0;
                  field->grad[n + idx] += g * (hi - lo);
                }
                if (in2) {
                  const double lo = (v000 * (1 - f1) + v010 * f1) * (1 - f0) + (v100 * (1 - f1) + v110 * f1) * f0;
                  const double hi = (v001 * (1 - f1) + v011 * f1) * (1 - f0) + (v101 * (1 - f1) + v111 * f1) * f0;
                  field->grad[2 * n + idx] += g * (hi - lo);
                }
              }
              if (image->requires_grad) {
                double* dplane = image->grad.data() + c * n;
                for (int q = 0; q < 8; ++q) dplane[corners[q]] += g * weights[q];
              }
            }
          }
        }
      }
    });
  }
  return y;
}

TensorPtr loss_field_epe(Tape& tape, const TensorPtr& f, const TensorPtr& f_ref) {
  if (f->shape != f_ref->shape || f->shape.size() != 4 || f->shape[0] != 3) {
    throw std::invalid_argument("loss_field_epe: fields must share shape {3, D, H, W}");
  }
  const std::int64_t n = f->size() / 3;
  const bool track = f->requires_grad || f_ref->requires_grad;
  TensorPtr y = make_tensor({1}, track);
  double total = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double d0 = f->value[i] - f_ref->value[i];
    const double d1 = f->value[n + i] - f_ref->value[n + i];
    const double d2 = f->value[2 * n + i] - f_ref->value[2 * n + i];
    total += std::sqrt(d0 * d0 + d1 * d1 + d2 * d2);
  }
  y->value[0] = total / static_cast<double>(n);

  if (track) {
    tape.record([f, f_ref, y, n]() {
      const double g = y->grad[0] / static_cast<double>(n);
      for (std::int64_t i = 0; i < n; ++i) {
        const double d0 = f->value[i] - f_ref->value[i];
        const double d1 = f->value[n + i] - f_ref->value[n + i];
        const double d2 = f->value[2 * n + i] - f_ref->value[2 * n + i];
        const double norm = std::sqrt(d0 * d0 + d1 * d1 + d2 * d2);
        if (norm == 0.0) continue;  // subgradient 0 at the kink
        const double s = g / norm;
        if (f->requires_grad) {
          f->grad[i] += s * d0;
          f->grad[n + i] += s * d1;
          f->grad[2 * n + i] += s * d2;
        }
        if (f_ref->requires_grad) {
          f_ref->grad[i] -= s * d0;
          f_ref->grad[n + i] -= s * d1;
          f_ref->grad[2 * n + i] -= s * d2;
        }
      }
    });
  }
  return y;
}

TensorPtr loss_nlcc(Tape& tape, const TensorPtr& fixed, const TensorPtr& recon, int window) {
  if (fixed->shape != recon->shape || fixed->shape.size() != 4 || fixed->shape[0] != 1) {
    throw std::invalid_argument("loss_nlcc: images must share shape {1, D, H, W}");
  }
  if (fixed->requires_grad) {
    throw std::invalid_argument("loss_nlcc: gradient w.r.t. the fixed image is not supported");
  }
  const Dims dims = spatial_dims(fixed);
  if (window < 3 || window % 2 == 0) throw std::invalid_argument("loss_nlcc: window must be odd and >= 3");
  if (window > dims[0] || window > dims[1] || window > dims[2]) {
    throw std::invalid_argument("loss_nlcc: window larger than volume");
  }
  constexpr double kEps = 1e-5;
  const int h = window / 2;
  const double wn = static_cast<double>(window) * window * window;
  const double* a = fixed->value.data();
  const double* b = recon->value.data();

  // Per-center statistics retained for the backward pass.
  struct CenterStat {
    int i, j, k;
    double ma, mb, alpha, beta;
  };
  auto stats = std::make_shared<std::vector<CenterStat>>();

  double total = 0.0;
  std::int64_t count = 0;
  for (int i = h; i < dims[0] - h; ++i) {
    for (int j = h; j < dims[1] - h; ++j) {
      for (int k = h; k < dims[2] - h; ++k) {
        double sa = 0.0, sb = 0.0;
        for (int di = -h; di <= h; ++di) {
          for (int dj = -h; dj <= h; ++dj) {
            const double* row_a = a + linear_index(dims, i + di, j + dj, k - h);
            const double* row_b = b + linear_index(dims, i + di, j + dj, k - h);
            for (int dk = 0; dk < window; ++dk) {
              sa += row_a[dk];
              sb += row_b[dk];
            }
          }
        }
        const double ma = sa / wn;
        const double mb = sb / wn;
        double cross = 0.0, var_a = 0.0, var_b = 0.0;
        for (int di = -h; di <= h; ++di) {
          for (int dj = -h; dj <= h; ++dj) {
            const double* row_a = a + linear_index(dims, i + di, j + dj, k - h);
            const double* row_b = b + linear_index(dims, i + di, j + dj, k - h);
            for (int dk = 0; dk < window; ++dk) {
              const double da = row_a[dk] - ma;
              const double db = row_b[dk] - mb;
              cross += da * db;
              var_a += da * da;
              var_b += db * db;
            }
          }
        }
        const double den = var_a * var_b + kEps;
        total += (cross * cross) / den;
        ++count;
        if (recon->requires_grad) {
          stats->push_back({i, j, k, ma, mb, 2.0 * cross / den,
                            2.0 * cross * cross * var_a / (den * den)});
        }
      }
    }
  }

  TensorPtr y = make_tensor({1}, recon->requires_grad);
  y->value[0] = -total / static_cast<double>(count);

  if (recon->requires_grad) {
    tape.record([fixed, recon, y, stats, dims, h, window, count]() {
      const double g = -y->grad[0] / static_cast<double>(count);
      const double* a = fixed->value.data();
      const double* b = recon->value.data();
      for (const auto& s : *stats) {
        for (int di = -h; di <= h; ++di) {
          for (int dj = -h; dj <= h; ++dj) {
            const std::int64_t row = linear_index(dims, s.i + di, s.j + dj, s.k - h);
            for (int dk = 0; dk < window; ++dk) {
              recon->grad[row + dk] +=
                  g * (s.alpha * (a[row + dk] - s.ma) - s.beta * (b[row + dk] - s.mb));
            }
          }
        }
      }
    });
  }
  return y;
}

TensorPtr loss_dice(Tape& tape, const TensorPtr& pred, const TensorPtr& truth) {
  if (pred->shape != truth->shape || pred->shape.size() != 4) {
    throw std::invalid_argument("loss_dice: operands must share shape {C, D, H, W}");
  }
  constexpr double kSmooth = 1e-5;
  const int C = pred->shape[0];
  const std::int64_t n = pred->size() / C;
  const bool track = pred->requires_grad || truth->requires_grad;

  std::vector<double> num(C), den(C);
  double total = 0.0;
  for (int c = 0; c < C; ++c) {
    const double* p = pred->value.data() + static_cast<std::int64_t>(c) * n;
    const double* q = truth->value.data() + static_cast<std::int64_t>(c) * n;
    double pq = 0.0, psum = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      pq += p[i] * q[i];
      psum += p[i] + q[i];
    }
    num[c] = 2.0 * pq + kSmooth;
    den[c] = psum + kSmooth;
    total += num[c] / den[c];
  }
  TensorPtr y = make_tensor({1}, track);
  y->value[0] = -total / static_cast<double>(C);

  if (track) {
    tape.record([pred, truth, y, num, den, C, n]() {
      const double g = -y->grad[0] / static_cast<double>(C);
      for (int c = 0; c < C; ++c) {
        const double* p = pred->value.data() + static_cast<std::int64_t>(c) * n;
        const double* q = truth->value.data() + static_cast<std::int64_t>(c) * n;
        const double inv_den2 = 1.0 / (den[c] * den[c]);
        if (pred->requires_grad) {
          double* dp = pred->grad.data() + static_cast<std::int64_t>(c) * n;
          for (std::int64_t i = 0; i < n; ++i) {
            dp[i] += g * (2.0 * q[i] * den[c] - num[c]) * inv_den2;
          }
        }
        if (truth->requires_grad) {
          double* dq = truth->grad.data() + static_cast<std::int64_t>(c) * n;
          for (std::int64_t i = 0; i < n; ++i) {
            dq[i] += g * (2.0 * p[i] * den[c] - num[c]) * inv_den2;
          }
        }
      }
    });
  }
  return y;
}

TensorPtr add(Tape& tape, const TensorPtr& a, const TensorPtr& b) {
  if (a->shape != b->shape) throw std::invalid_argument("add: shape mismatch");
  TensorPtr y = make_tensor(a->shape, a->requires_grad || b->requires_grad);
  const std::int64_t n = a->size();
  for (std::int64_t i = 0; i < n; ++i) y->value[i] = a->value[i] + b->value[i];
  if (y->requires_grad) {
    tape.record([a, b, y, n]() {
      if (a->requires_grad) {
        for (std::int64_t i = 0; i < n; ++i) a->grad[i] += y->grad[i];
      }
      if (b->requires_grad) {
        for (std::int64_t i = 0; i < n; ++i) b->grad[i] += y->grad[i];
      }
    });
  }
  return y;
}

TensorPtr scale(Tape& tape, const TensorPtr& a, double k) {
  TensorPtr y = make_tensor(a->shape, a->requires_grad);
  const std::int64_t n = a->size();
  for (std::int64_t i = 0; i < n; ++i) y->value[i] = k * a->value[i];
  if (a->requires_grad) {
    tape.record([a, y, k, n]() {
      for (std::int64_t i = 0; i < n; ++i) a->grad[i] += k * y->grad[i];
    });
  }
  return y;
}

TensorPtr weighted_sum(Tape& tape, const TensorPtr& x, const std::vector<double>& coeffs) {
  if (static_cast<std::int64_t>(coeffs.size()) != x->size()) {
    throw std::invalid_argument("weighted_sum: coefficient length mismatch");
  }
  TensorPtr y = make_tensor({1}, x->requires_grad);
  double acc = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) acc += coeffs[i] * x->value[i];
  y->value[0] = acc;
  if (x->requires_grad) {
    tape.record([x, y, coeffs]() {
      const double g = y->grad[0];
      for (std::size_t i = 0; i < coeffs.size(); ++i) x->grad[i] += g * coeffs[i];
    });
  }
  return y;
}

TensorPtr loss_hybrid(Tape& tape, const TensorPtr& f, const TensorPtr& f_ref, const TensorPtr& i_fixed,
                      const TensorPtr& i_recon, double lambda, int window) {
  TensorPtr l_field = loss_field_epe(tape, f, f_ref);
  TensorPtr l_sim = loss_nlcc(tape, i_fixed, i_recon, window);
  return add(tape, l_field, scale(tape, l_sim, lambda));
}

TensorPtr loss_mtl(Tape& tape, const TensorPtr& f0, const TensorPtr& fg0, const TensorPtr& i0,
                   const TensorPtr& ir0, const TensorPtr& i1, const TensorPtr& ir1, const TensorPtr& s0,
                   const TensorPtr& sg0, const TensorPtr& s1, const TensorPtr& sg1, double lambda,
                   double beta, int window) {
  TensorPtr l_field = loss_field_epe(tape, f0, fg0);
  TensorPtr l_sim = add(tape, loss_nlcc(tape, i0, ir0, window), loss_nlcc(tape, i1, ir1, window));
  TensorPtr l_seg = add(tape, loss_dice(tape, s0, sg0), loss_dice(tape, s1, sg1));
  return add(tape, l_field, add(tape, scale(tape, l_sim, lambda), scale(tape, l_seg, beta)));
}

TensorPtr tensor_from_volume(const Volume& v, bool requires_grad) {
  return make_leaf({1, v.dims[0], v.dims[1], v.dims[2]}, v.data, requires_grad);
}

TensorPtr tensor_from_field(const DisplacementField& f, bool requires_grad) {
  return make_leaf({3, f.dims[0], f.dims[1], f.dims[2]}, f.vectors, requires_grad);
}

TensorPtr tensor_from_probmap(const ProbabilityMap& p, bool requires_grad) {
  return make_leaf({p.num_classes, p.dims[0], p.dims[1], p.dims[2]}, p.values, requires_grad);
}

DisplacementField field_from_tensor(const Tensor& t) {
  if (t.shape.size() != 4 || t.shape[0] != 3) {
    throw std::invalid_argument("field_from_tensor: tensor must be {3, D, H, W}");
  }
  DisplacementField f(Dims{t.shape[1], t.shape[2], t.shape[3]});
  f.vectors = t.value;
  return f;
}

ProbabilityMap probmap_from_tensor(const Tensor& t) {
  if (t.shape.size() != 4) throw std::invalid_argument("probmap_from_tensor: tensor must be {C, D, H, W}");
  ProbabilityMap p(Dims{t.shape[1], t.shape[2], t.shape[3]}, t.shape[0]);
  p.values = t.value;
  return p;
}

}  // namespace voxreg
