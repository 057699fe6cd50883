// Direct 3x3x3 convolution, zero padding 1, stride 1 or 2. Forward and both
// backward passes are written in gather form: every output element is
// accumulated by exactly one thread in a fixed order, so results are
// bitwise reproducible independent of the thread count.
#include <algorithm>
#include <cstdint>

#include "voxreg/nn_ops.hpp"

namespace voxreg {

namespace {

void forward_s1(const double* x, const double* w, const double* bias, double* y,
                int cin, int cout, int D, int H, int W) {
  const std::int64_t plane = static_cast<std::int64_t>(D) * H * W;
#pragma omp parallel for schedule(static)
  for (int oc = 0; oc < cout; ++oc) {
    double* yc = y + oc * plane;
    std::fill(yc, yc + plane, bias[oc]);
    for (int ic = 0; ic < cin; ++ic) {
      const double* xc = x + ic * plane;
      const double* wk = w + (static_cast<std::int64_t>(oc) * cin + ic) * 27;
      for (int z = 0; z < D; ++z) {
        for (int dz = 0; dz < 3; ++dz) {
          const int zi = z + dz - 1;
          if (zi < 0 || zi >= D) continue;
          for (int yy = 0; yy < H; ++yy) {
            double* out_row = yc + (static_cast<std::int64_t>(z) * H + yy) * W;
            for (int dy = 0; dy < 3; ++dy) {
              const int yi = yy + dy - 1;
              if (yi < 0 || yi >= H) continue;
              const double* in_row = xc + (static_cast<std::int64_t>(zi) * H + yi) * W;
              const double* w3 = wk + (dz * 3 + dy) * 3;
              const double w0 = w3[0], w1 = w3[1], w2 = w3[2];
              double edge = w1 * in_row[0];
              if (W > 1) edge += w2 * in_row[1];
              out_row[0] += edge;
              for (int xx = 1; xx + 1 < W; ++xx) {
                out_row[xx] += w0 * in_row[xx - 1] + w1 * in_row[xx] + w2 * in_row[xx + 1];
              }
              if (W > 1) out_row[W - 1] += w0 * in_row[W - 2] + w1 * in_row[W - 1];
            }
          }
        }
      }
    }
  }
}

// d_x accumulation for stride 1: correlation of d_y with the flipped kernel.
void backward_input_s1(double* dx, const double* w, const double* gy,
                       int cin, int cout, int D, int H, int W) {
  const std::int64_t plane = static_cast<std::int64_t>(D) * H * W;
#pragma omp parallel for schedule(static)
  for (int ic = 0; ic < cin; ++ic) {
    double* dxc = dx + ic * plane;
    for (int oc = 0; oc < cout; ++oc) {
      const double* gyc = gy + oc * plane;
      const double* wk = w + (static_cast<std::int64_t>(oc) * cin + ic) * 27;
      for (int z = 0; z < D; ++z) {
        for (int dz = 0; dz < 3; ++dz) {
          const int zo = z - (dz - 1);
          if (zo < 0 || zo >= D) continue;
          for (int yy = 0; yy < H; ++yy) {
            double* dx_row = dxc + (static_cast<std::int64_t>(z) * H + yy) * W;
            for (int dy = 0; dy < 3; ++dy) {
              const int yo = yy - (dy - 1);
              if (yo < 0 || yo >= H) continue;
              const double* gy_row = gyc + (static_cast<std::int64_t>(zo) * H + yo) * W;
              const double* w3 = wk + (dz * 3 + dy) * 3;
              const double w0 = w3[0], w1 = w3[1], w2 = w3[2];
              double edge = w1 * gy_row[0];
              if (W > 1) edge += w0 * gy_row[1];
              dx_row[0] += edge;
              for (int xx = 1; xx + 1 < W; ++xx) {
                dx_row[xx] += w0 * gy_row[xx + 1] + w1 * gy_row[xx] + w2 * gy_row[xx - 1];
              }
              if (W > 1) dx_row[W - 1] += w1 * gy_row[W - 1] + w2 * gy_row[W - 2];
            }
          }
        }
      }
    }
  }
}

void backward_weights_s1(const double* x, double* dw, double* db, const double* gy,
                         int cin, int cout, int D, int H, int W) {
  const std::int64_t plane = static_cast<std::int64_t>(D) * H * W;
#pragma omp parallel for schedule(static)
  for (int oc = 0; oc < cout; ++oc) {
    const double* gyc = gy + oc * plane;
    double bsum = 0.0;
    for (std::int64_t i = 0; i < plane; ++i) bsum += gyc[i];
    db[oc] += bsum;
    for (int ic = 0; ic < cin; ++ic) {
      const double* xc = x + ic * plane;
      double* wk = dw + (static_cast<std::int64_t>(oc) * cin + ic) * 27;
      for (int dz = 0; dz < 3; ++dz) {
        for (int dy = 0; dy < 3; ++dy) {
          double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0;
          for (int z = 0; z < D; ++z) {
            const int zi = z + dz - 1;
            if (zi < 0 || zi >= D) continue;
            for (int yy = 0; yy < H; ++yy) {
              const int yi = yy + dy - 1;
              if (yi < 0 || yi >= H) continue;
              const double* gy_row = gyc + (static_cast<std::int64_t>(z) * H + yy) * W;
              const double* in_row = xc + (static_cast<std::int64_t>(zi) * H + yi) * W;
              for (int xx = 1; xx < W; ++xx) acc0 += gy_row[xx] * in_row[xx - 1];
              for (int xx = 0; xx < W; ++xx) acc1 += gy_row[xx] * in_row[xx];
              for (int xx = 0; xx + 1 < W; ++xx) acc2 += gy_row[xx] * in_row[xx + 1];
            }
          }
          double* w3 = wk + (dz * 3 + dy) * 3;
          w3[0] += acc0;
          w3[1] += acc1;
          w3[2] += acc2;
        }
      }
    }
  }
}

void forward_s2(const double* x, const double* w, const double* bias, double* y,
                int cin, int cout, int D, int H, int W, int Do, int Ho, int Wo) {
  const std::int64_t in_plane = static_cast<std::int64_t>(D) * H * W;
  const std::int64_t out_plane = static_cast<std::int64_t>(Do) * Ho * Wo;
#pragma omp parallel for schedule(static)
  for (int oc = 0; oc < cout; ++oc) {
    double* yc = y + oc * out_plane;
    std::int64_t o = 0;
    for (int oz = 0; oz < Do; ++oz) {
      for (int oy = 0; oy < Ho; ++oy) {
        for (int ox = 0; ox < Wo; ++ox, ++o) {
          double acc = bias[oc];
          for (int ic = 0; ic < cin; ++ic) {
            const double* xc = x + ic * in_plane;
            const double* wk = w + (static_cast<std::int64_t>(oc) * cin + ic) * 27;
            for (int dz = 0; dz < 3; ++dz) {
              const int zi = 2 * oz + dz - 1;
              if (zi < 0 || zi >= D) continue;
              for (int dy = 0; dy < 3; ++dy) {
                const int yi = 2 * oy + dy - 1;
                if (yi < 0 || yi >= H) continue;
                for (int dxk = 0; dxk < 3; ++dxk) {
                  const int xi = 2 * ox + dxk - 1;
                  if (xi < 0 || xi >= W) continue;
                  acc += wk[(dz * 3 + dy) * 3 + dxk] * xc[(static_cast<std::int64_t>(zi) * H + yi) * W + xi];
                }
              }
            }
          }
          yc[o] = acc;
        }
      }
    }
  }
}

// Scatter form, kept single-threaded; stride-2 layers sit on the small
// encoder grids.
void backward_input_s2(double* dx, const double* w, const double* gy,
                       int cin, int cout, int D, int H, int W, int Do, int Ho, int Wo) {
  const std::int64_t in_plane = static_cast<std::int64_t>(D) * H * W;
  const std::int64_t out_plane = static_cast<std::int64_t>(Do) * Ho * Wo;
  for (int oc = 0; oc < cout; ++oc) {
    const double* gyc = gy + oc * out_plane;
    std::int64_t o = 0;
    for (int oz = 0; oz < Do; ++oz) {
      for (int oy = 0; oy < Ho; ++oy) {
        for (int ox = 0; ox < Wo; ++ox, ++o) {
          const double g = gyc[o];
          for (int ic = 0; ic < cin; ++ic) {
            double* dxc = dx + ic * in_plane;
            const double* wk = w + (static_cast<std::int64_t>(oc) * cin + ic) * 27;
            for (int dz = 0; dz < 3; ++dz) {
              const int zi = 2 * oz + dz - 1;
              if (zi < 0 || zi >= D) continue;
              for (int dy = 0; dy < 3; ++dy) {
                const int yi = 2 * oy + dy - 1;
                if (yi < 0 || yi >= H) continue;
                for (int dxk = 0; dxk < 3; ++dxk) {
                  const int xi = 2 * ox + dxk - 1;
                  if (xi < 0 || xi >= W) continue;
                  dxc[(static_cast<std::int64_t>(zi) * H + yi) * W + xi] += g * wk[(dz * 3 + dy) * 3 + dxk];
                }
              }
            }
          }
        }
      }
    }
  }
}

void backward_weights_s2(const double* x, double* dw, double* db, const double* gy,
                         int cin, int cout, int D, int H, int W, int Do, int Ho, int Wo) {
  const std::int64_t in_plane = static_cast<std::int64_t>(D) * H * W;
  const std::int64_t out_plane = static_cast<std::int64_t>(Do) * Ho * Wo;
#pragma omp parallel for schedule(static)
  for (int oc = 0; oc < cout; ++oc) {
    const double* gyc = gy + oc * out_plane;
    double bsum = 0.0;
    for (std::int64_t i = 0; i < out_plane; ++i) bsum += gyc[i];
    db[oc] += bsum;
    for (int ic = 0; ic < cin; ++ic) {
      const double* xc = x + ic * in_plane;
      double* wk = dw + (static_cast<std::int64_t>(oc) * cin + ic) * 27;
      for (int dz = 0; dz < 3; ++dz) {
        for (int dy = 0; dy < 3; ++dy) {
          for (int dxk = 0; dxk < 3; ++dxk) {
            double acc = 0.0;
            std::int64_t o = 0;
            for (int oz = 0; oz < Do; ++oz) {
              const int zi = 2 * oz + dz - 1;
              if (zi < 0 || zi >= D) {
                o += static_cast<std::int64_t>(Ho) * Wo;
                continue;
              }
              for (int oy = 0; oy < Ho; ++oy) {
                const int yi = 2 * oy + dy - 1;
                if (yi < 0 || yi >= H) {
                  o += Wo;
                  continue;
                }
                const double* in_row = xc + (static_cast<std::int64_t>(zi) * H + yi) * W;
                for (int ox = 0; ox < Wo; ++ox, ++o) {
                  const int xi = 2 * ox + dxk - 1;
                  if (xi < 0 || xi >= W) continue;
                  acc += gyc[o] * in_row[xi];
                }
              }
            }
            wk[(dz * 3 + dy) * 3 + dxk] += acc;
          }
        }
      }
    }
  }
}

}  // namespace

TensorPtr conv3d(Tape& tape, const TensorPtr& x, const TensorPtr& w, const TensorPtr& b, int stride) {
  if (x->shape.size() != 4) throw std::invalid_argument("conv3d: input must be {C, D, H, W}");
  if (w->shape.size() != 5 || w->shape[2] != 3 || w->shape[3] != 3 || w->shape[4] != 3) {
    throw std::invalid_argument("conv3d: kernel must be {Cout, Cin, 3, 3, 3}");
  }
  if (stride != 1 && stride != 2) throw std::invalid_argument("conv3d: stride must be 1 or 2");
  const int cin = x->shape[0], D = x->shape[1], H = x->shape[2], W = x->shape[3];
  const int cout = w->shape[0];
  if (w->shape[1] != cin) throw std::invalid_argument("conv3d: kernel input channels mismatch");
  if (b->size() != cout) throw std::invalid_argument("conv3d: bias length mismatch");

  const int Do = stride == 1 ? D : (D + 1) / 2;
  const int Ho = stride == 1 ? H : (H + 1) / 2;
  const int Wo = stride == 1 ? W : (W + 1) / 2;

  const bool track = x->requires_grad || w->requires_grad || b->requires_grad;
  TensorPtr y = make_tensor({cout, Do, Ho, Wo}, track);

  if (stride == 1) {
    forward_s1(x->value.data(), w->value.data(), b->value.data(), y->value.data(), cin, cout, D, H, W);
  } else {
    forward_s2(x->value.data(), w->value.data(), b->value.data(), y->value.data(), cin, cout, D, H, W, Do, Ho, Wo);
  }

  if (track) {
    tape.record([x, w, b, y, stride, cin, cout, D, H, W, Do, Ho, Wo]() {
      const double* gy = y->grad.data();
      if (x->requires_grad) {
        if (stride == 1) {
          backward_input_s1(x->grad.data(), w->value.data(), gy, cin, cout, D, H, W);
        } else {
          backward_input_s2(x->grad.data(), w->value.data(), gy, cin, cout, D, H, W, Do, Ho, Wo);
        }
      }
      if (w->requires_grad || b->requires_grad) {
        // weight and bias gradients are accumulated together; route the
        // untracked one into scratch
        std::vector<double> w_scratch, b_scratch;
        double* dw = w->grad.data();
        double* db = b->grad.data();
        if (!w->requires_grad) {
          w_scratch.assign(w->value.size(), 0.0);
          dw = w_scratch.data();
        }
        if (!b->requires_grad) {
          b_scratch.assign(b->value.size(), 0.0);
          db = b_scratch.data();
        }
        if (stride == 1) {
          backward_weights_s1(x->value.data(), dw, db, gy, cin, cout, D, H, W);
        } else {
          backward_weights_s2(x->value.data(), dw, db, gy, cin, cout, D, H, W, Do, Ho, Wo);
        }
      }
    });
  }
  return y;
}

}  // namespace voxreg
