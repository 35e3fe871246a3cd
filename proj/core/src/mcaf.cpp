#include "fmcaf/mcaf.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "fmcaf/freq_filter.hpp"

namespace fmcaf {

namespace {

void check_divisible(int value, int by, const char* what) {
    if (by < 1 || value % by != 0)
        throw ShapeError(std::string(what) + ": " + std::to_string(value) +
                         " not divisible by " + std::to_string(by));
}

} // namespace

Tensor4 inception_extract(const Tensor4& x, const InceptionParams& p) {
    const int quarter = p.b0.weight.b;
    if (quarter < 1) throw ConfigError("inception_extract: empty branch width");

    const Tensor4 br0 = relu(conv2d(x, p.b0));
    Tensor4 br1 = relu(conv2d(x, p.b1a));
    br1 = relu(conv2d(br1, p.b1b, 1, 1));
    Tensor4 br2 = relu(conv2d(x, p.b2a));
    br2 = relu(conv2d(br2, p.b2b, 1, 1));
    br2 = relu(conv2d(br2, p.b2c, 1, 1));
    Tensor4 br3 = relu(conv2d(avg_pool2d(x, 3, 1, 1), p.b3));

    return concat(concat(br0, br1, 1), concat(br2, br3, 1), 1);
}

Tensor4 window_cross_attention(const Tensor4& queries_from, const Tensor4& keys_values_from,
                               const ConvLayer& q_proj, const ConvLayer& k_proj,
                               const ConvLayer& v_proj, const McafConfig& cfg) {
    if (!queries_from.same_shape(keys_values_from))
        throw ShapeError("window_cross_attention: modality feature shapes differ");
    const int C = queries_from.c, H = queries_from.h, W = queries_from.w;
    if (C != cfg.channels)
        throw ShapeError("window_cross_attention: channel count does not match config");
    check_divisible(C, cfg.heads, "window_cross_attention channels/heads");
    check_divisible(H, cfg.window, "window_cross_attention height/window");
    check_divisible(W, cfg.window, "window_cross_attention width/window");

    const Tensor4 q = conv2d(queries_from, q_proj);
    const Tensor4 k = conv2d(keys_values_from, k_proj);
    const Tensor4 v = conv2d(keys_values_from, v_proj);

    const int win = cfg.window;
    const int t = win * win;                 // tokens per window
    const int d = C / cfg.heads;             // per-head dimension
    const float scale = 1.0f / std::sqrt(static_cast<float>(d));

    Tensor4 out = queries_from;  // residual baseline

    std::vector<float> qs(static_cast<std::size_t>(t) * d);
    std::vector<float> ks(static_cast<std::size_t>(t) * d);
    std::vector<float> vs(static_cast<std::size_t>(t) * d);
    std::vector<float> scores(static_cast<std::size_t>(t) * t);

    for (int ib = 0; ib < queries_from.b; ++ib) {
        for (int wy = 0; wy < H; wy += win) {
            for (int wx = 0; wx < W; wx += win) {
                for (int head = 0; head < cfg.heads; ++head) {
                    const int c0 = head * d;
                    // Gather window tokens into contiguous (t x d) blocks.
                    for (int ty = 0; ty < win; ++ty) {
                        for (int tx = 0; tx < win; ++tx) {
                            const int tok = ty * win + tx;
                            const int py = wy + ty, px = wx + tx;
                            for (int cd = 0; cd < d; ++cd) {
                                qs[static_cast<std::size_t>(tok) * d + cd] = q.at(ib, c0 + cd, py, px);
                                ks[static_cast<std::size_t>(tok) * d + cd] = k.at(ib, c0 + cd, py, px);
                                vs[static_cast<std::size_t>(tok) * d + cd] = v.at(ib, c0 + cd, py, px);
                            }
                        }
                    }
                    for (int i = 0; i < t; ++i) {
                        const float* qi = qs.data() + static_cast<std::size_t>(i) * d;
                        float* srow = scores.data() + static_cast<std::size_t>(i) * t;
                        for (int j = 0; j < t; ++j) {
                            const float* kj = ks.data() + static_cast<std::size_t>(j) * d;
                            float acc = 0.0f;
                            for (int cd = 0; cd < d; ++cd) acc += qi[cd] * kj[cd];
                            srow[j] = acc * scale;
                        }
                    }
                    softmax_rows(scores.data(), t, t);
                    for (int i = 0; i < t; ++i) {
                        const float* srow = scores.data() + static_cast<std::size_t>(i) * t;
                        const int py = wy + i / win, px = wx + i % win;
                        for (int cd = 0; cd < d; ++cd) {
                            float acc = 0.0f;
                            for (int j = 0; j < t; ++j)
                                acc += srow[j] * vs[static_cast<std::size_t>(j) * d + cd];
                            out.at(ib, c0 + cd, py, px) += acc;
                        }
                    }
                }
            }
        }
    }
    return out;
}

LocalAttention joint_local_attention(const Tensor4& f_rgb, const Tensor4& f_ir,
                                     const ConvLayer& logit_rgb, const ConvLayer& logit_ir) {
    if (!f_rgb.same_shape(f_ir))
        throw ShapeError("joint_local_attention: modality feature shapes differ");

    const Tensor4 l_rgb = conv2d(f_rgb, logit_rgb);
    const Tensor4 l_ir = conv2d(f_ir, logit_ir);

    LocalAttention res;
    res.weight_rgb = Tensor4(f_rgb.b, 1, f_rgb.h, f_rgb.w);
    res.weight_ir = Tensor4(f_rgb.b, 1, f_rgb.h, f_rgb.w);
    for (std::size_t i = 0; i < l_rgb.data.size(); ++i) {
        const float a = l_rgb.data[i], b = l_ir.data[i];
        const float m = std::max(a, b);
        const float ea = std::exp(a - m), eb = std::exp(b - m);
        const float wr = ea / (ea + eb);
        res.weight_rgb.data[i] = wr;
        res.weight_ir.data[i] = 1.0f - wr;
    }

    res.rgb = f_rgb;
    res.ir = f_ir;
    const std::size_t plane_n = static_cast<std::size_t>(f_rgb.h) * f_rgb.w;
    for (int ib = 0; ib < f_rgb.b; ++ib) {
        const float* wr = res.weight_rgb.plane(ib, 0);
        const float* wi = res.weight_ir.plane(ib, 0);
        for (int ic = 0; ic < f_rgb.c; ++ic) {
            float* pr = res.rgb.plane(ib, ic);
            float* pi = res.ir.plane(ib, ic);
            for (std::size_t i = 0; i < plane_n; ++i) {
                pr[i] *= wr[i];
                pi[i] *= wi[i];
            }
        }
    }
    return res;
}

Tensor4 fuse(const Tensor4& f_rgb, const Tensor4& f_ir, const InceptionParams& fused) {
    if (f_rgb.c != f_ir.c)
        throw ShapeError("fuse: modality channel counts differ");
    return inception_extract(concat(f_rgb, f_ir, 1), fused);
}

Tensor4 global_gate(const Tensor4& f_fused, const GlobalGateParams& p, const McafConfig& cfg) {
    const int C = f_fused.c, H = f_fused.h, W = f_fused.w, g = cfg.region_grid;
    check_divisible(H, g, "global_gate height/region_grid");
    check_divisible(W, g, "global_gate width/region_grid");

    const int rh = H / g, rw = W / g;
    const int tokens = g * g;
    const float scale = 1.0f / std::sqrt(static_cast<float>(C));

    Tensor4 gate_lowres(f_fused.b, 1, g, g);
    std::vector<float> desc(static_cast<std::size_t>(tokens) * C);
    std::vector<float> qd(desc.size()), kd(desc.size()), vd(desc.size());
    std::vector<float> scores(static_cast<std::size_t>(tokens) * tokens);

    auto project = [C](const ConvLayer& layer, const float* in, float* out_vec, int out_dim) {
        for (int o = 0; o < out_dim; ++o) {
            float acc = layer.bias[o];
            for (int ci = 0; ci < C; ++ci) acc += layer.weight.at(o, ci, 0, 0) * in[ci];
            out_vec[o] = acc;
        }
    };

    for (int ib = 0; ib < f_fused.b; ++ib) {
        // Mean-pool each region to a C-vector descriptor.
        for (int gy = 0; gy < g; ++gy) {
            for (int gx = 0; gx < g; ++gx) {
                float* dv = desc.data() + (static_cast<std::size_t>(gy) * g + gx) * C;
                for (int ic = 0; ic < C; ++ic) {
                    const float* ip = f_fused.plane(ib, ic);
                    double acc = 0.0;
                    for (int y = gy * rh; y < (gy + 1) * rh; ++y)
                        for (int x = gx * rw; x < (gx + 1) * rw; ++x)
                            acc += ip[static_cast<std::size_t>(y) * W + x];
                    dv[ic] = static_cast<float>(acc / (static_cast<double>(rh) * rw));
                }
            }
        }
        for (int tok = 0; tok < tokens; ++tok) {
            const float* dv = desc.data() + static_cast<std::size_t>(tok) * C;
            project(p.q, dv, qd.data() + static_cast<std::size_t>(tok) * C, C);
            project(p.k, dv, kd.data() + static_cast<std::size_t>(tok) * C, C);
            project(p.v, dv, vd.data() + static_cast<std::size_t>(tok) * C, C);
        }
        for (int i = 0; i < tokens; ++i) {
            const float* qi = qd.data() + static_cast<std::size_t>(i) * C;
            float* srow = scores.data() + static_cast<std::size_t>(i) * tokens;
            for (int j = 0; j < tokens; ++j) {
                const float* kj = kd.data() + static_cast<std::size_t>(j) * C;
                float acc = 0.0f;
                for (int ci = 0; ci < C; ++ci) acc += qi[ci] * kj[ci];
                srow[j] = acc * scale;
            }
        }
        softmax_rows(scores.data(), tokens, tokens);
        std::vector<float> attended(C);
        for (int i = 0; i < tokens; ++i) {
            const float* srow = scores.data() + static_cast<std::size_t>(i) * tokens;
            for (int ci = 0; ci < C; ++ci) {
                float acc = 0.0f;
                for (int j = 0; j < tokens; ++j)
                    acc += srow[j] * vd[static_cast<std::size_t>(j) * C + ci];
                attended[ci] = acc;
            }
            float logit = 0.0f;
            project(p.out, attended.data(), &logit, 1);
            gate_lowres.at(ib, 0, i / g, i % g) = sigmoid_scalar(logit);
        }
    }
    return upsample_nearest(gate_lowres, H, W);
}

Tensor4 residual_apply(const Tensor4& f_fused, const Tensor4& gate) {
    if (gate.b != f_fused.b || gate.h != f_fused.h || gate.w != f_fused.w ||
        (gate.c != 1 && gate.c != f_fused.c))
        throw ShapeError("residual_apply: gate not broadcastable to features");
    Tensor4 out = f_fused;
    const std::size_t plane_n = static_cast<std::size_t>(f_fused.h) * f_fused.w;
    for (int ib = 0; ib < f_fused.b; ++ib)
        for (int ic = 0; ic < f_fused.c; ++ic) {
            const float* gp = gate.plane(ib, gate.c == 1 ? 0 : ic);
            float* op = out.plane(ib, ic);
            for (std::size_t i = 0; i < plane_n; ++i) op[i] *= 1.0f + gp[i];
        }
    return out;
}

Tensor4 project3(const Tensor4& branch_rgb, const Tensor4& branch_ir, const ConvLayer& proj) {
    Tensor4 out = conv2d(concat(branch_rgb, branch_ir, 1), proj);
    for (float& v : out.data) v = clamp01(v);
    return out;
}

Tensor4 mcaf_forward(const Tensor4& x_blend, const McafParams& p, const McafConfig& cfg) {
    auto [rgb, ir] = split_modalities(x_blend);
    const Tensor4 f_rgb = inception_extract(rgb, p.inception_rgb);
    const Tensor4 f_ir = inception_extract(ir, p.inception_ir);

    Tensor4 a_rgb = f_rgb, a_ir = f_ir;
    if (cfg.use_cross_attention) {
        a_rgb = window_cross_attention(f_rgb, f_ir, p.attn_rgb.q, p.attn_ir.k, p.attn_ir.v, cfg);
        a_ir = window_cross_attention(f_ir, f_rgb, p.attn_ir.q, p.attn_rgb.k, p.attn_rgb.v, cfg);
    }

    const LocalAttention local =
        joint_local_attention(a_rgb, a_ir, p.attn_rgb.local_logit, p.attn_ir.local_logit);

    Tensor4 f_final = fuse(local.rgb, local.ir, p.inception_fused);
    if (cfg.use_global_gate)
        f_final = residual_apply(f_final, global_gate(f_final, p.gate, cfg));

    // One fused map, one gate; the two projection branches carry the
    // per-modality local attention weighting.
    Tensor4 branch_rgb = f_final, branch_ir = f_final;
    const std::size_t plane_n = static_cast<std::size_t>(f_final.h) * f_final.w;
    for (int ib = 0; ib < f_final.b; ++ib) {
        const float* wr = local.weight_rgb.plane(ib, 0);
        const float* wi = local.weight_ir.plane(ib, 0);
        for (int ic = 0; ic < f_final.c; ++ic) {
            float* pr = branch_rgb.plane(ib, ic);
            float* pi = branch_ir.plane(ib, ic);
            for (std::size_t i = 0; i < plane_n; ++i) {
                pr[i] *= wr[i];
                pi[i] *= wi[i];
            }
        }
    }
    return project3(branch_rgb, branch_ir, p.final_proj);
}

} // namespace fmcaf
