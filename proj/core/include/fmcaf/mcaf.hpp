#pragma once

#include "fmcaf/tensor.hpp"

namespace fmcaf {

// Four-branch block: 1x1 | 1x1->3x3 | 1x1->3x3->3x3 | 3x3 avgpool->1x1,
// each branch a quarter of the output channels, ReLU after every conv.
struct InceptionParams {
    ConvLayer b0;              // 1x1
    ConvLayer b1a, b1b;        // 1x1 -> 3x3
    ConvLayer b2a, b2b, b2c;   // 1x1 -> 3x3 -> 3x3
    ConvLayer b3;              // pool -> 1x1
};

struct ModalityAttnParams {
    ConvLayer q, k, v;         // 1x1, C -> C
    ConvLayer local_logit;     // 1x1, C -> 1
};

struct GlobalGateParams {
    ConvLayer q, k, v;         // C -> C projections over region descriptors
    ConvLayer out;             // C -> 1 logit head
};

struct McafParams {
    InceptionParams inception_rgb;    // 3 -> C
    InceptionParams inception_ir;     // 1 -> C
    InceptionParams inception_fused;  // 2C -> C
    ModalityAttnParams attn_rgb, attn_ir;
    GlobalGateParams gate;
    ConvLayer final_proj;             // 1x1, 2C -> 3
};

struct McafConfig {
    int channels = 32;
    int heads = 4;
    int window = 8;
    int region_grid = 8;
    bool use_cross_attention = true;
    bool use_global_gate = true;
};

Tensor4 inception_extract(const Tensor4& x, const InceptionParams& p);

// Windowed multi-head attention: queries from the first argument, keys and
// values from the second, softmax over the window's key tokens, plus a
// residual connection back to the query features.
Tensor4 window_cross_attention(const Tensor4& queries_from, const Tensor4& keys_values_from,
                               const ConvLayer& q_proj, const ConvLayer& k_proj,
                               const ConvLayer& v_proj, const McafConfig& cfg);

// Per-pixel two-way softmax across modalities; weight_* sum to one pointwise.
struct LocalAttention {
    Tensor4 rgb, ir;              // modulated features
    Tensor4 weight_rgb, weight_ir;  // (B,1,H,W) attention maps
};
LocalAttention joint_local_attention(const Tensor4& f_rgb, const Tensor4& f_ir,
                                     const ConvLayer& logit_rgb, const ConvLayer& logit_ir);

// Channel concat (2C) through the fused inception block -> (B,C,H,W).
Tensor4 fuse(const Tensor4& f_rgb, const Tensor4& f_ir, const InceptionParams& fused);

// Region descriptors (mean pool over a g x g partition), single-head token
// self-attention, sigmoid logits, nearest-neighbor upsample to (B,1,H,W).
Tensor4 global_gate(const Tensor4& f_fused, const GlobalGateParams& p, const McafConfig& cfg);

// fused * (1 + gate), gate broadcast over channels.
Tensor4 residual_apply(const Tensor4& f_fused, const Tensor4& gate);

// Channel concat -> 1x1 conv -> 3 channels, clamped to [0,1].
Tensor4 project3(const Tensor4& branch_rgb, const Tensor4& branch_ir, const ConvLayer& proj);

// Full block: (B,4,H,W) blended input -> (B,3,H,W) fused image.
Tensor4 mcaf_forward(const Tensor4& x_blend, const McafParams& p, const McafConfig& cfg);

} // namespace fmcaf
