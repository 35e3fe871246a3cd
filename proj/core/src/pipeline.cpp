#include "fmcaf/pipeline.hpp"

#include <string>

namespace fmcaf {

namespace {

ConvLayer init_conv(std::uint64_t seed, const std::string& name, int cout, int cin, int kh, int kw) {
    Rng rng(seed, name);
    ConvLayer layer;
    layer.weight = init_params(rng, cout, cin, kh, kw, cin * kh * kw);
    layer.bias.assign(cout, 0.0f);
    return layer;
}

InceptionParams init_inception(std::uint64_t seed, const std::string& prefix, int cin, int cout) {
    const int quarter = cout / 4;
    InceptionParams p;
    p.b0 = init_conv(seed, prefix + ".b0", quarter, cin, 1, 1);
    p.b1a = init_conv(seed, prefix + ".b1a", quarter, cin, 1, 1);
    p.b1b = init_conv(seed, prefix + ".b1b", quarter, quarter, 3, 3);
    p.b2a = init_conv(seed, prefix + ".b2a", quarter, cin, 1, 1);
    p.b2b = init_conv(seed, prefix + ".b2b", quarter, quarter, 3, 3);
    p.b2c = init_conv(seed, prefix + ".b2c", quarter, quarter, 3, 3);
    p.b3 = init_conv(seed, prefix + ".b3", quarter, cin, 1, 1);
    return p;
}

ModalityAttnParams init_attn(std::uint64_t seed, const std::string& prefix, int c) {
    ModalityAttnParams p;
    p.q = init_conv(seed, prefix + ".q", c, c, 1, 1);
    p.k = init_conv(seed, prefix + ".k", c, c, 1, 1);
    p.v = init_conv(seed, prefix + ".v", c, c, 1, 1);
    p.local_logit = init_conv(seed, prefix + ".local", 1, c, 1, 1);
    return p;
}

void view_conv(std::vector<ParamView>& out, const std::string& prefix, ConvLayer& layer) {
    const Tensor4& wt = layer.weight;
    out.push_back({prefix + ".weight",
                   {static_cast<std::uint32_t>(wt.b), static_cast<std::uint32_t>(wt.c),
                    static_cast<std::uint32_t>(wt.h), static_cast<std::uint32_t>(wt.w)},
                   layer.weight.data.data(), layer.weight.data.size()});
    out.push_back({prefix + ".bias",
                   {static_cast<std::uint32_t>(layer.bias.size())},
                   layer.bias.data(), layer.bias.size()});
}

void view_inception(std::vector<ParamView>& out, const std::string& prefix, InceptionParams& p) {
    view_conv(out, prefix + ".b0", p.b0);
    view_conv(out, prefix + ".b1a", p.b1a);
    view_conv(out, prefix + ".b1b", p.b1b);
    view_conv(out, prefix + ".b2a", p.b2a);
    view_conv(out, prefix + ".b2b", p.b2b);
    view_conv(out, prefix + ".b2c", p.b2c);
    view_conv(out, prefix + ".b3", p.b3);
}

void view_attn(std::vector<ParamView>& out, const std::string& prefix, ModalityAttnParams& p) {
    view_conv(out, prefix + ".q", p.q);
    view_conv(out, prefix + ".k", p.k);
    view_conv(out, prefix + ".v", p.v);
    view_conv(out, prefix + ".local", p.local_logit);
}

} // namespace

void FusionConfig::validate() const {
    if (channels < 4) throw ConfigError("channels must be >= 4");
    if (channels % 4 != 0) throw ConfigError("channels must be divisible by 4");
    if (heads < 1) throw ConfigError("heads must be >= 1");
    if (channels % heads != 0) throw ConfigError("channels must be divisible by heads");
    if (window < 1) throw ConfigError("window must be >= 1");
    if (region_grid < 1) throw ConfigError("region_grid must be >= 1");
    if (!(topk_ratio > 0.0f) || topk_ratio > 1.0f)
        throw ConfigError("topk_ratio must be in (0,1]");
    if (alpha_init < 0.0f || alpha_init > 1.0f)
        throw ConfigError("alpha_init must be in [0,1]");
    if (image_size < 1) throw ConfigError("image_size must be >= 1");
    if (image_size % window != 0)
        throw ConfigError("image_size must be divisible by window");
    if (image_size % region_grid != 0)
        throw ConfigError("image_size must be divisible by region_grid");
}

FusionParams init_fusion_params(const FusionConfig& cfg) {
    cfg.validate();
    const std::uint64_t s = cfg.seed;
    const int c = cfg.channels;

    FusionParams p;
    p.filter.encoder_conv1 = init_conv(s, "filter.encoder.conv1", 8, 1, 3, 3);
    p.filter.encoder_conv2 = init_conv(s, "filter.encoder.conv2", 1, 8, 3, 3);
    p.filter.alpha_raw_rgb = cfg.alpha_init;
    p.filter.alpha_raw_ir = cfg.alpha_init;

    p.mcaf.inception_rgb = init_inception(s, "mcaf.inception_rgb", 3, c);
    p.mcaf.inception_ir = init_inception(s, "mcaf.inception_ir", 1, c);
    p.mcaf.inception_fused = init_inception(s, "mcaf.inception_fused", 2 * c, c);
    p.mcaf.attn_rgb = init_attn(s, "mcaf.attn_rgb", c);
    p.mcaf.attn_ir = init_attn(s, "mcaf.attn_ir", c);
    p.mcaf.gate.q = init_conv(s, "mcaf.gate.q", c, c, 1, 1);
    p.mcaf.gate.k = init_conv(s, "mcaf.gate.k", c, c, 1, 1);
    p.mcaf.gate.v = init_conv(s, "mcaf.gate.v", c, c, 1, 1);
    p.mcaf.gate.out = init_conv(s, "mcaf.gate.out", 1, c, 1, 1);
    p.mcaf.final_proj = init_conv(s, "mcaf.final_proj", 3, 2 * c, 1, 1);
    return p;
}

Tensor4 forward_pipeline(const Tensor4& x, const FusionParams& p, const FusionConfig& cfg) {
    cfg.validate();
    if (x.c != 4) throw ShapeError("forward_pipeline: expected 4-channel [R,G,B,IR] input");
    if (x.h % cfg.window != 0 || x.w % cfg.window != 0)
        throw ShapeError("forward_pipeline: spatial dims must be divisible by window");
    if (x.h % cfg.region_grid != 0 || x.w % cfg.region_grid != 0)
        throw ShapeError("forward_pipeline: spatial dims must be divisible by region_grid");

    if (cfg.enable_filter) {
        const Tensor4 blended = freq_filter_forward(x, p.filter, cfg.filter_config());
        return mcaf_forward(blended, p.mcaf, cfg.mcaf_config());
    }
    return mcaf_forward(x, p.mcaf, cfg.mcaf_config());
}

std::vector<ParamView> enumerate_params(FusionParams& p) {
    std::vector<ParamView> out;
    view_conv(out, "filter.encoder.conv1", p.filter.encoder_conv1);
    view_conv(out, "filter.encoder.conv2", p.filter.encoder_conv2);
    out.push_back({"filter.alpha_rgb", {1}, &p.filter.alpha_raw_rgb, 1});
    out.push_back({"filter.alpha_ir", {1}, &p.filter.alpha_raw_ir, 1});
    view_inception(out, "mcaf.inception_rgb", p.mcaf.inception_rgb);
    view_inception(out, "mcaf.inception_ir", p.mcaf.inception_ir);
    view_inception(out, "mcaf.inception_fused", p.mcaf.inception_fused);
    view_attn(out, "mcaf.attn_rgb", p.mcaf.attn_rgb);
    view_attn(out, "mcaf.attn_ir", p.mcaf.attn_ir);
    view_conv(out, "mcaf.gate.q", p.mcaf.gate.q);
    view_conv(out, "mcaf.gate.k", p.mcaf.gate.k);
    view_conv(out, "mcaf.gate.v", p.mcaf.gate.v);
    view_conv(out, "mcaf.gate.out", p.mcaf.gate.out);
    view_conv(out, "mcaf.final_proj", p.mcaf.final_proj);
    return out;
}

} // namespace fmcaf
