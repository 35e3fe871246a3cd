#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fmcaf/freq_filter.hpp"
#include "fmcaf/mcaf.hpp"

namespace fmcaf {

// Every knob the two stages share, plus the ablation switches.
struct FusionConfig {
    std::uint64_t seed = 0;
    int channels = 32;
    int heads = 4;
    int window = 8;
    int region_grid = 8;
    float topk_ratio = 0.25f;
    float alpha_init = 0.2f;
    int image_size = 512;
    bool enable_filter = true;
    bool enable_cross_attention = true;
    bool enable_global_gate = true;

    void validate() const;  // throws ConfigError on the first violated rule

    FilterConfig filter_config() const { return {topk_ratio, alpha_init}; }
    McafConfig mcaf_config() const {
        return {channels, heads, window, region_grid, enable_cross_attention, enable_global_gate};
    }
};

struct FusionParams {
    FilterParams filter;
    McafParams mcaf;
};

// Seeded, name-keyed initialization: each tensor draws from its own counter
// stream, so values do not depend on initialization order.
FusionParams init_fusion_params(const FusionConfig& cfg);

// Freq-Filter stage (unless disabled) followed by MCAF: (B,4,H,W) -> (B,3,H,W).
Tensor4 forward_pipeline(const Tensor4& x, const FusionParams& p, const FusionConfig& cfg);

// Flat, named view over every learnable array, in a fixed enumeration order.
struct ParamView {
    std::string name;
    std::vector<std::uint32_t> dims;
    float* values = nullptr;
    std::size_t count = 0;
};
std::vector<ParamView> enumerate_params(FusionParams& p);

} // namespace fmcaf
