// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#include "cwdm/denoiser.hpp"

#include <cmath>
#include <cstring>

namespace cwdm {

namespace {

int norm_groups(int channels) {
  int groups = std::min(32, channels);
  while (channels % groups != 0) --groups;
  return groups;
}

}  // namespace

ResBlock3dImpl::ResBlock3dImpl(int in_channels, int out_channels, int time_dim) {
  norm1_ = register_module("norm1",
                           torch::nn::GroupNorm(torch::nn::GroupNormOptions(
                               norm_groups(in_channels), in_channels)));
  conv1_ = register_module(
      "conv1", torch::nn::Conv3d(
                   torch::nn::Conv3dOptions(in_channels, out_channels, 3).padding(1)));
  time_proj_ = register_module("time_proj", torch::nn::Linear(time_dim, out_channels));
  norm2_ = register_module("norm2",
                           torch::nn::GroupNorm(torch::nn::GroupNormOptions(
                               norm_groups(out_channels), out_channels)));
  conv2_ = register_module(
      "conv2", torch::nn::Conv3d(
                   torch::nn::Conv3dOptions(out_channels, out_channels, 3).padding(1)));
  if (in_channels != out_channels) {
    shortcut_ = register_module(
        "shortcut",
        torch::nn::Conv3d(torch::nn::Conv3dOptions(in_channels, out_channels, 1)));
  }
}

torch::Tensor ResBlock3dImpl::forward(const torch::Tensor& x, const torch::Tensor& time_emb) {
  auto h = conv1_->forward(torch::silu(norm1_->forward(x)));
  auto emb = time_proj_->forward(torch::silu(time_emb));
  h = h + emb.reshape({emb.size(0), emb.size(1), 1, 1, 1});
  h = conv2_->forward(torch::silu(norm2_->forward(h)));
  return h + (shortcut_ ? shortcut_->forward(x) : x);
}

SelfAttention3dImpl::SelfAttention3dImpl(int channels) : channels_(channels) {
  norm_ = register_module(
      "norm", torch::nn::GroupNorm(torch::nn::GroupNormOptions(norm_groups(channels), channels)));
  qkv_ = register_module("qkv",
                         torch::nn::Conv3d(torch::nn::Conv3dOptions(channels, channels * 3, 1)));
  proj_ = register_module("proj",
                          torch::nn::Conv3d(torch::nn::Conv3dOptions(channels, channels, 1)));
}

torch::Tensor SelfAttention3dImpl::forward(const torch::Tensor& x) {
  const auto sizes = x.sizes();
  const int64_t b = sizes[0], n = sizes[2] * sizes[3] * sizes[4];
  auto qkv = qkv_->forward(norm_->forward(x)).reshape({b, 3, channels_, n});
  auto q = qkv.select(1, 0), k = qkv.select(1, 1), v = qkv.select(1, 2);
  auto attn = torch::softmax(
      torch::bmm(q.transpose(1, 2), k) / std::sqrt(double(channels_)), /*dim=*/2);
  auto out = torch::bmm(v, attn.transpose(1, 2)).reshape(sizes);
  return x + proj_->forward(out);
}

DenoiserNetImpl::DenoiserNetImpl(DenoiserConfig config) : config_(std::move(config)) {
  config_.validate();
  const int time_dim = config_.time_embedding_dim;
  const int levels = config_.depth_levels;
  auto channels_at = [&](int level) {
    return config_.base_channels * config_.channel_multipliers[level];
  };
  auto has_attention = [&](int level) {
    for (int a : config_.attention_levels) {
      if (a == level) return true;
    }
    return false;
  };

  time_mlp1_ = register_module("time_mlp1", torch::nn::Linear(time_dim, time_dim));
  time_mlp2_ = register_module("time_mlp2", torch::nn::Linear(time_dim, time_dim));

  stem_ = register_module(
      "stem", torch::nn::Conv3d(
                  torch::nn::Conv3dOptions(config_.in_channels, channels_at(0), 3).padding(1)));

  // Encoder: res blocks change channels at each level; strided convs halve
  // the grid between levels without touching channels.
  int ch = channels_at(0);
  for (int level = 0; level < levels; ++level) {
    for (int b = 0; b < config_.res_blocks_per_level; ++b) {
      auto block = ResBlock3d(ch, channels_at(level), time_dim);
      register_module("enc_" + std::to_string(level) + "_" + std::to_string(b), block);
      encoder_blocks_.push_back(block);
      ch = channels_at(level);
    }
    auto attn = has_attention(level) ? SelfAttention3d(ch) : SelfAttention3d(nullptr);
    if (attn) register_module("enc_attn_" + std::to_string(level), attn);
    encoder_attn_.push_back(attn);
    if (level + 1 < levels) {
      auto down = torch::nn::Conv3d(torch::nn::Conv3dOptions(ch, ch, 3).stride(2).padding(1));
      register_module("down_" + std::to_string(level), down);
      downsamples_.push_back(down);
    }
  }

  mid_block1_ = register_module("mid1", ResBlock3d(ch, ch, time_dim));
  mid_block2_ = register_module("mid2", ResBlock3d(ch, ch, time_dim));

  // Decoder levels run deepest-first. Merging happens at the skip's own
  // channel width: upsample convs reduce to the next level's width first.
  for (int level = levels - 1; level >= 0; --level) {
    const int skip_ch = channels_at(level);
    if (level < levels - 1) {
      auto up = torch::nn::Conv3d(
          torch::nn::Conv3dOptions(channels_at(level + 1), skip_ch, 3).padding(1));
      register_module("up_" + std::to_string(level), up);
      upsample_convs_.push_back(up);
    }
    for (int b = 0; b < config_.res_blocks_per_level; ++b) {
      const bool merge = b == 0 && config_.skip_mode == SkipMode::concatenation;
      auto block = ResBlock3d(merge ? 2 * skip_ch : skip_ch, skip_ch, time_dim);
      register_module("dec_" + std::to_string(level) + "_" + std::to_string(b), block);
      decoder_blocks_.push_back(block);
    }
    auto attn = has_attention(level) ? SelfAttention3d(skip_ch) : SelfAttention3d(nullptr);
    if (attn) register_module("dec_attn_" + std::to_string(level), attn);
    decoder_attn_.push_back(attn);
  }

  out_norm_ = register_module("out_norm", torch::nn::GroupNorm(torch::nn::GroupNormOptions(
                                              norm_groups(channels_at(0)), channels_at(0))));
  out_conv_ = register_module(
      "out_conv", torch::nn::Conv3d(
                      torch::nn::Conv3dOptions(channels_at(0), config_.out_channels, 3).padding(1)));
}

torch::Tensor DenoiserNetImpl::time_embedding(const torch::Tensor& t_norm) const {
  // Sinusoidal embedding of the normalized timestep. Scaling by 1000 puts
  // t/T back on the footing the classic integer-step embedding assumes, so
  // the frequency ladder resolves both coarse and fine time differences.
  const int half = config_.time_embedding_dim / 2;
  auto pos = t_norm.to(torch::kFloat) * 1000.0;
  auto freqs = torch::exp(torch::arange(half, torch::kFloat) *
                          (-std::log(10000.0) / double(half)));
  auto args = pos.unsqueeze(1) * freqs.unsqueeze(0);
  return torch::cat({torch::cos(args), torch::sin(args)}, 1);
}

torch::Tensor DenoiserNetImpl::forward(const torch::Tensor& x, const torch::Tensor& t_norm) {
  if (x.dim() != 5 || x.size(1) != config_.in_channels) {
    throw std::invalid_argument("denoiser expects [B, " + std::to_string(config_.in_channels) +
                                ", D, H, W] input");
  }
  const int divisor = config_.required_divisor();
  for (int axis = 2; axis < 5; ++axis) {
    if (x.size(axis) % divisor != 0) {
      throw std::invalid_argument(
          "denoiser input extent " + std::to_string(x.size(axis)) + " on axis " +
          std::to_string(axis - 2) + " must be divisible by " + std::to_string(divisor) +
          " (2^(depth_levels-1))");
    }
  }

  auto emb = time_mlp2_->forward(torch::silu(time_mlp1_->forward(time_embedding(t_norm))));

  auto h = stem_->forward(x);
  std::vector<torch::Tensor> skips;
  int block_idx = 0;
  for (int level = 0; level < config_.depth_levels; ++level) {
    for (int b = 0; b < config_.res_blocks_per_level; ++b) {
      h = encoder_blocks_[block_idx++]->forward(h, emb);
    }
    if (encoder_attn_[level]) h = encoder_attn_[level]->forward(h);
    skips.push_back(h);
    if (level + 1 < config_.depth_levels) h = downsamples_[level]->forward(h);
  }

  h = mid_block1_->forward(h, emb);
  h = mid_block2_->forward(h, emb);

  block_idx = 0;
  int up_idx = 0;
  for (int level = config_.depth_levels - 1; level >= 0; --level) {
    if (level < config_.depth_levels - 1) {
      h = torch::nn::functional::interpolate(
          h, torch::nn::functional::InterpolateFuncOptions()
                 .scale_factor(std::vector<double>{2.0, 2.0, 2.0})
                 .mode(torch::kNearest));
      h = upsample_convs_[up_idx++]->forward(h);
    }
    auto skip = skips[level];
    if (config_.skip_mode == SkipMode::concatenation) {
      h = torch::cat({h, skip}, 1);
    } else {
      h = h + skip;
    }
    for (int b = 0; b < config_.res_blocks_per_level; ++b) {
      h = decoder_blocks_[block_idx++]->forward(h, emb);
    }
    const int attn_idx = config_.depth_levels - 1 - level;
    if (decoder_attn_[attn_idx]) h = decoder_attn_[attn_idx]->forward(h);
  }

  return out_conv_->forward(torch::silu(out_norm_->forward(h)));
}

DenoiserNet build_denoiser(const DenoiserConfig& config, uint64_t init_seed) {
  torch::manual_seed(init_seed);
  return DenoiserNet(config);
}

int64_t parameter_count(const DenoiserNet& net) {
  int64_t total = 0;
  for (const auto& p : net->parameters()) total += p.numel();
  return total;
}

torch::Tensor to_tensor(const WaveletCoefficients& coeffs) {
  auto t = torch::empty({1, coeffs.channels, coeffs.shape[0], coeffs.shape[1], coeffs.shape[2]},
                        torch::kFloat);
  std::memcpy(t.data_ptr<float>(), coeffs.data.data(), coeffs.data.size() * sizeof(float));
  return t;
}

WaveletCoefficients from_tensor(const torch::Tensor& tensor, const Shape3& shape) {
  auto t = tensor.contiguous();
  if (t.dim() == 5) t = t.squeeze(0);
  if (t.dim() != 4) throw std::invalid_argument("from_tensor: expected a 4D or 5D tensor");
  WaveletCoefficients out(t.size(0), shape);
  if (t.numel() != static_cast<int64_t>(out.data.size())) {
    throw std::invalid_argument("from_tensor: element count does not match target shape");
  }
  std::memcpy(out.data.data(), t.data_ptr<float>(), out.data.size() * sizeof(float));
  return out;
}

TorchDenoiser::TorchDenoiser(DenoiserNet net, int schedule_timesteps)
    : net_(std::move(net)), timesteps_(schedule_timesteps) {
  net_->eval();
}

WaveletCoefficients TorchDenoiser::predict(const WaveletCoefficients& stacked, int t) {
  if (t < 1 || t > timesteps_) {
    throw std::out_of_range("denoise timestep " + std::to_string(t) + " outside [1, " +
                            std::to_string(timesteps_) + "]");
  }
  torch::NoGradGuard no_grad;
  auto input = to_tensor(stacked);
  auto t_norm = torch::full({1}, double(t) / double(timesteps_), torch::kFloat);
  auto out = net_->forward(input, t_norm);
  return from_tensor(out, stacked.shape);
}

}  // namespace cwdm
