// Copyright (c) 2026 cwdm-cpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

#include "cwdm/denoiser_config.hpp"
#include "cwdm/sampler.hpp"
#include "cwdm/volume.hpp"

namespace cwdm {

// Time-conditioned 3D U-Net predicting clean subband coefficients from the
// 32-channel noisy+condition stack. The backbone is deliberately plain:
// residual blocks with group norm and SiLU, timestep embedding added into
// every block, strided-conv downsampling, nearest-neighbour upsampling, and
// either concatenation or additive skips.

class ResBlock3dImpl : public torch::nn::Module {
 public:
  ResBlock3dImpl(int in_channels, int out_channels, int time_dim);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& time_emb);

 private:
  torch::nn::GroupNorm norm1_{nullptr}, norm2_{nullptr};
  torch::nn::Conv3d conv1_{nullptr}, conv2_{nullptr};
  torch::nn::Linear time_proj_{nullptr};
  torch::nn::Conv3d shortcut_{nullptr};  // null when channels match
};
TORCH_MODULE(ResBlock3d);

/// Single-head self-attention over flattened spatial positions.
class SelfAttention3dImpl : public torch::nn::Module {
 public:
  explicit SelfAttention3dImpl(int channels);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::GroupNorm norm_{nullptr};
  torch::nn::Conv3d qkv_{nullptr}, proj_{nullptr};
  int channels_;
};
TORCH_MODULE(SelfAttention3d);

class DenoiserNetImpl : public torch::nn::Module {
 public:
  explicit DenoiserNetImpl(DenoiserConfig config);

  /// x: [B, in_channels, D, H, W]; t_norm: [B] timesteps scaled to (0, 1].
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& t_norm);

  const DenoiserConfig& config() const { return config_; }

 private:
  torch::Tensor time_embedding(const torch::Tensor& t_norm) const;

  DenoiserConfig config_;
  torch::nn::Linear time_mlp1_{nullptr}, time_mlp2_{nullptr};
  torch::nn::Conv3d stem_{nullptr};
  std::vector<ResBlock3d> encoder_blocks_;
  std::vector<SelfAttention3d> encoder_attn_;  // one slot per level, may be null
  std::vector<torch::nn::Conv3d> downsamples_;
  ResBlock3d mid_block1_{nullptr}, mid_block2_{nullptr};
  std::vector<torch::nn::Conv3d> upsample_convs_;
  std::vector<ResBlock3d> decoder_blocks_;
  std::vector<SelfAttention3d> decoder_attn_;
  torch::nn::GroupNorm out_norm_{nullptr};
  torch::nn::Conv3d out_conv_{nullptr};
};
TORCH_MODULE(DenoiserNet);

/// Builds a network with deterministic initialization: the same config and
/// seed always produce bit-identical parameters.
DenoiserNet build_denoiser(const DenoiserConfig& config, uint64_t init_seed);

int64_t parameter_count(const DenoiserNet& net);

/// Adapts a trained network to the sampling loop's interface, converting
/// between coefficient stacks and tensors at the boundary. Inference only;
/// weights are treated as read-only, so one instance may serve many threads.
class TorchDenoiser : public DenoiseModel {
 public:
  TorchDenoiser(DenoiserNet net, int schedule_timesteps);

  WaveletCoefficients predict(const WaveletCoefficients& stacked, int t) override;

  DenoiserNet& net() { return net_; }

 private:
  DenoiserNet net_;
  int timesteps_;
};

/// [B, C, D, H, W] tensor view of a coefficient stack (copies).
torch::Tensor to_tensor(const WaveletCoefficients& coeffs);
WaveletCoefficients from_tensor(const torch::Tensor& tensor, const Shape3& shape);

}  // namespace cwdm
