/* Copyright 2026 The vqtk Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "vqtk/experiments.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "vqtk/error.hpp"
#include "vqtk/metrics.hpp"
#include "vqtk/proposal.hpp"
#include "vqtk/vq.hpp"

namespace vqtk {
namespace {

// splitmix64 finalizer; gives independent sub-seeds for each stage.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

enum Stream : std::uint64_t {
  kWorld = 1,
  kBuild = 2,
  kRandomBook = 3,
  kEmbed = 4,
  kAmbient = 5,
  kSample = 16,
};

VectorSet decoded_vectors(const std::vector<QuantizeOutput>& outs) {
  VectorSet v;
  v.dim = outs.front().code_vectors.dim();
  for (const auto& o : outs) {
    const auto data = o.code_vectors.data();
    v.values.insert(v.values.end(), data.begin(), data.end());
  }
  return v;
}

}  // namespace

void TokenWorldConfig::validate() const {
  if (components == 0 || dim == 0 || maps == 0 || height == 0 || width == 0) {
    throw Error(ErrorCode::InvalidArgument,
                "token world needs positive components, dim, maps, height, width");
  }
  if (intrinsic_dim > dim) {
    throw Error(ErrorCode::InvalidArgument, "intrinsic_dim must not exceed dim");
  }
  if (!(cycle_prob >= 0.0 && cycle_prob <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "cycle_prob must lie in [0, 1]");
  }
  if (!(separation >= 0.0) || !(noise >= 0.0) || !(ambient_noise >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "world scales must be >= 0");
  }
}

TokenWorld generate_token_world(const TokenWorldConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  // Latent labels and noise, the embedding and the ambient noise use separate
  // streams, so worlds that differ only in dim share their latent content.
  std::mt19937_64 rng(derive_seed(seed, kWorld));
  std::mt19937_64 ambient_rng(derive_seed(seed, kAmbient));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const bool embedded = cfg.intrinsic_dim != 0 && cfg.intrinsic_dim < cfg.dim;
  const std::uint32_t r = embedded ? cfg.intrinsic_dim : cfg.dim;
  const std::uint32_t d = cfg.dim;

  Eigen::MatrixXd means(cfg.components, r);
  for (Eigen::Index i = 0; i < means.size(); ++i) means(i) = cfg.separation * gauss(rng);

  Eigen::MatrixXd embed = Eigen::MatrixXd::Identity(d, r);
  if (embedded) {
    std::mt19937_64 embed_rng(derive_seed(seed, kEmbed));
    Eigen::MatrixXd g(d, r);
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = gauss(embed_rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    embed = qr.householderQ() * Eigen::MatrixXd::Identity(d, r);
  }

  std::vector<float> mean_rows(std::size_t{cfg.components} * d);
  for (std::uint32_t c = 0; c < cfg.components; ++c) {
    const Eigen::VectorXd m = embed * means.row(c).transpose();
    for (std::uint32_t k = 0; k < d; ++k) mean_rows[c * d + k] = static_cast<float>(m[k]);
  }

  const std::size_t len = std::size_t{cfg.height} * cfg.width;
  auto make_map = [&](std::vector<std::uint32_t>& labels) {
    labels.resize(len);
    std::uniform_int_distribution<std::uint32_t> any(0, cfg.components - 1);
    labels[0] = any(rng);
    for (std::size_t i = 1; i < len; ++i) {
      const std::uint32_t next = (labels[i - 1] + 1) % cfg.components;
      if (cfg.components == 1 || unit(rng) < cfg.cycle_prob) {
        labels[i] = next;
      } else {
        std::uniform_int_distribution<std::uint32_t> other(0, cfg.components - 2);
        const auto o = other(rng);
        labels[i] = o >= next ? o + 1 : o;
      }
    }
    std::vector<float> values(len * d);
    Eigen::VectorXd latent(r);
    for (std::size_t i = 0; i < len; ++i) {
      for (std::uint32_t k = 0; k < r; ++k) {
        latent[k] = means(labels[i], k) + cfg.noise * gauss(rng);
      }
      const Eigen::VectorXd x = embed * latent;
      for (std::uint32_t k = 0; k < d; ++k) {
        const double extra = embedded ? cfg.ambient_noise * gauss(ambient_rng) : 0.0;
        values[i * d + k] = static_cast<float>(x[k] + extra);
      }
    }
    return FeatureMap(cfg.height, cfg.width, d, std::move(values));
  };

  TokenWorld world{{}, {}, {}, Codebook(cfg.components, d, std::move(mean_rows))};
  std::vector<std::uint32_t> labels;
  for (std::uint32_t m = 0; m < cfg.maps; ++m) {
    world.train.push_back(make_map(labels));
    world.train_labels.emplace_back(cfg.height, cfg.width, labels);
  }
  for (std::uint32_t m = 0; m < cfg.heldout_maps; ++m) {
    world.heldout.push_back(make_map(labels));
  }
  return world;
}

Codebook random_codebook(const VectorSet& data, std::uint32_t size,
                         std::uint64_t seed) {
  const std::size_t n = data.count();
  const std::size_t d = data.dim;
  if (n == 0) throw Error(ErrorCode::EmptyInput, "no vectors to fit a random codebook");
  if (size == 0) throw Error(ErrorCode::InvalidArgument, "codebook size must be >= 1");
  std::vector<double> mean(d, 0.0);
  std::vector<double> sq(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = data.row(i);
    for (std::size_t k = 0; k < d; ++k) mean[k] += x[k];
  }
  for (auto& m : mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = data.row(i);
    for (std::size_t k = 0; k < d; ++k) sq[k] += (x[k] - mean[k]) * (x[k] - mean[k]);
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<float> rows(std::size_t{size} * d);
  for (std::size_t c = 0; c < size; ++c) {
    for (std::size_t k = 0; k < d; ++k) {
      const double sd = std::sqrt(sq[k] / static_cast<double>(n));
      rows[c * d + k] = static_cast<float>(mean[k] + sd * gauss(rng));
    }
  }
  return Codebook(size, static_cast<std::uint32_t>(d), std::move(rows));
}

CodebookMethod parse_codebook_method(std::string_view text) {
  if (text == "cluster") return CodebookMethod::Cluster;
  if (text == "vq-ema") return CodebookMethod::VqEma;
  if (text == "random") return CodebookMethod::Random;
  throw Error(ErrorCode::InvalidArgument,
              "method must be cluster, vq-ema or random, got '" + std::string(text) + "'");
}

std::string_view to_string(CodebookMethod m) noexcept {
  switch (m) {
    case CodebookMethod::Cluster: return "cluster";
    case CodebookMethod::VqEma: return "vq-ema";
    case CodebookMethod::Random: return "random";
  }
  return "cluster";
}

TokenizerReport evaluate_tokenizer(const Codebook& book,
                                   const std::vector<FeatureMap>& train,
                                   const std::vector<FeatureMap>& heldout,
                                   const EvalConfig& cfg, std::uint64_t seed) {
  if (train.empty()) throw Error(ErrorCode::EmptyInput, "no training maps");
  const auto& scored = heldout.empty() ? train : heldout;

  std::vector<QuantizeOutput> train_q;
  std::vector<TokenGrid> train_tokens;
  double err_sum = 0.0;
  std::size_t positions = 0;
  for (const auto& m : train) {
    train_q.push_back(vq_quantize(m, book, cfg.threads));
    train_tokens.push_back(train_q.back().tokens);
    err_sum += train_q.back().quant_error * static_cast<double>(m.positions());
    positions += m.positions();
  }
  std::vector<TokenGrid> scored_tokens;
  for (const auto& m : scored) scored_tokens.push_back(vq_quantize(m, book, cfg.threads).tokens);

  TokenizerReport r;
  r.codebook_size = book.size();
  r.dim = book.dim();
  r.usage_percent = codebook_usage(train_tokens, book.size()).usage_percent;
  r.quant_error = err_sum / static_cast<double>(positions);

  const auto train_stats = gaussian_stats(train);
  r.frechet_recon = frechet_distance(train_stats, gaussian_stats(decoded_vectors(train_q)));

  const auto model = NgramModel::fit(train_tokens, cfg.ngram_order, book.size(), cfg.alpha);
  r.perplexity = perplexity(model, scored_tokens);

  VectorSet generated;
  generated.dim = book.dim();
  for (std::size_t m = 0; m < train.size(); ++m) {
    const auto seq = ngram_sample(model, train[m].positions(), derive_seed(seed, kSample + m));
    for (auto code : seq) {
      const auto row = book.row(code);
      generated.values.insert(generated.values.end(), row.begin(), row.end());
    }
  }
  r.frechet_generated =
      frechet_distance(gaussian_stats(scored), gaussian_stats(generated));
  return r;
}

Codebook build_codebook(const std::vector<FeatureMap>& train, std::uint32_t size,
                        const BuildConfig& cfg, std::uint64_t seed) {
  switch (cfg.method) {
    case CodebookMethod::Cluster: {
      KMeansConfig km;
      km.k = size;
      km.max_iters = cfg.kmeans_iters;
      km.batch_size = cfg.kmeans_batch;
      km.tol = cfg.kmeans_tol;
      km.seed = derive_seed(seed, kBuild);
      km.threads = cfg.threads;
      return build_cluster_tokenizer(train, km);
    }
    case CodebookMethod::Random:
      return random_codebook(pool_vectors(train), size, derive_seed(seed, kRandomBook));
    case CodebookMethod::VqEma: {
      const auto init = random_codebook(pool_vectors(train), size,
                                        derive_seed(seed, kRandomBook));
      VqTrainConfig vc;
      vc.ema_decay = cfg.vq_decay;
      vc.dead_code_threshold = cfg.vq_dead_threshold;
      vc.reinit_seed = derive_seed(seed, kBuild);
      vc.epochs = cfg.vq_epochs;
      vc.batch_size = std::numeric_limits<std::size_t>::max();
      vc.threads = cfg.threads;
      return train_codebook(train, init, vc).codebook;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown codebook method");
}

DemoResult run_demo(const DemoConfig& cfg, std::uint64_t seed) {
  const auto world = generate_token_world(cfg.world, seed);
  BuildConfig build;
  build.method = CodebookMethod::Cluster;
  build.kmeans_iters = cfg.kmeans_iters;
  build.threads = cfg.eval.threads;
  const auto cluster_book = build_codebook(world.train, cfg.codebook_size, build, seed);
  build.method = CodebookMethod::Random;
  const auto random_book = build_codebook(world.train, cfg.codebook_size, build, seed);

  DemoResult out;
  out.cluster = evaluate_tokenizer(cluster_book, world.train, world.heldout, cfg.eval, seed);
  out.random = evaluate_tokenizer(random_book, world.train, world.heldout, cfg.eval, seed);
  out.cluster_lower_ppl = out.cluster.perplexity < out.random.perplexity;
  out.cluster_lower_frechet = out.cluster.frechet_generated < out.random.frechet_generated;
  return out;
}

std::vector<SweepRow> run_sweep_on(const std::vector<FeatureMap>& train,
                                   const std::vector<FeatureMap>& heldout,
                                   const SweepConfig& cfg, std::uint64_t seed) {
  if (cfg.sizes.empty()) throw Error(ErrorCode::InvalidArgument, "empty codebook size grid");
  std::vector<SweepRow> rows;
  for (auto size : cfg.sizes) {
    const auto book = build_codebook(train, size, cfg.build, seed);
    rows.push_back(SweepRow{size, book.dim(),
                            evaluate_tokenizer(book, train, heldout, cfg.eval, seed)});
  }
  return rows;
}

std::vector<SweepRow> run_sweep(const SweepConfig& cfg, std::uint64_t seed) {
  if (cfg.sizes.empty() || cfg.dims.empty()) {
    throw Error(ErrorCode::InvalidArgument, "empty sweep grid");
  }
  std::vector<SweepRow> rows;
  for (auto dim : cfg.dims) {
    auto world_cfg = cfg.world;
    world_cfg.dim = dim;
    const auto world = generate_token_world(world_cfg, seed);
    auto part = run_sweep_on(world.train, world.heldout, cfg, seed);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "codebook_size,dim,usage_percent,quant_error,frechet_recon,perplexity\n";
  char line[256];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%u,%u,%.6f,%.9g,%.9g,%.9g\n", r.codebook_size,
                  r.dim, r.report.usage_percent, r.report.quant_error,
                  r.report.frechet_recon, r.report.perplexity);
    out += line;
  }
  return out;
}

}  // namespace vqtk
