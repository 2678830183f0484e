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

#include <limits>
#include <memory>

#include "common.hpp"
#include "vqtk/cluster.hpp"
#include "vqtk/error.hpp"
#include "vqtk/io.hpp"
#include "vqtk/metrics.hpp"
#include "vqtk/vq.hpp"

namespace vqtk::cli {
namespace {

struct BuildOptions {
  std::string method = "cluster";
  std::uint32_t k = 0;
  std::string input;
  std::string output;
  bool normalize = false;
  std::uint32_t iters = 100;
  std::size_t batch_size = 0;
  double tol = 1e-4;
  bool reinit_empty = true;
  std::uint32_t epochs = 10;
  double decay = 0.99;
  std::uint32_t dead_threshold = 0;
  std::size_t vq_batch = 4096;
};

void run_build(const BuildOptions& o, const Context& ctx) {
  const auto maps = read_feature_maps(o.input);
  Json results;
  results["method"] = o.method;
  results["k"] = o.k;
  results["seed"] = ctx.global.seed;
  results["maps"] = maps.size();

  std::optional<Codebook> book;
  if (o.method == "cluster") {
    KMeansConfig cfg;
    cfg.k = o.k;
    cfg.max_iters = o.iters;
    cfg.batch_size = o.batch_size == 0 ? std::numeric_limits<std::size_t>::max()
                                       : o.batch_size;
    cfg.seed = ctx.global.seed;
    cfg.tol = o.tol;
    cfg.reinit_empty = o.reinit_empty;
    cfg.normalize = o.normalize;
    cfg.threads = ctx.global.threads;
    auto fit = kmeans_fit(std::span<const FeatureMap>(maps), cfg);
    results["iterations"] = fit.iterations;
    results["converged"] = fit.converged;
    results["reinitialized"] = fit.reinitialized;
    results["inertia_trace"] = trace_json(fit.inertia_trace);
    book = std::move(fit.centroids);
  } else {
    if (o.normalize) {
      throw Error(ErrorCode::InvalidArgument, "--normalize applies to --method cluster");
    }
    VqTrainConfig cfg;
    cfg.ema_decay = o.decay;
    cfg.dead_code_threshold = o.dead_threshold;
    cfg.reinit_seed = mix_seed(ctx.global.seed, 1);
    cfg.epochs = o.epochs;
    cfg.batch_size = o.vq_batch;
    cfg.threads = ctx.global.threads;
    const auto init = random_codebook(pool_vectors(maps), o.k, mix_seed(ctx.global.seed, 0));
    auto fit = train_codebook(maps, init, cfg);
    results["quant_error_trace"] = trace_json(fit.quant_error_trace);
    results["usage_trace"] = fit.usage_trace;
    results["reinit_trace"] = fit.reinit_trace;
    book = std::move(fit.codebook);
  }
  results["dim"] = book->dim();

  write_codebook(*book, o.output);
  write_manifest(manifest_for_file(o.output), ctx, results);

  Json report;
  report["method"] = o.method;
  report["k"] = book->size();
  report["dim"] = book->dim();
  if (results.contains("inertia_trace") && !results["inertia_trace"].empty()) {
    report["inertia"] = results["inertia_trace"].back();
    report["iterations"] = results["iterations"];
  }
  if (results.contains("quant_error_trace") && !results["quant_error_trace"].empty()) {
    report["quant_error"] = results["quant_error_trace"].back();
  }
  report["output"] = o.output;
  emit_report(ctx, report);
}

struct TokenizeOptions {
  Quantizer quantizer;
  std::string input;
  std::string output;
};

void run_tokenize(const TokenizeOptions& o, const Context& ctx) {
  const auto inputs = collect_inputs(o.input, ".fmap");
  ensure_directory(o.output);
  std::vector<TokenGrid> grids;
  double err_sum = 0.0;
  std::size_t positions = 0;
  for (const auto& path : inputs) {
    const auto map = read_feature_map(path);
    auto q = o.quantizer.quantize(map, ctx.global.threads);
    write_token_grid(q.tokens, fs::path(o.output) / path.stem().concat(".tokg"));
    err_sum += q.quant_error * static_cast<double>(map.positions());
    positions += map.positions();
    grids.push_back(std::move(q.tokens));
  }
  const auto usage = codebook_usage(grids, o.quantizer.vocab_size());
  Json report;
  report["quantizer"] = o.quantizer.kind;
  report["files"] = inputs.size();
  report["positions"] = positions;
  report["vocab"] = usage.total;
  report["used"] = usage.used;
  report["usage_percent"] = usage.usage_percent;
  report["quant_error"] = err_sum / static_cast<double>(positions);
  write_manifest(manifest_for_dir(o.output), ctx, report);
  emit_report(ctx, report);
}

struct DetokenizeOptions {
  Quantizer quantizer;
  std::string input;
  std::string output;
};

void run_detokenize(const DetokenizeOptions& o, const Context& ctx) {
  const auto inputs = collect_inputs(o.input, ".tokg");
  ensure_directory(o.output);
  std::size_t positions = 0;
  for (const auto& path : inputs) {
    const auto map = o.quantizer.decode(read_token_grid(path));
    write_feature_map(map, fs::path(o.output) / path.stem().concat(".fmap"));
    positions += map.positions();
  }
  Json report;
  report["quantizer"] = o.quantizer.kind;
  report["files"] = inputs.size();
  report["positions"] = positions;
  write_manifest(manifest_for_dir(o.output), ctx, report);
  emit_report(ctx, report);
}

struct ProjectOptions {
  std::string codebook;
  std::string tokens;
  std::string output;
};

void run_project(const ProjectOptions& o, const Context& ctx) {
  const auto book = read_codebook(o.codebook);
  std::vector<std::uint64_t> usage;
  if (!o.tokens.empty()) usage = code_histogram(read_token_grids(o.tokens), book.size());
  const auto proj = o.tokens.empty()
                        ? export_codebook_projection(book)
                        : export_codebook_projection(book, std::span<const std::uint64_t>(usage));
  const auto csv = projection_csv(proj);
  if (o.output.empty()) {
    std::fputs(csv.c_str(), stdout);
    return;
  }
  write_text(o.output, csv);
  Json report;
  report["codes"] = book.size();
  report["dim"] = book.dim();
  report["eigenvalue_1"] = proj.eigenvalues.at(0);
  report["eigenvalue_2"] = proj.eigenvalues.at(1);
  report["variance_share"] = proj.variance_share;
  report["output"] = o.output;
  write_manifest(manifest_for_file(o.output), ctx, report);
  emit_report(ctx, report);
}

}  // namespace

void register_build_commands(CLI::App& app, Context& ctx) {
  {
    auto o = std::make_shared<BuildOptions>();
    auto* cmd = app.add_subcommand("build-codebook", "Fit a codebook to feature maps");
    cmd->add_option("--method", o->method, "cluster (k-means) or vq-ema")
        ->check(CLI::IsMember({"cluster", "vq-ema"}));
    cmd->add_option("--k,--size", o->k, "Codebook size")
        ->required()
        ->check(CLI::Range(1u, std::numeric_limits<std::uint32_t>::max()));
    cmd->add_option("-i,--input", o->input, "FMAP file or directory")->required();
    cmd->add_option("-o,--output", o->output, "CBOK output file")->required();
    cmd->add_flag("--normalize", o->normalize, "L2-normalize vectors before clustering");
    cmd->add_option("--iters", o->iters, "Maximum k-means iterations")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--batch-size", o->batch_size, "Mini-batch size (0 = full batch)");
    cmd->add_option("--tol", o->tol, "Relative inertia change that stops k-means");
    cmd->add_option("--reinit-empty", o->reinit_empty, "Reseed empty clusters");
    cmd->add_option("--epochs", o->epochs, "vq-ema epochs");
    cmd->add_option("--decay", o->decay, "vq-ema decay");
    cmd->add_option("--dead-threshold", o->dead_threshold,
                    "vq-ema: reinitialize codes used fewer times per epoch (0 = off)");
    cmd->add_option("--vq-batch", o->vq_batch, "vq-ema vectors per batch")
        ->check(CLI::PositiveNumber);
    cmd->callback([o, &ctx] { run_build(*o, ctx); });
  }
  {
    auto o = std::make_shared<TokenizeOptions>();
    auto* cmd = app.add_subcommand("tokenize", "Quantize feature maps into token grids");
    add_quantizer_options(*cmd, o->quantizer);
    cmd->add_option("-i,--input", o->input, "FMAP file or directory")->required();
    cmd->add_option("-o,--output", o->output, "Output directory for TOKG files")
        ->required();
    cmd->callback([o, &ctx] { run_tokenize(*o, ctx); });
  }
  {
    auto o = std::make_shared<DetokenizeOptions>();
    auto* cmd = app.add_subcommand("detokenize", "Map token grids back to code vectors");
    add_quantizer_options(*cmd, o->quantizer);
    cmd->add_option("-i,-t,--input", o->input, "TOKG file or directory")->required();
    cmd->add_option("-o,--output", o->output, "Output directory for FMAP files")
        ->required();
    cmd->callback([o, &ctx] { run_detokenize(*o, ctx); });
  }
  {
    auto o = std::make_shared<ProjectOptions>();
    auto* cmd = app.add_subcommand("project-codebook",
                                   "Export a 2-D PCA projection of codebook rows");
    cmd->add_option("--codebook", o->codebook, "CBOK codebook")->required();
    cmd->add_option("-t,--tokens", o->tokens, "TOKG corpus for per-code usage counts");
    cmd->add_option("-o,--output", o->output, "CSV output (default: stdout)");
    cmd->callback([o, &ctx] { run_project(*o, ctx); });
  }
}

}  // namespace vqtk::cli
