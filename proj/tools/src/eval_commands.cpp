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

#include <charconv>
#include <fstream>
#include <limits>
#include <memory>

#include "common.hpp"
#include "vqtk/error.hpp"
#include "vqtk/io.hpp"
#include "vqtk/kd.hpp"
#include "vqtk/metrics.hpp"
#include "vqtk/parallel.hpp"
#include "vqtk/proposal.hpp"

namespace vqtk::cli {
namespace {

struct EvalOptions {
  std::string tokens;
  std::uint64_t vocab = 0;
  Quantizer quantizer;
  std::string model = "uniform";
  std::string ngram;
  std::string a;
  std::string b;
  std::string input;
  std::string probs;
  std::string recon;
  std::string teacher;
  std::string cosine_mode = "per-position";
  std::string output;
};

void finish(const EvalOptions& o, const Context& ctx, const Json& report) {
  if (!o.output.empty()) {
    write_text(o.output, format_report(report, ctx.global.json));
    write_manifest(manifest_for_file(o.output), ctx, report);
  }
  emit_report(ctx, report);
}

std::uint64_t resolve_vocab(const EvalOptions& o) {
  if (o.vocab != 0) return o.vocab;
  if (!o.quantizer.codebook.empty() || !o.quantizer.levels.empty()) {
    return o.quantizer.vocab_size();
  }
  throw Error(ErrorCode::InvalidArgument, "--vocab (or --codebook / --levels) is required");
}

void run_usage(const EvalOptions& o, const Context& ctx) {
  const auto grids = read_token_grids(o.tokens);
  const auto usage = codebook_usage(grids, resolve_vocab(o));
  Json report;
  report["used"] = usage.used;
  report["total"] = usage.total;
  report["usage_percent"] = usage.usage_percent;
  finish(o, ctx, report);
}

void run_ppl(const EvalOptions& o, const Context& ctx) {
  const auto grids = read_token_grids(o.tokens);
  std::unique_ptr<ProposalModel> model;
  if (o.model == "uniform") {
    const auto vocab = resolve_vocab(o);
    if (vocab > std::numeric_limits<std::uint32_t>::max()) {
      throw Error(ErrorCode::InvalidArgument, "--vocab exceeds 2^32 - 1");
    }
    model = std::make_unique<UniformModel>(static_cast<std::uint32_t>(vocab));
  } else {
    if (o.ngram.empty()) throw Error(ErrorCode::InvalidArgument, "--ngram is required");
    model = std::make_unique<NgramModel>(read_ngram(o.ngram));
  }
  std::size_t tokens = 0;
  for (const auto& g : grids) {
    g.validate(model->vocab_size());
    tokens += g.length();
  }
  Json report;
  report["model"] = o.model;
  report["vocab"] = model->vocab_size();
  report["tokens"] = tokens;
  report["perplexity"] = perplexity(*model, grids);
  finish(o, ctx, report);
}

Json frechet_report(const std::vector<FeatureMap>& a, const std::vector<FeatureMap>& b,
                    const char* key) {
  const auto sa = gaussian_stats(a);
  const auto sb = gaussian_stats(b);
  const auto t = frechet_terms(sa, sb);
  Json report;
  report["metric"] = "Frechet distance (feature space)";
  report[key] = t.distance;
  report["mean_term"] = t.mean_term;
  report["trace_term"] = t.trace_term;
  report["sqrt_iterations"] = t.sqrt_product.iterations;
  report["sqrt_residual"] = t.sqrt_product.relative_residual;
  report["count_a"] = sa.count;
  report["count_b"] = sb.count;
  return report;
}

void run_frechet(const EvalOptions& o, const Context& ctx) {
  finish(o, ctx, frechet_report(read_feature_maps(o.a), read_feature_maps(o.b), "frechet"));
}

void run_rfid(const EvalOptions& o, const Context& ctx) {
  const auto originals = read_feature_maps(o.input);
  std::vector<FeatureMap> recon;
  for (const auto& m : originals) {
    recon.push_back(o.quantizer.quantize(m, ctx.global.threads).code_vectors);
  }
  auto report = frechet_report(originals, recon, "rfid");
  report["quantizer"] = o.quantizer.kind;
  finish(o, ctx, report);
}

ProbMatrix read_prob_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::size_t n = 0;
    std::size_t start = 0;
    while (start <= line.size()) {
      auto end = line.find(',', start);
      if (end == std::string::npos) end = line.size();
      std::string_view cell(line.data() + start, end - start);
      while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
      while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw Error(ErrorCode::InvalidShape, path.string() + ":" + std::to_string(lineno) +
                                                 ": not a number: '" + std::string(cell) +
                                                 "'");
      }
      values.push_back(v);
      ++n;
      start = end + 1;
    }
    if (rows == 0) cols = n;
    if (n != cols) {
      throw Error(ErrorCode::ShapeMismatch, path.string() + ":" + std::to_string(lineno) +
                                                ": expected " + std::to_string(cols) +
                                                " columns");
    }
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::EmptyInput, "no rows in " + path.string());
  return ProbMatrix(rows, cols, std::move(values));
}

void run_is(const EvalOptions& o, const Context& ctx) {
  const auto probs = read_prob_csv(o.probs);
  Json report;
  report["samples"] = probs.rows();
  report["classes"] = probs.cols();
  report["inception_score"] = inception_score(probs);
  finish(o, ctx, report);
}

void run_kd(const EvalOptions& o, const Context& ctx) {
  const auto recon = read_feature_maps(o.recon);
  const auto teacher = read_feature_maps(o.teacher);
  if (recon.size() != teacher.size()) {
    throw Error(ErrorCode::ShapeMismatch, "reconstruction and teacher map counts differ");
  }
  const auto mode = parse_cosine_mode(o.cosine_mode);
  CompensatedSum total;
  for (std::size_t i = 0; i < recon.size(); ++i) total.add(kd_loss(recon[i], teacher[i], mode));
  Json report;
  report["cosine_mode"] = o.cosine_mode;
  report["maps"] = recon.size();
  report["kd_loss"] = total.value() / static_cast<double>(recon.size());
  finish(o, ctx, report);
}

struct NgramOptions {
  std::string tokens;
  std::uint32_t order = 2;
  double alpha = 1.0;
  std::uint32_t vocab = 0;
  std::string model;
  std::string output;
  std::uint32_t count = 1;
  std::uint32_t height = 16;
  std::uint32_t width = 16;
};

void run_ngram_fit(const NgramOptions& o, const Context& ctx) {
  const auto grids = read_token_grids(o.tokens);
  const auto model = NgramModel::fit(grids, o.order, o.vocab, o.alpha);
  write_ngram(model, o.output);
  std::uint64_t entries = 0;
  for (const auto& [ctx_key, counts] : model.table()) entries += counts.next.size();
  Json report;
  report["order"] = o.order;
  report["vocab"] = o.vocab;
  report["alpha"] = o.alpha;
  report["sequences"] = grids.size();
  report["contexts"] = model.table().size();
  report["entries"] = entries;
  report["output"] = o.output;
  write_manifest(manifest_for_file(o.output), ctx, report);
  emit_report(ctx, report);
}

void run_ngram_sample(const NgramOptions& o, const Context& ctx) {
  const auto model = read_ngram(o.model);
  ensure_directory(o.output);
  const std::size_t len = std::size_t{o.height} * o.width;
  std::vector<TokenGrid> grids;
  for (std::uint32_t i = 0; i < o.count; ++i) {
    TokenGrid grid(o.height, o.width, ngram_sample(model, len, mix_seed(ctx.global.seed, i)));
    char name[32];
    std::snprintf(name, sizeof(name), "sample_%06u.tokg", i);
    write_token_grid(grid, fs::path(o.output) / name);
    grids.push_back(std::move(grid));
  }
  const auto usage = codebook_usage(grids, model.vocab_size());
  Json report;
  report["samples"] = o.count;
  report["height"] = o.height;
  report["width"] = o.width;
  report["used"] = usage.used;
  report["usage_percent"] = usage.usage_percent;
  write_manifest(manifest_for_dir(o.output), ctx, report);
  emit_report(ctx, report);
}

void run_ngram_score(const NgramOptions& o, const Context& ctx) {
  const auto model = read_ngram(o.model);
  const auto grids = read_token_grids(o.tokens);
  CompensatedSum total;
  std::size_t tokens = 0;
  for (const auto& g : grids) {
    g.validate(model.vocab_size());
    total.add(sequence_log_prob(model, g.codes()));
    tokens += g.length();
  }
  Json report;
  report["sequences"] = grids.size();
  report["tokens"] = tokens;
  report["log_prob"] = total.value();
  report["perplexity"] = perplexity(model, grids);
  if (!o.output.empty()) {
    write_text(o.output, format_report(report, ctx.global.json));
    write_manifest(manifest_for_file(o.output), ctx, report);
  }
  emit_report(ctx, report);
}

}  // namespace

void register_eval_commands(CLI::App& app, Context& ctx) {
  auto* eval = app.add_subcommand("eval", "Compute a metric report");
  eval->require_subcommand(1);
  auto o = std::make_shared<EvalOptions>();
  auto add_output = [&](CLI::App* cmd) {
    cmd->add_option("-o,--output", o->output, "Also write the report to this file");
  };
  {
    auto* cmd = eval->add_subcommand("usage", "Fraction of codes used by a token corpus");
    cmd->add_option("-t,--tokens", o->tokens, "TOKG file or directory")->required();
    cmd->add_option("--vocab", o->vocab, "Vocabulary size");
    add_quantizer_options(*cmd, o->quantizer);
    add_output(cmd);
    cmd->callback([o, &ctx] { run_usage(*o, ctx); });
  }
  {
    auto* cmd = eval->add_subcommand("ppl", "Perplexity of a token corpus");
    cmd->add_option("-t,--tokens", o->tokens, "TOKG file or directory")->required();
    cmd->add_option("--model", o->model, "uniform or ngram")
        ->check(CLI::IsMember({"uniform", "ngram"}));
    cmd->add_option("--vocab", o->vocab, "Vocabulary size (uniform model)");
    cmd->add_option("--ngram", o->ngram, "NGRM model file (ngram model)");
    add_output(cmd);
    cmd->callback([o, &ctx] { run_ppl(*o, ctx); });
  }
  {
    auto* cmd = eval->add_subcommand("frechet", "Frechet distance between feature sets");
    cmd->add_option("-a", o->a, "First FMAP file or directory")->required();
    cmd->add_option("-b", o->b, "Second FMAP file or directory")->required();
    add_output(cmd);
    cmd->callback([o, &ctx] { run_frechet(*o, ctx); });
  }
  {
    auto* cmd = eval->add_subcommand(
        "rfid", "Frechet distance between features and their reconstructions");
    cmd->add_option("-i,--input", o->input, "FMAP file or directory")->required();
    add_quantizer_options(*cmd, o->quantizer);
    add_output(cmd);
    cmd->callback([o, &ctx] { run_rfid(*o, ctx); });
  }
  {
    auto* cmd = eval->add_subcommand("is", "Inception-score style diversity of class probabilities");
    cmd->add_option("--probs", o->probs, "CSV, one probability row per sample")->required();
    add_output(cmd);
    cmd->callback([o, &ctx] { run_is(*o, ctx); });
  }
  {
    auto* cmd = eval->add_subcommand(
        "kd", "Negative cosine between reconstructed and teacher features, mean over maps");
    cmd->add_option("-r,--recon", o->recon, "Reconstruction FMAP file or directory")
        ->required();
    cmd->add_option("--teacher", o->teacher, "Teacher FMAP file or directory")->required();
    cmd->add_option("--cosine-mode", o->cosine_mode, "per-position or flat")
        ->check(CLI::IsMember({"per-position", "flat"}));
    add_output(cmd);
    cmd->callback([o, &ctx] { run_kd(*o, ctx); });
  }
}

void register_ngram_commands(CLI::App& app, Context& ctx) {
  auto* ngram = app.add_subcommand("ngram", "Fit, sample and score n-gram proposal models");
  ngram->require_subcommand(1);
  auto o = std::make_shared<NgramOptions>();
  {
    auto* cmd = ngram->add_subcommand("fit", "Fit an add-alpha n-gram on token grids");
    cmd->add_option("-t,--tokens", o->tokens, "TOKG file or directory")->required();
    cmd->add_option("--order", o->order, "n-gram order")->check(CLI::PositiveNumber);
    cmd->add_option("--alpha", o->alpha, "Add-alpha smoothing (> 0)");
    cmd->add_option("--vocab", o->vocab, "Vocabulary size")
        ->required()
        ->check(CLI::PositiveNumber);
    cmd->add_option("-o,--output", o->output, "NGRM output file")->required();
    cmd->callback([o, &ctx] { run_ngram_fit(*o, ctx); });
  }
  {
    auto* cmd = ngram->add_subcommand("sample", "Sample token grids");
    cmd->add_option("--model", o->model, "NGRM model file")->required();
    cmd->add_option("--count", o->count, "Number of grids")->check(CLI::PositiveNumber);
    cmd->add_option("--height", o->height, "Grid height")->check(CLI::PositiveNumber);
    cmd->add_option("--width", o->width, "Grid width")->check(CLI::PositiveNumber);
    cmd->add_option("-o,--output", o->output, "Output directory")->required();
    cmd->callback([o, &ctx] { run_ngram_sample(*o, ctx); });
  }
  {
    auto* cmd = ngram->add_subcommand("score", "Log-likelihood and perplexity of a corpus");
    cmd->add_option("--model", o->model, "NGRM model file")->required();
    cmd->add_option("-t,--tokens", o->tokens, "TOKG file or directory")->required();
    cmd->add_option("-o,--output", o->output, "Also write the report to this file");
    cmd->callback([o, &ctx] { run_ngram_score(*o, ctx); });
  }
}

}  // namespace vqtk::cli
