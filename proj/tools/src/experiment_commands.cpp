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

#include <memory>

#include "common.hpp"
#include "vqtk/error.hpp"

namespace vqtk::cli {
namespace {

struct SweepOptions {
  std::string sizes;
  std::string dims = "8";
  std::string input;
  std::string heldout;
  std::string method = "cluster";
  SweepConfig cfg;
  std::size_t batch_size = 0;
  std::string output;
};

Json report_json(const TokenizerReport& r) {
  Json j;
  j["usage_percent"] = r.usage_percent;
  j["quant_error"] = r.quant_error;
  j["frechet_recon"] = r.frechet_recon;
  j["perplexity"] = r.perplexity;
  j["frechet_generated"] = r.frechet_generated;
  return j;
}

void run_sweep_cmd(SweepOptions o, const Context& ctx) {
  o.cfg.sizes = parse_u32_list(o.sizes, "--sizes");
  o.cfg.build.method = parse_codebook_method(o.method);
  o.cfg.build.kmeans_batch =
      o.batch_size == 0 ? std::numeric_limits<std::size_t>::max() : o.batch_size;
  o.cfg.build.threads = ctx.global.threads;
  o.cfg.eval.threads = ctx.global.threads;

  std::vector<SweepRow> rows;
  if (o.input.empty()) {
    o.cfg.dims = parse_u32_list(o.dims, "--dims");
    rows = run_sweep(o.cfg, ctx.global.seed);
  } else {
    const auto train = read_feature_maps(o.input);
    const auto heldout =
        o.heldout.empty() ? std::vector<FeatureMap>{} : read_feature_maps(o.heldout);
    rows = run_sweep_on(train, heldout, o.cfg, ctx.global.seed);
  }
  const auto csv = sweep_csv(rows);
  if (o.output.empty()) {
    std::fputs(csv.c_str(), stdout);
    return;
  }
  write_text(o.output, csv);
  Json cells = Json::array();
  for (const auto& r : rows) {
    Json c = report_json(r.report);
    c["codebook_size"] = r.codebook_size;
    c["dim"] = r.dim;
    cells.push_back(std::move(c));
  }
  Json results;
  results["cells"] = cells;
  write_manifest(manifest_for_file(o.output), ctx, results);
  Json report;
  report["cells"] = rows.size();
  report["output"] = o.output;
  emit_report(ctx, report);
}

struct DemoOptions {
  DemoConfig cfg;
  std::uint32_t runs = 1;
  std::string output;
};

void run_demo_cmd(DemoOptions o, const Context& ctx) {
  o.cfg.eval.threads = ctx.global.threads;
  Json report;
  report["runs"] = o.runs;
  report["codebook_size"] = o.cfg.codebook_size;
  report["dim"] = o.cfg.world.dim;
  std::uint32_t ppl_wins = 0;
  std::uint32_t frechet_wins = 0;
  Json per_run = Json::object();
  for (std::uint32_t i = 0; i < o.runs; ++i) {
    const auto seed = ctx.global.seed + i;
    const auto r = run_demo(o.cfg, seed);
    ppl_wins += r.cluster_lower_ppl;
    frechet_wins += r.cluster_lower_frechet;
    Json run;
    run["seed"] = seed;
    run["cluster"] = report_json(r.cluster);
    run["random"] = report_json(r.random);
    run["cluster_lower_ppl"] = r.cluster_lower_ppl;
    run["cluster_lower_frechet"] = r.cluster_lower_frechet;
    per_run["run" + std::to_string(i)] = std::move(run);
  }
  report["ppl_wins"] = ppl_wins;
  report["frechet_wins"] = frechet_wins;
  for (auto& [k, v] : per_run.items()) report[k] = v;
  if (!o.output.empty()) {
    ensure_directory(o.output);
    write_text(fs::path(o.output) / (ctx.global.json ? "report.json" : "report.txt"),
               format_report(report, ctx.global.json));
    write_manifest(manifest_for_dir(o.output), ctx, report);
  }
  emit_report(ctx, report);
}

}  // namespace

void register_experiment_commands(CLI::App& app, Context& ctx) {
  {
    auto o = std::make_shared<SweepOptions>();
    auto* cmd = app.add_subcommand(
        "sweep", "Codebook size and dimension sweep; one CSV row per cell");
    cmd->add_option("--sizes", o->sizes, "Codebook sizes, e.g. 16,32,64")->required();
    cmd->add_option("--dims", o->dims, "Feature dims of the synthetic world");
    cmd->add_option("-i,--input", o->input,
                    "Sweep on these FMAPs instead of a synthetic world");
    cmd->add_option("--heldout", o->heldout, "Held-out FMAPs for perplexity (with -i)");
    cmd->add_option("--method", o->method, "cluster, vq-ema or random")
        ->check(CLI::IsMember({"cluster", "vq-ema", "random"}));
    cmd->add_option("--iters", o->cfg.build.kmeans_iters, "Maximum k-means iterations")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--batch-size", o->batch_size, "k-means mini-batch (0 = full batch)");
    cmd->add_option("--epochs", o->cfg.build.vq_epochs, "vq-ema epochs");
    cmd->add_option("--decay", o->cfg.build.vq_decay, "vq-ema decay");
    cmd->add_option("--order", o->cfg.eval.ngram_order, "n-gram order")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--alpha", o->cfg.eval.alpha, "n-gram smoothing");
    add_world_options(*cmd, o->cfg.world);
    cmd->add_option("-o,--output", o->output, "CSV output (default: stdout)");
    cmd->callback([o, &ctx] { run_sweep_cmd(*o, ctx); });
  }
  {
    auto o = std::make_shared<DemoOptions>();
    auto* cmd = app.add_subcommand(
        "demo", "Cluster codebook versus random codebook on a synthetic token world");
    cmd->add_option("--k,--size", o->cfg.codebook_size, "Codebook size")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--dim", o->cfg.world.dim, "Feature dim")->check(CLI::PositiveNumber);
    cmd->add_option("--order", o->cfg.eval.ngram_order, "n-gram order")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--alpha", o->cfg.eval.alpha, "n-gram smoothing");
    cmd->add_option("--iters", o->cfg.kmeans_iters, "Maximum k-means iterations")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--runs", o->runs, "Repeat with seeds seed .. seed + runs - 1")
        ->check(CLI::PositiveNumber);
    add_world_options(*cmd, o->cfg.world);
    cmd->add_option("-o,--output", o->output, "Directory for report and manifest");
    cmd->callback([o, &ctx] { run_demo_cmd(*o, ctx); });
  }
}

}  // namespace vqtk::cli
