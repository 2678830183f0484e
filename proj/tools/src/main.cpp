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

#include <cstdio>
#include <exception>

#include "common.hpp"
#include "vqtk/error.hpp"

int main(int argc, char** argv) {
  using namespace vqtk::cli;

  CLI::App app{"vqtk: codebooks, tokenizers, proposal models and metrics", "vqtk"};
  app.option_defaults()->always_capture_default();
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", "vqtk 0.1.0");

  Context ctx;
  ctx.app = &app;
  ctx.argv.assign(argv, argv + argc);
  app.add_option("--seed", ctx.global.seed, "Seed for every random choice");
  app.add_option("--threads", ctx.global.threads, "Worker cap; results do not depend on it")
      ->check(CLI::PositiveNumber);
  app.add_flag("--json", ctx.global.json, "Print reports as one JSON object");
  app.set_config("--config", "", "TOML-style key=value config file; flags override it")
      ->each([&ctx](const std::string& path) { ctx.global.config = path; });

  register_build_commands(app, ctx);
  register_eval_commands(app, ctx);
  register_ngram_commands(app, ctx);
  register_experiment_commands(app, ctx);

  app.parse_complete_callback([&app, &ctx] {
    for (const auto* sub = &app; !sub->get_subcommands().empty();) {
      sub = sub->get_subcommands().front();
      ctx.command += (ctx.command.empty() ? "" : " ") + sub->get_name();
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return vqtk::kExitUsage;
  } catch (const vqtk::Error& e) {
    std::fprintf(stderr, "vqtk: error: %s\n", e.what());
    return vqtk::exit_status_for(e.category());
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "vqtk: error: Io: %s\n", e.what());
    return vqtk::kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "vqtk: internal error: %s\n", e.what());
    return 1;
  }
  return vqtk::kExitOk;
}
