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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vqtk/experiments.hpp"
#include "vqtk/fsq.hpp"
#include "vqtk/types.hpp"

namespace vqtk::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

/// Flags shared by every command.
struct GlobalOptions {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool json = false;
  std::string config;
};

/// What a command needs besides its own options.
struct Context {
  const CLI::App* app = nullptr;
  std::string command;
  std::vector<std::string> argv;
  GlobalOptions global;
};

/// Files with `extension` directly inside `path` (sorted by name), or `path`
/// itself when it is a regular file. Missing paths raise Io.
std::vector<fs::path> collect_inputs(const fs::path& path, std::string_view extension);

std::vector<FeatureMap> read_feature_maps(const fs::path& path);
std::vector<TokenGrid> read_token_grids(const fs::path& path);

/// Comma-separated unsigned integers; an empty list raises InvalidArgument.
std::vector<std::uint32_t> parse_u32_list(std::string_view text, std::string_view what);

/// Independent per-item seeds derived from the run seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Quantizer backend chosen by --quantizer plus its parameters.
struct Quantizer {
  std::string kind = "vq";
  std::string codebook;
  std::string levels;

  std::uint64_t vocab_size() const;
  QuantizeOutput quantize(const FeatureMap& map, unsigned threads) const;
  FeatureMap decode(const TokenGrid& grid) const;

 private:
  void load() const;
  mutable std::optional<Codebook> book_;
  mutable std::optional<FsqLevels> fsq_;
};

void add_quantizer_options(CLI::App& cmd, Quantizer& q);
void add_world_options(CLI::App& cmd, TokenWorldConfig& world);

/// Writes `report` to stdout as key=value lines, or as one JSON object when
/// --json is set. Nested objects are flattened with dotted keys.
void emit_report(const Context& ctx, const Json& report);
std::string format_report(const Json& report, bool json);

/// Manifest with the command line, the fully resolved configuration and the
/// command's results, enough to rerun the command exactly.
/// Global options plus those of the invoked command, as --config text.
std::string resolved_config(const Context& ctx);
Json make_manifest(const Context& ctx, const Json& results);
void write_manifest(const fs::path& path, const Context& ctx, const Json& results);

/// Manifest location for a file output (alongside it) or a directory output
/// (inside it).
fs::path manifest_for_file(const fs::path& output);
fs::path manifest_for_dir(const fs::path& output);

void ensure_directory(const fs::path& dir);
void write_text(const fs::path& path, std::string_view text);

Json trace_json(const std::vector<double>& values);

// Commands. Each returns the process exit status.
void register_build_commands(CLI::App& app, Context& ctx);
void register_eval_commands(CLI::App& app, Context& ctx);
void register_ngram_commands(CLI::App& app, Context& ctx);
void register_experiment_commands(CLI::App& app, Context& ctx);

}  // namespace vqtk::cli
