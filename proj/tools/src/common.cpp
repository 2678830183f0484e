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

#include "common.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "vqtk/error.hpp"
#include "vqtk/io.hpp"
#include "vqtk/vq.hpp"

namespace vqtk::cli {

std::vector<fs::path> collect_inputs(const fs::path& path, std::string_view extension) {
  std::error_code ec;
  const auto status = fs::status(path, ec);
  if (ec || !fs::exists(status)) {
    throw Error(ErrorCode::Io, "no such file or directory: " + path.string());
  }
  if (!fs::is_directory(status)) return {path};
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (entry.is_regular_file() && entry.path().extension() == extension) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) {
    throw Error(ErrorCode::EmptyInput,
                "no " + std::string(extension) + " files in " + path.string());
  }
  return out;
}

std::vector<FeatureMap> read_feature_maps(const fs::path& path) {
  std::vector<FeatureMap> maps;
  for (const auto& p : collect_inputs(path, ".fmap")) maps.push_back(read_feature_map(p));
  return maps;
}

std::vector<TokenGrid> read_token_grids(const fs::path& path) {
  std::vector<TokenGrid> grids;
  for (const auto& p : collect_inputs(path, ".tokg")) grids.push_back(read_token_grid(p));
  return grids;
}

std::vector<std::uint32_t> parse_u32_list(std::string_view text, std::string_view what) {
  std::vector<std::uint32_t> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    const auto item = text.substr(start, end - start);
    std::uint32_t v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size() || v == 0) {
      throw Error(ErrorCode::InvalidArgument,
                  std::string(what) + " must be a comma-separated list of positive "
                  "integers, got '" + std::string(text) + "'");
    }
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

void Quantizer::load() const {
  if (kind == "vq") {
    if (book_) return;
    if (codebook.empty()) {
      throw Error(ErrorCode::InvalidArgument, "--codebook is required with --quantizer vq");
    }
    book_ = read_codebook(codebook);
  } else {
    if (fsq_) return;
    if (levels.empty()) {
      throw Error(ErrorCode::InvalidArgument, "--levels is required with --quantizer fsq");
    }
    fsq_ = FsqLevels::parse(levels);
  }
}

std::uint64_t Quantizer::vocab_size() const {
  load();
  return kind == "vq" ? book_->size() : fsq_->codebook_size();
}

QuantizeOutput Quantizer::quantize(const FeatureMap& map, unsigned threads) const {
  load();
  return kind == "vq" ? vq_quantize(map, *book_, threads)
                      : fsq_quantize(map, *fsq_, threads);
}

FeatureMap Quantizer::decode(const TokenGrid& grid) const {
  load();
  grid.validate(vocab_size());
  const std::uint32_t d = kind == "vq" ? book_->dim() : fsq_->channels();
  std::vector<float> values;
  values.reserve(grid.codes().size() * d);
  for (auto code : grid.codes()) {
    if (kind == "vq") {
      const auto row = book_->row(code);
      values.insert(values.end(), row.begin(), row.end());
    } else {
      const auto digits = fsq_unpack(code, *fsq_);
      for (std::uint32_t k = 0; k < d; ++k) {
        values.push_back(fsq_level_value(digits[k], fsq_->levels()[k]));
      }
    }
  }
  return FeatureMap(grid.height(), grid.width(), d, std::move(values));
}

void add_quantizer_options(CLI::App& cmd, Quantizer& q) {
  cmd.add_option("--quantizer", q.kind, "Quantizer backend")
      ->check(CLI::IsMember({"vq", "fsq"}));
  cmd.add_option("--codebook", q.codebook, "CBOK codebook (vq)");
  cmd.add_option("--levels", q.levels, "Per-channel level counts, e.g. 8,8,5,5,5 (fsq)");
}

void add_world_options(CLI::App& cmd, TokenWorldConfig& w) {
  cmd.add_option("--components", w.components, "Latent mixture components")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--intrinsic-dim", w.intrinsic_dim,
                 "Embed components in a random subspace of this dimension (0 = off)");
  cmd.add_option("--maps", w.maps, "Training maps")->check(CLI::PositiveNumber);
  cmd.add_option("--heldout-maps", w.heldout_maps, "Held-out maps");
  cmd.add_option("--height", w.height, "Map height")->check(CLI::PositiveNumber);
  cmd.add_option("--width", w.width, "Map width")->check(CLI::PositiveNumber);
  cmd.add_option("--separation", w.separation, "Spread of component means");
  cmd.add_option("--noise", w.noise, "Within-component standard deviation");
  cmd.add_option("--ambient-noise", w.ambient_noise, "Off-subspace standard deviation");
  cmd.add_option("--cycle-prob", w.cycle_prob, "Probability of the next label in cycle")
      ->check(CLI::Range(0.0, 1.0));
}

namespace {

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  if (std::isfinite(v) && s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

void flatten(const Json& value, const std::string& key, std::string& out) {
  if (value.is_object()) {
    for (const auto& [k, v] : value.items()) {
      flatten(v, key.empty() ? k : key + "." + k, out);
    }
    return;
  }
  out += key;
  out += '=';
  if (value.is_number_float()) {
    out += format_number(value.get<double>());
  } else if (value.is_string()) {
    out += value.get<std::string>();
  } else if (value.is_array()) {
    std::string joined;
    for (const auto& item : value) {
      if (!joined.empty()) joined += ',';
      joined += item.is_number_float() ? format_number(item.get<double>()) : item.dump();
    }
    out += joined;
  } else {
    out += value.dump();
  }
  out += '\n';
}

}  // namespace

std::string format_report(const Json& report, bool json) {
  if (json) return report.dump(2) + "\n";
  std::string out;
  flatten(report, "", out);
  return out;
}

void emit_report(const Context& ctx, const Json& report) {
  std::fputs(format_report(report, ctx.global.json).c_str(), stdout);
}

std::string resolved_config(const Context& ctx) {
  // config_to_str emits every option of every subcommand with its effective
  // value. Keep the global keys and those of the invoked command, so the text
  // can be fed back through --config.
  std::string prefix = ctx.command;
  std::replace(prefix.begin(), prefix.end(), ' ', '.');
  prefix += '.';
  std::istringstream all(ctx.app->config_to_str(true, false));
  std::string out, line;
  while (std::getline(all, line)) {
    const auto key = line.substr(0, line.find('='));
    if (key.find('.') == std::string::npos || key.rfind(prefix, 0) == 0) out += line + '\n';
  }
  return out;
}

Json make_manifest(const Context& ctx, const Json& results) {
  Json m;
  m["tool"] = "vqtk";
  m["version"] = "0.1.0";
  m["command"] = ctx.command;
  m["argv"] = ctx.argv;
  m["seed"] = ctx.global.seed;
  m["threads"] = ctx.global.threads;
  m["config_file"] = ctx.global.config;
  m["resolved_config"] = resolved_config(ctx);
  m["results"] = results;
  return m;
}

void write_manifest(const fs::path& path, const Context& ctx, const Json& results) {
  write_text(path, make_manifest(ctx, results).dump(2) + "\n");
}

fs::path manifest_for_file(const fs::path& output) {
  return fs::path(output.string() + ".manifest.json");
}

fs::path manifest_for_dir(const fs::path& output) { return output / "manifest.json"; }

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::Io, "cannot create directory " + dir.string() + ": " +
                                   ec.message());
  }
}

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

Json trace_json(const std::vector<double>& values) {
  Json arr = Json::array();
  for (double v : values) arr.push_back(v);
  return arr;
}

}  // namespace vqtk::cli
