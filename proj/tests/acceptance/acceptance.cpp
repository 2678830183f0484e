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

// Acceptance run: one PASS/FAIL line per criterion. Exits nonzero if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "vqtk/cluster.hpp"
#include "vqtk/experiments.hpp"
#include "vqtk/fsq.hpp"
#include "vqtk/kd.hpp"
#include "vqtk/metrics.hpp"
#include "vqtk/proposal.hpp"
#include "vqtk/vq.hpp"

namespace {

using vqtk::FeatureMap;
using vqtk_test::Rng;
using vqtk_test::Vec;

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

// 1. Nearest-code lookup equals a brute-force scan, ties included.
Outcome vq_oracle() {
  Outcome out;
  Rng rng(1001);
  std::uniform_int_distribution<std::uint32_t> n_dist(1, 256), d_dist(1, 16), s_dist(1, 8);
  std::uint64_t positions = 0;
  for (int t = 0; t < 1000 && out.ok; ++t) {
    const auto n = n_dist(rng), d = d_dist(rng), h = s_dist(rng), w = s_dist(rng);
    // Every other instance draws from a coarse grid so exact ties occur.
    const bool ties = t % 2 == 1;
    const auto book = ties ? vqtk_test::grid_book(rng, n, d) : vqtk_test::random_book(rng, n, d);
    const auto map = ties ? vqtk_test::grid_map(rng, h, w, d) : vqtk_test::random_map(rng, h, w, d);
    const auto q = vqtk::vq_quantize(map, book);
    for (std::size_t p = 0; p < map.positions(); ++p) {
      const auto want = vqtk_test::brute_force_nearest(map.vector(p).data(), book);
      if (q.tokens.codes()[p] != want) {
        out.require(false, "instance " + std::to_string(t) + " position " + std::to_string(p));
        break;
      }
    }
    positions += map.positions();
  }
  if (out.ok) out.detail = "1000 instances, " + std::to_string(positions) + " positions";
  return out;
}

// 2. Analytic gradients against central differences.
Outcome gradients() {
  Outcome out;
  Rng rng(2002);
  std::uniform_int_distribution<std::uint32_t> n_dist(1, 16), d_dist(1, 8), s_dist(1, 4);
  std::uniform_real_distribution<double> beta_dist(0.0, 2.0);
  double worst = 0.0;
  for (int t = 0; t < 200 && out.ok; ++t) {
    const auto n = n_dist(rng), d = d_dist(rng);
    const auto book = vqtk_test::random_book(rng, n, d);
    const auto map = vqtk_test::random_map(rng, s_dist(rng), s_dist(rng), d);
    const double beta = beta_dist(rng);
    const auto q = vqtk::vq_quantize(map, book);
    const auto g = vqtk::vq_loss_gradients(map, book, q.tokens, {beta});
    const Vec x = vqtk_test::to_vec(map.data());
    const Vec sel = vqtk_test::to_vec(q.code_vectors.data());
    const std::vector<std::uint32_t> codes(q.tokens.codes().begin(), q.tokens.codes().end());
    const auto fd_x = vqtk_test::central_difference(
        [&](const Vec& v) { return vqtk_test::commitment_term(v, sel, d, beta); }, x, 1e-4);
    const auto fd_b = vqtk_test::central_difference(
        [&](const Vec& v) { return vqtk_test::codebook_term(v, x, codes, d); },
        vqtk_test::to_vec(book.data()), 1e-4);
    const double ex = vqtk_test::relative_error(vqtk_test::to_vec(g.grad_x.data()), fd_x, 1e-9);
    const double eb = vqtk_test::relative_error(vqtk_test::to_vec(g.grad_book.data()), fd_b, 1e-9);
    worst = std::max({worst, ex, eb});
    out.require(ex <= 1e-3 && eb <= 1e-3, "vq instance " + std::to_string(t));
  }
  for (int t = 0; t < 200 && out.ok; ++t) {
    const auto h = s_dist(rng), w = s_dist(rng), d = d_dist(rng);
    const auto r = vqtk_test::random_map(rng, h, w, d);
    const auto tm = vqtk_test::random_map(rng, h, w, d);
    const Vec tv = vqtk_test::to_vec(tm.data());
    const bool flat = t % 2 == 1;
    const std::size_t group = flat ? r.data().size() : d;
    const auto fd = vqtk_test::central_difference(
        [&](const Vec& v) { return vqtk_test::neg_cosine(v, tv, group); },
        vqtk_test::to_vec(r.data()), 1e-4);
    const auto g = vqtk::kd_loss_gradient(
        r, tm, flat ? vqtk::CosineMode::Flat : vqtk::CosineMode::PerPosition);
    const double e = vqtk_test::relative_error(vqtk_test::to_vec(g.data()), fd, 1e-9);
    worst = std::max(worst, e);
    out.require(e <= 1e-3, "kd instance " + std::to_string(t));
  }
  if (out.ok) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "200 vq + 200 kd instances, worst relative error %.2e", worst);
    out.detail = buf;
  }
  return out;
}

// 3. Straight-through estimator under random quadratic downstream losses
// L(q) = sum_i a_i (q_i - t_i)^2, whose gradient w.r.t. q is 2 a (q - t).
Outcome ste() {
  Outcome out;
  Rng rng(3003);
  std::uniform_int_distribution<std::uint32_t> n_dist(1, 32), d_dist(1, 8), s_dist(1, 6);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int t = 0; t < 200 && out.ok; ++t) {
    const auto d = d_dist(rng);
    const auto book = vqtk_test::random_book(rng, n_dist(rng), d);
    const auto map = vqtk_test::random_map(rng, s_dist(rng), s_dist(rng), d);
    const auto q = vqtk::vq_quantize(map, book);
    std::vector<float> up(map.data().size());
    for (std::size_t i = 0; i < up.size(); ++i) {
      up[i] = static_cast<float>(2.0 * u(rng) * (q.code_vectors.data()[i] - u(rng)));
    }
    const FeatureMap upstream(map.height(), map.width(), d, up);
    const auto g = vqtk::ste_backward(upstream, q, book);
    out.require(vqtk::bitwise_equal(g.grad_x, upstream), "grad_x differs, instance " + std::to_string(t));
    for (float v : g.grad_book.data()) {
      out.require(v == 0.0f && !std::signbit(v), "codebook gradient nonzero, instance " + std::to_string(t));
    }
  }
  if (out.ok) out.detail = "200 quadratic losses, bitwise pass-through, zero codebook gradient";
  return out;
}

// 4. FSQ (8,8,5,5,5): exhaustive bijection and full usage on dense inputs.
Outcome fsq() {
  Outcome out;
  const vqtk::FsqLevels levels({8, 8, 5, 5, 5});
  out.require(levels.codebook_size() == 8000, "codebook size");
  for (std::uint32_t c = 0; c < 8000 && out.ok; ++c) {
    const auto digits = vqtk::fsq_unpack(c, levels);
    out.require(vqtk::fsq_pack(digits, levels) == c, "pack(unpack) at " + std::to_string(c));
  }
  // One input per code, each channel inside its level's rounding interval.
  std::vector<float> values;
  for (std::uint32_t c = 0; c < 8000; ++c) {
    const auto digits = vqtk::fsq_unpack(c, levels);
    for (std::size_t k = 0; k < digits.size(); ++k) {
      const double half = (levels.levels()[k] - 1) / 2.0;
      values.push_back(static_cast<float>(std::atanh((digits[k] - half) / (half + 0.5))));
    }
  }
  const auto q = vqtk::fsq_quantize(FeatureMap(80, 100, 5, values), levels);
  const std::set<std::uint32_t> distinct(q.tokens.codes().begin(), q.tokens.codes().end());
  const std::vector<vqtk::TokenGrid> corpus{q.tokens};
  const auto usage = vqtk::codebook_usage(corpus, 8000);
  out.require(distinct.size() == 8000, "reachable codes " + std::to_string(distinct.size()));
  out.require(usage.usage_percent == 100.0, "usage " + std::to_string(usage.usage_percent));
  if (out.ok) out.detail = "8000 reachable codes, usage 100.0%";
  return out;
}

// 5. Perplexity closed forms.
Outcome perplexity() {
  Outcome out;
  std::vector<std::uint32_t> codes(8192);
  for (std::uint32_t i = 0; i < 8192; ++i) codes[i] = (i * 31) % 8192;
  const std::vector<vqtk::TokenGrid> corpus{vqtk::TokenGrid(64, 128, codes)};
  const double uniform = vqtk::perplexity(vqtk::UniformModel(8192), corpus);
  out.require(uniform == 8192.0, "uniform gave " + std::to_string(uniform));
  const vqtk::UnigramModel det({0.0, 1.0, 0.0});
  const std::vector<vqtk::TokenGrid> own{
      vqtk::TokenGrid(4, 4, vqtk::ngram_sample(det, 16, 1))};
  out.require(vqtk::perplexity(det, own) == 1.0, "deterministic model");
  // Reference from a separate Python script: train [0,1,0,1] and [1,1,0,2],
  // order 2, alpha 0.5, N 3; scored on [0,2,1,1,0] and [2,2].
  const std::vector<vqtk::TokenGrid> train{vqtk::TokenGrid(1, 4, {0, 1, 0, 1}),
                                           vqtk::TokenGrid(1, 4, {1, 1, 0, 2})};
  const auto m = vqtk::NgramModel::fit(train, 2, 3, 0.5);
  const std::vector<vqtk::TokenGrid> test{vqtk::TokenGrid(1, 5, {0, 2, 1, 1, 0}),
                                          vqtk::TokenGrid(1, 2, {2, 2})};
  const double ppl = vqtk::perplexity(m, test);
  out.require(std::abs(ppl - 3.0367191020195614) <= 1e-9, "bigram gave " + std::to_string(ppl));
  if (out.ok) out.detail = "uniform 8192 exact, deterministic 1, bigram within 1e-9";
  return out;
}

// 6. Frechet distance on seeded PSD pairs.
Outcome frechet() {
  Outcome out;
  Rng rng(6006);
  std::normal_distribution<double> g;
  double worst_residual = 0.0;
  for (int t = 0; t < 100 && out.ok; ++t) {
    const std::size_t d = 1 + t % 32;
    std::uniform_int_distribution<std::size_t> rank(1, d);
    Vec m1(d), m2(d);
    for (auto& v : m1) v = g(rng);
    for (auto& v : m2) v = g(rng);
    const Vec s1 = vqtk_test::random_psd(rng, d, rank(rng));
    const Vec s2 = vqtk_test::random_psd(rng, d, rank(rng));
    const vqtk::GaussianStats a(d, m1, s1, 100), b(d, m2, s2, 100), a_shift(d, m2, s1, 100);

    out.require(vqtk::frechet_distance(a, a) <= 1e-9, "identical stats, pair " + std::to_string(t));
    double gap = 0.0;
    for (std::size_t k = 0; k < d; ++k) gap += (m1[k] - m2[k]) * (m1[k] - m2[k]);
    const double eq = vqtk::frechet_distance(a, a_shift);
    out.require(std::abs(eq - gap) <= 1e-6 * gap, "equal covariance, pair " + std::to_string(t));

    const auto terms = vqtk::frechet_terms(a, b);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        double mm = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          mm += terms.sqrt_product.values[i * d + k] * terms.sqrt_product.values[k * d + j];
        }
        const double p = terms.product[i * d + j];
        num += (mm - p) * (mm - p);
        den += p * p;
      }
    }
    const double residual = den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
    worst_residual = std::max(worst_residual, residual);
    out.require(residual <= 1e-6, "sqrt residual " + std::to_string(residual) + ", pair " + std::to_string(t));
  }
  if (out.ok) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "100 pairs d<=32, worst sqrt residual %.2e", worst_residual);
    out.detail = buf;
  }
  return out;
}

// 7. Inception score closed forms and naive oracle.
Outcome inception() {
  Outcome out;
  const vqtk::ProbMatrix same(4, 3, {0.2, 0.3, 0.5, 0.2, 0.3, 0.5, 0.2, 0.3, 0.5, 0.2, 0.3, 0.5});
  out.require(std::abs(vqtk::inception_score(same) - 1.0) <= 1e-9, "identical rows");
  for (std::size_t k : {2u, 10u, 100u}) {
    std::vector<double> v(k * k, 0.0);
    for (std::size_t r = 0; r < k; ++r) v[r * k + r] = 1.0;
    const double is = vqtk::inception_score(vqtk::ProbMatrix(k, k, v));
    out.require(std::abs(is - static_cast<double>(k)) <= 1e-9, "one-hot K=" + std::to_string(k));
  }
  Rng rng(7007);
  std::gamma_distribution<double> gamma(0.5, 1.0);
  std::uniform_int_distribution<std::size_t> rows(1, 64), cols(1, 32);
  for (int t = 0; t < 100 && out.ok; ++t) {
    std::vector<Vec> p(rows(rng), Vec(cols(rng)));
    std::vector<double> flat;
    for (auto& r : p) {
      double s = 0.0;
      for (auto& x : r) s += (x = gamma(rng) + 1e-300);
      for (auto& x : r) flat.push_back(x /= s);
    }
    const double is = vqtk::inception_score(vqtk::ProbMatrix(p.size(), p[0].size(), flat));
    const double want = vqtk_test::naive_inception_score(p);
    out.require(std::abs(is - want) <= 1e-9 * std::max(1.0, want), "matrix " + std::to_string(t));
  }
  if (out.ok) out.detail = "closed forms and 100 naive-oracle matrices within 1e-9";
  return out;
}

// 8. k-means: monotone Lloyd, two-cluster oracle, thread determinism.
Outcome kmeans() {
  Outcome out;
  Rng rng(8008);
  std::normal_distribution<double> g;
  for (std::uint64_t s = 0; s < 30 && out.ok; ++s) {
    const std::uint32_t k = 2 + s % 10, d = 1 + s % 6;
    vqtk::VectorSet v;
    v.dim = d;
    for (int i = 0; i < 500 * static_cast<int>(d); ++i) v.values.push_back(static_cast<float>(g(rng)));
    vqtk::KMeansConfig cfg;
    cfg.k = k;
    cfg.seed = s;
    cfg.tol = 0.0;
    const auto r = vqtk::kmeans_fit(v, cfg);
    for (std::size_t i = 1; i < r.inertia_trace.size(); ++i) {
      out.require(r.inertia_trace[i] <= r.inertia_trace[i - 1], "inertia rose, seed " + std::to_string(s));
    }
    for (std::size_t batch : {std::size_t{128}, std::numeric_limits<std::size_t>::max()}) {
      cfg.batch_size = batch;
      cfg.threads = 1;
      const auto one = vqtk::kmeans_fit(v, cfg);
      for (unsigned th : {2u, 8u}) {
        cfg.threads = th;
        out.require(vqtk::bitwise_equal(one.centroids, vqtk::kmeans_fit(v, cfg).centroids),
                    "thread count changed result, seed " + std::to_string(s));
      }
    }
  }
  // Two clusters around (-10, 0) and (10, 0).
  vqtk::VectorSet v;
  v.dim = 2;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double sum[2][2] = {{0, 0}, {0, 0}};
  for (int i = 0; i < 400; ++i) {
    const float a = static_cast<float>((i % 2 ? 10.0 : -10.0) + u(rng)), b = static_cast<float>(u(rng));
    v.values.insert(v.values.end(), {a, b});
    sum[i % 2][0] += a;
    sum[i % 2][1] += b;
  }
  vqtk::KMeansConfig cfg;
  cfg.k = 2;
  const auto r = vqtk::kmeans_fit(v, cfg);
  for (std::uint32_t c = 0; c < 2; ++c) {
    const auto row = r.centroids.row(c);
    const int side = row[0] > 0.0f ? 1 : 0;
    out.require(std::abs(row[0] - sum[side][0] / 200.0) <= 1e-3 &&
                    std::abs(row[1] - sum[side][1] / 200.0) <= 1e-3,
                "two-cluster oracle");
  }
  if (out.ok) out.detail = "30 monotone runs, bitwise across 1/2/8 threads, two-cluster oracle";
  return out;
}

// 9. Cluster codebook beats a random codebook on the synthetic token world.
Outcome demo() {
  Outcome out;
  int ppl = 0, fid = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = vqtk::run_demo({}, seed);
    ppl += r.cluster.perplexity < r.random.perplexity;
    fid += r.cluster.frechet_generated < r.random.frechet_generated;
  }
  out.require(ppl >= 9, "perplexity wins " + std::to_string(ppl) + "/10");
  out.require(fid >= 9, "Frechet wins " + std::to_string(fid) + "/10");
  out.detail = "perplexity wins " + std::to_string(ppl) + "/10, Frechet wins " +
               std::to_string(fid) + "/10";
  return out;
}

// 10. Quantization error non-increasing over codebook sizes 2^4 .. 2^10.
Outcome sweep() {
  Outcome out;
  vqtk::SweepConfig cfg;
  for (std::uint32_t s = 16; s <= 1024; s *= 2) cfg.sizes.push_back(s);
  cfg.dims = {8};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto rows = vqtk::run_sweep(cfg, seed);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      out.require(rows[i].report.quant_error <= rows[i - 1].report.quant_error,
                  "seed " + std::to_string(seed) + " size " + std::to_string(rows[i].codebook_size));
    }
  }
  if (out.ok) out.detail = "5 seeds x 7 sizes, non-increasing";
  return out;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // 0 = no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> all{
      {1, "vq oracle equivalence", 10.0, vq_oracle},
      {2, "gradient checks", 30.0, gradients},
      {3, "straight-through estimator", 0.0, ste},
      {4, "fsq counting and usage", 5.0, fsq},
      {5, "perplexity closed forms", 0.0, perplexity},
      {6, "frechet metric", 0.0, frechet},
      {7, "inception score", 0.0, inception},
      {8, "k-means", 0.0, kmeans},
      {9, "cluster vs random demo", 120.0, demo},
      {10, "codebook size sweep", 0.0, sweep},
  };
  int failed = 0;
  for (const auto& c : all) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0.0 && secs >= c.budget_s) {
      o.ok = false;
      o.detail += " (over " + std::to_string(static_cast<int>(c.budget_s)) + " s budget)";
    }
    failed += !o.ok;
    std::printf("%s criterion %d: %s: %s [%.2f s]\n", o.ok ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
