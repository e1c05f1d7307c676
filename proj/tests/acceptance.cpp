// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "stainnorm/cli.hpp"
#include "stainnorm/error.hpp"
#include "stainnorm/io.hpp"
#include "stainnorm/macenko.hpp"
#include "stainnorm/multi_target.hpp"
#include "stainnorm/normalizer.hpp"
#include "stainnorm/stain_math.hpp"
#include "stainnorm/synth.hpp"

namespace fs = std::filesystem;
using namespace stainnorm;
using stainnorm::testing::degrees;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double matrix_gap(const StainMatrix& a, const StainMatrix& b) {
  double gap = 0.0;
  for (int j = 0; j < 2; ++j) {
    for (int c = 0; c < 3; ++c) gap = std::max(gap, std::abs(a.column(j)[c] - b.column(j)[c]));
  }
  return gap;
}

double profile_gap(const ReferenceProfile& a, const ReferenceProfile& b) {
  return std::max({matrix_gap(a.stain_matrix, b.stain_matrix), std::abs(a.max_c[0] - b.max_c[0]),
                   std::abs(a.max_c[1] - b.max_c[1])});
}

int max_level_gap(const RgbImage& a, const RgbImage& b) {
  int worst = 0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    worst = std::max(worst, std::abs(int(a.data()[i]) - int(b.data()[i])));
  }
  return worst;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Criterion 1
Outcome od_roundtrip() {
  const auto t0 = std::chrono::steady_clock::now();
  RgbImage img(256, 1);
  for (int i = 0; i < 256; ++i) {
    for (int c = 0; c < 3; ++c) img.data()[3 * i + c] = static_cast<std::uint8_t>(i);
  }
  const RgbImage back = od_to_rgb(rgb_to_od(img), 256, 1);
  int mismatches = 0;
  for (int i = 0; i < 256; ++i) {
    const int expected = i == 0 ? 1 : i;
    for (int c = 0; c < 3; ++c) mismatches += back.data()[3 * i + c] != expected;
  }
  const double t = seconds_since(t0);
  return {mismatches == 0 && t < 1.0, fmt("mismatches=%d runtime=%.4fs", mismatches, t)};
}

// Criterion 2
Outcome synthetic_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 1.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const SynthImage s = testing::synthetic(seed, 128);
    const StainMatrix truth = random_stain_matrix(seed);
    const StainMatrix est = estimate_stain_matrix(s.image);
    worst = std::min({worst, testing::cosine(est.hematoxylin(), truth.hematoxylin()),
                      testing::cosine(est.eosin(), truth.eosin())});
  }
  const double t = seconds_since(t0);
  return {worst >= 0.995 && t < 10.0, fmt("min_cosine=%.6f runtime=%.3fs", worst, t)};
}

// Criterion 3
Outcome deconvolution_oracle() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> conc(0.0, 2.0), noise(-0.05, 0.05);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 h = testing::random_positive_unit(rng);
    const Vec3 e = testing::random_positive_unit(rng);
    if (testing::cosine(h, e) > 0.999) {
      --i;
      continue;
    }
    const StainMatrix v = StainMatrix::from_columns(h, e);
    const double sh = conc(rng), se = conc(rng);
    OdPixels od;
    od.push_back({v.hematoxylin()[0] * sh + v.eosin()[0] * se + noise(rng),
                  v.hematoxylin()[1] * sh + v.eosin()[1] * se + noise(rng),
                  v.hematoxylin()[2] * sh + v.eosin()[2] * se + noise(rng)});
    const ConcentrationMatrix got = deconvolve(od, v);
    const auto want = testing::normal_equations_solve(v.hematoxylin(), v.eosin(), od.pixel(0));
    const double err = std::hypot(got.hematoxylin[0] - want[0], got.eosin[0] - want[1]);
    const double scale = std::max(std::hypot(want[0], want[1]), 1e-12);
    worst = std::max(worst, err / scale);
  }
  return {worst <= 1e-9, fmt("max_relative_error=%.3e", worst)};
}

// Criterion 4
Outcome degenerate_set() {
  const RgbImage a = testing::synthetic(40).image;
  const RgbImage source = testing::synthetic(41).image;
  const ReferenceSet single({a});
  const ReferenceProfile base = fit_macenko(a);
  const StochasticProfile stochastic = fit_stochastic(single, {}, 99);
  const std::vector<std::pair<const char*, ReferenceProfile>> profiles{
      {"concat", fit_concat(single)},
      {"avg-pre", fit_avg_pre(single)},
      {"avg-post", fit_avg_post(single)},
      {"stochastic", stochastic.candidate(stochastic.draw(0))}};

  const NormalizedOd ref_od = normalize_od(source, base);
  const RgbImage ref_img = normalize(source, base).image;
  double od_gap = 0.0;
  int level_gap = 0;
  for (const auto& [name, p] : profiles) {
    const NormalizedOd n = normalize_od(source, p);
    for (int c = 0; c < 3; ++c) {
      const auto x = n.od.channel(c);
      const auto y = ref_od.od.channel(c);
      for (std::size_t i = 0; i < x.size(); ++i) od_gap = std::max(od_gap, std::abs(x[i] - y[i]));
    }
    level_gap = std::max(level_gap, max_level_gap(normalize(source, p).image, ref_img));
  }
  // The stochastic path through its own entry point must agree as well.
  level_gap = std::max(level_gap, max_level_gap(normalize_with_draw(source, stochastic, 0).image, ref_img));
  return {od_gap <= 1e-9 && level_gap <= 1, fmt("max_od_gap=%.3e max_level_gap=%d", od_gap, level_gap)};
}

// Criterion 5
Outcome avg_post_arithmetic() {
  // Hand-built pair, already unit columns with red-dominant first column.
  const StainMatrix m1 = StainMatrix::from_columns({0.6, 0.7, 0.38729833462074170},
                                                   {0.2, 0.9, 0.38729833462074170});
  const StainMatrix m2 = StainMatrix::from_columns({0.7, 0.6, 0.38729833462074170},
                                                   {0.3, 0.9, 0.31622776601683794});
  auto expected_column = [](const Vec3& x, const Vec3& y) {
    const double a = (x[0] + y[0]) / 2.0, b = (x[1] + y[1]) / 2.0, c = (x[2] + y[2]) / 2.0;
    const double n = std::sqrt(a * a + b * b + c * c);
    return Vec3{a / n, b / n, c / n};
  };
  const std::vector<StainMatrix> pair{m1, m2};
  const StainMatrix avg = average_stain_matrices(pair);
  double gap = matrix_gap(avg, StainMatrix::from_columns(expected_column(m1.hematoxylin(), m2.hematoxylin()),
                                                         expected_column(m1.eosin(), m2.eosin())));
  // Same arithmetic through the fitting path on two synthetic references.
  const RgbImage r1 = testing::synthetic(50).image, r2 = testing::synthetic(51).image;
  const ReferenceProfile p1 = fit_macenko(r1), p2 = fit_macenko(r2);
  const ReferenceProfile fitted = fit_avg_post(ReferenceSet({r1, r2}));
  const Vec3 h = expected_column(p1.stain_matrix.hematoxylin(), p2.stain_matrix.hematoxylin());
  const Vec3 e = expected_column(p1.stain_matrix.eosin(), p2.stain_matrix.eosin());
  for (int c = 0; c < 3; ++c) {
    gap = std::max({gap, std::abs(fitted.stain_matrix.hematoxylin()[c] - h[c]),
                    std::abs(fitted.stain_matrix.eosin()[c] - e[c])});
  }
  for (int k = 0; k < 2; ++k) {
    gap = std::max(gap, std::abs(fitted.max_c[k] - (p1.max_c[k] + p2.max_c[k]) / 2.0));
  }
  return {gap <= 1e-12, fmt("max_abs_gap=%.3e", gap)};
}

// Criterion 6
Outcome permutation_invariance() {
  const std::vector<RgbImage> imgs{testing::synthetic(60).image, testing::synthetic(61).image,
                                   testing::synthetic(62).image};
  using Fit = std::function<ReferenceProfile(const ReferenceSet&)>;
  const std::vector<std::pair<const char*, Fit>> fits{
      {"concat", [](const ReferenceSet& r) { return fit_concat(r); }},
      {"avg-pre", [](const ReferenceSet& r) { return fit_avg_pre(r); }},
      {"avg-post", [](const ReferenceSet& r) { return fit_avg_post(r); }}};
  std::string detail;
  bool pass = true;
  for (const auto& [name, fit] : fits) {
    std::vector<std::size_t> order{0, 1, 2};
    const ReferenceProfile base = fit(ReferenceSet(imgs));
    double gap = 0.0;
    while (std::next_permutation(order.begin(), order.end())) {
      const ReferenceSet permuted({imgs[order[0]], imgs[order[1]], imgs[order[2]]});
      gap = std::max(gap, profile_gap(fit(permuted), base));
    }
    pass = pass && gap <= 1e-9;
    detail += fmt("%s=%.3e ", name, gap);
  }
  return {pass, detail};
}

// Criterion 7
Outcome self_normalization() {
  double worst = 0.0;
  for (std::uint64_t seed = 70; seed < 80; ++seed) {
    const RgbImage a = testing::synthetic(seed).image;
    const RgbImage out = normalize(a, fit_concat(ReferenceSet({a}))).image;
    for (int c = 0; c < 3; ++c) {
      double sum = 0.0;
      for (std::size_t i = 0; i < a.pixel_count(); ++i) {
        sum += std::abs(int(out.data()[3 * i + c]) - int(a.data()[3 * i + c]));
      }
      worst = std::max(worst, sum / static_cast<double>(a.pixel_count()));
    }
  }
  return {worst <= 2.0, fmt("max_channel_mae=%.4f", worst)};
}

// Criterion 8
Outcome stain_transfer() {
  const StainMatrix v_s = random_stain_matrix(7);
  const StainMatrix v_r = rotate_stain_basis(v_s, stain_rotation_axis(v_s), degrees(20.0));
  const RgbImage source = testing::synthetic_with(v_s, 800).image;
  const ReferenceSet refs({testing::synthetic_with(v_r, 801).image, testing::synthetic_with(v_r, 802).image,
                           testing::synthetic_with(v_r, 803).image});
  const StainMatrix source_est = estimate_stain_matrix(source);

  std::string detail;
  bool pass = true;
  auto check = [&](const char* name, const RgbImage& output, const StainMatrix& target) {
    const double before = testing::cosine_distance(source_est, target);
    const double after = testing::cosine_distance(estimate_stain_matrix(output), target);
    pass = pass && after < before;
    detail += fmt("%s %.2e->%.2e ", name, before, after);
  };
  const StochasticProfile stochastic = fit_stochastic(refs, {}, 8);
  const NormalizationResult drawn = normalize_with_draw(source, stochastic, 0);
  check("stochastic", drawn.image, stochastic.candidate(*drawn.chosen_reference_index).stain_matrix);
  for (const auto& [name, profile] : {std::pair{"concat", fit_concat(refs)}, std::pair{"avg-pre", fit_avg_pre(refs)},
                                      std::pair{"avg-post", fit_avg_post(refs)}}) {
    check(name, normalize(source, profile).image, profile.stain_matrix);
  }
  return {pass, detail};
}

// Criterion 9
Outcome target_variation() {
  // Columns 8 degrees either side of the gray diagonal, in the plane through
  // the red-versus-cyan direction. Every channel then changes monotonically
  // over +-20 degree in-plane turns and the columns stay in the orthant.
  const Vec3 gray = normalized(Vec3{1.0, 1.0, 1.0});
  const Vec3 red_cyan = normalized(Vec3{2.0, -1.0, -1.0});
  const double half = degrees(8.0);
  const StainMatrix base = StainMatrix::from_columns(std::cos(half) * gray + std::sin(half) * red_cyan,
                                                     std::cos(half) * gray - std::sin(half) * red_cyan);
  const Vec3 axis = stain_rotation_axis(base);
  std::vector<RgbImage> refs;
  std::uint64_t seed = 900;
  for (double deg : {-20.0, -10.0, 10.0, 20.0}) {
    refs.push_back(testing::synthetic_with(rotate_stain_basis(base, axis, degrees(deg)), ++seed).image);
  }
  const RgbImage input = testing::synthetic_with(base, 950).image;

  std::vector<std::array<double, 3>> means;
  for (const RgbImage& r : refs) means.push_back(testing::channel_means(normalize(input, fit_macenko(r)).image));
  double min_pair = 1e9;
  for (std::size_t i = 0; i < means.size(); ++i) {
    for (std::size_t j = i + 1; j < means.size(); ++j) {
      for (int c = 0; c < 3; ++c) min_pair = std::min(min_pair, std::abs(means[i][c] - means[j][c]));
    }
  }
  const auto avg = testing::channel_means(normalize(input, fit_avg_post(ReferenceSet(refs))).image);
  bool inside = true;
  std::string hull;
  for (int c = 0; c < 3; ++c) {
    double lo = 1e9, hi = -1e9;
    for (const auto& m : means) {
      lo = std::min(lo, m[c]);
      hi = std::max(hi, m[c]);
    }
    inside = inside && lo <= avg[c] && avg[c] <= hi;
    hull += fmt("%.1f<=%.1f<=%.1f ", lo, avg[c], hi);
  }
  return {min_pair >= 3.0 && inside, fmt("min_pairwise_channel_diff=%.2f hull[", min_pair) + hull + "]"};
}

// Criterion 10
Outcome parallel_reproducibility() {
  const fs::path root = testing::fresh_dir("determinism");
  fs::create_directories(root / "refs");
  fs::create_directories(root / "inputs");
  for (std::uint64_t s = 0; s < 3; ++s) {
    save_image(testing::synthetic(1000 + s, 96).image, root / "refs" / fmt("ref%llu.png", (unsigned long long)s));
  }
  for (std::uint64_t s = 0; s < 12; ++s) {
    save_image(testing::synthetic(1100 + s, 96).image, root / "inputs" / fmt("in%02llu.png", (unsigned long long)s));
  }
  std::ostringstream sink;
  bool pass = true;
  std::string detail;
  for (const char* strategy : {"stochastic", "concat", "avg-pre", "avg-post"}) {
    const std::string profile = (root / (std::string(strategy) + ".json")).string();
    int rc = cli::run({"fit", "--strategy", strategy, "--refs", (root / "refs").string(), "--seed", "42", "--out",
                       profile},
                      sink, sink);
    std::size_t identical = 0;
    for (const char* jobs : {"1", "8"}) {
      rc |= cli::run({"normalize", "--profile", profile, "--input", (root / "inputs").string(), "--output",
                      (root / strategy / jobs).string(), "--jobs", jobs},
                     sink, sink);
    }
    for (std::uint64_t s = 0; s < 12; ++s) {
      const std::string name = fmt("in%02llu.png", (unsigned long long)s);
      const std::string one = read_bytes(root / strategy / "1" / name);
      identical += !one.empty() && one == read_bytes(root / strategy / "8" / name);
    }
    pass = pass && rc == 0 && identical == 12;
    detail += fmt("%s=%zu/12 ", strategy, identical);
  }
  return {pass, detail};
}

// Criterion 11
Outcome error_surface() {
  const RgbImage white = testing::white_image(64, 64);
  const RgbImage gray = testing::gray_ramp(64, 64);
  auto code_of = [](const RgbImage& img) {
    try {
      fit_macenko(img);
    } catch (const StainError& e) {
      return e.code();
    }
    return ErrorCode::IoError;  // sentinel: no error raised
  };
  const bool direct = code_of(white) == ErrorCode::InsufficientTissue && code_of(gray) == ErrorCode::DegenerateCloud;

  const std::vector<RgbImage> batch{testing::synthetic(1200, 64).image, white, testing::synthetic(1201, 64).image,
                                    gray, testing::synthetic(1202, 64).image};
  const ReferenceProfile profile = fit_macenko(testing::synthetic(1203).image);
  const BatchReport report = normalize_batch(batch, profile, {}, 4);
  const bool batched = report.succeeded() == 3 && report.errors.size() == 2 && report.errors[0].index == 1 &&
                       report.errors[0].code == ErrorCode::InsufficientTissue && report.errors[1].index == 3 &&
                       report.errors[1].code == ErrorCode::DegenerateCloud && report.results[0] &&
                       report.results[2] && report.results[4];

  // Same through the CLI: failures listed in the report, the rest written.
  const fs::path root = testing::fresh_dir("errors");
  fs::create_directories(root / "in");
  for (std::size_t i = 0; i < batch.size(); ++i) save_image(batch[i], root / "in" / fmt("img%zu.png", i));
  save_profile({profile, {}, utc_timestamp_now()}, root / "profile.json");
  std::ostringstream sink;
  const int rc = cli::run({"normalize", "--profile", (root / "profile.json").string(), "--input",
                           (root / "in").string(), "--output", (root / "out").string(), "--jobs", "4", "--report",
                           (root / "report.json").string()},
                          sink, sink);
  const std::string rep = read_bytes(root / "report.json");
  const bool cli_ok = rc == cli::kExitProcessing && fs::exists(root / "out" / "img0.png") &&
                      fs::exists(root / "out" / "img2.png") && fs::exists(root / "out" / "img4.png") &&
                      !fs::exists(root / "out" / "img1.png") && rep.find("InsufficientTissue") != std::string::npos &&
                      rep.find("DegenerateCloud") != std::string::npos;
  return {direct && batched && cli_ok, fmt("direct=%d batch=%d cli=%d", direct, batched, cli_ok)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"od roundtrip", od_roundtrip},
      {"synthetic recovery", synthetic_recovery},
      {"deconvolution oracle", deconvolution_oracle},
      {"degenerate-set equivalence", degenerate_set},
      {"avg-post arithmetic", avg_post_arithmetic},
      {"permutation invariance", permutation_invariance},
      {"self-normalization", self_normalization},
      {"stain transfer closed loop", stain_transfer},
      {"distinct targets, averaged hue", target_variation},
      {"parallel reproducibility", parallel_reproducibility},
      {"error surface", error_surface}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o{false, ""};
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
