#include "stainnorm/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "stainnorm/error.hpp"
#include "stainnorm/io.hpp"
#include "stainnorm/normalizer.hpp"
#include "stainnorm/parallel.hpp"
#include "stainnorm/synth.hpp"

namespace stainnorm::cli {
namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
}

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

// Directories expand to their image files in lexicographic filename order.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.is_regular_file() && is_image_file(entry.path())) found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end(),
                [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(p);
    }
  }
  return files;
}

StrategyKind parse_strategy(const std::string& tag, std::uint64_t seed) {
  if (tag == "macenko") return StrategyMacenko{};
  if (tag == "stochastic") return StrategyStochastic{seed};
  if (tag == "concat") return StrategyConcat{};
  if (tag == "avg-pre") return StrategyAvgPre{};
  if (tag == "avg-post") return StrategyAvgPost{};
  throw UsageError("unknown strategy '" + tag + "'");
}

std::string format_vec(const Vec3& v) {
  std::ostringstream s;
  s << std::setprecision(6) << std::fixed << "(" << v[0] << ", " << v[1] << ", " << v[2] << ")";
  return s.str();
}

struct FitOptions {
  std::string strategy;
  std::vector<std::string> refs;
  EstimatorParams params;
  std::uint64_t seed = 0;
  std::string out;
};

int run_fit(const FitOptions& o, std::ostream& out) {
  const StrategyKind kind = parse_strategy(o.strategy, o.seed);
  const auto files = expand_inputs(o.refs);
  if (files.empty()) throw UsageError("no reference images found");
  if (std::holds_alternative<StrategyMacenko>(kind) && files.size() != 1) {
    throw UsageError("--strategy macenko takes exactly one reference image, got " +
                     std::to_string(files.size()));
  }
  o.params.validate();

  std::vector<RgbImage> images;
  for (const auto& f : files) images.push_back(load_image(f));

  ProfileDocument doc{fit_macenko(images.front(), o.params), o.params, utc_timestamp_now()};
  if (!std::holds_alternative<StrategyMacenko>(kind)) {
    const ReferenceSet refs(std::move(images));
    if (std::holds_alternative<StrategyStochastic>(kind)) {
      doc.profile = fit_stochastic(refs, o.params, o.seed);
    } else if (std::holds_alternative<StrategyConcat>(kind)) {
      doc.profile = fit_concat(refs, o.params);
    } else if (std::holds_alternative<StrategyAvgPre>(kind)) {
      doc.profile = fit_avg_pre(refs, o.params);
    } else {
      doc.profile = fit_avg_post(refs, o.params);
    }
  }
  ensure_parent(o.out);
  save_profile(doc, o.out);
  out << "strategy=" << strategy_tag(kind) << "\n";
  out << "source_count=" << files.size() << "\n";
  out << "profile=" << o.out << "\n";
  return kExitOk;
}

struct NormalizeOptions {
  std::string profile;
  std::vector<std::string> input;
  std::string output;
  unsigned jobs = 1;
  std::string report;
};

int run_normalize(const NormalizeOptions& o, std::ostream& out, std::ostream& err) {
  const ProfileDocument doc = load_profile(o.profile);
  const auto files = expand_inputs(o.input);
  if (files.empty()) throw UsageError("no input images found");
  fs::create_directories(o.output);

  std::vector<std::string> outcome(files.size());
  std::vector<std::optional<std::string>> failure(files.size());
  parallel_for(files.size(), o.jobs, [&](std::size_t k) {
    const fs::path target = fs::path(o.output) / files[k].filename().replace_extension(".png");
    try {
      const RgbImage source = load_image(files[k]);
      NormalizationResult r =
          std::holds_alternative<ReferenceProfile>(doc.profile)
              ? normalize(source, std::get<ReferenceProfile>(doc.profile), doc.params)
              : normalize_with_draw(source, std::get<StochasticProfile>(doc.profile), k, doc.params);
      save_image(r.image, target);
      outcome[k] = "ok " + files[k].filename().string() + " -> " + target.string();
      if (r.chosen_reference_index) {
        outcome[k] += " (reference " + std::to_string(*r.chosen_reference_index) + ")";
      }
    } catch (const StainError& e) {
      failure[k] = e.what();
      outcome[k] = "error " + files[k].filename().string() + ": " + e.what();
    }
  });

  nlohmann::json report = nlohmann::json::array();
  std::size_t failed = 0;
  for (std::size_t k = 0; k < files.size(); ++k) {
    (failure[k] ? err : out) << outcome[k] << "\n";
    if (failure[k]) {
      ++failed;
      report.push_back({{"file", files[k].string()}, {"error", *failure[k]}});
    }
  }
  if (!o.report.empty()) {
    ensure_parent(o.report);
    std::ofstream rep(o.report, std::ios::binary);
    if (!rep) throw StainError(ErrorCode::IoError, "cannot write report " + o.report);
    rep << report.dump(2) << "\n";
  }
  out << "normalized=" << files.size() - failed << " failed=" << failed << "\n";
  return failed == 0 ? kExitOk : kExitProcessing;
}

void print_profile(const ReferenceProfile& p, std::ostream& out) {
  out << "  hematoxylin " << format_vec(p.stain_matrix.hematoxylin()) << "\n";
  out << "  eosin       " << format_vec(p.stain_matrix.eosin()) << "\n";
  out << std::setprecision(6) << std::fixed << "  max_c       (" << p.max_c[0] << ", " << p.max_c[1]
      << ")\n";
}

int run_inspect(const std::string& path, std::ostream& out) {
  const ProfileDocument doc = load_profile(path);
  if (const auto* p = std::get_if<ReferenceProfile>(&doc.profile)) {
    out << "strategy " << strategy_tag(p->strategy) << "\n";
    out << "source_count " << p->source_count << "\n";
    print_profile(*p, out);
  } else {
    const auto& s = std::get<StochasticProfile>(doc.profile);
    out << "strategy stochastic\n";
    out << "source_count " << s.source_count() << "\n";
    out << "seed " << s.seed() << "\n";
    for (std::size_t i = 0; i < s.source_count(); ++i) {
      out << "candidate " << i << "\n";
      print_profile(s.candidate(i), out);
    }
  }
  out << std::setprecision(6) << std::defaultfloat << "params beta=" << doc.params.beta
      << " alpha=" << doc.params.alpha << " i0=" << doc.params.i0 << "\n";
  if (!doc.created_at.empty()) out << "created_at " << doc.created_at << "\n";
  return kExitOk;
}

struct SynthOptions {
  std::uint64_t seed = 0;
  std::size_t size = 128;
  double background = 0.0;
  double rotate_deg = 0.0;
  std::string out;
  std::string truth;
};

int run_synth(const SynthOptions& o, std::ostream& out) {
  StainMatrix v = random_stain_matrix(o.seed);
  if (o.rotate_deg != 0.0) {
    v = rotate_stain_basis(v, stain_rotation_axis(v), o.rotate_deg * std::numbers::pi / 180.0);
  }
  SynthSpec spec{v};
  spec.width = spec.height = o.size;
  spec.rng_seed = o.seed;
  spec.background_fraction = o.background;
  const SynthImage synth = synthesize(spec);
  ensure_parent(o.out);
  save_image(synth.image, o.out);

  if (!o.truth.empty()) {
    const Vec3& h = v.hematoxylin();
    const Vec3& e = v.eosin();
    nlohmann::json t;
    t["seed"] = o.seed;
    t["width"] = o.size;
    t["height"] = o.size;
    t["background_fraction"] = o.background;
    t["rotate_deg"] = o.rotate_deg;
    t["stain_matrix"] = {h[0], h[1], h[2], e[0], e[1], e[2]};
    t["concentrations"] = {{"hematoxylin", synth.truth.hematoxylin},
                           {"eosin", synth.truth.eosin}};
    ensure_parent(o.truth);
    std::ofstream f(o.truth, std::ios::binary);
    if (!f) throw StainError(ErrorCode::IoError, "cannot write " + o.truth);
    f << t.dump() << "\n";
  }
  out << "wrote " << o.out << " (" << o.size << "x" << o.size << ")\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stain normalization for H&E histology images", "stainnorm"};
  app.require_subcommand(1);

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a normalization profile from reference images");
  fit_cmd->add_option("--strategy", fit.strategy, "macenko|stochastic|concat|avg-pre|avg-post")
      ->required()
      ->check(CLI::IsMember({"macenko", "stochastic", "concat", "avg-pre", "avg-post"}));
  fit_cmd->add_option("--refs", fit.refs, "Reference image files or directories")->required();
  fit_cmd->add_option("--beta", fit.params.beta, "OD threshold for tissue pixels");
  fit_cmd->add_option("--alpha", fit.params.alpha, "Angle percentile");
  fit_cmd->add_option("--i0", fit.params.i0, "Incident light intensity");
  fit_cmd->add_option("--seed", fit.seed, "Seed for the stochastic strategy");
  fit_cmd->add_option("--out", fit.out, "Profile JSON to write")->required();

  NormalizeOptions norm;
  auto* norm_cmd = app.add_subcommand("normalize", "Normalize images against a fitted profile");
  norm_cmd->add_option("--profile", norm.profile, "Profile JSON")->required();
  norm_cmd->add_option("--input", norm.input, "Image files or directories")->required();
  norm_cmd->add_option("--output", norm.output, "Output directory")->required();
  norm_cmd->add_option("--jobs", norm.jobs, "Worker threads (0 = all cores)");
  norm_cmd->add_option("--report", norm.report, "JSON failure report");

  std::string inspect_path;
  auto* inspect_cmd = app.add_subcommand("inspect", "Print a profile's stain vectors and max_c");
  inspect_cmd->add_option("--profile", inspect_path, "Profile JSON")->required();

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Render a synthetic stained tile");
  synth_cmd->add_option("--seed", synth.seed, "Stain and concentration seed");
  synth_cmd->add_option("--size", synth.size, "Tile edge length in pixels")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--background", synth.background, "Fraction of white background pixels");
  synth_cmd->add_option("--rotate-deg", synth.rotate_deg, "Rotate the stain pair by this angle");
  synth_cmd->add_option("--out", synth.out, "PNG to write")->required();
  synth_cmd->add_option("--truth", synth.truth, "Ground-truth JSON to write");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*fit_cmd) return run_fit(fit, out);
    if (*norm_cmd) return run_normalize(norm, out, err);
    if (*inspect_cmd) return run_inspect(inspect_path, out);
    if (*synth_cmd) return run_synth(synth, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const StainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitProcessing;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitProcessing;
  }
  return kExitUsage;
}

}  // namespace stainnorm::cli
