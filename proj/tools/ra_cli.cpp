// Command-line shell: apply/sample policies, run grid searches, ablations,
// magnitude sweeps and density training on the synthetic shapes task (or
// CIFAR-10 binaries), and regenerate the golden corpus.
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "nlohmann/json.hpp"
#include "ra/app.hpp"
#include "ra/density.hpp"
#include "ra/image_io.hpp"
#include "ra/oracle.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ra::IoError("cannot open " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ra::IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& t : split_csv(s)) out.push_back(std::stod(t));
  return out;
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  for (const auto& t : split_csv(s)) out.push_back(std::stoi(t));
  return out;
}

std::vector<uint64_t> parse_u64s(const std::string& s) {
  std::vector<uint64_t> out;
  for (const auto& t : split_csv(s)) out.push_back(std::stoull(t));
  return out;
}

ra::MagnitudeSchedule parse_schedule_arg(const std::string& s, double m_default) {
  if (s.empty()) return ra::MagnitudeSchedule::constant(m_default);
  const auto colon = s.find(':');
  const std::string type = s.substr(0, colon);
  std::vector<double> p;
  if (colon != std::string::npos) p = parse_doubles(s.substr(colon + 1));
  auto need = [&](size_t n) {
    if (p.size() != n)
      throw UsageError("--schedule " + type + " needs " + std::to_string(n) + " params");
  };
  if (type == "constant") {
    need(1);
    return ra::MagnitudeSchedule::constant(p[0]);
  }
  if (type == "random") {
    need(2);
    return ra::MagnitudeSchedule::random(p[0], p[1]);
  }
  if (type == "linear") {
    need(2);
    return ra::MagnitudeSchedule::linear(p[0], p[1]);
  }
  if (type == "random-increasing-upper") {
    need(3);
    return ra::MagnitudeSchedule::random_increasing_upper(p[0], p[1], p[2]);
  }
  throw UsageError("unknown schedule type \"" + type + "\"");
}

std::set<ra::TransformKind> parse_subset_arg(const std::string& s) {
  if (s.empty()) {
    auto all = ra::all_transform_kinds();
    return {all.begin(), all.end()};
  }
  std::set<ra::TransformKind> subset;
  for (const auto& name : split_csv(s)) subset.insert(ra::kind_from_name(name));
  return subset;
}

// Common dataset options shared by the experiment subcommands.
struct DataOpts {
  int train_size = 200;
  int val_size = 500;
  int image_size = 16;
  int classes = 2;
  double noise = 0.1;
  uint64_t data_seed = 1;
  std::string cifar_dir;

  void attach(CLI::App* cmd) {
    cmd->add_option("--train-size", train_size);
    cmd->add_option("--val-size", val_size);
    cmd->add_option("--image-size", image_size);
    cmd->add_option("--classes", classes);
    cmd->add_option("--noise", noise);
    cmd->add_option("--data-seed", data_seed);
    cmd->add_option("--cifar", cifar_dir, "CIFAR-10 binary directory (default: synthetic shapes)");
  }

  std::pair<ra::Dataset, ra::Dataset> load() const {
    if (!cifar_dir.empty()) {
      ra::Dataset all = ra::read_cifar10_bin(cifar_dir);
      if (static_cast<int>(all.size()) < train_size + val_size)
        throw UsageError("cifar: not enough examples for requested split");
      ra::Dataset train, val;
      train.num_classes = val.num_classes = 10;
      for (int i = 0; i < train_size; ++i) {
        train.images.push_back(all.images[i]);
        train.labels.push_back(all.labels[i]);
      }
      for (int i = 0; i < val_size; ++i) {
        val.images.push_back(all.images[train_size + i]);
        val.labels.push_back(all.labels[train_size + i]);
      }
      return {train, val};
    }
    ra::SyntheticShapesParams p;
    p.image_size = image_size;
    p.classes = classes;
    p.noise_std = noise;
    p.count = train_size;
    p.seed = data_seed;
    ra::Dataset train = ra::gen_synthetic_shapes(p);
    p.count = val_size;
    p.seed = ra::DeterministicRng::mix(data_seed + 1);
    ra::Dataset val = ra::gen_synthetic_shapes(p);
    return {train, val};
  }

  json to_json() const {
    json j;
    j["train_size"] = train_size;
    j["val_size"] = val_size;
    j["image_size"] = image_size;
    j["classes"] = classes;
    j["noise"] = noise;
    j["data_seed"] = data_seed;
    j["cifar"] = cifar_dir;
    return j;
  }
};

fs::path resolve_out_dir(std::string out, const std::string& command) {
  if (out.empty()) {
    std::time_t now = std::time(nullptr);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", std::localtime(&now));
    out = "runs/" + command + "-" + buf;
  }
  fs::create_directories(out);
  return out;
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const std::vector<std::string>& argv, const json& resolved) {
  json m;
  m["version"] = 1;
  m["command"] = command;
  m["argv"] = argv;
  m["resolved"] = resolved;
  write_file_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

const std::vector<std::pair<std::string, double>> kGoldenLevels = {
    {"0", 0.0}, {"5", 5.0}, {"10", 10.0}};

constexpr uint64_t kGoldenRngKey = 777;

int run_golden_gen(const std::string& out, bool force) {
  fs::create_directories(out);
  const fs::path dir(out);
  std::vector<fs::path> targets;
  targets.push_back(dir / "seed_8x8.ppm");
  for (auto k : ra::all_transform_kinds())
    for (const auto& [tag, lv] : kGoldenLevels) {
      (void)lv;
      targets.push_back(dir / ("golden_" + ra::kind_name(k) + "_" + tag + ".ppm"));
    }
  targets.push_back(dir / "golden_policy_n2_m9_seed42.ppm");
  if (!force)
    for (const auto& t : targets)
      if (fs::exists(t))
        throw UsageError("golden-gen: " + t.string() + " exists (use --force)");

  const ra::ImageBuffer seed = ra::oracle::seed_image_8x8();
  ra::save_image(seed, (dir / "seed_8x8.ppm").string());
  for (auto k : ra::all_transform_kinds()) {
    for (const auto& [tag, lv] : kGoldenLevels) {
      ra::DeterministicRng rng = ra::DeterministicRng(kGoldenRngKey)
                                     .split(static_cast<uint64_t>(k), static_cast<uint64_t>(lv));
      ra::ImageBuffer g = ra::oracle::apply(seed, k, ra::Level(lv), rng);
      ra::save_image(g, (dir / ("golden_" + ra::kind_name(k) + "_" + tag + ".ppm")).string());
    }
  }
  ra::RandAugmentConfig cfg;
  cfg.n = 2;
  cfg.schedule = ra::MagnitudeSchedule::constant(9);
  cfg.seed = 42;
  ra::ImageBuffer pg = ra::oracle::augment(seed, cfg, 0, 1, 0);
  ra::save_image(pg, (dir / "golden_policy_n2_m9_seed42.ppm").string());
  std::cout << "golden-gen: wrote " << targets.size() << " files to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RandAugment engine: policy sampling, transforms, search, density matching"};
  app.require_subcommand(1);
  std::vector<std::string> raw_argv(argv + 1, argv + argc);

  // ---- apply ----
  auto* apply = app.add_subcommand("apply", "augment one image");
  std::string in_path, out_path, subset_arg, schedule_arg;
  int n = 2;
  double m = 9.0;
  uint64_t seed = 0, image_index = 0;
  long step = 0, total_steps = 1;
  apply->add_option("--input", in_path)->required();
  apply->add_option("--output", out_path)->required();
  apply->add_option("--n", n);
  apply->add_option("--m", m);
  apply->add_option("--seed", seed);
  apply->add_option("--subset", subset_arg);
  apply->add_option("--schedule", schedule_arg);
  apply->add_option("--step", step);
  apply->add_option("--total-steps", total_steps);
  apply->add_option("--image-index", image_index);

  // ---- sample ----
  auto* sample = app.add_subcommand("sample", "print one sampled policy realization");
  sample->add_option("--n", n);
  sample->add_option("--m", m);
  sample->add_option("--seed", seed)->required();
  sample->add_option("--subset", subset_arg);
  sample->add_option("--schedule", schedule_arg);
  sample->add_option("--step", step);
  sample->add_option("--total-steps", total_steps);
  sample->add_option("--image-index", image_index);

  // ---- grid-search ----
  auto* grid = app.add_subcommand("grid-search", "grid over (N, M)");
  std::string n_list = "1,2,3", m_list = "4,5,7,9,11", seeds_list = "0,1,2,3,4";
  std::string out_dir;
  int epochs = 10, jobs = 1;
  double lr = 0.5;
  DataOpts grid_data;
  grid->add_option("--n-list", n_list);
  grid->add_option("--m-list", m_list);
  grid->add_option("--seeds", seeds_list);
  grid->add_option("--epochs", epochs);
  grid->add_option("--lr", lr);
  grid->add_option("--jobs", jobs);
  grid->add_option("--out", out_dir);
  grid_data.attach(grid);

  // ---- ablate ----
  auto* ablate = app.add_subcommand("ablate", "random-subset transform ablation");
  int samples = 200, size_lo = 1, size_hi = 14;
  DataOpts ablate_data;
  ablate->add_option("--samples", samples);
  ablate->add_option("--size-lo", size_lo);
  ablate->add_option("--size-hi", size_hi);
  ablate->add_option("--seed", seed);
  ablate->add_option("--epochs", epochs);
  ablate->add_option("--lr", lr);
  ablate->add_option("--out", out_dir);
  ablate_data.attach(ablate);

  // ---- mag-sweep ----
  auto* sweep = app.add_subcommand("mag-sweep", "single-transform magnitude sweep");
  std::string kind_arg = "rotate", levels_arg = "0,1,2,3,4,5,6,7,8,9,10";
  double base_level = 4.0;
  DataOpts sweep_data;
  sweep->add_option("--kind", kind_arg);
  sweep->add_option("--levels", levels_arg);
  sweep->add_option("--base-level", base_level);
  sweep->add_option("--seed", seed);
  sweep->add_option("--epochs", epochs);
  sweep->add_option("--lr", lr);
  sweep->add_option("--out", out_dir);
  sweep_data.attach(sweep);

  // ---- density-train ----
  auto* density = app.add_subcommand("density-train", "learn per-transform probabilities");
  int steps = 200, batch_size = 32, slots = 2;
  double xi = 0.01, epsilon = 1e-3, alpha_lr = 0.5, model_lr = 0.5, dm = 5.0;
  bool second_order = false;
  DataOpts density_data;
  density->add_option("--steps", steps);
  density->add_option("--xi", xi);
  density->add_option("--epsilon", epsilon);
  density->add_option("--alpha-lr", alpha_lr);
  density->add_option("--model-lr", model_lr);
  density->add_option("--batch-size", batch_size);
  density->add_option("--m", dm);
  density->add_option("--slots", slots);
  density->add_option("--seed", seed);
  density->add_flag("--second-order", second_order);
  density->add_option("--out", out_dir);
  density_data.attach(density);

  // ---- dataset-gen ----
  auto* dataset = app.add_subcommand("dataset-gen", "write a synthetic shapes dataset");
  int count = 200, image_size = 16, classes = 2;
  double noise = 0.1;
  dataset->add_option("--count", count);
  dataset->add_option("--image-size", image_size);
  dataset->add_option("--classes", classes);
  dataset->add_option("--noise", noise);
  dataset->add_option("--seed", seed);
  dataset->add_option("--out", out_dir);

  // ---- golden-gen ----
  auto* golden = app.add_subcommand("golden-gen", "regenerate the golden corpus (oracle)");
  std::string golden_out = "goldens";
  bool force = false;
  golden->add_option("--out", golden_out);
  golden->add_flag("--force", force);

  // ---- rerun ----
  auto* rerun = app.add_subcommand("rerun", "re-execute a run from its manifest");
  std::string manifest_path;
  std::string rerun_out;
  rerun->add_option("--manifest", manifest_path)->required();
  rerun->add_option("--out", rerun_out, "override the output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*apply) {
      ra::RandAugmentConfig cfg;
      cfg.n = n;
      cfg.schedule = parse_schedule_arg(schedule_arg, m);
      cfg.subset = parse_subset_arg(subset_arg);
      cfg.seed = seed;
      ra::ImageBuffer img = ra::load_image(in_path);
      ra::ImageBuffer out = ra::augment_image(img, cfg, step, total_steps, image_index);
      ra::save_image(out, out_path);
      json resolved;
      resolved["config"] = json::parse(ra::serialize_config(cfg));
      resolved["input"] = in_path;
      resolved["output"] = out_path;
      resolved["step"] = step;
      resolved["total_steps"] = total_steps;
      resolved["image_index"] = image_index;
      json mj;
      mj["version"] = 1;
      mj["command"] = "apply";
      mj["argv"] = raw_argv;
      mj["resolved"] = resolved;
      write_file_atomic(out_path + ".manifest.json", mj.dump(2) + "\n");
      return 0;
    }

    if (*sample) {
      ra::RandAugmentConfig cfg;
      cfg.n = n;
      cfg.schedule = parse_schedule_arg(schedule_arg, m);
      cfg.subset = parse_subset_arg(subset_arg);
      cfg.seed = seed;
      ra::DeterministicRng rng = ra::DeterministicRng(cfg.seed).split(
          static_cast<uint64_t>(step), image_index);
      ra::PolicyRealization r = ra::sample_policy(cfg, step, total_steps, rng);
      std::cout << ra::serialize_realization(r);
      return 0;
    }

    if (*grid) {
      const fs::path dir = resolve_out_dir(out_dir, "grid-search");
      auto [train, val] = grid_data.load();
      ra::ClassifierEvaluator eval(std::move(train), std::move(val), epochs, lr);
      ra::GridSpec spec;
      spec.n_candidates = parse_ints(n_list);
      spec.m_candidates = parse_doubles(m_list);
      spec.seeds = parse_u64s(seeds_list);
      ra::GridResult result = ra::grid_search(spec, eval, jobs);
      write_file_atomic(dir / "grid.csv", ra::grid_csv(result));
      write_file_atomic(dir / "summary.txt", ra::grid_summary(result));
      json resolved;
      resolved["n_list"] = spec.n_candidates;
      resolved["m_list"] = spec.m_candidates;
      resolved["seeds"] = spec.seeds;
      resolved["epochs"] = epochs;
      resolved["lr"] = lr;
      resolved["jobs"] = jobs;
      resolved["data"] = grid_data.to_json();
      write_manifest(dir, "grid-search", raw_argv, resolved);
      std::cout << ra::grid_summary(result);
      return 0;
    }

    if (*ablate) {
      const fs::path dir = resolve_out_dir(out_dir, "ablate");
      auto [train, val] = ablate_data.load();
      ra::ClassifierEvaluator eval(std::move(train), std::move(val), epochs, lr);
      auto samples_v = ra::run_ablation(samples, size_lo, size_hi, eval,
                                        ra::DeterministicRng(seed), seed);
      ra::AblationReport report = ra::per_transform_delta(samples_v);
      write_file_atomic(dir / "ablation.csv", ra::ablation_csv(report));
      write_file_atomic(dir / "ablation_curve.csv", ra::ablation_curve_csv(report));
      json resolved;
      resolved["samples"] = samples;
      resolved["size_lo"] = size_lo;
      resolved["size_hi"] = size_hi;
      resolved["seed"] = seed;
      resolved["epochs"] = epochs;
      resolved["lr"] = lr;
      resolved["subset_sampling"] = "size uniform in [lo,hi], kinds uniform without replacement";
      resolved["data"] = ablate_data.to_json();
      write_manifest(dir, "ablate", raw_argv, resolved);
      std::cout << ra::ablation_csv(report);
      return 0;
    }

    if (*sweep) {
      const fs::path dir = resolve_out_dir(out_dir, "mag-sweep");
      auto [train, val] = sweep_data.load();
      ra::ClassifierEvaluator eval(std::move(train), std::move(val), epochs, lr);
      ra::RandAugmentConfig base;
      base.n = 3;
      ra::SweepResult result = ra::magnitude_sweep(
          ra::kind_from_name(kind_arg), parse_doubles(levels_arg), base_level, eval,
          base, seed);
      write_file_atomic(dir / "sweep.csv", ra::sweep_csv(result));
      std::ostringstream summary;
      summary << "kind: " << ra::kind_name(result.kind) << "\n"
              << "base_level: " << result.base_level << "\n"
              << "best_level: " << result.best_level << "\n"
              << "gap: " << result.gap << "\n";
      write_file_atomic(dir / "summary.txt", summary.str());
      json resolved;
      resolved["kind"] = kind_arg;
      resolved["levels"] = parse_doubles(levels_arg);
      resolved["base_level"] = base_level;
      resolved["seed"] = seed;
      resolved["epochs"] = epochs;
      resolved["lr"] = lr;
      resolved["data"] = sweep_data.to_json();
      write_manifest(dir, "mag-sweep", raw_argv, resolved);
      std::cout << summary.str();
      return 0;
    }

    if (*density) {
      const fs::path dir = resolve_out_dir(out_dir, "density-train");
      auto [train, val] = density_data.load();
      ra::AlphaMatrix alpha(ra::kNumTransformKinds, slots);
      ra::DensityTrainConfig cfg;
      cfg.bilevel.xi = xi;
      cfg.bilevel.epsilon = epsilon;
      cfg.bilevel.alpha_lr = alpha_lr;
      cfg.model_lr = model_lr;
      cfg.batch_size = batch_size;
      cfg.m = dm;
      cfg.seed = seed;
      cfg.use_second_order = second_order;
      ra::DensityResult result = ra::train_density(alpha, train, val, steps, cfg);
      write_file_atomic(dir / "trace.csv", ra::density_trace_csv(result));
      json alpha_j;
      for (int j = 0; j < result.alpha.n; ++j) {
        json slot = json::object();
        auto probs = result.alpha.slot_probs(j);
        for (int i = 0; i < result.alpha.k; ++i)
          slot[ra::kind_name(static_cast<ra::TransformKind>(i))] = probs[i];
        alpha_j.push_back(slot);
      }
      write_file_atomic(dir / "alpha.json", alpha_j.dump(2) + "\n");
      json resolved;
      resolved["steps"] = steps;
      resolved["xi"] = xi;
      resolved["epsilon"] = epsilon;
      resolved["alpha_lr"] = alpha_lr;
      resolved["model_lr"] = model_lr;
      resolved["batch_size"] = batch_size;
      resolved["m"] = dm;
      resolved["slots"] = slots;
      resolved["seed"] = seed;
      resolved["second_order"] = second_order;
      resolved["update_schedule"] = "alternating: one model SGD step, one alpha step";
      resolved["data"] = density_data.to_json();
      write_manifest(dir, "density-train", raw_argv, resolved);
      std::cout << "density-train: wrote trace.csv and alpha.json to " << dir << "\n";
      return 0;
    }

    if (*dataset) {
      const fs::path dir = resolve_out_dir(out_dir, "dataset-gen");
      ra::SyntheticShapesParams p;
      p.count = count;
      p.image_size = image_size;
      p.classes = classes;
      p.noise_std = noise;
      p.seed = seed;
      ra::Dataset d = ra::gen_synthetic_shapes(p);
      std::ostringstream labels;
      labels << "index,label\n";
      for (size_t i = 0; i < d.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "img_%05zu.ppm", i);
        ra::save_image(d.images[i], (dir / name).string());
        labels << i << "," << d.labels[i] << "\n";
      }
      write_file_atomic(dir / "labels.csv", labels.str());
      json resolved;
      resolved["count"] = count;
      resolved["image_size"] = image_size;
      resolved["classes"] = classes;
      resolved["noise"] = noise;
      resolved["seed"] = seed;
      write_manifest(dir, "dataset-gen", raw_argv, resolved);
      std::cout << "dataset-gen: wrote " << d.size() << " images to " << dir << "\n";
      return 0;
    }

    if (*golden) return run_golden_gen(golden_out, force);

    if (*rerun) {
      std::ifstream in(manifest_path);
      if (!in) throw ra::IoError("rerun: cannot open " + manifest_path);
      json mj = json::parse(in);
      if (!mj.contains("argv") || !mj["argv"].is_array())
        throw UsageError("rerun: manifest has no argv record");
      std::vector<std::string> args = mj["argv"].get<std::vector<std::string>>();
      if (!rerun_out.empty()) {
        for (size_t i = 0; i + 1 < args.size(); ++i)
          if (args[i] == "--out") args[i + 1] = rerun_out;
      }
      std::string cmdline = "\"" + std::string(argv[0]) + "\"";
      for (const auto& a : args) cmdline += " \"" + a + "\"";
      return std::system(cmdline.c_str()) == 0 ? 0 : 2;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
