#include "ra/policy.hpp"

#include <nlohmann/json.hpp>

using json = nlohmann::ordered_json;

namespace ra {

namespace {

void check_level_range(double v, const std::string& field) {
  if (!(v >= 0.0 && v <= 30.0))
    throw InvalidSchedule(field + " must be in [0, 30], got " + std::to_string(v));
}

}  // namespace

void MagnitudeSchedule::validate() const {
  switch (type) {
    case Type::kConstant:
      check_level_range(a, "m");
      break;
    case Type::kRandom:
      check_level_range(a, "lo");
      check_level_range(b, "hi");
      if (a > b) throw InvalidSchedule("random schedule requires lo <= hi");
      break;
    case Type::kLinear:
      check_level_range(a, "m_start");
      check_level_range(b, "m_end");
      break;
    case Type::kRandomIncreasingUpper:
      check_level_range(a, "lo");
      check_level_range(b, "hi_start");
      check_level_range(c, "hi_end");
      if (b > c) throw InvalidSchedule("requires hi_start <= hi_end");
      break;
  }
}

void RandAugmentConfig::validate() const {
  schedule.validate();
  if (n < 0 || n > 8) throw InvalidRange("config: n must be in [0, 8]");
  if (subset.empty()) throw EmptySubset("config: subset must be non-empty");
  for (const auto& [k, v] : level_overrides) {
    (void)k;
    if (!(v >= 0.0 && v <= 30.0))
      throw LevelOutOfRange("config: level override out of [0, 30]");
  }
  if (cutout_after && *cutout_after < 0)
    throw SizeOutOfRange("config: cutout_after must be >= 0");
}

double schedule_value(const MagnitudeSchedule& s, long step, long total_steps,
                      DeterministicRng& rng) {
  s.validate();
  if (total_steps < 1 || step < 0 || step > total_steps)
    throw InvalidRange("schedule_value: need 0 <= step <= total_steps, total >= 1");
  const double t = static_cast<double>(step) / static_cast<double>(total_steps);
  switch (s.type) {
    case MagnitudeSchedule::Type::kConstant:
      return s.a;
    case MagnitudeSchedule::Type::kRandom:
      return rng.uniform(s.a, s.b);
    case MagnitudeSchedule::Type::kLinear:
      return s.a + (s.b - s.a) * t;
    case MagnitudeSchedule::Type::kRandomIncreasingUpper:
      return rng.uniform(s.a, s.b + (s.c - s.b) * t);
  }
  throw Error("schedule_value: unreachable");
}

PolicyRealization sample_policy(const RandAugmentConfig& cfg, long step,
                                long total_steps, DeterministicRng& rng) {
  cfg.validate();
  // one schedule draw per image, then N kind draws with replacement
  const Level level(schedule_value(cfg.schedule, step, total_steps, rng));
  std::vector<TransformKind> kinds(cfg.subset.begin(), cfg.subset.end());
  PolicyRealization r;
  r.ops.reserve(cfg.n);
  for (int i = 0; i < cfg.n; ++i) {
    TransformKind k = kinds[rng.choice(kinds.size())];
    double lv = level.value;
    if (auto it = cfg.level_overrides.find(k); it != cfg.level_overrides.end())
      lv = it->second;
    r.ops.emplace_back(k, Level(lv));
  }
  return r;
}

ImageBuffer augment_image(const ImageBuffer& img, const RandAugmentConfig& cfg,
                          long step, long total_steps, uint64_t image_index) {
  cfg.validate();
  DeterministicRng rng =
      DeterministicRng(cfg.seed).split(static_cast<uint64_t>(step), image_index);
  ImageBuffer out = img;
  for (const auto& op : cfg.baseline) out = op_baseline(out, op, rng);
  const PolicyRealization r = sample_policy(cfg, step, total_steps, rng);
  for (const auto& [kind, level] : r.ops) out = apply_transform(out, kind, level, rng);
  if (cfg.cutout_after && *cfg.cutout_after > 0) {
    BaselineOp cut{BaselineOp::Which::kCutout, *cfg.cutout_after};
    out = op_baseline(out, cut, rng);
  }
  return out;
}

uint64_t policy_space_size(uint64_t k, uint64_t n) {
  if (k < 1) throw InvalidRange("policy_space_size: k must be >= 1");
  uint64_t result = 1;
  for (uint64_t i = 0; i < n; ++i) {
    if (result > UINT64_MAX / k) throw Overflow("policy_space_size: k^n exceeds 64 bits");
    result *= k;
  }
  return result;
}

namespace {

json schedule_to_json(const MagnitudeSchedule& s) {
  json j;
  switch (s.type) {
    case MagnitudeSchedule::Type::kConstant:
      j["type"] = "constant";
      j["m"] = s.a;
      break;
    case MagnitudeSchedule::Type::kRandom:
      j["type"] = "random";
      j["lo"] = s.a;
      j["hi"] = s.b;
      break;
    case MagnitudeSchedule::Type::kLinear:
      j["type"] = "linear";
      j["m_start"] = s.a;
      j["m_end"] = s.b;
      break;
    case MagnitudeSchedule::Type::kRandomIncreasingUpper:
      j["type"] = "random-increasing-upper";
      j["lo"] = s.a;
      j["hi_start"] = s.b;
      j["hi_end"] = s.c;
      break;
  }
  return j;
}

double get_num(const json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_number())
    throw ParseError("config: missing or non-numeric field \"" + key + "\"");
  return j[key].get<double>();
}

MagnitudeSchedule schedule_from_json(const json& j) {
  if (!j.contains("type") || !j["type"].is_string())
    throw ParseError("config: schedule needs a string \"type\"");
  const std::string t = j["type"].get<std::string>();
  MagnitudeSchedule s;
  if (t == "constant") {
    s = MagnitudeSchedule::constant(get_num(j, "m"));
  } else if (t == "random") {
    s = MagnitudeSchedule::random(get_num(j, "lo"), get_num(j, "hi"));
  } else if (t == "linear") {
    s = MagnitudeSchedule::linear(get_num(j, "m_start"), get_num(j, "m_end"));
  } else if (t == "random-increasing-upper") {
    s = MagnitudeSchedule::random_increasing_upper(get_num(j, "lo"),
                                                   get_num(j, "hi_start"),
                                                   get_num(j, "hi_end"));
  } else {
    throw ParseError("config: unknown schedule type \"" + t + "\"");
  }
  try {
    s.validate();
  } catch (const InvalidSchedule& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return s;
}

json baseline_to_json(const BaselineOp& op) {
  json j;
  switch (op.which) {
    case BaselineOp::Which::kFlipLR:
      j["op"] = "flip-lr";
      break;
    case BaselineOp::Which::kPadCrop:
      j["op"] = "pad-crop";
      j["pad"] = op.amount;
      break;
    case BaselineOp::Which::kCutout:
      j["op"] = "cutout";
      j["size"] = op.amount;
      break;
  }
  return j;
}

BaselineOp baseline_from_json(const json& j) {
  if (!j.contains("op") || !j["op"].is_string())
    throw ParseError("config: baseline entry needs a string \"op\"");
  const std::string op = j["op"].get<std::string>();
  if (op == "flip-lr") return {BaselineOp::Which::kFlipLR, 0};
  if (op == "pad-crop")
    return {BaselineOp::Which::kPadCrop, static_cast<int>(get_num(j, "pad"))};
  if (op == "cutout")
    return {BaselineOp::Which::kCutout, static_cast<int>(get_num(j, "size"))};
  throw ParseError("config: unknown baseline op \"" + op + "\"");
}

}  // namespace

std::string serialize_config(const RandAugmentConfig& cfg) {
  cfg.validate();
  json j;
  j["version"] = 1;
  j["n"] = cfg.n;
  j["schedule"] = schedule_to_json(cfg.schedule);
  json subset = json::array();
  for (TransformKind k : cfg.subset) subset.push_back(kind_name(k));
  j["subset"] = subset;
  j["seed"] = cfg.seed;
  json baseline = json::array();
  for (const auto& op : cfg.baseline) baseline.push_back(baseline_to_json(op));
  j["baseline"] = baseline;
  j["cutout_after"] = cfg.cutout_after ? json(*cfg.cutout_after) : json(nullptr);
  json overrides = json::object();
  for (const auto& [k, v] : cfg.level_overrides) overrides[kind_name(k)] = v;
  j["level_overrides"] = overrides;
  return j.dump(2) + "\n";
}

RandAugmentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!j.contains("version") || j["version"] != 1)
    throw ParseError("config: missing or unsupported \"version\" (expected 1)");
  RandAugmentConfig cfg;
  cfg.n = static_cast<int>(get_num(j, "n"));
  if (!j.contains("schedule")) throw ParseError("config: missing \"schedule\"");
  cfg.schedule = schedule_from_json(j["schedule"]);
  if (!j.contains("subset") || !j["subset"].is_array())
    throw ParseError("config: missing \"subset\" array");
  cfg.subset.clear();
  for (const auto& name : j["subset"]) {
    if (!name.is_string()) throw ParseError("config: subset entries must be strings");
    cfg.subset.insert(kind_from_name(name.get<std::string>()));
  }
  cfg.seed = j.contains("seed") && j["seed"].is_number()
                 ? j["seed"].get<uint64_t>()
                 : throw ParseError("config: missing numeric \"seed\"");
  cfg.baseline.clear();
  if (j.contains("baseline")) {
    if (!j["baseline"].is_array()) throw ParseError("config: \"baseline\" must be an array");
    for (const auto& b : j["baseline"]) cfg.baseline.push_back(baseline_from_json(b));
  }
  if (j.contains("cutout_after") && !j["cutout_after"].is_null())
    cfg.cutout_after = static_cast<int>(j["cutout_after"].get<double>());
  if (j.contains("level_overrides")) {
    for (const auto& [name, v] : j["level_overrides"].items()) {
      if (!v.is_number()) throw ParseError("config: override for \"" + name + "\" must be numeric");
      double lv = v.get<double>();
      if (!(lv >= 0.0 && lv <= 30.0))
        throw ParseError("config: override level for \"" + name + "\" out of [0, 30]");
      cfg.level_overrides[kind_from_name(name)] = lv;
    }
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
  return cfg;
}

std::string serialize_realization(const PolicyRealization& r) {
  json arr = json::array();
  for (const auto& [kind, level] : r.ops) {
    json op;
    op["op"] = kind_name(kind);
    op["level"] = level.value;
    arr.push_back(op);
  }
  return arr.dump(2) + "\n";
}

}  // namespace ra
