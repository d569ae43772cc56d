#include "ocl/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ocl/errors.hpp"

namespace ocl {

const char* to_string(Method m) {
  switch (m) {
    case Method::finetune: return "finetune";
    case Method::er: return "er";
    case Method::agem: return "agem";
    case Method::mir: return "mir";
    case Method::gss: return "gss";
    case Method::offline: return "offline";
  }
  return "?";
}

const char* to_string(OptimizerKind o) {
  return o == OptimizerKind::sgd ? "sgd" : "kfac";
}

const char* to_string(Trick t) {
  switch (t) {
    case Trick::none: return "none";
    case Trick::lb: return "lb";
    case Trick::ss: return "ss";
    case Trick::rv: return "rv";
    case Trick::ncm: return "ncm";
  }
  return "?";
}

const char* to_string(TaskKind k) {
  return k == TaskKind::class_incremental ? "class_incremental" : "domain_incremental";
}

const char* to_string(TransformKind t) {
  switch (t) {
    case TransformKind::noise: return "noise";
    case TransformKind::occlusion: return "occlusion";
    case TransformKind::blur: return "blur";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "finetune") return Method::finetune;
  if (s == "er") return Method::er;
  if (s == "agem") return Method::agem;
  if (s == "mir") return Method::mir;
  if (s == "gss") return Method::gss;
  if (s == "offline") return Method::offline;
  throw ConfigError("unknown method \"" + s + "\"");
}

OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "kfac") return OptimizerKind::kfac;
  throw ConfigError("unknown optimizer \"" + s + "\"");
}

Trick trick_from_string(const std::string& s) {
  if (s == "none") return Trick::none;
  if (s == "lb") return Trick::lb;
  if (s == "ss") return Trick::ss;
  if (s == "rv") return Trick::rv;
  if (s == "ncm") return Trick::ncm;
  throw ConfigError("unknown trick \"" + s + "\"");
}

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "oci" || s == "class_incremental") return TaskKind::class_incremental;
  if (s == "odi" || s == "domain_incremental") return TaskKind::domain_incremental;
  throw ConfigError("unknown stream kind \"" + s + "\"");
}

TransformKind transform_from_string(const std::string& s) {
  if (s == "noise") return TransformKind::noise;
  if (s == "occlusion") return TransformKind::occlusion;
  if (s == "blur") return TransformKind::blur;
  throw UnknownKind("unknown transform \"" + s + "\"");
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& value, const std::string& origin) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(origin + ": cannot parse \"" + value + "\" as a number");
  }
}

std::size_t parse_count(const std::string& value, const std::string& origin) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size() || v < 0) throw std::invalid_argument(value);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ConfigError(origin + ": cannot parse \"" + value + "\" as a count");
  }
}

bool parse_flag(const std::string& value, const std::string& origin) {
  if (value == "0" || value == "false") return false;
  if (value == "1" || value == "true") return true;
  throw ConfigError(origin + ": cannot parse \"" + value + "\" as a flag (0/1)");
}

}  // namespace

void apply_config_key(ExperimentConfig& cfg, const std::string& key,
                      const std::string& value, const std::string& origin) {
  if (key == "method") {
    cfg.method = method_from_string(value);
  } else if (key == "optimizer") {
    cfg.optimizer = optimizer_from_string(value);
  } else if (key == "trick") {
    cfg.trick = trick_from_string(value);
  } else if (key == "buffer_capacity") {
    cfg.buffer_capacity = parse_count(value, origin);
  } else if (key == "alpha") {
    cfg.alpha = parse_real(value, origin);
  } else if (key == "lambda") {
    cfg.lambda = parse_real(value, origin);
  } else if (key == "rho") {
    cfg.rho = parse_real(value, origin);
  } else if (key == "batch_size") {
    cfg.batch_size = parse_count(value, origin);
  } else if (key == "hidden_dims") {
    cfg.hidden_dims.clear();
    for (const std::string& part : split_list(value, ',')) {
      cfg.hidden_dims.push_back(parse_count(trim(part), origin));
    }
  } else if (key == "seeds") {
    cfg.seeds.clear();
    for (const std::string& part : split_list(value, ',')) {
      cfg.seeds.push_back(static_cast<std::uint64_t>(parse_count(trim(part), origin)));
    }
  } else if (key == "test_fraction") {
    cfg.test_fraction = parse_real(value, origin);
  } else if (key == "offline_epochs") {
    cfg.offline_epochs = parse_count(value, origin);
  } else if (key == "offline_batch") {
    cfg.offline_batch = parse_count(value, origin);
  } else if (key == "replay_batch") {
    cfg.replay_batch = parse_count(value, origin);
  } else if (key == "mir_candidates") {
    cfg.mir_candidates = parse_count(value, origin);
  } else if (key == "gss_refs") {
    cfg.gss_refs = parse_count(value, origin);
  } else if (key == "review_steps") {
    cfg.review_steps = parse_count(value, origin);
  } else if (key == "review_alpha") {
    cfg.review_alpha = parse_real(value, origin);
  } else if (key == "review_quota_cap") {
    cfg.review_quota_cap = parse_count(value, origin);
  } else if (key == "allow_gss_oci") {
    cfg.allow_gss_oci = parse_flag(value, origin);
  } else if (key == "dump_buffer") {
    cfg.dump_buffer = parse_flag(value, origin);
  } else if (key == "diagnostics") {
    cfg.diagnostics = parse_flag(value, origin);
  } else if (key == "dataset") {
    cfg.stream.dataset_path = value;
  } else if (key == "stream_kind") {
    cfg.stream.kind = task_kind_from_string(value);
  } else if (key == "num_tasks") {
    cfg.stream.num_tasks = parse_count(value, origin);
  } else if (key == "classes_per_task") {
    cfg.stream.classes_per_task = parse_count(value, origin);
  } else if (key == "transform") {
    cfg.stream.transform = transform_from_string(value);
  } else if (key == "image_width") {
    cfg.stream.image_width = parse_count(value, origin);
  } else if (key == "synthetic_classes") {
    cfg.stream.synthetic_classes = parse_count(value, origin);
  } else if (key == "synthetic_per_class") {
    cfg.stream.synthetic_per_class = parse_count(value, origin);
  } else if (key == "synthetic_dim") {
    cfg.stream.synthetic_dim = parse_count(value, origin);
  } else if (key == "synthetic_separation") {
    cfg.stream.synthetic_separation = parse_real(value, origin);
  } else {
    throw ConfigError(origin + ": unknown key \"" + key + "\"");
  }
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    apply_config_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)),
                     origin + ":" + std::to_string(lineno));
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.alpha <= 0.0) throw ConfigError("alpha must be positive");
  if (cfg.lambda < 0.0) throw ConfigError("lambda must be nonnegative");
  if (cfg.rho < 0.0 || cfg.rho >= 1.0) throw ConfigError("rho must be in [0, 1)");
  if (cfg.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (cfg.seeds.empty()) throw ConfigError("at least one seed is required");
  if (cfg.test_fraction <= 0.0 || cfg.test_fraction >= 1.0) {
    throw ConfigError("test_fraction must be in (0, 1)");
  }
  if (cfg.mir_candidates == 0) throw ConfigError("mir_candidates must be positive");
  if (cfg.gss_refs == 0) throw ConfigError("gss_refs must be positive");
  if (cfg.uses_buffer() && cfg.buffer_capacity == 0) {
    throw ConfigError("buffered methods need buffer_capacity > 0");
  }
  if (cfg.uses_buffer() && cfg.effective_replay_batch() > cfg.buffer_capacity) {
    throw ConfigError("replay_batch must not exceed buffer_capacity");
  }
  if ((cfg.trick == Trick::ncm || cfg.trick == Trick::rv) && !cfg.uses_buffer()) {
    throw ConfigError("tricks ncm and rv need a replay buffer (er, agem, mir or gss)");
  }
  if (cfg.method == Method::offline && cfg.trick != Trick::none) {
    throw ConfigError("the offline baseline does not combine with tricks");
  }
  if (cfg.method == Method::offline && (cfg.offline_epochs == 0 || cfg.offline_batch == 0)) {
    throw ConfigError("offline_epochs and offline_batch must be positive");
  }
  if (cfg.method == Method::gss && cfg.stream.kind == TaskKind::class_incremental &&
      !cfg.allow_gss_oci) {
    throw ConfigError(
        "gss is restricted to domain-incremental streams; set allow_gss_oci = 1 to override");
  }
  if (cfg.stream.kind == TaskKind::domain_incremental) {
    if (cfg.stream.num_tasks == 0 ||
        cfg.stream.num_tasks > domain_schedule(cfg.stream.transform).size()) {
      throw ConfigError("domain-incremental num_tasks must be in [1, " +
                        std::to_string(domain_schedule(cfg.stream.transform).size()) + "]");
    }
    if (cfg.stream.transform != TransformKind::noise && cfg.stream.image_width == 0) {
      throw ConfigError("occlusion and blur need image_width");
    }
  } else {
    if (cfg.stream.num_tasks == 0 || cfg.stream.classes_per_task == 0) {
      throw ConfigError("num_tasks and classes_per_task must be positive");
    }
  }
  if (cfg.stream.dataset_path.empty()) {
    if (cfg.stream.synthetic_classes == 0 || cfg.stream.synthetic_per_class == 0 ||
        cfg.stream.synthetic_dim == 0) {
      throw ConfigError("synthetic dataset parameters must be positive");
    }
    if (cfg.stream.synthetic_separation < 0.0) {
      throw ConfigError("synthetic_separation must be >= 0");
    }
  }
}

namespace {

std::string fmt_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string config_echo(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "method = " << to_string(cfg.method) << "\n";
  out << "optimizer = " << to_string(cfg.optimizer) << "\n";
  out << "trick = " << to_string(cfg.trick) << "\n";
  out << "buffer_capacity = " << cfg.buffer_capacity << "\n";
  out << "alpha = " << fmt_real(cfg.alpha) << "\n";
  out << "lambda = " << fmt_real(cfg.lambda) << "\n";
  out << "rho = " << fmt_real(cfg.rho) << "\n";
  out << "batch_size = " << cfg.batch_size << "\n";
  out << "hidden_dims = ";
  for (std::size_t i = 0; i < cfg.hidden_dims.size(); ++i) {
    if (i) out << ",";
    out << cfg.hidden_dims[i];
  }
  out << "\n";
  out << "seeds = ";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    if (i) out << ",";
    out << cfg.seeds[i];
  }
  out << "\n";
  out << "test_fraction = " << fmt_real(cfg.test_fraction) << "\n";
  out << "offline_epochs = " << cfg.offline_epochs << "\n";
  out << "offline_batch = " << cfg.offline_batch << "\n";
  out << "replay_batch = " << cfg.replay_batch << "\n";
  out << "mir_candidates = " << cfg.mir_candidates << "\n";
  out << "gss_refs = " << cfg.gss_refs << "\n";
  out << "review_steps = " << cfg.review_steps << "\n";
  out << "review_alpha = " << fmt_real(cfg.review_alpha) << "\n";
  out << "review_quota_cap = " << cfg.review_quota_cap << "\n";
  out << "allow_gss_oci = " << (cfg.allow_gss_oci ? 1 : 0) << "\n";
  out << "dump_buffer = " << (cfg.dump_buffer ? 1 : 0) << "\n";
  out << "diagnostics = " << (cfg.diagnostics ? 1 : 0) << "\n";
  if (!cfg.stream.dataset_path.empty()) {
    out << "dataset = " << cfg.stream.dataset_path << "\n";
  } else {
    out << "synthetic_classes = " << cfg.stream.synthetic_classes << "\n";
    out << "synthetic_per_class = " << cfg.stream.synthetic_per_class << "\n";
    out << "synthetic_dim = " << cfg.stream.synthetic_dim << "\n";
    out << "synthetic_separation = " << fmt_real(cfg.stream.synthetic_separation) << "\n";
  }
  out << "stream_kind = " << to_string(cfg.stream.kind) << "\n";
  out << "num_tasks = " << cfg.stream.num_tasks << "\n";
  if (cfg.stream.kind == TaskKind::class_incremental) {
    out << "classes_per_task = " << cfg.stream.classes_per_task << "\n";
  } else {
    out << "transform = " << to_string(cfg.stream.transform) << "\n";
    out << "image_width = " << cfg.stream.image_width << "\n";
  }
  return out.str();
}

}  // namespace ocl
