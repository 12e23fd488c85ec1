#include "msi/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "msi/errors.hpp"
#include "msi/seeds.hpp"

namespace msi {

std::string fmt_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace {

constexpr const char* kCheckpointKind = "msinterp.checkpoint";

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void bad_line(int line, const std::string& what) {
  throw ParseError("config line " + std::to_string(line) + ": " + what);
}

int parse_int(const std::string& value, int line) {
  int out = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
    bad_line(line, "expected an integer, got '" + value + "'");
  }
  return out;
}

double parse_double(const std::string& value, int line) {
  double out = 0.0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
    bad_line(line, "expected a number, got '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& value, int line) {
  if (value == "true") {
    return true;
  }
  if (value == "false") {
    return false;
  }
  bad_line(line, "expected true or false, got '" + value + "'");
}

const char* phi_name(PhiKind k) {
  switch (k) {
    case PhiKind::gaussian:
      return "gaussian";
    case PhiKind::cosine:
      return "cosine";
    case PhiKind::linear:
      return "linear";
  }
  return "gaussian";
}

const char* embed_source_name(EmbedSource s) {
  return s == EmbedSource::shared_first_layer ? "shared_first_layer"
                                              : "dedicated_random";
}

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value,
               int line) {
  ModelConfig& m = cfg.model;
  if (key == "alpha") {
    m.scheme.alpha = parse_double(value, line);
    if (m.scheme.alpha < 0.0) {
      bad_line(line, "alpha must be >= 0");
    }
  } else if (key == "batch_size") {
    m.batch_size = parse_int(value, line);
    if (m.batch_size < 1) {
      bad_line(line, "batch_size must be >= 1");
    }
  } else if (key == "embed_source") {
    if (value == "shared_first_layer") {
      m.scheme.embed_source = EmbedSource::shared_first_layer;
    } else if (value == "dedicated_random") {
      m.scheme.embed_source = EmbedSource::dedicated_random;
    } else {
      bad_line(line, "embed_source must be shared_first_layer or dedicated_random");
    }
  } else if (key == "epochs") {
    m.epochs = parse_int(value, line);
    if (m.epochs < 0) {
      bad_line(line, "epochs must be >= 0");
    }
  } else if (key == "hidden_dim") {
    m.hidden_dim = parse_int(value, line);
    if (m.hidden_dim < 1) {
      bad_line(line, "hidden_dim must be >= 1");
    }
  } else if (key == "keep_ratio") {
    m.scheme.keep_ratio = parse_double(value, line);
    if (!(m.scheme.keep_ratio > 0.0 && m.scheme.keep_ratio <= 1.0)) {
      bad_line(line, "keep_ratio must be in (0, 1]");
    }
  } else if (key == "lr") {
    m.lr = parse_double(value, line);
    if (!(m.lr > 0.0)) {
      bad_line(line, "lr must be > 0");
    }
  } else if (key == "normalize_embedding_weights") {
    m.scheme.normalize_embedding_weights = parse_bool(value, line);
  } else if (key == "num_classes") {
    m.num_classes = parse_int(value, line);
    if (m.num_classes < 2) {
      bad_line(line, "num_classes must be >= 2");
    }
  } else if (key == "num_layers") {
    m.num_layers = parse_int(value, line);
    if (m.num_layers < 1) {
      bad_line(line, "num_layers must be >= 1");
    }
  } else if (key == "phi") {
    if (value == "gaussian") {
      m.scheme.phi_kind = PhiKind::gaussian;
    } else if (value == "cosine") {
      m.scheme.phi_kind = PhiKind::cosine;
    } else if (value == "linear") {
      m.scheme.phi_kind = PhiKind::linear;
    } else {
      bad_line(line, "phi must be gaussian, cosine, or linear");
    }
  } else if (key == "train_ratio" || key == "val_ratio" || key == "test_ratio") {
    const double r = parse_double(value, line);
    if (!(r >= 0.0 && r <= 1.0)) {
      bad_line(line, key + " must be in [0, 1]");
    }
    cfg.split_ratios[key == "train_ratio" ? 0 : key == "val_ratio" ? 1 : 2] = r;
  } else {
    bad_line(line, "unknown key '" + key + "'");
  }
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash_pos = raw.find('#');
    if (hash_pos != std::string::npos) {
      raw.erase(hash_pos);
    }
    const std::string stripped = trim(raw);
    if (stripped.empty()) {
      continue;
    }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      bad_line(line, "expected key=value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty()) {
      bad_line(line, "expected key=value");
    }
    apply_key(cfg, key, value, line);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("load_config: cannot open '" + path + "'");
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

std::string resolved_config_text(const RunConfig& cfg) {
  const ModelConfig& m = cfg.model;
  std::ostringstream os;
  os << "alpha=" << fmt_double(m.scheme.alpha) << '\n';
  os << "batch_size=" << m.batch_size << '\n';
  os << "embed_source=" << embed_source_name(m.scheme.embed_source) << '\n';
  os << "epochs=" << m.epochs << '\n';
  os << "hidden_dim=" << m.hidden_dim << '\n';
  os << "keep_ratio=" << fmt_double(m.scheme.keep_ratio) << '\n';
  os << "lr=" << fmt_double(m.lr) << '\n';
  os << "normalize_embedding_weights="
     << (m.scheme.normalize_embedding_weights ? "true" : "false") << '\n';
  os << "num_classes=" << m.num_classes << '\n';
  os << "num_layers=" << m.num_layers << '\n';
  os << "phi=" << phi_name(m.scheme.phi_kind) << '\n';
  os << "test_ratio=" << fmt_double(cfg.split_ratios[2]) << '\n';
  os << "train_ratio=" << fmt_double(cfg.split_ratios[0]) << '\n';
  os << "val_ratio=" << fmt_double(cfg.split_ratios[1]) << '\n';
  return os.str();
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = fnv1a64(resolved_config_text(cfg));
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = "0123456789abcdef"[h & 0xf];
    h >>= 4;
  }
  return out;
}

void save_checkpoint(const ParamStore& ps, const RunConfig& cfg, std::uint64_t seed,
                     const std::string& path) {
  nlohmann::ordered_json doc;
  doc["kind"] = kCheckpointKind;
  doc["config_hash"] = config_hash(cfg);
  doc["config"] = resolved_config_text(cfg);
  doc["seed"] = seed;
  doc["step"] = ps.step();
  nlohmann::ordered_json params;
  for (const std::string& name : ps.names()) {
    const Tensor& t = ps.value(name);
    nlohmann::ordered_json entry;
    entry["rows"] = t.rows;
    entry["cols"] = t.cols;
    entry["values"] = t.data;
    params[name] = std::move(entry);
  }
  doc["params"] = std::move(params);

  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("save_checkpoint: cannot open '" + path + "' for writing");
  }
  out << doc.dump() << '\n';
  if (!out) {
    throw DataError("save_checkpoint: write failed for '" + path + "'");
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("load_checkpoint: cannot open '" + path + "'");
  }
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("load_checkpoint: '" + path + "': " + e.what());
  }
  if (!doc.is_object() || !doc.contains("kind") || doc["kind"] != kCheckpointKind) {
    throw ParseError("load_checkpoint: '" + path + "' is not a checkpoint file");
  }
  for (const char* key : {"config_hash", "config", "seed", "step", "params"}) {
    if (!doc.contains(key)) {
      throw ParseError("load_checkpoint: '" + path + "': missing field \"" +
                       std::string(key) + "\"");
    }
  }
  if (!doc["config"].is_string() || !doc["config_hash"].is_string() ||
      !doc["seed"].is_number() || !doc["step"].is_number_integer() ||
      !doc["params"].is_object()) {
    throw ParseError("load_checkpoint: '" + path + "': malformed fields");
  }

  Checkpoint ck;
  ck.config = parse_config_text(doc["config"].get<std::string>());
  ck.hash = doc["config_hash"].get<std::string>();
  if (config_hash(ck.config) != ck.hash) {
    throw DataError("load_checkpoint: '" + path +
                    "': config does not match its recorded hash");
  }
  ck.seed = doc["seed"].get<std::uint64_t>();
  ck.step = doc["step"].get<std::int64_t>();

  for (const auto& [name, entry] : doc["params"].items()) {
    if (!entry.is_object() || !entry.contains("rows") || !entry.contains("cols") ||
        !entry.contains("values") || !entry["values"].is_array()) {
      throw ParseError("load_checkpoint: '" + path + "': malformed tensor \"" +
                       name + "\"");
    }
    const int rows = entry["rows"].get<int>();
    const int cols = entry["cols"].get<int>();
    if (rows < 0 || cols < 0 ||
        entry["values"].size() != static_cast<std::size_t>(rows) * cols) {
      throw ParseError("load_checkpoint: '" + path + "': tensor \"" + name +
                       "\" shape does not match its value count");
    }
    Tensor t(rows, cols);
    for (std::size_t i = 0; i < t.data.size(); ++i) {
      if (!entry["values"][i].is_number()) {
        throw ParseError("load_checkpoint: '" + path + "': tensor \"" + name +
                         "\" holds a non-numeric value");
      }
      t.data[i] = entry["values"][i].get<double>();
    }
    ck.params.add(name, std::move(t));
  }
  ck.params.set_step(ck.step);
  return ck;
}

namespace {

nlohmann::ordered_json mean_std(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) {
    mean += x;
  }
  mean /= n;
  double var = 0.0;
  for (double x : xs) {
    var += (x - mean) * (x - mean);
  }
  var /= n;
  nlohmann::ordered_json out;
  out["mean"] = mean;
  out["std"] = std::sqrt(var);
  return out;
}

}  // namespace

std::string metrics_report_json(const std::string& dataset_name,
                                const std::string& hash,
                                const std::vector<SeedRun>& runs) {
  if (runs.empty()) {
    throw ArgumentError("metrics_report_json: no runs to aggregate");
  }
  std::vector<double> cls, acc, rec, prec, f1;
  nlohmann::ordered_json seeds = nlohmann::ordered_json::array();
  nlohmann::ordered_json counts = nlohmann::ordered_json::array();
  for (const SeedRun& r : runs) {
    seeds.push_back(r.seed);
    counts.push_back(r.explanation.qualifying_count);
    cls.push_back(r.classification_accuracy);
    acc.push_back(r.explanation.accuracy);
    rec.push_back(r.explanation.recall);
    prec.push_back(r.explanation.precision);
    f1.push_back(r.explanation.f1);
  }
  nlohmann::ordered_json doc;
  doc["dataset"] = dataset_name;
  doc["config_hash"] = hash;
  doc["seeds"] = std::move(seeds);
  doc["classification_accuracy"] = mean_std(cls);
  nlohmann::ordered_json expl;
  expl["accuracy"] = mean_std(acc);
  expl["recall"] = mean_std(rec);
  expl["precision"] = mean_std(prec);
  expl["f1"] = mean_std(f1);
  doc["explanation"] = std::move(expl);
  doc["qualifying_counts"] = std::move(counts);
  return doc.dump(2);
}

std::string training_log_csv(const std::vector<TrainLogEntry>& log) {
  std::string out = "epoch,train_loss,val_accuracy\n";
  for (const TrainLogEntry& e : log) {
    out += std::to_string(e.epoch);
    out += ',';
    out += fmt_double(e.train_loss);
    out += ',';
    out += fmt_double(e.val_accuracy);
    out += '\n';
  }
  return out;
}

}  // namespace msi
