#include "run_config.hpp"

#include <functional>
#include <map>
#include <sstream>

#include "dlcf/errors.hpp"
#include "dlcf/key_value.hpp"

namespace dlcf::cli {
namespace {

namespace fs = std::filesystem;

fs::path resolve(const std::string& value, const fs::path& base) {
  fs::path p(value);
  if (p.is_relative()) p = base / p;
  return p.lexically_normal();
}

std::string path_text(const fs::path& p) { return p.empty() ? std::string() : p.string(); }

}  // namespace

void RunConfig::validate() const {
  if (train_path.empty()) throw ConfigError("train_path is required");
  if (!fs::is_regular_file(train_path))
    throw ConfigError("train_path does not exist: " + train_path.string());
  if (!test_path.empty() && !fs::is_regular_file(test_path))
    throw ConfigError("test_path does not exist: " + test_path.string());
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0))
    throw ConfigError("holdout_fraction must be in [0, 1)");
  if (min_count == 0) throw ConfigError("min_count must be >= 1");
  train.validate();
  ModelConfig probe = model;
  probe.vocab_size = std::max<std::size_t>(probe.vocab_size, 5);
  probe.validate();
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  os << "train_path = " << path_text(train_path) << '\n'
     << "train_format = " << to_string(train_format) << '\n';
  if (!test_path.empty()) {
    os << "test_path = " << path_text(test_path) << '\n'
       << "test_format = " << to_string(test_format) << '\n';
  }
  os << "output_dir = " << path_text(output_dir) << '\n'
     << "holdout_fraction = " << format_double(holdout_fraction) << '\n'
     << "min_count = " << min_count << '\n'
     << "layers = " << model.layers << '\n'
     << "heads = " << model.heads << '\n'
     << "d_model = " << model.d_model << '\n'
     << "d_ff = " << model.d_ff << '\n'
     << "max_relative_distance = " << model.max_relative_distance << '\n'
     << "dropout = " << format_double(model.dropout) << '\n'
     << "alpha = " << model.alpha << '\n'
     << "lcf_mode = " << to_string(model.mode) << '\n'
     << "p2p = " << (model.p2p ? "true" : "false") << '\n'
     << "model_seed = " << model.seed << '\n'
     << "epochs = " << train.epochs << '\n'
     << "batch_size = " << train.batch_size << '\n'
     << "learning_rate = " << format_double(train.adam.learning_rate) << '\n'
     << "beta1 = " << format_double(train.adam.beta1) << '\n'
     << "beta2 = " << format_double(train.adam.beta2) << '\n'
     << "eps = " << format_double(train.adam.eps) << '\n'
     << "weight_decay = " << format_double(train.adam.weight_decay) << '\n'
     << "seed = " << train.seed << '\n'
     << "patience = " << train.patience.value_or(0) << '\n';
  return os.str();
}

RunConfig parse_run_config(std::string_view text, const fs::path& base_dir) {
  RunConfig rc;
  using Setter = std::function<void(const KeyValue&)>;
  const std::map<std::string, Setter, std::less<>> setters = {
      {"train_path", [&](const KeyValue& kv) { rc.train_path = resolve(kv.value, base_dir); }},
      {"train_format", [&](const KeyValue& kv) { rc.train_format = parse_dataset_format(kv.value); }},
      {"test_path", [&](const KeyValue& kv) { rc.test_path = resolve(kv.value, base_dir); }},
      {"test_format", [&](const KeyValue& kv) { rc.test_format = parse_dataset_format(kv.value); }},
      {"output_dir", [&](const KeyValue& kv) { rc.output_dir = resolve(kv.value, base_dir); }},
      {"holdout_fraction", [&](const KeyValue& kv) { rc.holdout_fraction = parse_double(kv); }},
      {"min_count", [&](const KeyValue& kv) { rc.min_count = parse_size(kv); }},
      {"layers", [&](const KeyValue& kv) { rc.model.layers = parse_size(kv); }},
      {"heads", [&](const KeyValue& kv) { rc.model.heads = parse_size(kv); }},
      {"d_model", [&](const KeyValue& kv) { rc.model.d_model = parse_size(kv); }},
      {"d_ff", [&](const KeyValue& kv) { rc.model.d_ff = parse_size(kv); }},
      {"max_relative_distance",
       [&](const KeyValue& kv) { rc.model.max_relative_distance = parse_int(kv); }},
      {"dropout", [&](const KeyValue& kv) { rc.model.dropout = parse_double(kv); }},
      {"alpha", [&](const KeyValue& kv) { rc.model.alpha = parse_int(kv); }},
      {"lcf_mode", [&](const KeyValue& kv) { rc.model.mode = parse_lcf_mode(kv.value); }},
      {"p2p", [&](const KeyValue& kv) { rc.model.p2p = parse_bool(kv); }},
      {"model_seed", [&](const KeyValue& kv) { rc.model.seed = parse_u64(kv); }},
      {"epochs", [&](const KeyValue& kv) { rc.train.epochs = parse_size(kv); }},
      {"batch_size", [&](const KeyValue& kv) { rc.train.batch_size = parse_size(kv); }},
      {"learning_rate", [&](const KeyValue& kv) { rc.train.adam.learning_rate = parse_double(kv); }},
      {"beta1", [&](const KeyValue& kv) { rc.train.adam.beta1 = parse_double(kv); }},
      {"beta2", [&](const KeyValue& kv) { rc.train.adam.beta2 = parse_double(kv); }},
      {"eps", [&](const KeyValue& kv) { rc.train.adam.eps = parse_double(kv); }},
      {"weight_decay", [&](const KeyValue& kv) { rc.train.adam.weight_decay = parse_double(kv); }},
      {"seed", [&](const KeyValue& kv) { rc.train.seed = parse_u64(kv); }},
      {"patience",
       [&](const KeyValue& kv) {
         const std::size_t p = parse_size(kv);
         rc.train.patience = p ? std::optional<std::size_t>(p) : std::nullopt;
       }},
  };

  for (const KeyValue& kv : parse_key_values(text)) {
    const auto it = setters.find(kv.key);
    if (it == setters.end())
      throw ConfigError("unknown config key '" + kv.key + "' (line " + std::to_string(kv.line) + ")");
    it->second(kv);
  }
  rc.validate();
  return rc;
}

RunConfig load_run_config(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw ConfigError("config file does not exist: " + path.string());
  const fs::path base = fs::absolute(path).parent_path();
  return parse_run_config(read_text_file(path), base);
}

}  // namespace dlcf::cli
