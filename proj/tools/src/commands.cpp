#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "cli.hpp"
#include "dlcf/batching.hpp"
#include "dlcf/checkpoint.hpp"
#include "dlcf/dataset.hpp"
#include "dlcf/errors.hpp"
#include "dlcf/key_value.hpp"
#include "dlcf/metrics.hpp"
#include "dlcf/model.hpp"
#include "dlcf/trainer.hpp"
#include "dlcf/vocab.hpp"
#include "run_config.hpp"

namespace dlcf::cli {
namespace {

namespace fs = std::filesystem;

// Input text that cannot be turned into an example.
class InputError : public Error {
 public:
  using Error::Error;
};

void require_file(const fs::path& path, const char* what) {
  if (!fs::is_regular_file(path)) throw ConfigError(std::string(what) + " does not exist: " + path.string());
}

void write_file(const fs::path& path, std::string_view content) {
  std::ofstream os(path, std::ios::binary);
  os.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!os) throw Error("cannot write " + path.string());
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

std::string matrix_csv(const Tensor& m) {
  std::string s;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) s += ',';
      s += format_double(m.at(i, j));
    }
    s += '\n';
  }
  return s;
}

struct LoadedModel {
  Checkpoint ckpt;
  DebertaLcfModel model;
};

LoadedModel load_model(const fs::path& path) {
  require_file(path, "checkpoint");
  Checkpoint ckpt = read_checkpoint(path);
  DebertaLcfModel model = restore_model(ckpt);
  return {std::move(ckpt), std::move(model)};
}

// A single sentence/aspect pair resolved against the first occurrence.
struct Query {
  TokenizedAnnotation annotation;
  std::size_t occurrences = 0;
};

Query make_query(const std::string& text, const std::string& aspect) {
  if (aspect.empty()) throw InputError("aspect must not be empty");
  const std::size_t first = text.find(aspect);
  if (first == std::string::npos) throw InputError("aspect '" + aspect + "' not found in text");
  Query q;
  for (std::size_t pos = first; pos != std::string::npos; pos = text.find(aspect, pos + aspect.size()))
    ++q.occurrences;
  RawAnnotation raw;
  raw.sentence = text;
  raw.term = aspect;
  raw.char_from = utf8_length(std::string_view(text).substr(0, first));
  raw.char_to = raw.char_from + utf8_length(aspect);
  q.annotation = tokenize_annotation(raw);
  return q;
}

void print_query(std::ostream& out, const Query& q) {
  out << "aspect_from=" << q.annotation.span.char_from << '\n'
      << "aspect_to=" << q.annotation.span.char_to << '\n'
      << "aspect_occurrences=" << q.occurrences << '\n';
  if (q.occurrences > 1) out << "note=first occurrence used\n";
}

int cmd_stats(const std::vector<std::string>& paths, const std::string& format, std::ostream& out) {
  const DatasetFormat f = parse_dataset_format(format);
  for (const auto& p : paths) require_file(p, "dataset");
  LabelCounts total;
  for (const auto& p : paths) {
    const LabelCounts c = dataset_stats(load_dataset(p, f));
    out << p << ": positive " << c.positive << ", negative " << c.negative << ", neutral "
        << c.neutral << ", total " << c.total();
    if (c.conflict_dropped) out << " (conflict dropped " << c.conflict_dropped << ")";
    out << '\n';
    total += c;
  }
  if (paths.size() > 1) {
    out << "all: positive " << total.positive << ", negative " << total.negative << ", neutral "
        << total.neutral << ", total " << total.total() << '\n';
  }
  return kExitOk;
}

int cmd_train(const std::string& config_path, const std::string& out_override, std::ostream& out) {
  RunConfig rc = load_run_config(config_path);
  if (!out_override.empty()) rc.output_dir = fs::absolute(out_override).lexically_normal();

  const auto tokenized = tokenize_dataset(load_dataset(rc.train_path, rc.train_format));
  if (tokenized.empty()) throw InputError("training set has no usable annotations");
  const Vocab vocab = Vocab::build(tokenized, rc.min_count);
  const auto examples = encode_examples(tokenized, vocab);
  auto [train_set, holdout] = split_holdout(examples, rc.holdout_fraction, rc.train.seed);

  rc.model.vocab_size = vocab.size();
  DebertaLcfModel model = DebertaLcfModel::build(rc.model);
  out << "train_examples=" << train_set.size() << '\n'
      << "holdout_examples=" << holdout.size() << '\n'
      << "vocab_size=" << vocab.size() << '\n'
      << "parameters=" << model.parameter_count() << '\n';

  const TrainResult result = train(model, train_set, rc.train, holdout, [&](const EpochRecord& r) {
    out << "epoch=" << r.epoch << " loss=" << format_fixed(r.mean_loss, 6)
        << " train_acc=" << format_fixed(r.train_accuracy, 4);
    if (r.holdout_macro_f1) out << " holdout_f1=" << format_fixed(*r.holdout_macro_f1, 4);
    out << std::endl;
  });

  fs::create_directories(rc.output_dir);
  save_checkpoint(model, vocab, rc.output_dir / "model.ckpt");
  write_file(rc.output_dir / "history.tsv", format_history(result.history));
  write_file(rc.output_dir / "resolved.cfg", rc.to_text());
  out << "best_epoch=" << result.best_epoch << '\n';

  if (!rc.test_path.empty()) {
    const auto test = encode_examples(tokenize_dataset(load_dataset(rc.test_path, rc.test_format)), vocab);
    const std::string metrics = format_metrics(evaluate(model, test));
    write_file(rc.output_dir / "test_metrics.txt", metrics);
    out << metrics;
  }
  out << "output_dir=" << rc.output_dir.string() << '\n';
  return kExitOk;
}

int cmd_eval(const std::string& ckpt_path, const std::string& dataset, const std::string& format,
             std::ostream& out) {
  const DatasetFormat f = parse_dataset_format(format);
  require_file(dataset, "dataset");
  const LoadedModel m = load_model(ckpt_path);
  const auto examples = encode_examples(tokenize_dataset(load_dataset(dataset, f)), m.ckpt.vocab);
  if (examples.empty()) throw InputError("dataset has no usable annotations");
  out << format_metrics(evaluate(m.model, examples));
  return kExitOk;
}

int cmd_predict(const std::string& ckpt_path, const std::string& text, const std::string& aspect,
                std::ostream& out) {
  const LoadedModel m = load_model(ckpt_path);
  const Query q = make_query(text, aspect);
  const Prediction p = predict(m.model, encode_example(q.annotation, m.ckpt.vocab));
  out << "label=" << to_string(p.label) << '\n';
  for (std::size_t c = 0; c < kNumClasses; ++c)
    out << "p_" << to_string(static_cast<Polarity>(c)) << '=' << format_double(p.probabilities[c]) << '\n';
  print_query(out, q);
  return kExitOk;
}

int cmd_dump_attention(const std::string& ckpt_path, const std::string& text,
                       const std::string& aspect, const std::string& out_dir, std::ostream& out) {
  const LoadedModel m = load_model(ckpt_path);
  const Query q = make_query(text, aspect);
  const Example ex = encode_example(q.annotation, m.ckpt.vocab);
  const Example* one[] = {&ex};
  ForwardTrace trace;
  const Tensor logits = m.model.forward(make_batch(one), nullptr, &trace);
  const ForwardTrace::Entry& e = trace.examples.at(0);

  const fs::path dir(out_dir);
  fs::create_directories(dir);
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& content) {
    write_file(dir / name, content);
    written.push_back(name);
  };

  // Token labels for the local ([CLS] s [SEP]) and global (+ aspect [SEP]) rows.
  const auto& toks = q.annotation.tokens;
  std::vector<std::string> local{"[CLS]"};
  for (const auto& t : toks) local.push_back(t.text);
  local.push_back("[SEP]");
  std::vector<std::string> global = local;
  for (std::size_t i = q.annotation.span.token_start; i <= q.annotation.span.token_end; ++i)
    global.push_back(toks[i].text);
  global.push_back("[SEP]");

  std::string tokens = "position,global,local\n";
  for (std::size_t i = 0; i < global.size(); ++i) {
    tokens += std::to_string(i) + ',' + csv_field(global[i]) + ',';
    if (i < local.size()) tokens += csv_field(local[i]);
    tokens += '\n';
  }
  emit("tokens.csv", tokens);

  auto dump_layers = [&](const std::string& prefix, const std::vector<AttentionTrace>& layers) {
    for (std::size_t l = 0; l < layers.size(); ++l)
      for (std::size_t h = 0; h < layers[l].head_weights.size(); ++h)
        emit(prefix + "_layer" + std::to_string(l) + "_head" + std::to_string(h) + ".csv",
             matrix_csv(layers[l].head_weights[h]));
  };
  dump_layers("global", e.global_layers);
  dump_layers("local", e.local_layers);
  for (std::size_t h = 0; h < e.fusion.head_weights.size(); ++h)
    emit("fusion_head" + std::to_string(h) + ".csv", matrix_csv(e.fusion.head_weights[h]));

  std::string srd = "position,token,srd\n";
  for (std::size_t i = 0; i < e.srd.size(); ++i)
    srd += std::to_string(i) + ',' + csv_field(toks[i].text) + ',' + std::to_string(e.srd.values[i]) + '\n';
  emit("srd.csv", srd);

  const int alpha = m.model.config().alpha;
  const std::size_t n = e.srd.size();
  const Tensor cdw = cdw_weights(e.srd, alpha, n);
  std::string lcf = "position,token,srd,cdm,cdw,applied\n";
  for (std::size_t i = 0; i < n; ++i) {
    lcf += std::to_string(i) + ',' + csv_field(toks[i].text) + ',' + std::to_string(e.srd.values[i]) +
           ',' + (e.srd.values[i] <= alpha ? "1" : "0") + ',' + format_double(cdw.at(i, 0)) + ',' +
           format_double(e.lcf_weights.at(i + 1, 0)) + '\n';
  }
  emit("lcf.csv", lcf);

  const Prediction p = prediction_from_logits(logits.data());
  out << "label=" << to_string(p.label) << '\n'
      << "alpha=" << alpha << '\n'
      << "lcf_mode=" << to_string(m.model.config().mode) << '\n';
  print_query(out, q);
  for (const auto& w : written) out << "wrote=" << (dir / w).string() << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"DeBERTa-LCF aspect sentiment classifier", "dlcf"};
  app.require_subcommand(1);

  std::vector<std::string> stats_paths;
  std::string format = "semeval";
  auto* stats = app.add_subcommand("stats", "Label counts of dataset files");
  stats->add_option("paths", stats_paths, "Dataset files")->required();
  stats->add_option("--format", format, "semeval or twitter");

  std::string config, out_dir;
  auto* train_cmd = app.add_subcommand("train", "Train a model from a run config");
  train_cmd->add_option("--config", config, "Run config file")->required();
  train_cmd->add_option("--out", out_dir, "Override output_dir");

  std::string ckpt, dataset;
  auto* eval = app.add_subcommand("eval", "Accuracy and macro-F1 of a checkpoint");
  eval->add_option("--ckpt", ckpt, "Checkpoint file")->required();
  eval->add_option("--dataset", dataset, "Dataset file")->required();
  eval->add_option("--format", format, "semeval or twitter");

  std::string text, aspect;
  auto* pred = app.add_subcommand("predict", "Classify one aspect in a sentence");
  pred->add_option("--ckpt", ckpt, "Checkpoint file")->required();
  pred->add_option("--text", text, "Sentence")->required();
  pred->add_option("--aspect", aspect, "Aspect term (first occurrence)")->required();

  auto* dump = app.add_subcommand("dump-attention", "Write attention and LCF CSVs for one sentence");
  dump->add_option("--ckpt", ckpt, "Checkpoint file")->required();
  dump->add_option("--text", text, "Sentence")->required();
  dump->add_option("--aspect", aspect, "Aspect term (first occurrence)")->required();
  dump->add_option("--out", out_dir, "Output directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*stats) return cmd_stats(stats_paths, format, out);
    if (*train_cmd) return cmd_train(config, out_dir, out);
    if (*eval) return cmd_eval(ckpt, dataset, format, out);
    if (*pred) return cmd_predict(ckpt, text, aspect, out);
    if (*dump) return cmd_dump_attention(ckpt, text, aspect, out_dir, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const LoadError& e) {
    err << "error: " << e.what() << '\n';
    return kExitCheckpoint;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const IntegrityError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const AlignmentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace dlcf::cli
