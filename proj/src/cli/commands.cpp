#include "coseg/cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "coseg/cli/manifest.hpp"
#include "coseg/corpus/characters.hpp"
#include "coseg/corpus/splits.hpp"
#include "coseg/error.hpp"
#include "coseg/evaluation/metrics.hpp"
#include "coseg/extraction/experience.hpp"
#include "coseg/model/config.hpp"
#include "coseg/text.hpp"
#include "coseg/training/example.hpp"
#include "coseg/training/trainer.hpp"

namespace coseg::cli {

using corpus::Story;
using corpus::Vocabulary;
using nlohmann::ordered_json;

namespace {

fs::path split_file(const fs::path& dir, const std::string& name) {
  return dir / ("split_" + name + ".jsonl");
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path.string());
  return f;
}

fs::path sidecar_manifest(const fs::path& out) {
  fs::path p = out;
  p += ".manifest.json";
  return p;
}

void write_experiences(std::ostream& out, const std::vector<Story>& stories) {
  for (const Story& story : stories) {
    const auto gt = extraction::ground_truth_character(story);
    for (const auto& seq : extraction::build_experience_sequences(story)) {
      ordered_json j;
      j["story_id"] = story.id;
      j["character_id"] = seq.character.canonical_id;
      j["S"] = seq.count();
      j["ground_truth"] = gt && gt->canonical_id == seq.character.canonical_id;
      j["fallback"] = false;
      j["experiences"] = ordered_json::array();
      for (const auto& e : seq.experiences) j["experiences"].push_back(e.merged());
      out << j.dump() << '\n';
    }
    if (!gt) {
      auto subj = extraction::ending_subject(story);
      ordered_json j;
      j["story_id"] = story.id;
      j["character_id"] = subj ? corpus::character_key(*subj) : std::string("<none>");
      j["S"] = 0;
      j["ground_truth"] = true;
      j["fallback"] = true;
      j["experiences"] = ordered_json::array();
      out << j.dump() << '\n';
    }
  }
}

struct ResolvedConfig {
  model::ModelConfig model;
  training::TrainConfig train;
};

struct ConfigOverrides {
  std::optional<fs::path> config;
  std::optional<std::string> fusion;
  std::optional<std::string> breakpoints;
  std::size_t reference_dim = 512;
  std::optional<std::size_t> hidden_dim;
  std::optional<std::size_t> embed_dim;
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> seed;
  bool paper_scale = false;
};

std::vector<std::size_t> reference_breakpoints(const std::string& spec, std::size_t reference_dim,
                                               std::size_t hidden_dim) {
  if (spec == "all") return model::parse_breakpoints(spec, hidden_dim);
  return model::scale_breakpoints(model::parse_breakpoints(spec, reference_dim), reference_dim,
                                  hidden_dim);
}

ResolvedConfig resolve(const ConfigOverrides& o, std::size_t vocab_size) {
  KeyValues kv;
  if (o.config) kv = load_key_values(*o.config);
  ResolvedConfig r;
  r.model = o.paper_scale ? model::ModelConfig::paper_scale() : model::ModelConfig::read(kv);
  r.train = training::TrainConfig::read(kv);
  if (o.hidden_dim && *o.hidden_dim != r.model.hidden_dim) {
    r.model.breakpoints =
        model::scale_breakpoints(r.model.breakpoints, r.model.hidden_dim, *o.hidden_dim);
    r.model.hidden_dim = *o.hidden_dim;
  }
  if (o.embed_dim) r.model.embed_dim = *o.embed_dim;
  if (o.fusion) r.model.fusion = model::parse_fusion(*o.fusion);
  if (o.breakpoints) {
    r.model.breakpoints = reference_breakpoints(*o.breakpoints, o.reference_dim, r.model.hidden_dim);
  }
  if (o.seed) {
    r.train.seed = *o.seed;
  } else if (!kv.count("seed")) {
    r.train.seed = default_seed(r.train.seed);
  }
  if (o.epochs) r.train.epochs = *o.epochs;
  r.model.vocab_size = vocab_size;
  r.model.validate();
  r.train.validate();
  return r;
}

std::vector<training::Example> sufficient_examples(const std::vector<const Story*>& stories,
                                                   const Vocabulary& vocab) {
  std::vector<training::Example> out;
  for (const Story* s : stories) {
    if (auto ex = training::make_example(*s, vocab, /*require_sufficient=*/true)) {
      out.push_back(std::move(*ex));
    }
  }
  return out;
}

training::FitResult train_run(const ResolvedConfig& cfg, const PreparedData& data,
                              const fs::path& out, bool resume,
                              const std::optional<fs::path>& embeddings, std::ostream& log) {
  model::CosegModel model(cfg.model, cfg.train.seed);
  if (embeddings) {
    std::size_t found = 0;
    model.set_embeddings(corpus::load_pretrained_embeddings(*embeddings, data.vocab, cfg.model.embed_dim,
                                                            cfg.train.seed, cfg.model.init_scale,
                                                            &found));
    log << "embeddings: " << found << " of " << data.vocab.size() << " tokens found\n";
  }
  const auto train = sufficient_examples(data.split("train"), data.vocab);
  const auto val = sufficient_examples(data.split("validation"), data.vocab);
  if (train.empty()) throw InputError("no sufficient training stories in " + data.dir.string());
  if (val.empty()) throw InputError("no sufficient validation stories in " + data.dir.string());

  fs::create_directories(out);
  training::FitOptions fo;
  fo.out_dir = out;
  fo.resume = resume;
  return training::fit(model, train, val, cfg.train, fo);
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

std::uint64_t default_seed(std::uint64_t fallback) {
  const char* env = std::getenv("COSEG_SEED");
  if (!env || !*env) return fallback;
  try {
    return parse_size(env, "COSEG_SEED");
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

// ---------------------------------------------------------------- data

PreparedData PreparedData::load(const fs::path& dir) {
  PreparedData d;
  d.dir = dir;
  d.stories = corpus::load_stories_jsonl(dir / "stories.jsonl");
  for (auto& s : d.stories) corpus::annotate_characters(s);
  const fs::path vocab = dir / "vocab.tsv";
  if (!fs::exists(vocab)) throw InputError("missing " + vocab.string());
  d.vocab = Vocabulary::load(vocab);
  for (const auto& name : kSplitNames) {
    const fs::path p = split_file(dir, name);
    if (!fs::exists(p)) throw InputError("missing " + p.string());
    d.splits[name] = corpus::read_split_manifest(p);
  }
  return d;
}

const Story* PreparedData::find(const std::string& story_id) const {
  for (const auto& s : stories) {
    if (s.id == story_id) return &s;
  }
  return nullptr;
}

std::vector<const Story*> PreparedData::split(const std::string& name) const {
  auto it = splits.find(name);
  if (it == splits.end()) throw InputError("unknown split '" + name + "'");
  std::vector<const Story*> out;
  for (const auto& id : it->second) {
    const Story* s = find(id);
    if (!s) throw InputError("split " + name + " names unknown story '" + id + "'");
    out.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------- prepare

int cmd_prepare(const PrepareOptions& o, std::ostream& log) {
  RunManifest manifest;
  manifest.command = "prepare";
  manifest.started = timestamp_now();
  manifest.seed = o.seed;

  std::vector<Story> stories;
  if (!o.stories && !o.conllu) throw InputError("prepare needs --stories or --conllu");
  if (o.stories) {
    stories = corpus::load_stories_jsonl(*o.stories);
    manifest.add_input(*o.stories);
  }
  if (o.conllu) {
    auto more = corpus::stories_from_conllu(corpus::load_conllu(*o.conllu), o.conllu->string());
    for (auto& s : more) stories.push_back(std::move(s));
    manifest.add_input(*o.conllu);
  }
  if (stories.empty()) throw InputError("no stories in input");

  std::vector<corpus::SplitCandidate> candidates;
  for (auto& s : stories) {
    corpus::annotate_characters(s);
    const auto gt = extraction::ground_truth_character(s);
    const std::size_t count = gt ? extraction::build_experience_sequence(s, *gt).count() : 0;
    candidates.push_back({s.id, count});
  }
  corpus::SplitOptions so;
  so.seed = o.seed;
  so.test_size = o.test_size;
  so.validation_size = o.validation_size;
  const corpus::Splits splits = corpus::build_splits(candidates, so);
  for (const auto& w : splits.warnings) log << "warning: " << w << '\n';

  fs::create_directories(o.out);
  {
    auto f = open_out(o.out / "stories.jsonl");
    corpus::write_stories_jsonl(f, stories);
  }
  manifest.add_output(o.out / "stories.jsonl");

  const std::map<std::string, const std::vector<std::string>*> lists = {
      {"train", &splits.train},
      {"validation", &splits.validation},
      {"sufficient_test", &splits.sufficient_test},
      {"inadequate_test", &splits.inadequate_test},
      {"excluded", &splits.excluded}};
  for (const auto& name : kSplitNames) {
    corpus::write_split_manifest(split_file(o.out, name), *lists.at(name));
    manifest.add_output(split_file(o.out, name));
  }

  std::map<std::string, const Story*> by_id;
  for (const auto& s : stories) by_id[s.id] = &s;
  std::vector<const Story*> train;
  for (const auto& id : splits.train) train.push_back(by_id.at(id));
  const Vocabulary vocab = Vocabulary::build(train, o.min_count);
  vocab.save(o.out / "vocab.tsv");
  manifest.add_output(o.out / "vocab.tsv");

  {
    auto f = open_out(o.out / "experiences.jsonl");
    write_experiences(f, stories);
  }
  manifest.add_output(o.out / "experiences.jsonl");

  manifest.config = {{"seed", std::to_string(o.seed)},
                     {"test_size", std::to_string(o.test_size)},
                     {"validation_size", std::to_string(o.validation_size)},
                     {"min_count", std::to_string(o.min_count)}};
  manifest.finished = timestamp_now();
  manifest.write(o.out / "manifest.json");

  log << "stories " << stories.size() << '\n';
  for (const auto& name : kSplitNames) log << name << ' ' << lists.at(name)->size() << '\n';
  log << "vocabulary " << vocab.size() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- extract

int cmd_extract(const ExtractOptions& o, std::ostream& log) {
  RunManifest manifest;
  manifest.command = "extract";
  manifest.started = timestamp_now();
  auto stories = corpus::load_stories_jsonl(o.stories);
  manifest.add_input(o.stories);
  for (auto& s : stories) corpus::annotate_characters(s);
  {
    auto f = open_out(o.out);
    write_experiences(f, stories);
  }
  manifest.add_output(o.out);
  manifest.finished = timestamp_now();
  manifest.write(sidecar_manifest(o.out));
  log << "extracted experiences for " << stories.size() << " stories\n";
  return kExitOk;
}

// ---------------------------------------------------------------- train

int cmd_train(const TrainOptions& o, std::ostream& log) {
  RunManifest manifest;
  manifest.command = "train";
  manifest.started = timestamp_now();
  const PreparedData data = PreparedData::load(o.data);

  ConfigOverrides co;
  co.config = o.config;
  co.fusion = o.fusion;
  co.breakpoints = o.breakpoints;
  co.reference_dim = o.reference_dim;
  co.hidden_dim = o.hidden_dim;
  co.embed_dim = o.embed_dim;
  co.epochs = o.epochs;
  co.seed = o.seed;
  co.paper_scale = o.paper_scale;
  const ResolvedConfig cfg = resolve(co, data.vocab.size());

  if (o.config) manifest.add_input(*o.config);
  manifest.add_input(o.data / "vocab.tsv");
  manifest.add_input(o.data / "stories.jsonl");
  manifest.add_input(split_file(o.data, "train"));
  manifest.add_input(split_file(o.data, "validation"));
  if (o.embeddings) manifest.add_input(*o.embeddings);

  log << "model: H=" << cfg.model.hidden_dim << " D=" << cfg.model.embed_dim
      << " V=" << cfg.model.vocab_size << " fusion=" << model::to_string(cfg.model.fusion)
      << " breakpoints=" << model::format_breakpoints(cfg.model.breakpoints) << '\n';
  const auto result = train_run(cfg, data, o.out, o.resume, o.embeddings, log);
  for (const auto& row : result.log) {
    log << "epoch " << row.epoch << " train_loss " << fmt(row.train_loss) << " val_ppl "
        << fmt(row.val_ppl) << " lr " << row.lr << '\n';
  }
  log << "best val_ppl " << fmt(result.best_val_ppl) << " at epoch " << result.best_epoch
      << (result.early_stopped ? " (early stop)" : "") << '\n';

  manifest.seed = cfg.train.seed;
  manifest.config = parse_key_values(training::run_config_text(cfg.model, cfg.train), "config");
  manifest.add_output(result.best_checkpoint);
  manifest.add_output(result.last_checkpoint);
  manifest.add_output(o.out / "train_log.csv");
  manifest.finished = timestamp_now();
  manifest.write(o.out / "manifest.json");
  return kExitOk;
}

// ---------------------------------------------------------------- generate

int cmd_generate(const GenerateOptions& o, std::ostream& log) {
  RunManifest manifest;
  manifest.command = "generate";
  manifest.started = timestamp_now();
  auto loaded = training::load_model_checkpoint(o.checkpoint);
  const PreparedData data = PreparedData::load(o.data);
  if (loaded.model.config().vocab_size != data.vocab.size()) {
    throw InputError("checkpoint vocabulary size " + std::to_string(loaded.model.config().vocab_size) +
                     " does not match " + (o.data / "vocab.tsv").string());
  }
  manifest.add_input(o.checkpoint);
  manifest.add_input(o.data / "stories.jsonl");
  manifest.add_input(o.data / "vocab.tsv");

  std::vector<const Story*> selected;
  if (o.story_id) {
    const Story* s = data.find(*o.story_id);
    if (!s) throw InputError("unknown story id '" + *o.story_id + "'");
    selected.push_back(s);
  } else if (o.all) {
    for (const auto& s : data.stories) selected.push_back(&s);
  } else {
    throw InputError("generate needs --story-id or --all");
  }
  const std::size_t max_len = o.max_len.value_or(loaded.model.config().max_decode_len);

  std::vector<evaluation::GenerationRecord> records;
  for (const Story* s : selected) {
    for (auto& r : evaluation::generate_all(loaded.model, *s, data.vocab, max_len)) {
      if (o.character) {
        const corpus::Character* c = s->find_character(r.character_id);
        const std::string want = to_lower(*o.character);
        const bool match = r.character_id == *o.character ||
                           (c && c->surface_forms().count(want) > 0);
        if (!match) continue;
      }
      records.push_back(std::move(r));
    }
  }
  if (o.character && records.empty()) {
    throw InputError("unknown character '" + *o.character + "'");
  }

  for (const auto& r : records) {
    log << r.story_id << '\t' << r.character_id << "\tS=" << r.experience_count
        << (r.fallback ? "\t[fallback]" : "") << '\t' << join(r.ending(), " ") << '\n';
  }
  if (o.out) {
    {
      auto f = open_out(*o.out);
      evaluation::write_generations_jsonl(f, records);
    }
    manifest.seed = loaded.train.seed;
    manifest.config = loaded.config;
    manifest.add_output(*o.out);
    manifest.finished = timestamp_now();
    manifest.write(sidecar_manifest(*o.out));
  }
  return kExitOk;
}

// ---------------------------------------------------------------- evaluate

int cmd_evaluate(const EvaluateOptions& o, std::ostream& log) {
  RunManifest manifest;
  manifest.command = "evaluate";
  manifest.started = timestamp_now();
  auto loaded = training::load_model_checkpoint(o.checkpoint);
  const PreparedData data = PreparedData::load(o.data);
  if (loaded.model.config().vocab_size != data.vocab.size()) {
    throw InputError("checkpoint vocabulary does not match " + (o.data / "vocab.tsv").string());
  }
  manifest.add_input(o.checkpoint);
  manifest.add_input(o.data / "stories.jsonl");
  manifest.add_input(o.data / "vocab.tsv");

  std::vector<evaluation::MetricsReport> reports;
  std::vector<evaluation::GenerationRecord> records;
  for (const auto& name : o.splits) {
    const auto stories = data.split(name);
    manifest.add_input(split_file(o.data, name));
    if (stories.empty()) {
      log << "warning: split " << name << " is empty; skipped\n";
      continue;
    }
    auto ev = evaluation::evaluate_split(loaded.model, stories, data.vocab, name, o.model_name,
                                         loaded.model.config().max_decode_len, o.bleu_mode);
    reports.push_back(ev.report);
    for (auto& r : ev.records) records.push_back(std::move(r));
  }
  {
    auto f = open_out(o.out);
    evaluation::write_metrics_csv_header(f);
    for (const auto& r : reports) evaluation::write_metrics_csv_row(f, r);
  }
  manifest.add_output(o.out);
  if (o.generations) {
    auto f = open_out(*o.generations);
    evaluation::write_generations_jsonl(f, records);
    manifest.add_output(*o.generations);
  }
  evaluation::print_metrics_table(log, reports);

  manifest.seed = loaded.train.seed;
  manifest.config = loaded.config;
  manifest.finished = timestamp_now();
  manifest.write(sidecar_manifest(o.out));
  return kExitOk;
}

// ---------------------------------------------------------------- ablate

int cmd_ablate(const AblateOptions& o, std::ostream& log) {
  RunManifest manifest;
  manifest.command = "ablate";
  manifest.started = timestamp_now();
  const PreparedData data = PreparedData::load(o.data);

  ConfigOverrides co;
  co.config = o.config;
  co.reference_dim = o.reference_dim;
  co.hidden_dim = o.hidden_dim;
  co.epochs = o.epochs;
  co.seed = o.seed;
  const ResolvedConfig base = resolve(co, data.vocab.size());
  const std::size_t H = base.model.hidden_dim;

  // Validate and dedupe every combination before training any.
  struct Run {
    std::string combination;
    std::vector<std::size_t> breakpoints;
  };
  std::vector<Run> runs;
  for (const auto& c : o.combinations) {
    std::vector<std::size_t> bp;
    try {
      bp = reference_breakpoints(c, o.reference_dim, H);
      model::ModelConfig probe = base.model;
      probe.breakpoints = bp;
      probe.validate();
    } catch (const std::invalid_argument& e) {
      throw InputError("invalid combination '" + c + "': " + e.what());
    }
    auto dup = std::find_if(runs.begin(), runs.end(), [&](const Run& r) { return r.breakpoints == bp; });
    if (dup != runs.end()) {
      log << "warning: combination '" << c << "' duplicates '" << dup->combination << "'; skipped\n";
      continue;
    }
    runs.push_back({c, bp});
  }

  if (o.config) manifest.add_input(*o.config);
  manifest.add_input(o.data / "vocab.tsv");
  manifest.add_input(o.data / "stories.jsonl");

  std::vector<AblationRow> rows;
  const auto val = data.split("validation");
  for (const auto& run : runs) {
    ResolvedConfig cfg = base;
    cfg.model.breakpoints = run.breakpoints;
    const fs::path dir = o.out / ("bp_" + model::format_breakpoints(run.breakpoints));
    log << "combination " << run.combination << " -> " << model::format_breakpoints(run.breakpoints)
        << " @H=" << H << '\n';
    const auto result = train_run(cfg, data, dir, false, std::nullopt, log);
    auto best = training::load_model_checkpoint(result.best_checkpoint);
    const auto ev = evaluation::evaluate_split(best.model, val, data.vocab, "validation",
                                               run.combination, cfg.model.max_decode_len);
    AblationRow row;
    row.combination = run.combination;
    row.scaled = model::format_breakpoints(run.breakpoints);
    row.val_ppl = ev.report.ppl;
    row.bleu1 = ev.report.bleu1;
    row.bleu2 = ev.report.bleu2;
    row.epochs = result.epochs_run;
    rows.push_back(row);
    manifest.add_output(result.best_checkpoint);
    manifest.add_output(result.last_checkpoint);
    manifest.add_output(dir / "train_log.csv");
    log << "  val_ppl " << fmt(row.val_ppl) << " bleu1 " << fmt(row.bleu1, 2) << '\n';
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const AblationRow& a, const AblationRow& b) { return a.val_ppl < b.val_ppl; });
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].rank = i + 1;

  const fs::path csv = o.out / "ablation.csv";
  {
    auto f = open_out(csv);
    f << "rank,combination,breakpoints,val_ppl,bleu1,bleu2,epochs\n";
    for (const auto& r : rows) {
      f << r.rank << ",CoSEG(" << r.combination << ")," << r.scaled << ',' << fmt(r.val_ppl) << ','
        << fmt(r.bleu1) << ',' << fmt(r.bleu2) << ',' << r.epochs << '\n';
    }
  }
  manifest.add_output(csv);

  log << "rank  combination                  val_ppl   BLEU-1  BLEU-2\n";
  for (const auto& r : rows) {
    char line[160];
    std::snprintf(line, sizeof(line), "%4zu  %-27s %8.3f %8.2f %7.2f\n", r.rank,
                  ("CoSEG(" + r.combination + ")").c_str(), r.val_ppl, r.bleu1, r.bleu2);
    log << line;
  }

  manifest.seed = base.train.seed;
  manifest.config = parse_key_values(training::run_config_text(base.model, base.train), "config");
  manifest.config["reference_dim"] = std::to_string(o.reference_dim);
  manifest.finished = timestamp_now();
  manifest.write(o.out / "manifest.json");
  return kExitOk;
}

std::vector<AblationRow> read_ablation_csv(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open " + path.string());
  std::string line;
  std::getline(f, line);
  std::vector<AblationRow> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 7) throw InputError(path.string() + ": bad row '" + line + "'");
    AblationRow r;
    r.rank = parse_size(cells[0], "rank");
    r.combination = cells[1];
    r.scaled = cells[2];
    r.val_ppl = parse_double(cells[3], "val_ppl");
    r.bleu1 = parse_double(cells[4], "bleu1");
    r.bleu2 = parse_double(cells[5], "bleu2");
    r.epochs = parse_size(cells[6], "epochs");
    rows.push_back(r);
  }
  return rows;
}

}  // namespace coseg::cli
