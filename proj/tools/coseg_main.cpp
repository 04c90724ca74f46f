#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "coseg/cli/commands.hpp"
#include "coseg/error.hpp"
#include "coseg/text.hpp"

namespace cli = coseg::cli;

int main(int argc, char** argv) {
  CLI::App app{"coseg: character-oriented story ending generation"};
  app.require_subcommand(1);

  cli::PrepareOptions prep;
  prep.seed = cli::default_seed(7);
  auto* p = app.add_subcommand("prepare", "Parse stories, build splits, vocabulary and experiences");
  p->add_option("--stories", prep.stories, "Stories JSONL")->check(CLI::ExistingFile);
  p->add_option("--conllu", prep.conllu, "CoNLL-U file, one document per story")->check(CLI::ExistingFile);
  p->add_option("--out", prep.out, "Output directory")->required();
  p->add_option("--seed", prep.seed, "Split seed");
  p->add_option("--test-size", prep.test_size, "Stories per test split");
  p->add_option("--val-size", prep.validation_size, "Validation stories");
  p->add_option("--min-count", prep.min_count, "Minimum token count for the vocabulary");

  cli::ExtractOptions ext;
  auto* x = app.add_subcommand("extract", "Write character experience sequences");
  x->add_option("--stories", ext.stories, "Stories JSONL")->required()->check(CLI::ExistingFile);
  x->add_option("--out", ext.out, "Experiences JSONL")->required();

  cli::TrainOptions tr;
  std::optional<std::uint64_t> train_seed;
  auto* t = app.add_subcommand("train", "Train a model on prepared data");
  t->add_option("--config", tr.config, "key = value config file")->check(CLI::ExistingFile);
  t->add_option("--data", tr.data, "Prepared data directory")->required();
  t->add_option("--out", tr.out, "Run directory")->required();
  t->add_option("--fusion", tr.fusion, "vbf, add or cat");
  t->add_option("--breakpoints", tr.breakpoints, "e.g. 0-128-256-384-512, against --reference-dim");
  t->add_option("--reference-dim", tr.reference_dim, "Hidden size the breakpoints refer to");
  t->add_option("--hidden", tr.hidden_dim, "Hidden size H");
  t->add_option("--embed", tr.embed_dim, "Embedding size D");
  t->add_option("--epochs", tr.epochs, "Epoch limit");
  t->add_option("--embeddings", tr.embeddings, "Pretrained vectors (GloVe text format)")
      ->check(CLI::ExistingFile);
  t->add_option("--seed", train_seed, "Initialisation and batching seed");
  t->add_flag("--paper-scale", tr.paper_scale, "H=512, D=200, breakpoints 0-128-256-384-512");
  t->add_flag("--resume", tr.resume, "Continue from last.ckpt in --out");

  cli::GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "Generate endings for story characters");
  g->add_option("--checkpoint", gen.checkpoint, "Model checkpoint")->required();
  g->add_option("--data", gen.data, "Prepared data directory")->required();
  auto* sid = g->add_option("--story-id", gen.story_id, "Story id");
  auto* all = g->add_flag("--all", gen.all, "Every story");
  sid->excludes(all);
  g->add_option("--character", gen.character, "Character id or surface form");
  g->add_option("--out", gen.out, "Generations JSONL");
  g->add_option("--max-len", gen.max_len, "Decode length limit");

  cli::EvaluateOptions ev;
  std::string splits = "sufficient_test,inadequate_test";
  std::string bleu_mode = "cumulative";
  auto* e = app.add_subcommand("evaluate", "PPL, BLEU and SucR on test splits");
  e->add_option("--checkpoint", ev.checkpoint, "Model checkpoint")->required();
  e->add_option("--data", ev.data, "Prepared data directory")->required();
  e->add_option("--split", splits, "Comma-separated split names");
  e->add_option("--out", ev.out, "Metrics CSV")->required();
  e->add_option("--generations", ev.generations, "Generations JSONL");
  e->add_option("--model-name", ev.model_name, "Model column in the CSV");
  e->add_option("--bleu", bleu_mode, "cumulative or individual")
      ->check(CLI::IsMember({"cumulative", "individual"}));

  cli::AblateOptions ab;
  std::string combinations = "0,128,256,0-256-512,0-128-256-384-512";
  std::optional<std::uint64_t> ablate_seed;
  auto* a = app.add_subcommand("ablate", "Train and rank breakpoint combinations");
  a->add_option("--combinations", combinations, "Comma-separated breakpoint sets");
  a->add_option("--reference-dim", ab.reference_dim, "Hidden size the combinations refer to");
  a->add_option("--data", ab.data, "Prepared data directory")->required();
  a->add_option("--config", ab.config, "key = value config file")->check(CLI::ExistingFile);
  a->add_option("--out", ab.out, "Output directory")->required();
  a->add_option("--hidden", ab.hidden_dim, "Hidden size H");
  a->add_option("--epochs", ab.epochs, "Epoch limit");
  a->add_option("--seed", ablate_seed, "Shared seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& s) {
    return app.exit(s);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return cli::kExitInput;
  }

  try {
    if (*p) return cli::cmd_prepare(prep, std::cout);
    if (*x) return cli::cmd_extract(ext, std::cout);
    if (*t) {
      tr.seed = train_seed;
      return cli::cmd_train(tr, std::cout);
    }
    if (*g) return cli::cmd_generate(gen, std::cout);
    if (*e) {
      ev.splits = coseg::split(splits, ',');
      ev.bleu_mode = bleu_mode == "individual" ? coseg::evaluation::BleuMode::Individual
                                               : coseg::evaluation::BleuMode::Cumulative;
      return cli::cmd_evaluate(ev, std::cout);
    }
    if (*a) {
      ab.combinations = coseg::split(combinations, ',');
      ab.seed = ablate_seed;
      return cli::cmd_ablate(ab, std::cout);
    }
  } catch (const coseg::NumericError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return cli::kExitNumeric;
  } catch (const coseg::InputError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return cli::kExitInput;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << '\n';
    return cli::kExitInput;
  } catch (const std::filesystem::filesystem_error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return cli::kExitInput;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 1;
}
