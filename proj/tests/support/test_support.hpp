#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "coseg/corpus/dependency.hpp"
#include "coseg/corpus/story.hpp"
#include "coseg/model/coseg_model.hpp"
#include "coseg/numerics/parameters.hpp"
#include "coseg/numerics/rng.hpp"
#include "coseg/numerics/tape.hpp"

namespace coseg::testing {

namespace fs = std::filesystem;

inline fs::path source_dir() { return fs::path(COSEG_SOURCE_DIR); }
inline fs::path fixture(const std::string& name) { return source_dir() / "data" / "fixture" / name; }
inline fs::path cli_binary() { return fs::path(COSEG_CLI_BINARY); }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("coseg-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

struct Row {
  std::string form;
  std::string lemma;
  std::string upos;
  int head;
  std::string deprel;
};

inline corpus::Sentence sentence(std::initializer_list<Row> rows) {
  corpus::Sentence s;
  int i = 1;
  for (const auto& r : rows) s.tokens.push_back({i++, r.form, r.lemma, r.upos, r.head, r.deprel});
  return s;
}

/// "<subj> <verb> the <obj> ." with the subject as nsubj of the verb.
inline corpus::Sentence clause(const std::string& subj, const std::string& verb, const std::string& obj,
                               const std::string& subj_upos = "PROPN") {
  return sentence({{subj, subj, subj_upos, 2, "nsubj"},
                   {verb, verb, "VERB", 0, "root"},
                   {"the", "the", "DET", 4, "det"},
                   {obj, obj, "NOUN", 2, "obj"},
                   {".", ".", "PUNCT", 2, "punct"}});
}

/// "She knew a discount store near her sold socks"
inline corpus::Sentence discount_store_sentence() {
  return sentence({{"She", "she", "PRON", 2, "nsubj"},
                   {"knew", "know", "VERB", 0, "root"},
                   {"a", "a", "DET", 5, "det"},
                   {"discount", "discount", "NOUN", 5, "compound"},
                   {"store", "store", "NOUN", 2, "obj"},
                   {"near", "near", "ADP", 7, "case"},
                   {"her", "she", "PRON", 5, "nmod"},
                   {"sold", "sell", "VERB", 5, "acl:relcl"},
                   {"socks", "sock", "NOUN", 8, "obj"}});
}

// ---------------------------------------------------------------- gradients

/// Denominator floor for full-model losses. Central differences of a loss
/// near 10 carry ~1e-11 roundoff at eps 1e-4, which swamps gradients of 1e-9.
inline constexpr double kModelGradFloor = 1e-6;

/// Central-difference comparison. `worst` is the largest elementwise
/// |analytic - numeric| / (|analytic| + floor); `worst_tensor` the largest
/// per-parameter ||analytic - numeric|| / (||analytic|| + ||numeric||).
struct GradCheck {
  double worst = 0.0;
  double worst_tensor = 0.0;
  std::string worst_param;
  std::size_t scalars = 0;
};

inline GradCheck check_gradients(const std::vector<Parameter*>& params,
                                 const std::function<Var(Tape&)>& loss_fn, double eps = 1e-4,
                                 double floor = 1e-8) {
  for (Parameter* p : params) p->grad.fill(0.0);
  {
    Tape tape;
    Var loss = loss_fn(tape);
    tape.backward(loss);
  }
  auto eval = [&] {
    Tape tape;
    return loss_fn(tape).value()[0];
  };
  GradCheck out;
  for (Parameter* p : params) {
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double keep = p->value[i];
      p->value[i] = keep + eps;
      const double up = eval();
      p->value[i] = keep - eps;
      const double down = eval();
      p->value[i] = keep;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = p->grad[i];
      const double rel = std::abs(analytic - numeric) / (std::abs(analytic) + floor);
      if (rel > out.worst) {
        out.worst = rel;
        out.worst_param = p->name + "[" + std::to_string(i) + "]";
      }
      diff2 += (analytic - numeric) * (analytic - numeric);
      a2 += analytic * analytic;
      n2 += numeric * numeric;
      ++out.scalars;
    }
    const double rel = std::sqrt(diff2) / std::max(std::sqrt(a2) + std::sqrt(n2), 1e-12);
    out.worst_tensor = std::max(out.worst_tensor, rel);
  }
  return out;
}

inline std::vector<Parameter*> all_params(ParameterStore& store) {
  std::vector<Parameter*> out;
  for (auto& p : store) out.push_back(p.get());
  return out;
}

/// Random model input over ids [kReservedCount, vocab).
inline model::ModelInput random_input(std::mt19937_64& rng, std::size_t vocab, std::size_t sentences,
                                      std::size_t experiences) {
  std::uniform_int_distribution<std::size_t> word(5, vocab - 1);
  std::uniform_int_distribution<std::size_t> len(2, 4);
  model::ModelInput in;
  for (std::size_t s = 0; s < sentences; ++s) {
    std::vector<std::size_t> ids(len(rng));
    for (auto& id : ids) id = word(rng);
    in.context.push_back(ids);
  }
  for (std::size_t e = 0; e < experiences; ++e) {
    std::vector<std::size_t> ids(len(rng));
    for (auto& id : ids) id = word(rng);
    ids.insert(ids.begin() + 1, 4);  // OBJ
    in.character.experiences.push_back(ids);
  }
  in.character.character_token = word(rng);
  return in;
}

inline std::vector<std::size_t> random_target(std::mt19937_64& rng, std::size_t vocab, std::size_t n) {
  std::uniform_int_distribution<std::size_t> word(5, vocab - 1);
  std::vector<std::size_t> t(n);
  for (auto& id : t) id = word(rng);
  t.push_back(3);  // EOS
  return t;
}

}  // namespace coseg::testing
