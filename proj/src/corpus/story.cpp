#include "coseg/corpus/story.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "coseg/error.hpp"
#include "coseg/text.hpp"

namespace coseg::corpus {

using nlohmann::json;

namespace {

Sentence sentence_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": sentence must be an array of tokens");
  Sentence s;
  for (const auto& tok : j) {
    if (!tok.is_array() || tok.size() != 6) {
      throw InputError(where + ": token must be [index, form, lemma, upos, head, deprel]");
    }
    DependencyToken t;
    t.index = tok[0].get<int>();
    t.form = tok[1].get<std::string>();
    t.lemma = tok[2].get<std::string>();
    t.upos = tok[3].get<std::string>();
    t.head = tok[4].get<int>();
    t.deprel = tok[5].get<std::string>();
    s.tokens.push_back(std::move(t));
  }
  validate_sentence(s, where);
  return s;
}

json sentence_to_json(const Sentence& s) {
  json arr = json::array();
  for (const auto& t : s.tokens) {
    arr.push_back(json::array({t.index, t.form, t.lemma, t.upos, t.head, t.deprel}));
  }
  return arr;
}

}  // namespace

std::set<std::string> Character::surface_forms() const {
  std::set<std::string> out;
  for (const auto& m : mentions) out.insert(to_lower(m.surface));
  return out;
}

std::size_t Story::context_token_count() const {
  std::size_t n = 0;
  for (const auto& s : context) n += s.size();
  return n;
}

const Character* Story::find_character(const std::string& canonical_id) const {
  for (const auto& c : characters) {
    if (c.canonical_id == canonical_id) return &c;
  }
  return nullptr;
}

Story parse_story_json(const std::string& line, const std::string& where) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw InputError(where + ": invalid JSON: " + e.what());
  }
  try {
    Story story;
    story.id = j.at("id").get<std::string>();
    const auto& ctx = j.at("context");
    if (!ctx.is_array() || ctx.empty()) throw InputError(where + ": context must be a non-empty array");
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      story.context.push_back(sentence_from_json(ctx[i], where + ": context[" + std::to_string(i) + "]"));
    }
    story.ending = sentence_from_json(j.at("ending"), where + ": ending");
    return story;
  } catch (const json::exception& e) {
    throw InputError(where + ": " + e.what());
  }
}

std::string story_to_json(const Story& story) {
  json j;
  j["id"] = story.id;
  j["context"] = json::array();
  for (const auto& s : story.context) j["context"].push_back(sentence_to_json(s));
  j["ending"] = sentence_to_json(story.ending);
  return j.dump();
}

std::vector<Story> read_stories_jsonl(std::istream& in, const std::string& source) {
  std::vector<Story> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_story_json(line, source + ":" + std::to_string(lineno)));
  }
  return out;
}

std::vector<Story> load_stories_jsonl(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open " + path.string());
  return read_stories_jsonl(f, path.string());
}

void write_stories_jsonl(std::ostream& out, const std::vector<Story>& stories) {
  for (const auto& s : stories) out << story_to_json(s) << '\n';
}

std::vector<Story> stories_from_conllu(const std::vector<ConlluSentence>& sentences,
                                       const std::string& source) {
  std::vector<Story> out;
  std::vector<Sentence> pending;
  std::string id;
  std::size_t first_line = 0;

  auto flush = [&] {
    if (pending.empty()) return;
    if (pending.size() < 2) {
      throw InputError(source + ":" + std::to_string(first_line) + ": story '" + id +
                       "' needs at least one context sentence and an ending");
    }
    Story s;
    s.id = id;
    s.ending = std::move(pending.back());
    pending.pop_back();
    s.context = std::move(pending);
    out.push_back(std::move(s));
    pending.clear();
  };

  for (const auto& cs : sentences) {
    auto doc = cs.comment("newdoc id");
    if (!doc) doc = cs.comment("story_id");
    if (doc) {
      flush();
      id = *doc;
      first_line = cs.first_line;
    } else if (pending.empty() && out.empty() && id.empty()) {
      throw InputError(source + ":" + std::to_string(cs.first_line) +
                       ": sentence before any '# newdoc id = ...' comment");
    }
    pending.push_back(cs.sentence);
  }
  flush();
  return out;
}

}  // namespace coseg::corpus
