#include "coseg/corpus/dependency.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "coseg/error.hpp"

namespace coseg::corpus {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return cols;
}

bool parse_int(const std::string& s, int& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::string> Sentence::words() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.form);
  return out;
}

std::size_t Sentence::root() const {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].head == 0) return i;
  }
  throw InputError("sentence has no root");
}

std::vector<std::size_t> Sentence::dependents(std::size_t pos) const {
  std::vector<std::size_t> out;
  const int idx = static_cast<int>(pos) + 1;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].head == idx) out.push_back(i);
  }
  return out;
}

void validate_sentence(const Sentence& s, const std::string& where) {
  const int n = static_cast<int>(s.tokens.size());
  if (n == 0) throw InputError(where + ": empty sentence");
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const auto& t = s.tokens[static_cast<std::size_t>(i)];
    const std::string who = where + ": token " + std::to_string(t.index) + " '" + t.form + "'";
    if (t.index != i + 1) throw InputError(who + ": expected index " + std::to_string(i + 1));
    if (t.head < 0 || t.head > n) {
      throw InputError(who + ": head " + std::to_string(t.head) + " out of range [0, " +
                       std::to_string(n) + "]");
    }
    if (t.head == t.index) throw InputError(who + ": token is its own head");
    if (t.head == 0) ++roots;
  }
  if (roots != 1) {
    throw InputError(where + ": expected exactly one root, found " + std::to_string(roots));
  }
  for (int i = 0; i < n; ++i) {
    int cur = i + 1;
    for (int steps = 0; cur != 0; ++steps) {
      if (steps > n) {
        const auto& t = s.tokens[static_cast<std::size_t>(i)];
        throw InputError(where + ": token " + std::to_string(t.index) + " '" + t.form +
                         "': cyclic head chain");
      }
      cur = s.tokens[static_cast<std::size_t>(cur - 1)].head;
    }
  }
}

std::optional<std::string> ConlluSentence::comment(const std::string& key) const {
  for (const auto& [k, v] : comments) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::vector<ConlluSentence> parse_conllu(std::istream& in, const std::string& source) {
  std::vector<ConlluSentence> out;
  ConlluSentence cur;
  std::size_t lineno = 0;
  bool open = false;

  auto flush = [&] {
    if (!open) return;
    if (cur.sentence.tokens.empty()) {
      // comment-only block: carry its comments over to the next sentence
      open = false;
      return;
    }
    validate_sentence(cur.sentence, source + ":" + std::to_string(cur.first_line));
    out.push_back(std::move(cur));
    cur = ConlluSentence{};
    open = false;
  };

  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) {
      flush();
      continue;
    }
    if (!open) {
      cur.first_line = lineno;
      open = true;
    }
    if (line[0] == '#') {
      if (!cur.sentence.tokens.empty()) {
        throw InputError(source + ":" + std::to_string(lineno) + ": comment inside sentence");
      }
      auto eq = line.find('=');
      if (eq != std::string::npos) {
        cur.comments.emplace_back(trim(line.substr(1, eq - 1)), trim(line.substr(eq + 1)));
      }
      continue;
    }
    auto cols = split_tabs(line);
    const std::string where = source + ":" + std::to_string(lineno);
    if (cols.size() != 10) {
      throw InputError(where + ": expected 10 tab-separated columns, found " +
                       std::to_string(cols.size()));
    }
    if (cols[0].find_first_of("-.") != std::string::npos) continue;
    DependencyToken tok;
    if (!parse_int(cols[0], tok.index)) throw InputError(where + ": bad ID '" + cols[0] + "'");
    if (!parse_int(cols[6], tok.head)) {
      throw InputError(where + ": token " + cols[0] + " '" + cols[1] + "': bad HEAD '" + cols[6] + "'");
    }
    tok.form = cols[1];
    tok.lemma = cols[2];
    tok.upos = cols[3];
    tok.deprel = cols[7];
    cur.sentence.tokens.push_back(std::move(tok));
  }
  flush();
  return out;
}

std::vector<ConlluSentence> load_conllu(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open " + path.string());
  return parse_conllu(f, path.string());
}

}  // namespace coseg::corpus
