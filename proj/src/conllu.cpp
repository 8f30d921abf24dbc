#include "xdrs/conllu.hpp"

#include <charconv>

#include "xdrs/error.hpp"
#include "xdrs/text_util.hpp"

namespace xdrs {

void validate(const SentenceAnnotation& s) {
  const std::size_t n = s.tokens.size();
  if (n == 0) fail(ErrorKind::MalformedConllu, "sentence " + s.id + " has no tokens");
  if (s.lemmas.size() != n || s.upos.size() != n || s.heads.size() != n || s.deprels.size() != n)
    fail(ErrorKind::MalformedConllu, "sentence " + s.id + ": column lengths differ");
  int roots = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (s.heads[i] < 0 || s.heads[i] > static_cast<int>(n))
      fail(ErrorKind::MalformedConllu, "sentence " + s.id + ": head out of range at token " + std::to_string(i + 1));
    if (s.heads[i] == static_cast<int>(i + 1))
      fail(ErrorKind::MalformedConllu, "sentence " + s.id + ": token " + std::to_string(i + 1) + " heads itself");
    if (s.heads[i] == 0) {
      ++roots;
      if (s.deprels[i] != "root")
        fail(ErrorKind::MalformedConllu, "sentence " + s.id + ": root token has relation '" + s.deprels[i] + "'");
    }
  }
  if (roots != 1)
    fail(ErrorKind::MalformedConllu, "sentence " + s.id + ": expected one root, found " + std::to_string(roots));
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t steps = 0;
    int cur = static_cast<int>(i) + 1;
    while (cur != 0) {
      if (++steps > n) fail(ErrorKind::MalformedConllu, "sentence " + s.id + ": cyclic heads");
      cur = s.heads[cur - 1];
    }
  }
}

std::vector<std::vector<int>> children_of(const SentenceAnnotation& s) {
  std::vector<std::vector<int>> ch(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s.heads[i] > 0) ch[s.heads[i] - 1].push_back(static_cast<int>(i));
  return ch;
}

int root_of(const SentenceAnnotation& s) {
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s.heads[i] == 0) return static_cast<int>(i);
  return -1;
}

namespace {

bool parse_int(std::string_view t, int& out) {
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  return ec == std::errc{} && p == t.data() + t.size();
}

}  // namespace

std::vector<SentenceAnnotation> read_conllu(std::string_view text) {
  std::vector<SentenceAnnotation> out;
  SentenceAnnotation cur;
  int line_no = 0;
  auto flush = [&] {
    if (!cur.tokens.empty()) {
      validate(cur);
      out.push_back(std::move(cur));
    }
    cur = SentenceAnnotation{};
  };
  for (auto line : split_lines(text)) {
    ++line_no;
    const std::string where = "line " + std::to_string(line_no);
    if (trim(line).empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') {
      auto body = trim(line.substr(1));
      if (body.rfind("sent_id", 0) == 0) {
        auto eq = body.find('=');
        if (eq != std::string_view::npos) cur.id = std::string(trim(body.substr(eq + 1)));
      }
      continue;
    }
    auto cols = split_char(line, '\t');
    if (cols.size() == 1) cols = split_whitespace(line);
    if (cols.size() < 8) fail(ErrorKind::MalformedConllu, where + ": expected 10 columns");
    if (cols[0].find('-') != std::string_view::npos || cols[0].find('.') != std::string_view::npos) continue;
    int id = 0;
    if (!parse_int(cols[0], id) || id != static_cast<int>(cur.tokens.size()) + 1)
      fail(ErrorKind::MalformedConllu, where + ": token ids must run 1..n, got '" + std::string(cols[0]) + "'");
    int head = 0;
    if (!parse_int(cols[6], head))
      fail(ErrorKind::MalformedConllu, where + ": non-integer head '" + std::string(cols[6]) + "'");
    cur.tokens.emplace_back(cols[1]);
    cur.lemmas.emplace_back(cols[2]);
    cur.upos.emplace_back(cols[3]);
    cur.heads.push_back(head);
    cur.deprels.emplace_back(cols[7]);
  }
  flush();
  return out;
}

std::string write_conllu(const std::vector<SentenceAnnotation>& sentences) {
  std::string out;
  for (const auto& s : sentences) {
    if (!s.id.empty()) out += "# sent_id = " + s.id + "\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
      out += std::to_string(i + 1) + "\t" + s.tokens[i] + "\t" + s.lemmas[i] + "\t" + s.upos[i] + "\t_\t_\t" +
             std::to_string(s.heads[i]) + "\t" + s.deprels[i] + "\t_\t_\n";
    }
    out += "\n";
  }
  return out;
}

}  // namespace xdrs
