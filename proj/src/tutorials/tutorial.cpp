#include "sqlgen/tutorials/tutorial.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sqlgen/util/strings.hpp"

namespace sqlgen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw std::runtime_error("read error on " + p.string());
  return ss.str();
}

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x110000) {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Decodes the entity starting at text[i] == '&'; returns characters consumed (0 if none).
std::size_t decode_entity(std::string_view text, std::size_t i, std::string& out) {
  auto semi = text.find(';', i);
  if (semi == std::string_view::npos || semi - i > 10) return 0;
  std::string_view name = text.substr(i + 1, semi - i - 1);
  static const std::pair<std::string_view, std::string_view> named[] = {
      {"amp", "&"}, {"lt", "<"},  {"gt", ">"},     {"quot", "\""},   {"apos", "'"},
      {"nbsp", " "}, {"#39", "'"}, {"ndash", "-"}, {"mdash", "--"}, {"hellip", "..."},
  };
  for (const auto& [n, v] : named) {
    if (name == n) {
      out += v;
      return semi - i + 1;
    }
  }
  if (name.size() > 1 && name[0] == '#') {
    try {
      unsigned long cp = (name[1] == 'x' || name[1] == 'X') ? std::stoul(std::string(name.substr(2)), nullptr, 16)
                                                           : std::stoul(std::string(name.substr(1)));
      append_utf8(out, cp);
      return semi - i + 1;
    } catch (const std::exception&) {
      return 0;
    }
  }
  return 0;
}

bool block_tag(std::string_view tag) {
  static const std::string_view blocks[] = {"p",  "div", "br", "li",      "ul",     "ol",     "pre", "tr",
                                            "table", "h1", "h2", "h3", "h4", "h5", "h6", "section", "article",
                                            "blockquote", "dt", "dd", "hr"};
  return std::find(std::begin(blocks), std::end(blocks), tag) != std::end(blocks);
}

std::string tag_name(std::string_view inside) {
  std::size_t i = 0;
  if (i < inside.size() && inside[i] == '/') ++i;
  std::string name;
  while (i < inside.size() && (std::isalnum(static_cast<unsigned char>(inside[i])))) {
    name += static_cast<char>(std::tolower(static_cast<unsigned char>(inside[i])));
    ++i;
  }
  return name;
}

// Normalizes whitespace: spaces collapse within a line; blank-line runs
// collapse to one (or vanish when keep_blank is false).
std::string tidy_lines(std::string_view raw, bool keep_blank = true) {
  std::string out;
  bool blank_pending = false;
  for (auto& line : util::split(raw, '\n')) {
    std::string l = util::collapse_whitespace(line);
    if (l.empty()) {
      blank_pending = keep_blank && !out.empty();
      continue;
    }
    if (!out.empty()) out += blank_pending ? "\n\n" : "\n";
    blank_pending = false;
    out += l;
  }
  return out;
}

struct Section {
  std::string title;
  std::string html;
};

// Finds the next <hN ...> at or after `from`; returns npos when none.
std::size_t find_heading(const std::string& lower, std::size_t from, int* level) {
  while (true) {
    auto p = lower.find("<h", from);
    if (p == std::string::npos) return p;
    if (p + 2 < lower.size() && lower[p + 2] >= '1' && lower[p + 2] <= '6' && p + 3 < lower.size() &&
        (lower[p + 3] == '>' || is_space(lower[p + 3]))) {
      *level = lower[p + 2] - '0';
      return p;
    }
    from = p + 2;
  }
}

std::string attribute_after(const std::string& html, const std::string& lower, std::string_view marker,
                            std::string_view attr) {
  auto p = lower.find(marker);
  if (p == std::string::npos) return {};
  auto close = lower.find('>', p);
  auto a = lower.find(attr, p);
  if (a == std::string::npos || a > close) return {};
  a += attr.size();
  while (a < html.size() && (is_space(html[a]) || html[a] == '=')) ++a;
  if (a >= html.size()) return {};
  char q = html[a];
  if (q != '"' && q != '\'') return {};
  auto end = html.find(q, a + 1);
  if (end == std::string::npos) return {};
  return html.substr(a + 1, end - a - 1);
}

std::string strip_tags_inline(std::string_view html) { return util::collapse_whitespace(html_to_text(html)); }

std::string subject_from_heading(const std::string& title, const KeywordCatalog& catalog) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : title) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
      cur += c;
    } else {
      if (!cur.empty()) words.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(cur);
  for (auto& w : words) {
    while (!w.empty() && w.back() == '.') w.pop_back();
  }
  // Two-word catalog keywords first (WITH OFFSET, CREATE MODEL), then single words.
  for (std::size_t i = 0; i + 1 < words.size(); ++i) {
    auto pair = util::to_upper(words[i] + " " + words[i + 1]);
    if (catalog.contains(pair)) return pair;
  }
  for (const auto& w : words) {
    if (catalog.contains(w)) return util::to_upper(w);
  }
  for (const auto& w : words) {
    bool upper = w.size() >= 2 && std::none_of(w.begin(), w.end(), [](char c) {
                   return std::islower(static_cast<unsigned char>(c));
                 }) && std::any_of(w.begin(), w.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); });
    if (upper) return w;
  }
  return util::to_upper(util::collapse_whitespace(title));
}

std::string subject_from_filename(const fs::path& p) {
  std::string stem = p.stem().string();
  std::replace(stem.begin(), stem.end(), '-', ' ');
  return util::to_upper(stem);
}

bool contains_icase(std::string_view hay, std::string_view needle) {
  return util::to_lower(hay).find(util::to_lower(needle)) != std::string::npos;
}

std::vector<Section> split_html(const std::string& html, std::string* page_title) {
  const std::string lower = util::to_lower(html);
  auto t0 = lower.find("<title");
  if (t0 != std::string::npos) {
    auto open_end = lower.find('>', t0);
    auto t1 = lower.find("</title", open_end);
    if (open_end != std::string::npos && t1 != std::string::npos) {
      *page_title = strip_tags_inline(std::string_view(html).substr(open_end + 1, t1 - open_end - 1));
    }
  }
  std::vector<Section> out;
  int level = 0;
  std::size_t pos = find_heading(lower, 0, &level);
  while (pos != std::string::npos) {
    auto open_end = lower.find('>', pos);
    std::string close_tag = "</h" + std::to_string(level);
    auto close = lower.find(close_tag, open_end);
    if (open_end == std::string::npos || close == std::string::npos) break;
    Section s;
    s.title = strip_tags_inline(std::string_view(html).substr(open_end + 1, close - open_end - 1));
    auto body_start = lower.find('>', close);
    body_start = body_start == std::string::npos ? lower.size() : body_start + 1;
    int next_level = 0;
    auto next = find_heading(lower, body_start, &next_level);
    std::size_t body_end = next == std::string::npos ? lower.size() : next;
    s.html = html.substr(body_start, body_end - body_start);
    out.push_back(std::move(s));
    pos = next;
    level = next_level;
  }
  return out;
}

std::vector<Section> split_markdown(const std::string& text) {
  std::vector<Section> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') {
      std::size_t i = line.find_first_not_of('#');
      Section s;
      s.title = util::collapse_whitespace(i == std::string::npos ? "" : line.substr(i));
      out.push_back(std::move(s));
    } else if (!out.empty()) {
      out.back().html += line + "\n";
    }
  }
  return out;
}

}  // namespace

std::string html_to_text(std::string_view html) {
  std::string out;
  std::size_t i = 0;
  while (i < html.size()) {
    char c = html[i];
    if (c == '<') {
      if (html.substr(i, 4) == "<!--") {
        auto end = html.find("-->", i + 4);
        i = end == std::string_view::npos ? html.size() : end + 3;
        continue;
      }
      auto end = html.find('>', i);
      if (end == std::string_view::npos) {
        out.append(html.substr(i));
        break;
      }
      std::string name = tag_name(html.substr(i + 1, end - i - 1));
      bool closing = i + 1 < html.size() && html[i + 1] == '/';
      if (!closing && (name == "script" || name == "style")) {
        auto lower_rest = util::to_lower(html.substr(end));
        auto close = lower_rest.find("</" + name);
        if (close == std::string::npos) break;
        auto close_end = html.find('>', end + close);
        i = close_end == std::string_view::npos ? html.size() : close_end + 1;
        continue;
      }
      if (block_tag(name)) out += '\n';
      i = end + 1;
      continue;
    }
    if (c == '&') {
      std::size_t used = decode_entity(html, i, out);
      if (used > 0) {
        i += used;
        continue;
      }
    }
    out += c;
    ++i;
  }
  return tidy_lines(out, false);
}

std::string truncate_at_sentence(std::string_view text, std::size_t max_chars) {
  if (text.size() <= max_chars) return std::string(text);
  std::string_view head = util::utf8_prefix(text, max_chars);
  // A sentence ends at . ! or ? followed by whitespace (or by the cut itself
  // when the original text continues with whitespace).
  for (std::size_t i = head.size(); i-- > 0;) {
    char c = head[i];
    if (c != '.' && c != '!' && c != '?') continue;
    char next = i + 1 < text.size() ? text[i + 1] : ' ';
    if (is_space(next)) return std::string(util::trim(head.substr(0, i + 1)));
  }
  return std::string(util::trim(head));
}

IngestResult ingest_tutorials(const fs::path& root, Dialect dialect, std::size_t max_chars,
                              const KeywordCatalog& catalog) {
  IngestResult result;
  if (!fs::exists(root)) {
    result.errors.push_back({root, "tutorial directory does not exist"});
    return result;
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    auto ext = util::to_lower(e.path().extension().string());
    if (ext == ".html" || ext == ".htm" || ext == ".md" || ext == ".txt") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  for (const auto& file : files) {
    std::string raw;
    try {
      raw = read_all(file);
    } catch (const std::exception& e) {
      result.errors.push_back({file, e.what()});
      continue;
    }
    const auto rel = fs::relative(file, root).generic_string();
    const auto ext = util::to_lower(file.extension().string());
    const bool is_html = ext == ".html" || ext == ".htm";

    std::string page_title;
    std::string source_url;
    std::vector<Section> sections;
    if (is_html) {
      const std::string lower = util::to_lower(raw);
      source_url = attribute_after(raw, lower, "rel=\"canonical\"", "href");
      if (source_url.empty()) source_url = attribute_after(raw, lower, "<meta name=\"source\"", "content");
      sections = split_html(raw, &page_title);
    } else if (ext == ".md") {
      sections = split_markdown(raw);
    }
    if (source_url.empty()) source_url = "file:" + rel;

    struct Candidate {
      std::string subject, title, body;
    };
    std::vector<Candidate> candidates;
    if (sections.empty()) {
      std::string body = is_html ? html_to_text(raw) : tidy_lines(raw);
      std::string subject = subject_from_filename(file);
      candidates.push_back({subject, page_title.empty() ? subject : page_title, body});
    } else {
      for (const auto& s : sections) {
        std::string body = is_html ? html_to_text(s.html) : tidy_lines(s.html);
        candidates.push_back({subject_from_heading(s.title, catalog), s.title, body});
      }
    }

    for (std::size_t i = 0; i < candidates.size(); ++i) {
      auto& c = candidates[i];
      if (c.body.empty()) {
        result.errors.push_back({file, "section '" + c.title + "' has no text"});
        continue;
      }
      if (const auto* entry = catalog.find(c.subject); entry && !entry->supports(dialect)) {
        result.errors.push_back({file, c.subject + " is not supported in " + std::string(display_name(dialect))});
        continue;
      }
      if (!contains_icase(c.body, c.subject)) {
        c.body = (contains_icase(c.title, c.subject) ? c.title : c.subject) + "\n" + c.body;
      }
      TutorialDoc doc;
      doc.dialect = dialect;
      doc.subject = c.subject;
      doc.title = c.title;
      doc.body = truncate_at_sentence(c.body, max_chars);
      doc.source_url = source_url;
      doc.id = "tut-" + util::hex64(util::fnv1a64(std::string(to_string(dialect)) + "|" + rel + "|" +
                                                  std::to_string(i)));
      result.docs.push_back(std::move(doc));
    }
  }
  return result;
}

const TutorialDoc& sample_tutorial(const std::vector<TutorialDoc>& docs, Dialect dialect, std::mt19937_64& rng) {
  std::vector<const TutorialDoc*> eligible;
  for (const auto& d : docs) {
    if (d.dialect == dialect) eligible.push_back(&d);
  }
  if (eligible.empty()) {
    throw TutorialError("no tutorials available for " + std::string(display_name(dialect)));
  }
  std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
  return *eligible[pick(rng)];
}

std::string tutorials_to_jsonl(const std::vector<TutorialDoc>& docs) {
  std::string out;
  for (const auto& d : docs) {
    json j = {{"id", d.id},       {"dialect", std::string(to_string(d.dialect))},
              {"subject", d.subject}, {"title", d.title},
              {"body", d.body},   {"source_url", d.source_url}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<TutorialDoc> tutorials_from_jsonl(std::string_view text) {
  std::vector<TutorialDoc> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (util::trim(line).empty()) continue;
    try {
      json j = json::parse(line);
      TutorialDoc d;
      d.id = j.at("id").get<std::string>();
      d.dialect = dialect_from_string(j.at("dialect").get<std::string>());
      d.subject = j.at("subject").get<std::string>();
      d.title = j.value("title", d.subject);
      d.body = j.at("body").get<std::string>();
      d.source_url = j.value("source_url", "");
      out.push_back(std::move(d));
    } catch (const std::exception& e) {
      throw TutorialError("tutorial cache line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<TutorialDoc> load_tutorials(const fs::path& path, Dialect dialect, std::size_t max_chars) {
  if (fs::is_directory(path)) return ingest_tutorials(path, dialect, max_chars).docs;
  std::vector<TutorialDoc> out;
  for (auto& d : tutorials_from_jsonl(read_all(path))) {
    if (d.dialect == dialect) out.push_back(std::move(d));
  }
  return out;
}

}  // namespace sqlgen
