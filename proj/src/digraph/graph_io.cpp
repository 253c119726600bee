#include "allconcur/graph_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>
#include <vector>

namespace allconcur {

std::string to_dot(const Digraph& g, std::string_view name) {
  std::ostringstream out;
  out << "digraph " << name << " {\n";
  for (Vertex v = 0; v < g.size(); ++v) out << "  " << v << ";\n";
  for (Vertex u = 0; u < g.size(); ++u) {
    for (Vertex v : g.successors(u)) out << "  " << u << " -> " << v << ";\n";
  }
  out << "}\n";
  return out.str();
}

namespace {

struct DotLexer {
  std::string_view text;
  std::size_t pos = 0;

  void skip() {
    while (pos < text.size()) {
      if (std::isspace(static_cast<unsigned char>(text[pos]))) {
        ++pos;
      } else if (text.substr(pos, 2) == "//") {
        while (pos < text.size() && text[pos] != '\n') ++pos;
      } else if (text[pos] == '[') {
        const auto close = text.find(']', pos);
        if (close == std::string_view::npos) throw GraphError("unterminated attribute list in DOT input");
        pos = close + 1;
      } else {
        return;
      }
    }
  }

  std::string_view token() {
    skip();
    if (pos >= text.size()) return {};
    const std::size_t start = pos;
    if (text.substr(pos, 2) == "->") {
      pos += 2;
    } else if (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_' || text[pos] == '"') {
      if (text[pos] == '"') {
        const auto close = text.find('"', pos + 1);
        if (close == std::string_view::npos) throw GraphError("unterminated string in DOT input");
        pos = close + 1;
      } else {
        while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_')) ++pos;
      }
    } else {
      ++pos;
    }
    return text.substr(start, pos - start);
  }
};

Vertex parse_vertex(std::string_view tok) {
  if (!tok.empty() && tok.front() == '"') tok = tok.substr(1, tok.size() - 2);
  Vertex v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw GraphError("DOT vertex names must be integers, got '" + std::string(tok) + "'");
  }
  return v;
}

Digraph assemble(std::size_t n, const std::vector<Edge>& edges) {
  Digraph g(n);
  for (auto [u, v] : edges) g.add_edge(u, v);
  return g;
}

}  // namespace

Digraph parse_dot(std::string_view text) {
  DotLexer lex{text};
  if (lex.token() != "digraph") throw GraphError("DOT input must start with 'digraph'");
  auto tok = lex.token();
  if (tok != "{") tok = lex.token();
  if (tok != "{") throw GraphError("expected '{' in DOT input");

  std::vector<Edge> edges;
  std::size_t n = 0;
  std::vector<Vertex> chain;
  auto flush = [&] {
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) edges.emplace_back(chain[i], chain[i + 1]);
    chain.clear();
  };
  bool expect_vertex = true;
  for (tok = lex.token(); tok != "}"; tok = lex.token()) {
    if (tok.empty()) throw GraphError("unexpected end of DOT input");
    if (tok == ";") {
      flush();
      expect_vertex = true;
    } else if (tok == "->") {
      if (chain.empty() || expect_vertex) throw GraphError("dangling '->' in DOT input");
      expect_vertex = true;
    } else {
      if (!expect_vertex) {
        flush();
      }
      const Vertex v = parse_vertex(tok);
      n = std::max<std::size_t>(n, static_cast<std::size_t>(v) + 1);
      chain.push_back(v);
      expect_vertex = false;
    }
  }
  flush();
  return assemble(n, edges);
}

std::string to_adjacency(const Digraph& g) {
  std::ostringstream out;
  out << g.size() << ' ' << g.max_degree() << '\n';
  for (Vertex u = 0; u < g.size(); ++u) {
    out << u << ':';
    for (Vertex v : g.successors(u)) out << ' ' << v;
    out << '\n';
  }
  return out.str();
}

Digraph parse_adjacency(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::size_t n = 0;
  std::size_t d = 0;
  if (!(in >> n >> d)) throw GraphError("adjacency header must be 'n d'");
  std::string line;
  std::getline(in, line);

  std::vector<Edge> edges;
  std::vector<bool> seen(n, false);
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw GraphError("adjacency line lacks ':' : " + line);
    std::istringstream head(line.substr(0, colon));
    std::size_t id = 0;
    if (!(head >> id) || id >= n) throw GraphError("bad vertex id in adjacency line: " + line);
    if (seen[id]) throw GraphError("vertex listed twice: " + std::to_string(id));
    seen[id] = true;
    std::istringstream rest(line.substr(colon + 1));
    std::size_t v = 0;
    while (rest >> v) {
      if (v >= n) throw GraphError("successor out of range in line: " + line);
      edges.emplace_back(static_cast<Vertex>(id), static_cast<Vertex>(v));
    }
    if (!rest.eof()) throw GraphError("malformed successor list: " + line);
  }
  auto g = assemble(n, edges);
  if (g.max_degree() != d) throw GraphError("header degree does not match the edge lists");
  return g;
}

}  // namespace allconcur
