#include "metaselect/opb.hpp"

#include "metaselect/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

namespace metaselect {

OpbError::OpbError(const std::string& what, std::size_t line, std::size_t column)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + what),
      line_(line),
      column_(column) {}

namespace {

struct Token {
  std::string_view text;
  std::size_t line;
  std::size_t column;
};

// Header comment: "* #variable= N #constraint= M ..."
void read_header(std::string_view line, std::optional<std::uint32_t>& vars,
                 std::optional<std::uint32_t>& cons) {
  std::istringstream in{std::string(line)};
  std::string word;
  while (in >> word) {
    auto grab = [&](std::optional<std::uint32_t>& slot) {
      std::string value;
      if (in >> value && is_integer_token(value)) slot = static_cast<std::uint32_t>(std::stoul(value));
    };
    if (word == "#variable=") grab(vars);
    else if (word == "#constraint=") grab(cons);
  }
}

class Parser {
 public:
  explicit Parser(std::string_view text) { tokenize(text); }

  Instance run() {
    Instance inst;
    while (pos_ < tokens_.size()) {
      const Token& first = tokens_[pos_];
      if (first.text == "min:") {
        if (inst.objective) throw OpbError("duplicate objective", first.line, first.column);
        ++pos_;
        inst.objective = read_terms(/*objective=*/true);
        expect_terminator(first);
      } else if (first.text == "max:") {
        throw OpbError("maximization objective is not supported; use min:", first.line, first.column);
      } else {
        inst.constraints.push_back(read_constraint(first));
      }
    }
    std::uint32_t max_var = 0;
    auto scan = [&](const std::vector<Term>& terms) {
      for (const Term& t : terms)
        for (const Literal& l : t.literals) max_var = std::max(max_var, l.variable);
    };
    if (inst.objective) scan(*inst.objective);
    for (const Constraint& c : inst.constraints) scan(c.terms);

    inst.declared_variables = declared_vars_.value_or(max_var);
    inst.declared_constraints =
        declared_cons_.value_or(static_cast<std::uint32_t>(inst.constraints.size()));
    return inst;
  }

 private:
  void tokenize(std::string_view text) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(start, end - start);
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (!line.empty() && line.front() == '*') {
        if (line_no == 1 || (!declared_vars_ && tokens_.empty())) read_header(line, declared_vars_, declared_cons_);
      } else {
        std::size_t i = 0;
        while (i < line.size()) {
          if (std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
            continue;
          }
          std::size_t j = i;
          while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) && line[j] != ';') ++j;
          if (j == i) j = i + 1;  // lone ';'
          tokens_.push_back({line.substr(i, j - i), line_no, i + 1});
          i = j;
        }
      }
      if (end == text.size()) break;
      start = end + 1;
    }
  }

  const Token* peek() const { return pos_ < tokens_.size() ? &tokens_[pos_] : nullptr; }

  [[noreturn]] void fail_eof(const Token& statement_start) const {
    throw OpbError("missing ';' terminator for statement", statement_start.line, statement_start.column);
  }

  static bool is_relation_like(std::string_view s) {
    return !s.empty() && (s.front() == '<' || s.front() == '>' || s.front() == '=' || s.front() == '!');
  }

  std::optional<Literal> read_literal(const Token& tok) {
    std::string_view s = tok.text;
    bool negated = false;
    if (!s.empty() && s.front() == '~') {
      negated = true;
      s.remove_prefix(1);
    }
    if (s.size() < 2 || s.front() != 'x') return std::nullopt;
    s.remove_prefix(1);
    if (!std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) return std::nullopt;
    if (s.size() > 10) throw OpbError("variable index out of range", tok.line, tok.column);
    unsigned long v = std::stoul(std::string(s));
    if (v == 0 || v > UINT32_MAX) throw OpbError("variable index out of range", tok.line, tok.column);
    auto var = static_cast<std::uint32_t>(v);
    if (declared_vars_ && var > *declared_vars_)
      throw OpbError("undeclared variable x" + std::to_string(var) + " (#variable= " +
                         std::to_string(*declared_vars_) + ")",
                     tok.line, tok.column);
    return Literal{var, negated};
  }

  std::vector<Term> read_terms(bool objective) {
    std::vector<Term> terms;
    while (const Token* tok = peek()) {
      if (tok->text == ";" || is_relation_like(tok->text)) break;
      if (!is_integer_token(tok->text))
        throw OpbError("malformed token '" + std::string(tok->text) + "', expected coefficient", tok->line,
                       tok->column);
      Term term;
      term.coefficient = parse_bigint(tok->text);
      const Token& coef_tok = *tok;
      ++pos_;
      while (const Token* lt = peek()) {
        if (lt->text == ";" || is_relation_like(lt->text) || is_integer_token(lt->text)) break;
        auto lit = read_literal(*lt);
        if (!lit) throw OpbError("malformed token '" + std::string(lt->text) + "'", lt->line, lt->column);
        for (const Literal& seen : term.literals)
          if (seen.variable == lit->variable)
            throw OpbError("variable x" + std::to_string(lit->variable) + " repeated in term", lt->line,
                           lt->column);
        term.literals.push_back(*lit);
        ++pos_;
      }
      if (term.literals.empty())
        throw OpbError(objective ? "coefficient without variable in objective" : "coefficient without variable",
                       coef_tok.line, coef_tok.column);
      std::sort(term.literals.begin(), term.literals.end());
      if (term.coefficient != 0) terms.push_back(std::move(term));
    }
    return terms;
  }

  void expect_terminator(const Token& statement_start) {
    const Token* tok = peek();
    if (!tok) fail_eof(statement_start);
    if (tok->text != ";")
      throw OpbError("expected ';', found '" + std::string(tok->text) + "'", tok->line, tok->column);
    ++pos_;
  }

  Constraint read_constraint(const Token& first) {
    Constraint c;
    c.terms = read_terms(false);
    const Token* rel = peek();
    if (!rel) fail_eof(first);
    if (rel->text == ";") throw OpbError("constraint without relation", rel->line, rel->column);
    bool flip = false;
    if (rel->text == ">=") c.relation = Relation::GreaterEqual;
    else if (rel->text == "=") c.relation = Relation::Equal;
    else if (rel->text == "<=") flip = true;
    else throw OpbError("unsupported relation '" + std::string(rel->text) + "'", rel->line, rel->column);
    ++pos_;
    const Token* rhs = peek();
    if (!rhs) fail_eof(first);
    if (!is_integer_token(rhs->text))
      throw OpbError("malformed right-hand side '" + std::string(rhs->text) + "'", rhs->line, rhs->column);
    c.rhs = parse_bigint(rhs->text);
    ++pos_;
    expect_terminator(first);
    if (flip) {
      for (Term& t : c.terms) t.coefficient = -t.coefficient;
      c.rhs = -c.rhs;
    }
    return c;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::optional<std::uint32_t> declared_vars_;
  std::optional<std::uint32_t> declared_cons_;
};

void write_terms(std::ostream& out, const std::vector<Term>& terms) {
  for (const Term& t : terms) {
    out << (t.coefficient >= 0 ? "+" : "") << t.coefficient;
    for (const Literal& l : t.literals) out << ' ' << (l.negated ? "~x" : "x") << l.variable;
    out << ' ';
  }
}

}  // namespace

Instance parse_opb(std::string_view text, std::string source_name) {
  Instance inst = Parser(text).run();
  inst.source_name = std::move(source_name);
  return inst;
}

Instance parse_opb_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_opb(buf.str(), path);
}

std::string serialize_opb(const Instance& inst) {
  std::ostringstream out;
  out << "* #variable= " << inst.declared_variables << " #constraint= " << inst.constraints.size() << '\n';
  if (inst.objective) {
    out << "min: ";
    write_terms(out, *inst.objective);
    out << ";\n";
  }
  for (const Constraint& c : inst.constraints) {
    write_terms(out, c.terms);
    out << (c.relation == Relation::Equal ? "= " : ">= ") << c.rhs << " ;\n";
  }
  return out.str();
}

bool is_linear(const Instance& inst) {
  auto linear = [](const std::vector<Term>& terms) {
    return std::all_of(terms.begin(), terms.end(), [](const Term& t) { return t.degree() < 2; });
  };
  if (inst.objective && !linear(*inst.objective)) return false;
  return std::all_of(inst.constraints.begin(), inst.constraints.end(),
                     [&](const Constraint& c) { return linear(c.terms); });
}

Instance linearize(const Instance& inst) {
  if (is_linear(inst)) return inst;

  Instance out = inst;
  std::map<std::vector<Literal>, std::uint32_t> aux_of;
  std::vector<std::pair<std::vector<Literal>, std::uint32_t>> order;
  std::uint32_t next = inst.declared_variables;

  auto rewrite = [&](std::vector<Term>& terms) {
    for (Term& t : terms) {
      if (t.degree() < 2) continue;
      auto [it, fresh] = aux_of.try_emplace(t.literals, next + 1);
      if (fresh) {
        ++next;
        order.emplace_back(t.literals, it->second);
      }
      t.literals = {Literal{it->second, false}};
    }
  };
  if (out.objective) rewrite(*out.objective);
  for (Constraint& c : out.constraints) rewrite(c.terms);

  for (const auto& [product, y] : order) {
    const Literal aux{y, false};
    // y <= l  as  l - y >= 0
    for (const Literal& l : product) {
      Constraint c;
      c.terms = {Term{1, {l}}, Term{-1, {aux}}};
      c.rhs = 0;
      out.constraints.push_back(std::move(c));
    }
    // y >= sum(l) - (k-1)  as  y - sum(l) >= 1 - k
    Constraint c;
    c.terms.push_back(Term{1, {aux}});
    for (const Literal& l : product) c.terms.push_back(Term{-1, {l}});
    c.rhs = 1 - static_cast<long>(product.size());
    out.constraints.push_back(std::move(c));
  }
  out.declared_variables = next;
  out.declared_constraints = static_cast<std::uint32_t>(out.constraints.size());
  return out;
}

bool literal_value(const Literal& lit, const std::vector<bool>& assignment) {
  return assignment.at(lit.variable) != lit.negated;
}

bool term_value(const Term& term, const std::vector<bool>& assignment) {
  return std::all_of(term.literals.begin(), term.literals.end(),
                     [&](const Literal& l) { return literal_value(l, assignment); });
}

bool satisfies(const Constraint& c, const std::vector<bool>& assignment) {
  BigInt lhs = 0;
  for (const Term& t : c.terms)
    if (term_value(t, assignment)) lhs += t.coefficient;
  return c.relation == Relation::Equal ? lhs == c.rhs : lhs >= c.rhs;
}

bool satisfies(const Instance& inst, const std::vector<bool>& assignment) {
  return std::all_of(inst.constraints.begin(), inst.constraints.end(),
                     [&](const Constraint& c) { return satisfies(c, assignment); });
}

}  // namespace metaselect
