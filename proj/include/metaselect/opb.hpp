#pragma once

// Pseudo-Boolean optimization instances in the OPB competition format.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace metaselect {

using BigInt = boost::multiprecision::cpp_int;

struct Literal {
  std::uint32_t variable = 0;  // 1-based
  bool negated = false;

  friend bool operator==(const Literal&, const Literal&) = default;
  friend auto operator<=>(const Literal&, const Literal&) = default;
};

/// Signed coefficient times a product of literals. Literals are kept sorted by
/// variable index with no repeated variable.
struct Term {
  BigInt coefficient;
  std::vector<Literal> literals;

  std::size_t degree() const { return literals.size(); }
  friend bool operator==(const Term&, const Term&) = default;
};

enum class Relation { GreaterEqual, Equal };

struct Constraint {
  std::vector<Term> terms;
  Relation relation = Relation::GreaterEqual;
  BigInt rhs;

  friend bool operator==(const Constraint&, const Constraint&) = default;
};

struct Instance {
  std::optional<std::vector<Term>> objective;  // minimized
  std::vector<Constraint> constraints;
  std::uint32_t declared_variables = 0;
  std::uint32_t declared_constraints = 0;
  std::string source_name;
  std::string benchmark_id;

  bool has_objective() const { return objective.has_value() && !objective->empty(); }
  friend bool operator==(const Instance&, const Instance&) = default;
};

class OpbError : public std::runtime_error {
 public:
  OpbError(const std::string& what, std::size_t line, std::size_t column);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Parses an OPB document. `<=` constraints are rewritten to `>=` by negating
/// coefficients and right-hand side. Errors carry 1-based line/column.
Instance parse_opb(std::string_view text, std::string source_name = {});
Instance parse_opb_file(const std::string& path);

/// Canonical text: header comment, objective, then one constraint per line.
std::string serialize_opb(const Instance& inst);

bool is_linear(const Instance& inst);

/// Replaces every product term with a fresh variable constrained by the AND
/// encoding. Identical products share one auxiliary variable; fresh indices are
/// n+1, n+2, ... in first-occurrence order (objective first, then constraints).
Instance linearize(const Instance& inst);

/// Value of a literal under a 0/1 assignment indexed by variable (index 0 unused).
bool literal_value(const Literal& lit, const std::vector<bool>& assignment);
bool term_value(const Term& term, const std::vector<bool>& assignment);
bool satisfies(const Constraint& c, const std::vector<bool>& assignment);
bool satisfies(const Instance& inst, const std::vector<bool>& assignment);

}  // namespace metaselect
