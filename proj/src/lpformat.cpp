#include "riskrule/lpformat.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "riskrule/errors.hpp"

namespace riskrule {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kTermsPerLine = 6;

std::string number(double v) {
  if (v == kInf) return "+inf";
  if (v == -kInf) return "-inf";
  return fmt::format("{:.17g}", v);
}

void write_expression(std::string& out, const std::vector<LpTerm>& terms,
                      std::size_t indent) {
  if (terms.empty()) {
    out += "0";
    return;
  }
  for (std::size_t k = 0; k < terms.size(); ++k) {
    if (k > 0 && k % kTermsPerLine == 0) {
      out += '\n';
      out.append(indent, ' ');
    }
    const double c = terms[k].coef;
    if (k > 0) out += ' ';
    if (std::signbit(c)) {
      out += "- ";
    } else if (k > 0) {
      out += "+ ";
    }
    out += number(std::abs(c));
    out += ' ';
    out += terms[k].var;
  }
}

const char* sense_text(RowSense s) {
  switch (s) {
    case RowSense::kLessEqual:
      return "<=";
    case RowSense::kGreaterEqual:
      return ">=";
    case RowSense::kEqual:
      return "=";
  }
  return "=";
}

// ---- reader ----

enum class TokKind { kNumber, kIdent, kOp, kColon, kPlus, kMinus };

struct Token {
  TokKind kind;
  std::string text;
  double value = 0.0;
};

bool is_op_char(char c) { return c == '<' || c == '>' || c == '='; }

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t p = 0;
  while (p < s.size()) {
    const char c = s[p];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++p;
    } else if (c == '\\') {
      while (p < s.size() && s[p] != '\n') ++p;
    } else if (is_op_char(c)) {
      std::string op(1, c);
      ++p;
      if (p < s.size() && is_op_char(s[p])) op += s[p++];
      if (op == "=<" || op == "<") op = "<=";
      if (op == "=>" || op == ">") op = ">=";
      out.push_back({TokKind::kOp, op});
    } else if (c == ':') {
      out.push_back({TokKind::kColon, ":"});
      ++p;
    } else if (c == '+') {
      out.push_back({TokKind::kPlus, "+"});
      ++p;
    } else if (c == '-') {
      out.push_back({TokKind::kMinus, "-"});
      ++p;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::string rest(s.substr(p, std::min<std::size_t>(64, s.size() - p)));
      char* end = nullptr;
      const double v = std::strtod(rest.c_str(), &end);
      const std::size_t len = static_cast<std::size_t>(end - rest.c_str());
      if (len == 0) throw StructuralError(fmt::format("bad number near '{}'", rest));
      out.push_back({TokKind::kNumber, rest.substr(0, len), v});
      p += len;
    } else {
      const std::size_t start = p;
      while (p < s.size() && !std::isspace(static_cast<unsigned char>(s[p])) &&
             !is_op_char(s[p]) && s[p] != ':' && s[p] != '+' && s[p] != '-' &&
             s[p] != '\\') {
        ++p;
      }
      out.push_back({TokKind::kIdent, std::string(s.substr(start, p - start))});
    }
  }
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s;
}

enum class Section { kNone, kObjective, kConstraints, kBounds, kBinary, kGeneral, kEnd };

class LpReader {
 public:
  explicit LpReader(std::string_view text) : toks_(tokenize(text)) {}

  LpModel parse() {
    while (pos_ < toks_.size()) {
      if (auto s = section_at(pos_)) {
        section_ = *s;
        continue;
      }
      switch (section_) {
        case Section::kObjective:
          parse_objective();
          break;
        case Section::kConstraints:
          parse_row();
          break;
        case Section::kBounds:
          parse_bound();
          break;
        case Section::kBinary:
          model_.binaries.push_back(expect_ident());
          break;
        case Section::kGeneral:
          expect_ident();
          break;
        case Section::kEnd:
          pos_ = toks_.size();
          break;
        case Section::kNone:
          throw StructuralError(
              fmt::format("LP text before any section: '{}'", toks_[pos_].text));
      }
    }
    return std::move(model_);
  }

 private:
  // Recognizes a section keyword at position p, consuming it.
  std::optional<Section> section_at(std::size_t p) {
    if (toks_[p].kind != TokKind::kIdent) return std::nullopt;
    // A name followed by ':' is a label, never a keyword.
    if (p + 1 < toks_.size() && toks_[p + 1].kind == TokKind::kColon) return std::nullopt;
    const std::string w = lower(toks_[p].text);
    auto take = [&](std::size_t n, Section s) {
      pos_ = p + n;
      return std::optional<Section>(s);
    };
    if (w == "minimize" || w == "minimum" || w == "min") {
      model_.minimize = true;
      return take(1, Section::kObjective);
    }
    if (w == "maximize" || w == "maximum" || w == "max") {
      model_.minimize = false;
      return take(1, Section::kObjective);
    }
    if ((w == "subject" || w == "such") && p + 1 < toks_.size() &&
        toks_[p + 1].kind == TokKind::kIdent) {
      const std::string n = lower(toks_[p + 1].text);
      if (n == "to" || n == "that") return take(2, Section::kConstraints);
    }
    if (w == "st" || w == "s.t." || w == "st.") return take(1, Section::kConstraints);
    if (w == "bounds" || w == "bound") return take(1, Section::kBounds);
    if (w == "binary" || w == "binaries" || w == "bin") return take(1, Section::kBinary);
    if (w == "general" || w == "generals" || w == "gen") return take(1, Section::kGeneral);
    if (w == "end") return take(1, Section::kEnd);
    return std::nullopt;
  }

  bool at_section() {
    const std::size_t saved = pos_;
    const Section saved_section = section_;
    const bool saved_min = model_.minimize;
    const bool hit = section_at(pos_).has_value();
    pos_ = saved;
    section_ = saved_section;
    model_.minimize = saved_min;
    return hit;
  }

  std::string expect_ident() {
    if (pos_ >= toks_.size() || toks_[pos_].kind != TokKind::kIdent) {
      throw StructuralError("LP: expected a variable name");
    }
    return toks_[pos_++].text;
  }

  std::optional<std::string> label() {
    if (pos_ + 1 < toks_.size() && toks_[pos_].kind == TokKind::kIdent &&
        toks_[pos_ + 1].kind == TokKind::kColon) {
      std::string name = toks_[pos_].text;
      pos_ += 2;
      return name;
    }
    return std::nullopt;
  }

  // Reads "[+|-] [number] var" terms until an operator, a label or a section.
  std::vector<LpTerm> parse_expression() {
    std::vector<LpTerm> terms;
    while (pos_ < toks_.size()) {
      const Token& t = toks_[pos_];
      if (t.kind == TokKind::kOp) break;
      if (t.kind == TokKind::kIdent &&
          (at_section() ||
           (pos_ + 1 < toks_.size() && toks_[pos_ + 1].kind == TokKind::kColon))) {
        break;
      }
      double sign = 1.0;
      while (pos_ < toks_.size() &&
             (toks_[pos_].kind == TokKind::kPlus || toks_[pos_].kind == TokKind::kMinus)) {
        if (toks_[pos_].kind == TokKind::kMinus) sign = -sign;
        ++pos_;
      }
      if (pos_ < toks_.size() && toks_[pos_].kind == TokKind::kIdent && at_section()) {
        throw StructuralError("LP: dangling sign before a section keyword");
      }
      double coef = 1.0;
      if (pos_ < toks_.size() && toks_[pos_].kind == TokKind::kNumber) {
        coef = toks_[pos_++].value;
      }
      if (pos_ >= toks_.size() || toks_[pos_].kind != TokKind::kIdent) {
        // A lone number in the objective is a constant; this format never
        // emits one.
        throw StructuralError("LP: constant terms are not supported");
      }
      terms.push_back({toks_[pos_++].text, sign * coef});
    }
    return terms;
  }

  double parse_signed_number() {
    double sign = 1.0;
    while (pos_ < toks_.size() &&
           (toks_[pos_].kind == TokKind::kPlus || toks_[pos_].kind == TokKind::kMinus)) {
      if (toks_[pos_].kind == TokKind::kMinus) sign = -sign;
      ++pos_;
    }
    if (pos_ >= toks_.size()) throw StructuralError("LP: number expected");
    const Token& t = toks_[pos_];
    if (t.kind == TokKind::kNumber) {
      ++pos_;
      return sign * t.value;
    }
    if (t.kind == TokKind::kIdent) {
      const std::string w = lower(t.text);
      if (w == "inf" || w == "infinity") {
        ++pos_;
        return sign * kInf;
      }
    }
    throw StructuralError(fmt::format("LP: number expected, got '{}'", t.text));
  }

  bool next_is_number() const {
    std::size_t p = pos_;
    while (p < toks_.size() &&
           (toks_[p].kind == TokKind::kPlus || toks_[p].kind == TokKind::kMinus)) {
      ++p;
    }
    if (p >= toks_.size()) return false;
    if (toks_[p].kind == TokKind::kNumber) return true;
    if (toks_[p].kind == TokKind::kIdent) {
      const std::string w = lower(toks_[p].text);
      return w == "inf" || w == "infinity";
    }
    return false;
  }

  void parse_objective() {
    if (auto name = label()) model_.objective_name = *name;
    auto terms = parse_expression();
    model_.objective.insert(model_.objective.end(), terms.begin(), terms.end());
  }

  void parse_row() {
    LpRow row;
    if (auto name = label()) {
      row.name = *name;
    } else {
      row.name = fmt::format("R{}", model_.rows.size() + 1);
    }
    row.terms = parse_expression();
    if (pos_ >= toks_.size() || toks_[pos_].kind != TokKind::kOp) {
      throw StructuralError(fmt::format("LP: row {} lacks a sense", row.name));
    }
    const std::string op = toks_[pos_++].text;
    row.sense = op == "<=" ? RowSense::kLessEqual
                : op == ">=" ? RowSense::kGreaterEqual
                             : RowSense::kEqual;
    row.rhs = parse_signed_number();
    model_.rows.push_back(std::move(row));
  }

  void parse_bound() {
    // Forms: "x free", "lo <= x [<= hi]", "x >= lo", "x <= hi", "x = v".
    if (next_is_number()) {
      const double lo = parse_signed_number();
      const std::string op = toks_.at(pos_++).text;
      const std::string var = expect_ident();
      LpBound& b = bound_for(var);
      if (op == "<=") {
        b.lower = lo;
      } else if (op == ">=") {
        b.upper = lo;
      } else {
        b.lower = b.upper = lo;
      }
      if (pos_ < toks_.size() && toks_[pos_].kind == TokKind::kOp) {
        const std::string op2 = toks_[pos_++].text;
        const double hi = parse_signed_number();
        if (op2 == "<=") {
          b.upper = hi;
        } else {
          b.lower = hi;
        }
      }
      return;
    }
    const std::string var = expect_ident();
    LpBound& b = bound_for(var);
    if (pos_ < toks_.size() && toks_[pos_].kind == TokKind::kIdent &&
        lower(toks_[pos_].text) == "free") {
      ++pos_;
      b.lower = -kInf;
      b.upper = kInf;
      return;
    }
    const std::string op = toks_.at(pos_++).text;
    const double v = parse_signed_number();
    if (op == "<=") {
      b.upper = v;
    } else if (op == ">=") {
      b.lower = v;
    } else {
      b.lower = b.upper = v;
    }
  }

  LpBound& bound_for(const std::string& var) {
    auto it = bound_index_.find(var);
    if (it != bound_index_.end()) return model_.bounds[it->second];
    bound_index_[var] = model_.bounds.size();
    model_.bounds.push_back({var, 0.0, kInf});
    return model_.bounds.back();
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Section section_ = Section::kNone;
  LpModel model_;
  std::unordered_map<std::string, std::size_t> bound_index_;
};

}  // namespace

std::vector<std::string> LpModel::variables() const {
  std::vector<std::string> out;
  std::set<std::string, std::less<>> seen;
  auto add = [&](const std::string& v) {
    if (seen.insert(v).second) out.push_back(v);
  };
  for (const auto& t : objective) add(t.var);
  for (const auto& r : rows) {
    for (const auto& t : r.terms) add(t.var);
  }
  for (const auto& b : bounds) add(b.var);
  for (const auto& v : binaries) add(v);
  return out;
}

std::string write_lp(const LpModel& model) {
  std::string out;
  out += "\\ linear program written by riskrule\n";
  out += model.minimize ? "Minimize\n" : "Maximize\n";
  out += ' ';
  out += model.objective_name;
  out += ": ";
  write_expression(out, model.objective, 2);
  out += "\nSubject To\n";
  for (const auto& row : model.rows) {
    out += ' ';
    out += row.name;
    out += ": ";
    write_expression(out, row.terms, 2);
    out += ' ';
    out += sense_text(row.sense);
    out += ' ';
    out += number(row.rhs);
    out += '\n';
  }
  if (!model.bounds.empty()) {
    out += "Bounds\n";
    for (const auto& b : model.bounds) {
      if (b.lower == -kInf && b.upper == kInf) {
        out += fmt::format(" {} free\n", b.var);
      } else if (b.upper == kInf) {
        out += fmt::format(" {} >= {}\n", b.var, number(b.lower));
      } else {
        out += fmt::format(" {} <= {} <= {}\n", number(b.lower), b.var, number(b.upper));
      }
    }
  }
  if (!model.binaries.empty()) {
    out += "Binary\n";
    for (std::size_t k = 0; k < model.binaries.size(); ++k) {
      out += (k % 8 == 0) ? " " : " ";
      out += model.binaries[k];
      if (k % 8 == 7 || k + 1 == model.binaries.size()) out += '\n';
    }
  }
  out += "End\n";
  return out;
}

LpModel read_lp(std::string_view text) { return LpReader(text).parse(); }

double row_activity(const LpRow& row, const LpAssignment& x) {
  double sum = 0.0;
  for (const auto& t : row.terms) {
    auto it = x.find(t.var);
    if (it != x.end()) sum += t.coef * it->second;
  }
  return sum;
}

double evaluate_objective(const LpModel& model, const LpAssignment& x) {
  double sum = 0.0;
  for (const auto& t : model.objective) {
    auto it = x.find(t.var);
    if (it != x.end()) sum += t.coef * it->second;
  }
  return sum;
}

double max_violation(const LpModel& model, const LpAssignment& x) {
  double worst = 0.0;
  for (const auto& row : model.rows) {
    const double a = row_activity(row, x);
    double v = 0.0;
    switch (row.sense) {
      case RowSense::kLessEqual:
        v = a - row.rhs;
        break;
      case RowSense::kGreaterEqual:
        v = row.rhs - a;
        break;
      case RowSense::kEqual:
        v = std::abs(a - row.rhs);
        break;
    }
    worst = std::max(worst, v);
  }
  auto value = [&](const std::string& var) {
    auto it = x.find(var);
    return it == x.end() ? 0.0 : it->second;
  };
  std::set<std::string, std::less<>> bounded;
  for (const auto& b : model.bounds) {
    bounded.insert(b.var);
    const double v = value(b.var);
    worst = std::max({worst, b.lower - v, v - b.upper});
  }
  for (const auto& var : model.variables()) {
    if (!bounded.contains(var)) worst = std::max(worst, -value(var));
  }
  for (const auto& var : model.binaries) {
    const double v = value(var);
    worst = std::max(worst, std::min(std::abs(v), std::abs(v - 1.0)));
    worst = std::max({worst, -v, v - 1.0});
  }
  return worst;
}

}  // namespace riskrule
