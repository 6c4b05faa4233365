#ifndef DIAGHOM_POLYSYS_HPP
#define DIAGHOM_POLYSYS_HPP

#include "diaghom/core.hpp"

#include <cctype>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace diaghom {

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int line, int col)
      : std::runtime_error("parse error at " + std::to_string(line) + ":" +
                           std::to_string(col) + ": " + msg),
        line(line),
        col(col) {}
  int line;
  int col;
};

struct Monomial {
  Complex coeff;
  std::vector<int> exps;  // one exponent per variable
};

struct Poly {
  std::vector<Monomial> terms;
};

/// Immutable complex multivariate polynomial system with dense
/// exponent-vector monomials.  Evaluation sums terms in stored order.
class PolySystem {
 public:
  PolySystem() = default;

  PolySystem(std::vector<std::string> vars, std::vector<Poly> polys)
      : vars_(std::move(vars)), polys_(std::move(polys)) {
    for (const Poly& p : polys_)
      for (const Monomial& m : p.terms) {
        if (m.exps.size() != vars_.size())
          throw NumericalError("monomial exponent length mismatch");
        if (!std::isfinite(m.coeff.real()) || !std::isfinite(m.coeff.imag()))
          throw NumericalError("non-finite monomial coefficient");
      }
  }

  int num_vars() const { return static_cast<int>(vars_.size()); }
  int num_polys() const { return static_cast<int>(polys_.size()); }
  const std::vector<std::string>& variable_names() const { return vars_; }
  const std::vector<Poly>& polynomials() const { return polys_; }

  CVector evaluate(const CVector& x) const {
    if (x.size() != num_vars())
      throw NumericalError("evaluate: point dimension mismatch");
    CVector out(num_polys());
    for (int p = 0; p < num_polys(); ++p) {
      Complex acc(0.0);
      for (const Monomial& m : polys_[p].terms) {
        Complex term = m.coeff;
        for (int v = 0; v < num_vars(); ++v)
          for (int e = 0; e < m.exps[v]; ++e) term *= x(v);
        acc += term;
      }
      out(p) = acc;
    }
    return out;
  }

  /// Analytic Jacobian, entry (p,v) = d poly_p / d x_v.
  CMatrix jacobian(const CVector& x) const {
    if (x.size() != num_vars())
      throw NumericalError("jacobian: point dimension mismatch");
    CMatrix J = CMatrix::Zero(num_polys(), num_vars());
    for (int p = 0; p < num_polys(); ++p) {
      for (const Monomial& m : polys_[p].terms) {
        for (int v = 0; v < num_vars(); ++v) {
          if (m.exps[v] == 0) continue;
          Complex term = m.coeff * static_cast<double>(m.exps[v]);
          for (int w = 0; w < num_vars(); ++w) {
            const int e = (w == v) ? m.exps[w] - 1 : m.exps[w];
            for (int q = 0; q < e; ++q) term *= x(w);
          }
          J(p, v) += term;
        }
      }
    }
    return J;
  }

  int total_degree(int poly_index) const {
    int deg = 0;
    for (const Monomial& m : polys_[poly_index].terms) {
      int d = 0;
      for (int e : m.exps) d += e;
      deg = std::max(deg, d);
    }
    return deg;
  }

  int max_total_degree() const {
    int deg = 0;
    for (int p = 0; p < num_polys(); ++p) deg = std::max(deg, total_degree(p));
    return deg;
  }

  std::string to_text() const;

 private:
  std::vector<std::string> vars_;
  std::vector<Poly> polys_;
};

namespace detail {

inline std::string format_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string format_complex(Complex c) {
  std::string s = "(" + format_double(c.real());
  s += c.imag() < 0 ? "-" : "+";
  s += format_double(std::abs(c.imag())) + "*i)";
  return s;
}

// Parsing works on a sparse term map keyed by exponent vector; the map order
// fixes the (deterministic) stored term order.
using TermMap = std::map<std::vector<int>, Complex>;

inline void map_add(TermMap& a, const TermMap& b, Complex scale = 1.0) {
  for (const auto& [e, c] : b) a[e] += scale * c;
}

inline TermMap map_mul(const TermMap& a, const TermMap& b) {
  TermMap out;
  for (const auto& [ea, ca] : a)
    for (const auto& [eb, cb] : b) {
      std::vector<int> e(ea.size());
      for (size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
      out[e] += ca * cb;
    }
  return out;
}

struct Token {
  enum Kind { Ident, Number, Plus, Minus, Star, Caret, LParen, RParen, Semi,
              Colon, End } kind;
  std::string text;
  int line, col;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      if (src_[pos_] == '\n') { ++line_; col_ = 1; } else { ++col_; }
      ++pos_;
    }
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) { tok_.kind = Token::End; tok_.text.clear(); return; }
    const char c = src_[pos_];
    auto single = [&](Token::Kind k) {
      tok_.kind = k;
      tok_.text = std::string(1, c);
      ++pos_; ++col_;
    };
    switch (c) {
      case '+': single(Token::Plus); return;
      case '-': single(Token::Minus); return;
      case '*': single(Token::Star); return;
      case '^': single(Token::Caret); return;
      case '(': single(Token::LParen); return;
      case ')': single(Token::RParen); return;
      case ';': single(Token::Semi); return;
      case ':': single(Token::Colon); return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (pos_ < src_.size() && src_[pos_] == '.') {
        ++pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        size_t mark = pos_;
        ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
        if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        } else {
          pos_ = mark;  // 'e' belongs to an identifier, not an exponent
        }
      }
      tok_.kind = Token::Number;
      tok_.text = src_.substr(start, pos_ - start);
      col_ += static_cast<int>(pos_ - start);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      tok_.kind = Token::Ident;
      tok_.text = src_.substr(start, pos_ - start);
      col_ += static_cast<int>(pos_ - start);
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

class Parser {
 public:
  explicit Parser(const std::string& src) : lex_(src) {}

  PolySystem parse() {
    expect_ident("vars");
    expect(Token::Colon);
    while (lex_.peek().kind == Token::Ident) {
      Token t = lex_.take();
      if (var_index_.count(t.text))
        throw ParseError("duplicate variable '" + t.text + "'", t.line, t.col);
      var_index_[t.text] = static_cast<int>(vars_.size());
      vars_.push_back(t.text);
    }
    if (vars_.empty()) {
      const Token& t = lex_.peek();
      throw ParseError("expected at least one variable", t.line, t.col);
    }
    expect(Token::Semi);

    std::vector<Poly> polys;
    while (lex_.peek().kind != Token::End) {
      TermMap tm = parse_expr();
      expect(Token::Semi);
      Poly p;
      for (const auto& [e, c] : tm)
        if (c != Complex(0.0)) p.terms.push_back({c, e});
      polys.push_back(std::move(p));
    }
    if (polys.empty()) {
      const Token& t = lex_.peek();
      throw ParseError("empty system: no polynomials", t.line, t.col);
    }
    return PolySystem(vars_, std::move(polys));
  }

 private:
  TermMap constant(Complex c) {
    TermMap tm;
    tm[std::vector<int>(vars_.size(), 0)] = c;
    return tm;
  }

  TermMap parse_expr() {
    bool neg = false;
    while (lex_.peek().kind == Token::Plus || lex_.peek().kind == Token::Minus) {
      if (lex_.take().kind == Token::Minus) neg = !neg;
    }
    TermMap acc = parse_term();
    if (neg) {
      TermMap z;
      map_add(z, acc, Complex(-1.0));
      acc = std::move(z);
    }
    while (lex_.peek().kind == Token::Plus || lex_.peek().kind == Token::Minus) {
      const bool minus = lex_.take().kind == Token::Minus;
      TermMap rhs = parse_term();
      map_add(acc, rhs, minus ? Complex(-1.0) : Complex(1.0));
    }
    return acc;
  }

  TermMap parse_term() {
    TermMap acc = parse_factor();
    while (lex_.peek().kind == Token::Star) {
      lex_.take();
      acc = map_mul(acc, parse_factor());
    }
    return acc;
  }

  TermMap parse_factor() {
    TermMap base = parse_base();
    while (lex_.peek().kind == Token::Caret) {
      Token caret = lex_.take();
      Token t = lex_.take();
      if (t.kind != Token::Number || t.text.find_first_of(".eE") != std::string::npos)
        throw ParseError("exponent must be a nonnegative integer", caret.line, caret.col);
      const int e = std::stoi(t.text);
      TermMap acc = constant(Complex(1.0));
      for (int q = 0; q < e; ++q) acc = map_mul(acc, base);
      base = std::move(acc);
    }
    return base;
  }

  TermMap parse_base() {
    Token t = lex_.take();
    switch (t.kind) {
      case Token::Number:
        return constant(Complex(std::stod(t.text)));
      case Token::Minus: {
        TermMap inner = parse_base();
        TermMap z;
        map_add(z, inner, Complex(-1.0));
        return z;
      }
      case Token::LParen: {
        TermMap inner = parse_expr();
        Token close = lex_.take();
        if (close.kind != Token::RParen)
          throw ParseError("expected ')'", close.line, close.col);
        return inner;
      }
      case Token::Ident: {
        auto it = var_index_.find(t.text);
        if (it != var_index_.end()) {
          TermMap tm;
          std::vector<int> e(vars_.size(), 0);
          e[it->second] = 1;
          tm[e] = Complex(1.0);
          return tm;
        }
        if (t.text == "i") return constant(Complex(0.0, 1.0));
        throw ParseError("undeclared variable '" + t.text + "'", t.line, t.col);
      }
      default:
        throw ParseError("unexpected token '" + t.text + "'", t.line, t.col);
    }
  }

  void expect(Token::Kind k) {
    Token t = lex_.take();
    if (t.kind != k) throw ParseError("unexpected token '" + t.text + "'", t.line, t.col);
  }

  void expect_ident(const std::string& word) {
    Token t = lex_.take();
    if (t.kind != Token::Ident || t.text != word)
      throw ParseError("expected '" + word + "'", t.line, t.col);
  }

  Lexer lex_;
  std::vector<std::string> vars_;
  std::map<std::string, int> var_index_;
};

}  // namespace detail

/// Parses the system file grammar: `vars: x y z;` followed by one
/// polynomial statement per `;`.
inline PolySystem parse_system(const std::string& text) {
  detail::Parser parser(text);
  return parser.parse();
}

inline std::string PolySystem::to_text() const {
  std::string out = "vars:";
  for (const std::string& v : vars_) out += " " + v;
  out += ";\n";
  for (const Poly& p : polys_) {
    if (p.terms.empty()) {
      out += "0;\n";
      continue;
    }
    std::string line;
    for (size_t t = 0; t < p.terms.size(); ++t) {
      if (t > 0) line += " + ";
      line += detail::format_complex(p.terms[t].coeff);
      for (int v = 0; v < num_vars(); ++v) {
        const int e = p.terms[t].exps[v];
        if (e == 0) continue;
        line += "*" + vars_[v];
        if (e > 1) line += "^" + std::to_string(e);
      }
    }
    out += line + ";\n";
  }
  return out;
}

/// Randomized combination SF(w) = [M*f_A(u); N*f_B(v)] on C^{2k}, with the
/// first k coordinates of w holding u and the last k holding v.
inline PolySystem combine(const PolySystem& f_A, const PolySystem& f_B,
                          const CMatrix& M, const CMatrix& N) {
  const int k = f_A.num_vars();
  if (f_B.num_vars() != k)
    throw NumericalError("combine: ambient dimensions differ");
  if (M.cols() != f_A.num_polys() || N.cols() != f_B.num_polys())
    throw NumericalError("combine: randomizer shape mismatch");

  std::vector<std::string> vars;
  std::set<std::string> used;
  for (const std::string& v : f_A.variable_names()) {
    vars.push_back(v);
    used.insert(v);
  }
  for (const std::string& v : f_B.variable_names()) {
    std::string name = v;
    while (used.count(name)) name += "_v";
    vars.push_back(name);
    used.insert(name);
  }

  auto lift = [&](const Poly& p, int offset) {
    detail::TermMap tm;
    for (const Monomial& mo : p.terms) {
      std::vector<int> e(2 * k, 0);
      for (int v = 0; v < k; ++v) e[offset + v] = mo.exps[v];
      tm[e] += mo.coeff;
    }
    return tm;
  };

  std::vector<Poly> polys;
  auto emit = [&](const CMatrix& R, const PolySystem& f, int offset) {
    for (Eigen::Index r = 0; r < R.rows(); ++r) {
      detail::TermMap tm;
      for (Eigen::Index c = 0; c < R.cols(); ++c)
        detail::map_add(tm, lift(f.polynomials()[c], offset), R(r, c));
      Poly p;
      for (const auto& [e, coeff] : tm)
        if (coeff != Complex(0.0)) p.terms.push_back({coeff, e});
      polys.push_back(std::move(p));
    }
  };
  emit(M, f_A, 0);
  emit(N, f_B, k);
  return PolySystem(std::move(vars), std::move(polys));
}

/// Stacks two systems over the same ambient space (used for membership
/// filtering in C^k); variable names come from the first system.
inline PolySystem stack_systems(const PolySystem& f, const PolySystem& g) {
  if (f.num_vars() != g.num_vars())
    throw NumericalError("stack_systems: ambient dimensions differ");
  std::vector<Poly> polys = f.polynomials();
  for (const Poly& p : g.polynomials()) polys.push_back(p);
  return PolySystem(f.variable_names(), std::move(polys));
}

}  // namespace diaghom

#endif  // DIAGHOM_POLYSYS_HPP
