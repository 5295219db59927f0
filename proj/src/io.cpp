#include "nlg/io.hpp"

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "nlg/error.hpp"

namespace nlg {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string encode_label(const std::string& s) {
  bool raw = !s.empty() && s[0] != '%';
  for (unsigned char c : s) raw = raw && c > 0x20 && c < 0x7f;
  if (raw) return s;
  static const char* hex = "0123456789abcdef";
  std::string out = "%";
  for (unsigned char c : s) {
    out += hex[c >> 4];
    out += hex[c & 15];
  }
  return out;
}

std::string decode_label(const std::string& s) {
  if (s.empty() || s[0] != '%') return s;
  require(s.size() % 2 == 1, ErrorKind::InvalidInput, "bad escaped label '" + s + "'");
  auto nib = [&](char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    fail(ErrorKind::InvalidInput, "bad escaped label '" + s + "'");
  };
  std::string out;
  for (std::size_t i = 1; i < s.size(); i += 2) out += char(nib(s[i]) << 4 | nib(s[i + 1]));
  return out;
}

namespace {

// Line reader skipping blank lines and '#' comments; tracks line numbers for errors.
class Lines {
 public:
  explicit Lines(std::istream& in) : in_(in) {}

  bool next(std::vector<std::string>& words) {
    std::string line;
    while (std::getline(in_, line)) {
      ++no_;
      if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
      std::istringstream ss(line);
      words.clear();
      for (std::string w; ss >> w;) words.push_back(w);
      if (!words.empty()) return true;
    }
    return false;
  }

  std::vector<std::string> expect(const std::string& what) {
    std::vector<std::string> w;
    if (!next(w)) error("unexpected end of input, expected " + what);
    return w;
  }

  [[noreturn]] void error(const std::string& msg) const {
    fail(ErrorKind::InvalidInput, "line " + std::to_string(no_) + ": " + msg);
  }

  long integer(const std::string& s, long lo, long hi) const {
    std::size_t pos = 0;
    long v = 0;
    try {
      v = std::stol(s, &pos);
    } catch (const std::exception&) {
      error("expected an integer, got '" + s + "'");
    }
    if (pos != s.size() || v < lo || v > hi)
      error("integer '" + s + "' outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
  }

  double real(const std::string& s) const {
    std::size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      error("expected a number, got '" + s + "'");
    }
    if (pos != s.size()) error("expected a number, got '" + s + "'");
    return v;
  }

  std::istream& stream() { return in_; }

 private:
  std::istream& in_;
  int no_ = 0;
};

Mat read_matrix(Lines& in) {
  auto w = in.expect("matrix header");
  if (w.size() != 3 || w[0] != "matrix") in.error("expected 'matrix <rows> <cols>'");
  const long r = in.integer(w[1], 0, 1 << 12), c = in.integer(w[2], 0, 1 << 12);
  Mat m(r, c);
  for (long i = 0; i < r; ++i) {
    w = in.expect("matrix row");
    if (long(w.size()) != 2 * c) in.error("matrix row needs " + std::to_string(2 * c) + " numbers");
    for (long j = 0; j < c; ++j) m(i, j) = cplx(in.real(w[2 * j]), in.real(w[2 * j + 1]));
  }
  return m;
}

Vec read_vector(Lines& in) {
  auto w = in.expect("vector header");
  if (w.size() != 2 || w[0] != "vector") in.error("expected 'vector <n>'");
  const long n = in.integer(w[1], 0, 1 << 24);
  Vec v(n);
  for (long i = 0; i < n; ++i) {
    w = in.expect("vector entry");
    if (w.size() != 2) in.error("vector entry needs 're im'");
    v(i) = cplx(in.real(w[0]), in.real(w[1]));
  }
  return v;
}

void expect_magic(Lines& in, const std::string& a, const std::string& b) {
  const auto w = in.expect("'" + a + " " + b + "'");
  if (w.size() != 2 || w[0] != a || w[1] != b) in.error("expected '" + a + " " + b + "'");
}

int label_index(Lines& in, const std::vector<std::string>& labels, const std::string& raw, const char* what) {
  const std::string s = decode_label(raw);
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == s) return int(i);
  in.error(std::string("unknown ") + what + " '" + raw + "'");
}

}  // namespace

void write_matrix(std::ostream& out, const Mat& m) {
  out << "matrix " << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out << (j ? " " : "") << format_double(m(i, j).real()) << ' ' << format_double(m(i, j).imag());
    out << '\n';
  }
}

void write_vector(std::ostream& out, const Vec& v) {
  out << "vector " << v.size() << '\n';
  for (Eigen::Index i = 0; i < v.size(); ++i) out << format_double(v(i).real()) << ' ' << format_double(v(i).imag()) << '\n';
}

Mat read_matrix(std::istream& in) {
  Lines l(in);
  return read_matrix(l);
}

Vec read_vector(std::istream& in) {
  Lines l(in);
  return read_vector(l);
}

// ---------------------------------------------------------------- games

void write_game(std::ostream& out, const ExplicitGame& g, std::uint64_t cap) {
  g.validate();
  const int r = g.players();
  out << "nlg-game 1\nname " << encode_label(g.name()) << "\nheader " << r << ' ' << g.num_questions() << ' '
      << g.num_answers() << (g.is_xor() ? " xor" : "") << (g.symmetric() ? " symmetric" : "") << "\nquestions\n";
  for (const auto& q : g.question_labels()) out << encode_label(q) << '\n';
  out << "answers\n";
  for (const auto& a : g.answer_labels()) out << encode_label(a) << '\n';
  out << "pi " << g.distribution().size() << '\n';
  for (const auto& [q, w] : g.distribution()) {
    for (int x : q) out << x << ' ';
    out << w.str() << '\n';
  }

  bool by_name = !g.has_table() && !g.checker_name().empty();
  if (by_name) {
    try {
      named_checker(g.checker_name());
    } catch (const Error&) {
      by_name = false;
    }
  }
  if (by_name) {
    out << "accept checker " << g.checker_name() << "\nend\n";
    return;
  }

  // Materialize the predicate over the support of pi.
  std::uint64_t tuples = 1;
  for (int i = 0; i < r; ++i) {
    require(tuples <= cap / std::uint64_t(g.num_answers()), ErrorKind::TooLarge, g.name() + ": accept table too large");
    tuples *= std::uint64_t(g.num_answers());
  }
  require(tuples <= cap / std::max<std::uint64_t>(1, g.distribution().size()), ErrorKind::TooLarge,
          g.name() + ": accept table too large");
  std::vector<std::string> lines;
  std::map<std::vector<int>, bool> seen;
  for (const auto& [q, w] : g.distribution()) {
    if (!seen.emplace(q, true).second) continue;
    std::vector<int> a(r, 0);
    for (std::uint64_t t = 0; t < tuples; ++t) {
      std::uint64_t c = t;
      for (int i = 0; i < r; ++i, c /= std::uint64_t(g.num_answers())) a[i] = int(c % std::uint64_t(g.num_answers()));
      if (!g.predicate(q, a)) continue;
      std::string line;
      for (int x : q) line += std::to_string(x) + ' ';
      for (int i = 0; i < r; ++i) line += std::to_string(a[i]) + (i + 1 < r ? " " : "");
      lines.push_back(std::move(line));
    }
  }
  out << "accept table " << lines.size() << '\n';
  for (const auto& l : lines) out << l << '\n';
  out << "end\n";
}

ExplicitGame read_game(std::istream& is) {
  Lines in(is);
  expect_magic(in, "nlg-game", "1");
  auto w = in.expect("name");
  if (w.size() != 2 || w[0] != "name") in.error("expected 'name <label>'");
  const std::string name = decode_label(w[1]);
  w = in.expect("header");
  if (w.size() < 4 || w[0] != "header") in.error("expected 'header <r> <|Q|> <|A|> [flags]'");
  const int r = int(in.integer(w[1], 1, 16));
  const long nq = in.integer(w[2], 1, 1 << 24), na = in.integer(w[3], 1, 1 << 24);
  bool is_xor = false, symmetric = false;
  for (std::size_t i = 4; i < w.size(); ++i) {
    if (w[i] == "xor") is_xor = true;
    else if (w[i] == "symmetric") symmetric = true;
    else in.error("unknown flag '" + w[i] + "'");
  }
  auto labels = [&](const char* section, long n) {
    const auto h = in.expect(section);
    if (h.size() != 1 || h[0] != section) in.error(std::string("expected '") + section + "'");
    std::vector<std::string> out;
    for (long i = 0; i < n; ++i) {
      const auto l = in.expect("label");
      if (l.size() != 1) in.error("labels are single words");
      out.push_back(decode_label(l[0]));
    }
    return out;
  };
  auto qs = labels("questions", nq);
  auto as = labels("answers", na);
  ExplicitGame g(name, r, std::move(qs), std::move(as));

  w = in.expect("pi");
  if (w.size() != 2 || w[0] != "pi") in.error("expected 'pi <N>'");
  const long npi = in.integer(w[1], 1, 1L << 30);
  for (long k = 0; k < npi; ++k) {
    w = in.expect("pi entry");
    if (int(w.size()) != r + 1) in.error("pi entry needs " + std::to_string(r) + " indices and a weight");
    std::vector<int> q(r);
    for (int i = 0; i < r; ++i) q[i] = int(in.integer(w[i], 0, nq - 1));
    Rational p;
    try {
      p = Rational::parse(w[r]);
    } catch (const Error&) {
      in.error("bad weight '" + w[r] + "'");
    }
    g.add_question(std::move(q), p);
  }

  w = in.expect("accept");
  if (w.size() != 3 || w[0] != "accept") in.error("expected 'accept checker <name>' or 'accept table <M>'");
  if (w[1] == "checker") {
    g.set_checker(w[2], named_checker(w[2]));
  } else if (w[1] == "table") {
    const long m = in.integer(w[2], 0, 1L << 30);
    std::vector<std::pair<std::vector<int>, std::vector<int>>> acc;
    for (long k = 0; k < m; ++k) {
      const auto t = in.expect("accepted tuple");
      if (int(t.size()) != 2 * r) in.error("accepted tuple needs " + std::to_string(2 * r) + " indices");
      std::vector<int> q(r), a(r);
      for (int i = 0; i < r; ++i) {
        q[i] = int(in.integer(t[i], 0, nq - 1));
        a[i] = int(in.integer(t[r + i], 0, na - 1));
      }
      acc.emplace_back(std::move(q), std::move(a));
    }
    g.set_accept_table(std::move(acc));
  } else {
    in.error("expected 'checker' or 'table'");
  }
  w = in.expect("end");
  if (w.size() != 1 || w[0] != "end") in.error("expected 'end'");
  g.set_xor(is_xor);
  g.set_symmetric(symmetric);
  g.validate();
  return g;
}

// ---------------------------------------------------------------- strategies

void write_deterministic(std::ostream& out, const ExplicitGame& g, const DeterministicStrategy& s) {
  out << "nlg-strategy deterministic\n";
  for (std::size_t p = 0; p < s.table.size(); ++p)
    for (std::size_t q = 0; q < s.table[p].size(); ++q)
      if (s.table[p][q] >= 0)
        out << p << ' ' << encode_label(g.question_labels()[q]) << ' ' << encode_label(g.answer_labels()[s.table[p][q]])
            << '\n';
}

DeterministicStrategy read_deterministic(std::istream& is, const ExplicitGame& g) {
  Lines in(is);
  expect_magic(in, "nlg-strategy", "deterministic");
  DeterministicStrategy s;
  s.table.assign(g.players(), std::vector<int>(g.num_questions(), -1));
  for (std::vector<std::string> w; in.next(w);) {
    if (w.size() != 3) in.error("expected 'player question answer'");
    const int p = int(in.integer(w[0], 0, g.players() - 1));
    const int q = label_index(in, g.question_labels(), w[1], "question");
    const int a = label_index(in, g.answer_labels(), w[2], "answer");
    if (s.table[p][q] >= 0 && s.table[p][q] != a) in.error("conflicting answers for one question");
    s.table[p][q] = a;
  }
  return s;
}

void write_quantum(std::ostream& out, const ExplicitGame& g, const QuantumStrategy& s) {
  out << "nlg-strategy quantum\ndims";
  for (int d : s.dims) out << ' ' << d;
  out << "\nstate\n";
  write_vector(out, s.state);
  for (std::size_t p = 0; p < s.povms.size(); ++p)
    for (std::size_t q = 0; q < s.povms[p].size(); ++q) {
      const auto& povm = s.povms[p][q];
      if (povm.empty()) continue;
      out << "povm " << p << ' ' << encode_label(g.question_labels()[q]) << ' ' << povm.size() << '\n';
      for (std::size_t a = 0; a < povm.size(); ++a) {
        out << "element " << encode_label(g.answer_labels()[a]) << '\n';
        write_matrix(out, povm[a]);
      }
    }
  out << "end\n";
}

QuantumStrategy read_quantum(std::istream& is, const ExplicitGame& g) {
  Lines in(is);
  expect_magic(in, "nlg-strategy", "quantum");
  QuantumStrategy s;
  auto w = in.expect("dims");
  if (int(w.size()) != g.players() + 1 || w[0] != "dims") in.error("expected one dimension per player");
  for (std::size_t i = 1; i < w.size(); ++i) s.dims.push_back(int(in.integer(w[i], 1, 1 << 12)));
  w = in.expect("state");
  if (w.size() != 1 || w[0] != "state") in.error("expected 'state'");
  s.state = read_vector(in);
  s.povms.assign(g.players(), std::vector<std::vector<Mat>>(g.num_questions()));
  for (;;) {
    w = in.expect("povm or end");
    if (w.size() == 1 && w[0] == "end") break;
    if (w.size() != 4 || w[0] != "povm") in.error("expected 'povm <player> <question> <k>'");
    const int p = int(in.integer(w[1], 0, g.players() - 1));
    const int q = label_index(in, g.question_labels(), w[2], "question");
    const long k = in.integer(w[3], 1, g.num_answers());
    auto& povm = s.povms[p][q];
    if (!povm.empty()) in.error("duplicate povm");
    povm.assign(g.num_answers(), Mat::Zero(s.dims[p], s.dims[p]));
    for (long e = 0; e < k; ++e) {
      w = in.expect("element");
      if (w.size() != 2 || w[0] != "element") in.error("expected 'element <answer>'");
      const int a = label_index(in, g.answer_labels(), w[1], "answer");
      povm[a] = read_matrix(in);
    }
  }
  s.validate();
  return s;
}

// ---------------------------------------------------------------- metric inputs

MetricsInput read_metrics(std::istream& is) {
  Lines in(is);
  expect_magic(in, "nlg-metrics", "1");
  MetricsInput x;
  bool have_state = false;
  for (std::vector<std::string> w;;) {
    w = in.expect("section or end");
    const std::string& k = w[0];
    if (k == "end" && w.size() == 1) break;
    if (k == "state" && w.size() == 3) {
      x.state.registers = int(in.integer(w[1], 1, 8));
      x.state.dim = int(in.integer(w[2], 1, 64));
      x.state.amp = read_vector(in);
      have_state = true;
    } else if (k == "points" && w.size() == 3) {
      x.points = int(in.integer(w[1], 1, 1 << 16));
      x.outcomes = int(in.integer(w[2], 1, 1 << 16));
      x.a.assign(x.points, {});
    } else if (k == "weights") {
      if (int(w.size()) != x.points + 1) in.error("weights need one entry per point");
      for (std::size_t i = 1; i < w.size(); ++i) x.weights.push_back(in.real(w[i]));
    } else if (k == "point" && w.size() == 2) {
      if (x.points == 0) in.error("'points' must come first");
      const int v = int(in.integer(w[1], 0, x.points - 1));
      if (!x.a[v].empty()) in.error("duplicate point");
      for (int o = 0; o < x.outcomes; ++o) x.a[v].push_back(read_matrix(in));
    } else if (k == "function") {
      if (int(w.size()) != x.points + 1) in.error("function needs one value per point");
      std::vector<int> vals;
      for (std::size_t i = 1; i < w.size(); ++i) vals.push_back(int(in.integer(w[i], 0, x.outcomes - 1)));
      x.values.push_back(std::move(vals));
    } else if (k == "element" && w.size() == 1) {
      if (x.values.size() != x.m.size() + 1) in.error("'element' must follow its function");
      x.m.push_back(read_matrix(in));
    } else if (k == "edge" && w.size() == 3) {
      x.edges.emplace_back(int(in.integer(w[1], 0, x.points - 1)), int(in.integer(w[2], 0, x.points - 1)));
    } else if (k == "probe" && w.size() == 2) {
      const long n = in.integer(w[1], 0, 1 << 16);
      for (long i = 0; i < n; ++i) x.probe.push_back(read_matrix(in));
    } else {
      in.error("unknown section '" + k + "'");
    }
  }
  if (!have_state) in.error("missing state");
  for (int v = 0; v < x.points; ++v)
    if (x.a[v].empty()) in.error("point " + std::to_string(v) + " has no measurement");
  if (!x.m.empty() && x.m.size() != x.values.size()) in.error("every function needs an element, or none does");
  x.state.validate();
  return x;
}

void write_metrics(std::ostream& out, const MetricsInput& x) {
  out << "nlg-metrics 1\nstate " << x.state.registers << ' ' << x.state.dim << '\n';
  write_vector(out, x.state.amp);
  out << "points " << x.points << ' ' << x.outcomes << '\n';
  if (!x.weights.empty()) {
    out << "weights";
    for (double w : x.weights) out << ' ' << format_double(w);
    out << '\n';
  }
  for (int v = 0; v < x.points; ++v) {
    out << "point " << v << '\n';
    for (const auto& m : x.a[v]) write_matrix(out, m);
  }
  for (std::size_t g = 0; g < x.values.size(); ++g) {
    out << "function";
    for (int v : x.values[g]) out << ' ' << v;
    out << '\n';
    if (g < x.m.size()) {
      out << "element\n";
      write_matrix(out, x.m[g]);
    }
  }
  for (const auto& [u, v] : x.edges) out << "edge " << u << ' ' << v << '\n';
  if (!x.probe.empty()) {
    out << "probe " << x.probe.size() << '\n';
    for (const auto& m : x.probe) write_matrix(out, m);
  }
  out << "end\n";
}

}  // namespace nlg
