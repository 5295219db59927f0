#include <istream>
#include <ostream>
#include <sstream>

#include "nlg/protocols.hpp"
#include "nlg/token.hpp"

namespace nlg {

namespace {

std::array<int, 3> player_triple(int r, Rng& rng) {
  std::vector<int> rest(r);
  for (int i = 0; i < r; ++i) rest[i] = i;
  std::array<int, 3> out{};
  for (int k = 0; k < 3; ++k) {
    const std::size_t at = rng.below(rest.size());
    out[k] = rest[at];
    rest.erase(rest.begin() + long(at));
  }
  return out;
}

std::vector<std::uint8_t> random_bits(std::size_t n, Rng& rng) {
  std::vector<std::uint8_t> v(n);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 64 == 0) word = rng.next();
    v[i] = (word >> (i % 64)) & 1;
  }
  return v;
}

std::vector<std::uint8_t> xor_bits(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  std::vector<std::uint8_t> c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] ^ b[i];
  return c;
}

std::uint8_t dot(const std::vector<std::uint8_t>& a, const std::uint8_t* b, std::size_t n) {
  std::uint8_t s = 0;
  for (std::size_t i = 0; i < n; ++i) s ^= a[i] & b[i];
  return s;
}

std::optional<std::uint8_t> answer_bit(const Token& t) {
  if (t == "0") return 0;
  if (t == "1") return 1;
  return std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------- linearity

LinearityTest::LinearityTest(int n, int r) : n_(n), r_(r) {
  require(n >= 1, ErrorKind::InvalidInput, "linearity test needs n >= 1");
  require(r >= 3, ErrorKind::InvalidInput, "linearity test needs three players");
}

Round LinearityTest::sample(Rng& rng) const {
  const auto x = random_bits(std::size_t(n_), rng);
  const auto y = random_bits(std::size_t(n_), rng);
  const auto t = player_triple(r_, rng);
  Round round;
  round.questions.assign(r_, Token());
  round.questions[t[0]] = bits_to_string(x);
  round.questions[t[1]] = bits_to_string(y);
  round.questions[t[2]] = bits_to_string(xor_bits(x, y));
  return round;
}

bool LinearityTest::accept(const Round& round, std::span<const Token> answers) const {
  if (round.auto_accept) return true;
  if (answers.size() != round.questions.size()) return false;
  std::vector<std::uint8_t> sum(std::size_t(n_), 0);
  std::uint8_t parity = 0;
  int queried = 0;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    if (round.questions[i].empty()) continue;
    ++queried;
    const auto x = string_to_bits(round.questions[i]);
    const auto a = answer_bit(answers[i]);
    if (!x || int(x->size()) != n_ || !a) return false;
    sum = xor_bits(sum, *x);
    parity ^= *a;
  }
  // x, y and x + y sum to zero; anything else is not a round of this test.
  for (auto b : sum)
    if (b) return false;
  return queried == 3 && parity == 0;
}

std::optional<std::vector<WeightedRound>> LinearityTest::enumerate(std::uint64_t cap) const {
  require(2 * n_ < 62, ErrorKind::TooLarge, "enumeration exceeds cap " + std::to_string(cap));
  const std::uint64_t nxy = std::uint64_t(1) << (2 * n_);
  const std::uint64_t triples = std::uint64_t(r_) * (r_ - 1) * (r_ - 2);
  require(nxy * triples <= cap, ErrorKind::TooLarge, "enumeration exceeds cap " + std::to_string(cap));
  const Rational w(1, std::int64_t(nxy * triples));
  std::vector<WeightedRound> out;
  for (std::uint64_t k = 0; k < nxy; ++k) {
    std::vector<std::uint8_t> x(n_, 0), y(n_, 0);
    for (int i = 0; i < n_; ++i) {
      x[i] = (k >> i) & 1;
      y[i] = (k >> (n_ + i)) & 1;
    }
    const std::string tx = bits_to_string(x), ty = bits_to_string(y), txy = bits_to_string(xor_bits(x, y));
    for (int a = 0; a < r_; ++a)
      for (int b = 0; b < r_; ++b)
        for (int c = 0; c < r_; ++c) {
          if (a == b || a == c || b == c) continue;
          Round round;
          round.questions.assign(r_, Token());
          round.questions[a] = tx;
          round.questions[b] = ty;
          round.questions[c] = txy;
          out.push_back({w, std::move(round)});
        }
  }
  return out;
}

FunctionStrategy linear_strategy(const std::vector<std::uint8_t>& u) {
  return FunctionStrategy([u](int, const Token& t, Rng&) -> Token {
    const auto x = string_to_bits(t);
    if (!x || x->size() != u.size()) return "0";
    return dot(u, x->data(), u.size()) ? "1" : "0";
  });
}

// ---------------------------------------------------------------- QUADEQ instances

void QuadeqInstance::validate() const {
  require(naux >= 0 && n > naux, ErrorKind::InvalidInput, "QUADEQ needs n > naux >= 0");
  require((n - naux) % 2 == 0, ErrorKind::InvalidInput, "labelled variables must split into two equal chunks");
  // Equal labels name the same chunk twice (a question paired with itself).
  require(!label1.empty() && !label2.empty(), ErrorKind::InvalidInput, "QUADEQ labels must be non-empty");
  for (const auto& e : equations) {
    require(e.constant <= 1, ErrorKind::InvalidInput, "constants are bits");
    for (auto [i, j] : e.terms)
      require(i >= 0 && j >= 0 && i < n && j < n, ErrorKind::InvalidInput,
              "variable index outside 0.." + std::to_string(n - 1));
  }
}

bool QuadeqInstance::satisfied(const std::vector<std::uint8_t>& x) const {
  require(int(x.size()) == n, ErrorKind::DimensionMismatch, "assignment length differs from n");
  for (const auto& e : equations) {
    std::uint8_t s = e.constant;
    for (auto [i, j] : e.terms) s ^= x[i] & x[j];
    if (s) return false;
  }
  return true;
}

std::vector<std::uint8_t> QuadeqInstance::coefficients(std::size_t k) const {
  std::vector<std::uint8_t> a(std::size_t(n) * std::size_t(n), 0);
  for (auto [i, j] : equations.at(k).terms) a[std::size_t(i) * n + j] ^= 1;
  return a;
}

QuadeqInstance read_quadeq(std::istream& in) {
  QuadeqInstance inst;
  std::string line;
  int lineno = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      const auto p = line.find_first_not_of(" \t\r");
      if (p != std::string::npos && line[p] != '#') return true;
    }
    return false;
  };
  auto where = [&] { return "line " + std::to_string(lineno) + ": "; };
  require(next_line(), ErrorKind::InvalidInput, "missing QUADEQ header");
  long k = -1;
  {
    std::istringstream ls(line);
    require(bool(ls >> k >> inst.n) && k >= 0, ErrorKind::InvalidInput, where() + "header must be 'K n [naux]'");
    if (!(ls >> inst.naux)) inst.naux = 0;
  }
  for (long e = 0; e < k; ++e) {
    require(next_line(), ErrorKind::InvalidInput, "expected " + std::to_string(k) + " equations");
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::InvalidInput, where() + "missing '='");
    std::istringstream lhs(line.substr(0, eq)), rhs(line.substr(eq + 1));
    QuadEquation qe;
    std::vector<long> idx;
    std::string tok;
    while (lhs >> tok) {
      try {
        std::size_t used = 0;
        idx.push_back(std::stol(tok, &used));
        require(used == tok.size(), ErrorKind::InvalidInput, "");
      } catch (...) {
        fail(ErrorKind::InvalidInput, where() + "bad index '" + tok + "'");
      }
    }
    require(idx.size() % 2 == 0, ErrorKind::InvalidInput, where() + "indices must come in pairs");
    for (std::size_t t = 0; t < idx.size(); t += 2) qe.terms.push_back({int(idx[t]), int(idx[t + 1])});
    int c = -1;
    std::string extra;
    require(bool(rhs >> c) && (c == 0 || c == 1) && !(rhs >> extra), ErrorKind::InvalidInput,
            where() + "constant must be 0 or 1");
    qe.constant = std::uint8_t(c);
    inst.equations.push_back(std::move(qe));
  }
  require(!next_line(), ErrorKind::InvalidInput, where() + "more equations than declared");
  inst.validate();
  return inst;
}

void write_quadeq(std::ostream& out, const QuadeqInstance& inst) {
  out << inst.equations.size() << ' ' << inst.n;
  if (inst.naux) out << ' ' << inst.naux;
  out << '\n';
  for (const auto& e : inst.equations) {
    for (auto [i, j] : e.terms) out << i << ' ' << j << ' ';
    out << "= " << int(e.constant) << '\n';
  }
}

// ---------------------------------------------------------------- QUADEQ test

Token quadeq_question_token(const QuadeqQuestion& q) {
  if (q.kind == 1) return pack({"1", q.label1, bits_to_string(q.bits)});
  return pack({"2", q.label1, q.label2, bits_to_string(q.bits)});
}

std::optional<QuadeqQuestion> parse_quadeq_question(const Token& t) {
  const auto f = unpack(t);
  if (!f || f->empty()) return std::nullopt;
  QuadeqQuestion q;
  if ((*f)[0] == "1" && f->size() == 3) {
    q.kind = 1;
    q.label1 = (*f)[1];
  } else if ((*f)[0] == "2" && f->size() == 4) {
    q.kind = 2;
    q.label1 = (*f)[1];
    q.label2 = (*f)[2];
  } else {
    return std::nullopt;
  }
  auto bits = string_to_bits(f->back());
  if (!bits) return std::nullopt;
  q.bits = std::move(*bits);
  return q;
}

Round quadeq_round(const QuadeqInstance& inst, int players, Rng& rng) {
  require(players >= 3, ErrorKind::InvalidInput, "QUADEQ test needs three players");
  const std::size_t n = std::size_t(inst.n), c = std::size_t(inst.chunk());
  QuadeqMemo memo;
  const int step = int(rng.below(4));
  memo.branch = step == 0 ? int(rng.below(4)) : step + 3;
  memo.players = player_triple(players, rng);
  Round round;
  round.questions.assign(players, Token());
  auto put = [&](int slot, int kind, const std::string& label, std::vector<std::uint8_t> bits) {
    QuadeqQuestion q{kind, kind == 1 ? label : inst.label1, kind == 1 ? "" : inst.label2, std::move(bits)};
    round.questions[memo.players[slot]] = quadeq_question_token(q);
  };
  switch (memo.branch) {
    case 0:
    case 1:
    case 2:
    case 3: {
      const std::size_t len = memo.branch < 2 ? c : memo.branch == 2 ? n : n * n;
      const int kind = memo.branch < 2 ? 1 : 2;
      const std::string& label = memo.branch == 1 ? inst.label2 : inst.label1;
      auto x = random_bits(len, rng), y = random_bits(len, rng);
      auto z = xor_bits(x, y);
      put(0, kind, label, std::move(x));
      put(1, kind, label, std::move(y));
      put(2, kind, label, std::move(z));
      break;
    }
    case 4: {
      auto u = random_bits(c, rng), v = random_bits(c, rng);
      std::vector<std::uint8_t> w(n, 0);
      std::copy(u.begin(), u.end(), w.begin());
      std::copy(v.begin(), v.end(), w.begin() + long(c));
      put(0, 1, inst.label1, std::move(u));
      put(1, 1, inst.label2, std::move(v));
      put(2, 2, "", std::move(w));
      break;
    }
    case 5: {
      auto u = random_bits(n, rng), v = random_bits(n, rng);
      std::vector<std::uint8_t> t(n * n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) t[i * n + j] = u[i] & v[j];
      put(0, 2, "", std::move(u));
      put(1, 2, "", std::move(v));
      put(2, 2, "", std::move(t));
      break;
    }
    default: {
      memo.v = random_bits(inst.equations.size(), rng);
      std::vector<std::uint8_t> w(n * n, 0);
      for (std::size_t k = 0; k < inst.equations.size(); ++k)
        if (memo.v[k]) w = xor_bits(w, inst.coefficients(k));
      // Only one player is asked in this step.
      memo.players = {memo.players[0], -1, -1};
      put(0, 2, "", std::move(w));
      break;
    }
  }
  round.memo = std::move(memo);
  return round;
}

bool quadeq_check(const QuadeqInstance& inst, const Round& round, std::span<const Token> answers) {
  if (round.auto_accept) return true;
  const auto* memo = std::any_cast<QuadeqMemo>(&round.memo);
  if (!memo) return false;
  std::array<std::uint8_t, 3> a{};
  const int used = memo->branch == 6 ? 1 : 3;
  for (int k = 0; k < used; ++k) {
    const int p = memo->players[k];
    if (p < 0 || std::size_t(p) >= answers.size()) return false;
    const auto b = answer_bit(answers[p]);
    if (!b) return false;
    a[k] = *b;
  }
  if (memo->branch == 5) return (a[0] & a[1]) == a[2];
  if (memo->branch == 6) {
    std::uint8_t s = 0;
    for (std::size_t k = 0; k < memo->v.size() && k < inst.equations.size(); ++k)
      s ^= memo->v[k] & inst.equations[k].constant;
    return a[0] == s;
  }
  return (a[0] ^ a[1]) == a[2];
}

Token quadeq_honest_answer(const QuadeqInstance& inst, const std::vector<std::uint8_t>& x, const QuadeqQuestion& q) {
  const std::size_t n = std::size_t(inst.n), c = std::size_t(inst.chunk());
  std::uint8_t s = 0;
  if (q.kind == 1 && q.bits.size() == c) {
    if (q.label1 == inst.label1) s = dot(q.bits, x.data(), c);
    else if (q.label1 == inst.label2) s = dot(q.bits, x.data() + c, c);
  } else if (q.kind == 2 && q.bits.size() == n) {
    s = dot(q.bits, x.data(), n);
  } else if (q.kind == 2 && q.bits.size() == n * n) {
    for (std::size_t i = 0; i < n; ++i)
      if (x[i])
        for (std::size_t j = 0; j < n; ++j) s ^= q.bits[i * n + j] & x[j];
  }
  return s ? "1" : "0";
}

QuadeqTest::QuadeqTest(QuadeqInstance inst, int r) : inst_(std::move(inst)), r_(r) {
  inst_.validate();
  require(r >= 3, ErrorKind::InvalidInput, "QUADEQ test needs three players");
}

FunctionStrategy honest_quadeq_strategy(const QuadeqInstance& inst, const std::vector<std::uint8_t>& x) {
  require(int(x.size()) == inst.n, ErrorKind::DimensionMismatch, "assignment length differs from n");
  return FunctionStrategy([inst, x](int, const Token& t, Rng&) -> Token {
    const auto q = parse_quadeq_question(t);
    return q ? quadeq_honest_answer(inst, x, *q) : Token("0");
  });
}

}  // namespace nlg
