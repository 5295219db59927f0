#include <bit>
#include <map>

#include "nlg/reductions.hpp"
#include "nlg/token.hpp"

namespace nlg {

namespace {

// Circuit under construction: gates keyed by the product they compute.
struct Builder {
  int inputs;
  std::vector<Gate> gates;
  std::map<std::pair<std::uint64_t, std::uint64_t>, int> memo;

  int gate(int u, std::uint8_t cu, int v, std::uint8_t cv, std::pair<std::uint64_t, std::uint64_t> key) {
    auto [it, fresh] = memo.try_emplace(key, inputs + int(gates.size()));
    if (fresh) gates.push_back({u, v, cu, cv});
    return it->second;
  }
};

struct Circuit {
  std::vector<Gate> gates;
  std::vector<int> sum;  // variables whose sum is constrained
  std::uint8_t constant = 0;
  bool trivial = false;  // no equation at all
  std::string name;
};

Circuit anf_circuit(const std::vector<std::uint8_t>& truth, int nbits) {
  std::vector<std::uint8_t> a = truth;
  for (int i = 0; i < nbits; ++i)
    for (std::uint32_t x = 0; x < a.size(); ++x)
      if (x >> i & 1) a[x] ^= a[x ^ (1u << i)];
  Builder b{nbits, {}, {}};
  Circuit c;
  c.name = "anf";
  for (std::uint32_t s = 1; s < a.size(); ++s) {
    if (!a[s]) continue;
    int var = std::countr_zero(s);
    std::uint32_t prefix = 1u << var;
    for (int i = var + 1; i < nbits; ++i)
      if (s >> i & 1) {
        prefix |= 1u << i;
        var = b.gate(var, 0, i, 0, {prefix, 0});
      }
    c.sum.push_back(var);
  }
  c.gates = std::move(b.gates);
  c.constant = 1 ^ a[0];
  c.trivial = c.sum.empty() && c.constant == 0;
  return c;
}

// Sum of indicator products [x == p] over the points with truth value `value`;
// the sum equals [V = value] since the indicators are disjoint.
Circuit minterm_circuit(const std::vector<std::uint8_t>& truth, int nbits, std::uint8_t value) {
  Builder b{nbits, {}, {}};
  Circuit c;
  c.name = value ? "accepting minterms" : "rejecting minterms";
  for (std::uint32_t p = 0; p < truth.size(); ++p) {
    if (truth[p] != value) continue;
    auto lit = [&](int i) { return std::uint8_t(1 ^ (p >> i & 1)); };
    int var = b.gate(0, lit(0), 1, lit(1), {2, p & 3});
    for (int i = 2; i < nbits; ++i) var = b.gate(var, 0, i, lit(i), {std::uint64_t(i) + 1, p & ((2u << i) - 1)});
    c.sum.push_back(var);
  }
  c.gates = std::move(b.gates);
  // value 1: sum = 1; value 0: V = 1 + sum, so sum = 0.
  c.constant = value;
  c.trivial = c.sum.empty() && c.constant == 0;
  return c;
}

}  // namespace

std::vector<std::uint8_t> QuadeqEncoding::complete(const std::vector<std::uint8_t>& inputs) const {
  const int nin = instance.n - instance.naux;
  require(int(inputs.size()) == nin, ErrorKind::DimensionMismatch, "expected " + std::to_string(nin) + " input bits");
  std::vector<std::uint8_t> x = inputs;
  for (const auto& g : gates) x.push_back((x[g.u] ^ g.cu) & (x[g.v] ^ g.cv));
  return x;
}

QuadeqEncoding predicate_to_quadeq(const std::function<bool(std::uint32_t)>& accept, int m) {
  require(m >= 1 && m <= 8, ErrorKind::InvalidInput, "answer width must lie in [1, 8]");
  const int nbits = 2 * m;
  std::vector<std::uint8_t> truth(std::size_t(1) << nbits);
  for (std::uint32_t x = 0; x < truth.size(); ++x) truth[x] = accept(x);

  Circuit best = anf_circuit(truth, nbits);
  for (std::uint8_t v : {1, 0}) {
    Circuit c = minterm_circuit(truth, nbits, v);
    if (c.gates.size() < best.gates.size()) best = std::move(c);
  }

  QuadeqEncoding enc;
  enc.circuit = best.name;
  enc.gates = best.gates;
  auto& inst = enc.instance;
  inst.naux = int(best.gates.size());
  inst.n = nbits + inst.naux;
  for (std::size_t k = 0; k < best.gates.size(); ++k) {
    // y = (u + cu)(v + cv)  <=>  y^2 + uv + cv u^2 + cu v^2 = cu cv
    const Gate& g = best.gates[k];
    const int y = nbits + int(k);
    QuadEquation e;
    e.terms = {{y, y}, {g.u, g.v}};
    if (g.cv) e.terms.push_back({g.u, g.u});
    if (g.cu) e.terms.push_back({g.v, g.v});
    e.constant = g.cu & g.cv;
    inst.equations.push_back(std::move(e));
  }
  if (!best.trivial) {
    QuadEquation e;
    for (int v : best.sum) e.terms.push_back({v, v});
    e.constant = best.constant;
    inst.equations.push_back(std::move(e));
  }
  return enc;
}

// ---------------------------------------------------------------- binarized game

namespace {

struct BinaryMemo {
  std::shared_ptr<const QuadeqEncoding> psi;
  Round inner;
};

}  // namespace

BinarizedGame::BinarizedGame(GamePtr g1, const ReductionConfig& cfg) : g1_(std::move(g1)) {
  cfg.validate();
  require(g1_ && g1_->players() == 3, ErrorKind::InvalidInput, "binarization needs a 3-player game");
  require(g1_->token_checkable(), ErrorKind::InvalidInput,
          g1_->name() + ": predicate depends on referee-private data and cannot be encoded per question pair");
  const std::uint64_t cap = std::uint64_t(1) << cfg.max_answer_bits;
  auto a = g1_->answer_alphabet(cap);
  require(a.has_value() && a->size() <= cap, ErrorKind::TooLarge,
          g1_->name() + ": answers do not fit in " + std::to_string(cfg.max_answer_bits) + " bits");
  alphabet_ = std::move(*a);
  require(!alphabet_.empty(), ErrorKind::InvalidInput, "empty answer alphabet");
  for (std::size_t i = 0; i < alphabet_.size(); ++i) code_.emplace(alphabet_[i], std::uint32_t(i));
  m_ = 1;
  while ((std::size_t(1) << m_) < alphabet_.size()) ++m_;
}

std::optional<std::vector<std::uint8_t>> BinarizedGame::encode(const Token& answer) const {
  const auto it = code_.find(answer);
  if (it == code_.end()) return std::nullopt;
  std::vector<std::uint8_t> bits(m_, 0);
  for (int i = 0; i < m_; ++i) bits[i] = it->second >> i & 1;
  return bits;
}

std::shared_ptr<const QuadeqEncoding> BinarizedGame::psi(const Token& q1, const Token& q2) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto& slot = cache_[{q1, q2}];
  if (slot) return slot;
  Round round;
  round.questions = {q1, q2, Token()};
  const std::uint32_t mask = (1u << m_) - 1;
  std::vector<Token> answers(3);
  auto v = [&](std::uint32_t x) {
    const std::uint32_t a1 = x & mask, a2 = x >> m_;
    if (a1 >= alphabet_.size() || a2 >= alphabet_.size()) return false;
    answers[0] = alphabet_[a1];
    answers[1] = alphabet_[a2];
    return g1_->accept(round, answers);
  };
  auto enc = std::make_shared<QuadeqEncoding>(predicate_to_quadeq(v, m_));
  enc->instance.label1 = q1;
  enc->instance.label2 = q2;
  slot = enc;
  return slot;
}

Round BinarizedGame::sample(Rng& rng) const {
  const Round r1 = g1_->sample(rng);
  Round round;
  round.questions.assign(3, Token());
  if (r1.auto_accept) {
    round.auto_accept = true;
    return round;
  }
  std::vector<Token> asked;
  for (const auto& q : r1.questions)
    if (!q.empty()) asked.push_back(q);
  require(asked.size() == 2, ErrorKind::InvalidInput, g1_->name() + ": binarization needs exactly two queried players");
  BinaryMemo memo{psi(asked[0], asked[1]), {}};
  memo.inner = quadeq_round(memo.psi->instance, 3, rng);
  round.questions = memo.inner.questions;
  round.memo = std::move(memo);
  return round;
}

bool BinarizedGame::accept(const Round& round, std::span<const Token> answers) const {
  if (round.auto_accept) return true;
  const auto* memo = std::any_cast<BinaryMemo>(&round.memo);
  return memo && quadeq_check(memo->psi->instance, memo->inner, answers);
}

FunctionStrategy lift_binarized(std::shared_ptr<const BinarizedGame> g, StrategyPtr base) {
  return FunctionStrategy([g, base](int player, const Token& t, Rng& rng) -> Token {
    const auto q = parse_quadeq_question(t);
    if (!q) return "0";
    auto bits_of = [&](const Token& label) {
      auto b = g->encode(base->answer(player, label, rng));
      return b ? *b : std::vector<std::uint8_t>(std::size_t(g->answer_bits()), 0);
    };
    if (q->kind == 1) {
      const auto b = bits_of(q->label1);
      if (b.size() != q->bits.size()) return "0";
      std::uint8_t s = 0;
      for (std::size_t i = 0; i < b.size(); ++i) s ^= b[i] & q->bits[i];
      return s ? "1" : "0";
    }
    const auto enc = g->psi(q->label1, q->label2);
    auto in = bits_of(q->label1);
    const auto b2 = bits_of(q->label2);
    in.insert(in.end(), b2.begin(), b2.end());
    return quadeq_honest_answer(enc->instance, enc->complete(in), *q);
  });
}

}  // namespace nlg
