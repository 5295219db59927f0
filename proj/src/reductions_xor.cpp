#include <algorithm>
#include <bit>
#include <set>

#include "nlg/io.hpp"
#include "nlg/reductions.hpp"
#include "nlg/token.hpp"

namespace nlg {

std::pair<FoldedTable, bool> fold(FoldedTable f) {
  const bool negate = !f.table.empty() && f.table[0];
  if (negate)
    for (auto& b : f.table) b ^= 1;
  return {std::move(f), negate};
}

Token folded_token(const FoldedTable& f) { return pack({pack(f.vars), to_hex(f.table)}); }

std::optional<FoldedTable> parse_folded(const Token& t) {
  const auto parts = unpack(t);
  if (!parts || parts->size() != 2) return std::nullopt;
  auto vars = unpack((*parts)[0]);
  if (!vars || vars->size() > 20) return std::nullopt;
  auto table = from_hex((*parts)[1], std::size_t(1) << vars->size());
  if (!table) return std::nullopt;
  return FoldedTable{std::move(*vars), std::move(*table)};
}

namespace {

std::vector<Token> asked(const Round& r) {
  std::vector<Token> out;
  if (!r.auto_accept)
    for (const auto& q : r.questions)
      if (!q.empty()) out.push_back(q);
  return out;
}

std::vector<Token> sorted_unique(std::vector<Token> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Positions of `sub` inside the sorted list `all`.
std::vector<int> positions(const std::vector<Token>& sub, const std::vector<Token>& all) {
  std::vector<int> out;
  for (const auto& t : sub) out.push_back(int(std::lower_bound(all.begin(), all.end(), t) - all.begin()));
  return out;
}

std::uint32_t restrict_index(std::uint32_t y, const std::vector<int>& pos) {
  std::uint32_t out = 0;
  for (std::size_t j = 0; j < pos.size(); ++j) out |= (y >> pos[j] & 1u) << j;
  return out;
}

std::vector<std::uint8_t> random_table(std::size_t n, Rng& rng) {
  std::vector<std::uint8_t> t(n);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 64 == 0) word = rng.next();
    t[i] = word >> (i % 64) & 1;
  }
  return t;
}

}  // namespace

XorGadgetGame::XorGadgetGame(GamePtr g1, double eps, int k, int k2, int max_subset)
    : g1_(std::move(g1)), eps_(eps), k_(k), k2_(k2), max_subset_(max_subset) {
  require(g1_ && g1_->players() == 3, ErrorKind::InvalidInput, "XOR gadget needs a 3-player game");
  const auto a = g1_->answer_alphabet(2);
  require(a && a->size() == 2 && std::set<Token>(a->begin(), a->end()) == std::set<Token>{"0", "1"},
          ErrorKind::InvalidInput, g1_->name() + ": XOR gadget needs answers in {0, 1}");
  require(eps >= 0 && eps <= 1, ErrorKind::InvalidInput, "noise rate must lie in [0, 1]");
  require(k >= 1 && k2 >= 0, ErrorKind::InvalidInput, "XOR gadget needs K >= 1 and K' >= 0");
  require(max_subset >= 1 && max_subset <= 20, ErrorKind::InvalidInput, "subset cap must lie in [1, 20]");
  require(3 * (k + k2) + k2 <= max_subset, ErrorKind::TooLarge,
          "K = " + std::to_string(k) + ", K' = " + std::to_string(k2) + " can exceed the subset cap " +
              std::to_string(max_subset));
}

std::string XorGadgetGame::name() const {
  return "xor(" + g1_->name() + ", " + std::to_string(k_) + ", " + std::to_string(k2_) + ")";
}

Round XorGadgetGame::sample(Rng& rng) const {
  const int total = k_ + k2_;
  std::vector<Round> rounds;
  std::vector<Token> u, w;
  for (int k = 0; k < total; ++k) {
    rounds.push_back(g1_->sample(rng));
    const auto q = asked(rounds.back());
    w.insert(w.end(), q.begin(), q.end());
    if (k < k_) {
      if (!q.empty()) u.push_back(q[rng.below(q.size())]);
    } else {
      // Confuse slot: a question from the single-player marginal, i.e. a
      // uniformly chosen question of a fresh round.
      for (int tries = 0; tries < 1000; ++tries) {
        const auto f = asked(g1_->sample(rng));
        if (f.empty()) continue;
        u.push_back(f[rng.below(f.size())]);
        break;
      }
    }
  }
  u = sorted_unique(std::move(u));
  w = sorted_unique(std::move(w));
  std::vector<Token> z = u;
  z.insert(z.end(), w.begin(), w.end());
  z = sorted_unique(std::move(z));
  require(int(z.size()) <= max_subset_, ErrorKind::TooLarge, "variable set exceeds the subset cap");

  // psi over W: every sampled round accepts the answers read off y.
  std::vector<std::uint8_t> psi(std::size_t(1) << w.size());
  std::vector<Token> answers(3);
  for (std::uint32_t y = 0; y < psi.size(); ++y) {
    bool ok = true;
    for (const auto& r : rounds) {
      if (r.auto_accept) continue;
      for (std::size_t i = 0; i < 3; ++i) {
        if (r.questions[i].empty()) {
          answers[i].clear();
          continue;
        }
        const auto at = std::lower_bound(w.begin(), w.end(), r.questions[i]) - w.begin();
        answers[i] = (y >> at & 1) ? "1" : "0";
      }
      if (!g1_->accept(r, answers)) {
        ok = false;
        break;
      }
    }
    psi[y] = ok;
  }

  const auto f = random_table(std::size_t(1) << u.size(), rng);
  const auto g1 = random_table(std::size_t(1) << w.size(), rng);
  const auto u_in_z = positions(u, z), w_in_z = positions(w, z);
  std::vector<std::uint8_t> g2(std::size_t(1) << z.size());
  for (std::uint32_t y = 0; y < g2.size(); ++y) {
    const std::uint8_t mu = rng.bernoulli(eps_);
    g2[y] = f[restrict_index(y, u_in_z)] ^ g1[restrict_index(y, w_in_z)] ^ mu;
  }
  // (g and psi) with -1 read as "true": g where psi holds, +1 elsewhere.
  FoldedTable tw{w, g1}, tz{z, g2};
  for (std::uint32_t y = 0; y < tw.table.size(); ++y) tw.table[y] &= psi[y];
  for (std::uint32_t y = 0; y < tz.table.size(); ++y) tz.table[y] &= psi[restrict_index(y, w_in_z)];

  std::array<int, 3> perm{0, 1, 2};
  for (int i = 2; i > 0; --i) std::swap(perm[i], perm[rng.below(std::uint64_t(i) + 1)]);
  Round round;
  round.questions.assign(3, Token());
  XorMemo memo;
  const FoldedTable tables[3] = {{u, f}, tw, tz};
  for (int k = 0; k < 3; ++k) {
    auto [rep, negated] = fold(tables[k]);
    round.questions[perm[k]] = folded_token(rep);
    memo.sign[perm[k]] = negated;
  }
  round.memo = memo;
  return round;
}

bool XorGadgetGame::accept(const Round& round, std::span<const Token> answers) const {
  if (round.auto_accept) return true;
  const auto* memo = std::any_cast<XorMemo>(&round.memo);
  if (!memo || answers.size() != 3) return false;
  int parity = 0;
  for (int i = 0; i < 3; ++i) {
    if (answers[i] != "0" && answers[i] != "1") return false;
    parity ^= (answers[i] == "1") ^ memo->sign[i];
  }
  return parity == 0;
}

FunctionStrategy lift_xor(StrategyPtr base) {
  return FunctionStrategy(
      [base](int player, const Token& t, Rng& rng) -> Token {
        const auto f = parse_folded(t);
        if (!f) return "0";
        std::uint32_t y = 0;
        for (std::size_t j = 0; j < f->vars.size(); ++j)
          if (base->answer(player, f->vars[j], rng) == "1") y |= 1u << j;
        return f->table[y] ? "1" : "0";
      },
      base->deterministic());
}

// ---------------------------------------------------------------- Fourier

double FourierTable::parseval() const {
  double s = 0;
  for (double c : coeff) s += c * c;
  return s;
}

FourierTable fourier_transform(int u, const std::function<int(std::uint32_t)>& a) {
  require(u >= 0 && u <= 4, ErrorKind::TooLarge, "Fourier tables are limited to |U| <= 4");
  const std::size_t n = std::size_t(1) << (1u << u);
  FourierTable t{u, std::vector<double>(n)};
  for (std::uint32_t f = 0; f < n; ++f) {
    const int v = a(f);
    require(v == 1 || v == -1, ErrorKind::InvalidInput, "function values must be +-1");
    t.coeff[f] = v;
  }
  // chi_alpha(f) = (-1)^{|alpha & f|}: a Walsh-Hadamard transform.
  for (std::size_t len = 1; len < n; len <<= 1)
    for (std::size_t i = 0; i < n; i += 2 * len)
      for (std::size_t j = i; j < i + len; ++j) {
        const double x = t.coeff[j], y = t.coeff[j + len];
        t.coeff[j] = x + y;
        t.coeff[j + len] = x - y;
      }
  for (auto& c : t.coeff) c /= double(n);
  return t;
}

std::uint32_t decode_sample(const FourierTable& t, Rng& rng) {
  const double target = rng.uniform() * t.parseval();
  std::uint32_t alpha = std::uint32_t(t.coeff.size() - 1);
  double acc = 0;
  for (std::uint32_t a = 0; a < t.coeff.size(); ++a) {
    acc += t.coeff[a] * t.coeff[a];
    if (acc > target) {
      alpha = a;
      break;
    }
  }
  const std::uint32_t points = 1u << t.u;
  if (alpha == 0) return std::uint32_t(rng.below(points));
  const int count = std::popcount(alpha);
  int pick = int(rng.below(std::uint64_t(count)));
  for (std::uint32_t x = 0; x < points; ++x)
    if (alpha >> x & 1 && pick-- == 0) return x;
  return 0;
}

// ---------------------------------------------------------------- pipeline

std::vector<Stage> build_pipeline(const Cnf& cnf, const std::string& last, const ReductionConfig& cfg) {
  static const std::vector<std::string> kStages{"gphi", "binary", "oracular", "repeat", "xor"};
  require(std::find(kStages.begin(), kStages.end(), last) != kStages.end(), ErrorKind::InvalidInput,
          "unknown stage '" + last + "' (expected gphi, binary, oracular, repeat or xor)");
  cfg.validate();
  std::vector<Stage> out;

  const GphiGame gphi = build_game_Gphi(cnf, cfg);
  const auto& L = gphi.lengths;
  out.push_back({"gphi", gphi.game,
                 [game = gphi.game](const std::vector<bool>& x) -> StrategyPtr {
                   return std::make_shared<FunctionStrategy>(honest_sat_strategy(*game, x));
                 },
                 {{"q", std::to_string(gphi.field.q)},
                  {"interval widenings", std::to_string(gphi.field.widenings)},
                  {"h", std::to_string(gphi.game->params().h)},
                  {"m", std::to_string(gphi.game->params().m)},
                  {"d", std::to_string(gphi.game->params().d)},
                  {"two-level m'", std::to_string(gphi.game->two_level().params().d2())},
                  {"question bits bound 6m ceil(log2 q)", std::to_string(L.bound_bits)},
                  {"longest two-level question bits", std::to_string(L.longest_two_level)},
                  {"longest question bits", std::to_string(L.longest)},
                  {"longest answer bits", std::to_string(L.longest_answer)}}});
  if (last == "gphi") return out;

  std::shared_ptr<const BinarizedGame> binary;
  std::function<StrategyPtr(const std::vector<bool>&)> source_honest = out[0].honest;
  std::string source = "gphi";
  try {
    binary = std::make_shared<BinarizedGame>(gphi.game, cfg);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::TooLarge) throw;
    const auto cv = std::make_shared<ClauseVariableGame>(cnf);
    binary = std::make_shared<BinarizedGame>(cv, cfg);
    source = "clause-variable (3-SAT game answers exceed " + std::to_string(cfg.max_answer_bits) + " bits)";
    source_honest = [cnf](const std::vector<bool>& x) -> StrategyPtr {
      return std::make_shared<FunctionStrategy>(honest_clause_strategy(cnf, x));
    };
  }
  out.push_back({"binary", binary,
                 [binary, source_honest](const std::vector<bool>& x) -> StrategyPtr {
                   return std::make_shared<FunctionStrategy>(lift_binarized(binary, source_honest(x)));
                 },
                 {{"source", source},
                  {"source answer bits", std::to_string(binary->answer_bits())},
                  {"answer bits", "1"}}});
  const auto binary_honest = out.back().honest;
  if (last == "binary") return out;

  if (last == "xor") {
    auto x = std::make_shared<XorGadgetGame>(binary, cfg.xor_eps, cfg.xor_k, cfg.xor_k2, cfg.max_subset);
    out.push_back({"xor", x,
                   [binary_honest](const std::vector<bool>& a) -> StrategyPtr {
                     return std::make_shared<FunctionStrategy>(lift_xor(binary_honest(a)));
                   },
                   {{"eps", format_double(cfg.xor_eps)},
                    {"K", std::to_string(cfg.xor_k)},
                    {"K'", std::to_string(cfg.xor_k2)},
                    {"answer bits", "1"}}});
    return out;
  }

  auto orac = std::make_shared<OracularGame>(binary);
  out.push_back({"oracular", orac,
                 [binary_honest](const std::vector<bool>& a) -> StrategyPtr {
                   return std::make_shared<FunctionStrategy>(lift_oracular(binary_honest(a)));
                 },
                 {}});
  const auto orac_honest = out.back().honest;
  if (last == "oracular") return out;

  auto rep = std::make_shared<RepeatedGame>(orac, cfg.repeat_k, cfg.repeat_k2);
  out.push_back({"repeat", rep,
                 [orac_honest](const std::vector<bool>& a) -> StrategyPtr {
                   return std::make_shared<FunctionStrategy>(lift_repeated(orac_honest(a)));
                 },
                 {{"K", std::to_string(cfg.repeat_k)}, {"K'", std::to_string(cfg.repeat_k2)}}});
  return out;
}

}  // namespace nlg
