#include <algorithm>
#include <numeric>

#include "nlg/reductions.hpp"
#include "nlg/token.hpp"

namespace nlg {

// ---------------------------------------------------------------- oracularization

namespace {

struct OracularMemo {
  Round source;
  int coord = 0;
};

std::vector<int> asked_coords(const Round& r) {
  std::vector<int> out;
  for (std::size_t i = 0; i < r.questions.size(); ++i)
    if (!r.questions[i].empty()) out.push_back(int(i));
  return out;
}

Round oracular_round(const Round& src, int first, int second, int coord) {
  Round round;
  round.questions.assign(3, Token());
  round.questions[first] = "T" + pack(src.questions);
  round.questions[second] = "S" + src.questions[coord];
  round.memo = OracularMemo{src, coord};
  return round;
}

}  // namespace

OracularGame::OracularGame(GamePtr g1) : g1_(std::move(g1)) {
  require(g1_ && g1_->players() == 3, ErrorKind::InvalidInput, "oracularization needs a 3-player game");
}

Round OracularGame::sample(Rng& rng) const {
  Round src = g1_->sample(rng);
  const int first = int(rng.below(3));
  const int second = (first + 1 + int(rng.below(2))) % 3;
  if (src.auto_accept) {
    Round round;
    round.questions.assign(3, Token());
    round.auto_accept = true;
    return round;
  }
  const auto coords = asked_coords(src);
  require(!coords.empty(), ErrorKind::InvalidInput, g1_->name() + ": round queries nobody");
  const int coord = coords[rng.below(coords.size())];
  return oracular_round(src, first, second, coord);
}

bool OracularGame::accept(const Round& round, std::span<const Token> answers) const {
  if (round.auto_accept) return true;
  if (round.questions.size() != 3 || answers.size() != 3) return false;
  int it = -1, is = -1;
  for (int i = 0; i < 3; ++i) {
    const Token& q = round.questions[i];
    if (q.empty()) continue;
    if (q[0] == 'T' && it < 0) it = i;
    else if (q[0] == 'S' && is < 0) is = i;
    else return false;
  }
  if (it < 0 || is < 0) return false;
  const auto tuple = unpack(round.questions[it].substr(1));
  const auto tuple_answers = unpack(answers[it]);
  if (!tuple || tuple->size() != 3 || !tuple_answers || tuple_answers->size() != 3) return false;
  const Token single = round.questions[is].substr(1);
  // The single answer must match every coordinate carrying the same question.
  bool matched = false;
  for (int k = 0; k < 3; ++k)
    if (!(*tuple)[k].empty() && (*tuple)[k] == single) {
      matched = true;
      if ((*tuple_answers)[k] != answers[is]) return false;
    }
  if (!matched) return false;
  const auto* memo = std::any_cast<OracularMemo>(&round.memo);
  if (memo) return g1_->accept(memo->source, *tuple_answers);
  Round src;
  src.questions = *tuple;
  return g1_->accept(src, *tuple_answers);
}

std::optional<std::vector<WeightedRound>> OracularGame::enumerate(std::uint64_t cap) const {
  auto rounds = g1_->enumerate(cap);
  if (!rounds) return std::nullopt;
  require(rounds->size() * 6 * 3 <= cap, ErrorKind::TooLarge, "enumeration exceeds cap " + std::to_string(cap));
  std::vector<WeightedRound> out;
  for (auto& [w, src] : *rounds) {
    if (src.auto_accept) {
      out.push_back({w, src});
      continue;
    }
    const auto coords = asked_coords(src);
    const Rational each = w * Rational(1, 6 * std::int64_t(coords.size()));
    for (int first = 0; first < 3; ++first)
      for (int second = 0; second < 3; ++second) {
        if (first == second) continue;
        for (int c : coords) out.push_back({each, oracular_round(src, first, second, c)});
      }
  }
  return out;
}

std::optional<std::vector<Token>> OracularGame::answer_alphabet(std::uint64_t cap) const {
  auto a = g1_->answer_alphabet(cap);
  if (!a) return std::nullopt;
  std::vector<Token> ext = *a;
  ext.push_back("");
  require(std::uint64_t(ext.size()) * ext.size() * ext.size() + a->size() <= cap, ErrorKind::TooLarge,
          "answer alphabet exceeds cap " + std::to_string(cap));
  std::vector<Token> out = *a;
  for (const auto& x : ext)
    for (const auto& y : ext)
      for (const auto& z : ext) out.push_back(pack({x, y, z}));
  return out;
}

FunctionStrategy lift_oracular(StrategyPtr base) {
  return FunctionStrategy(
      [base](int player, const Token& t, Rng& rng) -> Token {
        if (t.empty()) return Token();
        if (t[0] == 'S') return base->answer(player, t.substr(1), rng);
        const auto tuple = t[0] == 'T' ? unpack(t.substr(1)) : std::nullopt;
        if (!tuple) return "0";
        std::vector<Token> out;
        for (const auto& q : *tuple) out.push_back(q.empty() ? Token() : base->answer(player, q, rng));
        return pack(out);
      },
      base->deterministic());
}

// ---------------------------------------------------------------- pair view

namespace {

struct PairMemo {
  Round round;
  int first = 0, second = 1;
};

}  // namespace

PairView::PairView(GamePtr g) : g_(std::move(g)) { require(g_ != nullptr, ErrorKind::InvalidInput, "no game"); }

PairRound PairView::from_round(Round round) const {
  PairRound pr;
  if (round.auto_accept) {
    pr.auto_accept = true;
    return pr;
  }
  const auto coords = asked_coords(round);
  require(coords.size() == 2, ErrorKind::InvalidInput, g_->name() + ": repetition needs exactly two queried players");
  PairMemo memo{std::move(round), coords[0], coords[1]};
  // In an oracularized game the tuple player takes the first role.
  if (dynamic_cast<const OracularGame*>(g_.get()) && memo.round.questions[memo.second][0] == 'T')
    std::swap(memo.first, memo.second);
  pr.first = memo.round.questions[memo.first];
  pr.second = memo.round.questions[memo.second];
  pr.memo = std::move(memo);
  return pr;
}

PairRound PairView::sample(Rng& rng) const { return from_round(g_->sample(rng)); }

bool PairView::check(const PairRound& r, const Token& a1, const Token& a2) const {
  if (r.auto_accept) return true;
  const auto* memo = std::any_cast<PairMemo>(&r.memo);
  if (!memo) return false;
  std::vector<Token> answers(memo->round.questions.size());
  answers[memo->first] = a1;
  answers[memo->second] = a2;
  return g_->accept(memo->round, answers);
}

std::optional<std::vector<std::pair<Rational, PairRound>>> PairView::enumerate(std::uint64_t cap) const {
  auto rounds = g_->enumerate(cap);
  if (!rounds) return std::nullopt;
  std::vector<std::pair<Rational, PairRound>> out;
  for (auto& [w, r] : *rounds) out.emplace_back(w, from_round(std::move(r)));
  return out;
}

// ---------------------------------------------------------------- repetition

RepeatedGame::RepeatedGame(GamePtr g, int k, int k2) : view_(std::move(g)), k_(k), k2_(k2) {
  require(k >= 1 && k2 >= 0, ErrorKind::InvalidInput, "repetition needs K >= 1 and K' >= 0");
}

std::string RepeatedGame::name() const {
  return "repeat(" + view_.game().name() + ", " + std::to_string(k_) + ", " + std::to_string(k2_) + ")";
}

namespace {

Round repeated_round(RepeatedMemo memo) {
  const std::size_t total = memo.pairs.size();
  std::vector<Token> firsts(total), seconds(total);
  for (std::size_t j = 0; j < total; ++j) {
    firsts[memo.slot_of[j]] = memo.pairs[j].first;
    seconds[memo.slot_of[j]] = memo.pairs[j].second;
  }
  Round round;
  round.questions.assign(3, Token());
  round.questions[memo.first_player] = pack(firsts);
  round.questions[memo.second_player] = pack(seconds);
  round.memo = std::move(memo);
  return round;
}

}  // namespace

Round RepeatedGame::sample(Rng& rng) const {
  RepeatedMemo memo;
  for (int j = 0; j < k_; ++j) memo.pairs.push_back(view_.sample(rng));
  for (int j = 0; j < k2_; ++j) {
    // Confuse pair: each side from its own independent round.
    PairRound c;
    c.first = view_.sample(rng).first;
    c.second = view_.sample(rng).second;
    memo.pairs.push_back(std::move(c));
  }
  memo.slot_of.resize(memo.pairs.size());
  std::iota(memo.slot_of.begin(), memo.slot_of.end(), 0);
  for (std::size_t i = memo.slot_of.size(); i > 1; --i) std::swap(memo.slot_of[i - 1], memo.slot_of[rng.below(i)]);
  memo.first_player = int(rng.below(3));
  memo.second_player = (memo.first_player + 1 + int(rng.below(2))) % 3;
  return repeated_round(std::move(memo));
}

bool RepeatedGame::accept(const Round& round, std::span<const Token> answers) const {
  if (round.auto_accept) return true;
  const auto* memo = std::any_cast<RepeatedMemo>(&round.memo);
  if (!memo || answers.size() != 3) return false;
  const auto a1 = unpack(answers[memo->first_player]);
  const auto a2 = unpack(answers[memo->second_player]);
  const std::size_t total = memo->pairs.size();
  if (!a1 || !a2 || a1->size() != total || a2->size() != total) return false;
  for (int j = 0; j < k_; ++j) {
    const int s = memo->slot_of[j];
    if (!view_.check(memo->pairs[j], (*a1)[s], (*a2)[s])) return false;
  }
  return true;
}

std::optional<std::vector<WeightedRound>> RepeatedGame::enumerate(std::uint64_t cap) const {
  if (k2_ != 0) return std::nullopt;
  auto base = view_.enumerate(cap);
  if (!base) return std::nullopt;
  std::uint64_t count = 6;
  for (int j = 0; j < k_; ++j) {
    require(count <= cap / std::max<std::uint64_t>(1, base->size() * std::uint64_t(j + 1)), ErrorKind::TooLarge,
            "enumeration exceeds cap " + std::to_string(cap));
    count *= base->size() * std::uint64_t(j + 1);
  }
  std::vector<WeightedRound> out;
  std::vector<std::size_t> pick(k_, 0);
  for (;;) {
    Rational w(1, 6);
    std::vector<PairRound> pairs;
    for (std::size_t c : pick) {
      w *= (*base)[c].first;
      pairs.push_back((*base)[c].second);
    }
    std::vector<int> perm(k_, 0);
    std::iota(perm.begin(), perm.end(), 0);
    std::int64_t nperm = 1;
    for (int j = 2; j <= k_; ++j) nperm *= j;
    do {
      for (int f = 0; f < 3; ++f)
        for (int s = 0; s < 3; ++s) {
          if (f == s) continue;
          out.push_back({w * Rational(1, nperm), repeated_round(RepeatedMemo{perm, pairs, f, s})});
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    std::size_t i = 0;
    while (i < pick.size() && ++pick[i] == base->size()) pick[i++] = 0;
    if (i == pick.size()) break;
  }
  return out;
}

FunctionStrategy lift_repeated(StrategyPtr base) {
  return FunctionStrategy(
      [base](int player, const Token& t, Rng& rng) -> Token {
        const auto qs = unpack(t);
        if (!qs) return "0";
        std::vector<Token> out;
        for (const auto& q : *qs) out.push_back(q.empty() ? Token() : base->answer(player, q, rng));
        return pack(out);
      },
      base->deterministic());
}

}  // namespace nlg
