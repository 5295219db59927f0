#include <map>
#include <unordered_map>

#include "nlg/protocols.hpp"

namespace nlg {

ExplicitGame compile_to_table(std::shared_ptr<const RefereeGame> g, std::uint64_t cap) {
  require(g != nullptr, ErrorKind::InvalidInput, "no game to compile");
  require(g->token_checkable(), ErrorKind::InvalidInput,
          g->name() + ": acceptance depends on referee-private data, no table exists");
  auto rounds = g->enumerate(cap);
  require(rounds.has_value(), ErrorKind::InvalidInput, g->name() + ": question distribution cannot be listed");
  auto alphabet = g->answer_alphabet(cap);
  require(alphabet.has_value(), ErrorKind::InvalidInput, g->name() + ": answer alphabet cannot be listed");
  require(alphabet->size() <= cap, ErrorKind::TooLarge, g->name() + ": answer alphabet exceeds cap");

  const int r = g->players();
  std::vector<std::string> labels{"-"};
  std::unordered_map<std::string, int> index{{"-", 0}};
  std::map<std::vector<int>, Rational> merged;
  for (const auto& wr : *rounds) {
    std::vector<int> tuple(r, 0);
    if (!wr.round.auto_accept)
      for (int i = 0; i < r; ++i) {
        const Token& t = wr.round.questions.at(i);
        if (t.empty()) continue;
        auto [it, fresh] = index.try_emplace(t, int(labels.size()));
        if (fresh) labels.push_back(t);
        tuple[i] = it->second;
      }
    auto [it, fresh] = merged.try_emplace(tuple, wr.weight);
    if (!fresh) it->second += wr.weight;
  }

  ExplicitGame table(g->name() + "-table", r, labels, *alphabet);
  for (auto& [tuple, w] : merged)
    if (w != Rational(0)) table.add_question(tuple, w);
  table.set_xor(g->is_xor());
  table.set_checker("delegate:" + g->name(), [g, labels, alphabet = *alphabet, r](std::span<const int> q,
                                                                                std::span<const int> a) {
    Round round;
    round.questions.assign(r, Token());
    bool any = false;
    for (int i = 0; i < r; ++i)
      if (q[i] != 0) {
        round.questions[i] = labels[q[i]];
        any = true;
      }
    round.auto_accept = !any;
    std::vector<Token> answers(r);
    for (int i = 0; i < r; ++i) answers[i] = alphabet[a[i]];
    return g->accept(round, answers);
  });
  table.validate();
  return table;
}

}  // namespace nlg
