#include "gated/signal.hpp"

#include <istream>
#include <ostream>

#include "gated/errors.hpp"

namespace gated {

std::vector<std::size_t> Signal::active_rounds(std::size_t p, long prefix) const {
  const std::size_t end = prefix < 0 ? rounds.size() : std::min(rounds.size(), static_cast<std::size_t>(prefix));
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < end; ++t) {
    if (rounds[t].players.at(p).active) out.push_back(t);
  }
  return out;
}

long Signal::active_count(std::size_t p, long prefix) const {
  return static_cast<long>(active_rounds(p, prefix).size());
}

json round_to_json(const RoundRecord& r) {
  json samples = json::array();
  for (const auto& s : r.samples) {
    json players = json::array();
    for (const auto& p : s.players) {
      players.push_back({{"active", p.active},
                         {"delta", p.delta},
                         {"in", vector_to_json(p.input)},
                         {"c1", vector_to_json(p.c1)},
                         {"c2", vector_to_json(p.c2)}});
    }
    samples.push_back({{"x", vector_to_json(s.x)},
                       {"y", vector_to_json(s.y)},
                       {"gates", active_set_to_json(s.active)},
                       {"out", vector_to_json(s.net_out)},
                       {"loss", s.network_loss},
                       {"players", std::move(players)}});
  }
  json players = json::array();
  for (const auto& p : r.players) {
    players.push_back({{"active", p.active},
                       {"w", vector_to_json(p.weights)},
                       {"grad", vector_to_json(p.grad)},
                       {"loss_pred", p.loss_pred},
                       {"loss_grad", p.loss_grad}});
  }
  json doc = {{"t", r.t}, {"samples", std::move(samples)}, {"players", std::move(players)}};
  if (r.cog) {
    doc["cog"] = {{"context", r.cog->context},   {"function", r.cog->function},
                  {"subset", r.cog->subset},     {"probability", r.cog->probability},
                  {"explored", r.cog->explored}, {"observed_loss", r.cog->observed_loss}};
  }
  return doc;
}

RoundRecord round_from_json(const json& doc) {
  RoundRecord r;
  r.t = doc.at("t").get<long>();
  for (const auto& s : doc.at("samples")) {
    SampleRecord rec;
    rec.x = vector_from_json(s.at("x"));
    rec.y = vector_from_json(s.at("y"));
    rec.active = active_set_from_json(s.at("gates"));
    rec.net_out = vector_from_json(s.at("out"));
    rec.network_loss = s.at("loss").get<double>();
    for (const auto& p : s.at("players")) {
      rec.players.push_back({p.at("active").get<bool>(), p.at("delta").get<double>(), vector_from_json(p.at("in")),
                             vector_from_json(p.at("c1")), vector_from_json(p.at("c2"))});
    }
    r.samples.push_back(std::move(rec));
  }
  for (const auto& p : doc.at("players")) {
    r.players.push_back({p.at("active").get<bool>(), vector_from_json(p.at("w")), vector_from_json(p.at("grad")),
                         p.at("loss_pred").get<double>(), p.at("loss_grad").get<double>()});
  }
  if (doc.contains("cog")) {
    const auto& c = doc.at("cog");
    r.cog = CogDecision{c.at("context").get<std::string>(),  c.at("function").get<int>(),
                        c.at("subset").get<std::uint64_t>(), c.at("probability").get<double>(),
                        c.at("explored").get<bool>(),        c.at("observed_loss").get<double>()};
  }
  return r;
}

void write_round(std::ostream& out, const RoundRecord& r) { out << round_to_json(r).dump() << '\n'; }

void write_signal(std::ostream& out, const Signal& signal) {
  for (const auto& r : signal.rounds) write_round(out, r);
}

std::vector<RoundRecord> read_rounds(std::istream& in) {
  std::vector<RoundRecord> rounds;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      rounds.push_back(round_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ConfigError("signal: line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rounds;
}

}  // namespace gated
