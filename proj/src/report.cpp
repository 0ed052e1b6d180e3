#include "racediag/report.hpp"

namespace racediag {

Json meta_json(const TraceMeta& m) {
  return {{"events", m.events}, {"threads", m.threads}, {"vars", m.vars},  {"locks", m.locks},
          {"reads", m.reads},   {"writes", m.writes},   {"syncs", m.syncs}};
}

Json race_json(const Trace& t, const RacePair& p) {
  const auto [la, lb] = loc_pair(t, p);
  return {{"first", p.first},
          {"second", p.second},
          {"first_event", t.describe(p.first)},
          {"second_event", t.describe(p.second)},
          {"category", to_string(p.category)},
          {"var", t.var_name(p.var)},
          {"loc_pair", {la, lb}}};
}

Json race_counts_json(const std::vector<RacePair>& races) {
  std::size_t n[3] = {0, 0, 0};
  for (const auto& r : races) ++n[static_cast<std::size_t>(r.category)];
  return {{"total", races.size()},
          {"write-write", n[0]},
          {"write-read", n[1]},
          {"read-write", n[2]}};
}

Json fasttrack_json(const Trace& t, const FastTrackReport& r) {
  Json races = Json::array();
  std::size_t n[3] = {0, 0, 0};
  for (const auto& x : r.races) {
    ++n[static_cast<std::size_t>(x.category)];
    races.push_back({{"pos", x.pos},
                     {"partner", x.partner},
                     {"event", t.describe(x.pos)},
                     {"partner_event", t.describe(x.partner)},
                     {"category", to_string(x.category)},
                     {"clock", x.clock.stamps()}});
  }
  return {{"races", races},
          {"counts",
           {{"total", r.races.size()},
            {"write-write", n[0]},
            {"write-read", n[1]},
            {"read-write", n[2]}}},
          {"racy_events", r.racy_events()},
          {"sound_up_to_first_race", r.sound_up_to_first_race}};
}

Json classification_json(const Trace& t, const Classification& c) {
  Json j = race_json(t, c.pair);
  j["verdict"] = to_string(c.verdict);
  j["lockset_fp"] = c.lockset_fp;
  j["unresolved"] = c.unresolved;
  j["witness"] = c.witness;
  return j;
}

std::string xg_string(const DiagnosisReport& r) {
  return std::to_string(r.totals.total()) + "/" + std::to_string(r.totals.guaranteed);
}

Json diagnosis_json(const Trace& t, const DiagnosisReport& r, const std::optional<OracleCheck>& oracle) {
  Json list = Json::array();
  for (const auto& c : r.classifications) list.push_back(classification_json(t, c));
  Json by_cat = Json::object();
  for (std::size_t k = 0; k < 3; ++k)
    by_cat[std::string(to_string(static_cast<RaceCategory>(k)))] = {
        {"guaranteed", r.by_category[k].guaranteed}, {"maybe", r.by_category[k].maybe}};
  Json j = {{"classifications", list},
            {"summary",
             {{"races", r.totals.total()},
              {"guaranteed", r.totals.guaranteed},
              {"maybe", r.totals.maybe},
              {"xg", xg_string(r)},
              {"by_category", by_cat},
              {"lockset_fp", r.lockset_fp},
              {"unresolved", r.unresolved}}},
            {"candidates",
             {{"reads", r.reads},
              {"wr_avg", r.wr_avg},
              {"wr_max", r.wr_max},
              {"edges", r.edges},
              {"max_cw", r.max_cw},
              {"max_cr", r.max_cr}}},
            {"timings_ms",
             {{"phase1", r.phase1_ms},
              {"phase2", r.phase2_ms},
              {"phase1+2", r.phase1_ms + r.phase2_ms}}}};
  if (oracle) {
    Json dis = Json::array();
    for (const auto& [c, v] : oracle->disagreements) {
      Json d = classification_json(t, c);
      d["oracle"] = to_string(v);
      dis.push_back(d);
    }
    j["oracle"] = {{"checked", oracle->checked},
                   {"agree", oracle->agree},
                   {"agreement", oracle->agreement()},
                   {"disagreements", dis}};
  }
  return j;
}

Json document(const std::string& command, const Trace& t) {
  return {{"tool", kToolName}, {"version", kVersion}, {"command", command}, {"trace", meta_json(t.meta())}};
}

std::string race_line(const Trace& t, const RacePair& p) {
  return t.describe(p.first) + " " + t.describe(p.second) + " " + std::string(to_string(p.category));
}

}  // namespace racediag
