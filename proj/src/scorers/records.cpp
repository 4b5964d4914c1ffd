//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molchord/scorers/records.h"

#include <cmath>
#include <initializer_list>
#include <map>
#include <set>

#include <json.hpp>

#include "molchord/error.h"
#include "molchord/metrics/metrics.h"
#include "molchord/molgraph/molecule.h"
#include "molchord/util/io.h"

namespace molchord {
namespace {
  using nlohmann::json;
  using nlohmann::ordered_json;

  // Cursor over one record line, used to build located errors.
  class Line {
  public:
    Line(std::string_view source, std::size_t number, json obj)
        : source_(source), number_(number), obj_(std::move(obj)) { }

    [[noreturn]] void fail(Errc code, const std::string &what) const {
      throw Error(code, where() + what);
    }

    [[noreturn]] void violation(std::string_view field,
                                const std::string &what) const {
      fail(Errc::kSchemaViolation,
           "field '" + std::string(field) + "' " + what);
    }

    std::string where() const {
      return std::string(source_) + ":" + std::to_string(number_) + ": ";
    }

    void allow_only(std::initializer_list<std::string_view> keys) const {
      for (const auto &[k, v]: obj_.items()) {
        bool known = false;
        for (auto key: keys)
          known = known || k == key;
        if (!known)
          violation(k, "is not part of the schema");
      }
    }

    bool has(std::string_view key) const {
      return obj_.contains(key) && !obj_.at(std::string(key)).is_null();
    }

    const json &get(std::string_view key) const {
      if (!has(key))
        violation(key, "is required");
      return obj_.at(std::string(key));
    }

    std::string string(std::string_view key) const {
      const auto &v = get(key);
      if (!v.is_string())
        violation(key, "must be a string");
      return v.get<std::string>();
    }

    double number(std::string_view key) const {
      const auto &v = get(key);
      if (!v.is_number())
        violation(key, "must be a number");
      const double x = v.get<double>();
      if (!std::isfinite(x))
        violation(key, "must be finite");
      return x;
    }

    std::optional<double> opt_number(std::string_view key) const {
      if (!has(key))
        return std::nullopt;
      return number(key);
    }

    std::optional<std::string> opt_string(std::string_view key) const {
      if (!has(key))
        return std::nullopt;
      return string(key);
    }

    std::string smiles(std::string_view key, std::string_view text) const {
      try {
        return canonicalize(text);
      } catch (const Error &e) {
        violation(key, "is not valid SMILES: " + std::string(e.what()));
      }
    }

  private:
    std::string_view source_;
    std::size_t number_;
    json obj_;
  };

  template <class Fn>
  void for_each_line(std::string_view text, std::string_view source, Fn &&fn) {
    std::size_t number = 0;
    while (!text.empty()) {
      ++number;
      const auto nl = text.find('\n');
      std::string_view raw = text.substr(0, nl);
      text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
      if (!raw.empty() && raw.back() == '\r')
        raw.remove_suffix(1);
      if (raw.find_first_not_of(" \t") == std::string_view::npos)
        continue;
      json obj;
      try {
        obj = json::parse(raw);
      } catch (const json::exception &e) {
        throw Error(Errc::kMalformedLine, std::string(source) + ":"
                                              + std::to_string(number) + ": "
                                              + e.what());
      }
      if (!obj.is_object())
        throw Error(Errc::kMalformedLine, std::string(source) + ":"
                                              + std::to_string(number)
                                              + ": record must be an object");
      fn(Line(source, number, std::move(obj)));
    }
  }

  std::optional<std::string> raw_if_different(const std::string &raw,
                                              const std::string &canonical) {
    if (raw == canonical)
      return std::nullopt;
    return raw;
  }

  std::string join_lines(const std::vector<ordered_json> &rows) {
    std::string out;
    for (const auto &r: rows) {
      out += r.dump();
      out += '\n';
    }
    return out;
  }
}  // namespace

std::vector<ComplexRecord> parse_complexes(std::string_view text,
                                           std::string_view source) {
  std::vector<ComplexRecord> out;
  std::set<std::string> seen;
  for_each_line(text, source, [&](const Line &line) {
    line.allow_only({ "pocket_id", "ligand_smiles", "reference_vina",
                      "pocket_sequence", "homology" });
    ComplexRecord rec;
    rec.pocket_id = line.string("pocket_id");
    const auto &ligs = line.get("ligand_smiles");
    if (!ligs.is_array())
      line.violation("ligand_smiles", "must be an array of strings");
    for (const auto &l: ligs) {
      if (!l.is_string())
        line.violation("ligand_smiles", "must be an array of strings");
      rec.ligand_smiles.push_back(
          line.smiles("ligand_smiles", l.get<std::string>()));
    }
    rec.reference_vina = line.opt_number("reference_vina");
    rec.pocket_sequence = line.opt_string("pocket_sequence");
    if (auto h = line.opt_string("homology")) {
      const auto parsed = parse_homology(*h);
      if (!parsed)
        line.violation("homology", "must be homologous, non_homologous or "
                                   "unknown");
      rec.homology = *parsed;
    }
    if (!seen.insert(rec.pocket_id).second)
      line.fail(Errc::kDuplicateKey, "duplicate pocket_id " + rec.pocket_id);
    out.push_back(std::move(rec));
  });
  return out;
}

std::vector<ScoreRecord> parse_scores(std::string_view text,
                                      std::string_view source) {
  std::vector<ScoreRecord> out;
  std::set<std::pair<std::string, std::string>> seen;
  for_each_line(text, source, [&](const Line &line) {
    line.allow_only(
        { "pocket_id", "smiles", "vina", "qed", "sa_origin", "raw_smiles" });
    ScoreRecord rec;
    rec.pocket_id = line.string("pocket_id");
    const auto written = line.string("smiles");
    rec.smiles = line.smiles("smiles", written);
    rec.vina = line.number("vina");
    rec.qed = line.opt_number("qed");
    if (rec.qed && (*rec.qed < 0 || *rec.qed > 1))
      line.violation("qed", "must lie in [0, 1]");
    rec.sa_origin = line.opt_number("sa_origin");
    if (rec.sa_origin && (*rec.sa_origin < 1 || *rec.sa_origin > 10))
      line.violation("sa_origin", "must lie in [1, 10]");
    rec.raw_smiles = line.opt_string("raw_smiles");
    if (!rec.raw_smiles)
      rec.raw_smiles = raw_if_different(written, rec.smiles);
    if (!seen.insert({ rec.pocket_id, rec.smiles }).second)
      line.fail(Errc::kDuplicateKey,
                "duplicate score for (" + rec.pocket_id + ", " + rec.smiles
                    + ")");
    out.push_back(std::move(rec));
  });
  return out;
}

std::vector<PreferencePair> parse_pairs(std::string_view text,
                                        std::string_view source) {
  std::vector<PreferencePair> out;
  for_each_line(text, source, [&](const Line &line) {
    line.allow_only({ "pocket_id", "chosen", "rejected", "reward_chosen",
                      "reward_rejected" });
    PreferencePair p;
    p.pocket_id = line.string("pocket_id");
    p.chosen = line.smiles("chosen", line.string("chosen"));
    p.rejected = line.smiles("rejected", line.string("rejected"));
    p.reward_chosen = line.number("reward_chosen");
    p.reward_rejected = line.number("reward_rejected");
    out.push_back(std::move(p));
  });
  return out;
}

std::vector<GenerationRecord> parse_generations(std::string_view text,
                                                std::string_view source) {
  std::vector<GenerationRecord> out;
  for_each_line(text, source, [&](const Line &line) {
    line.allow_only({ "pocket_id", "smiles", "logprob", "raw_smiles" });
    GenerationRecord g;
    g.pocket_id = line.string("pocket_id");
    const auto written = line.string("smiles");
    g.smiles = line.smiles("smiles", written);
    g.logprob = line.opt_number("logprob");
    g.raw_smiles = line.opt_string("raw_smiles");
    if (!g.raw_smiles)
      g.raw_smiles = raw_if_different(written, g.smiles);
    out.push_back(std::move(g));
  });
  return out;
}

std::vector<ComplexRecord> load_complexes(const std::filesystem::path &path) {
  return parse_complexes(read_text_file(path), path.string());
}

std::vector<ScoreRecord> load_scores(const std::filesystem::path &path) {
  return parse_scores(read_text_file(path), path.string());
}

std::vector<PreferencePair> load_pairs(const std::filesystem::path &path) {
  return parse_pairs(read_text_file(path), path.string());
}

std::vector<GenerationRecord>
load_generations(const std::filesystem::path &path) {
  return parse_generations(read_text_file(path), path.string());
}

std::string serialize_complexes(const std::vector<ComplexRecord> &records) {
  std::vector<ordered_json> rows;
  for (const auto &r: records) {
    ordered_json j;
    j["pocket_id"] = r.pocket_id;
    j["ligand_smiles"] = r.ligand_smiles;
    if (r.reference_vina)
      j["reference_vina"] = *r.reference_vina;
    if (r.pocket_sequence)
      j["pocket_sequence"] = *r.pocket_sequence;
    if (r.homology != Homology::kUnknown)
      j["homology"] = std::string(homology_name(r.homology));
    rows.push_back(std::move(j));
  }
  return join_lines(rows);
}

std::string serialize_scores(const std::vector<ScoreRecord> &records) {
  std::vector<ordered_json> rows;
  for (const auto &r: records) {
    ordered_json j;
    j["pocket_id"] = r.pocket_id;
    j["smiles"] = r.smiles;
    j["vina"] = r.vina;
    if (r.qed)
      j["qed"] = *r.qed;
    if (r.sa_origin)
      j["sa_origin"] = *r.sa_origin;
    if (r.raw_smiles)
      j["raw_smiles"] = *r.raw_smiles;
    rows.push_back(std::move(j));
  }
  return join_lines(rows);
}

std::string serialize_pairs(const std::vector<PreferencePair> &records) {
  std::vector<ordered_json> rows;
  for (const auto &r: records) {
    ordered_json j;
    j["pocket_id"] = r.pocket_id;
    j["chosen"] = r.chosen;
    j["rejected"] = r.rejected;
    j["reward_chosen"] = r.reward_chosen;
    j["reward_rejected"] = r.reward_rejected;
    rows.push_back(std::move(j));
  }
  return join_lines(rows);
}

std::string
serialize_generations(const std::vector<GenerationRecord> &records) {
  std::vector<ordered_json> rows;
  for (const auto &r: records) {
    ordered_json j;
    j["pocket_id"] = r.pocket_id;
    j["smiles"] = r.smiles;
    if (r.logprob)
      j["logprob"] = *r.logprob;
    if (r.raw_smiles)
      j["raw_smiles"] = *r.raw_smiles;
    rows.push_back(std::move(j));
  }
  return join_lines(rows);
}

CoverageReport coverage_check(const std::vector<GenerationRecord> &generations,
                              const std::vector<ScoreRecord> &scores) {
  std::set<std::pair<std::string_view, std::string_view>> keys;
  for (const auto &s: scores)
    keys.emplace(s.pocket_id, s.smiles);
  CoverageReport report;
  for (const auto &g: generations)
    (keys.count({ g.pocket_id, g.smiles }) ? report.covered : report.missing)
        .push_back(g);
  return report;
}

}  // namespace molchord
